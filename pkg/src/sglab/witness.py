"""Dimension witnesses for black-box prepare-and-measure statistics.

Two scenarios are supported. In the U scenario there are N preparations and
one measurement with N outcomes; the witness is the average probability of
reading back the prepared label. In the W scenario there is one dichotomic
measurement per pair ``(x, x')`` with ``x > x'``; the witness sums the
squared gaps between ``Pr(+1 | x, (x, x'))`` and ``Pr(+1 | x', (x, x'))``.
Both are bounded from above by a function of the Hilbert-space dimension,
so observed values give a lower bound on it.

Preparations are labelled 1..N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from sglab.qubit import (
    EXACT_TOL,
    Direction,
    Measurement,
    Port,
    PureState,
    bloch_vector,
    check_density,
    density_from_direction,
    purity,
    state_from_direction,
)
from sglab.simulator import (
    ExperimentPlan,
    SGStage,
    analytic_probability,
    derive_seed,
    simulate_chain,
)

U_KIND = "U"
W_KIND = "W"
UNBOUNDED = "unbounded"
READOUT = "readout"
TABLE_TOL = 1e-9
ANALYTIC_TOL = 1e-9

Label = Union[str, tuple]


class NoTightDimensionError(ValueError):
    """The tightness equation has no integer root in [1, N]."""


def pairs(n_preps: int) -> list[tuple[int, int]]:
    """Pair measurements ``(x, x')`` with ``x > x'``, each exactly once."""
    return [(x, xp) for x in range(2, n_preps + 1) for xp in range(1, x)]


@dataclass(frozen=True)
class ProbabilityTable:
    """Conditional probabilities ``Pr(a | x, y)``.

    ``entries`` maps ``(x, y)`` to ``{a: probability}``. For the U scenario
    ``y`` is ``"readout"`` and ``a`` runs over 1..N; for the W scenario ``y``
    is a pair ``(x, x')`` and ``a`` is +1 or -1. Missing ``(x, y)`` cells are
    allowed until a witness needs them.
    """

    kind: str
    n_preps: int
    entries: Mapping[tuple[int, Label], Mapping[int, float]]

    def __post_init__(self):
        if self.kind not in (U_KIND, W_KIND):
            raise ValueError(f"kind must be 'U' or 'W', got {self.kind!r}")
        if int(self.n_preps) < 2:
            raise ValueError("a table needs at least two preparations")
        n = int(self.n_preps)
        valid_y = {READOUT} if self.kind == U_KIND else set(pairs(n))
        outcomes = set(range(1, n + 1)) if self.kind == U_KIND else {1, -1}
        clean = {}
        for (x, y), dist in self.entries.items():
            y = tuple(y) if not isinstance(y, str) else y
            if not 1 <= x <= n:
                raise ValueError(f"preparation {x} outside 1..{n}")
            if y not in valid_y:
                raise ValueError(f"measurement {y!r} not valid for a {self.kind} table with N={n}")
            extra = set(dist) - outcomes
            if extra:
                raise ValueError(f"outcomes {sorted(extra)} not valid for measurement {y!r}")
            probs = {a: float(p) for a, p in dist.items()}
            for a, p in probs.items():
                if not (-TABLE_TOL <= p <= 1.0 + TABLE_TOL):
                    raise ValueError(f"Pr({a}|{x},{y}) = {p!r} is not a probability")
            total = sum(probs.values())
            if abs(total - 1.0) > TABLE_TOL:
                raise ValueError(f"distribution for preparation {x}, measurement {y!r} sums to {total!r}")
            clean[(x, y)] = probs
        object.__setattr__(self, "n_preps", n)
        object.__setattr__(self, "entries", clean)

    def prob(self, outcome: int, prep: int, measurement: Label) -> float:
        key = (prep, measurement)
        if key not in self.entries:
            raise KeyError(f"missing entry for preparation {prep}, measurement {measurement!r}")
        return self.entries[key].get(outcome, 0.0)


@dataclass(frozen=True)
class AverageState:
    omega: np.ndarray
    purity: float


@dataclass(frozen=True)
class WitnessReport:
    witness_value: float
    witness_kind: str
    N: int
    bound_per_d: dict
    inferred_min_d: Union[int, str]
    tolerance: float = ANALYTIC_TOL
    tight_dimension: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "witness_kind": self.witness_kind,
            "N": self.N,
            "witness_value": self.witness_value,
            "bound_per_d": {str(d): b for d, b in sorted(self.bound_per_d.items())},
            "inferred_min_d": self.inferred_min_d,
            "tolerance": self.tolerance,
            "tight_dimension": self.tight_dimension,
        }


def u_witness(table: ProbabilityTable) -> float:
    """Average probability of guessing the preparation, ``(1/N) sum_x Pr(b=x | x)``."""
    if table.kind != U_KIND:
        raise ValueError("u_witness needs a U-scenario table")
    n = table.n_preps
    return sum(table.prob(x, x, READOUT) for x in range(1, n + 1)) / n


def u_bound(d: int, n: int) -> float:
    if d < 1 or n < 1:
        raise ValueError("d and N must be positive")
    return d / n


def w_witness(table: ProbabilityTable) -> float:
    if table.kind != W_KIND:
        raise ValueError("w_witness needs a W-scenario table")
    total = 0.0
    for x, xp in pairs(table.n_preps):
        gap = table.prob(1, x, (x, xp)) - table.prob(1, xp, (x, xp))
        total += gap * gap
    return total


def w_bound(d: int, n: int) -> float:
    """Largest W value reachable with preparations in dimension ``d``."""
    if d < 1 or n < 2:
        raise ValueError("need d >= 1 and N >= 2")
    return n * n / 2.0 * (1.0 - 1.0 / min(d, n))


def bound(kind: str, d: int, n: int) -> float:
    if kind == U_KIND:
        return u_bound(d, n)
    if kind == W_KIND:
        return w_bound(d, n)
    raise ValueError(f"unknown witness kind {kind!r}")


def trace_distance(rho, sigma) -> float:
    """Largest outcome-probability gap between two states over all effects.

    Sum of the positive eigenvalues of ``rho - sigma``.
    """
    rho = check_density(rho, "rho")
    sigma = check_density(sigma, "sigma")
    ev = np.linalg.eigvalsh(rho - sigma)
    return float(min(1.0, ev[ev > 0].sum()))


def fidelity(rho, sigma) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``, via the qubit closed form."""
    rho = check_density(rho, "rho")
    sigma = check_density(sigma, "sigma")
    overlap = float(np.real(np.trace(rho @ sigma)))
    dets = max(0.0, float(np.real(np.linalg.det(rho))) * float(np.real(np.linalg.det(sigma))))
    return float(min(1.0, math.sqrt(max(0.0, overlap + 2.0 * math.sqrt(dets)))))


@dataclass(frozen=True)
class FvdgCheck:
    holds: bool
    slack_low: float
    slack_high: float


def fuchs_van_de_graaf_check(rho, sigma, tol: float = 1e-9) -> FvdgCheck:
    """Check ``1 - D <= F <= sqrt(1 - D^2)``.

    ``slack_low = F - (1 - D)`` and ``slack_high = sqrt(1 - D^2) - F``; both
    are non-negative when the inequalities hold.
    """
    d = trace_distance(rho, sigma)
    f = fidelity(rho, sigma)
    low = f - (1.0 - d)
    high = math.sqrt(max(0.0, 1.0 - d * d)) - f
    return FvdgCheck(low >= -tol and high >= -tol, low, high)


def helstrom_measurement(rho, sigma) -> Measurement:
    """Projective measurement whose + outcome best separates ``rho`` from ``sigma``."""
    rho = check_density(rho, "rho")
    sigma = check_density(sigma, "sigma")
    delta = rho - sigma
    if np.abs(delta).max() <= EXACT_TOL:
        raise ValueError("states coincide; there is nothing to discriminate")
    ev, vecs = np.linalg.eigh(delta)
    plus = np.zeros((2, 2), dtype=complex)
    for lam, v in zip(ev, vecs.T):
        if lam >= 0:
            plus += np.outer(v, v.conj())
    return Measurement(plus, np.eye(2) - plus)


def helstrom_direction(rho, sigma) -> Direction:
    """Magnet orientation whose + port realizes the Helstrom measurement."""
    return Direction.from_cartesian(bloch_vector(helstrom_measurement(rho, sigma).plus))


def average_state_purity(states: Sequence[PureState]) -> AverageState:
    if not states:
        raise ValueError("need at least one state")
    omega = sum(s.density() for s in states) / len(states)
    return AverageState(omega, purity(omega))


def solve_dimension_tight(n: int) -> int:
    """Integer ``d`` in [1, N] where the U and W bounds coincide.

    Exact rational arithmetic; raises NoTightDimensionError when no root exists.
    """
    if n < 2:
        raise ValueError("N must be at least 2")
    roots = [
        d for d in range(1, n + 1)
        if Fraction(d, n) == Fraction(n * n, 2) * (1 - Fraction(1, min(d, n)))
    ]
    if len(roots) != 1:
        raise NoTightDimensionError(f"no tight dimension for N={n}")
    return roots[0]


def w_from_angles(thetas: Sequence[float]) -> float:
    """W for spin-up preparations at polar angles ``thetas`` read out along e3.

    ``(1/4) sum_{x > x'} (cos theta_x - cos theta_x')^2``.
    """
    if len(thetas) < 2:
        raise ValueError("need at least two angles")
    c = [math.cos(t) for t in thetas]
    return 0.25 * sum((c[i] - c[j]) ** 2 for i, j in itertools.combinations(range(len(c)), 2))


def infer_min_dimension(value: float, kind: str, n: int, tolerance: float = ANALYTIC_TOL):
    """Smallest ``d`` whose bound admits ``value``; ``"unbounded"`` if even d = N does not."""
    if value < 0:
        raise ValueError("witness values are non-negative")
    for d in range(1, n + 1):
        if value <= bound(kind, d, n) + tolerance:
            return d
    return UNBOUNDED


def witness_report(table: ProbabilityTable, tolerance: float = ANALYTIC_TOL) -> WitnessReport:
    n = table.n_preps
    value = u_witness(table) if table.kind == U_KIND else w_witness(table)
    try:
        tight = solve_dimension_tight(n)
    except NoTightDimensionError:
        tight = None
    return WitnessReport(
        witness_value=value,
        witness_kind=table.kind,
        N=n,
        bound_per_d={d: bound(table.kind, d, n) for d in range(1, n + 1)},
        inferred_min_d=infer_min_dimension(value, table.kind, n, tolerance),
        tolerance=tolerance,
        tight_dimension=tight,
    )


@dataclass(frozen=True)
class Preparation:
    direction: Direction
    port: Port = Port.PLUS

    def state(self) -> PureState:
        return state_from_direction(self.direction, self.port)

    def density(self) -> np.ndarray:
        return density_from_direction(self.direction, self.port)


def _readout_directions(kind: str, preps: Sequence[Preparation]) -> dict:
    n = len(preps)
    if kind == U_KIND:
        if n != 2:
            raise ValueError("Stern-Gerlach U tables can only be generated for N = 2")
        return {READOUT: _pair_direction(preps[0], preps[1])}
    return {(x, xp): _pair_direction(preps[x - 1], preps[xp - 1]) for x, xp in pairs(n)}


def _pair_direction(first: Preparation, second: Preparation) -> Direction:
    try:
        return helstrom_direction(first.density(), second.density())
    except ValueError:
        # identical preparations: every readout gives zero gap
        return first.direction


def build_table(kind: str, preparations: Sequence[Preparation], n_particles: Optional[int] = None,
                seed: int = 0) -> ProbabilityTable:
    """Probability table for magnet preparations read out by Helstrom-oriented magnets.

    W: measurement ``(x, x')`` is a magnet along the Helstrom direction for
    preparations ``x`` and ``x'``, outcome +1 on its + port. U (N = 2 only):
    one such magnet, outcome ``b = 1`` on + and ``b = 2`` on -.

    With ``n_particles`` None the entries are exact; otherwise each cell is a
    frequency from ``simulate_chain`` on the two-stage plan, the source
    emitting the prepared state, with cell ``i`` (row-major over measurement,
    then preparation) seeded by ``derive_seed(seed, i)``.
    """
    if kind not in (U_KIND, W_KIND):
        raise ValueError(f"kind must be 'U' or 'W', got {kind!r}")
    preps = list(preparations)
    if len(preps) < 2:
        raise ValueError("need at least two preparations")
    readouts = _readout_directions(kind, preps)

    entries = {}
    cell = 0
    for y, meas_dir in readouts.items():
        for x, prep in enumerate(preps, start=1):
            if n_particles is None:
                p_plus = analytic_probability(prep.direction, prep.port, meas_dir, Port.PLUS)
            else:
                plan = ExperimentPlan(
                    stages=(SGStage(prep.direction, prep.port), SGStage(meas_dir, Port.PLUS)),
                    n_particles=n_particles,
                    seed=derive_seed(seed, cell),
                    source=prep.state(),
                )
                rec = simulate_chain(plan)
                p_plus = rec.final_outcomes[1] / rec.per_stage_transmitted[0]
            cell += 1
            if kind == U_KIND:
                entries[(x, y)] = {1: p_plus, 2: 1.0 - p_plus}
            else:
                entries[(x, y)] = {1: p_plus, -1: 1.0 - p_plus}
    return ProbabilityTable(kind, len(preps), entries)
