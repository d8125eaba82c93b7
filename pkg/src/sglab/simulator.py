"""Monte Carlo and closed-form statistics for chains of Stern-Gerlach stages.

Random numbers come from numpy's PCG64 bit generator seeded with the plan's
64-bit seed. The stream is consumed in a fixed order so a plan reproduces
bit-identical counts on every platform:

1. for an unpolarized source, one uniform per emitted particle (index order)
   picks |0> (u < 1/2) or |1>;
2. then, for each stage in chain order, one uniform per particle still in
   the beam (index order) decides the exit port: ``+`` iff ``u < Pr(+)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence, Union

import numpy as np

from sglab.qubit import (
    EXACT_TOL,
    ONE,
    ZERO,
    Direction,
    Port,
    PureState,
    born_probability,
    density_from_direction,
    measurement_from_direction,
    state_from_direction,
)

UNPOLARIZED = "unpolarized"
MAX_SEED = 2**64 - 1

Source = Union[str, PureState]


@dataclass(frozen=True)
class SGStage:
    """One magnet; ``selected_port`` is the beam let through (or the detector port on the last stage)."""

    direction: Direction
    selected_port: Port = Port.PLUS

    def __post_init__(self):
        if not isinstance(self.direction, Direction):
            raise TypeError("stage direction must be a Direction")
        object.__setattr__(self, "selected_port", Port(self.selected_port))


@dataclass(frozen=True)
class ExperimentPlan:
    stages: tuple[SGStage, ...]
    n_particles: int
    seed: int = 0
    source: Source = UNPOLARIZED

    def __post_init__(self):
        stages = tuple(self.stages)
        if not stages:
            raise ValueError("a plan needs at least one stage")
        if int(self.n_particles) < 1:
            raise ValueError("n_particles must be a positive integer")
        if not 0 <= int(self.seed) <= MAX_SEED:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not (self.source == UNPOLARIZED or isinstance(self.source, PureState)):
            raise ValueError(f"source must be {UNPOLARIZED!r} or a PureState")
        object.__setattr__(self, "stages", stages)
        object.__setattr__(self, "n_particles", int(self.n_particles))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class CountRecord:
    """Counts from one run of a plan.

    ``per_stage_outcomes[k]`` holds the number of particles leaving stage ``k``
    through the + and - ports; ``per_stage_transmitted[k]`` is the count at
    that stage's selected port. ``final_outcomes`` maps port sign to count
    at the last stage.
    """

    n_source: int
    per_stage_transmitted: tuple[int, ...]
    per_stage_outcomes: tuple[tuple[int, int], ...]
    final_outcomes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EstimateWithCI:
    p_hat: float
    ci_low: float
    ci_high: float
    n: int
    confidence: float = 0.95


def analytic_probability(prep_dir: Direction, prep_port: Port,
                         meas_dir: Direction, meas_port: Port) -> float:
    """Probability that a particle prepared on ``(prep_dir, prep_port)`` exits ``meas_port``.

    ``(1 + (s r).(b u)) / 2`` for port signs ``s``, ``b``.
    """
    s, b = int(Port(prep_port)), int(Port(meas_port))
    dot = sum(x * y for x, y in zip(prep_dir.cartesian, meas_dir.cartesian))
    p = 0.5 * (1.0 + s * b * dot)
    return min(1.0, max(0.0, p))


def _snap(p: float) -> float:
    # keeps certain outcomes certain despite rounding in Tr(rho M)
    if p < EXACT_TOL:
        return 0.0
    if p > 1.0 - EXACT_TOL:
        return 1.0
    return p


def simulate_chain(plan: ExperimentPlan) -> CountRecord:
    """Run ``plan.n_particles`` particles through the chain of stages.

    Blocked particles are lost. Survivors of a stage all leave it in the
    eigenstate of its selected port, so at most two distinct states (the
    unpolarized source mixture) are ever in flight.
    """
    rng = np.random.Generator(np.random.PCG64(plan.seed))
    n = plan.n_particles

    if plan.source == UNPOLARIZED:
        states = [ZERO.density(), ONE.density()]
        which = (rng.random(n) >= 0.5).astype(np.intp)
    else:
        states = [plan.source.density()]
        which = np.zeros(n, dtype=np.intp)

    transmitted = []
    outcomes = []
    last = len(plan.stages) - 1
    for k, stage in enumerate(plan.stages):
        meas = measurement_from_direction(stage.direction)
        p_plus = np.array([_snap(born_probability(rho, meas.plus)) for rho in states])
        u = rng.random(which.size)
        went_plus = u < p_plus[which]
        n_plus = int(np.count_nonzero(went_plus))
        n_minus = which.size - n_plus
        outcomes.append((n_plus, n_minus))
        kept = n_plus if stage.selected_port is Port.PLUS else n_minus
        transmitted.append(kept)
        if k < last:
            states = [density_from_direction(stage.direction, stage.selected_port)]
            which = np.zeros(kept, dtype=np.intp)

    n_plus, n_minus = outcomes[-1]
    return CountRecord(
        n_source=n,
        per_stage_transmitted=tuple(transmitted),
        per_stage_outcomes=tuple(outcomes),
        final_outcomes={1: n_plus, -1: n_minus},
    )


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    p = successes / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (p + z2n / 2.0) / denom
    margin = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials))
    low, high = center - margin, center + margin
    if successes == 0:
        low = 0.0
    if successes == trials:
        high = 1.0
    return min(max(0.0, low), p), max(min(1.0, high), p)


def estimate_probability(successes: int, trials: int, confidence: float = 0.95) -> EstimateWithCI:
    """Point estimate and Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie strictly between 0 and 1")
    low, high = wilson_interval(successes, trials, confidence)
    return EstimateWithCI(successes / trials, low, high, trials, confidence)


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for sub-experiment ``index`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rotated_direction(direction: Direction, angle: float) -> Direction:
    """Rotate ``direction`` by ``angle`` towards its polar unit vector.

    Equivalent to shifting theta by ``angle`` (continuing over the poles);
    at a pole the polar vector is taken at phi = 0.
    """
    r = direction.vector
    t, p = direction.theta, direction.phi
    e_theta = np.array([math.cos(t) * math.cos(p), math.cos(t) * math.sin(p), -math.sin(t)])
    return Direction.from_cartesian(math.cos(angle) * r + math.sin(angle) * e_theta)


@dataclass(frozen=True)
class SweepRow:
    angle: float
    analytic_p: float
    estimate: EstimateWithCI


def sweep_angle(prep: tuple[Direction, Port], meas_port: Port, angles: Sequence[float],
                n_per_point: int, seed: int = 0, confidence: float = 0.95) -> list[SweepRow]:
    """Probability of ``meas_port`` as the measuring magnet turns away from the preparation.

    Each point runs the two-stage plan (preparation, measurement) with the
    source emitting the prepared state, so all ``n_per_point`` particles reach
    the measuring magnet. Point ``i`` uses ``derive_seed(seed, i)``.
    """
    prep_dir, prep_port = prep
    prep_port, meas_port = Port(prep_port), Port(meas_port)
    angles = [float(a) for a in angles]
    if not angles:
        raise ValueError("angles must be non-empty")
    sign = int(prep_port) * int(meas_port)
    source = state_from_direction(prep_dir, prep_port)

    rows = []
    for i, alpha in enumerate(angles):
        meas_dir = rotated_direction(prep_dir, alpha)
        plan = ExperimentPlan(
            stages=(SGStage(prep_dir, prep_port), SGStage(meas_dir, meas_port)),
            n_particles=n_per_point,
            seed=derive_seed(seed, i),
            source=source,
        )
        rec = simulate_chain(plan)
        trials = rec.per_stage_transmitted[0]
        est = estimate_probability(rec.per_stage_transmitted[-1], trials, confidence)
        rows.append(SweepRow(alpha, 0.5 * (1.0 + sign * math.cos(alpha)), est))
    return rows
