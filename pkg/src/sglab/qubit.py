"""Two-level state space of a Stern-Gerlach particle.

Directions in physical space label magnet orientations; each direction and
exit port selects a pure qubit state. Everything here is exact 2x2 complex
linear algebra on numpy arrays, in the computational basis |0>, |1>.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# validity checks vs exact-algebra round trips
EPSILON = 1e-10
EXACT_TOL = 1e-12

TWO_PI = 2.0 * math.pi

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class PauliSet(NamedTuple):
    sigma_x: np.ndarray
    sigma_y: np.ndarray
    sigma_z: np.ndarray


PAULI = PauliSet(SIGMA_X, SIGMA_Y, SIGMA_Z)


class Port(enum.IntEnum):
    """Exit beam of a Stern-Gerlach stage."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, value) -> "Port":
        if isinstance(value, str):
            key = value.strip()
            if key in ("+", "+1", "plus"):
                return cls.PLUS
            if key in ("-", "-1", "minus"):
                return cls.MINUS
            raise ValueError(f"unknown port {value!r}")
        if isinstance(value, bool):
            raise ValueError(f"unknown port {value!r}")
        try:
            return cls(int(value))
        except ValueError:
            raise ValueError(f"port must be +1 or -1, got {value!r}") from None


@dataclass(frozen=True)
class Direction:
    """Unit vector in physical space given by polar angle ``theta`` and azimuth ``phi``.

    ``theta`` lies in [0, pi] and ``phi`` in [0, 2*pi). At the poles ``phi`` is
    forced to 0 so that equal vectors compare equal.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValueError("direction angles must be finite")
        if not 0.0 <= theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
        if not 0.0 <= phi < TWO_PI:
            raise ValueError(f"phi must lie in [0, 2*pi), got {phi!r}")
        if theta == 0.0 or theta == math.pi:
            phi = 0.0
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "Direction":
        """Build a direction, reducing any finite ``phi`` into [0, 2*pi)."""
        phi = math.fmod(float(phi), TWO_PI)
        if phi < 0.0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        return cls(theta, phi)

    @classmethod
    def from_cartesian(cls, vec) -> "Direction":
        x, y, z = (float(c) for c in vec)
        norm = math.sqrt(x * x + y * y + z * z)
        if norm == 0.0 or not math.isfinite(norm):
            raise ValueError("cannot take the direction of a zero or non-finite vector")
        x, y, z = x / norm, y / norm, z / norm
        rho = math.hypot(x, y)
        theta = math.atan2(rho, z)
        if rho == 0.0:
            return cls(theta, 0.0)
        return cls.from_angles(theta, math.atan2(y, x))

    @property
    def cartesian(self) -> tuple[float, float, float]:
        st = math.sin(self.theta)
        return (st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.cartesian)


E1 = Direction(math.pi / 2, 0.0)
E2 = Direction(math.pi / 2, math.pi / 2)
E3 = Direction(0.0, 0.0)


@dataclass(frozen=True)
class PureState:
    """Normalized qubit ``amp0|0> + amp1|1>`` stored in canonical phase.

    Construction fixes the global phase: ``amp0`` becomes real and
    non-negative, and when ``amp0`` vanishes ``amp1`` becomes real positive.
    """

    amp0: complex
    amp1: complex

    def __post_init__(self):
        a, b = complex(self.amp0), complex(self.amp1)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > EXACT_TOL:
            raise ValueError(f"state not normalized: |a|^2 + |b|^2 = {abs(a)**2 + abs(b)**2!r}")
        a, b = _canonical_phase(a, b)
        object.__setattr__(self, "amp0", a)
        object.__setattr__(self, "amp1", b)

    @classmethod
    def from_vector(cls, vec, *, normalize: bool = False) -> "PureState":
        a, b = (complex(c) for c in vec)
        if normalize:
            norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
            if norm == 0.0:
                raise ValueError("zero vector is not a state")
            a, b = a / norm, b / norm
        return cls(a, b)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)

    def density(self) -> np.ndarray:
        v = self.vector
        return np.outer(v, v.conj())


def _canonical_phase(a: complex, b: complex) -> tuple[complex, complex]:
    if abs(a) < EXACT_TOL:
        return 0j, complex(abs(b), 0.0)
    phase = cmath.exp(-1j * cmath.phase(a))
    return complex(abs(a), 0.0), b * phase


ZERO = PureState(1.0, 0.0)
ONE = PureState(0.0, 1.0)


class Measurement(NamedTuple):
    """Dichotomic projective measurement ``{M+, M-}``."""

    plus: np.ndarray
    minus: np.ndarray

    def effect(self, port: Port) -> np.ndarray:
        return self.plus if Port(port) is Port.PLUS else self.minus


def is_hermitian(m: np.ndarray, tol: float = EPSILON) -> bool:
    return bool(np.allclose(m, m.conj().T, rtol=0.0, atol=tol))


def check_density(rho, name: str = "rho") -> np.ndarray:
    """Return ``rho`` as a complex 2x2 array, raising ValueError if it is not a state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError(f"{name} has non-finite entries")
    if not is_hermitian(rho):
        raise ValueError(f"{name} is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > EPSILON:
        raise ValueError(f"{name} has trace {tr.real!r}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -EPSILON:
        raise ValueError(f"{name} is not positive semidefinite")
    return rho


def purity(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))


def is_pure(rho) -> bool:
    return abs(purity(rho) - 1.0) <= EPSILON


def state_from_direction(direction: Direction, port: Port = Port.PLUS) -> PureState:
    """Pure state prepared by a magnet along ``direction`` with ``port`` transmitted.

    The minus port gives the orthogonal state, whose Bloch vector is the
    antipode of ``direction``.
    """
    half = direction.theta / 2.0
    c, s = math.cos(half), math.sin(half)
    phase = cmath.exp(1j * direction.phi)
    if Port(port) is Port.PLUS:
        return PureState(c, phase * s)
    return PureState(s, -phase * c)


def bloch_vector(rho) -> tuple[float, float, float]:
    rho = np.asarray(rho, dtype=complex)
    return tuple(float(np.real(np.trace(rho @ s))) for s in PAULI)


def density_from_bloch(r) -> np.ndarray:
    r1, r2, r3 = r
    return 0.5 * (IDENTITY + r1 * SIGMA_X + r2 * SIGMA_Y + r3 * SIGMA_Z)


def density_from_direction(direction: Direction, port: Port = Port.PLUS) -> np.ndarray:
    """Projector ``(1 + s r.sigma)/2`` for port sign ``s``."""
    s = int(Port(port))
    return density_from_bloch([s * c for c in direction.cartesian])


def measurement_from_direction(direction: Direction) -> Measurement:
    return Measurement(
        density_from_direction(direction, Port.PLUS),
        density_from_direction(direction, Port.MINUS),
    )


def born_probability(rho, effect) -> float:
    """Probability ``Tr(rho E)`` of the outcome with effect ``E``.

    Values within EXACT_TOL outside [0, 1] are clamped; anything further out
    signals a broken state or effect and raises.
    """
    rho = np.asarray(rho, dtype=complex)
    effect = np.asarray(effect, dtype=complex)
    if not is_hermitian(effect):
        raise ValueError("effect is not Hermitian")
    p = float(np.real(np.trace(rho @ effect)))
    if p < 0.0:
        if p < -EXACT_TOL:
            raise ValueError(f"negative probability {p!r}")
        return 0.0
    if p > 1.0:
        if p > 1.0 + EXACT_TOL:
            raise ValueError(f"probability {p!r} exceeds 1")
        return 1.0
    return p


def inner_product(a: PureState, b: PureState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    return complex(np.vdot(a.vector, b.vector))


def antipode(direction: Direction) -> Direction:
    return Direction.from_angles(math.pi - direction.theta, direction.phi + math.pi)
