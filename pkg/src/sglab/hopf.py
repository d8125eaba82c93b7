"""Hopf fibration S^3 -> S^2 built from the ratio chart and stereographic projection.

A normalized amplitude pair ``(a, b)`` is a point of S^3. Pairs differing by
a global phase are indistinguishable; the ratio ``h = b/a`` labels the
class, and the inverse equatorial stereographic projection carries it onto
the unit sphere. The composition extends to ``a = 0`` as

    pi(a, b) = (2 Re(b a*), 2 Im(b a*), |b|^2 - |a|^2).

Note the orientation: this projection sends |0> = (1, 0) to the south pole,
whereas the Bloch vector of |0> is the north pole. The two agree after
flipping the third coordinate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from sglab.qubit import EXACT_TOL

TWO_PI = 2.0 * math.pi


class PointAtInfinityError(ValueError):
    """The ratio chart b/a is undefined at a = 0."""


class NorthPoleError(ValueError):
    """Stereographic projection from the north pole has no image in the plane."""


@dataclass(frozen=True)
class SpinorPair:
    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > EXACT_TOL:
            raise ValueError("spinor pair must satisfy |a|^2 + |b|^2 = 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "SpinorPair":
        norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if norm == 0.0:
            raise ValueError("(0, 0) is not on S^3")
        return cls(a / norm, b / norm)

    def rephased(self, phase: float) -> "SpinorPair":
        w = cmath.exp(1j * phase)
        return SpinorPair(w * self.a, w * self.b)

    @property
    def real_coordinates(self) -> tuple[float, float, float, float]:
        return (self.a.real, self.a.imag, self.b.real, self.b.imag)


@dataclass(frozen=True)
class SpherePoint:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        if abs(self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2 - 1.0) > EXACT_TOL:
            raise ValueError("point is not on the unit sphere")
        for name in ("x1", "x2", "x3"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def normalized(cls, x1: float, x2: float, x3: float) -> "SpherePoint":
        norm = math.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
        if norm == 0.0:
            raise ValueError("origin is not on the sphere")
        return cls(x1 / norm, x2 / norm, x3 / norm)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])


def h_map(p: SpinorPair) -> complex:
    """Ratio ``b/a``; constant on phase orbits."""
    if abs(p.a) < EXACT_TOL:
        raise PointAtInfinityError("a = 0 maps to the point at infinity")
    return p.b / p.a


def stereographic(p: SpherePoint) -> complex:
    """Project from the north pole onto the equatorial plane, read as C."""
    one_minus = 1.0 - p.x3
    if one_minus < EXACT_TOL:
        raise NorthPoleError("the north pole (0, 0, 1) has no stereographic image")
    radius = math.sqrt(max(0.0, one_minus * (1.0 + p.x3))) / one_minus
    if p.x1 == 0.0 and p.x2 == 0.0:
        return 0j
    return radius * cmath.exp(1j * math.atan2(p.x2, p.x1))


def stereographic_inverse(z: complex) -> SpherePoint:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("plane point must be finite")
    x, y = z.real, z.imag
    r2 = x * x + y * y
    denom = r2 + 1.0
    return SpherePoint(2.0 * x / denom, 2.0 * y / denom, (r2 - 1.0) / denom)


def hopf_projection(p: SpinorPair) -> SpherePoint:
    w = p.b * p.a.conjugate()
    return SpherePoint.normalized(2.0 * w.real, 2.0 * w.imag, abs(p.b) ** 2 - abs(p.a) ** 2)


def canonical_preimage(target: SpherePoint) -> SpinorPair:
    """Phase representative of the fiber over ``target`` with ``a`` real and >= 0."""
    a = math.sqrt(max(0.0, (1.0 - target.x3) / 2.0))
    if a < EXACT_TOL:
        return SpinorPair(0j, 1 + 0j)
    # b = (x1 + i x2) / (2a), written to stay accurate near the north pole
    b_abs = math.sqrt(max(0.0, (1.0 + target.x3) / 2.0))
    if target.x1 == 0.0 and target.x2 == 0.0:
        b = complex(b_abs, 0.0)
    else:
        b = b_abs * cmath.exp(1j * math.atan2(target.x2, target.x1))
    return SpinorPair.normalized(complex(a, 0.0), b)


def fiber_sample(target: SpherePoint, n_phases: int) -> list[SpinorPair]:
    """``n_phases`` points of the circle over ``target``, at phases ``2 pi k / n``."""
    if n_phases < 1:
        raise ValueError("n_phases must be at least 1")
    base = canonical_preimage(target)
    return [base.rephased(TWO_PI * k / n_phases) for k in range(n_phases)]
