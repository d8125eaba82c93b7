import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sglab.hopf import (
    NorthPoleError,
    PointAtInfinityError,
    SpherePoint,
    SpinorPair,
    canonical_preimage,
    fiber_sample,
    h_map,
    hopf_projection,
    stereographic,
    stereographic_inverse,
)
from sglab.qubit import Direction, bloch_vector, state_from_direction

R = 1 / math.sqrt(2)


def random_pair(rng) -> SpinorPair:
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return SpinorPair(complex(v[0], v[1]), complex(v[2], v[3]))


def random_point(rng) -> SpherePoint:
    v = rng.normal(size=3)
    return SpherePoint.normalized(*v)


def close(p: SpherePoint, q, tol):
    return np.allclose(p.as_array(), np.asarray(q, dtype=float), atol=tol, rtol=0)


class TestTypes:
    def test_pair_normalization(self):
        with pytest.raises(ValueError):
            SpinorPair(1, 1)
        p = SpinorPair.normalized(3, 4j)
        assert abs(p.a) ** 2 + abs(p.b) ** 2 == pytest.approx(1, abs=1e-15)
        assert p.real_coordinates == pytest.approx((0.6, 0, 0, 0.8))

    def test_point_normalization(self):
        with pytest.raises(ValueError):
            SpherePoint(1, 1, 0)


class TestHMap:
    def test_examples(self):
        assert h_map(SpinorPair(1, 0)) == 0
        assert h_map(SpinorPair(R, R)) == pytest.approx(1)

    def test_infinity(self):
        with pytest.raises(PointAtInfinityError):
            h_map(SpinorPair(0, 1))

    def test_class_function(self, rng):
        for _ in range(200):
            p = random_pair(rng)
            phase = rng.uniform(0, 2 * math.pi)
            assert abs(h_map(p.rephased(phase)) - h_map(p)) < 1e-10 * max(1, abs(h_map(p)))


class TestStereographic:
    def test_south_pole(self):
        assert stereographic(SpherePoint(0, 0, -1)) == 0

    def test_equator(self):
        assert stereographic(SpherePoint(1, 0, 0)) == pytest.approx(1, abs=1e-15)
        assert stereographic(SpherePoint(0, 1, 0)) == pytest.approx(1j, abs=1e-15)
        assert stereographic(SpherePoint(0, -1, 0)) == pytest.approx(-1j, abs=1e-15)

    def test_north_pole(self):
        with pytest.raises(NorthPoleError):
            stereographic(SpherePoint(0, 0, 1))

    def test_similar_triangles(self, rng):
        # the image lies on the line from the north pole through the point
        for _ in range(200):
            p = random_point(rng)
            z = stereographic(p)
            t = 1 / (1 - p.x3)
            assert z == pytest.approx(complex(t * p.x1, t * p.x2), abs=1e-9 * max(1, abs(z)))

    def test_inverse_examples(self):
        assert close(stereographic_inverse(0), (0, 0, -1), 1e-15)
        assert close(stereographic_inverse(1), (1, 0, 0), 1e-15)

    @given(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
    def test_inverse_unit_norm(self, z):
        p = stereographic_inverse(z)
        assert abs(np.linalg.norm(p.as_array()) - 1) < 1e-12

    def test_round_trips(self, rng):
        for _ in range(500):
            z = complex(*rng.normal(scale=3, size=2))
            assert abs(stereographic(stereographic_inverse(z)) - z) < 1e-9
            p = random_point(rng)
            assert close(stereographic_inverse(stereographic(p)), p.as_array(), 1e-9)


class TestProjection:
    @pytest.mark.parametrize("a, b, target", [
        (1, 0, (0, 0, -1)),
        (0, 1, (0, 0, 1)),
        (R, R, (1, 0, 0)),
        (R, 1j * R, (0, 1, 0)),
    ])
    def test_examples(self, a, b, target):
        assert close(hopf_projection(SpinorPair(a, b)), target, 1e-15)

    def test_phase_invariance(self, rng):
        for _ in range(100):
            p = random_pair(rng)
            phase = rng.uniform(0, 2 * math.pi)
            assert close(hopf_projection(p.rephased(phase)), hopf_projection(p).as_array(), 1e-12)

    def test_chart_compatibility(self, rng):
        for _ in range(1000):
            p = random_pair(rng)
            if abs(p.a) <= 1e-6:
                continue
            assert close(stereographic_inverse(h_map(p)), hopf_projection(p).as_array(), 1e-9)

    def test_bloch_flip(self, rng):
        for _ in range(200):
            d = Direction(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            psi = state_from_direction(d)
            r1, r2, r3 = bloch_vector(psi.density())
            assert close(hopf_projection(SpinorPair(psi.amp0, psi.amp1)), (r1, r2, -r3), 1e-10)


class TestFiber:
    def test_south_pole(self):
        pairs = fiber_sample(SpherePoint(0, 0, -1), 4)
        assert len(pairs) == 4
        for p in pairs:
            assert abs(p.b) < 1e-15 and abs(abs(p.a) - 1) < 1e-15
            assert close(hopf_projection(p), (0, 0, -1), 1e-10)
        assert pairs[0] == SpinorPair(1, 0)

    def test_north_pole(self):
        (p,) = fiber_sample(SpherePoint(0, 0, 1), 1)
        assert p == SpinorPair(0, 1)

    def test_canonical_matches_ratio_chart(self, rng):
        # a real positive, b = (x1 + i x2) / (2a)
        for _ in range(200):
            t = random_point(rng)
            p = canonical_preimage(t)
            assert p.a.imag == 0 and p.a.real > 0
            assert p.b == pytest.approx(complex(t.x1, t.x2) / (2 * p.a.real), abs=1e-12)

    def test_closure_and_distinctness(self, rng):
        for _ in range(100):
            t = random_point(rng)
            n = int(rng.integers(1, 12))
            pairs = fiber_sample(t, n)
            for p in pairs:
                assert abs(abs(p.a) ** 2 + abs(p.b) ** 2 - 1) < 1e-12
                assert close(hopf_projection(p), t.as_array(), 1e-10)
            for p, q in zip(pairs, pairs[1:]):
                gap = abs(p.a - q.a) ** 2 + abs(p.b - q.b) ** 2
                assert gap > 1e-6

    def test_phases_are_a_circle(self):
        t = SpherePoint.normalized(1, 2, 3)
        base = canonical_preimage(t)
        for k, p in enumerate(fiber_sample(t, 6)):
            w = cmath.exp(2j * math.pi * k / 6)
            assert p.a == pytest.approx(w * base.a) and p.b == pytest.approx(w * base.b)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            fiber_sample(SpherePoint(0, 0, 1), 0)
