import math

import numpy as np
import pytest

from conftest import random_direction
from sglab.qubit import (
    E1,
    E3,
    ZERO,
    Direction,
    Port,
    antipode,
    born_probability,
    density_from_direction,
    measurement_from_direction,
)
from sglab.simulator import (
    ExperimentPlan,
    SGStage,
    analytic_probability,
    derive_seed,
    estimate_probability,
    rotated_direction,
    simulate_chain,
    sweep_angle,
    wilson_interval,
)


def plan(*stages, n=10_000, seed=1, source="unpolarized"):
    return ExperimentPlan(tuple(SGStage(d, p) for d, p in stages), n, seed, source)


class TestAnalyticProbability:
    def test_same_direction(self):
        assert analytic_probability(E3, Port.PLUS, E3, Port.PLUS) == 1.0
        assert analytic_probability(E3, Port.PLUS, E3, Port.MINUS) == 0.0

    @pytest.mark.parametrize("sp", list(Port))
    @pytest.mark.parametrize("bp", list(Port))
    def test_perpendicular(self, sp, bp):
        assert analytic_probability(E3, sp, E1, bp) == pytest.approx(0.5, abs=1e-15)

    def test_thirty_degrees(self):
        d = Direction(math.pi / 6, 0.0)
        assert analytic_probability(E3, Port.PLUS, d, Port.PLUS) == pytest.approx(0.9330127018922193, abs=1e-12)

    def test_matches_born_rule(self, rng):
        for _ in range(500):
            r, u = random_direction(rng), random_direction(rng)
            for sp in Port:
                for bp in Port:
                    born = born_probability(density_from_direction(r, sp),
                                            measurement_from_direction(u).effect(bp))
                    assert analytic_probability(r, sp, u, bp) == pytest.approx(born, abs=1e-12)


class TestSimulateChain:
    def test_repeated_stage_never_loses(self):
        rec = simulate_chain(plan((E3, Port.PLUS), (E3, Port.PLUS)))
        survivors = rec.per_stage_transmitted[0]
        assert 0 < survivors < 10_000
        assert rec.final_outcomes == {1: survivors, -1: 0}

    def test_orthogonal_port_never_fires(self):
        rec = simulate_chain(plan((E3, Port.PLUS), (E3, Port.MINUS), source=ZERO))
        assert rec.final_outcomes[-1] == 0
        assert rec.per_stage_transmitted == (10_000, 0)

    def test_incompatible_middle_stage(self):
        rec = simulate_chain(plan((E3, Port.PLUS), (E1, Port.PLUS), (E3, Port.PLUS), n=100_000))
        frac = rec.final_outcomes[1] / rec.per_stage_transmitted[1]
        assert abs(frac - 0.5) < 0.01

    def test_many_repetitions(self, rng):
        for _ in range(5):
            d = random_direction(rng)
            port = Port.MINUS if rng.random() < 0.5 else Port.PLUS
            rec = simulate_chain(plan(*[(d, port)] * 6, n=5000, seed=int(rng.integers(2**63))))
            first = rec.per_stage_transmitted[0]
            assert rec.per_stage_transmitted == (first,) * 6

    def test_monotone_and_consistent(self, rng):
        for k in range(20):
            stages = [(random_direction(rng), Port.PLUS if rng.random() < .5 else Port.MINUS)
                      for _ in range(int(rng.integers(1, 6)))]
            rec = simulate_chain(plan(*stages, n=2000, seed=k))
            t = rec.per_stage_transmitted
            assert all(a >= b for a, b in zip(t, t[1:]))
            entering = (rec.n_source,) + t[:-1]
            for n_in, (plus, minus) in zip(entering, rec.per_stage_outcomes):
                assert plus + minus == n_in
            last_port = stages[-1][1]
            assert t[-1] == rec.final_outcomes[int(last_port)]

    def test_deterministic(self):
        p = plan((E3, Port.PLUS), (Direction(1.0, 2.0), Port.MINUS), (E1, Port.PLUS), seed=2**64 - 1)
        assert simulate_chain(p) == simulate_chain(p)

    def test_seed_matters(self):
        a = simulate_chain(plan((E1, Port.PLUS), seed=1))
        b = simulate_chain(plan((E1, Port.PLUS), seed=2))
        assert a != b

    @pytest.mark.parametrize("seed", [3, 4, 5])
    def test_frequency_converges(self, seed, rng):
        r, u = random_direction(rng), random_direction(rng)
        p = analytic_probability(r, Port.PLUS, u, Port.PLUS)
        rec = simulate_chain(plan((r, Port.PLUS), (u, Port.PLUS), n=100_000, seed=seed))
        assert abs(rec.final_outcomes[1] / rec.per_stage_transmitted[0] - p) < 0.005 * 2 ** 0.5

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            ExperimentPlan((), 10)
        with pytest.raises(ValueError):
            plan((E3, Port.PLUS), n=0)
        with pytest.raises(ValueError):
            plan((E3, Port.PLUS), seed=-1)
        with pytest.raises(ValueError):
            plan((E3, Port.PLUS), source="polarized")


class TestEstimate:
    def test_boundaries(self):
        low = estimate_probability(0, 40)
        assert low.p_hat == 0 and low.ci_low == 0 and low.ci_high > 0
        high = estimate_probability(40, 40)
        assert high.p_hat == 1 and high.ci_high == 1 and high.ci_low < 1

    # frozen from a bisection solve of (p_hat - p)^2 = z^2 p (1 - p) / n
    @pytest.mark.parametrize("k, n, low, high", [
        (50, 100, 0.4038315303659956, 0.5961684696340044),
        (9, 10, 0.5958499732043939, 0.9821237869049271),
        (1, 3, 0.06149194472039623, 0.7923403991979485),
    ])
    def test_matches_root_oracle(self, k, n, low, high):
        est = estimate_probability(k, n)
        assert est.ci_low == pytest.approx(low, abs=1e-12)
        assert est.ci_high == pytest.approx(high, abs=1e-12)

    def test_symmetric_at_half(self):
        est = estimate_probability(50, 100)
        assert est.p_hat - est.ci_low == pytest.approx(est.ci_high - est.p_hat, abs=1e-14)

    def test_errors(self):
        with pytest.raises(ValueError):
            estimate_probability(0, 0)
        with pytest.raises(ValueError):
            estimate_probability(5, 4)

    def test_ordering(self, rng):
        for _ in range(500):
            n = int(rng.integers(1, 1000))
            k = int(rng.integers(0, n + 1))
            for conf in (0.8, 0.95, 0.999):
                e = estimate_probability(k, n, conf)
                assert 0 <= e.ci_low <= e.p_hat <= e.ci_high <= 1

    def test_wider_at_higher_confidence(self):
        a = wilson_interval(30, 100, 0.9)
        b = wilson_interval(30, 100, 0.99)
        assert b[0] < a[0] and b[1] > a[1]


class TestSweep:
    def test_rotation_shifts_theta(self):
        d = Direction(0.4, 1.1)
        r = rotated_direction(d, 0.3)
        assert r.theta == pytest.approx(0.7, abs=1e-12)
        assert r.phi == pytest.approx(1.1, abs=1e-12)
        assert np.dot(r.vector, d.vector) == pytest.approx(math.cos(0.3), abs=1e-12)

    def test_rotation_over_pole(self):
        r = rotated_direction(E3, math.pi)
        assert np.allclose(r.vector, antipode(E3).vector, atol=1e-12)

    def test_analytic_column(self):
        rows = sweep_angle((E3, Port.PLUS), Port.PLUS, [0, math.pi / 2, math.pi], 100, seed=1)
        assert [r.analytic_p for r in rows] == pytest.approx([1, 0.5, 0], abs=1e-15)
        assert rows[0].estimate.p_hat == 1.0
        assert rows[2].estimate.p_hat == 0.0

    def test_analytic_matches_formula(self, rng):
        prep = random_direction(rng)
        angles = np.linspace(0, math.pi, 7)
        rows = sweep_angle((prep, Port.PLUS), Port.MINUS, angles, 10, seed=2)
        for a, row in zip(angles, rows):
            meas = rotated_direction(prep, a)
            assert row.analytic_p == pytest.approx(
                analytic_probability(prep, Port.PLUS, meas, Port.MINUS), abs=1e-12)

    def test_every_particle_reaches_measurement(self):
        rows = sweep_angle((Direction(1.0, 0.5), Port.MINUS), Port.PLUS, [0.2, 1.0], 1234, seed=9)
        assert all(r.estimate.n == 1234 for r in rows)

    def test_point_seeds_differ(self):
        assert len({derive_seed(7, i) for i in range(100)}) == 100
        assert derive_seed(7, 3) == derive_seed(7, 3)
