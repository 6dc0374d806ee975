import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import poisson

from hardrods.combinatorics import RodGeometry, equilibrium_distribution
from hardrods.exceptions import DomainError
from hardrods.master import (
    NumberDistribution,
    build_generator,
    drift_diffusion,
    evolve,
    observables,
    steady_state,
)

FIXED_LENGTH_FAMILY = [RodGeometry(240, 1), RodGeometry(1080, 9), RodGeometry(7080, 59)]


class TestDistribution:
    def test_validation(self):
        g = RodGeometry(4, 1)
        with pytest.raises(DomainError):
            NumberDistribution(g, [0.5, 0.5])
        with pytest.raises(DomainError):
            NumberDistribution(g, [0.5, 0.6, 0.0])
        with pytest.raises(DomainError):
            NumberDistribution(g, [1.1, -0.1, 0.0])
        p = NumberDistribution(g, [1.0, -1e-13, 1e-13])
        assert p.p.min() >= 0

    def test_observables_conventions(self):
        g = RodGeometry(20, 1)
        o = observables(NumberDistribution.point_mass(g, 0))
        assert o.mean_density == 0 and o.q_ratio == 0
        o = observables(NumberDistribution.point_mass(g, 4))
        assert o.q_ratio == 0 and o.mean_density == pytest.approx(4 / 20)

    def test_poisson_gives_unit_q(self):
        g = RodGeometry(400, 1)
        p = poisson.pmf(np.arange(g.n_max + 1), 6.0)
        p /= p.sum()
        assert observables(NumberDistribution(g, p)).q_ratio == pytest.approx(1.0, abs=1e-9)


class TestGenerator:
    def test_small(self):
        gen = build_generator(RodGeometry(4, 1))
        np.testing.assert_allclose(gen.up, [4, 1, 0])
        np.testing.assert_allclose(gen.down, [0, 1, 2])
        G = gen.matrix().toarray()
        np.testing.assert_allclose(G.sum(axis=0), 0, atol=1e-14)
        p = np.array([0.2, 0.3, 0.5])
        np.testing.assert_allclose(gen.apply(p), G @ p, atol=1e-14)

    @pytest.mark.parametrize("g", [RodGeometry(12, 1), RodGeometry(30, 3)] + FIXED_LENGTH_FAMILY)
    def test_stationary(self, g):
        gen = build_generator(g)
        np.testing.assert_array_equal(gen.down, np.arange(g.n_max + 1))
        p = steady_state(gen)
        assert np.max(np.abs(gen.apply(p.p))) < 1e-12
        assert np.max(np.abs(gen.flux(p.p))) < 1e-12

    def test_steady_state_small(self):
        p = steady_state(build_generator(RodGeometry(4, 1)))
        np.testing.assert_allclose(p.p, [1 / 7, 4 / 7, 2 / 7], rtol=1e-14)

    def test_drift_diffusion(self):
        g = RodGeometry(240, 1)
        gen = build_generator(g)
        assert drift_diffusion(gen, 0) == (-240.0, 240.0)
        assert drift_diffusion(gen, g.n_max) == (g.n_max, g.n_max)
        drift = np.array([drift_diffusion(gen, n)[0] for n in range(g.n_max + 1)])
        crossing = int(np.argmax(drift >= 0))
        peak = int(np.argmax(equilibrium_distribution(g).p))
        assert abs(peak - crossing) <= 1


class TestEvolve:
    def test_equilibrium_is_fixed(self):
        g = RodGeometry(30, 1)
        gen = build_generator(g)
        p_eq = equilibrium_distribution(g)
        for d in evolve(gen, p_eq, [0, 0.5, 1, 5]):
            assert np.max(np.abs(d.p - p_eq.p)) < 1e-9

    def test_matches_dense_exponential(self):
        g = RodGeometry(20, 2)
        gen = build_generator(g)
        G = gen.matrix().toarray()
        p0 = NumberDistribution.point_mass(g, 0)
        t = np.array([0.0, 0.3, 0.7, 1.5])
        for omega in (1.0, 2.5):
            ref = [expm(omega * (omega * tk**2) * G) @ p0.p for tk in t]
            for method in ("tau", "t", "expm"):
                out = evolve(gen, p0, t, omega=omega, method=method)
                for d, r in zip(out, ref):
                    assert np.max(np.abs(d.p - r)) < 1e-8

    def test_time_variable_equivalence(self):
        g = RodGeometry(240, 1)
        gen = build_generator(g)
        p0 = NumberDistribution.point_mass(g, 0)
        t = np.linspace(0, 1.5, 31)
        a = evolve(gen, p0, t, method="tau")
        b = evolve(gen, p0, t, method="t")
        c = evolve(gen, p0, t, method="expm")
        for x, y, z in zip(a, b, c):
            assert x.total_variation(y) < 1e-8
            assert x.total_variation(z) < 1e-8

    def test_short_time_law(self):
        g = RodGeometry(50, 1)
        gen = build_generator(g)
        t = np.array([1e-4, 3e-4, 1e-3])
        out = evolve(gen, NumberDistribution.point_mass(g, 0), t)
        np.testing.assert_allclose([d.p[1] for d in out], g.L * t**2, rtol=1e-4)

    @pytest.mark.parametrize("g", FIXED_LENGTH_FAMILY)
    def test_positive_normalised_and_monotone(self, g):
        gen = build_generator(g)
        p_eq = equilibrium_distribution(g)
        t = np.linspace(0, 3, 151)
        out = evolve(gen, NumberDistribution.point_mass(g, 0), t)
        tv = np.array([d.total_variation(p_eq) for d in out])
        assert np.all(np.diff(tv) <= 1e-9)
        for d in out:
            assert abs(d.p.sum() - 1) < 1e-9

    def test_bad_input(self):
        g = RodGeometry(12, 1)
        gen = build_generator(g)
        p0 = NumberDistribution.point_mass(g, 0)
        with pytest.raises(DomainError):
            evolve(gen, [0.5, 0.4, 0, 0, 0, 0, 0], [0, 1])
        with pytest.raises(DomainError):
            evolve(gen, p0, [1, 0])
        with pytest.raises(DomainError):
            evolve(gen, p0, [0, 1], omega=0)
        with pytest.raises(DomainError):
            evolve(gen, p0, [0, 1], method="euler")
        with pytest.raises(DomainError):
            evolve(gen, NumberDistribution.point_mass(RodGeometry(14, 1), 0), [0, 1])


def test_q_decreases_with_lambda():
    q = [observables(equilibrium_distribution(g)).q_ratio for g in FIXED_LENGTH_FAMILY]
    assert q[0] > q[1] > q[2]
    assert math.isclose(q[0], 0.3236, abs_tol=1e-3)
