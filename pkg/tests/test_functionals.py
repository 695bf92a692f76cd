import math

import numpy as np
import pytest

from pathvol.errors import UnresolvedLevel
from pathvol.functionals import (ExitBarrier, first_exit, limit_generalized,
                                 limit_phi0, running_sup)
from pathvol.noise import NoiseSpec, extend, generate
from pathvol.paths import (CadlagPath, ContinuousPath, affine, identity_path,
                           zero_path)


def random_path(rng, n=40):
    grid = np.concatenate([[0.0], np.cumsum(rng.uniform(0.02, 0.5, n))])
    vals = np.cumsum(rng.standard_normal(n + 1) * 0.5)
    vals[0] = 0.0
    return ContinuousPath(grid, vals)


def brute_sup(p, x):
    """Exact sup of a piecewise-linear path over [0, x]."""
    below = p.values[p.grid <= x]
    return max(float(below.max()), p.eval(x))


def brute_first_crossing(p, level, n_dense=200_001):
    """First dense-grid point where the path strictly exceeds the level."""
    u = np.linspace(0.0, p.domain_end, n_dense)
    above = p.eval(u) > level
    idx = np.argmax(above)
    if not above[idx]:
        return math.inf
    return float(u[idx])


PIECEWISE = ContinuousPath([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 1.0, 2.0])


class TestRunningSup:
    def test_identity_fixed_point(self):
        e = identity_path(1.0, n=33)
        s = running_sup(e)
        assert np.array_equal(s.grid, e.grid)
        assert np.array_equal(s.values, e.values)

    def test_zero_path(self):
        z = zero_path(2.0, n=9)
        assert np.all(running_sup(z).values == 0.0)

    def test_already_non_decreasing(self):
        s = running_sup(PIECEWISE)
        assert np.array_equal(s.values, PIECEWISE.values)

    def test_against_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            p = random_path(rng)
            s = running_sup(p)
            for x in rng.uniform(0.0, p.domain_end, 25):
                assert s.eval(x) == pytest.approx(brute_sup(p, x), abs=1e-12)

    def test_pointwise_dominates(self):
        rng = np.random.default_rng(4)
        p = random_path(rng)
        s = running_sup(p)
        assert np.all(s.eval(p.grid) >= p.values - 1e-15)

    def test_idempotent_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            p = random_path(rng)
            s = running_sup(p)
            ss = running_sup(s)
            assert np.array_equal(ss.grid, s.grid)
            assert np.array_equal(ss.values, s.values)


class TestFirstExit:
    def test_identity_is_its_own_exit(self):
        e = identity_path(1.0, n=17)
        out = first_exit(e)
        for x in (0.0, 0.3, 0.99):
            assert out.eval(x) == pytest.approx(x, abs=1e-15)
        assert out.infinite_from == 1.0
        assert out.eval(1.0) == math.inf

    def test_zero_path_all_infinite(self):
        out = first_exit(zero_path(2.0))
        assert out.infinite_from == 0.0
        assert out.eval(0.0) == math.inf
        assert out.eval(1.7) == math.inf

    def test_piecewise_flat_jump(self):
        out = first_exit(PIECEWISE)
        levels, sizes = out.jumps()
        assert np.array_equal(levels, [1.0])
        assert np.array_equal(sizes, [1.0])
        assert out.left_limit(1.0) == 1.0
        assert out.eval(1.0) == 2.0
        assert out.eval(0.25) == 0.25
        assert out.eval(1.5) == 2.5

    def test_against_brute_force(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            p = random_path(rng)
            out = first_exit(p)
            top = float(running_sup(p).values[-1])
            for level in rng.uniform(0.0, max(top, 0.1), 20):
                expected = brute_first_crossing(p, level)
                if math.isinf(expected):
                    assert not out.is_finite_at(level)
                else:
                    assert out.eval(level) == pytest.approx(expected, abs=1e-4)

    def test_composition_identities_exact(self):
        # E(S(p)) == E(p) and S(S(p)) == S(p), node for node
        rng = np.random.default_rng(7)
        for _ in range(100):
            p = random_path(rng)
            e_p = first_exit(p)
            e_sp = first_exit(running_sup(p))
            assert np.array_equal(e_p.breakpoints, e_sp.breakpoints)
            assert np.array_equal(e_p.left_values, e_sp.left_values)
            assert np.array_equal(e_p.right_values, e_sp.right_values)
            assert e_p.infinite_from == e_sp.infinite_from

    def test_output_non_decreasing_right_continuous(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            out = first_exit(random_path(rng))
            assert np.all(out.left_values <= out.right_values)
            assert np.all(out.right_values[:-1] <= out.left_values[1:])

    def test_inverse_of_strictly_increasing(self):
        grid = np.linspace(0.0, 1.0, 65)
        p = ContinuousPath(grid, grid + 0.3 * grid ** 2)
        out = first_exit(p)
        for x in np.linspace(0.0, 1.25, 11):
            assert p.eval(out.eval(x)) == pytest.approx(x, abs=1e-12)

    def test_truncated_search_marks_unresolved(self):
        e = identity_path(2.0, n=65)
        out = first_exit(e, up_to=1.0)
        assert out.unresolved_from == pytest.approx(1.0)
        assert out.infinite_from is None
        assert out.eval(0.5) == pytest.approx(0.5)
        with pytest.raises(UnresolvedLevel):
            out.eval(1.5)

    def test_path_starting_above_zero(self):
        p = ContinuousPath([0.0, 1.0], [0.5, 2.0])
        out = first_exit(p)
        assert out.eval(0.2) == 0.0  # already above these levels
        assert out.eval(1.0) == pytest.approx(1.0 / 3.0)

    def test_path_starting_below_zero(self):
        p = ContinuousPath([0.0, 1.0], [-0.5, 0.5])
        out = first_exit(p)
        # crosses level 0 at u = 0.5
        assert out.eval(0.0) == pytest.approx(0.5)


class TestLimitPhi0:
    def test_zero_noise_identity_limit(self):
        out = limit_phi0(zero_path(3.0), up_to=1.0)
        for t in (0.0, 0.4, 1.0):
            assert out.eval(t) == pytest.approx(t, abs=1e-15)

    def test_identity_noise_all_infinite(self):
        out = limit_phi0(identity_path(2.0, n=65), up_to=1.0)
        assert out.infinite_from == 0.0
        assert out.eval(0.5) == math.inf

    def test_sine_staircase_matches_brute_force(self):
        s = generate(NoiseSpec(kind="sine", step=2 ** -12), 1.6)
        out = limit_phi0(s.realized, up_to=1.0)
        drift = affine(s.realized, -1.0, 0.0, add_identity=True)
        for t in np.linspace(0.01, 0.99, 23):
            expected = brute_first_crossing(drift, t)
            assert out.eval(t) == pytest.approx(expected, abs=1e-4)

    def test_sine_staircase_has_jumps(self):
        s = generate(NoiseSpec(kind="sine", step=2 ** -12), 1.6)
        out = limit_phi0(s.realized, up_to=1.0)
        levels, sizes = out.jumps()
        assert levels.size >= 2  # flat stretches of x - omega(x) become jumps
        assert np.all(sizes > 0.1)


class TestLimitGeneralized:
    def test_reduces_to_canonical(self):
        s = generate(NoiseSpec(kind="kl_bridge", step=2 ** -10, seed=3), 2.5)
        bar = ExitBarrier(theta=identity_path(2.0), sigma=1.0)
        a = limit_generalized(s.realized, bar, up_to=1.0)
        b = limit_phi0(s.realized, up_to=1.0)
        for t in np.linspace(0.0, 1.0, 41):
            va, vb = a.eval(t), b.eval(t)
            if math.isinf(vb):
                assert math.isinf(va)
            else:
                assert va == pytest.approx(vb, abs=1e-12)

    def test_zero_noise_scaled_barrier(self):
        bar = ExitBarrier(theta=ContinuousPath([0.0, 2.0], [0.0, 4.0]), sigma=1.0)
        out = limit_generalized(zero_path(8.0), bar, up_to=1.0)
        for t in (0.1, 0.5, 1.0):
            assert out.eval(t) == pytest.approx(2.0 * t, abs=1e-14)

    def test_barrier_validation(self):
        with pytest.raises(ValueError):
            ExitBarrier(theta=identity_path(1.0), sigma=0.0)
        with pytest.raises(ValueError):
            ExitBarrier(theta=ContinuousPath([0.0, 1.0], [0.1, 1.0]))
        with pytest.raises(ValueError):
            ExitBarrier(theta=ContinuousPath([0.0, 1.0], [0.0, -1.0]))

    @pytest.mark.slow
    def test_brownian_marginal_matches_subordinator(self):
        # scaled noise, linear barrier: the level-1 marginal over noise draws
        # follows the inverse-Gaussian law with delta = gamma = 1/sigma
        from pathvol.sde_mc import IgParams, ig_cdf, ks_distance

        sigma = 0.5
        bar = ExitBarrier(theta=identity_path(1.0), sigma=sigma)
        vals = np.empty(1500)
        for i in range(vals.size):
            stream = generate(NoiseSpec(kind="brownian", step=2 ** -9,
                                        seed=(7, 5, i)), 4.0)
            while True:
                drift = affine(stream.realized, -sigma, 0.0, add_identity=True)
                if running_sup(drift).values[-1] > 1.0001:
                    break
                stream = extend(stream, stream.domain_end * 2.0)
            vals[i] = limit_generalized(stream.realized, bar, up_to=1.0).eval(1.0)
        params = IgParams(delta=1.0 / sigma, gamma=1.0 / sigma)
        assert np.isfinite(vals).all()
        assert vals.mean() == pytest.approx(params.mean(1.0), rel=0.08)
        ks = ks_distance(vals, lambda x: ig_cdf(x, params, 1.0))
        assert ks < 0.055  # 1.5x the 99% band plus discretization margin
