import io as stdio
import math

import numpy as np
import pytest

from pathvol import io as pathio
from pathvol.errors import NotBijective, OutOfDomain, RangeExceedsDomain, UnresolvedLevel
from pathvol.paths import (CadlagPath, ContinuousPath, affine, compose,
                           identity_path, zero_path)


def sine_fig_path(step=2 ** -10, end=1.0):
    grid = np.arange(0.0, end + step / 2, step)
    return ContinuousPath(grid, -np.sin(6.0 * np.pi * grid) / 6.0)


class TestContinuousPath:
    def test_identity_eval(self):
        p = identity_path(1.0)
        assert p.eval(0.5) == 0.5

    def test_linear_interpolation(self):
        p = ContinuousPath([0.0, 1.0], [0.0, 2.0])
        assert p.eval(0.25) == 0.5

    def test_sine_closed_form_at_node(self):
        # 0.25 is a grid node; the stored value is the closed form there
        p = sine_fig_path()
        assert p.eval(0.25) == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_eval_exact_at_every_node(self):
        rng = np.random.default_rng(0)
        grid = np.concatenate([[0.0], np.cumsum(rng.uniform(0.01, 1.0, 50))])
        vals = rng.standard_normal(51)
        p = ContinuousPath(grid, vals)
        got = p.eval(grid)
        assert np.array_equal(got, vals)

    def test_out_of_domain(self):
        p = identity_path(1.0)
        with pytest.raises(OutOfDomain):
            p.eval(-1e-12)
        with pytest.raises(OutOfDomain):
            p.eval(1.0 + 1e-12)

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            ContinuousPath([0.1, 1.0], [0.0, 1.0])  # grid must start at 0
        with pytest.raises(ValueError):
            ContinuousPath([0.0, 0.0], [0.0, 1.0])  # strictly increasing
        with pytest.raises(ValueError):
            ContinuousPath([0.0, 1.0], [0.0, np.inf])  # finite values

    def test_immutable(self):
        p = identity_path(1.0)
        with pytest.raises(ValueError):
            p.values[0] = 3.0

    def test_restrict(self):
        p = sine_fig_path()
        q = p.restrict(0.3)
        assert q.domain_end == pytest.approx(0.3)
        xs = np.linspace(0, 0.3, 17)
        assert np.allclose(q.eval(xs), p.eval(xs), atol=1e-15)


class TestAffine:
    def test_identity_minus_identity_is_zero(self):
        e = identity_path(1.0, n=9)
        assert np.all(affine(e, -1.0, 0.0, add_identity=True).values == 0.0)

    def test_zero_gives_identity(self):
        z = zero_path(1.0, n=9)
        out = affine(z, -1.0, 0.0, add_identity=True)
        assert np.array_equal(out.values, out.grid)

    def test_sine_drift_with_offset(self):
        # independent pointwise recomputation
        p = sine_fig_path()
        out = affine(p, -1.0, -0.1, add_identity=True)
        expected = p.grid + np.sin(6.0 * np.pi * p.grid) / 6.0 - 0.1
        assert np.allclose(out.values, expected, atol=1e-15)

    def test_affine_round_trip(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            grid = np.concatenate([[0.0], np.cumsum(rng.uniform(0.01, 1.0, 30))])
            p = ContinuousPath(grid, rng.standard_normal(31))
            a = rng.uniform(0.5, 3.0) * rng.choice([-1.0, 1.0])
            b = rng.standard_normal()
            back = affine(affine(p, a, b), 1.0 / a, -b / a)
            assert np.allclose(back.values, p.values, rtol=4e-16, atol=4e-16)


class TestCompose:
    def test_identity_outer(self):
        phi = ContinuousPath([0.0, 0.5, 1.0], [0.0, 0.2, 0.9])
        out = compose(identity_path(2.0), phi)
        assert np.allclose(out.values, phi.values, atol=1e-15)

    def test_identity_inner(self):
        p = sine_fig_path()
        out = compose(p, identity_path(1.0, n=1025))
        probe = np.linspace(0, 1, 41)
        assert np.allclose(out.eval(probe), p.eval(probe), atol=1e-12)

    def test_pointwise_recomputation(self):
        p = sine_fig_path()
        inner = ContinuousPath([0.0, 0.25, 0.5], [0.0, 0.3, 0.8])
        out = compose(p, inner)
        assert np.allclose(out.values, p.eval(inner.values), atol=1e-15)

    def test_range_exceeds_domain(self):
        inner = ContinuousPath([0.0, 1.0], [0.0, 3.0])
        with pytest.raises(RangeExceedsDomain):
            compose(identity_path(2.0), inner)

    def test_monotone_inner_required(self):
        inner = ContinuousPath([0.0, 0.5, 1.0], [0.0, 0.6, 0.4])
        with pytest.raises(NotBijective):
            compose(identity_path(2.0), inner)


class TestCadlagPath:
    def make_staircase(self):
        # value x for x<1, jump to x+1 on [1, 2], +inf beyond 2
        return CadlagPath([0.0, 1.0, 2.0], [0.0, 1.0, 3.0], [0.0, 2.0, 3.0],
                          infinite_from=2.0)

    def test_right_continuity(self):
        p = self.make_staircase()
        assert p.eval(1.0) == 2.0
        assert p.left_limit(1.0) == 1.0

    def test_interpolation_between_breakpoints(self):
        p = self.make_staircase()
        assert p.eval(0.5) == 0.5
        assert p.eval(1.5) == 2.5

    def test_infinite_region(self):
        p = self.make_staircase()
        assert p.eval(2.0) == math.inf
        assert p.eval(5.0) == math.inf

    def test_unresolved_region(self):
        p = CadlagPath([0.0, 1.0], [0.0, 1.0], [0.0, 1.0], unresolved_from=1.0)
        with pytest.raises(UnresolvedLevel):
            p.eval(1.5)

    def test_monotone_enforced(self):
        with pytest.raises(ValueError):
            CadlagPath([0.0, 1.0], [0.0, 2.0], [3.0, 2.5])

    def test_jumps(self):
        p = self.make_staircase()
        levels, sizes = p.jumps()
        assert np.array_equal(levels, [1.0])
        assert np.array_equal(sizes, [1.0])

    def test_restrict(self):
        p = self.make_staircase()
        q = p.restrict(1.5)
        assert q.eval(1.5) == 2.5
        assert q.breakpoints[-1] == 1.5


class TestCsv:
    def test_continuous_round_trip(self):
        p = sine_fig_path(step=2 ** -5)
        buf = stdio.StringIO()
        pathio.write_continuous(p, buf, {"eps": 0.1, "omega": "sine"})
        buf.seek(0)
        q, meta = pathio.read_continuous(buf)
        assert np.array_equal(q.grid, p.grid)
        assert np.array_equal(q.values, p.values)
        assert meta["eps"] == 0.1
        assert meta["omega"] == "sine"

    def test_cadlag_round_trip(self):
        p = CadlagPath([0.0, 1.0, 2.0], [0.0, 1.0, 3.0], [0.0, 2.0, 3.0],
                       infinite_from=2.0)
        buf = stdio.StringIO()
        pathio.write_cadlag(p, buf)
        buf.seek(0)
        q, _ = pathio.read_cadlag(buf)
        assert np.array_equal(q.breakpoints, p.breakpoints)
        assert np.array_equal(q.left_values, p.left_values)
        assert q.infinite_from == 2.0
        assert q.eval(2.0) == math.inf

    def test_all_infinite_sentinel_file(self):
        p = CadlagPath([], [], [], infinite_from=0.0)
        buf = stdio.StringIO()
        pathio.write_cadlag(p, buf)
        text = buf.getvalue()
        assert "0.0,inf,inf" in text
        buf.seek(0)
        q, _ = pathio.read_cadlag(buf)
        assert q.infinite_from == 0.0

    def test_unresolved_na_rows(self):
        p = CadlagPath([0.0, 0.5], [0.0, 0.5], [0.0, 0.5], unresolved_from=0.5)
        buf = stdio.StringIO()
        pathio.write_cadlag(p, buf)
        assert "0.5,NA,NA" in buf.getvalue()
        buf.seek(0)
        q, _ = pathio.read_cadlag(buf)
        assert q.unresolved_from == 0.5

    def test_timestamp_line_optional(self):
        p = identity_path(1.0)
        with_ts = stdio.StringIO()
        pathio.write_continuous(p, with_ts, timestamp=True)
        without = stdio.StringIO()
        pathio.write_continuous(p, without, timestamp=False)
        assert "# generated" in with_ts.getvalue()
        assert "# generated" not in without.getvalue()

    def test_table_round_trip(self):
        buf = stdio.StringIO()
        pathio.write_table({"t": np.array([0.0, 1.0]), "y": np.array([2.0, 3.0])}, buf)
        buf.seek(0)
        kind, meta, rows = pathio.read_csv(buf)
        assert kind == "table"
        assert meta["columns"] == "t,y"
        assert rows == [["0.0", "2.0"], ["1.0", "3.0"]]
