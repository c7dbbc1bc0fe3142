import numpy as np
import pytest

from structrev.oracle import (GridDistribution, NotConverged, WindowMismatch, _censor, _walk,
                              cumulative_tables, initial_state, simulate, splitmix64,
                              total_variation, transition_tensor, truncated_stationary,
                              xorshift64star)
from structrev.presets import JACKSON_STANDARD, solve_traffic


def _product_form(n):
    t = solve_traffic(JACKSON_STANDARD)
    a = (1 - t.rho1) * t.rho1 ** np.arange(n + 1)
    b = (1 - t.rho2) * t.rho2 ** np.arange(n + 1)
    return np.outer(a, b)


def _point(n, a, b):
    g = np.zeros((n + 1, n + 1))
    g[a, b] = 1.0
    return g


class TestTruncated:
    def test_simple_walk_in_grid_mass(self, simple_walk):
        # a symmetric kernel censored by row renormalisation is reversible w.r.t. the kept row mass
        n = 20
        grid = truncated_stationary(simple_walk, n)
        p = transition_tensor(simple_walk, n)
        kept = np.array([[sum(p[a, b, i + 1, j + 1] for i in (-1, 0, 1) for j in (-1, 0, 1)
                              if a + i <= n and b + j <= n)
                          for b in range(n + 1)] for a in range(n + 1)])
        assert np.allclose(grid.values, kept / kept.sum(), atol=1e-12)
        assert grid.values[n, 5] == pytest.approx(0.75 * grid.values[5, 5], rel=1e-9)
        assert grid.values[n, n] == pytest.approx(0.5 * grid.values[5, 5], rel=1e-9)

    def test_censored_rows_stochastic(self, extra_model):
        q = _censor(transition_tensor(extra_model, 12))
        assert np.max(np.abs(q.sum(axis=(2, 3)) - 1.0)) <= 1e-15

    def test_jackson_product_form(self, jackson_model):
        grid = truncated_stationary(jackson_model, 60)
        assert total_variation(grid, _product_form(60), 30) <= 1e-3

    def test_residual_shrinks(self, extra_model):
        res = [truncated_stationary(extra_model, n).residual for n in (20, 40, 60)]
        assert res[0] >= res[1] >= res[2]
        assert res[2] <= 1e-10

    def test_not_converged(self, extra_model):
        with pytest.raises(NotConverged):
            truncated_stationary(extra_model, 20, max_iters=3)

    def test_grid_too_small(self, extra_model):
        with pytest.raises(ValueError):
            truncated_stationary(extra_model, 4)

    def test_csv(self, extra_model, tmp_path):
        grid = truncated_stationary(extra_model, 10)
        path = tmp_path / "grid.csv"
        grid.to_csv(path)
        rows = path.read_text().splitlines()
        assert rows[0] == "n1,n2,probability"
        assert len(rows) == 1 + 11 * 11
        n1, n2, v = rows[1].split(",")
        assert (n1, n2) == ("0", "0") and float(v) == grid(0, 0)


class TestGenerator:
    def test_splitmix_reference_value(self):
        _, out = splitmix64(0)
        assert out == 0xE220A8397B1DCDAF

    def test_compiled_stream_matches_reference(self):
        # right on a draw below 1/2, up otherwise: the visited path spells out the draws
        cum = np.tile(np.r_[0.5, np.full(8, np.inf)], (4, 1))
        steps = np.zeros((9, 2), dtype=np.int64)
        steps[0], steps[1] = (1, 0), (0, 1)
        n_steps = 64
        counts, outside = _walk(cum, steps, np.uint64(initial_state(2024)), n_steps, 0, n_steps)
        x, a, b = initial_state(2024), 0, 0
        expected = np.zeros_like(counts)
        for _ in range(n_steps):
            x, out = xorshift64star(x)
            if (out >> 11) * 2.0 ** -53 < 0.5:
                a += 1
            else:
                b += 1
            expected[a, b] += 1
        assert outside == 0
        assert np.array_equal(counts, expected)

    def test_tables_skip_zero_steps(self, singular_model):
        cum, _ = cumulative_tables(singular_model)
        for row, face in zip(cum, ["p0", "p1", "p2", "pplus"]):
            probs = getattr(singular_model, face).probs.ravel()
            last = np.flatnonzero(probs > 0)[-1]
            assert np.all(np.isinf(row[last:]))
            assert np.all(np.isfinite(row[:last]))
            assert np.all(np.diff(row[:last]) >= 0)


class TestSimulate:
    def test_deterministic(self, extra_model):
        a = simulate(extra_model, 100_000, seed=42)
        b = simulate(extra_model, 100_000, seed=42)
        assert np.array_equal(a.values, b.values)
        c = simulate(extra_model, 100_000, seed=43)
        assert not np.array_equal(a.values, c.values)

    def test_empty(self, extra_model):
        sim = simulate(extra_model, 500, seed=1, burn_in=500)
        assert sim.empty and sim.values.sum() == 0.0

    def test_bad_burn_in(self, extra_model):
        with pytest.raises(ValueError):
            simulate(extra_model, 10, seed=1, burn_in=11)

    def test_frequencies_sum(self, extra_model):
        sim = simulate(extra_model, 50_000, seed=5, burn_in=1000, n=60)
        assert sim.values.sum() + sim.outside == pytest.approx(1.0, abs=1e-12)

    def test_jackson_monte_carlo(self, jackson_model):
        sim = simulate(jackson_model, 10_000_000, seed=42, n=60)
        assert total_variation(sim, _product_form(60), 10) <= 5e-3


class TestTotalVariation:
    def test_identical(self):
        g = _product_form(12)
        assert total_variation(g, g, 10) == 0.0

    def test_disjoint_point_masses(self):
        assert total_variation(_point(1, 0, 0), _point(1, 1, 0), 1) == 1.0

    def test_rectangular_window(self):
        assert total_variation(_point(3, 0, 0), _point(3, 0, 1), (0, 1)) == 1.0

    def test_window_too_large(self):
        with pytest.raises(WindowMismatch):
            total_variation(_point(3, 0, 0), _point(5, 0, 0), 4)

    def test_empty_window(self):
        with pytest.raises(WindowMismatch):
            total_variation(_point(3, 3, 3), _point(3, 0, 0), 1)

    def test_callable_argument(self):
        g = _product_form(8)
        assert total_variation(lambda a, b: g[a, b], GridDistribution(g), 8) == pytest.approx(0.0, abs=1e-15)
