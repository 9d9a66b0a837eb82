"""Generative model, pricing functionals, dataset serialization."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairlens import (NotPositiveDefinite, discrimination_free_price_general,
                      make_example_model, make_functional, price, simulate)
from fairlens.model import read_csv, write_csv


class TestModelConstruction:
    def test_reference_parameters(self):
        m = make_example_model(0.1, 0.9)
        np.testing.assert_allclose(
            m.covariates.cov,
            [[1, 0, 0.1], [0, 1, 0.9], [0.1, 0.9, 1]])
        assert m.covariates.cov[0, 1] == 0.0

    def test_independent_case(self):
        m = make_example_model(0.0, 0.0)
        np.testing.assert_array_equal(m.covariates.cov, np.eye(3))

    def test_invalid_pair_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            make_example_model(0.7, 0.8)  # 1 - 0.49 - 0.64 < 0

    def test_response_law_accessors(self):
        m = make_example_model(0.1, 0.9)
        assert m.response_mean(1.3, -5.0) == 1.3
        assert m.response_var(1.3, -2.0) == 5.0
        assert np.all(m.response_var(0.0, np.linspace(-3, 3, 7)) >= 1.0)


class TestSimulate:
    def test_moments_at_reference_parameters(self):
        m = make_example_model(0.1, 0.9)
        ds = simulate(m, 10**6, seed=21)
        # Var(Y) = Var(X1) + E[1 + X2^2] = 3 by the total-variance split
        assert abs(ds.y.mean()) < 0.005
        assert abs(ds.y.var() - 3.0) < 0.02
        assert abs(np.corrcoef(ds.x1, ds.d)[0, 1] - 0.1) < 0.005

    def test_full_independence(self):
        m = make_example_model(0.0, 0.0)
        ds = simulate(m, 10**6, seed=22)
        assert abs(np.corrcoef(ds.y, ds.d)[0, 1]) < 0.005

    def test_deterministic(self):
        m = make_example_model(0.1, 0.9)
        a = simulate(m, 2000, seed=5)
        b = simulate(m, 2000, seed=5)
        for name in ("x1", "x2", "d", "y"):
            assert getattr(a, name).tobytes() == getattr(b, name).tobytes()

    def test_response_stream_separate_from_covariates(self):
        """The covariate draws do not move when only n changes the
        response consumption, and vice versa."""
        m = make_example_model(0.1, 0.9)
        short = simulate(m, 100, seed=5)
        long = simulate(m, 5000, seed=5)
        assert np.array_equal(short.x1, long.x1[:100])
        assert np.array_equal(short.y, long.y[:100])

    def test_binned_conditional_mean_matches_response(self):
        """E[Y | X1 in a thin bin around a] converges to a."""
        m = make_example_model(0.1, 0.9)
        ds = simulate(m, 10**6, seed=23)
        lo, hi = np.quantile(ds.x1, [0.005, 0.995])
        edges = np.linspace(lo, hi, 51)
        ids = np.searchsorted(edges[1:-1], ds.x1, side="right")
        inside = (ds.x1 >= lo) & (ds.x1 < hi)
        for k in (5, 25, 44):
            sel = inside & (ids == k)
            centre = ds.x1[sel].mean()
            se = ds.y[sel].std(ddof=1) / np.sqrt(sel.sum())
            assert abs(ds.y[sel].mean() - centre) < 3 * se

    def test_binned_conditional_variance_heteroskedastic(self):
        """Var(Y - X1 | X2 in a bin around b) converges to 1 + b^2."""
        m = make_example_model(0.1, 0.9)
        ds = simulate(m, 10**6, seed=24)
        resid = ds.y - ds.x1
        lo, hi = np.quantile(ds.x2, [0.005, 0.995])
        edges = np.linspace(lo, hi, 51)
        ids = np.searchsorted(edges[1:-1], ds.x2, side="right")
        inside = (ds.x2 >= lo) & (ds.x2 < hi)
        for k in (2, 25, 48):
            sel = inside & (ids == k)
            b = ds.x2[sel].mean()
            r = resid[sel]
            var = r.var()
            m4 = np.mean((r - r.mean()) ** 4)
            se_var = np.sqrt((m4 - var**2) / sel.sum())
            assert abs(var - (1.0 + b**2)) < 3 * se_var


class TestPricing:
    def test_best_estimate_is_x1(self):
        f = make_functional("best_estimate")
        assert price(f, 1.7, -3.0, 2.0) == 1.7

    def test_null_price_is_zero(self):
        f = make_functional("null")
        for args in [(0.0, 0.0, 0.0), (5.0, -1.0, 3.0)]:
            assert price(f, *args) == 0.0

    def test_subset_x2_price_is_zero(self):
        # E[Y | X2] = E[X1 | X2] = 0 because Cov(X1, X2) = 0
        f = make_functional("subset", {1})
        assert price(f, 5.0, 0.4, 1.0) == 0.0

    def test_subset_x2_price_zero_confirmed_by_simulation(self):
        m = make_example_model(0.1, 0.9)
        ds = simulate(m, 200_000, seed=31)
        sel = np.abs(ds.x2 - 0.4) < 0.05
        se = ds.y[sel].std(ddof=1) / np.sqrt(sel.sum())
        assert abs(ds.y[sel].mean()) < 3 * se

    def test_subset_x1_equals_unawareness(self):
        f = make_functional("subset", {0})
        g = make_functional("unawareness")
        assert price(f, 0.3, 9.9, -2.0) == price(g, 0.3, 1.1, 0.5) == 0.3

    def test_coincidence_identity_on_random_points(self):
        """Best-estimate, unawareness and discrimination-free prices are
        exactly equal on random covariate points."""
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(10**4, 3))
        fs = [make_functional(k) for k in
              ("best_estimate", "unawareness", "discrimination_free")]
        prices = [f.evaluate(pts[:, 0], pts[:, 1], pts[:, 2]) for f in fs]
        assert np.array_equal(prices[0], prices[1])
        assert np.array_equal(prices[0], prices[2])

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-10, 10, allow_nan=False), st.floats(-10, 10),
           st.floats(-10, 10), st.floats(-10, 10))
    def test_measurability_in_x_only(self, x1, x2, d, d_other):
        """Perturbing d leaves every non-best-estimate price bit-identical."""
        for kind in ("unawareness", "discrimination_free", "null"):
            f = make_functional(kind)
            assert price(f, x1, x2, d) == price(f, x1, x2, d_other)
        for subset in ({0}, {1}, {0, 1}):
            f = make_functional("subset", subset)
            assert price(f, x1, x2, d) == price(f, x1, x2, d_other)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            make_functional("fitted")
        with pytest.raises(ValueError):
            make_functional("subset", {2})


class TestDiscriminationFreeGeneral:
    def test_example_model_returns_x1(self):
        rng = np.random.default_rng(3)
        avg = discrimination_free_price_general(
            lambda x, d: np.full_like(np.asarray(d, float), x[0]),
            rng.normal(size=100))
        assert avg((0.3, -1.0)) == pytest.approx(0.3, abs=1e-15)

    def test_constant_integrand(self):
        avg = discrimination_free_price_general(lambda x, d: d, [2.0, 2.0, 2.0])
        assert avg((1.0, 1.0)) == 2.0

    def test_monte_carlo_average_of_centered_marginal(self):
        rng = np.random.default_rng(11)
        samples = rng.normal(size=10**5)
        avg = discrimination_free_price_general(lambda x, d: x[0] * d, samples)
        assert abs(avg((1.0, 0.0))) <= 0.02

    def test_empty_marginal_rejected(self):
        with pytest.raises(ValueError):
            discrimination_free_price_general(lambda x, d: d, [])


class TestSerialization:
    def test_csv_round_trip(self, tmp_path):
        m = make_example_model(0.1, 0.9)
        ds = simulate(m, 500, seed=77)
        path = tmp_path / "draws.csv"
        write_csv(ds, path)
        assert path.read_text().splitlines()[0] == "x1,x2,d,y"
        meta = json.loads((tmp_path / "draws.csv.meta.json").read_text())
        assert meta == {"n": 500, "seed": 77, "rho1": 0.1, "rho2": 0.9}
        back = read_csv(path)
        for name in ("x1", "x2", "d", "y"):
            np.testing.assert_array_equal(getattr(back, name), getattr(ds, name))
        assert (back.seed, back.rho1, back.rho2) == (77, 0.1, 0.9)
