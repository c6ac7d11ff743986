"""Baseline method tests.

Oracle strategy: tiny hand-solvable corpora where every baseline's answer is
derivable by hand; noiseless processes where the right answer is exact;
brute-force argmax comparisons for the kernel objective.
"""

import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from genvendor.baselines import (
    DEFAULT_TAU_BANK,
    KernelWeights,
    PinballModel,
    RbeModel,
    erm_decide,
    erm_fit,
    erm_fit_bank,
    kernel_weights,
    ko_decide,
    prescriptive_joint,
    rbe_decide,
    rbe_fit,
    rbe_joint,
    saa_decide,
    saa_joint,
    silverman_bandwidths,
)
from genvendor.data import Dataset
from genvendor.decisions import CostParams, estimate_profit, profit, rho
from genvendor.dgp import make_corpus, make_oracle
from genvendor.numerics import RngStream

COSTS = CostParams(c=1.0, s=0.5, p_max=4.0)


def _corpus(n=400, seed=0, kind="a", price_set=(2.0, 4.0), **kw):
    model = make_oracle(kind, seed, **kw)
    return model, make_corpus(model, n, price_set, RngStream(seed, ("bl", kind)))


class TestSaa:
    def test_pooled_quantile_hand_computed(self):
        ds = Dataset(np.zeros((5, 1)), np.full(5, 3.0), np.array([10.0, 50.0, 30.0, 20.0, 40.0]))
        # rho(3) = 0.8 -> ceil(5*0.8) = 4th smallest of {10..50} = 40
        assert saa_decide(ds, None, 3.0, COSTS) == 40.0
        # rho(2) = 2/3 -> ceil(10/3) = 4th smallest = 40
        assert saa_decide(ds, None, 2.0, COSTS) == 40.0

    def test_pools_across_prices_by_default(self):
        # price label does not restrict the sample: all 4 demands pool
        ds = Dataset(np.zeros((4, 1)), np.array([2.0, 2.0, 4.0, 4.0]), np.array([1.0, 2.0, 3.0, 4.0]))
        # rho(3.9) = 2.9/3.4 ~ 0.853 -> ceil(4*0.853) = 4th = 4.0
        assert saa_decide(ds, None, 3.9, COSTS) == 4.0

    def test_window_restricts_to_local_records(self):
        ds = Dataset(np.zeros((4, 1)), np.array([2.0, 2.0, 4.0, 4.0]), np.array([1.0, 2.0, 30.0, 40.0]))
        # exact-price subset at p=4: demands {30, 40}; rho(4)=6/7 -> 2nd = 40
        assert saa_decide(ds, None, 4.0, COSTS, window=0.0) == 40.0
        # wide window recovers pooling
        assert saa_decide(ds, None, 4.0, COSTS, window=10.0) == saa_decide(ds, None, 4.0, COSTS)

    def test_empty_window_raises(self):
        ds = Dataset(np.zeros((2, 1)), np.array([2.0, 2.1]), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            saa_decide(ds, None, 4.0, COSTS, window=0.5)

    def test_quantile_level_rises_with_price(self):
        _, ds = _corpus(n=2000, seed=1)
        q_low = saa_decide(ds, None, 2.1, COSTS)
        q_high = saa_decide(ds, None, 4.0, COSTS)
        assert q_high >= q_low  # rho grows with p over the pooled sample


class TestPinball:
    def test_constant_fit_recovers_quantile(self):
        # With no features varying, the tau-quantile of y is optimal.  Use a
        # 2-column design (price constant) on y in {0,...,9}.
        y = np.arange(10.0)
        X = np.column_stack([np.zeros(10), np.full(10, 3.0)])
        mdl = PinballModel(tau=0.4, form="linear", epochs=400, seed=0).fit(X, y)
        pred = float(mdl.predict(X[:1])[0])
        # 0.4-quantile of uniform{0..9} in the pinball sense lies in [3, 4]
        assert 2.5 <= pred <= 4.5

    def test_noiseless_linear_recovery(self):
        rng = RngStream(2, ("pb",))
        X = np.column_stack([rng.standard_normal(300), rng.uniform(2, 4, size=300)])
        y = 30.0 + 2.0 * X[:, 0] - 3.0 * X[:, 1]  # strictly positive demands
        mdl = PinballModel(tau=0.5, form="linear", epochs=600, seed=1).fit(X, y)
        pred = mdl.predict(X)
        assert float(np.max(np.abs(pred - y))) < 0.35
        assert mdl.training_pinball_loss(X, y) < 0.08

    def test_neural_form_fits_nonlinear_median(self):
        rng = RngStream(3, ("pbn",))
        X = np.column_stack([rng.uniform(-2, 2, size=500), np.full(500, 3.0)])
        y = np.abs(X[:, 0]) * 10.0
        mdl = PinballModel(tau=0.5, form="neural", epochs=300, seed=2).fit(X, y)
        pred = mdl.predict(X)
        assert float(np.mean(np.abs(pred - y))) < 1.0

    def test_predictions_floored_at_zero(self):
        X = np.column_stack([np.zeros(20), np.full(20, 3.0)])
        y = np.full(20, -5.0)
        mdl = PinballModel(tau=0.5, form="linear", epochs=200, seed=0).fit(X, y)
        assert np.all(mdl.predict(X) >= 0.0)

    def test_validation(self):
        X, y = np.zeros((10, 2)), np.zeros(10)
        with pytest.raises(ValueError):
            PinballModel(tau=0.0).fit(X, y)
        with pytest.raises(ValueError):
            PinballModel(tau=1.0).fit(X, y)
        with pytest.raises(ValueError):
            PinballModel(form="quadratic").fit(X, y)
        with pytest.raises(NotFittedError):
            PinballModel().predict(X)

    def test_sklearn_protocol(self):
        mdl = PinballModel(tau=0.7, form="neural", epochs=10)
        assert clone(mdl).get_params() == mdl.get_params()


class TestErmBank:
    def test_bank_levels(self):
        assert DEFAULT_TAU_BANK == (0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90)
        # spans rho of the admissible range: rho(2)=2/3, rho(4)=6/7
        assert DEFAULT_TAU_BANK[0] < rho(2.0, COSTS) < rho(4.0, COSTS) < DEFAULT_TAU_BANK[-1]

    def test_decide_picks_nearest_tau(self):
        # constant-fit bank: with X constant, each model predicts the
        # tau-quantile of y, so the decision reveals which tau was chosen
        y = np.arange(1.0, 101.0)  # quantiles ~ 100*tau
        X = np.column_stack([np.zeros(100), np.full(100, 3.0)])
        bank = tuple(
            PinballModel(tau=t, form="linear", epochs=300, seed=0).fit(X, y) for t in (0.6, 0.75, 0.9)
        )
        # rho(3) = 0.8 -> nearest tau is 0.75
        got = erm_decide(bank, np.zeros(1), 3.0, COSTS)
        assert abs(got - 75.0) < 6.0
        # rho(3.63) ~ 0.84 -> nearest tau 0.9... check boundary at rho=0.825
        got_hi = erm_decide(bank, np.zeros(1), 4.0, COSTS)  # rho=6/7~0.857 -> 0.9
        assert abs(got_hi - 90.0) < 6.0

    def test_empty_bank_raises(self):
        with pytest.raises(ValueError):
            erm_decide((), np.zeros(1), 3.0, COSTS)

    def test_erm_fit_wrappers(self):
        _, ds = _corpus(n=120, seed=4)
        bank = erm_fit_bank(ds, "linear", taus=(0.6, 0.8), epochs=30)
        assert len(bank) == 2 and bank[0].tau == 0.6
        one = erm_fit(ds, 0.7, "linear", epochs=30)
        assert one.tau == 0.7 and one.n_features_in_ == 6


class TestKernelWeights:
    def test_silverman_formula(self):
        _, ds = _corpus(n=500, seed=5)
        kw = silverman_bandwidths(ds)
        factor = 1.06 * 500 ** (-0.2)
        np.testing.assert_allclose(kw.feature_bandwidths, factor * ds.features.std(axis=0, ddof=1), rtol=1e-12)
        assert kw.price_bandwidth == pytest.approx(factor * float(ds.prices.std(ddof=1)), rel=1e-12)

    def test_bandwidth_floor(self):
        ds = Dataset(np.zeros((30, 2)), np.full(30, 3.0), np.arange(30.0))
        kw = silverman_bandwidths(ds)
        np.testing.assert_array_equal(kw.feature_bandwidths, [1e-6, 1e-6])
        assert kw.price_bandwidth == 1e-6

    def test_weights_peak_at_one_and_order(self):
        _, ds = _corpus(n=200, seed=6)
        kw = silverman_bandwidths(ds)
        x, p = ds.features[7], float(ds.prices[7])
        w = kernel_weights(kw, ds, x, p)
        assert w.max() == pytest.approx(1.0)
        assert int(np.argmax(w)) == 7  # the query's own record is nearest

    def test_far_queries_survive_underflow(self):
        # exponents near -1e4 would zero every weight without rescaling
        _, ds = _corpus(n=100, seed=7)
        kw = silverman_bandwidths(ds)
        w = kernel_weights(kw, ds, np.full(5, 50.0), 4.0)
        assert np.all(np.isfinite(w))
        assert w.max() == pytest.approx(1.0)

    def test_positive_bandwidths_enforced(self):
        with pytest.raises(ValueError):
            KernelWeights(np.array([1.0, 0.0]), 1.0)
        with pytest.raises(ValueError):
            KernelWeights(np.array([1.0]), -1.0)


class TestKo:
    def test_single_record_menu(self):
        ds = Dataset(np.zeros((1, 2)), np.array([3.0]), np.array([25.0]))
        kw = KernelWeights(np.ones(2), 1.0)
        assert ko_decide(ds, np.zeros(2), 3.0, COSTS, kw) == 25.0

    def test_two_record_hand_example(self):
        # equal weights, observed prices 3: objective slope right of d=10 is
        # w(p-c) - w(c-s) = 2 - 0.5 > 0, so push to d=20
        ds = Dataset(np.zeros((2, 2)), np.array([3.0, 3.0]), np.array([10.0, 20.0]))
        kw = KernelWeights(np.ones(2) * 100.0, 100.0)  # ~uniform weights
        assert ko_decide(ds, np.zeros(2), 3.0, COSTS, kw) == 20.0

    def test_low_price_stops_early(self):
        # observed prices 1.2: slope right of d=10 is w(0.2) - w(0.5) < 0 -> stay at 10
        ds = Dataset(np.zeros((2, 2)), np.array([1.2, 1.2]), np.array([10.0, 20.0]))
        kw = KernelWeights(np.ones(2) * 100.0, 100.0)
        assert ko_decide(ds, np.zeros(2), 2.0, COSTS, kw) == 10.0

    def test_brute_force_equivalence(self):
        _, ds = _corpus(n=60, seed=8)
        kw = silverman_bandwidths(ds)
        rng = RngStream(9, ("kobf",))
        for trial in range(5):
            x = ds.features[int(rng.integers(0, ds.n))]
            p = float(rng.uniform(2.0, 4.0))
            got = ko_decide(ds, x, p, COSTS, kw)
            w = kernel_weights(kw, ds, x, p)
            objective = lambda q: float(np.dot(w, profit(ds.demands, ds.prices, q, COSTS)))
            best = max(ds.demands, key=objective)
            assert objective(got) == pytest.approx(objective(best), abs=1e-9), trial

    def test_observed_prices_enter_objective(self):
        # one record sells at 3.9 (high margin), one at 2.0: the high-margin
        # record dominates the underage slope even with equal weights
        ds = Dataset(np.zeros((2, 2)), np.array([3.9, 2.0]), np.array([30.0, 10.0]))
        kw = KernelWeights(np.ones(2) * 100.0, 100.0)
        # slope right of 10: w(3.9-1) - w(1-0.5) = 2.9 - 0.5 > 0 -> 30
        assert ko_decide(ds, np.zeros(2), 2.5, COSTS, kw) == 30.0

    def test_reorder_invariance(self):
        _, ds = _corpus(n=50, seed=10)
        kw = silverman_bandwidths(ds)
        perm = RngStream(1, ("perm",)).permutation(50)
        ds2 = ds.subset(perm)
        x = ds.features[3]
        assert ko_decide(ds, x, 3.0, COSTS, kw) == ko_decide(ds2, x, 3.0, COSTS, kw)


class TestRbe:
    def test_noiseless_linear_exact(self):
        rng = RngStream(11, ("rbe",))
        X = rng.standard_normal((100, 3))
        P = rng.uniform(2, 4, size=100)
        y = 50.0 - 5.0 * P + X @ np.array([1.0, -2.0, 3.0])
        mdl = RbeModel().fit(np.column_stack([X, P]), y)
        assert mdl.alpha_ == pytest.approx(-5.0, abs=1e-8)
        np.testing.assert_allclose(mdl.beta_, [1.0, -2.0, 3.0], atol=1e-8)
        assert mdl.intercept_ == pytest.approx(50.0, abs=1e-8)
        np.testing.assert_allclose(mdl.residuals_, 0.0, atol=1e-8)
        # decision = location + 0 residual quantile
        q = rbe_decide(mdl, X[0], 3.0, COSTS)
        assert q == pytest.approx(mdl.location(X[0], 3.0), abs=1e-8)

    def test_residual_quantile_indexing(self):
        mdl = RbeModel()
        mdl.residuals_ = np.array([-1.0, 0.0, 1.0, 2.0])
        mdl.alpha_, mdl.beta_, mdl.intercept_ = 0.0, np.zeros(1), 0.0
        mdl.n_features_in_ = 2
        # ceil(4*0.5)=2nd -> 0.0 ; ceil(4*0.8)=4th -> 2.0 ; ceil(4*0.2)=1st -> -1.0
        assert mdl.residual_quantile(0.5) == 0.0
        assert mdl.residual_quantile(0.8) == 2.0
        assert mdl.residual_quantile(0.2) == -1.0

    def test_decision_floored_at_zero(self):
        mdl = RbeModel()
        mdl.residuals_ = np.array([-10.0, -5.0])
        mdl.alpha_, mdl.beta_, mdl.intercept_ = -20.0, np.zeros(1), 10.0
        mdl.n_features_in_ = 2
        assert rbe_decide(mdl, np.zeros(1), 3.0, COSTS) == 0.0

    def test_needs_enough_records(self):
        with pytest.raises(ValueError):
            RbeModel().fit(np.zeros((3, 3)), np.zeros(3))

    def test_singular_design_raises(self):
        X = np.column_stack([np.ones(20), np.ones(20), np.full(20, 3.0)])
        with pytest.raises(np.linalg.LinAlgError):
            RbeModel().fit(X, np.arange(20.0))

    def test_rbe_fit_wrapper_matches_dgp(self):
        model, ds = _corpus(n=3000, seed=12)
        mdl = rbe_fit(ds)
        assert mdl.alpha_ == pytest.approx(-20.0, abs=0.5)
        np.testing.assert_allclose(mdl.beta_, model.beta, atol=0.5)


class TestRbeJoint:
    def test_grid_argmax_on_linear_model(self):
        # deterministic linear demand 50 - 10p, residuals {0}: the profit at
        # each grid p is (p - 1)(50 - 10p), maximized at p = 3
        mdl = RbeModel()
        mdl.alpha_, mdl.beta_, mdl.intercept_ = -10.0, np.zeros(2), 50.0
        mdl.residuals_ = np.array([0.0])
        mdl.n_features_in_ = 3
        dec = rbe_joint(mdl, np.zeros(2), [2.0, 2.5, 3.0, 3.5, 4.0], COSTS)
        assert dec.price == 3.0
        assert dec.quantity == pytest.approx(20.0)
        assert dec.estimated_profit == pytest.approx(2.0 * 20.0)

    def test_profile_sorted_by_price(self):
        mdl = RbeModel()
        mdl.alpha_, mdl.beta_, mdl.intercept_ = -10.0, np.zeros(2), 50.0
        mdl.residuals_ = np.array([0.0])
        mdl.n_features_in_ = 3
        dec = rbe_joint(mdl, np.zeros(2), [4.0, 2.0, 3.0], COSTS)
        assert [e[0] for e in dec.profile] == [2.0, 3.0, 4.0]


class TestPrescriptiveJoint:
    def test_degenerate_weights_pick_max_margin_record(self):
        # single record: q = d always; profit (p-c)*d maximized at p_max...
        # but the counterfactual price scales the same d, so max grid price wins
        ds = Dataset(np.zeros((1, 2)), np.array([3.0]), np.array([10.0]))
        kw = KernelWeights(np.ones(2), 1.0)
        dec = prescriptive_joint(ds, np.zeros(2), [2.0, 3.0, 4.0], COSTS, kw)
        assert dec.price == 4.0
        assert dec.quantity == 10.0
        assert dec.estimated_profit == pytest.approx(30.0)

    def test_uniform_weights_equal_saa_joint(self):
        # with near-infinite bandwidths the weights are ~uniform, so the
        # prescriptive objective coincides with the saa_joint full-data mean
        _, ds = _corpus(n=150, seed=13)
        kw = KernelWeights(np.full(5, 1e9), 1e9)
        grid = [2.0, 2.5, 3.0, 3.5, 4.0]
        a = prescriptive_joint(ds, ds.features[0], grid, COSTS, kw)
        b = saa_joint(ds, None, grid, COSTS)
        assert a.price == b.price
        assert a.quantity == pytest.approx(b.quantity, abs=1e-9)
        assert a.estimated_profit == pytest.approx(b.estimated_profit, rel=1e-6)

    def test_price_below_cost_rejected(self):
        _, ds = _corpus(n=20, seed=14)
        kw = silverman_bandwidths(ds)
        with pytest.raises(ValueError):
            prescriptive_joint(ds, ds.features[0], [0.5, 3.0], COSTS, kw)


class TestSaaJoint:
    def test_frozen_demand_drifts_to_max_price(self):
        # demands fixed: estimate (1/n) sum Pi(d_i, p, q_p) grows with p
        ds = Dataset(np.zeros((6, 1)), np.full(6, 3.0), np.array([10.0, 12.0, 14.0, 16.0, 18.0, 20.0]))
        dec = saa_joint(ds, None, [2.0, 3.0, 4.0], COSTS)
        assert dec.price == 4.0

    def test_profit_estimate_hand_computed(self):
        ds = Dataset(np.zeros((2, 1)), np.full(2, 2.0), np.array([10.0, 20.0]))
        dec = saa_joint(ds, None, [2.0], COSTS)
        # rho(2)=2/3 -> q = ceil(2*2/3)=2nd = 20; Pi(10)=2*10+0.5*10-20=5, Pi(20)=20 -> 12.5
        assert dec.quantity == 20.0
        assert dec.estimated_profit == pytest.approx(12.5)

    def test_empty_dataset_raises(self):
        ds = Dataset(np.zeros((0, 1)), np.zeros(0), np.zeros(0))
        with pytest.raises(ValueError):
            saa_joint(ds, None, [3.0], COSTS)


class TestCrossMethod:
    def test_linear_erm_approximates_rbe_on_linear_dgp(self):
        """On the linear-Gaussian process both estimate the same conditional
        quantile, so their decisions should be close on average."""
        model, ds = _corpus(n=1500, seed=15)
        mdl = rbe_fit(ds)
        bank = erm_fit_bank(ds, "linear", epochs=200)
        rng = RngStream(16, ("xm",))
        diffs = []
        for _ in range(20):
            x = model.omega.cholesky @ rng.standard_normal(5)
            p = float(rng.uniform(2.2, 4.0))
            diffs.append(abs(rbe_decide(mdl, x, p, COSTS) - erm_decide(bank, x, p, COSTS)))
        assert float(np.mean(diffs)) < 2.0

    def test_ko_beats_saa_on_feature_signal(self):
        """With strong feature signal and tiny noise, KO (feature-aware)
        must out-profit SAA (feature-blind) in expectation."""
        model, ds = _corpus(n=800, seed=17, sigma=0.5)
        kw = silverman_bandwidths(ds)
        rng = RngStream(18, ("ks2",))
        ko_gap, saa_gap = [], []
        from genvendor.dgp import oracle_quantile, sample_features

        for _ in range(30):
            x = sample_features(model, rng)
            p = 3.0
            q_star = oracle_quantile(model, x, p, rho(p, COSTS))
            ko_gap.append(abs(ko_decide(ds, x, p, COSTS, kw) - q_star))
            saa_gap.append(abs(saa_decide(ds, x, p, COSTS) - q_star))
        assert np.mean(ko_gap) < np.mean(saa_gap)
