import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvplda.data import group_data
from mvplda.errors import DimensionMismatch, SingularAccumulator
from mvplda.gaussmath import VARIANCE_FLOOR
from mvplda.plda import (
    ClassStats,
    PldaModel,
    plda_estep,
    plda_llr_fast,
    plda_llr_naive,
    plda_loglik,
    plda_mstep,
    plda_scorer_precompute,
    plda_train,
)

from oracles import conditional_posterior, dense_group_loglik, dense_pair_logpdf, dense_logpdf


def scalar_model(b=1.0, sigma=1.0):
    return PldaModel(mu=np.zeros(1), b=np.array([[b]]), sigma=np.array([sigma]))


def random_model(rng, d, n):
    return PldaModel(mu=rng.standard_normal(d), b=rng.standard_normal((d, n)), sigma=rng.uniform(0.5, 2.0, d))


def sample_classes(rng, model, n_classes, per_class):
    z = rng.standard_normal((n_classes, model.rank))
    labels = np.repeat(np.arange(n_classes), per_class)
    noise = rng.standard_normal((labels.size, model.dim)) * np.sqrt(model.sigma)
    return model.mu + z[labels] @ model.b.T + noise, labels


class TestModel:
    def test_sigma_floored(self):
        m = PldaModel(mu=np.zeros(2), b=np.ones((2, 1)), sigma=np.array([0.0, 1.0]))
        np.testing.assert_array_equal(m.sigma, [VARIANCE_FLOOR, 1.0])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PldaModel(mu=np.zeros(2), b=np.array([[np.nan], [0.0]]), sigma=np.ones(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises((ValueError, DimensionMismatch)):
            PldaModel(mu=np.zeros(3), b=np.ones((2, 1)), sigma=np.ones(2))


class TestEstep:
    def test_zero_loading_gives_prior(self):
        model = PldaModel(mu=np.zeros(3), b=np.zeros((3, 2)), sigma=np.ones(3))
        x = np.random.default_rng(0).standard_normal((6, 3))
        stats = plda_estep(model, group_data(x, np.array([0, 0, 1, 1, 1, 2]), mu=np.zeros(3)))
        np.testing.assert_array_equal(stats.mean, 0.0)
        np.testing.assert_allclose(stats.second, np.broadcast_to(np.eye(2), (3, 2, 2)), atol=1e-15)

    def test_scalar_example(self):
        grouped = group_data(np.array([[2.0]]), np.array([0]), mu=np.zeros(1))
        stats = plda_estep(scalar_model(), grouped)
        assert stats.mean[0, 0] == pytest.approx(1.0, abs=1e-14)
        assert stats.second[0, 0, 0] == pytest.approx(1.5, abs=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_conditional_gaussian(self, seed):
        rng = np.random.default_rng(seed)
        d, n = rng.integers(1, 6), rng.integers(1, 3)
        model = random_model(rng, d, n)
        counts = [1, 2, 4]
        labels = np.repeat(np.arange(3), counts)
        x = rng.standard_normal((labels.size, d)) * 2
        stats = plda_estep(model, group_data(x, labels, mu=model.mu))
        for g in range(3):
            mean, second = conditional_posterior(x[labels == g], model.mu, model.b, model.sigma)
            np.testing.assert_allclose(stats.mean[g], mean, atol=1e-9)
            np.testing.assert_allclose(stats.second[g], second, atol=1e-9)

    def test_posterior_covariance_psd(self):
        rng = np.random.default_rng(5)
        model = random_model(rng, 6, 3)
        x, labels = sample_classes(rng, model, 10, 4)
        stats = plda_estep(model, group_data(x, labels))
        for c in stats.covariance():
            assert np.linalg.eigvalsh(c).min() > -1e-12

    def test_dimension_mismatch(self):
        grouped = group_data(np.zeros((2, 2)), np.array([0, 1]))
        with pytest.raises(DimensionMismatch):
            plda_estep(scalar_model(), grouped)


class TestMstep:
    def test_scalar_example(self):
        grouped = group_data(np.array([[2.0]]), np.array([0]), mu=np.zeros(1))
        model = plda_mstep(plda_estep(scalar_model(), grouped), grouped)
        assert model.b[0, 0] == pytest.approx(4 / 3, abs=1e-14)
        assert model.sigma[0] == pytest.approx(4 / 3, abs=1e-14)

    def test_singular_accumulator(self):
        grouped = group_data(np.zeros((2, 1)), np.array([0, 1]), mu=np.zeros(1))
        stats = ClassStats(counts=grouped.counts, mean=np.zeros((2, 1)), second=np.zeros((2, 1, 1)))
        with pytest.raises(SingularAccumulator):
            plda_mstep(stats, grouped)

    def test_zero_residual_floors_sigma(self):
        # every vector sits on the class mean and B already explains it exactly
        x = np.array([[1.0, 2.0], [1.0, 2.0], [-1.0, -2.0], [-1.0, -2.0]])
        labels = np.array([0, 0, 1, 1])
        grouped = group_data(x, labels)
        stats = ClassStats(
            counts=grouped.counts, mean=np.array([[1.0], [-1.0]]), second=np.array([[[1.0]], [[1.0]]])
        )
        model = plda_mstep(stats, grouped)
        np.testing.assert_allclose(model.b[:, 0], [1.0, 2.0], atol=1e-14)
        np.testing.assert_array_equal(model.sigma, VARIANCE_FLOOR)


class TestTrain:
    def test_zero_iterations_returns_init(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((20, 3))
        labels = np.repeat(np.arange(5), 4)
        init = PldaModel(mu=np.zeros(3), b=rng.standard_normal((3, 2)), sigma=np.ones(3))
        model, trace = plda_train(x, labels, iterations=0, rank=2, init=init)
        assert trace == []
        np.testing.assert_array_equal(model.b, init.b)
        np.testing.assert_array_equal(model.sigma, init.sigma)
        np.testing.assert_allclose(model.mu, x.mean(axis=0))

    @pytest.mark.parametrize("seed", range(4))
    def test_trace_monotone(self, seed):
        rng = np.random.default_rng(100 + seed)
        truth = random_model(rng, 8, 3)
        x, labels = sample_classes(rng, truth, 30, rng.integers(1, 6))
        _, trace = plda_train(x, labels, iterations=10, rank=3, seed=seed)
        assert np.all(np.diff(trace) >= -1e-9)

    def test_trace_matches_dense_oracle(self):
        rng = np.random.default_rng(7)
        truth = random_model(rng, 3, 1)
        x, labels = sample_classes(rng, truth, 6, 3)
        model, trace = plda_train(x, labels, iterations=3, rank=1, seed=0)
        assert trace[-1] == pytest.approx(dense_group_loglik(x, labels, model.mu, model.b, model.sigma), abs=1e-9)
        assert plda_loglik(model, group_data(x, labels)) == trace[-1]

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        x, labels = sample_classes(rng, random_model(rng, 5, 2), 12, 3)
        a, ta = plda_train(x, labels, rank=2, seed=9)
        b, tb = plda_train(x, labels, rank=2, seed=9)
        np.testing.assert_array_equal(a.b, b.b)
        np.testing.assert_array_equal(a.sigma, b.sigma)
        assert ta == tb

    def test_permutation_invariance(self):
        rng = np.random.default_rng(4)
        x, labels = sample_classes(rng, random_model(rng, 5, 2), 12, 3)
        perm = rng.permutation(labels.size)
        a, _ = plda_train(x, labels, rank=2, seed=2)
        b, _ = plda_train(x[perm], labels[perm], rank=2, seed=2)
        np.testing.assert_allclose(a.b, b.b, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(a.sigma, b.sigma, rtol=1e-8)

    def test_recovers_between_class_covariance(self):
        rng = np.random.default_rng(11)
        truth = random_model(rng, 6, 2)
        x, labels = sample_classes(rng, truth, 2000, 10)
        # EM from the small random start needs many iterations to converge
        model, _ = plda_train(x, labels, iterations=100, rank=2, seed=0)
        ref = truth.b @ truth.b.T
        err = np.linalg.norm(model.b @ model.b.T - ref) / np.linalg.norm(ref)
        assert err < 0.15

    def test_needs_two_classes(self):
        with pytest.raises(ValueError):
            plda_train(np.zeros((4, 2)), np.zeros(4, dtype=int), rank=1)


class TestScoring:
    def test_zero_loading_scores_zero(self):
        model = PldaModel(mu=np.zeros(2), b=np.zeros((2, 1)), sigma=np.ones(2))
        assert plda_llr_naive(model, np.array([1.0, -2.0]), np.array([0.5, 3.0])) == pytest.approx(0.0, abs=1e-14)

    def test_scalar_naive(self):
        val = plda_llr_naive(scalar_model(), np.zeros(1), np.zeros(1))
        assert val == pytest.approx(np.log(2) - 0.5 * np.log(3), abs=1e-14)
        assert val == pytest.approx(0.14384, abs=1e-5)

    def test_scalar_fast_scorer(self):
        scorer = plda_scorer_precompute(scalar_model())
        assert scorer.q[0, 0] == pytest.approx(-1 / 6, abs=1e-15)
        assert scorer.p[0, 0] == pytest.approx(1 / 3, abs=1e-15)
        assert scorer.constant == pytest.approx(np.log(2) - 0.5 * np.log(3), abs=1e-14)
        assert plda_llr_fast(scorer, np.zeros(1), np.zeros(1)) == scorer.constant

    def test_zero_loading_fast_scorer(self):
        scorer = plda_scorer_precompute(PldaModel(mu=np.zeros(3), b=np.zeros((3, 2)), sigma=np.ones(3)))
        np.testing.assert_array_equal(scorer.q, 0.0)
        np.testing.assert_array_equal(scorer.p, 0.0)
        assert scorer.constant == 0.0

    def test_naive_matches_dense(self):
        rng = np.random.default_rng(12)
        model = random_model(rng, 4, 2)
        xt, xs = rng.standard_normal((2, 4))
        between = model.between_cov()
        total = model.total_cov()
        ref = (
            dense_pair_logpdf(xt, xs, model.mu, total, between)
            - dense_logpdf(xt, model.mu, total)
            - dense_logpdf(xs, model.mu, total)
        )
        assert plda_llr_naive(model, xt, xs) == pytest.approx(ref, abs=1e-10)

    def test_fast_matches_naive_many_pairs(self):
        rng = np.random.default_rng(13)
        model = random_model(rng, 30, 5)
        scorer = plda_scorer_precompute(model)
        xt = model.mu + 2 * rng.standard_normal((1000, 30))
        xs = model.mu + 2 * rng.standard_normal((1000, 30))
        np.testing.assert_allclose(plda_llr_fast(scorer, xt, xs), plda_llr_naive(model, xt, xs), rtol=0, atol=1e-8)

    def test_fast_at_mean_is_constant(self):
        rng = np.random.default_rng(14)
        model = random_model(rng, 7, 3)
        scorer = plda_scorer_precompute(model)
        assert plda_llr_fast(scorer, model.mu, model.mu) == scorer.constant

    @settings(max_examples=40, deadline=None)
    @given(d=st.integers(1, 50), n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
    def test_fast_naive_agree_property(self, d, n, seed):
        rng = np.random.default_rng(seed)
        model = random_model(rng, d, n)
        xt, xs = model.mu + rng.standard_normal((2, d))
        fast = plda_llr_fast(plda_scorer_precompute(model), xt, xs)
        assert fast == pytest.approx(plda_llr_naive(model, xt, xs), abs=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(d=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
    def test_symmetry_exact(self, d, seed):
        rng = np.random.default_rng(seed)
        model = random_model(rng, d, 2)
        xt, xs = rng.standard_normal((2, d))
        assert plda_llr_naive(model, xt, xs) == plda_llr_naive(model, xs, xt)
        scorer = plda_scorer_precompute(model)
        assert plda_llr_fast(scorer, xt, xs) == plda_llr_fast(scorer, xs, xt)
