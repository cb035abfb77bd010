import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dppmle import (Dataset, GramFactor, MarginalKernel, enumerate_distribution, factor_to_kernel,
                    from_l_ensemble, log_likelihood, point_probability, subset_marginal,
                    to_l_ensemble, validate_kernel)
from dppmle.errors import NotLEnsembleError, SizeGuardError, StructuralInputError
from dppmle.kernel import sample_probabilities, subsets_of

from oracles import det_minor, point_probability_ie, random_kernel

HALF = np.array([[0.5, 0.5], [0.5, 0.5]])


class TestValidate:
    def test_identity_passes(self):
        rep = validate_kernel(np.eye(2))
        assert rep.passed
        assert rep.min_eigenvalue == pytest.approx(1.0)
        assert rep.max_eigenvalue == pytest.approx(1.0)

    def test_rank_one_half(self):
        rep = validate_kernel(HALF)
        assert rep.passed
        assert rep.min_eigenvalue == pytest.approx(0.0, abs=1e-12)
        assert rep.max_eigenvalue == pytest.approx(1.0)

    def test_large_eigenvalue_fails(self):
        rep = validate_kernel(np.array([[1.5, 0.0], [0.0, 0.0]]))
        assert not rep.passed
        assert any("1.5" in r for r in rep.reasons)

    def test_asymmetric_fails(self):
        rep = validate_kernel(np.array([[0.5, 0.1], [0.2, 0.5]]))
        assert not rep.passed

    def test_tolerance_window(self):
        K = np.diag([1.0 + 5e-10, -5e-10])
        assert validate_kernel(K).passed
        assert not validate_kernel(K, tol=1e-12).passed

    def test_report_does_not_mutate(self):
        K = np.diag([1.0 + 5e-10, 0.3])
        before = K.copy()
        validate_kernel(K)
        assert np.array_equal(K, before)

    def test_non_square_rejected(self):
        with pytest.raises(StructuralInputError):
            MarginalKernel(np.zeros((2, 3)))


class TestProbabilities:
    def test_subset_marginal_examples(self):
        K = np.diag([0.5, 0.5])
        assert subset_marginal(K, [0]) == pytest.approx(0.5)
        assert subset_marginal(K, []) == 1.0

    def test_point_probability_product(self):
        p = np.array([0.2, 0.7, 0.4])
        K = np.diag(p)
        for X in ([], [0], [1, 2], [0, 1, 2]):
            expect = np.prod([p[i] if i in X else 1 - p[i] for i in range(3)])
            assert point_probability(K, X) == pytest.approx(expect)

    def test_point_probability_examples(self):
        assert point_probability(HALF, [0]) == pytest.approx(0.5)
        assert point_probability(np.eye(2), [0, 1]) == pytest.approx(1.0)

    def test_out_of_range(self):
        with pytest.raises(StructuralInputError):
            point_probability(np.eye(2), [2])

    @given(st.integers(1, 6), st.integers(0, 2**31 - 1))
    def test_matches_inclusion_exclusion(self, n, seed):
        rng = np.random.default_rng(seed)
        K = random_kernel(n, rng)
        X = [i for i in range(n) if rng.random() < 0.5]
        assert point_probability(K, X) == pytest.approx(point_probability_ie(K, X), abs=1e-10)

    @given(st.integers(1, 7), st.integers(1, 4), st.integers(0, 2**31 - 1))
    def test_factor_path_matches_dense(self, n, r, seed):
        rng = np.random.default_rng(seed)
        Q = rng.standard_normal((r, n))
        Q /= max(1.0, np.linalg.norm(Q, 2))
        F = GramFactor(Q)
        samples = [tuple(i for i in range(n) if rng.random() < 0.5) for _ in range(5)]
        dense = sample_probabilities(F.kernel(), samples)
        fac = sample_probabilities(F, samples)
        assert np.allclose(dense, fac, atol=1e-10)

    def test_factor_zero_beyond_rank(self):
        F = GramFactor(np.eye(2, 4))
        assert point_probability(F, [0, 1, 2]) == 0.0


class TestLikelihood:
    def test_two_singletons_diag(self):
        D = Dataset.from_one_indexed(2, [[1], [2]])
        assert log_likelihood(np.diag([0.5, 0.5]), D) == pytest.approx(2 * math.log(2))

    def test_certain_sample(self):
        D = Dataset.from_one_indexed(1, [[1]])
        assert log_likelihood(np.array([[1.0]]), D) == 0.0

    def test_infinite_on_impossible_sample(self):
        D = Dataset.from_one_indexed(2, [[1], [2]])
        assert log_likelihood(np.diag([1.0, 0.0]), D) == math.inf

    def test_dimension_mismatch(self):
        D = Dataset.from_one_indexed(3, [[1]])
        with pytest.raises(StructuralInputError):
            log_likelihood(np.eye(2), D)


class TestEnumerate:
    def test_uniform_product(self):
        p = enumerate_distribution(np.diag([0.5, 0.5]))
        assert np.allclose(p, 0.25)

    def test_rank_one(self):
        p = enumerate_distribution(HALF)
        assert np.allclose(p, [0.0, 0.5, 0.5, 0.0], atol=1e-15)

    def test_bernoulli(self):
        assert np.allclose(enumerate_distribution(np.array([[0.3]])), [0.7, 0.3])

    def test_guard(self):
        with pytest.raises(SizeGuardError):
            enumerate_distribution(np.eye(21) * 0.5)

    @given(st.integers(1, 8), st.integers(0, 2**31 - 1))
    def test_normalized_and_marginals(self, n, seed):
        rng = np.random.default_rng(seed)
        K = random_kernel(n, rng)
        p = enumerate_distribution(K)
        assert abs(p.sum() - 1.0) <= 1e-8
        S = [i for i in range(n) if rng.random() < 0.4]
        smask = sum(1 << i for i in S)
        total = sum(p[x] for x in range(1 << n) if x & smask == smask)
        assert total == pytest.approx(det_minor(K, S), abs=1e-9)

    def test_subsets_of(self):
        assert subsets_of(0b1011) == (0, 1, 3)


class TestEnsembles:
    def test_diag_half(self):
        assert np.allclose(to_l_ensemble(np.diag([0.5])).matrix, [[1.0]])

    def test_diag_pair(self):
        assert np.allclose(to_l_ensemble(np.diag([0.25, 0.75])).matrix, np.diag([1 / 3, 3]))

    def test_identity_rejected(self):
        with pytest.raises(NotLEnsembleError) as exc:
            to_l_ensemble(np.eye(2))
        assert exc.value.eigenvalue == pytest.approx(1.0)

    @given(st.integers(1, 5), st.integers(0, 2**31 - 1))
    def test_round_trip_and_probability(self, n, seed):
        rng = np.random.default_rng(seed)
        K = random_kernel(n, rng) * 0.95
        L = to_l_ensemble(K)
        assert np.allclose(from_l_ensemble(L).matrix, K, atol=1e-9)
        X = [i for i in range(n) if rng.random() < 0.5]
        assert L.probability(X) == pytest.approx(point_probability(K, X), abs=1e-9)


class TestFactor:
    def test_orthonormal_gives_identity(self):
        K, scale = factor_to_kernel(GramFactor(np.eye(3)))
        assert np.allclose(K.matrix, np.eye(3))
        assert scale == 1.0

    def test_clamp_scale(self):
        K, scale = factor_to_kernel(GramFactor(2 * np.eye(3)), clamp=True)
        assert scale == pytest.approx(0.25)
        assert np.allclose(K.matrix, np.eye(3))

    def test_unclamped_keeps_scale(self):
        K, scale = factor_to_kernel(GramFactor(2 * np.eye(3)))
        assert scale == 1.0
        assert not validate_kernel(K).passed

    def test_norms_match_diagonal(self):
        rng = np.random.default_rng(3)
        F = GramFactor(rng.standard_normal((3, 5)) * 0.3)
        assert np.allclose(F.norms ** 2, np.diag(F.kernel().matrix))

    def test_json_round_trip(self):
        F = GramFactor(np.arange(6.0).reshape(2, 3) / 10)
        G = GramFactor.from_json(F.to_json())
        assert np.array_equal(F.Q, G.Q)

    def test_from_kernel(self):
        K = random_kernel(4, np.random.default_rng(0), rank=2)
        F = GramFactor.from_kernel(K)
        assert F.rank == 2
        assert np.allclose(F.Q.T @ F.Q, K, atol=1e-12)
