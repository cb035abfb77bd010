import math

import numpy as np
import pytest

from dppmle import GramFactor, log_likelihood
from dppmle.coloring import coloring_to_kernel, optimal_value, three_color
from dppmle.errors import AnchorDegeneracyError, GuaranteeError, ParameterError
from dppmle.graph import Graph
from dppmle.rank3 import (BadSets, ProjectionParams, anchor_basis, classify_bad,
                          find_anchor_triple, greedy_reassign, project_to_rank3,
                          rescale_and_assemble, residual_mass)
from dppmle.reduction import lift_to_hypergraph

from oracles import gram_residual_mass

K3 = Graph(3, ((0, 1), (1, 2), (0, 2)))
C5 = Graph(5, ((0, 1), (1, 2), (2, 3), (3, 4), (0, 4)))


def lifted(G):
    col = three_color(G)
    return coloring_to_kernel(G, col), lift_to_hypergraph(G).dataset


def embed(Q, r):
    out = np.zeros((r, Q.shape[1]))
    out[:Q.shape[0]] = Q
    return out


def perturbed_high_rank(G, angle, seed, r=5):
    """Coloring factor in R^r with every vertex column tilted by ``angle``."""
    F, D = lifted(G)
    rng = np.random.default_rng(seed)
    Q = embed(F.Q, r)
    for v in range(G.n):
        q = Q[:, v]
        nrm = np.linalg.norm(q)
        w = rng.standard_normal(r)
        w -= (w @ q) / nrm ** 2 * q
        w *= nrm / np.linalg.norm(w)
        Q[:, v] = math.cos(angle) * q + math.sin(angle) * w
    Q /= max(1.0, np.linalg.norm(Q, 2))
    return GramFactor(Q), D


class TestAnchor:
    def test_exact(self):
        F, D = lifted(K3)
        idx, ratio = find_anchor_triple(F, D)
        assert idx == 0 and ratio == pytest.approx(1.0)

    def test_avoids_rotated(self):
        F, D = lifted(K3)
        Q = F.Q.copy()
        c, s = math.cos(math.radians(10)), math.sin(math.radians(10))
        i = int(np.argmax(np.abs(Q[:, 0])))
        j = (i + 1) % 3
        Q[[i, j], 0] = [c * Q[i, 0] - s * Q[j, 0], s * Q[i, 0] + c * Q[j, 0]]
        idx, _ = find_anchor_triple(GramFactor(Q), D)
        assert 0 not in D.samples[idx]

    def test_rank_two(self):
        _, D = lifted(K3)
        with pytest.raises(AnchorDegeneracyError):
            find_anchor_triple(GramFactor(np.ones((2, 6)) * 0.3), D)


class TestResidual:
    def test_exact_zero(self):
        F, D = lifted(K3)
        assert residual_mass(F, D.samples[0]) == pytest.approx(0.0, abs=1e-15)

    def test_extra_column(self):
        F, D = lifted(K3)
        eps = 0.05
        Q = np.hstack([embed(F.Q, 4), eps * np.eye(4)[:, 3:4]])
        assert residual_mass(GramFactor(Q), D.samples[0]) == pytest.approx(eps ** 2)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_gram_ratio(self, seed):
        rng = np.random.default_rng(seed)
        Q = rng.standard_normal((5, 9)) * 0.3
        S = [0, 3, 5]
        K = Q.T @ Q
        assert residual_mass(GramFactor(Q), S) == pytest.approx(gram_residual_mass(K, S), abs=1e-8)


class TestBadSets:
    def test_exact_empty(self):
        F, D = lifted(K3)
        V = anchor_basis(F, D.samples[0])
        B = classify_bad(F, D, K3, ProjectionParams(), V, 0.0)
        assert not B.edges and not B.endpoints and not B.off_span

    def test_small_angle_edge(self):
        F, D = lifted(K3)
        Q = F.Q.copy()
        eps0 = 0.1
        theta = math.asin(math.sqrt(eps0)) / 2
        Q[:, 1] = np.linalg.norm(Q[:, 1]) * (math.cos(theta) * Q[:, 0] / np.linalg.norm(Q[:, 0])
                                             + math.sin(theta) * np.array([0, 0, 1.0]))
        V = np.eye(3)
        B = classify_bad(GramFactor(Q), D, K3, ProjectionParams(eps0=eps0), V, 0.0)
        assert 0 in B.edges and {0, 1} <= B.endpoints

    def test_off_span_column(self):
        F, D = lifted(K3)
        Q = embed(F.Q, 4)
        nrm2 = np.sum(Q[:, 4] ** 2)
        Q[:, 4] *= math.sqrt(0.8)
        Q[3, 4] = math.sqrt(0.2 * nrm2)
        B = classify_bad(GramFactor(Q), D, K3, ProjectionParams(), np.eye(4)[:, :3], 0.01)
        assert 4 in B.off_span


class TestReassign:
    def test_three_orthonormal_neighbors(self):
        star = Graph(4, ((0, 3), (1, 3), (2, 3)))
        Q = np.zeros((3, 7))
        Q[:, :3] = np.eye(3)
        Q[:, 3] = [1.0, 0, 0]
        Q[:, 4:] = np.eye(3)
        B = BadSets(frozenset(), frozenset({3}), frozenset(), 0.0, 0.0)
        re = greedy_reassign(star, GramFactor(Q), np.eye(3), B)
        assert re.searches[0] == pytest.approx(2 / 3, abs=1e-3)
        assert re.tau_hat == pytest.approx(2 / 3, abs=1e-3)

    def test_rescale(self):
        K, beta = rescale_and_assemble(2 * np.eye(3))
        assert beta == pytest.approx(0.25)
        assert np.allclose(K.matrix, np.eye(3))
        F, _ = lifted(K3)
        K, beta = rescale_and_assemble(F)
        assert beta == 1.0 and np.allclose(K.matrix, F.kernel().matrix)


class TestProject:
    @pytest.mark.parametrize("G", [K3, C5])
    def test_exact_fixed_point(self, G):
        F, D = lifted(G)
        for Q in (F.Q, embed(F.Q, 5)):
            K, Fout, rep = project_to_rank3(GramFactor(Q), D, G)
            assert rep.beta == 1.0
            assert rep.l_out == pytest.approx(optimal_value(G), abs=1e-9)
            assert np.allclose(K.matrix, F.kernel().matrix, atol=1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_perturbed_lower_bound(self, seed):
        F, D = perturbed_high_rank(C5, 0.01, seed)
        K, Fout, rep = project_to_rank3(F, D, C5)
        assert not rep.early_exit
        assert Fout.rank == 3
        assert rep.l_out >= rep.l_star - 1e-9
        assert rep.checks["residual_vs_anchor"]
        assert log_likelihood(K, D) == pytest.approx(rep.l_out, abs=1e-9)

    def test_guarantee_rejects_large_delta(self):
        F, D = perturbed_high_rank(C5, 0.3, 0)
        with pytest.raises(GuaranteeError):
            project_to_rank3(F, D, C5, ProjectionParams(mode="guarantee"))

    def test_params(self):
        with pytest.raises(ParameterError):
            ProjectionParams(eps0=0.2)
