import math

import numpy as np
import pytest

from dppmle import log_likelihood
from dppmle.coloring import (DecoderParams, assignment_to_coloring, check_proper,
                             coloring_to_kernel, coloring_vectors, complete_gadget,
                             decode_assignment, likelihood_from_angles, optimal_value,
                             three_color, vector_error)
from dppmle.coloring.geometry import (check_clause_gadget_grid, check_near_frame_claim,
                                      check_simple_clause_claim, icosphere, sphere_argmax)
from dppmle.coloring.vector import kernel_likelihood_on_lift
from dppmle.errors import ColoringError, DecodeError, ParameterError, ValidationError
from dppmle.graph import Graph
from dppmle.reduction import build_bot_graph, build_expander, lift_to_hypergraph, parse_dimacs

K3 = Graph(3, ((0, 1), (1, 2), (0, 2)))
K3_VALUE = 3 * math.log(3) - 2 * math.log(2)


@pytest.fixture(scope="module")
def sat_graph():
    phi = parse_dimacs("p cnf 4 3\n1 2 3 0\n-1 2 4 0\n-2 -3 -4 0\n")
    return build_bot_graph(phi, build_expander(2 * phi.k * 4, 8, 3), phi.k)


def rotate(v, angle, rng):
    """Rotate unit vector ``v`` by ``angle`` about a random perpendicular axis."""
    axis = np.cross(v, rng.standard_normal(3))
    axis /= np.linalg.norm(axis)
    w = np.cross(axis, v)
    return math.cos(angle) * v + math.sin(angle) * w


class TestDiscrete:
    def test_check_proper(self):
        assert check_proper(K3, [1, 2, 3]) == (True, [])
        ok, bad = check_proper(K3, [1, 1, 2])
        assert not ok and bad == [(0, 1)]
        assert check_proper(Graph(1, ()), [1])[0]

    def test_three_color_small(self):
        assert check_proper(K3, three_color(K3))[0]
        K4 = Graph(4, tuple((a, b) for a in range(4) for b in range(a + 1, 4)))
        assert three_color(K4) is None

    def test_assignment_coloring(self, sat_graph):
        col = assignment_to_coloring(sat_graph, [True, True, False, False])
        assert check_proper(sat_graph, col)[0]

    def test_violating_assignment(self, sat_graph):
        with pytest.raises(ValidationError, match="clause 3"):
            assignment_to_coloring(sat_graph, [False, True, True, True])

    def test_equality_gadget_forced(self, sat_graph):
        G = sat_graph
        col = assignment_to_coloring(G, [True, True, False, False])
        g = next(g for g in G.gadgets if g.kind == "literal_eq")
        assert col[g.ends[0]] == col[g.ends[1]]
        aux = complete_gadget(G, col, g.id)
        assert sorted(aux) == sorted({1, 2, 3} - {col[g.ends[0]]})

    def test_clause_gadget_all_false(self, sat_graph):
        G = sat_graph
        col = assignment_to_coloring(G, [True, True, False, False])
        g = next(g for g in G.gadgets if g.kind == "clause")
        col = list(col)
        for v in g.ends:
            col[v] = 2
        with pytest.raises(ColoringError):
            complete_gadget(G, col, g.id)


class TestVector:
    def test_k3_kernel(self):
        F = coloring_to_kernel(K3, [1, 2, 3])
        assert np.allclose(F.norms ** 2, [2 / 3] * 3 + [1 / 3] * 3)
        assert F.spectral_norm() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(np.sum(F.Q ** 2, axis=1), 1.0)

    def test_k3_likelihood(self):
        F = coloring_to_kernel(K3, [1, 2, 3])
        D = lift_to_hypergraph(K3).dataset
        assert log_likelihood(F, D) == pytest.approx(K3_VALUE, abs=1e-12)
        assert log_likelihood(F.kernel(), D) == pytest.approx(K3_VALUE, abs=1e-12)

    def test_k3_marginal(self):
        from dppmle import subset_marginal
        K = coloring_to_kernel(K3, [1, 2, 3]).kernel()
        assert subset_marginal(K, [0, 1, 3]) == pytest.approx(4 / 27)

    def test_single_edge(self):
        G = Graph(2, ((0, 1),))
        F = coloring_to_kernel(G, [1, 2])
        assert np.allclose(F.norms ** 2, 1.0)
        assert kernel_likelihood_on_lift(G, F) == pytest.approx(0.0, abs=1e-15)

    def test_improper_rejected(self):
        with pytest.raises(ColoringError):
            coloring_to_kernel(K3, [1, 1, 2])

    def test_optimal_values(self):
        assert optimal_value(K3) == pytest.approx(1.909543, abs=1e-6)
        assert optimal_value(Graph(2, ((0, 1),))) == 0.0
        star = Graph(4, ((0, 1), (0, 2), (0, 3)))
        assert optimal_value(star) == pytest.approx(2 * math.log(3))

    def test_vector_error(self):
        assert vector_error(K3, np.tile([1.0, 0, 0], (3, 1))) == pytest.approx(1.0)
        assert vector_error(K3, np.eye(3)) == 0.0
        s = math.sqrt(0.5)
        assert vector_error(Graph(2, ((0, 1),)), [[1, 0, 0], [s, s, 0]]) == pytest.approx(0.5)

    def test_vector_norm_checked(self):
        with pytest.raises(ValidationError):
            vector_error(K3, 2 * np.eye(3))

    def test_angles_orthonormal(self):
        assert likelihood_from_angles(K3, np.eye(3)).value == pytest.approx(optimal_value(K3))

    def test_angles_pi_over_3(self):
        X = np.eye(3)
        X[1] = [math.cos(math.pi / 3), math.sin(math.pi / 3), 0.0]
        res = likelihood_from_angles(K3, X)
        expect = optimal_value(K3) + math.log(4 / 3) / 3
        assert res.value == pytest.approx(expect, abs=1e-12)
        assert kernel_likelihood_on_lift(K3, res.factor) == pytest.approx(expect, abs=1e-12)

    def test_angles_parallel(self):
        X = np.eye(3)
        X[1] = X[0]
        res = likelihood_from_angles(K3, X)
        assert res.value == math.inf and res.flagged_edges == (0,)


class TestDecode:
    def test_exact(self, sat_graph):
        col = assignment_to_coloring(sat_graph, [True, True, False, False])
        res = decode_assignment(sat_graph, coloring_vectors(col))
        assert res.satisfied_fraction == 1.0

    @pytest.mark.parametrize("seed", range(3))
    def test_noisy(self, sat_graph, seed):
        rng = np.random.default_rng(seed)
        col = assignment_to_coloring(sat_graph, [False, True, False, True])
        R, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        X = coloring_vectors(col) @ R.T
        X = np.array([rotate(x, 1e-3, rng) for x in X])
        res = decode_assignment(sat_graph, X)
        assert res.satisfied_fraction == 1.0
        assert res.diagnostics["region_violations"] == []

    def test_all_equal(self, sat_graph):
        X = np.tile([0.0, 0.0, 1.0], (sat_graph.n_nodes, 1))
        with pytest.raises(DecodeError):
            decode_assignment(sat_graph, X)

    def test_param_order(self):
        with pytest.raises(ParameterError):
            DecoderParams(slack=0.1, delta_p=0.05)


class TestGeometry:
    def test_icosphere_unit(self):
        P = icosphere(2)
        assert np.allclose(np.linalg.norm(P, axis=1), 1.0)

    def test_one_neighbor(self):
        res = sphere_argmax(np.array([[1.0, 0, 0]]))
        assert res.value == pytest.approx(1.0, abs=1e-12)
        assert abs(res.direction[0]) < 1e-6

    def test_two_neighbors(self):
        res = sphere_argmax(np.eye(3)[:2])
        assert res.value == pytest.approx(1.0, abs=1e-12)
        assert abs(abs(res.direction[2]) - 1) < 1e-9

    def test_three_neighbors(self):
        res = sphere_argmax(np.eye(3))
        assert res.value == pytest.approx(2 / 3, abs=1e-3)
        assert np.allclose(np.abs(res.direction), 1 / math.sqrt(3), atol=1e-2)

    def test_near_frame_claim(self):
        assert check_near_frame_claim(samples=5000, seed=3).holds

    def test_simple_clause_claim(self):
        assert check_simple_clause_claim(samples=5000, seed=4).holds

    def test_clause_gadget_grid(self):
        assert check_clause_gadget_grid(step_deg=10, tol_deg=5).holds
