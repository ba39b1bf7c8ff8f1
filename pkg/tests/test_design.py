from collections import Counter

import numpy as np
import pytest

from interlink.closed_form import thresholds_allpairs
from interlink.core import InterlayerPattern, LayerGraph, MultilayerNetwork, WeightAssignment, build_supra_laplacian
from interlink.design import (PerturbationInput, average_laplacian_condition, greedy_interlinks, perturbation_matrix,
                              post_threshold_increment, rayleigh_increment, richardson_errors)
from interlink.errors import ExhaustedPairs, SizeMismatch, ValidationError
from interlink.generators import geometric_layer, path_layer
from interlink.spectra import algebraic_connectivity, fiedler
from interlink.weight_opt import layer_lambda2, maximize_lambda2

from conftest import fig13_analog, random_weights


class TestRayleigh:
    def test_zero(self):
        x = np.array([1.0, -1.0]) / np.sqrt(2)
        assert rayleigh_increment(PerturbationInput(0.0, x, np.zeros((2, 2)))) == 0

    def test_quadratic_form(self):
        x = np.array([1.0, -1.0]) / np.sqrt(2)
        inp = PerturbationInput(0.0, x, np.array([[1.0, -1.0], [-1.0, 1.0]]))
        assert rayleigh_increment(inp) == pytest.approx(2.0)

    def test_second_order_remainder(self, rng):
        net = MultilayerNetwork(geometric_layer(4, seed=1), geometric_layer(4, seed=2), InterlayerPattern.all_pairs(4, 4))
        c0 = 3.0
        wa = WeightAssignment.from_vector(net.pattern, random_weights(rng, 16, c0), budget=c0)
        L = build_supra_laplacian(net, wa).matrix
        Lp = perturbation_matrix(rng.exponential(size=(4, 4)))
        e1, e2, ratio = richardson_errors(L, Lp, 1e-4 * c0)
        assert e1 < 1e-6
        assert ratio == pytest.approx(4.0, abs=0.5)

    def test_invariants(self):
        with pytest.raises(ValidationError):
            PerturbationInput(0.0, np.array([1.0, 1.0]), np.zeros((2, 2)))
        with pytest.raises(ValidationError):
            PerturbationInput(0.0, np.array([1.0, 0.0]), np.array([[1.0, 0.0], [0.0, 1.0]]))
        with pytest.raises(SizeMismatch):
            PerturbationInput(0.0, np.array([1.0, 0.0]), np.zeros((3, 3)))

    def test_from_increment(self):
        x = np.array([1.0, 0.0, -1.0]) / np.sqrt(2)
        inp = PerturbationInput.from_increment(1.0, x, [[0.5, 0.0]], epsilon=0.1)
        assert inp.c_prime == 0.5
        assert inp.first_order() == pytest.approx(1.0 + 0.1 * 0.5 * 0.5)


class TestPostThreshold:
    def test_zero(self):
        assert post_threshold_increment(np.array([1.0, -1.0]) / np.sqrt(2), np.zeros((3, 2))) == 0

    def test_two_nodes(self):
        v = np.array([1.0, -1.0]) / np.sqrt(2)
        assert post_threshold_increment(v, np.array([[1.0, 0.0]]), "layer2") == pytest.approx(0.5)
        assert post_threshold_increment(v, np.array([[1.0], [0.0]]), "layer1") == pytest.approx(0.5)

    def test_bad_side(self):
        with pytest.raises(ValidationError):
            post_threshold_increment(np.array([1.0, 0.0]), np.zeros((2, 2)), "both")

    def test_maximiser_matches_solver(self, fig3_network):
        # just above c*, the best use of extra weight is the node with the largest |v_i|
        v2 = fiedler(fig3_network.layer2.laplacian()).vector
        c = 1.2 * 30 * 0.0712
        res = maximize_lambda2(fig3_network, c)
        totals = res.assignment.matrix(30, 15).sum(axis=0)
        best = int(np.argmax(v2 ** 2))
        e = np.zeros((1, 15))
        e[0, best] = 1.0
        scores = [post_threshold_increment(v2, np.eye(15)[[j]], "layer2") for j in range(15)]
        assert int(np.argmax(scores)) == best
        assert post_threshold_increment(v2, e, "layer2") == pytest.approx(v2[best] ** 2)
        assert int(np.argmax(totals)) == best

    def test_matches_exact_growth_case1(self, case1_network):
        l21, l22 = layer_lambda2(case1_network)
        rep = thresholds_allpairs(l21, l22, 30, 15)
        c0 = 0.5 * (rep.c_star + rep.c_star_star)
        W = np.full((30, 15), c0 / 450)
        v2 = fiedler(case1_network.layer2.laplacian()).vector
        Wp = np.random.default_rng(3).exponential(size=(30, 15))
        slope = post_threshold_increment(v2, Wp, "layer2")
        from interlink.core import supra_from_blocks
        L = supra_from_blocks(case1_network.layer1.laplacian(), case1_network.layer2.laplacian(), W)
        _, _, ratio = richardson_errors(L, perturbation_matrix(Wp), 1e-4 * c0)
        x = np.concatenate([np.zeros(30), v2])
        assert slope == pytest.approx(x @ perturbation_matrix(Wp) @ x, rel=1e-12)
        assert ratio == pytest.approx(4.0, abs=0.5)


class TestGreedy:
    def test_empty(self):
        net = MultilayerNetwork(path_layer(3), path_layer(3), InterlayerPattern.all_pairs(3, 3))
        plan = greedy_interlinks(net, 0, 1.0)
        assert plan.added_edges == () and plan.lambda2_trace == ()

    def test_disconnected_start_ties(self):
        net = MultilayerNetwork(path_layer(3), path_layer(3), InterlayerPattern.all_pairs(3, 3))
        plan = greedy_interlinks(net, 1, 1.0)
        assert plan.added_edges == ((0, 0),)

    def test_p3_single_edge(self):
        net = MultilayerNetwork(path_layer(3), path_layer(3), InterlayerPattern.all_pairs(3, 3))
        A, L0 = net.incidence(), net.intra_laplacian()
        V = fiedler(L0).cluster_basis
        scores = np.sum((A.T @ V) ** 2, axis=1) / V.shape[1]
        plan = greedy_interlinks(net, 1, 1.0)
        k = net.pattern.index(plan.added_edges[0])
        assert scores[k] == pytest.approx(scores.max(), rel=1e-12)
        exhaustive = max(algebraic_connectivity(L0 + np.outer(A[:, t], A[:, t])) for t in range(9))
        assert plan.lambda2_trace[0] <= exhaustive + 1e-12
        assert exhaustive == pytest.approx(algebraic_connectivity(L0 + np.outer(A[:, 4], A[:, 4])))

    def test_exhausted(self):
        net = MultilayerNetwork(path_layer(2), path_layer(2), InterlayerPattern.one_to_one(2))
        with pytest.raises(ExhaustedPairs):
            greedy_interlinks(net, 3, 1.0)

    def test_bad_w0(self):
        net = MultilayerNetwork(path_layer(2), path_layer(2), InterlayerPattern.one_to_one(2))
        with pytest.raises(ValidationError):
            greedy_interlinks(net, 1, 0.0)

    def test_plan_invariants(self):
        net = MultilayerNetwork(geometric_layer(8, seed=3), geometric_layer(7, seed=4), InterlayerPattern.all_pairs(8, 7))
        plan = greedy_interlinks(net, 12, 0.5)
        assert len(plan.added_edges) == 12 == len(set(plan.added_edges))
        assert all(b >= a - 1e-12 for a, b in zip(plan.lambda2_trace, plan.lambda2_trace[1:]))
        L = build_supra_laplacian(net, plan.assignment()).matrix
        assert algebraic_connectivity(L) == pytest.approx(plan.lambda2_trace[-1], abs=1e-12)

    def test_score_is_first_order_increment(self):
        net = MultilayerNetwork(geometric_layer(7, seed=8), geometric_layer(6, seed=9), InterlayerPattern.all_pairs(7, 6))
        w0 = 0.3
        plan = greedy_interlinks(net, 6, w0)
        A = net.incidence()
        L = net.intra_laplacian()
        for step, pair in enumerate(plan.added_edges):
            fd = fiedler(L)
            k = net.pattern.index(pair)
            if step > 0 and fd.multiplicity == 1:
                inp = PerturbationInput(fd.lambda2, fd.vector, w0 * np.outer(A[:, k], A[:, k]))
                assert plan.scores[step] == pytest.approx(rayleigh_increment(inp), abs=1e-12)
            L = L + w0 * np.outer(A[:, k], A[:, k])

    @pytest.mark.parametrize("seed", range(4))
    def test_extreme_nodes_collect_interlinks(self, seed):
        g1 = geometric_layer(30, radius=0.5, seed=seed)
        g2 = geometric_layer(30, radius=0.25, seed=seed + 77)
        assert algebraic_connectivity(g1.laplacian()) > algebraic_connectivity(g2.laplacian())
        net = MultilayerNetwork(g1, g2, InterlayerPattern.all_pairs(30, 30))
        r = 60
        plan = greedy_interlinks(net, r, 100.0 / r)
        counts = Counter(i for i, _ in plan.added_edges)
        u = fiedler(g1.laplacian()).vector
        ends = {int(np.argmax(u)), int(np.argmin(u))}
        assert np.mean([counts[i] for i in ends]) > r / 30


    @pytest.mark.parametrize("seed", range(4))
    def test_first_edges_hit_top_fiedler_nodes(self, seed):
        g1 = geometric_layer(30, radius=0.5, seed=seed)
        g2 = geometric_layer(30, radius=0.25, seed=seed + 77)
        net = MultilayerNetwork(g1, g2, InterlayerPattern.all_pairs(30, 30))
        plan = greedy_interlinks(net, 2, 100.0 / 60)
        u = fiedler(g1.laplacian()).vector
        top2 = set(np.argsort(-np.abs(u))[:2].tolist())
        # the opening edge is a pure tie on the uncoupled layers; the next one is informative
        assert plan.added_edges[1][0] in top2

class TestAverageCondition:
    def test_equal_layers(self):
        g = geometric_layer(6, seed=1)
        assert not average_laplacian_condition(g.laplacian(), g.laplacian())

    def test_permuted_paths(self):
        n = 8
        P = path_layer(n).laplacian()
        perm = np.array([0, 2, 4, 6, 7, 5, 3, 1])
        Q = P[np.ix_(perm, perm)]
        direct = np.linalg.eigvalsh((P + Q) / 2)[1] > max(np.linalg.eigvalsh(P)[1], np.linalg.eigvalsh(Q)[1])
        assert average_laplacian_condition(P, Q) == direct
        rev = P[::-1, ::-1]
        assert not average_laplacian_condition(P, rev)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            average_laplacian_condition(path_layer(3), path_layer(4))

    def test_fig13_analog(self):
        net = fig13_analog()
        l1, l2 = layer_lambda2(net)
        assert l1 == pytest.approx(1.0) and l2 == pytest.approx(0.4384, abs=1e-4)
        assert not average_laplacian_condition(net.layer1, net.layer2)
        plan = greedy_interlinks(net, 7, 10 / 7)
        assert plan.lambda2_trace[-1] > max(l1, l2)
