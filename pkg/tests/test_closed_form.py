import numpy as np
import pytest

from interlink.closed_form import (DEGENERATE_RTOL, ktok_threshold_bounds, layer_fiedler_bounds,
                                   regular_threshold_bracket, regularity_pattern_feasible, regularity_witness,
                                   superdiffusion_window, thresholds_allpairs, uniform_allpairs_spectrum,
                                   uniform_lambda2, upper_bound_F)
from interlink.core import (InterlayerPattern, MultilayerNetwork, WeightAssignment, build_supra_laplacian,
                            uniform_assignment)
from interlink.errors import DegenerateCase, ValidationError
from interlink.generators import erdos_renyi_layer, geometric_layer
from interlink.spectra import algebraic_connectivity, full_spectrum

from conftest import FIG3, FIG5, FIG7, FIG10, k2, random_weights


class TestUpperBound:
    def test_values(self):
        assert upper_bound_F(30, 15, 10) == pytest.approx(1.0)
        assert upper_bound_F(7, 7, 3.5) == pytest.approx(2 * 3.5 / 7)
        assert upper_bound_F(4, 9, 0) == 0

    def test_rejects_empty_layer(self):
        with pytest.raises(ValidationError):
            upper_bound_F(0, 3, 1)


class TestRegularity:
    def test_k_to_k_uniform(self):
        pat = InterlayerPattern.k_to_k(6, 2)
        wit = regularity_witness(pat, 6, 6, 3.0)
        assert wit.feasible
        assert all(v == pytest.approx(3.0 / 12) for v in wit.weights.weights.values())

    def test_one_to_one(self):
        wit = regularity_witness(InterlayerPattern.one_to_one(5), 5, 5, 2.0)
        assert wit.feasible
        assert all(v == pytest.approx(0.4) for v in wit.weights.weights.values())

    def test_star_infeasible(self):
        pat = InterlayerPattern.explicit(3, 3, [(0, j) for j in range(3)])
        assert not regularity_witness(pat, 3, 3, 1.0).feasible

    def test_max_flow_witness_on_irregular_pattern(self):
        # feasible but uniform weights are not regular
        pairs = [(0, 0), (0, 1), (1, 1), (2, 2), (1, 2), (2, 0)]
        pairs += [(0, 2)]
        pat = InterlayerPattern.explicit(3, 3, pairs)
        wit = regularity_witness(pat, 3, 3, 6.0)
        assert wit.feasible
        assert np.allclose(wit.row_sums(), 2.0, atol=1e-9)
        assert np.allclose(wit.column_sums(), 2.0, atol=1e-9)
        assert set(wit.weights.weights) <= set(pairs)

    def test_rectangular(self):
        pat = InterlayerPattern.explicit(2, 4, [(0, 0), (0, 1), (1, 2), (1, 3)])
        wit = regularity_witness(pat, 2, 4, 4.0)
        assert wit.feasible
        assert np.allclose(wit.row_sums(), 2.0) and np.allclose(wit.column_sums(), 1.0)
        bad = InterlayerPattern.explicit(2, 4, [(0, 0), (0, 1), (0, 2), (1, 3)])
        assert not regularity_pattern_feasible(bad)[0]

    def test_witness_eigenpair(self, rng):
        g1, g2 = erdos_renyi_layer(6, seed=1), erdos_renyi_layer(6, seed=2)
        pat = InterlayerPattern.k_to_k(6, 3)
        net = MultilayerNetwork(g1, g2, pat)
        wit = regularity_witness(pat, 6, 6, 5.0)
        L = build_supra_laplacian(net, wit.weights).matrix
        v = np.concatenate([np.full(6, 6.0), np.full(6, -6.0)])
        assert np.allclose(L @ v, upper_bound_F(6, 6, 5.0) * v, atol=1e-9)


class TestUniformSpectrum:
    def test_two_k2(self):
        s = full_spectrum(k2().laplacian())
        assert np.allclose(uniform_allpairs_spectrum(s, s, 2, 2, 1.0).eigenvalues, [0, 1, 2.5, 2.5])

    def test_zero_budget(self):
        g1, g2 = erdos_renyi_layer(4, seed=1), erdos_renyi_layer(3, seed=2)
        s1, s2 = full_spectrum(g1.laplacian()), full_spectrum(g2.laplacian())
        got = uniform_allpairs_spectrum(s1, s2, 4, 3, 0.0).eigenvalues
        assert np.allclose(got, np.sort(np.concatenate([s1.eigenvalues, s2.eigenvalues, [0.0]])[1:]))

    def test_matches_direct_eigensolve(self):
        g1, g2 = erdos_renyi_layer(6, seed=11), erdos_renyi_layer(5, seed=12)
        net = MultilayerNetwork(g1, g2, InterlayerPattern.all_pairs(6, 5))
        s1, s2 = full_spectrum(g1.laplacian()), full_spectrum(g2.laplacian())
        for c in (0.3, 2.0, 11.0):
            direct = full_spectrum(build_supra_laplacian(net, uniform_assignment(net.pattern, c)).matrix)
            spec = uniform_allpairs_spectrum(s1, s2, 6, 5, c)
            assert np.allclose(spec.eigenvalues, direct.eigenvalues, atol=1e-9)
            L = build_supra_laplacian(net, uniform_assignment(net.pattern, c)).matrix
            assert np.abs(L @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues).max() < 1e-9

    def test_uniform_lambda2(self):
        assert uniform_lambda2(1.0, 0.5, 8, 8, 2.0) == pytest.approx(min(4 / 8, 0.5 + 2 / 8))
        assert uniform_lambda2(FIG3["l21"], FIG3["l22"], 30, 15, 1.0) == pytest.approx(0.1)
        assert uniform_lambda2(1.0, 2.0, 3, 4, 0.0) == 0.0


class TestThresholds:
    @pytest.mark.parametrize("params, label, cs, css", [
        (FIG5, "Case2", 9.1235, None),
        (FIG7, "Case3", 9.5320, None),
        (FIG10, "Case1", 2.4834, 13.8486),
    ])
    def test_caption_values(self, params, label, cs, css):
        rep = thresholds_allpairs(params["l21"], params["l22"], params["n"], params["m"])
        assert rep.case_label == label
        assert rep.c_star == pytest.approx(cs, abs=2e-3)
        if css is None:
            assert rep.c_star_star is None
        else:
            assert rep.c_star_star == pytest.approx(css, abs=2e-3)

    def test_fig3_c_star(self):
        rep = thresholds_allpairs(FIG3["l21"], FIG3["l22"], 30, 15)
        assert rep.case_label == "Case1"
        assert rep.c_star == pytest.approx(2.1373, abs=2e-3)
        # the caption's c** is checked in the acceptance suite
        assert rep.c_star_star == pytest.approx((0.6798 - 0.0712) / (1 / 15 - 1 / 30), rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateCase) as info:
            thresholds_allpairs(0.6, 0.3, 20, 10)
        assert info.value.report.case_label == "Degenerate"

    def test_degenerate_tolerance(self):
        with pytest.raises(DegenerateCase):
            thresholds_allpairs(0.6 * (1 + 0.1 * DEGENERATE_RTOL), 0.3, 20, 10)
        thresholds_allpairs(0.6 * (1 + 100 * DEGENERATE_RTOL), 0.3, 20, 10)

    def test_mirrored_case1(self):
        rep = thresholds_allpairs(0.0712, 0.6798, 15, 30)
        assert rep.case_label == "Case1" and rep.mirrored
        assert rep.c_star == pytest.approx(15 * 0.0712 * 2, rel=1e-12) or rep.c_star == pytest.approx(30 * 0.0712)
        assert rep.c_star_star > rep.c_star

    def test_equal_sizes(self):
        rep = thresholds_allpairs(0.7, 0.4, 10, 10)
        assert rep.c_star == pytest.approx(10 * 0.4)

    @pytest.mark.parametrize("params", [FIG3, FIG5, FIG7, FIG10])
    def test_branch_switch(self, params):
        n, m, l21, l22 = params["n"], params["m"], params["l21"], params["l22"]
        rep = thresholds_allpairs(l21, l22, n, m)
        eps = 1e-6
        for c in [rep.c_star] + ([rep.c_star_star] if rep.c_star_star else []):
            def branch(x):
                vals = [upper_bound_F(n, m, x), l21 + x / n, l22 + x / m]
                return int(np.argmin(vals))
            assert branch(c - eps) != branch(c + eps)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            thresholds_allpairs(0.0, 1.0, 3, 3)


class TestSuperdiffusion:
    def test_fig3_false(self):
        rep = superdiffusion_window(0.6798, 0.0712, 30, 15)
        assert not rep.condition_holds
        assert rep.inequality_values[1] == pytest.approx(0.02266, abs=1e-5)
        assert rep.inequality_values[2] == pytest.approx(0.00712, abs=1e-5)

    def test_true(self):
        rep = superdiffusion_window(0.25, 0.1, 30, 15)
        assert rep.condition_holds
        assert rep.inequality_values == pytest.approx((0.1 / 15, 0.25 / 30, 0.01))

    def test_boundary_equal(self):
        assert not superdiffusion_window(0.5, 0.5, 10, 10).condition_holds


class TestLayerFiedlerBounds:
    def test_zero_coupling(self):
        L1, L2 = erdos_renyi_layer(5, seed=1).laplacian(), erdos_renyi_layer(4, seed=2).laplacian()
        b1, b2 = layer_fiedler_bounds(L1, L2, np.zeros((5, 4)))
        assert b1 == pytest.approx(algebraic_connectivity(L1))
        assert b2 == pytest.approx(algebraic_connectivity(L2))

    def test_uniform_identity(self):
        L1, L2 = erdos_renyi_layer(5, seed=1).laplacian(), erdos_renyi_layer(4, seed=2).laplacian()
        c = 3.0
        b1, b2 = layer_fiedler_bounds(L1, L2, np.full((5, 4), c / 20))
        assert b1 == pytest.approx(algebraic_connectivity(L1) + c / 5)
        assert b2 == pytest.approx(algebraic_connectivity(L2) + c / 4)

    def test_strict_on_random_draws(self, rng):
        g1, g2 = geometric_layer(7, seed=3), geometric_layer(6, seed=4)
        net = MultilayerNetwork(g1, g2, InterlayerPattern.all_pairs(7, 6))
        for _ in range(100):
            c = rng.uniform(0.1, 20)
            wa = WeightAssignment.from_vector(net.pattern, random_weights(rng, 42, c), budget=c)
            L = build_supra_laplacian(net, wa).matrix
            b1, b2 = layer_fiedler_bounds(g1.laplacian(), g2.laplacian(), wa.matrix(7, 6))
            assert algebraic_connectivity(L) < min(b1, b2)


def test_ktok_bounds():
    assert ktok_threshold_bounds(2, 2) == (2, 4)
    assert ktok_threshold_bounds(0, 7) == (0, 0)


def test_regular_bracket_contains_allpairs():
    lo, hi = regular_threshold_bracket(0.6798, 0.0712, 30, 15)
    assert lo <= thresholds_allpairs(0.6798, 0.0712, 30, 15).c_star <= hi
