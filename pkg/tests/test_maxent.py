import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import coupling_entropy as oracle_coupling_entropy
from oracles import hmax_grid, primal_maxent
from vecint import PairMeasure, ProductMeasure, VectorArray, entropy, expected_array_value
from vecint.maxent import (BOUNDARY, CONVERGED, EMPTY, INFEASIBLE, OPTIMAL, boltzmann_measure,
                           coupling_box, feasible_perturbation, intersection_value, is_feasible, log_partition, pair_word,
                           solve_hmax, solve_maxent, solve_pair_maxent, support_mask, tilde)


class TestDual:
    def test_gradient_and_hessian_by_differences(self):
        V = VectorArray.kalai(6)
        lam = np.array([0.3, -0.2])
        f, g, H = log_partition(V, lam)
        eps = 1e-6
        for d in range(2):
            e = np.zeros(2)
            e[d] = eps
            fp, gp, _ = log_partition(V, lam + e)
            fm, gm, _ = log_partition(V, lam - e)
            assert (fp - fm) / (2 * eps) == pytest.approx(g[d], abs=1e-6)
            assert np.allclose((gp - gm) / (2 * eps), H[:, d], atol=1e-5)

    def test_boltzmann_at_zero_is_uniform(self):
        mu = boltzmann_measure(VectorArray.kalai(4), [0.0, 0.0])
        assert np.allclose(mu.p, 0.5)


class TestSolveMaxent:
    def test_kalai_30(self):
        V = VectorArray.kalai(30)
        sol = solve_maxent(V, (15, 200))
        assert sol.status == CONVERGED
        assert np.allclose(expected_array_value(V, sol.measure), [15, 200], atol=1e-7)

    def test_centre_is_uniform(self):
        sol = solve_maxent(VectorArray.kalai(4), (2, 5))
        assert sol.status == CONVERGED
        assert sol.entropy_bits == pytest.approx(4.0)

    def test_infeasible(self):
        sol = solve_maxent(VectorArray.kalai(4), (5, 10))
        assert sol.status == INFEASIBLE and not sol.ok
        assert not is_feasible(VectorArray.kalai(4), (5, 10))

    @pytest.mark.parametrize("w", [(0, 0), (4, 10), (1, 1)])
    def test_point_mass_targets(self, w):
        sol = solve_maxent(VectorArray.kalai(4), w)
        assert sol.status == BOUNDARY
        assert sol.entropy_bits == pytest.approx(0.0, abs=1e-9)

    def test_boundary_with_partial_support(self):
        V = VectorArray.kalai(4)
        # the only words of value (2, 3) are {1, 2}: coordinates 3, 4 frozen at 0
        mask = support_mask(V, (2, 3))
        assert not mask[2:, 1].any()
        sol = solve_maxent(V, (2, 3))
        assert sol.status == BOUNDARY and sol.entropy_bits == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("n,w", [(5, (2, 6)), (6, (3, 10)), (7, (3, 11)), (8, (5, 20))])
    def test_matches_primal_oracle(self, n, w):
        V = VectorArray.kalai(n)
        sol = solve_maxent(V, w)
        p, H = primal_maxent(V.vectors, w)
        assert sol.entropy_bits == pytest.approx(H, abs=1e-6)
        assert np.allclose(sol.measure.p, p, atol=1e-4)

    def test_general_alphabet(self):
        rng = np.random.default_rng(3)
        vec = rng.integers(-3, 4, size=(5, 3, 2))
        V = VectorArray(vec, [3.0, 3.0], (0, 1, 2))
        mu = ProductMeasure(rng.dirichlet(np.ones(3), size=5))
        w = expected_array_value(V, mu)
        sol = solve_maxent(V, w)
        assert sol.ok
        p, H = primal_maxent(vec, w)
        assert sol.entropy_bits == pytest.approx(H, abs=1e-5)
        assert sol.entropy_bits >= entropy(mu) - 1e-9

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(0.05, 0.95), min_size=3, max_size=8))
    def test_optimality_against_feasible_measures(self, p1):
        """Any product measure with the same expectation has no larger entropy."""
        V = VectorArray.kalai(len(p1))
        mu = ProductMeasure.bernoulli(p1)
        w = expected_array_value(V, mu)
        sol = solve_maxent(V, w)
        assert sol.ok
        assert sol.entropy_bits >= entropy(mu) - 1e-7
        assert sol.residual < 1e-6


class TestPairMaxent:
    def test_constant_array(self):
        sol = solve_pair_maxent(VectorArray.constant(10), (5,), (2,))
        assert sol.status == CONVERGED
        assert np.allclose(sol.pair.q[0], [[0.2, 0.3], [0.3, 0.2]], atol=1e-8)

    def test_tilde_words_map_pairs(self):
        V = VectorArray.kalai(4)
        T = tilde(V, (2, 5), (0, 0))
        a, b = (0, 1, 1, 0), (1, 0, 0, 1)
        val = T.array.value(pair_word(a, b))
        assert val.tolist() == list(T.target)

    def test_intersection_value(self):
        V = VectorArray.kalai(3)
        q = PairMeasure.binary([0.5, 0.0, 0.25], [0.5, 0.5, 0.5])
        assert np.allclose(intersection_value(V, q), [0.75, 0.5 + 0.75])


class TestHmax:
    def test_independent_target(self):
        V = VectorArray.kalai(8)
        sol = solve_maxent(V, (4, 14))
        p1 = sol.measure.p1
        w = V.binary_vectors.T @ (p1 ** 2)
        res = solve_hmax(sol.measure, V, w)
        assert res.status == OPTIMAL
        assert res.h_max_bits == pytest.approx(2 * sol.entropy_bits, abs=1e-8)

    def test_empty(self):
        V = VectorArray.kalai(6)
        mu = ProductMeasure.bernoulli(np.full(6, 0.5))
        res = solve_hmax(mu, V, (4, 20))
        assert res.status == EMPTY and res.h_max_bits == 0.0

    def test_box(self):
        lo, hi = coupling_box(np.array([0.3, 0.7]), 0.0)
        assert np.allclose(lo, [0.0, 0.4]) and np.allclose(hi, [0.3, 0.7])

    def test_kappa_restricts(self):
        V = VectorArray.kalai(6)
        mu = ProductMeasure.bernoulli(np.full(6, 0.5))
        w = V.binary_vectors.T @ np.full(6, 0.05)
        free = solve_hmax(mu, V, w)
        tight = solve_hmax(mu, V, w, kappa=0.1)
        assert free.status == OPTIMAL
        assert tight.status == EMPTY

    def test_grid_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(6):
            D = int(rng.integers(1, 3))
            n = D + int(rng.integers(1, 3))
            vs = rng.integers(1, 6, (n, D))
            p1 = rng.uniform(0.2, 0.8, n)
            lo, hi = np.maximum(0, 2 * p1 - 1), p1
            x0 = lo + (hi - lo) * rng.uniform(0.1, 0.9, n)
            w = vs.T @ x0
            res = solve_hmax(ProductMeasure.bernoulli(p1), VectorArray.from_binary(vs), w)
            assert abs(res.h_max_bits - hmax_grid(p1, vs, w)) < 1e-4
            assert res.h_max_bits == pytest.approx(float(oracle_coupling_entropy(res.pair.q[:, 1, 1], p1)))


class TestStability:
    def test_perturbations_keep_expectation_and_lose_entropy(self):
        rng = np.random.default_rng(8)
        V = VectorArray.kalai(12)
        sol = solve_maxent(V, (6, 33))
        for d in (0.005, 0.02, 0.08):
            q, got = feasible_perturbation(V, sol.measure, d, rng)
            assert got <= d + 1e-12
            assert np.allclose(expected_array_value(V, q), expected_array_value(V, sol.measure), atol=1e-9)
            assert entropy(q) <= sol.entropy_bits - got ** 2 * V.n + 1e-9

    def test_no_free_direction(self):
        V = VectorArray.kalai(2)
        with pytest.raises(ValueError):
            feasible_perturbation(V, ProductMeasure.uniform(2), 0.1, np.random.default_rng(0))

    def test_pair_maxent_marginals_symmetric(self):
        sol = solve_pair_maxent(VectorArray.kalai(8), (4, 18), (2, 9))
        assert sol.ok
        assert np.allclose(sol.pair.marginal(1).p, sol.pair.marginal(2).p, atol=1e-10)
