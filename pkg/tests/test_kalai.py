import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from vecint.kalai import (BOUNDARY, KALAI, NOT_KALAI, InversionFailed, KalaiQuadruple, OutsideLambda,
                          QuadratureRule, beta_star, beta_star_general, classify, dist_to_lambda, f_lambda,
                          g_pi, gamma_scan, h, h_inverse, h_jacobian, hstar, in_lambda, kalai_rule, pi_for)

lam_component = st.floats(-4, 4, allow_nan=False)


class TestLambda:
    def test_membership(self):
        assert in_lambda(0.5, 7 / 16)
        assert not in_lambda(0.5, 0.25)
        assert in_lambda(0.3, 0.2)
        assert not in_lambda(1.0, 1.0)

    def test_distance(self):
        assert dist_to_lambda(0.5, 0.5) == 0.0
        assert dist_to_lambda(0.5, 0.2) == pytest.approx(0.05)
        assert dist_to_lambda(1.2, 1.0) == pytest.approx(0.2)


class TestIntegrals:
    def test_f_and_g(self):
        assert np.allclose(f_lambda((0, 0), np.linspace(0, 1, 5)), 0.5)
        assert f_lambda((1, -2), 0.5) == pytest.approx(0.5)
        assert np.allclose(g_pi((0, 0, 0, 0), 0.3), 0.25)
        g = g_pi((0.3, -1.0, 2.0, 0.5), np.linspace(0, 1, 11))
        assert np.allclose(g.sum(axis=-1), 1)
        assert np.allclose(g[:, 1], g[:, 2])

    def test_h_against_adaptive_quadrature(self):
        lam = (0.7, -2.3)
        ref = [quad(lambda x, k=k: (2 * x) ** k * f_lambda(lam, x), 0, 1, epsabs=1e-13)[0] for k in (0, 1)]
        ref[1] = quad(lambda x: 2 * x * f_lambda(lam, x), 0, 1, epsabs=1e-13)[0]
        ref[0] = quad(lambda x: f_lambda(lam, x), 0, 1, epsabs=1e-13)[0]
        assert np.allclose(h(lam), ref, atol=1e-10)

    def test_h_special_values(self):
        assert np.allclose(h((0, 0)), [0.5, 0.5])
        s = 1 / (1 + np.exp(-1.1))
        assert np.allclose(h((1.1, 0)), [s, s])

    def test_hstar_gamma1_path(self):
        lam = np.array([0.4, -1.2])
        pi = np.array([lam[0], 2 * lam[0], lam[1], 2 * lam[1]])
        assert np.allclose(hstar(pi), beta_star(*h(lam)), atol=1e-8)

    @settings(max_examples=30)
    @given(lam_component, lam_component)
    def test_h_lands_in_lambda(self, a, b):
        x, y = h((a, b))
        assert in_lambda(x, y) or abs(b) < 1e-9 and abs(y - x) < 1e-12 or np.isclose(b, 0)

    @settings(max_examples=30)
    @given(lam_component, lam_component)
    def test_jacobian_positive_definite(self, a, b):
        J = h_jacobian((a, b))
        sym = (J + J.T) / 2
        # the rows are (d alpha1, d alpha2) with alpha2 carrying a factor 2; rescale to a symmetric form
        S = np.array([J[0], J[1] / 2])
        assert np.allclose(S, S.T)
        assert np.linalg.eigvalsh(S).min() > 0
        assert np.linalg.eigvals(sym).real.min() > -1e-15

    def test_jacobian_by_differences(self):
        lam = np.array([0.2, 1.5])
        eps = 1e-6
        num = np.column_stack([(h(lam + e) - h(lam - e)) / (2 * eps) for e in np.eye(2) * eps])
        assert np.allclose(num, h_jacobian(lam), atol=1e-7)


class TestInverse:
    def test_centre(self):
        assert np.allclose(h_inverse(0.5, 0.5), 0, atol=1e-12)

    def test_round_trip(self):
        lam = np.array([1.3, -0.7])
        assert np.allclose(h_inverse(*h(lam)), lam, atol=1e-8)

    def test_outside(self):
        with pytest.raises(OutsideLambda):
            h_inverse(0.5, 0.25)

    def test_near_boundary(self):
        with pytest.raises((InversionFailed, OutsideLambda)):
            h_inverse(0.5, 0.25 + 1e-8)


class TestBetaStar:
    @pytest.mark.parametrize("a", [0.2, 0.3, 0.5, 0.7, 0.8])
    def test_diagonal(self, a):
        assert np.allclose(beta_star(a, a), [a * a, a * a], atol=1e-10)

    def test_counterexample_alpha(self):
        assert np.allclose(beta_star(0.5, 7 / 16), [0.26172, 0.19922], atol=1e-5)

    def test_jensen_strict_off_diagonal(self):
        for lam in [(0.3, 1.0), (-1.0, 2.0), (0.5, -3.0)]:
            a = h(lam)
            assert beta_star(*a)[0] > a[0] ** 2 + 1e-6

    def test_scan_columns(self):
        rows = gamma_scan(0.1)
        assert rows.shape[1] == 4 and len(rows) > 10
        assert np.all(rows[:, 2] >= rows[:, 0] ** 2 - 1e-9)


class TestPiAndClassify:
    def test_gamma2_witness(self):
        pi = pi_for((0.5, 0.5, 0.2, 0.2), "Gamma2")
        g = g_pi(pi, 0.37)
        assert g[3] == pytest.approx(0.2) and g[1] == pytest.approx(0.3)

    def test_gamma3_witness(self):
        pi = pi_for((0.5, 0.5, 0.3, 0.2), "Gamma3")
        assert pi is not None
        assert np.allclose(hstar(pi), [0.3, 0.2], atol=1e-9)
        x = np.linspace(0, 1, 101)
        g = g_pi(pi, x)
        assert np.allclose(g[:, 1] + g[:, 3], 0.5)

    def test_gamma1_marginal_identity(self):
        a = (0.4, 0.3)
        b = beta_star(*a)
        pi = pi_for((*a, *b), "Gamma1")
        lam = h_inverse(*a)
        x = np.linspace(0, 1, 1000)
        g = g_pi(pi, x)
        assert np.max(np.abs(f_lambda(lam, x) - g[:, 1] - g[:, 3])) < 1e-10

    def test_off_gamma(self):
        assert pi_for((0.5, 7 / 16, 0.25, 1 / 16 + 0.05)) is None

    def test_classify_examples(self):
        v = classify((0.5, 0.5, 0.2, 0.2))
        assert v.verdict == KALAI and v.families == ["Gamma2", "Gamma3"] and v.distance == 0
        assert all(m >= 0 for m in v.margins.values())
        v = classify((0.5, 7 / 16, 0.25, 1 / 16 + 0.05))
        assert v.verdict == NOT_KALAI and v.distance > 0 and not v.memberships
        a = (0.35, 0.25)
        v = classify((*a, *beta_star(*a)))
        assert v.verdict == KALAI and "Gamma1" in v.families

    def test_boundary_band(self):
        a = 0.4
        # beta right next to the Gamma2 edge beta = alpha
        v = classify((a, a, a - 2e-6, a - 2e-6), tol=1e-6)
        assert v.verdict == BOUNDARY
        v = classify((a, a, a - 1e-3, a - 1e-3), tol=1e-6)
        assert v.verdict == KALAI

    def test_membership_iff_zero_distance(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            a1, a2 = rng.uniform(0.1, 0.9, 2)
            if not in_lambda(a1, a2):
                continue
            b1, b2 = rng.uniform(0, a1, 2)
            v = classify((a1, a2, b1, b2))
            assert bool(v.memberships) == (v.distance <= 1e-6)

    def test_alpha_outside(self):
        with pytest.raises(OutsideLambda):
            classify((0.5, 0.2, 0.1, 0.1))

    def test_quadruple(self):
        q = KalaiQuadruple.of([0.1, 0.2, 0.3, 0.4])
        assert q.alpha == (0.1, 0.2) and q.beta == (0.3, 0.4)
        with pytest.raises(ValueError):
            KalaiQuadruple.of([1, 2])


class TestGeneralDimension:
    def test_kalai_embedding_matches(self):
        lam = np.array([0.6, -1.7])
        a = h(lam)
        b = beta_star(*a)
        bg = beta_star_general([a[0], a[1] / 2], rule=kalai_rule())
        assert np.allclose(bg, b / [1, 2], atol=1e-6)

    def test_one_dimensional_reduction(self):
        # density 1 on [0, 1] in D = 1: alpha = int x f(lam x) dx
        bg = beta_star_general([0.3], density=lambda x: np.ones(len(x)))
        assert 0 < bg[0] < 0.3

    def test_symmetry(self):
        bg = beta_star_general([0.3, 0.3], density=lambda x: np.ones(len(x)))
        assert bg[0] == pytest.approx(bg[1], abs=1e-10)

    def test_centre_excluded(self):
        with pytest.raises(ValueError):
            beta_star_general([0.25, 0.25], density=lambda x: np.ones(len(x)))

    def test_density_checks(self):
        with pytest.raises(ValueError):
            QuadratureRule.tensor(lambda x: 2 * np.ones(len(x)), 2)
        with pytest.raises(ValueError):
            QuadratureRule.tensor(lambda x: np.ones(len(x)), 4)
