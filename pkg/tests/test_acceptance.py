"""End-to-end acceptance checks.

Each test records a PASS/FAIL line (shown in the terminal summary) and then
asserts, so a failing criterion is both reported and fails the run.
"""
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import record
from oracles import hmax_grid
from vecint import ProductMeasure, VectorArray, entropy
from vecint.counterexamples import VACUOUS, VERIFIED, build_and_verify_ce1, build_and_verify_ce2, vc_obstruction_family
from vecint.exactcount import kalai_target, ldp_deviation, popular_intersection
from vecint.kalai import beta_star, f_lambda, g_pi, h, h_inverse
from vecint.maxent import EMPTY, OPTIMAL, feasible_perturbation, solve_hmax, solve_maxent
from vecint.probkit import (Subcube, correlation_check, hamming_distance_to, lipschitz_concentration_check,
                            random_bounded_pair_measure, vector_chernoff_check)
from vecint.structures import uvc_dim, vc_dim


def test_criterion_1_counting_vs_entropy():
    rows = []
    ok = True
    for n in (20, 40, 60, 80):
        t0 = time.perf_counter()
        p = ldp_deviation(VectorArray.kalai(n), kalai_target(n, (Fraction(1, 2), Fraction(1, 2))))
        dt = time.perf_counter() - t0
        cap = 3 * math.log2(n) + 10
        ok &= 0 <= p.deviation <= cap and dt <= 60
        rows.append((n, p.deviation, p.deviation / n, dt))
    per_n = [r[2] for r in rows]
    ok &= all(a > b for a, b in zip(per_n, per_n[1:]))
    detail = "; ".join(f"n={n} dev={d:.3f} dev/n={r:.4f} ({t:.2f}s)" for n, d, r, t in rows)
    assert record(1, ok, detail), detail


def test_criterion_2_popular_intersection():
    n, z = 14, (7, math.floor(Fraction(7, 16) * 91))
    t0 = time.perf_counter()
    (t_star, w_star), count = popular_intersection(VectorArray.kalai(n), z)
    dt = time.perf_counter() - t0
    b = beta_star(0.5, 7 / 16)
    dt_ok = dt <= 120
    ok = abs(t_star - 14 * b[0]) <= 2 and abs(w_star - 91 * b[1]) <= 14 and dt_ok
    detail = (f"z={z} argmax=({t_star},{w_star}) x{count}; prediction=({14 * b[0]:.2f},{91 * b[1]:.2f}); "
              f"{dt:.2f}s")
    assert record(2, ok, detail), detail


def test_criterion_3_gamma_analytics():
    grid = np.linspace(-4, 4, 10)
    rt = max(np.max(np.abs(h_inverse(*h(lam)) - lam)) for lam in (np.array(p) for p in itertools.product(grid, grid)))
    rng = np.random.default_rng(3)
    x = np.linspace(0, 1, 1001)
    ident = 0.0
    for lam in rng.uniform(-4, 4, (100, 2)):
        pi = (lam[0], 2 * lam[0], lam[1], 2 * lam[1])
        g = g_pi(pi, x)
        ident = max(ident, float(np.max(np.abs(f_lambda(lam, x) - g[:, 1] - g[:, 3]))))
    diag = max(float(np.max(np.abs(beta_star(a, a) - a * a))) for a in np.round(np.arange(0.2, 0.81, 0.1), 10))
    ok = rt <= 1e-8 and ident <= 1e-10 and diag <= 1e-10
    detail = f"round-trip {rt:.1e}; Gamma1 identity {ident:.1e}; diagonal {diag:.1e}"
    assert record(3, ok, detail), detail


def test_criterion_4_hmax():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        D = int(rng.integers(1, 5))
        n = min(6, D + int(rng.integers(1, 3)))
        vs = rng.integers(1, 6, (n, D))
        p1 = rng.uniform(0.2, 0.8, n)
        lo, hi = np.maximum(0, 2 * p1 - 1), p1
        w = vs.T @ (lo + (hi - lo) * rng.uniform(0.1, 0.9, n))
        res = solve_hmax(ProductMeasure.bernoulli(p1), VectorArray.from_binary(vs), w)
        worst = max(worst, abs(res.h_max_bits - hmax_grid(p1, vs, w)))
    V = VectorArray.kalai(6)
    indep_gap = 0.0
    for _ in range(5):
        mu = ProductMeasure.bernoulli(rng.uniform(0.1, 0.9, 6))
        r = solve_hmax(mu, V, V.binary_vectors.T @ mu.p1 ** 2)
        indep_gap = max(indep_gap, abs(r.h_max_bits - 2 * entropy(mu)) if r.status == OPTIMAL else math.inf)
    empty = solve_hmax(ProductMeasure.uniform(6), V, (4, 20))
    ok = worst <= 1e-4 and indep_gap <= 1e-8 and empty.status == EMPTY and empty.h_max_bits == 0.0
    detail = f"grid oracle worst {worst:.1e} bits; independent |H-2H(p)| {indep_gap:.1e}; empty -> {empty.h_max_bits}"
    assert record(4, ok, detail), detail


def test_criterion_5_counterexample_1():
    t0 = time.perf_counter()
    r = build_and_verify_ce1(16, "0.01")
    dt = time.perf_counter() - t0
    ok = r.verdict in (VERIFIED, VACUOUS) and r.pairs_in_family == 0 and r.checks["ell_bound_holds"] and dt <= 300
    detail = (f"|fibre|={r.fibre_size} |A|={r.family_size} intersections in A={r.pairs_in_family}; "
              f"pairs in fibre={r.checks['pairs_in_fibre']} ({r.verdict}); {dt:.2f}s")
    assert record(5, ok, detail), detail


def test_criterion_6_counterexample_2():
    r = build_and_verify_ce2(15, "1/15")
    c = r.checks
    ok = r.verdict == VERIFIED and r.pairs_in_family == 0 and c["pigeonhole_bound"] >= r.params["t"] + 1
    detail = (f"|A_U|={r.family_size} intersections={r.pairs_in_family}; 2k-(n-|U|)={c['pigeonhole_bound']} "
              f">= t+1={r.params['t'] + 1}; min observed {c['min_intersection_in_family']}")
    assert record(6, ok, detail), detail


def test_criterion_7_cauchy_schwarz():
    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(1000):
        kappa = float(rng.uniform(0.01, 0.2))
        q = random_bounded_pair_measure(10, kappa, rng)
        rep = correlation_check(q, Subcube.random(10, rng), Subcube.random(10, rng))
        assert isinstance(rep.lhs, Fraction)
        violations += not rep.holds
    detail = f"1000 instances at n=10, exact rational arithmetic, {violations} violations"
    assert record(7, violations == 0, detail), detail


def test_criterion_8_concentration():
    V = VectorArray.kalai(60)
    reps = [
        vector_chernoff_check(V, ProductMeasure.uniform(60), [2, 5, 10, 15, 20, 30], trials=100_000, seed=11),
        vector_chernoff_check(V, ProductMeasure.bernoulli(np.linspace(0.05, 0.95, 60)), [2, 5, 10, 20],
                              trials=100_000, seed=12),
    ]
    mu = ProductMeasure.bernoulli(np.linspace(0.1, 0.9, 40))
    reps.append(lipschitz_concentration_check(lambda w: w.sum(axis=1), 1.0, mu, [1, 3, 5, 8, 12],
                                              trials=100_000, seed=13, mean=float(mu.p1.sum())))
    fam = np.array([[0] * 20, [1] * 20, [0, 1] * 10])
    reps.append(lipschitz_concentration_check(hamming_distance_to(fam), 1.0, ProductMeasure.uniform(20),
                                              [1, 2, 4, 6], trials=100_000, seed=14))
    ok = all(r.holds for r in reps)
    worst = max(float(np.max(r.empirical / r.bound)) for r in reps)
    detail = f"{sum(len(r.thresholds) for r in reps)} grid points, 1e5 trials each; max empirical/bound {worst:.3f}"
    assert record(8, ok, detail), detail


def test_criterion_9_vc_obstruction():
    _, rep = vc_obstruction_family(9)
    rng = np.random.default_rng(9)
    bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 11))
        J = int(rng.integers(2, 4))
        A = rng.integers(0, J, (int(rng.integers(1, 60)), n))
        bad += uvc_dim(A, J=J) > vc_dim(A, J=J)
    ok = rep.vc == 0 and bad == 0
    detail = f"pair family n=9 (|F|={rep.family_size}) vc={rep.vc}; uvc>vc in {bad}/200 random families"
    assert record(9, ok, detail), detail


def test_criterion_10_entropy_stability():
    rng = np.random.default_rng(10)
    cases = [(VectorArray.kalai(20), (10, 95)), (VectorArray.kalai(16), (8, 52)), (VectorArray.kalai(12), (4, 20))]
    worst = -math.inf
    for k in range(50):
        V, z = cases[k % len(cases)]
        sol = solve_maxent(V, z)
        q, d = feasible_perturbation(V, sol.measure, float(rng.uniform(0.001, 0.1)), rng)
        slack = entropy(q) - (sol.entropy_bits - d * d * V.n)
        worst = max(worst, slack)
    detail = f"50 null-space perturbations; max of H(p~) - (H(p) - d^2 n) = {worst:.3e}"
    assert record(10, worst <= 1e-9, detail), detail


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
