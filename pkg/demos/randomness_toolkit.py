"""Concentration, dependent random choice, contiguity and correlation on small cases.

Run:  python demos/randomness_toolkit.py
"""
import numpy as np

from vecint import ProductMeasure, VectorArray
from vecint.exactcount import fibre_matrix, kalai_target
from vecint.maxent import solve_maxent
from vecint.probkit import (Subcube, contiguity_exponent, correlation_check, cycle_graph,
                            dependent_random_choice, independence_number, product_graph,
                            random_bipartite, random_bounded_pair_measure, vector_chernoff_check)


def main():
    V = VectorArray.kalai(60)
    rep = vector_chernoff_check(V, ProductMeasure.uniform(60), [2, 5, 10, 20], trials=100_000, seed=1)
    print("vector Chernoff, n=60 (threshold, empirical, bound):")
    for row in rep.rows():
        print("  %5.1f  %.5f  %.3f" % row)

    B = random_bipartite(200, 200, 0.5, seed=2)
    res = dependent_random_choice(B, 4, seed=3)
    print(f"\ndependent random choice on G(200, 200, 1/2), t=4: kept {len(res.U)} vertices "
          f"(target {res.target_size:.1f}) after {res.attempts} draw(s); "
          f"all pairs share >= {res.threshold:.1f} neighbours: {res.verify(B)}")

    C5 = cycle_graph(5)
    print(f"\nindependence numbers: C5 = {independence_number(C5)}, "
          f"strong C5xC5 = {independence_number(product_graph(C5, C5, 'strong'))}, "
          f"tensor C5xC5 = {independence_number(product_graph(C5, C5, 'tensor'))}")

    n = 12
    z = kalai_target(n)
    X = fibre_matrix(V.restrict(range(n)), z)
    mu = solve_maxent(VectorArray.kalai(n), z).measure
    nu = np.full(len(X), 1 / len(X))
    print(f"\ncontiguity on a fibre of {len(X)} sets (max-entropy measure vs uniform on the fibre):")
    for row in contiguity_exponent(mu, nu, X, [0.01, 0.1]):
        print(f"  eps={row.eps}: mass {row.mass:.3g}, reverse mass {row.reverse_mass:.3g}")

    rng = np.random.default_rng(4)
    bad = 0
    for _ in range(300):
        q = random_bounded_pair_measure(10, 0.05, rng)
        bad += not correlation_check(q, Subcube.random(10, rng), Subcube.random(10, rng)).holds
    print(f"\nCauchy-Schwarz on 300 random subcube pairs (exact): {bad} violations")


if __name__ == "__main__":
    main()
