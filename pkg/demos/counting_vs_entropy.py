"""How far is log2 |fibre| from the maximum entropy, and where do pairs intersect?

Run:  python demos/counting_vs_entropy.py
"""
import math

from vecint import VectorArray
from vecint.exactcount import kalai_target, ldp_deviation, pair_histogram, popular_intersection
from vecint.kalai import beta_star


def main():
    print("Sets of size n/2 with element sum about n(n+1)/4: exact count vs max-entropy bound\n")
    print(f"{'n':>4} {'log2 count':>11} {'H(mu)':>9} {'gap':>7} {'gap/n':>7} {'3log2n+10':>10}")
    for n in (20, 40, 60, 80, 120):
        p = ldp_deviation(VectorArray.kalai(n), kalai_target(n))
        print(f"{n:>4} {p.log2_count:>11.3f} {p.entropy_bits:>9.3f} {p.deviation:>7.3f} "
              f"{p.deviation / n:>7.4f} {3 * math.log2(n) + 10:>10.2f}")
    print("\nThe gap grows only logarithmically, so the gap per coordinate shrinks.\n")

    n = 14
    z = (7, 39)
    V = VectorArray.kalai(n)
    hist = pair_histogram(V, z)
    (t, w), count = popular_intersection(V, z)
    b = beta_star(0.5, 7 / 16)
    print(f"n={n}, fibre at z={z}: {hist.fibre_size} sets, {hist.total()} ordered pairs")
    print(f"most popular (|A cap B|, sum of A cap B) = ({t}, {w}) with {count} pairs")
    print(f"continuous prediction (n b1, n(n+1)/2 b2) = ({n * b[0]:.2f}, {91 * b[1]:.2f})")
    print("\nTop five intersection targets:")
    for key, c in sorted(hist.counts.items(), key=lambda kv: -kv[1])[:5]:
        print(f"  {key}: {c}")


if __name__ == "__main__":
    main()
