"""Explore the region of quadruples (alpha, beta) where supersaturation holds.

Run:  python demos/kalai_region.py
"""
import numpy as np

from vecint.kalai import beta_star, classify, gamma_scan, h_inverse


def show(label, g):
    v = classify(g)
    fams = ", ".join(v.families) or "none"
    print(f"{label:<34} {v.verdict:<10} families: {fams:<16} distance {v.distance:.3g}")


def main():
    a = (0.5, 7 / 16)
    lam = h_inverse(*a)
    b = beta_star(*a)
    print(f"alpha = {a}: lambda = ({lam[0]:.4f}, {lam[1]:.4f}), beta* = ({b[0]:.5f}, {b[1]:.5f})\n")

    show("popular point for alpha", (*a, *b))
    show("equal-alpha, beta on the diagonal", (0.5, 0.5, 0.2, 0.2))
    show("first counterexample (zeta=0.01)", (0.5, 7 / 16, 0.25, 1 / 16 + 0.01))
    show("second counterexample (zeta=1/15)", (2 / 3, 2 / 3, 1 / 3 + 1 / 15, 1 / 3 + 1 / 15))
    show("just inside an edge", (0.4, 0.4, 0.4 - 2e-6, 0.4 - 2e-6))
    m = classify((2 / 3, 2 / 3, 1 / 3 + 1 / 15, 1 / 3 + 1 / 15)).margins["Gamma2"]
    print(f"\nThe second counterexample sits inside Gamma2 with margin {m:.3f}."
          "\nIts failure is a statement at fixed zeta about the size of the losses, not about membership.")

    rows = gamma_scan(0.05)
    excess = rows[:, 2] - rows[:, 0] ** 2
    print(f"\nscan: {len(rows)} grid points; beta1* - alpha1^2 ranges over "
          f"[{excess.min():.4f}, {excess.max():.4f}]")
    k = int(np.argmax(excess))
    print(f"largest excess at alpha = ({rows[k, 0]:.2f}, {rows[k, 1]:.2f})")


if __name__ == "__main__":
    main()
