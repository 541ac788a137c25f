"""Exact verification of the two counterexample families and the VC obstruction.

Run:  python demos/counterexamples.py
"""
from vecint.counterexamples import build_and_verify_ce1, build_and_verify_ce2, vc_obstruction_family


def report(r):
    p = r.params
    print(f"  {r.name} n={p['n']} zeta={p['zeta']:.4f}: k={p['k']} s={p['s']} t={p['t']} w={p['w']}")
    print(f"    fibre {r.fibre_size}, family {r.family_size} (density {r.density:.3f}), "
          f"pairs in family {r.pairs_in_family}, pairs in fibre {r.checks['pairs_in_fibre']} -> {r.verdict}")
    for note in r.notes:
        print(f"    note: {note}")


def main():
    print("First family: remove the sets concentrated on the first quarter.")
    for n, zeta in [(16, "0.01"), (16, "0.03"), (20, "0.02")]:
        report(build_and_verify_ce1(n, zeta))
    r = build_and_verify_ce1(16, "0.03")
    print(f"    smallest first-quarter overlap of an intersecting pair: {r.checks['ell_min']} "
          f"(bound {r.checks['ell_bound']:.2f})\n")

    print("Second family: forbid a few elements, forcing large intersections.")
    for n, zeta in [(15, "1/15"), (21, "2/21")]:
        r = build_and_verify_ce2(n, zeta)
        report(r)
        print(f"    every two sets share >= {r.checks['pigeonhole_bound']} elements, "
              f"but t = {r.params['t']}")
    print("  control without the forbidden set:")
    report(build_and_verify_ce2(21, "2/21", U=()))

    print("\nPairs of 6-subsets of [9] meeting in 3 elements, as words over {00, 01, 10, 11}:")
    _, rep = vc_obstruction_family(9)
    print(f"  {rep.family_size} pairs, vc = {rep.vc}, uvc = {rep.uvc}, letter 00 never used: "
          f"{rep.missing_letter_00}")
    print(f"  avoiding element 1: {rep.restricted_size} sets, {rep.restricted_pairs} such pairs")


if __name__ == "__main__":
    main()
