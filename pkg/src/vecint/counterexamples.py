"""Desk-scale constructions of the two Kalai-conjecture counterexamples and the VC obstruction.

All verdicts rest on exhaustive integer pair scans over enumerated fibres.
Sets are subsets of ``{1, ..., n}``; word coordinate ``i`` stands for element
``i + 1``.  Asymptotic density statements are reported as raw ratios only.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .exactcount import FibreTooLarge, fibre_matrix
from .measures import VectorArray
from .structures import uvc_dim, vc_dim

VERIFIED = "verified"
VACUOUS = "vacuous"
FAILED = "failed"

FIBRE_CAP = 200_000


@dataclass
class CounterexampleReport:
    name: str
    params: dict
    fibre_size: int
    family_size: int
    pairs_in_family: int
    checks: dict
    verdict: str
    notes: list = field(default_factory=list)

    @property
    def density(self) -> float:
        return self.family_size / self.fibre_size if self.fibre_size else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["density"] = self.density
        return d


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # 2/21 as a float sits just below 2/21; snap to the nearest simple rational
        return Fraction(x).limit_denominator(10 ** 6)
    return Fraction(str(x))


def _floor(x: Fraction) -> int:
    return math.floor(x)


def _pair_stats(X: np.ndarray):
    """Intersection sizes and element sums for all ordered pairs of rows."""
    Xi = X.astype(np.int64)
    elems = np.arange(1, X.shape[1] + 1, dtype=np.int64)
    size = Xi @ Xi.T
    total = (Xi * elems) @ Xi.T
    return size, total


def _intersecting(X: np.ndarray, t: int, w: int) -> np.ndarray:
    """Ordered index pairs ``(a, b)``, ``a != b``, with ``(|A cap B|, sum(A cap B)) = (t, w)``."""
    if len(X) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    size, total = _pair_stats(X)
    hit = (size == t) & (total == w)
    np.fill_diagonal(hit, False)
    return np.argwhere(hit)


def _recheck_pair(a, b, t: int, w: int) -> bool:
    common = [i + 1 for i in range(len(a)) if a[i] and b[i]]
    return len(common) == t and sum(common) == w


def _fibre(n: int, k: int, s: int) -> np.ndarray:
    return fibre_matrix(VectorArray.kalai(n), (k, s), cap=FIBRE_CAP)


# --------------------------------------------------------------------------
# counterexample 1


def ce1_parameters(n: int, zeta) -> dict:
    z = _frac(zeta)
    N2 = math.comb(n, 2)
    return {
        "n": n, "zeta": float(z),
        "k": _floor(Fraction(n, 2)), "s": _floor(Fraction(7, 16) * N2),
        "t": _floor(Fraction(n, 4)), "w": _floor((Fraction(1, 16) + z) * N2),
    }


def build_and_verify_ce1(n: int, zeta, kappa: float | None = None) -> CounterexampleReport:
    """Counterexample 1: ``alpha = (1/2, 7/16)``, ``beta = (1/4, 1/16 + zeta)``.

    Every ``(t, w)``-intersecting pair of the fibre is checked against the
    lower bound on ``l = |A cap B cap [n/4]|``; ``E`` collects sets with at
    least ``(1 - kappa/2) n/4`` elements in ``[n/4]`` and ``A = fibre \\ E``
    must contain no intersecting pair, which the scan certifies directly.
    ``kappa`` defaults to ``4 sqrt(zeta)``.  The bound on ``l`` alone forces
    every intersecting set into ``E`` only once ``kappa >= 8 sqrt(zeta)``; the
    report records whether that implication is available.
    """
    z = _frac(zeta)
    if not 0 < z < Fraction(1, 16):
        raise ValueError("zeta must lie in (0, 1/16)")
    if n > 24:
        raise FibreTooLarge("counterexample 1 is enumerated only for n <= 24")
    p = ce1_parameters(n, z)
    kappa = 4 * math.sqrt(float(z)) if kappa is None else float(kappa)
    p["kappa"] = kappa
    k, s, t, w = p["k"], p["s"], p["t"], p["w"]
    quarter = n // 4
    X = _fibre(n, k, s)
    notes = []
    if n % 4:
        notes.append("n is not a multiple of 4; [n/4] is taken as {1..floor(n/4)}")

    pairs = _intersecting(X, t, w)
    ell_bound = n / 4 - math.sqrt(float(z)) * n
    ells = [int(np.sum(X[a, :quarter] * X[b, :quarter])) for a, b in pairs]
    ell_ok = all(e >= ell_bound - 1e-12 for e in ells)
    recheck = all(_recheck_pair(X[a], X[b], t, w) for a, b in pairs)

    e_cut = math.ceil((1 - kappa / 2) * n / 4 - 1e-12)
    in_E = X[:, :quarter].sum(axis=1) >= e_cut if len(X) else np.zeros(0, bool)
    A = X[~in_E]
    inside = _intersecting(A, t, w)
    involved = np.unique(pairs.reshape(-1)) if len(pairs) else np.zeros(0, dtype=np.int64)
    involved_in_E = bool(np.all(in_E[involved])) if len(involved) else True

    checks = {
        "pairs_in_fibre": int(len(pairs)),
        "sets_involved": int(len(involved)),
        "ell_bound": ell_bound,
        "ell_min": min(ells) if ells else None,
        "ell_bound_holds": ell_ok,
        "pairs_recheck": recheck,
        "E_threshold": e_cut,
        "E_size": int(in_E.sum()),
        "involved_sets_in_E": involved_in_E,
        "ell_bound_implies_E": e_cut <= math.ceil(ell_bound - 1e-12),
    }
    if len(pairs) == 0:
        notes.append("the fibre has no (t, w)-intersecting pair at this size; the check is vacuous")
    ok = len(inside) == 0 and ell_ok and recheck
    verdict = FAILED if not ok else (VACUOUS if len(pairs) == 0 else VERIFIED)
    return CounterexampleReport("ce1", p, len(X), len(A), int(len(inside)), checks, verdict, notes)


# --------------------------------------------------------------------------
# counterexample 2


def ce2_parameters(n: int, zeta) -> dict:
    z = _frac(zeta)
    N2 = math.comb(n, 2)
    third = Fraction(1, 3) + z
    return {
        "n": n, "zeta": float(z),
        "k": _floor(Fraction(2 * n, 3)), "s": _floor(Fraction(2, 3) * N2),
        "t": _floor(third * n), "w": _floor(third * N2),
        "U_size": _floor(2 * z * n + Fraction(1, 10 ** 9)) + 1,
    }


def _avoiding(X: np.ndarray, U) -> np.ndarray:
    if len(U) == 0:
        return np.ones(len(X), dtype=bool)
    return X[:, list(U)].sum(axis=1) == 0


def build_and_verify_ce2(n: int, zeta, seed: int = 0, draws: int = 64,
                         U: tuple | None = None) -> CounterexampleReport:
    """Counterexample 2: ``alpha = (2/3, 2/3)``, ``beta = (1/3 + zeta, 1/3 + zeta)``.

    ``A_U`` keeps fibre sets disjoint from ``U``; two such sets share at least
    ``2k - (n - |U|)`` elements, which exceeds ``t``.  ``U`` is the best of
    ``draws`` seeded random choices unless given as elements of ``[n]``.
    """
    z = _frac(zeta)
    if z <= 0:
        raise ValueError("zeta must be positive")
    if n > 24:
        raise FibreTooLarge("counterexample 2 is enumerated only for n <= 24")
    p = ce2_parameters(n, z)
    k, s, t, w, u = p["k"], p["s"], p["t"], p["w"], p["U_size"]
    notes = []
    if n % 3:
        notes.append("n is not a multiple of 3")
    if u > Fraction(n, 3) and U is None:
        raise ValueError("need 2 zeta n + 1 <= n/3")
    X = _fibre(n, k, s)

    if U is None:
        rng = np.random.default_rng(seed)
        best, best_size = (), -1
        for _ in range(draws):
            cand = tuple(sorted(int(x) for x in rng.choice(n, size=u, replace=False)))
            size = int(_avoiding(X, cand).sum())
            if size > best_size:
                best, best_size = cand, size
        U = best
    else:
        if any(not 1 <= int(x) <= n for x in U):
            raise ValueError("U must consist of elements of [n]")
        U = tuple(sorted(int(x) - 1 for x in U))
        notes.append("U supplied by caller")
    p["U"] = [x + 1 for x in U]
    p["U_size"] = len(U)
    p["seed"] = seed

    A = X[_avoiding(X, U)]
    pigeon = 2 * k - (n - len(U))
    inside = _intersecting(A, t, w)
    witness = None
    observed_min = None
    if len(A) > 1:
        size, _ = _pair_stats(A)
        off = size[~np.eye(len(A), dtype=bool)]
        observed_min = int(off.min())
        if observed_min == pigeon:
            a, b = np.argwhere((size == pigeon) & ~np.eye(len(A), dtype=bool))[0]
            witness = [[int(i) + 1 for i in np.flatnonzero(A[a])], [int(i) + 1 for i in np.flatnonzero(A[b])]]
    full_pairs = _intersecting(X, t, w)
    multinomial = math.factorial(n) // (math.factorial(t) * math.factorial(k - t) ** 2
                                        * math.factorial(n - 2 * k + t)) if n - 2 * k + t >= 0 else 0
    checks = {
        "pigeonhole_bound": pigeon,
        "pigeonhole_exceeds_t": pigeon >= t + 1,
        "min_intersection_in_family": observed_min,
        "pigeonhole_holds": observed_min is None or observed_min >= pigeon,
        "equality_witness": witness,
        "pairs_in_fibre": int(len(full_pairs)),
        "multinomial": multinomial,
        "pairs_over_multinomial": len(full_pairs) / multinomial if multinomial else None,
        "pairs_over_3n": len(full_pairs) / 3 ** n,
    }
    if len(full_pairs) == 0:
        notes.append("the full fibre has no (t, w)-intersecting pair at this size")
    ok = len(inside) == 0 and checks["pigeonhole_holds"]
    certified = ok and checks["pigeonhole_exceeds_t"]
    verdict = VERIFIED if certified else FAILED
    return CounterexampleReport("ce2", p, len(X), len(A), int(len(inside)), checks, verdict, notes)


# --------------------------------------------------------------------------
# VC obstruction


def pair_family(n: int, k: int, t: int, exclude_one: bool = False) -> np.ndarray:
    """Ordered pairs ``(A, B)`` of ``k``-subsets with ``|A cap B| = t`` as pair-alphabet words.

    Letter ``2 a_i + b_i`` encodes coordinate ``i``; ``exclude_one`` keeps only
    sets avoiding element 1.
    """
    ground = range(1, n) if exclude_one else range(n)
    sets = [frozenset(c) for c in combinations(ground, k)]
    rows = []
    for A in sets:
        for B in sets:
            if len(A & B) == t:
                rows.append([2 * (i in A) + (i in B) for i in range(n)])
    return np.array(rows, dtype=np.int64).reshape(len(rows), n)


@dataclass
class VCReport:
    n: int
    k: int
    t: int
    family_size: int
    vc: int
    uvc: int
    missing_letter_00: bool
    restricted_size: int
    restricted_pairs: int

    def to_dict(self) -> dict:
        return asdict(self)


def vc_obstruction_family(n: int, k: int | None = None, t: int | None = None):
    """Pair family of ``t``-intersections among ``k``-subsets of ``[n]`` (default ``k = 2n/3``, ``t = n/3``).

    With the defaults every union is all of ``[n]``, so the letter ``(0, 0)``
    never occurs and no single coordinate is shattered.  The report also
    counts intersecting pairs inside the family of sets avoiding element 1.
    """
    if k is None or t is None:
        if n % 3:
            raise ValueError("default parameters need 3 | n")
        k, t = 2 * n // 3, n // 3
    if n > 18:
        raise ValueError("n <= 18 only")
    F = pair_family(n, k, t)
    restricted = [c for c in combinations(range(1, n), k)]
    R = np.zeros((len(restricted), n), dtype=np.int64)
    for r, c in enumerate(restricted):
        R[r, list(c)] = 1
    rpairs = 0
    if len(R):
        size, _ = _pair_stats(R)
        rpairs = int(((size == t) & ~np.eye(len(R), dtype=bool)).sum())
    rep = VCReport(n, k, t, len(F), vc_dim(F, J=4), uvc_dim(F, J=4),
                   bool(len(F) == 0 or not np.any(F == 0)), len(R), rpairs)
    return F, rep
