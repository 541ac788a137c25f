"""Checkers and constructors for the structural hypotheses on arrays.

Covers robust generation (signed sums of few entry differences avoiding a
forbidden set), generating sets for ``Z^D``, robust genericity (large
determinants inside every large coordinate set), transfers in pair-alphabet
arrays, and (universal) VC dimension of word families.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from .measures import VectorArray, r_norm


# --------------------------------------------------------------------------
# generating sets


@dataclass(frozen=True)
class GeneratingSet:
    vectors: tuple
    base: int
    scaling: tuple

    def __len__(self) -> int:
        return len(self.vectors)

    def represent(self, v) -> dict:
        """Integer coefficients ``c_u`` with ``v = sum_u c_u u``.

        Per axis: the quotient by ``R_d`` goes on the ``R_d`` vector and the
        remainder is written in base ``b`` on the powers ``b^a <= R_d``.
        """
        v = [int(x) for x in v]
        coeffs = {u: 0 for u in self.vectors}
        for d, vd in enumerate(v):
            Rd = int(self.scaling[d])
            sign = -1 if vd < 0 else 1
            q, r = divmod(abs(vd), Rd)
            axis = [u for u in self.vectors if u[d] != 0]
            top = _axis(d, len(v), Rd)
            coeffs[top] += sign * q
            powers = sorted((u for u in axis if u != top), key=lambda u: -u[d])
            for u in powers:
                c, r = divmod(r, u[d])
                coeffs[u] += sign * c
            if r:
                raise AssertionError("remainder left after base expansion")
        return coeffs

    def coefficient_bound(self, v) -> float:
        """The ``k ||v||_R + B`` bound with ``k = 1`` and ``B = base``."""
        return r_norm(v, self.scaling) + self.base


def _axis(d: int, D: int, value: int) -> tuple:
    u = [0] * D
    u[d] = value
    return tuple(u)


def construct_generating_set(beta: float, n: int, R: Sequence[float], C: float, D: int | None = None) -> GeneratingSet:
    """Axis vectors ``R_d e_d`` and ``b^a e_d <= R_d e_d`` with ``b = floor(beta n / (C D))``."""
    R = [int(round(r)) for r in R]
    D = len(R) if D is None else D
    if len(R) != D:
        raise ValueError("R must have D components")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if any(r < 1 for r in R):
        raise ValueError("scaling must be a positive integer vector")
    if max(R) >= n ** C:
        raise ValueError("need max R_d < n^C")
    b = int(math.floor(beta * n / (C * D)))
    if b < 2:
        raise ValueError(f"base floor(beta n / CD) = {b} is too small; increase n or beta")
    vecs = []
    for d, Rd in enumerate(R):
        p = 1
        while p <= Rd:
            vecs.append(_axis(d, D, p))
            p *= b
        if _axis(d, D, Rd) not in vecs:
            vecs.append(_axis(d, D, Rd))
    return GeneratingSet(tuple(vecs), b, tuple(R))


# --------------------------------------------------------------------------
# generation witnesses


@dataclass(frozen=True)
class GenerationWitness:
    """``target = sum_i (v[i][j_i] - v[i][j'_i])`` over ``terms = ((i, j_i, j'_i), ...)``."""

    target: tuple
    terms: tuple

    @property
    def S(self) -> tuple:
        return tuple(sorted(i for i, j, jp in self.terms if (j, jp) == (1, 0)))

    @property
    def S_prime(self) -> tuple:
        return tuple(sorted(i for i, j, jp in self.terms if (j, jp) == (0, 1)))

    @property
    def indices(self) -> tuple:
        return tuple(sorted(i for i, _, _ in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def verify(self, V: VectorArray, T: Iterable[int] = ()) -> bool:
        idx = [i for i, _, _ in self.terms]
        if len(set(idx)) != len(idx) or set(idx) & set(T):
            return False
        total = np.zeros(V.D, dtype=np.int64)
        for i, j, jp in self.terms:
            total += V.vectors[i, j] - V.vectors[i, jp]
        return tuple(int(x) for x in total) == tuple(self.target)


class SearchBudgetExceeded(RuntimeError):
    pass


def _kalai_witness(n: int, v: tuple, T: set) -> tuple | None:
    """Signed index terms for the Kalai array (0-based coordinates, value ``i+1``)."""
    a, b = v
    free = [i for i in range(1, n + 1) if i not in T]
    fs = set(free)
    if a < 0:
        w = _kalai_witness(n, (-a, -b), T)
        return None if w is None else tuple((i, jp, j) for i, j, jp in w)
    if a == 0 and b == 0:
        return ()
    if a == 0:
        c = abs(b)
        for i2 in free:
            i1 = i2 + c
            if i1 in fs:
                hi, lo = (i1, i2) if b > 0 else (i2, i1)
                return ((hi - 1, 1, 0), (lo - 1, 0, 1))
        # two pairs: i1 + i2 - j1 - j2 = b
        for i1 in free:
            for j1 in free:
                if j1 == i1:
                    continue
                rest = b - (i1 - j1)
                for j2 in free:
                    i2 = rest + j2
                    if i2 in fs and len({i1, i2, j1, j2}) == 4:
                        return ((i1 - 1, 1, 0), (i2 - 1, 1, 0), (j1 - 1, 0, 1), (j2 - 1, 0, 1))
        return None
    if a == 1:
        if b in fs:
            return ((b - 1, 1, 0),)
        # i1 + i2 - i3 = b
        for i3 in free:
            for i1 in free:
                i2 = b + i3 - i1
                if i2 in fs and len({i1, i2, i3}) == 3 and i1 < i2:
                    return ((i1 - 1, 1, 0), (i2 - 1, 1, 0), (i3 - 1, 0, 1))
        return None
    return None


def _difference_terms(V: VectorArray, allowed: Sequence[int]):
    """All single-coordinate moves ``(i, j, j')`` with their nonzero value."""
    out = []
    for i in allowed:
        for j in range(V.J):
            for jp in range(V.J):
                if j != jp:
                    d = V.vectors[i, j] - V.vectors[i, jp]
                    if np.any(d):
                        out.append((i, j, jp, tuple(int(x) for x in d)))
    return out


def _mitm(V: VectorArray, v: tuple, T: set, k: int, budget: int, per_key: int = 6):
    allowed = [i for i in range(V.n) if i not in T]
    moves = _difference_terms(V, allowed)
    zero = (0,) * V.D
    if v == zero:
        return ()
    half = (k + 1) // 2
    # tables[s][sum] -> list of term tuples of size s with distinct coordinates
    tables = [{zero: [()]}]
    size = 1
    for s in range(1, half + 1):
        prev = tables[-1]
        cur: dict = defaultdict(list)
        for total, combos in prev.items():
            for combo in combos:
                last = combo[-1][0] if combo else -1
                used = {c[0] for c in combo}
                for (i, j, jp, d) in moves:
                    if i <= last or i in used:
                        continue
                    key = tuple(a + b for a, b in zip(total, d))
                    bucket = cur[key]
                    if len(bucket) < per_key:
                        bucket.append(combo + ((i, j, jp),))
                        size += 1
                        if size > budget:
                            raise SearchBudgetExceeded(f"meet-in-the-middle table exceeded {budget} entries")
        tables.append(dict(cur))
    for total_size in range(1, k + 1):
        s1 = min((total_size + 1) // 2, half)
        s2 = total_size - s1
        if s2 > half:
            continue
        for total, combos in tables[s2].items():
            need = tuple(a - b for a, b in zip(v, total))
            for left in tables[s1].get(need, ()):
                li = {c[0] for c in left}
                for right in combos:
                    if not li & {c[0] for c in right}:
                        return left + right
    return None


def find_generation_witness(V: VectorArray, v, T: Iterable[int] = (), k: int = 7,
                            budget: int = 2_000_000) -> GenerationWitness | None:
    """A signed sum of at most ``k`` entry differences equal to ``v`` avoiding ``T`` (0-based)."""
    v = tuple(int(x) for x in np.asarray(v).reshape(-1))
    if len(v) != V.D:
        raise ValueError("target dimension mismatch")
    if r_norm(v, V.scaling) > 1 + 1e-12:
        raise ValueError(f"target {v} has R-norm above 1")
    T = set(int(t) for t in T)
    terms = None
    if V.is_kalai():
        terms = _kalai_witness(V.n, v, {t + 1 for t in T})
        if terms is not None and len(terms) > k:
            terms = None
    if terms is None:
        terms = _mitm(V, v, T, k, budget)
    if terms is None:
        return None
    w = GenerationWitness(v, tuple(sorted(terms)))
    if not w.verify(V, T):
        raise AssertionError("witness failed exact re-verification")
    return w


@dataclass
class GeneratingReport:
    passed: bool
    mode: str
    gamma: float
    k: int
    targets_checked: int
    forbidden_sets_checked: int
    failures: list = field(default_factory=list)
    max_witness_size: int = 0


def unit_ball(R: Sequence[float]) -> list[tuple]:
    """All integer vectors with ``||v||_R <= 1``."""
    ranges = [range(-int(math.floor(r)), int(math.floor(r)) + 1) for r in R]
    return [tuple(v) for v in product(*ranges)]


def check_robust_generating(V: VectorArray, gamma: float, k: int, targets=None,
                            exhaustive: bool | None = None, random_sets: int = 4,
                            seed: int = 0, budget: int = 2_000_000) -> GeneratingReport:
    """Check robust generation on a set of targets.

    Forbidden sets ``T`` (|T| <= gamma n) are enumerated when there are few
    of them; otherwise each target faces an adaptive adversary that keeps
    forbidding the coordinates of the last witness, plus ``random_sets``
    random forbidden sets.
    """
    rng = np.random.default_rng(seed)
    tmax = int(math.floor(gamma * V.n + 1e-12))
    targets = unit_ball(V.scaling) if targets is None else [tuple(int(x) for x in t) for t in targets]
    n_sets = sum(math.comb(V.n, s) for s in range(tmax + 1))
    if exhaustive is None:
        exhaustive = n_sets * len(targets) <= 20_000
    report = GeneratingReport(True, "exhaustive" if exhaustive else "adversarial", gamma, k, len(targets), 0)

    def attempt(v, T):
        report.forbidden_sets_checked += 1
        w = find_generation_witness(V, v, T, k, budget)
        if w is None:
            report.passed = False
            report.failures.append((v, tuple(sorted(T))))
        else:
            report.max_witness_size = max(report.max_witness_size, len(w))
        return w

    for v in targets:
        if exhaustive:
            for s in range(tmax + 1):
                for T in combinations(range(V.n), s):
                    attempt(v, set(T))
            continue
        T: set = set()
        while True:
            w = attempt(v, T)
            if w is None or len(T) >= tmax:
                break
            add = [i for i in w.indices if i not in T][: tmax - len(T)]
            if not add:
                break
            T |= set(add)
        for _ in range(random_sets):
            T = set(rng.choice(V.n, size=tmax, replace=False).tolist()) if tmax else set()
            attempt(v, T)
    return report


# --------------------------------------------------------------------------
# genericity


@dataclass
class GenericReport:
    passed: bool
    mode: str
    gamma: float
    gamma_prime: float
    largest_nongeneric: int
    violating_set: tuple | None
    witness: tuple | None = None
    coefficients: tuple | None = None


def _candidate_vectors(V: VectorArray, alphabet_form: bool) -> list[np.ndarray]:
    if V.is_binary and not alphabet_form:
        return [V.binary_vectors[i][None, :].astype(float) for i in range(V.n)]
    out = []
    for i in range(V.n):
        diffs = {tuple(V.vectors[i, j] - V.vectors[i, jp]) for j in range(V.J) for jp in range(V.J) if j < jp}
        out.append(np.array(sorted(diffs), dtype=float).reshape(-1, V.D))
    return out


def _generic_choice(cands, I, thresh):
    """A choice of one candidate per index in ``I`` with ``|det| >= thresh``."""
    for pick in product(*(range(len(cands[i])) for i in I)):
        W = np.stack([cands[i][p] for i, p in zip(I, pick)])
        if abs(np.linalg.det(W)) >= thresh * (1 - 1e-12):
            return pick
    return None


def _max_nongeneric_exact(n, D, is_generic, time_budget=2_000_000):
    """Largest ``X`` with no generic ``D``-subset, by include/exclude branch and bound."""
    best: list = []
    calls = 0

    def rec(i, X):
        nonlocal best, calls
        calls += 1
        if calls > time_budget:
            raise SearchBudgetExceeded("genericity search budget exceeded")
        if len(X) + (n - i) <= len(best):
            return
        if i == n:
            best = list(X)
            return
        if len(X) < D - 1 or not any(is_generic(tuple(sorted(c + (i,)))) for c in combinations(X, D - 1)):
            X.append(i)
            rec(i + 1, X)
            X.pop()
        rec(i + 1, X)

    rec(0, [])
    return best


def check_generic(V: VectorArray, gamma: float, gamma_prime: float,
                  alphabet_form: bool = False, exact_limit: int = 22) -> GenericReport:
    """Robust genericity: every ``X`` with ``|X| > gamma' n`` contains a generic ``D``-set.

    Computes the largest coordinate set with no generic ``D``-subset.  The
    Kalai array uses the closed form (a window of ``ceil(gamma n)`` consecutive
    indices); ``D = 1`` and ``D = 2`` are exact; higher ``D`` is exact for
    ``n <= exact_limit`` and a greedy heuristic otherwise.  In alphabet form
    the coefficients are restricted to single letter differences.
    """
    thresh = gamma * float(np.prod(V.scaling))
    n, D = V.n, V.D
    limit = gamma_prime * n
    cands = _candidate_vectors(V, alphabet_form)
    cache: dict = {}

    def is_generic(I):
        if I not in cache:
            cache[I] = _generic_choice(cands, I, thresh)
        return cache[I] is not None

    if V.is_kalai() and not alphabet_form:
        # |det((1,i),(1,i'))| = |i - i'| >= gamma n is the edge relation
        width = int(math.ceil(gamma * n - 1e-12))
        width = min(max(width, 1), n)
        X = tuple(range(width))
        mode = "closed-form"
        best = list(X)
    elif D == 1:
        best = [i for i in range(n) if not is_generic((i,))]
        mode = "exact"
    elif D == 2:
        from .probkit import independence_number

        adj = np.zeros((n, n), dtype=bool)
        for i, j in combinations(range(n), 2):
            adj[i, j] = adj[j, i] = is_generic((i, j))
        res = independence_number(adj, return_set=True)
        best = list(res.vertices)
        mode = "exact" if res.exact else "lower-bound"
    elif n <= exact_limit:
        best = _max_nongeneric_exact(n, D, is_generic)
        mode = "exact"
    else:
        best = []
        for i in range(n):
            if len(best) < D - 1 or not any(is_generic(tuple(sorted(c + (i,)))) for c in combinations(best, D - 1)):
                best.append(i)
        mode = "heuristic"
    passed = len(best) <= limit
    witness = coeffs = None
    if passed and n > limit:
        # exhibit a generic D-set inside a set just above the threshold
        for I in combinations(range(n), D):
            if is_generic(I):
                witness = I
                pick = cache[I]
                coeffs = tuple(tuple(cands[i][p].tolist()) for i, p in zip(I, pick))
                break
    return GenericReport(passed, mode, gamma, gamma_prime, len(best),
                         None if passed else tuple(best), witness, coeffs)


# --------------------------------------------------------------------------
# transfers


@dataclass(frozen=True)
class TransferTable:
    U: tuple
    blocks: tuple
    witnesses: dict
    candidates: tuple

    @property
    def min_block(self) -> int:
        return min((len(b) for b in self.blocks), default=0)

    def gamma(self, n: int) -> float:
        return self.min_block / n

    def verify(self, V: VectorArray) -> bool:
        for m, block in enumerate(self.blocks):
            u = np.asarray(self.U[m])
            for i in block:
                j, jp, l, lp = self.witnesses[(m, i)]
                a = _pair_entry(V, i, j, l) - _pair_entry(V, i, jp, l)
                b = _pair_entry(V, i, jp, lp) - _pair_entry(V, i, j, lp)
                if not (np.array_equal(a, u) and not np.any(b)):
                    return False
        seen = [i for b in self.blocks for i in b]
        return len(seen) == len(set(seen))


def _factor(V: VectorArray):
    if not all(isinstance(a, tuple) and len(a) == 2 for a in V.alphabet):
        raise ValueError("transfers need an alphabet of pairs (j, l)")
    J = sorted({a[0] for a in V.alphabet})
    L = sorted({a[1] for a in V.alphabet})
    return J, L


def _pair_entry(V, i, j, l):
    return V.vectors[i, V.alphabet.index((j, l))]


def is_transfer(V: VectorArray, i: int, u) -> tuple | None:
    """A witness ``(j, j', l, l')`` that ``u`` is an ``i``-transfer, or ``None``."""
    J, L = _factor(V)
    u = np.asarray(u, dtype=np.int64)
    letters = set(V.alphabet)
    for j, jp in product(J, J):
        for l, lp in product(L, L):
            if not {(j, l), (jp, l), (jp, lp), (j, lp)} <= letters:
                continue
            if (np.array_equal(_pair_entry(V, i, j, l) - _pair_entry(V, i, jp, l), u)
                    and np.array_equal(_pair_entry(V, i, jp, lp), _pair_entry(V, i, j, lp))):
                return (j, jp, l, lp)
    return None


def find_transfers(V: VectorArray, U: Sequence) -> TransferTable:
    """Greedy disjoint blocks ``P_m`` of coordinates where ``u_m`` is a transfer.

    The smallest block is grown first; among its candidates the coordinate
    usable by the fewest other vectors is taken (ties by index).
    """
    U = tuple(tuple(int(x) for x in u) for u in U)
    wit = {}
    cand = []
    for m, u in enumerate(U):
        cm = []
        for i in range(V.n):
            w = is_transfer(V, i, u)
            if w is not None:
                wit[(m, i)] = w
                cm.append(i)
        cand.append(cm)
    uses = defaultdict(int)
    for cm in cand:
        for i in cm:
            uses[i] += 1
    blocks = [[] for _ in U]
    taken: set = set()
    active = set(range(len(U)))
    while active:
        m = min(active, key=lambda mm: (len(blocks[mm]), mm))
        free = [i for i in cand[m] if i not in taken]
        if not free:
            active.discard(m)
            continue
        i = min(free, key=lambda ii: (uses[ii], ii))
        blocks[m].append(i)
        taken.add(i)
    return TransferTable(U, tuple(tuple(sorted(b)) for b in blocks),
                         {k: v for k, v in wit.items() if k[1] in blocks[k[0]]},
                         tuple(tuple(c) for c in cand))


def intersection_array(V: VectorArray) -> VectorArray:
    """Pair-alphabet array with entry ``j l v_i`` (the intersection block of the tilde array)."""
    from .measures import PAIR_ALPHABET

    vs = V.binary_vectors
    vec = np.zeros((V.n, 4, V.D), dtype=np.int64)
    for k, (j, l) in enumerate(PAIR_ALPHABET):
        vec[:, k, :] = j * l * vs
    return VectorArray(vec, V.scaling, PAIR_ALPHABET)


def pattern_transfer_array(s: int, t: int, n: int) -> VectorArray:
    """Array over ``[s] x [t]`` with ``e_{j1,j2}`` on inner cells and 0 on the last row/column."""
    alphabet = tuple(product(range(s), range(t)))
    D = (s - 1) * (t - 1)
    vec = np.zeros((n, s * t, D), dtype=np.int64)
    for k, (a, b) in enumerate(alphabet):
        if a < s - 1 and b < t - 1:
            vec[:, k, a * (t - 1) + b] = 1
    return VectorArray(vec, np.ones(D), alphabet)


# --------------------------------------------------------------------------
# VC dimension


class VCBudgetExceeded(RuntimeError):
    pass


def _as_family(A, J: int | None):
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        return A.reshape(0, A.shape[-1] if A.ndim == 2 else 0), (J or 2)
    if A.ndim != 2:
        raise ValueError("family must be a 2-D array of words")
    A = np.unique(A, axis=0)
    J = int(A.max()) + 1 if J is None else J
    return A, max(J, 2)


def _shattered(A: np.ndarray, X: Sequence[int], J: int) -> bool:
    if len(X) == 0:
        return len(A) > 0
    need = J ** len(X)
    if len(A) < need:
        return False
    codes = A[:, list(X)] @ (J ** np.arange(len(X), dtype=np.int64))
    return len(np.unique(codes)) == need


def shatters(A, X: Sequence[int], J: int | None = None) -> bool:
    """Whether every pattern in ``J^X`` appears among the words of ``A`` restricted to ``X``."""
    A, J = _as_family(A, J)
    return _shattered(A, tuple(X), J)


def _levels(A, J, budget):
    """Yield ``(k, shattered k-sets)`` ascending; apriori pruning on subsets."""
    n = A.shape[1]
    level = [()] if len(A) else []
    k = 0
    checks = 0
    yield 0, level, math.comb(n, 0)
    cap = int(math.floor(math.log(len(A), J) + 1e-12)) if len(A) else 0  # Sauer-Shelah style bound
    while level and k < min(n, cap):
        k += 1
        prev = set(level)
        cands = set()
        for S in level:
            start = S[-1] + 1 if S else 0
            for x in range(start, n):
                T = S + (x,)
                if all(T[:r] + T[r + 1:] in prev for r in range(len(T))):
                    cands.add(T)
        nxt = []
        for T in sorted(cands):
            checks += 1
            if checks > budget:
                raise VCBudgetExceeded(f"more than {budget} subset checks")
            if _shattered(A, T, J):
                nxt.append(T)
        yield k, nxt, math.comb(n, k)
        level = nxt


def vc_dim(A, J: int | None = None, budget: int = 5_000_000) -> int:
    """Largest size of a coordinate set shattered by the family (0 for an empty family)."""
    A, J = _as_family(A, J)
    if len(A) == 0:
        return 0
    best = 0
    for k, level, _ in _levels(A, J, budget):
        if level:
            best = k
    return best


def uvc_dim(A, J: int | None = None, budget: int = 5_000_000) -> int:
    """Largest ``k`` such that every ``k``-subset of coordinates is shattered."""
    A, J = _as_family(A, J)
    if len(A) == 0:
        return 0
    best = 0
    for k, level, total in _levels(A, J, budget):
        if len(level) == total:
            best = k
        else:
            break
    return best
