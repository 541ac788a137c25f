"""Exact counting and enumeration of fibres ``{a : V(a) = w}``.

Counts are Python ints throughout.  The layered dynamic programme keeps,
after each prefix of coordinates, the number of ways to reach every partial
sum that can still be completed to ``w``.  Two state stores are used: a
dense box (numpy object arrays, fast when the window of admissible partial
sums is small, e.g. the Kalai array) and a sparse dict keyed by tuples.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .measures import (
    PairMeasure,
    ProductMeasure,
    ShapeError,
    VectorArray,
    word_to_str,
)

DEFAULT_STATE_BUDGET = 10 ** 8
DENSE_BOX_LIMIT = 4 * 10 ** 6


class StateBudgetExceeded(RuntimeError):
    """The DP needed more states than allowed."""

    def __init__(self, layer: int, states: int, budget: int):
        super().__init__(f"state budget {budget} exceeded at layer {layer} ({states} states)")
        self.layer = layer
        self.states = states
        self.budget = budget


class FibreTooLarge(RuntimeError):
    """Enumeration was asked for more words than the cap allows."""


@dataclass(frozen=True)
class FibreCount:
    count: int
    conditional_marginals: tuple | None = None
    states_peak: int = 0

    @property
    def log2_count(self) -> float:
        return log2_int(self.count)

    def marginals_float(self) -> np.ndarray:
        if self.conditional_marginals is None:
            raise ValueError("marginals were not requested")
        return np.array([[float(x) for x in row] for row in self.conditional_marginals])


def log2_int(m: int) -> float:
    """``log2`` of a non-negative Python int without float overflow."""
    if m < 0:
        raise ValueError("negative count")
    if m == 0:
        return float("-inf")
    shift = max(m.bit_length() - 60, 0)
    return math.log2(m >> shift) + shift


# --------------------------------------------------------------------------
# windows of admissible partial sums


def _windows(V: VectorArray, w: np.ndarray):
    """Per-layer inclusive bounds ``lo[i], hi[i]`` on partial sums after ``i`` coordinates."""
    vec = V.vectors
    mins = vec.min(axis=1)
    maxs = vec.max(axis=1)
    n, D = V.n, V.D
    pre_lo = np.zeros((n + 1, D), dtype=np.int64)
    pre_hi = np.zeros((n + 1, D), dtype=np.int64)
    pre_lo[1:] = np.cumsum(mins, axis=0)
    pre_hi[1:] = np.cumsum(maxs, axis=0)
    suf_lo = pre_lo[-1] - pre_lo
    suf_hi = pre_hi[-1] - pre_hi
    lo = np.maximum(pre_lo, w - suf_hi)
    hi = np.minimum(pre_hi, w - suf_lo)
    return lo, hi


def _box_volume(lo, hi) -> int:
    ext = np.maximum(hi - lo + 1, 0)
    return int(np.prod(ext.astype(object)))


# --------------------------------------------------------------------------
# dense engine


def _shift_add(dst, dst_lo, src, src_lo, delta):
    """``dst[s + delta] += src[s]`` on the overlap of the two boxes."""
    src_idx, dst_idx = [], []
    for d in range(len(delta)):
        a0 = src_lo[d] + delta[d]
        start = max(a0, dst_lo[d])
        stop = min(a0 + src.shape[d], dst_lo[d] + dst.shape[d])
        if stop <= start:
            return
        src_idx.append(slice(start - a0, stop - a0))
        dst_idx.append(slice(start - dst_lo[d], stop - dst_lo[d]))
    dst[tuple(dst_idx)] += src[tuple(src_idx)]


def _dense_forward(V, lo, hi):
    layers = []
    cur = np.ones((1,) * V.D, dtype=object)
    layers.append(cur)
    for i in range(V.n):
        shape = tuple(int(x) for x in hi[i + 1] - lo[i + 1] + 1)
        nxt = np.zeros(shape, dtype=object)
        for j in range(V.J):
            _shift_add(nxt, lo[i + 1], cur, lo[i], V.vectors[i, j])
        layers.append(nxt)
        cur = nxt
    return layers


def _dense_backward(V, lo, hi):
    back = [None] * (V.n + 1)
    back[V.n] = np.ones((1,) * V.D, dtype=object)
    for i in range(V.n - 1, -1, -1):
        shape = tuple(int(x) for x in hi[i] - lo[i] + 1)
        cur = np.zeros(shape, dtype=object)
        for j in range(V.J):
            # cur[s] += back[s + v]  <=>  cur[u - v] += back[u]
            _shift_add(cur, lo[i], back[i + 1], lo[i + 1], -V.vectors[i, j])
        back[i] = cur
    return back


def _dense_marginals(V, lo, fwd, back, total):
    rows = []
    for i in range(V.n):
        row = []
        for j in range(V.J):
            tmp = np.zeros_like(back[i + 1])
            _shift_add(tmp, lo[i + 1], fwd[i], lo[i], V.vectors[i, j])
            row.append(Fraction(int((tmp * back[i + 1]).sum()), total))
        rows.append(tuple(row))
    return tuple(rows)


# --------------------------------------------------------------------------
# sparse engine


def _sparse_forward(V, lo, hi, budget, keep):
    vecs = [[tuple(int(x) for x in V.vectors[i, j]) for j in range(V.J)] for i in range(V.n)]
    cur = {(0,) * V.D: 1}
    layers = [cur] if keep else None
    peak = 1
    for i in range(V.n):
        lo_i, hi_i = tuple(lo[i + 1]), tuple(hi[i + 1])
        nxt: dict = defaultdict(int)
        for s, c in cur.items():
            for v in vecs[i]:
                t = tuple(a + b for a, b in zip(s, v))
                if all(l <= x <= h for l, x, h in zip(lo_i, t, hi_i)):
                    nxt[t] += c
        cur = dict(nxt)
        peak = max(peak, len(cur))
        if len(cur) > budget:
            raise StateBudgetExceeded(i + 1, len(cur), budget)
        if keep:
            layers.append(cur)
    return (layers if keep else [cur]), peak


def _sparse_backward(V, fwd_layers):
    """Completion counts restricted to forward-reachable states."""
    vecs = [[tuple(int(x) for x in V.vectors[i, j]) for j in range(V.J)] for i in range(V.n)]
    back = [None] * (V.n + 1)
    back[V.n] = {s: 1 for s in fwd_layers[V.n]}
    for i in range(V.n - 1, -1, -1):
        nb = back[i + 1]
        cur = {}
        for s in fwd_layers[i]:
            c = 0
            for v in vecs[i]:
                c += nb.get(tuple(a + b for a, b in zip(s, v)), 0)
            if c:
                cur[s] = c
        back[i] = cur
    return back


def _sparse_marginals(V, fwd, back, total):
    vecs = [[tuple(int(x) for x in V.vectors[i, j]) for j in range(V.J)] for i in range(V.n)]
    rows = []
    for i in range(V.n):
        acc = [0] * V.J
        nb = back[i + 1]
        for s, c in fwd[i].items():
            for j, v in enumerate(vecs[i]):
                b = nb.get(tuple(a + x for a, x in zip(s, v)), 0)
                if b:
                    acc[j] += c * b
        rows.append(tuple(Fraction(a, total) for a in acc))
    return tuple(rows)


# --------------------------------------------------------------------------
# public API


def _target(V: VectorArray, w) -> np.ndarray:
    w = np.asarray(w).reshape(-1)
    if w.shape != (V.D,):
        raise ShapeError(f"target has {w.size} components, array has D={V.D}")
    if not np.all(np.equal(np.mod(w, 1), 0)):
        raise ValueError("target must be an integer vector")
    return w.astype(np.int64)


def count_fibre(V: VectorArray, w, marginals: bool = False,
                state_budget: int = DEFAULT_STATE_BUDGET, engine: str = "auto") -> FibreCount:
    """Exact ``|{a in J^n : V(a) = w}|``, optionally with conditional marginals.

    ``engine`` is ``"dense"``, ``"sparse"`` or ``"auto"`` (dense when every
    layer's admissible box is below ``DENSE_BOX_LIMIT`` cells).
    """
    w = _target(V, w)
    lo, hi = _windows(V, w)
    if np.any(lo > hi):
        # conditional marginals are undefined on an empty fibre
        return FibreCount(0, None, 0)
    vols = [_box_volume(lo[i], hi[i]) for i in range(V.n + 1)]
    if engine == "auto":
        engine = "dense" if max(vols) <= DENSE_BOX_LIMIT else "sparse"
    if engine == "dense":
        peak = max(vols)
        if peak > state_budget:
            layer = next(i for i, v in enumerate(vols) if v > state_budget)
            raise StateBudgetExceeded(layer, peak, state_budget)
        fwd = _dense_forward(V, lo, hi)
        total = int(fwd[-1].reshape(-1)[0])
        table = None
        if marginals and total:
            back = _dense_backward(V, lo, hi)
            table = _dense_marginals(V, lo, fwd, back, total)
        return FibreCount(total, table, peak)
    if engine != "sparse":
        raise ValueError(f"unknown engine {engine!r}")
    layers, peak = _sparse_forward(V, lo, hi, state_budget, keep=marginals)
    total = layers[-1].get(tuple(int(x) for x in w), 0)
    table = None
    if marginals and total:
        back = _sparse_backward(V, layers)
        table = _sparse_marginals(V, layers, back, total)
    return FibreCount(total, table, peak)


def value_distribution(V: VectorArray) -> Counter:
    """Counts of every reachable value ``V(a)`` over all of ``J^n``."""
    cur = Counter({(0,) * V.D: 1})
    for i in range(V.n):
        nxt: Counter = Counter()
        for s, c in cur.items():
            for j in range(V.J):
                nxt[tuple(int(a + b) for a, b in zip(s, V.vectors[i, j]))] += c
        cur = nxt
    return cur


def enumerate_fibre(V: VectorArray, w, cap: int = 10 ** 6) -> list[tuple]:
    """All words with ``V(a) = w`` in lexicographic order of letter indices."""
    w = _target(V, w)
    fc = count_fibre(V, w)
    if fc.count > cap:
        raise FibreTooLarge(f"fibre has {fc.count} words, cap is {cap}")
    if fc.count == 0:
        return []
    lo, hi = _windows(V, w)
    layers, _ = _sparse_forward(V, lo, hi, DEFAULT_STATE_BUDGET, keep=True)
    back = _sparse_backward(V, layers)
    vecs = [[tuple(int(x) for x in V.vectors[i, j]) for j in range(V.J)] for i in range(V.n)]
    out: list[tuple] = []
    word: list[int] = []

    def walk(i, s):
        if i == V.n:
            out.append(tuple(word))
            return
        for j, v in enumerate(vecs[i]):
            t = tuple(a + b for a, b in zip(s, v))
            if t in back[i + 1]:
                word.append(j)
                walk(i + 1, t)
                word.pop()

    walk(0, (0,) * V.D)
    return out


def fibre_matrix(V: VectorArray, w, cap: int = 10 ** 6) -> np.ndarray:
    """The fibre as an ``(m, n)`` integer matrix (rows in lexicographic order)."""
    words = enumerate_fibre(V, w, cap)
    return np.array(words, dtype=np.int64).reshape(len(words), V.n)


# --------------------------------------------------------------------------
# intersection pairs


@dataclass(frozen=True)
class PairHistogram:
    """Ordered-pair counts of ``V_cap(a, b)`` over a fibre."""

    counts: dict
    fibre_size: int
    diagonal: bool
    window: tuple | None = None

    def total(self) -> int:
        return sum(self.counts.values())

    def rows(self) -> list[tuple]:
        return sorted((k, c) for k, c in self.counts.items())

    def to_csv(self) -> str:
        D = len(next(iter(self.counts))) if self.counts else 0
        head = ",".join(["t", "w"] if D == 2 else [f"w{d + 1}" for d in range(D)]) + ",count"
        lines = [head] + [",".join(map(str, k)) + f",{c}" for k, c in self.rows()]
        return "\n".join(lines) + "\n"


def intersection_values(V: VectorArray, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """``V_cap(x, y) = sum_{i: x_i = y_i = 1} v_i`` for all row pairs, shape ``(|X|, |Y|, D)``."""
    Y = X if Y is None else Y
    vs = V.binary_vectors
    return np.einsum("ai,bi,id->abd", X, Y, vs, optimize=True)


def pair_histogram(V: VectorArray, z, window=None, include_diagonal: bool = False,
                   cap: int = 200_000, block: int = 512) -> PairHistogram:
    """Histogram of ``V_cap`` over ordered pairs of the fibre at ``z``.

    ``window`` is an optional ``(lo, hi)`` pair of inclusive bounds on the
    recorded targets.
    """
    if not V.is_binary:
        raise ValueError("pair histograms need a binary array")
    X = fibre_matrix(V, z, cap)
    m = len(X)
    vs = V.binary_vectors
    counts: Counter = Counter()
    lo = hi = None
    if window is not None:
        lo = np.asarray(window[0], dtype=np.int64)
        hi = np.asarray(window[1], dtype=np.int64)
    for start in range(0, m, block):
        A = X[start:start + block]
        vals = np.einsum("ai,bi,id->abd", A, X, vs, optimize=True)
        keep = np.ones(vals.shape[:2], dtype=bool)
        if not include_diagonal:
            rows = np.arange(len(A))
            keep[rows, start + rows] = False
        if lo is not None:
            keep &= np.all((vals >= lo) & (vals <= hi), axis=2)
        flat = vals[keep]
        if len(flat):
            keys, cnt = np.unique(flat, axis=0, return_counts=True)
            for k, c in zip(map(tuple, keys.tolist()), cnt.tolist()):
                counts[k] += int(c)
    win = None if window is None else (tuple(lo.tolist()), tuple(hi.tolist()))
    return PairHistogram(dict(counts), m, include_diagonal, win)


class EmptyHistogram(ValueError):
    """No off-diagonal pairs to rank."""


def popular_intersection(V: VectorArray, z, **kwargs) -> tuple[tuple, int]:
    """Most frequent ``V_cap`` target; ties go to the lexicographically smallest."""
    hist = pair_histogram(V, z, **kwargs)
    if not hist.counts:
        raise EmptyHistogram("fibre has fewer than two elements")
    best = max(hist.counts.values())
    target = min(k for k, c in hist.counts.items() if c == best)
    return target, best


def count_intersecting_pairs(V: VectorArray, X: np.ndarray, w, mask=None) -> int:
    """Ordered pairs ``a != b`` among rows of ``X`` with ``V_cap(a, b) = w``."""
    if mask is not None:
        X = X[np.asarray(mask, dtype=bool)]
    w = np.asarray(w, dtype=np.int64)
    total = 0
    for start in range(0, len(X), 512):
        vals = intersection_values(V, X[start:start + 512], X)
        hit = np.all(vals == w, axis=2)
        rows = np.arange(len(vals))
        hit[rows, start + rows] = False
        total += int(hit.sum())
    return total


# --------------------------------------------------------------------------
# counting versus entropy


@dataclass(frozen=True)
class LDPPoint:
    n: int
    target: tuple
    count: int
    log2_count: float
    entropy_bits: float
    status: str

    @property
    def deviation(self) -> float:
        return self.entropy_bits - self.log2_count

    @property
    def deviation_per_n(self) -> float:
        return self.deviation / self.n


def ldp_deviation(V: VectorArray, w, tol: float = 1e-10,
                  state_budget: int = DEFAULT_STATE_BUDGET) -> LDPPoint:
    """``H(mu^V_w) - log2 |fibre|`` together with both terms."""
    from .maxent import solve_maxent

    w = _target(V, w)
    sol = solve_maxent(V, w, tol=tol)
    if not sol.ok:
        raise ValueError(f"target {tuple(w)} is infeasible for the max-entropy program")
    fc = count_fibre(V, w, state_budget=state_budget)
    if fc.count == 0:
        raise ValueError(f"fibre at {tuple(w)} is empty")
    return LDPPoint(V.n, tuple(int(x) for x in w), fc.count, fc.log2_count, sol.entropy_bits, sol.status)


def kalai_target(n: int, alpha=(0.5, 0.5)) -> tuple[int, int]:
    """``(k, s) = (floor(alpha1 n), floor(alpha2 C(n,2)))`` for the Kalai array."""
    a1 = Fraction(str(alpha[0]))
    a2 = Fraction(str(alpha[1]))
    return int(math.floor(a1 * n)), int(math.floor(a2 * math.comb(n, 2)))


# --------------------------------------------------------------------------
# intersection patterns


def _check_pattern(l, k, M) -> np.ndarray:
    M = np.asarray(M, dtype=object)
    if M.ndim != 2:
        raise ValueError("pattern must be a matrix")
    if any(int(x) != x or x < 0 for x in M.reshape(-1)):
        raise ValueError("pattern entries must be non-negative integers")
    l = [int(x) for x in l]
    k = [int(x) for x in k]
    if M.shape != (len(l), len(k)):
        raise ValueError(f"pattern has shape {M.shape}, expected {(len(l), len(k))}")
    if [int(sum(r)) for r in M] != l:
        raise ValueError("row sums of the pattern must equal l")
    if [int(sum(c)) for c in M.T] != k:
        raise ValueError("column sums of the pattern must equal k")
    if sum(l) != sum(k):
        raise ValueError("compositions have different totals")
    return M


def pattern_array(s: int, t: int, n: int) -> VectorArray:
    """Array over ``[s] x [t]`` recording both compositions and the inner cells of the pattern.

    Letter ``(j1, j2)`` carries ``e_{j1} + e_{j2} + e_{j1,j2}`` with the last
    row and column of cells dropped (they are implied by the compositions).
    """
    alphabet = tuple(product(range(s), range(t)))
    D = s + t + (s - 1) * (t - 1)
    vec = np.zeros((n, len(alphabet), D), dtype=np.int64)
    for idx, (a, b) in enumerate(alphabet):
        vec[:, idx, a] = 1
        vec[:, idx, s + b] = 1
        if a < s - 1 and b < t - 1:
            vec[:, idx, s + t + a * (t - 1) + b] = 1
    return VectorArray(vec, np.ones(D), alphabet, name=f"pattern:{s}x{t}:{n}")


def pattern_count(l: Sequence[int], k: Sequence[int], M, cross_check: bool = False) -> int:
    """Number of word pairs ``(x, y)`` with ``M[j1][j2] = #{i : x_i = j1, y_i = j2}``.

    Row sums of ``M`` are the composition ``l`` of ``x`` and column sums the
    composition ``k`` of ``y``.  The closed form is the multinomial
    ``n! / prod M!``; ``cross_check`` also runs the generic counter on
    :func:`pattern_array`.
    """
    M = _check_pattern(l, k, M)
    n = int(sum(int(x) for x in M.reshape(-1)))
    closed = math.factorial(n)
    for x in M.reshape(-1):
        closed //= math.factorial(int(x))
    if cross_check:
        s, t = M.shape
        V = pattern_array(s, t, n)
        inner = [int(M[a, b]) for a in range(s - 1) for b in range(t - 1)]
        dp = count_fibre(V, list(map(int, l)) + list(map(int, k)) + inner).count
        if dp != closed:
            raise AssertionError(f"pattern count mismatch: closed form {closed}, DP {dp}")
    return closed


def composition_count(l: Sequence[int]) -> int:
    """Words with letter composition ``l``: ``n! / prod l!``."""
    out = math.factorial(sum(l))
    for x in l:
        out //= math.factorial(x)
    return out


# --------------------------------------------------------------------------
# empirical measures


@dataclass(frozen=True)
class EmpiricalType:
    partition: tuple
    type_counts: tuple
    class_size: int
    measure: ProductMeasure


def type_partition(p1, V: VectorArray, kappa: float) -> tuple:
    """Group coordinates whose ``p_i`` and ``v_i / R`` agree to within ``kappa``."""
    p1 = np.asarray(p1, dtype=float)
    keys = np.column_stack([p1, V.binary_vectors / V.scaling])
    cells = np.floor(keys / kappa).astype(np.int64)
    groups: dict = defaultdict(list)
    for i, c in enumerate(map(tuple, cells.tolist())):
        groups[c].append(i)
    return tuple(tuple(g) for _, g in sorted(groups.items()))


def empirical_measure(V: VectorArray, w, partition: Sequence[Sequence[int]], cap: int = 10 ** 6) -> EmpiricalType:
    """Most common type ``k_m = |A cap S_m|`` over the fibre and its product measure."""
    X = fibre_matrix(V, w, cap)
    if len(X) == 0:
        raise ValueError("empty fibre")
    S = [np.asarray(s, dtype=np.int64) for s in partition]
    types = np.stack([X[:, s].sum(axis=1) for s in S], axis=1)
    keys, cnt = np.unique(types, axis=0, return_counts=True)
    best = int(np.argmax(cnt))
    k = tuple(int(x) for x in keys[best])
    p1 = np.empty(V.n)
    for s, km in zip(S, k):
        p1[s] = km / len(s)
    return EmpiricalType(tuple(tuple(s) for s in partition), k, int(cnt[best]), ProductMeasure.bernoulli(p1))


def type_coupling(partition: Sequence[Sequence[int]], k: Sequence[int], t: Sequence[int]) -> PairMeasure:
    """Coupling ``q(t)`` with ``q11 = t_m/|S_m|`` and marginals ``k_m/|S_m|`` on each class."""
    n = sum(len(s) for s in partition)
    x = np.empty(n)
    p = np.empty(n)
    for s, km, tm in zip(partition, k, t):
        idx = list(s)
        x[idx] = tm / len(s)
        p[idx] = km / len(s)
    return PairMeasure.binary(x, p)


def words_to_strings(words) -> list[str]:
    return [word_to_str(a) for a in words]
