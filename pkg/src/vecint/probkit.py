"""Randomised procedures and empirical validators for the probabilistic toolkit.

Every randomised routine takes an explicit ``seed`` and records it in its
output.  Tail checks compare empirical exceedance frequencies with the
closed-form bounds; the bounds are loose at these sizes, so the comparison
carries no statistical slack.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .measures import PairMeasure, ProductMeasure, ShapeError, VectorArray, expected_array_value, r_norms


# --------------------------------------------------------------------------
# sampling


def sample(mu: ProductMeasure, seed: int | np.random.Generator = 0, size: int | None = None) -> np.ndarray:
    """Independent coordinates drawn from ``mu`` by inverse CDF.

    Returns one word (shape ``(n,)``) or ``size`` words (shape ``(size, n)``).
    """
    rng = np.random.default_rng(seed)
    m = 1 if size is None else size
    cdf = np.cumsum(mu.p, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random((m, mu.n))
    words = (u[:, :, None] >= cdf[None, :, :]).sum(axis=2)
    words = np.minimum(words, mu.J - 1)
    return words[0] if size is None else words


def array_values(V: VectorArray, words: np.ndarray) -> np.ndarray:
    """``V(a)`` for a batch of words, shape ``(m, D)``."""
    words = np.asarray(words, dtype=np.int64)
    return V.vectors[np.arange(V.n)[None, :], words].sum(axis=1)


# --------------------------------------------------------------------------
# tail bounds


@dataclass(frozen=True)
class TailReport:
    thresholds: np.ndarray
    empirical: np.ndarray
    bound: np.ndarray
    trials: int
    seed: int
    kind: str

    @property
    def holds(self) -> bool:
        return bool(np.all(self.empirical <= self.bound))

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.thresholds.tolist(), self.empirical.tolist(), self.bound.tolist()))

    def to_csv(self) -> str:
        lines = ["threshold,empirical,bound"] + [f"{t},{e},{b}" for t, e, b in self.rows()]
        return "\n".join(lines) + "\n"


def chernoff_bound(t, n: int, D: int) -> np.ndarray:
    """``2 D exp(-t^2 / 8n)``."""
    t = np.asarray(t, dtype=float)
    return 2 * D * np.exp(-t * t / (8 * n))


def lipschitz_bound(a, n: int, b: float) -> np.ndarray:
    """``2 exp(-a^2 / (2 n b^2))``."""
    a = np.asarray(a, dtype=float)
    return 2 * np.exp(-a * a / (2 * n * b * b))


def vector_chernoff_check(V: VectorArray, mu: ProductMeasure, t_grid, trials: int = 100_000,
                          seed: int = 0, batch: int = 20_000) -> TailReport:
    """Empirical ``P(||X - EX||_R >= t)`` for ``X = V(a)``, ``a ~ mu``, against the vector Chernoff bound."""
    if trials < 1000:
        raise ValueError("use at least 1000 trials")
    if not V.is_r_bounded():
        raise ValueError("the bound needs an R-bounded array")
    t_grid = np.asarray(t_grid, dtype=float)
    mean = expected_array_value(V, mu)
    rng = np.random.default_rng(seed)
    hits = np.zeros(len(t_grid), dtype=np.int64)
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        X = array_values(V, sample(mu, rng, m))
        dev = r_norms(X - mean, V.scaling)
        hits += (dev[:, None] >= t_grid[None, :]).sum(axis=0)
        done += m
    return TailReport(t_grid, hits / trials, chernoff_bound(t_grid, V.n, V.D), trials, seed, "vector-chernoff")


class LipschitzViolation(ValueError):
    """A single-coordinate change moved ``f`` by more than ``b``."""


def lipschitz_spot_check(f: Callable, b: float, mu: ProductMeasure, checks: int = 200, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    words = sample(mu, rng, checks)
    flipped = words.copy()
    idx = rng.integers(0, mu.n, size=checks)
    shift = rng.integers(1, mu.J, size=checks)
    flipped[np.arange(checks), idx] = (flipped[np.arange(checks), idx] + shift) % mu.J
    diff = np.abs(np.asarray(f(words), dtype=float) - np.asarray(f(flipped), dtype=float))
    if np.any(diff > b + 1e-12):
        k = int(np.argmax(diff))
        raise LipschitzViolation(f"|f(a) - f(a')| = {diff[k]} > b = {b} at coordinate {idx[k]}")


def lipschitz_concentration_check(f: Callable, b: float, mu: ProductMeasure, a_grid, trials: int = 100_000,
                                  seed: int = 0, mean: float | None = None, batch: int = 20_000) -> TailReport:
    """Empirical ``P(|X - EX| > a)`` for ``X = f(a)`` against ``2 exp(-a^2 / 2 n b^2)``.

    ``f`` maps a batch of words ``(m, n)`` to ``m`` values.  When ``mean`` is
    not given the sample mean stands in for ``EX``.
    """
    lipschitz_spot_check(f, b, mu, seed=seed + 1)
    a_grid = np.asarray(a_grid, dtype=float)
    rng = np.random.default_rng(seed)
    vals = []
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        vals.append(np.asarray(f(sample(mu, rng, m)), dtype=float))
        done += m
    X = np.concatenate(vals)
    centre = X.mean() if mean is None else mean
    dev = np.abs(X - centre)
    emp = (dev[:, None] > a_grid[None, :]).mean(axis=0)
    return TailReport(a_grid, emp, lipschitz_bound(a_grid, mu.n, b), trials, seed, "lipschitz")


def hamming_distance_to(family: np.ndarray) -> Callable:
    """``f(a) = min_{b in family} d_H(a, b)``, a 1-Lipschitz function."""
    family = np.asarray(family, dtype=np.int64)

    def f(words):
        words = np.asarray(words, dtype=np.int64)
        d = (words[:, None, :] != family[None, :, :]).sum(axis=2)
        return d.min(axis=1)

    return f


# --------------------------------------------------------------------------
# dependent random choice


@dataclass(frozen=True)
class DRCResult:
    U: tuple
    threshold: float
    target_size: float
    attempts: int
    sizes: tuple
    seed: int
    success: bool

    def verify(self, B: np.ndarray) -> bool:
        B = np.asarray(B, dtype=np.int64)
        U = list(self.U)
        if len(U) < 2:
            return True
        common = B[U] @ B[U].T
        return bool(np.all(common >= self.threshold - 1e-9))


class DRCBudgetExhausted(RuntimeError):
    def __init__(self, result: DRCResult):
        super().__init__(f"no set of size >= {result.target_size:.3g} after {result.attempts} attempts "
                         f"(sizes {result.sizes})")
        self.result = result


def dependent_random_choice(B, t: int, seed: int = 0, attempts: int = 32, strict: bool = True) -> DRCResult:
    """Dependent random choice on a bipartite graph with biadjacency ``B`` (``N1 x N2``).

    Draw ``t`` vertices of ``V2`` with repetition, keep their common
    neighbours in ``V1``, then delete both endpoints of every pair whose
    common neighbourhood is below ``alpha N1^{-1/t} N2``.  Retries until the
    survivors number at least ``alpha^t N1 / 2``.
    """
    B = np.asarray(B, dtype=bool)
    if t < 1:
        raise ValueError("t must be at least 1")
    N1, N2 = B.shape
    alpha = B.sum() / (N1 * N2)
    thresh = alpha * N1 ** (-1.0 / t) * N2
    target = alpha ** t * N1 / 2
    Bi = B.astype(np.int64)
    common = Bi @ Bi.T
    rng = np.random.default_rng(seed)
    sizes = []
    best: tuple = ()
    for k in range(1, attempts + 1):
        T = rng.integers(0, N2, size=t)
        A = np.flatnonzero(B[:, T].all(axis=1))
        sub = common[np.ix_(A, A)]
        bad = sub < thresh  # the diagonal catches vertices of too small degree
        keep = ~bad.any(axis=1)
        U = tuple(int(x) for x in A[keep])
        sizes.append(len(U))
        if len(U) > len(best):
            best = U
        if len(U) >= target:
            return DRCResult(U, thresh, target, k, tuple(sizes), seed, True)
    res = DRCResult(best, thresh, target, attempts, tuple(sizes), seed, False)
    if strict:
        raise DRCBudgetExhausted(res)
    return res


def random_bipartite(N1: int, N2: int, p: float, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).random((N1, N2)) < p


# --------------------------------------------------------------------------
# independence number


@dataclass(frozen=True)
class IndependenceResult:
    size: int
    vertices: tuple
    exact: bool
    nodes: int


def _as_adjacency(G) -> np.ndarray:
    A = np.asarray(G, dtype=bool)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError("adjacency must be square")
    A = A | A.T
    np.fill_diagonal(A, False)
    return A


def independence_number(G, budget: int = 5_000_000, return_set: bool = False):
    """Exact ``alpha(G)`` by branch and bound (max clique in the complement with colouring bounds).

    If the node budget runs out the best set found is returned with
    ``exact=False``.  Returns an int unless ``return_set`` is true.
    """
    A = _as_adjacency(G)
    n = len(A)
    comp = ~A
    np.fill_diagonal(comp, False)
    nbr = [sum(1 << int(j) for j in np.flatnonzero(comp[i])) for i in range(n)]
    best: list = []
    nodes = 0
    exhausted = False

    def colour_order(P: int):
        order, bounds = [], []
        colour = 0
        rest = P
        while rest:
            colour += 1
            Q = rest
            while Q:
                v = (Q & -Q).bit_length() - 1
                Q &= ~(1 << v)
                Q &= ~nbr[v]
                rest &= ~(1 << v)
                order.append(v)
                bounds.append(colour)
        return order, bounds

    def expand(R: list, P: int):
        nonlocal best, nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        order, bounds = colour_order(P)
        for v, c in zip(reversed(order), reversed(bounds)):
            if len(R) + c <= len(best) or exhausted:
                return
            R.append(v)
            NP = P & nbr[v]
            if NP:
                expand(R, NP)
            elif len(R) > len(best):
                best = list(R)
            R.pop()
            P &= ~(1 << v)

    if n:
        expand([], (1 << n) - 1)
    res = IndependenceResult(len(best), tuple(sorted(best)), not exhausted, nodes)
    return res if return_set else res.size


def cycle_graph(n: int) -> np.ndarray:
    A = np.zeros((n, n), dtype=bool)
    for i in range(n):
        A[i, (i + 1) % n] = A[(i + 1) % n, i] = True
    return A


def product_graph(G1, G2, kind: str = "tensor") -> np.ndarray:
    """Adjacency of a graph product.

    ``tensor`` joins ``(u1, u2)`` and ``(v1, v2)`` when both coordinates are
    edges; ``strong`` also allows equality in one coordinate.
    """
    A1 = _as_adjacency(G1).astype(np.int64)
    A2 = _as_adjacency(G2).astype(np.int64)
    if kind == "tensor":
        P = np.kron(A1, A2)
    elif kind == "strong":
        I1, I2 = np.eye(len(A1), dtype=np.int64), np.eye(len(A2), dtype=np.int64)
        P = np.kron(A1 + I1, A2 + I2) - np.eye(len(A1) * len(A2), dtype=np.int64)
    elif kind == "cartesian":
        P = np.kron(A1, np.eye(len(A2), dtype=np.int64)) + np.kron(np.eye(len(A1), dtype=np.int64), A2)
    else:
        raise ValueError(f"unknown product {kind!r}")
    return P > 0


# --------------------------------------------------------------------------
# exponential contiguity


@dataclass(frozen=True)
class ContiguityRow:
    eps: float
    mass: float
    exponent: float
    reverse_mass: float


def _point_probs(m, words: np.ndarray) -> np.ndarray:
    if isinstance(m, ProductMeasure):
        with np.errstate(divide="ignore"):
            return np.exp2(m.log2_probs(words))
    arr = np.asarray(m, dtype=float).reshape(-1)
    if len(arr) != len(words):
        raise ShapeError("pointwise probabilities must align with the reference words")
    return arr


def contiguity_exponent(mu, nu, words, eps_grid, max_words: int = 1 << 16) -> list[ContiguityRow]:
    """``mu(B_eps)`` for ``B_eps = {x in Delta : nu(x) < (1 - eps)^n mu(x)}``.

    ``mu`` and ``nu`` are product measures or arrays of point probabilities
    aligned with ``words`` (the reference family ``Delta``).  Each row also
    reports ``nu`` of the reverse set ``{mu(x) < (1 - eps)^n nu(x)}``.
    """
    words = np.asarray(words, dtype=np.int64)
    if len(words) > max_words:
        raise ValueError(f"reference family has {len(words)} words, limit {max_words}")
    n = words.shape[1]
    pm = _point_probs(mu, words)
    pn = _point_probs(nu, words)
    rows = []
    for eps in eps_grid:
        f = (1 - eps) ** n
        B = pn < f * pm * (1 - 1e-12)
        C = pm < f * pn * (1 - 1e-12)
        mass = float(pm[B].sum())
        exponent = math.inf if mass <= 0 else -math.log2(mass) / n
        rows.append(ContiguityRow(float(eps), mass, exponent, float(pn[C].sum())))
    return rows


# --------------------------------------------------------------------------
# correlation / Cauchy-Schwarz


@dataclass(frozen=True)
class Subcube:
    """Words agreeing with ``fixed`` (coordinate -> letter); other coordinates are free."""

    n: int
    fixed: tuple

    @classmethod
    def of(cls, n: int, fixed: dict) -> "Subcube":
        return cls(n, tuple(sorted((int(i), int(j)) for i, j in fixed.items())))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, J: int = 2, max_fixed: int | None = None) -> "Subcube":
        m = int(rng.integers(0, (n if max_fixed is None else max_fixed) + 1))
        coords = rng.choice(n, size=m, replace=False)
        return cls.of(n, {int(i): int(rng.integers(0, J)) for i in coords})

    def allowed(self, i: int, J: int) -> list[int]:
        d = dict(self.fixed)
        return [d[i]] if i in d else list(range(J))

    def words(self, J: int = 2) -> np.ndarray:
        from itertools import product as iproduct

        return np.array(list(iproduct(*(self.allowed(i, J) for i in range(self.n)))), dtype=np.int64)


def _exact(x: float) -> Fraction:
    return Fraction(float(x))


def measure_of(mu: ProductMeasure, A) -> Fraction | float:
    """``mu(A)``: exact for a :class:`Subcube`, a float sum for an explicit family."""
    if isinstance(A, Subcube):
        out = Fraction(1)
        for i in range(mu.n):
            out *= sum((_exact(mu.p[i, j]) for j in A.allowed(i, mu.J)), Fraction(0))
        return out
    words = np.asarray(A, dtype=np.int64).reshape(-1, mu.n)
    return float(np.exp2(mu.log2_probs(words)).sum()) if len(words) else 0.0


def pair_measure_of(q: PairMeasure, A1, A2) -> Fraction | float:
    """``mu_q(A1 x A2)``; factorises per coordinate when both are subcubes."""
    J1, J2 = q.q.shape[1:]
    if isinstance(A1, Subcube) and isinstance(A2, Subcube):
        out = Fraction(1)
        for i in range(q.n):
            out *= sum((_exact(q.q[i, a, b]) for a in A1.allowed(i, J1) for b in A2.allowed(i, J2)), Fraction(0))
        return out
    X = A1.words(J1) if isinstance(A1, Subcube) else np.asarray(A1, dtype=np.int64).reshape(-1, q.n)
    Y = A2.words(J2) if isinstance(A2, Subcube) else np.asarray(A2, dtype=np.int64).reshape(-1, q.n)
    if len(X) == 0 or len(Y) == 0:
        return 0.0
    idx = np.arange(q.n)
    total = 0.0
    for start in range(0, len(X), 256):
        xs = X[start:start + 256]
        probs = q.q[idx[None, None, :], xs[:, None, :], Y[None, :, :]]
        total += float(np.prod(probs, axis=2).sum())
    return total


@dataclass(frozen=True)
class CorrelationReport:
    lhs: Fraction | float
    rhs: Fraction | float
    holds: bool
    exponents: tuple


def correlation_check(q: PairMeasure, A1, A2) -> CorrelationReport:
    """``mu_q(A1 x A2)^2`` against ``mu_p1(A1) mu_p2(A2)`` (always ``<=``).

    ``exponents`` is ``(-log2 mu_p1(A1)/n, -log2 mu_q(A1 x A2)/n)``, reported for
    study rather than asserted.
    """
    joint = pair_measure_of(q, A1, A2)
    if isinstance(A1, Subcube) and isinstance(A2, Subcube):
        # marginals from the same rational cells as the joint, so the comparison is exact
        m1 = pair_measure_of(q, A1, Subcube(q.n, ()))
        m2 = pair_measure_of(q, Subcube(q.n, ()), A2)
    else:
        m1 = measure_of(q.marginal(1), A1)
        m2 = measure_of(q.marginal(2), A2)
    lhs = joint * joint
    rhs = m1 * m2
    if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
        holds = lhs <= rhs
    else:
        holds = float(lhs) <= float(rhs) * (1 + 1e-12) + 1e-300
    def ex(x):
        return math.inf if x == 0 else -math.log2(float(x)) / q.n
    return CorrelationReport(lhs, rhs, bool(holds), (ex(m1), ex(joint)))


def random_bounded_pair_measure(n: int, kappa: float, rng: np.random.Generator) -> PairMeasure:
    """A random binary coupling with every cell in ``[kappa, 1 - kappa]``."""
    raw = rng.random((n, 4)) + 1e-3
    raw = raw / raw.sum(axis=1, keepdims=True)
    q = kappa + (1 - 4 * kappa) * raw
    return PairMeasure(q.reshape(n, 2, 2))
