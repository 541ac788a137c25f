"""Maximum-entropy product measures under vector-valued linear constraints.

The maximum-entropy measure with ``E V(a) = w`` is a Boltzmann product
measure ``p[i][j] ~ exp(lam . v[i][j])``.  ``solve_maxent`` finds ``lam`` by
damped Newton on the convex dual; internally each component ``d`` of the
constraint is divided by ``R_d * n`` so the residual tolerance means the
same thing for every array.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize
from scipy.special import logsumexp

from .measures import (
    PAIR_ALPHABET,
    PairMeasure,
    ProductMeasure,
    ShapeError,
    VectorArray,
    letter_entropy,
    r_norm,
)

log = logging.getLogger(__name__)

CONVERGED = "converged"
INFEASIBLE = "infeasible"
BOUNDARY = "boundary"

BOUNDARY_PROBE = 1e-6


@dataclass(frozen=True)
class MaxEntSolution:
    measure: ProductMeasure | None
    dual: np.ndarray
    entropy_bits: float
    residual: float
    status: str
    iterations: int = 0
    pair: PairMeasure | None = None

    @property
    def ok(self) -> bool:
        return self.status in (CONVERGED, BOUNDARY)

    def min_entry(self) -> float:
        """Smallest realised cell probability (a data-driven boundedness level)."""
        if self.measure is None:
            return float("nan")
        return float(self.measure.p.min())


def _scaled(V: VectorArray) -> tuple[np.ndarray, np.ndarray]:
    scale = V.scaling * V.n
    return V.vectors / scale, scale


def _boltzmann(U: np.ndarray, lam: np.ndarray, logmask: np.ndarray | None = None):
    """Per-coordinate Boltzmann weights; returns (p, sum of log partition)."""
    energy = U @ lam
    if logmask is not None:
        energy = energy + logmask
    logZ = logsumexp(energy, axis=1)
    p = np.exp(energy - logZ[:, None])
    return p, float(logZ.sum())


def log_partition(V: VectorArray, lam) -> tuple[float, np.ndarray, np.ndarray]:
    """``sum_i ln sum_j exp(lam . v[i][j])`` with its gradient and Hessian.

    The gradient is the expected array value under the Boltzmann measure and
    the Hessian its covariance, so it is positive semi-definite.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (V.D,):
        raise ShapeError(f"lam must have {V.D} components")
    vec = V.vectors.astype(float)
    p, value = _boltzmann(vec, lam)
    mean_i = np.einsum("ij,ijd->id", p, vec)
    grad = mean_i.sum(axis=0)
    second = np.einsum("ij,ijd,ije->de", p, vec, vec)
    hess = second - mean_i.T @ mean_i
    return value, grad, hess


def boltzmann_measure(V: VectorArray, lam) -> ProductMeasure:
    p, _ = _boltzmann(V.vectors.astype(float), np.asarray(lam, dtype=float))
    return ProductMeasure(p, V.alphabet)


# --------------------------------------------------------------------------
# feasibility and support via linear programming


def _lp_system(V: VectorArray, w: np.ndarray):
    n, J, D = V.vectors.shape
    scale = V.scaling * n
    nv = n * J
    A_eq = np.zeros((n + D, nv))
    for i in range(n):
        A_eq[i, i * J:(i + 1) * J] = 1.0
    A_eq[n:, :] = (V.vectors.reshape(nv, D) / scale).T
    b_eq = np.concatenate([np.ones(n), w / scale])
    return A_eq, b_eq


_LP_OPTS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def is_feasible(V: VectorArray, w) -> bool:
    """Whether some product measure has expectation exactly ``w``."""
    w = np.asarray(w, dtype=float)
    A_eq, b_eq = _lp_system(V, w)
    res = linprog(np.zeros(A_eq.shape[1]), A_eq=A_eq, b_eq=b_eq, bounds=(0, 1),
                  method="highs", options=_LP_OPTS)
    return res.status == 0


def support_mask(V: VectorArray, w, cap: float = 1e-3) -> np.ndarray:
    """Letters ``(i, j)`` that are positive in some measure with expectation ``w``.

    One LP maximising ``sum min(p, cap)`` settles most letters; the rest get
    an individual maximisation.
    """
    w = np.asarray(w, dtype=float)
    A_eq, b_eq = _lp_system(V, w)
    n, J = V.n, V.J
    nv = n * J
    # variables: p (nv) then s (nv); maximise sum s with s <= p, s <= cap
    A_ub = np.hstack([-np.eye(nv), np.eye(nv)])
    res = linprog(np.concatenate([np.zeros(nv), -np.ones(nv)]),
                  A_ub=A_ub, b_ub=np.zeros(nv),
                  A_eq=np.hstack([A_eq, np.zeros_like(A_eq)]), b_eq=b_eq,
                  bounds=[(0, 1)] * nv + [(0, cap)] * nv, method="highs", options=_LP_OPTS)
    if res.status != 0:
        raise ValueError("target is infeasible")
    s = res.x[nv:]
    mask = s >= cap * (1 - 1e-6)
    for k in np.flatnonzero(~mask):
        c = np.zeros(nv)
        c[k] = -1.0
        r = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, 1), method="highs", options=_LP_OPTS)
        if r.status == 0 and r.x[k] > 1e-9:
            mask[k] = True
    return mask.reshape(n, J)


# --------------------------------------------------------------------------
# Newton on the dual


def _newton(U, w_s, logmask=None, tol=1e-8, max_iter=200, lam0=None):
    """Minimise ``sum_i logsumexp(U_i lam) - lam . w_s``; returns (lam, p, iters, ok)."""
    D = U.shape[2]
    lam = np.zeros(D) if lam0 is None else np.array(lam0, dtype=float)

    def dual(l):
        p, a = _boltzmann(U, l, logmask)
        return a - l @ w_s, p

    f, p = dual(lam)
    for it in range(max_iter):
        mean_i = np.einsum("ij,ijd->id", p, U)
        g = mean_i.sum(axis=0) - w_s
        if np.max(np.abs(g)) <= tol:
            return lam, p, it, True
        H = np.einsum("ij,ijd,ije->de", p, U, U) - mean_i.T @ mean_i
        step = np.linalg.lstsq(H + 1e-14 * np.eye(D), -g, rcond=1e-12)[0]
        slope = g @ step
        if slope >= 0:
            step, slope = -g, -(g @ g)
        t = 1.0
        while True:
            f_new, p_new = dual(lam + t * step)
            if f_new <= f + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if t < 1e-12 and f_new > f:
            return lam, p, it, False
        lam, f, p = lam + t * step, f_new, p_new
    mean = np.einsum("ij,ijd->d", p, U)
    return lam, p, max_iter, bool(np.max(np.abs(mean - w_s)) <= tol)


def solve_maxent(V: VectorArray, w, tol: float = 1e-8, max_iter: int = 200) -> MaxEntSolution:
    """Maximum-entropy product measure on ``J^n`` with ``E V(a) = w``.

    ``status`` is ``converged`` for an interior target, ``boundary`` when the
    solution has forced zeros (the Boltzmann form then holds on the support)
    and ``infeasible`` when no product measure attains ``w``.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != (V.D,):
        raise ShapeError(f"target has {w.size} components, array has D={V.D}")
    U, scale = _scaled(V)
    w_s = w / scale

    lam, p, iters, ok = _newton(U, w_s, tol=tol, max_iter=max_iter)
    status = CONVERGED
    # a tiny cell after convergence may be a forced zero that Newton only approximates
    if not ok or p.min() < BOUNDARY_PROBE:
        if not ok and not is_feasible(V, w):
            log.debug("target %s infeasible", w)
            return MaxEntSolution(None, np.full(V.D, np.nan), float("nan"), float("inf"), INFEASIBLE, iters)
        mask = support_mask(V, w)
        if mask.all():
            log.warning("newton stalled on an interior target; residual may exceed tol")
        else:
            status = BOUNDARY
            logmask = np.where(mask, 0.0, -np.inf)
            lam, p, more, ok = _newton(U, w_s, logmask=logmask, tol=tol, max_iter=max_iter)
            iters += more
    measure = ProductMeasure(p, V.alphabet)
    resid = r_norm(np.einsum("ij,ijd->d", p, V.vectors.astype(float)) - w, V.scaling * V.n)
    return MaxEntSolution(measure, lam / scale, measure.entropy(), resid, status, iters)


def feasible_perturbation(V: VectorArray, p: ProductMeasure, d: float,
                          rng: np.random.Generator) -> tuple[ProductMeasure, float]:
    """Move a binary product measure along a random direction that keeps ``E V(a)`` fixed.

    The step is sized so that ``sum_i |p_i - p~_i| = d n`` on the probability
    of letter 1, shrunk if needed to stay inside ``[0, 1]^n``.  Returns the
    perturbed measure and the ``d`` actually achieved.
    """
    if not V.is_binary or p.J != 2:
        raise ValueError("perturbations are built for binary arrays")
    N = null_space(V.binary_vectors.T.astype(float))
    if N.shape[1] == 0:
        raise ValueError("the constraints leave no free direction")
    u = N @ rng.standard_normal(N.shape[1])
    u /= np.abs(u).sum()
    p1 = p.p1
    step = d * V.n
    room = np.full(V.n, np.inf)
    up, down = u > 0, u < 0
    room[up] = (1 - p1[up]) / u[up]
    room[down] = p1[down] / -u[down]
    step = min(step, float(room.min()))
    q1 = np.clip(p1 + step * u, 0.0, 1.0)
    return ProductMeasure.bernoulli(q1), float(np.abs(q1 - p1).sum() / V.n)


# --------------------------------------------------------------------------
# pair measures


@dataclass(frozen=True)
class TildeArray:
    """Pair-alphabet array in Z^{3D} whose fibre at ``(z, z, w)`` is the set of
    ordered pairs ``(a, b)`` with ``V(a) = V(b) = z`` and ``V_cap(a, b) = w``."""

    array: VectorArray
    target: tuple
    base: VectorArray


def tilde(V: VectorArray, z, w) -> TildeArray:
    if not V.is_binary:
        raise ValueError("tilde construction needs a binary array")
    vs = V.binary_vectors
    n, D = vs.shape
    vec = np.zeros((n, 4, 3 * D), dtype=np.int64)
    for k, (j, jp) in enumerate(PAIR_ALPHABET):
        vec[:, k, :D] = j * vs
        vec[:, k, D:2 * D] = jp * vs
        vec[:, k, 2 * D:] = j * jp * vs
    R = np.concatenate([V.scaling] * 3)
    z = tuple(int(x) for x in np.asarray(z).reshape(-1))
    w = tuple(int(x) for x in np.asarray(w).reshape(-1))
    if len(z) != D or len(w) != D:
        raise ShapeError("z and w must have D components")
    return TildeArray(VectorArray(vec, R, PAIR_ALPHABET), z + z + w, V)


def pair_word(a, b) -> tuple:
    """Encode a pair of binary words as a word over the pair alphabet."""
    return tuple(PAIR_ALPHABET.index((int(x), int(y))) for x, y in zip(a, b))


def solve_pair_maxent(V: VectorArray, z, w, tol: float = 1e-8, max_iter: int = 200) -> MaxEntSolution:
    """Maximum-entropy coupling representing ``w``-intersections inside the fibre at ``z``."""
    T = tilde(V, z, w)
    sol = solve_maxent(T.array, T.target, tol=tol, max_iter=max_iter)
    if sol.measure is None:
        return sol
    pair = PairMeasure(sol.measure.p.reshape(V.n, 2, 2))
    return MaxEntSolution(sol.measure, sol.dual, sol.entropy_bits, sol.residual,
                          sol.status, sol.iterations, pair)


def intersection_value(V: VectorArray, q: PairMeasure) -> np.ndarray:
    """``V_cap(mu_q) = sum_i q[i,1,1] v_i``."""
    return q.q[:, 1, 1] @ V.binary_vectors.astype(float)


# --------------------------------------------------------------------------
# H_max: maximum-entropy coupling with prescribed equal marginals

EMPTY = "empty"
OPTIMAL = "optimal"


@dataclass(frozen=True)
class HmaxResult:
    pair: PairMeasure | None
    h_max_bits: float
    status: str
    dual: np.ndarray
    residual: float
    iterations: int = 0


def coupling_box(p1, kappa: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Range of ``x = q11`` keeping all four cells of the coupling in ``[kappa, 1-kappa]``."""
    p1 = np.asarray(p1, dtype=float)
    lo = np.maximum.reduce([np.full_like(p1, kappa), 2 * p1 - 1 + kappa, p1 - 1 + kappa])
    hi = np.minimum.reduce([p1 - kappa, np.full_like(p1, 1 - kappa), 2 * p1 - kappa])
    return lo, hi


def coupling_entropy(x, p1) -> np.ndarray:
    """Per-coordinate entropy (bits) of the symmetric binary coupling with ``q11 = x``."""
    x = np.asarray(x, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    return letter_entropy(x) + 2 * letter_entropy(p1 - x) + letter_entropy(1 - 2 * p1 + x)


def _stationary_x(s, p1):
    """Root of ``(p - x)^2 = e^s x (1 - 2p + x)`` inside ``(max(0, 2p-1), p)``."""
    c = np.exp(np.clip(s, -700, 700))
    A = 1 - c
    B = c * (2 * p1 - 1) - 2 * p1
    C = p1 ** 2
    disc = np.maximum(B * B - 4 * A * C, 0.0)
    den = -B + np.sqrt(disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(den > 0, 2 * C / den, 0.0)
    lo0 = np.maximum(0.0, 2 * p1 - 1)
    return np.clip(x, lo0, p1)


def _hmax_feasible_point(u, w_s, lo, hi):
    res = linprog(np.zeros(len(lo)), A_eq=u.T, b_eq=w_s, bounds=list(zip(lo, hi)),
                  method="highs", options=_LP_OPTS)
    return res.x if res.status == 0 else None


def solve_hmax(p: ProductMeasure, V: VectorArray, w, kappa: float = 0.0,
               tol: float = 1e-8, max_iter: int = 200) -> HmaxResult:
    """Maximum entropy of a binary coupling with both marginals ``p`` and ``V_cap = w``.

    One free variable ``x_i = q11`` per coordinate.  Newton runs on the dual
    vector ``theta``; for a given ``theta`` each ``x_i`` solves a quadratic in
    closed form and is clamped to its box.  An empty feasible set gives
    ``H_max = 0`` with status ``empty``.
    """
    if not V.is_binary:
        raise ValueError("H_max is defined for binary arrays")
    if p.J != 2 or p.n != V.n:
        raise ShapeError("p must be a binary product measure on the same coordinates")
    if not 0 <= kappa < 0.5:
        raise ValueError("kappa must lie in [0, 1/2)")
    w = np.asarray(w, dtype=float).reshape(-1)
    p1 = p.p1
    scale = V.scaling * V.n
    u = V.binary_vectors / scale
    w_s = w / scale
    lo, hi = coupling_box(p1, kappa)
    if np.any(lo > hi + 1e-15):
        return HmaxResult(None, 0.0, EMPTY, np.full(V.D, np.nan), float("inf"))
    hi = np.maximum(hi, lo)
    x0 = _hmax_feasible_point(u, w_s, lo, hi)
    if x0 is None:
        return HmaxResult(None, 0.0, EMPTY, np.full(V.D, np.nan), float("inf"))

    free = hi - lo > 1e-15
    ln2 = np.log(2)

    def primal_x(theta):
        s = u @ theta
        xs = _stationary_x(s, p1)
        x = np.clip(xs, lo, hi)
        return np.where(free, x, lo), s

    def dual(theta):
        x, s = primal_x(theta)
        h = coupling_entropy(x, p1) * ln2
        return float(np.sum(h - s * x) + theta @ w_s), x

    theta = np.zeros(V.D)
    f, x = dual(theta)
    converged = False
    it = 0
    for it in range(max_iter):
        g = w_s - u.T @ x
        if np.max(np.abs(g)) <= tol:
            converged = True
            break
        interior = free & (x > lo + 1e-15) & (x < hi - 1e-15)
        with np.errstate(divide="ignore", invalid="ignore"):
            hpp = 2 / (p1 - x) + 1 / x + 1 / (1 - 2 * p1 + x)
        wts = np.where(interior, 1 / np.where(interior, hpp, 1.0), 0.0)
        H = (u * wts[:, None]).T @ u
        step = np.linalg.lstsq(H + 1e-14 * np.eye(V.D), -g, rcond=1e-12)[0]
        slope = g @ step
        if slope >= 0:
            step, slope = -g, -(g @ g)
        t = 1.0
        while True:
            f_new, x_new = dual(theta + t * step)
            if f_new <= f + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if t < 1e-12 and f_new > f:
            break
        theta, f, x = theta + t * step, f_new, x_new

    status = OPTIMAL
    if not converged:
        # target on the edge of the attainable set: polish the LP point directly
        def neg_h(xx):
            return -coupling_entropy(xx, p1).sum()

        res = minimize(neg_h, x0, method="SLSQP", bounds=list(zip(lo, hi)),
                       constraints=[{"type": "eq", "fun": lambda xx: u.T @ xx - w_s}],
                       options={"maxiter": 500, "ftol": 1e-14})
        x = np.clip(res.x if res.success else x0, lo, hi)
        status = BOUNDARY
    elif kappa > 0:
        unclamped = _stationary_x(u @ theta, p1)
        if np.any(np.abs(unclamped - x) > 1e-12):
            status = BOUNDARY
    pair = PairMeasure.binary(x, p1)
    resid = r_norm(u.T @ x - w_s, np.ones(V.D))
    return HmaxResult(pair, float(coupling_entropy(x, p1).sum()), status, theta / scale, resid, it)
