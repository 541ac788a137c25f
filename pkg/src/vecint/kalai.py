"""Limit analytics for the Kalai array and the classification of quadruples.

``f_lam(x) = sigmoid(lam1 + lam2 x)`` is the scaling limit of the
max-entropy marginal of the Kalai array and ``g^pi`` the limit of the
max-entropy coupling.  Integrals over [0, 1] use a fixed 64-node
Gauss-Legendre rule, which is spectrally accurate for these logistic
integrands.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit, log_expit

GL_NODES = 64
GRID_NODES = 32
LAMBDA_CAP = 60.0
DEFAULT_TOL = 1e-6

KALAI = "kalai"
NOT_KALAI = "not-kalai"
BOUNDARY = "boundary"

FAMILIES = ("Gamma1", "Gamma2", "Gamma3")


class OutsideLambda(ValueError):
    """``(alpha1, alpha2)`` is not in the open region Lambda."""


class InversionFailed(RuntimeError):
    """Newton inversion left the capped region (target too close to the boundary)."""


def gauss_legendre(m: int = GL_NODES, a: float = 0.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


_X, _W = gauss_legendre()


# --------------------------------------------------------------------------
# Lambda


def in_lambda(x: float, y: float, margin: float = 0.0) -> bool:
    """``0 < x < 1`` and ``x^2 < y < 2x - x^2`` (strict, with optional margin)."""
    return bool(margin < x < 1 - margin and x * x + margin < y < 2 * x - x * x - margin)


def lambda_gap(x: float, y: float) -> float:
    """Signed distance-like gap to the boundary of Lambda: positive inside."""
    return min(x, 1 - x, y - x * x, 2 * x - x * x - y)


def dist_to_lambda(x: float, y: float) -> float:
    """``l1`` distance to the closure of Lambda via projection on ``x`` then ``y``."""
    xc = min(max(x, 0.0), 1.0)
    lo, hi = xc * xc, 2 * xc - xc * xc
    return abs(x - xc) + max(lo - y, 0.0, y - hi)


# --------------------------------------------------------------------------
# f, g and the integral maps


def f_lambda(lam, x):
    """``e^{lam1 + lam2 x} / (1 + e^{lam1 + lam2 x})``."""
    lam = np.asarray(lam, dtype=float)
    return expit(lam[0] + lam[1] * np.asarray(x, dtype=float))


def g_pi(pi, x) -> np.ndarray:
    """Cell probabilities ``(g00, g01, g10, g11)`` stacked on the last axis."""
    p1, p1p, p2, p2p = (float(v) for v in pi)
    x = np.asarray(x, dtype=float)
    e = np.stack([np.zeros_like(x), p1 + p2 * x, p1 + p2 * x, p1p + p2p * x], axis=-1)
    e = e - e.max(axis=-1, keepdims=True)
    z = np.exp(e)
    return z / z.sum(axis=-1, keepdims=True)


def _moments(vals: np.ndarray) -> np.ndarray:
    return np.array([_W @ vals, 2 * (_W @ (_X * vals))])


def h(lam) -> np.ndarray:
    """``int_0^1 (1, 2x) f_lam(x) dx``."""
    return _moments(f_lambda(lam, _X))


def hstar(pi) -> np.ndarray:
    """``int_0^1 (1, 2x) g^pi_11(x) dx``."""
    return _moments(g_pi(pi, _X)[:, 3])


def h_jacobian(lam) -> np.ndarray:
    """``[[I(1), I(x)], [2 I(x), 2 I(x^2)]]`` with ``I(u) = int u f (1 - f)``."""
    f = f_lambda(lam, _X)
    s = f * (1 - f)
    i0, i1, i2 = _W @ s, _W @ (_X * s), _W @ (_X * _X * s)
    return np.array([[i0, i1], [2 * i1, 2 * i2]])


def _potential(lam, a1, a2) -> float:
    # convex: gradient is (h1 - a1, (h2 - a2)/2)
    u = lam[0] + lam[1] * _X
    return float(_W @ -log_expit(-u) - lam[0] * a1 - lam[1] * a2 / 2)


def h_inverse(alpha1: float, alpha2: float, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Solve ``h(lam) = (alpha1, alpha2)`` by damped Newton on a convex potential."""
    if not in_lambda(alpha1, alpha2, margin=1e-9):
        raise OutsideLambda(f"({alpha1}, {alpha2}) is not in Lambda")
    lam = np.zeros(2)
    f0 = _potential(lam, alpha1, alpha2)
    for _ in range(max_iter):
        r = h(lam) - (alpha1, alpha2)
        if np.abs(r).sum() <= tol:
            return lam
        g = np.array([r[0], r[1] / 2])
        Jm = h_jacobian(lam)
        Hs = np.array([Jm[0], Jm[1] / 2])  # Hessian of the potential
        step = np.linalg.solve(Hs, -g)
        rn = np.abs(r).sum()
        t = 1.0
        while t > 1e-14:
            cand = lam + t * step
            f1 = _potential(cand, alpha1, alpha2)
            if f1 <= f0 + 1e-4 * t * (g @ step):
                break
            # near the root the potential is flat to rounding; judge by the residual instead
            if abs(f1 - f0) <= 1e-13 * max(1.0, abs(f0)) and np.abs(h(cand) - (alpha1, alpha2)).sum() < rn:
                break
            t *= 0.5
        lam, f0 = cand, f1
        if np.max(np.abs(lam)) > LAMBDA_CAP:
            raise InversionFailed(f"|lambda| exceeded {LAMBDA_CAP}; target is too close to the boundary")
    r = h(lam) - (alpha1, alpha2)
    if np.abs(r).sum() > max(tol, 1e-9):
        raise InversionFailed(f"Newton did not converge (residual {np.abs(r).sum():.3g})")
    return lam


def beta_star(alpha1: float, alpha2: float) -> np.ndarray:
    """Popular-intersection densities ``int (1, 2x) f_lam(x)^2 dx`` with ``lam = h^{-1}(alpha)``."""
    lam = h_inverse(alpha1, alpha2)
    beta = _moments(f_lambda(lam, _X) ** 2)
    # Jensen: alpha1^2 <= beta1 <= alpha1
    if not (alpha1 ** 2 - 1e-9 <= beta[0] <= alpha1 + 1e-12):
        raise AssertionError(f"beta1 = {beta[0]} outside [alpha1^2, alpha1]")
    return beta


# --------------------------------------------------------------------------
# witnesses and classification


@dataclass(frozen=True)
class KalaiQuadruple:
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float

    @classmethod
    def of(cls, g: Sequence[float]) -> "KalaiQuadruple":
        if len(g) != 4:
            raise ValueError("a quadruple has four entries")
        return cls(*(float(v) for v in g))

    @property
    def alpha(self) -> tuple[float, float]:
        return self.alpha1, self.alpha2

    @property
    def beta(self) -> tuple[float, float]:
        return self.beta1, self.beta2

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.alpha1, self.alpha2, self.beta1, self.beta2


def _gamma2_pi(a: float, b: float) -> np.ndarray:
    # g00 = 1 - 2a + b, g01 = a - b, g11 = b with pi2 = pi2' = 0
    z0 = 1 - 2 * a + b
    return np.array([math.log((a - b) / z0), math.log(b / z0), 0.0, 0.0])


def _gamma3_pi(b1: float, b2: float) -> np.ndarray:
    # with pi1' = pi2' = 0, g11 = (1 - f_{(pi1, pi2)}) / 2, so hstar = h(-(pi1, pi2)) / 2
    lam = h_inverse(2 * b1, 2 * b2)
    return np.array([-lam[0], 0.0, -lam[1], 0.0])


def pi_for(g, family: str | None = None, tol: float = 1e-9) -> np.ndarray | None:
    """The unique ``pi`` solving the limit marginal problem for ``g``, or ``None`` off Gamma.

    Families are tried in order unless ``family`` names one.
    """
    q = g if isinstance(g, KalaiQuadruple) else KalaiQuadruple.of(g)
    a1, a2, b1, b2 = q.as_tuple()
    order = FAMILIES if family is None else (family,)
    for fam in order:
        if fam == "Gamma1":
            if in_lambda(a1, a2) and abs(a1 - a2) > tol:
                try:
                    lam = h_inverse(a1, a2)
                except (InversionFailed, OutsideLambda):
                    continue
                bs = _moments(f_lambda(lam, _X) ** 2)
                if np.abs(bs - (b1, b2)).sum() <= tol:
                    return np.array([lam[0], 2 * lam[0], lam[1], 2 * lam[1]])
        elif fam == "Gamma2":
            if abs(a1 - a2) <= tol and abs(b1 - b2) <= tol and 0 < a1 < 1 and max(2 * a1 - 1, 0) < b1 < a1:
                return _gamma2_pi(a1, b1)
        elif fam == "Gamma3":
            if abs(a1 - 0.5) <= tol and abs(a2 - 0.5) <= tol and in_lambda(2 * b1, 2 * b2, margin=1e-9):
                try:
                    return _gamma3_pi(b1, b2)
                except InversionFailed:
                    continue
        else:
            raise ValueError(f"unknown family {fam!r}")
    return None


@dataclass(frozen=True)
class KalaiVerdict:
    quadruple: KalaiQuadruple
    in_lambda: bool
    memberships: dict
    distance: float
    family_distances: dict
    margins: dict
    verdict: str
    surrogate: bool = field(default=True)

    @property
    def families(self) -> list[str]:
        return sorted(self.memberships)

    def to_dict(self) -> dict:
        return {
            "g": list(self.quadruple.as_tuple()),
            "in_lambda": self.in_lambda,
            "verdict": self.verdict,
            "families": self.families,
            "witnesses": {k: [float(x) for x in v] for k, v in self.memberships.items()},
            "distance": self.distance,
            "family_distances": self.family_distances,
            "margins": self.margins,
            "distance_kind": "per-family l1 surrogate",
        }


def _interval_gap(x: float, lo: float, hi: float) -> float:
    return max(lo - x, 0.0, x - hi)


def family_distances(g: KalaiQuadruple) -> dict:
    a1, a2, b1, b2 = g.as_tuple()
    d1 = math.inf
    if a1 != a2:
        try:
            d1 = float(np.abs(beta_star(a1, a2) - (b1, b2)).sum())
        except InversionFailed:
            d1 = math.inf
    d2 = abs(a1 - a2) + abs(b1 - b2) + _interval_gap(b1, max(2 * a1 - 1, 0.0), a1)
    d3 = abs(a1 - 0.5) + abs(a2 - 0.5) + dist_to_lambda(2 * b1, 2 * b2)
    return {"Gamma1": d1, "Gamma2": d2, "Gamma3": d3}


def family_margins(g: KalaiQuadruple) -> dict:
    """How far inside each family's open conditions ``g`` sits (0 when outside)."""
    a1, a2, b1, b2 = g.as_tuple()
    m1 = max(min(abs(a1 - a2), lambda_gap(a1, a2)), 0.0)
    m2 = max(min(b1 - max(2 * a1 - 1, 0.0), a1 - b1, a1, 1 - a1), 0.0)
    m3 = max(lambda_gap(2 * b1, 2 * b2), 0.0)
    return {"Gamma1": m1, "Gamma2": m2, "Gamma3": m3}


def classify(g, tol: float = DEFAULT_TOL) -> KalaiVerdict:
    """Distance of ``g`` to Gamma and a three-way verdict.

    ``kalai`` needs distance at most ``tol`` to a family whose margin is at
    least ``10 tol``; ``not-kalai`` needs distance at least ``10 tol``;
    anything else is ``boundary``.
    """
    q = g if isinstance(g, KalaiQuadruple) else KalaiQuadruple.of(g)
    if not in_lambda(q.alpha1, q.alpha2):
        raise OutsideLambda(f"alpha = {q.alpha} is not in Lambda")
    dists = family_distances(q)
    margins = family_margins(q)
    distance = min(dists.values())
    members = {}
    for fam, d in dists.items():
        if d <= tol:
            pi = pi_for(q, fam, tol=max(tol, 1e-9))
            if pi is not None:
                members[fam] = pi
    if members and max(margins[f] for f in members) >= 10 * tol:
        verdict = KALAI
    elif distance >= 10 * tol:
        verdict = NOT_KALAI
    else:
        verdict = BOUNDARY
    return KalaiVerdict(q, True, members, float(distance), dists, margins, verdict)


def gamma_scan(step: float = 0.02) -> np.ndarray:
    """Rows ``(alpha1, alpha2, beta1*, beta2*)`` over a grid of Lambda with ``alpha1 != alpha2``."""
    rows = []
    grid = np.arange(step, 1.0, step)
    for a1 in grid:
        for a2 in grid:
            if abs(a1 - a2) < 1e-12 or not in_lambda(a1, a2, margin=1e-3):
                continue
            try:
                b = beta_star(a1, a2)
            except InversionFailed:
                continue
            rows.append((a1, a2, b[0], b[1]))
    return np.array(rows).reshape(-1, 4)


# --------------------------------------------------------------------------
# general dimension


@dataclass(frozen=True)
class QuadratureRule:
    """Points ``x_k`` in ``R^D`` with weights summing to 1 (a discretised density)."""

    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def tensor(cls, density: Callable[[np.ndarray], np.ndarray], D: int, m: int = GRID_NODES) -> "QuadratureRule":
        if not 1 <= D <= 3:
            raise ValueError("tensor grids are limited to D <= 3")
        x, w = gauss_legendre(m)
        mesh = np.stack(np.meshgrid(*([x] * D), indexing="ij"), axis=-1).reshape(-1, D)
        wt = np.prod(np.stack(np.meshgrid(*([w] * D), indexing="ij"), axis=-1).reshape(-1, D), axis=1)
        dens = np.asarray(density(mesh), dtype=float).reshape(-1)
        if np.any(dens <= 0):
            raise ValueError("density must be positive")
        mass = float(wt @ dens)
        if abs(mass - 1) > 1e-6:
            raise ValueError(f"density integrates to {mass}, not 1")
        return cls(mesh, wt * dens)


def _general_h(rule: QuadratureRule, lam):
    f = expit(rule.points @ lam)
    return rule.points.T @ (rule.weights * f), f


def beta_star_general(alpha, density: Callable | None = None, tol: float = 1e-12,
                      rule: QuadratureRule | None = None, max_iter: int = 200) -> np.ndarray:
    """``beta* = int x f_lam(x)^2 p(x) dx`` with ``lam`` solving ``int x f_lam(x) p(x) dx = alpha``.

    Give either a density on ``[0, 1]^D`` (integrated on a tensor Gauss grid)
    or an explicit quadrature ``rule``.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if rule is None:
        if density is None:
            raise ValueError("need a density or a quadrature rule")
        rule = QuadratureRule.tensor(density, alpha.size)
    if rule.points.shape[1] != alpha.size:
        raise ValueError("alpha and quadrature dimension differ")
    h0, _ = _general_h(rule, np.zeros(alpha.size))
    if np.abs(alpha - h0).max() < 1e-9:
        raise ValueError("alpha equals h(0): the uniformly random case has no unique beta*")
    P, wt = rule.points, rule.weights

    def potential(l):
        return float(wt @ -log_expit(-(P @ l)) - l @ alpha)

    lam = np.zeros(alpha.size)
    f0 = potential(lam)
    for _ in range(max_iter):
        hv, f = _general_h(rule, lam)
        g = hv - alpha
        if np.abs(g).sum() <= tol:
            break
        Jm = (P * (wt * f * (1 - f))[:, None]).T @ P
        step = np.linalg.solve(Jm, -g)
        t = 1.0
        while t > 1e-14:
            cand = lam + t * step
            f1 = potential(cand)
            if f1 <= f0 + 1e-4 * t * (g @ step):
                break
            t *= 0.5
        lam, f0 = cand, f1
        if np.max(np.abs(lam)) > LAMBDA_CAP:
            raise InversionFailed("alpha is outside the range of h (or too close to its boundary)")
    else:
        raise InversionFailed("Newton did not converge")
    f = expit(P @ lam)
    return P.T @ (wt * f * f)


def kalai_rule(m: int = GL_NODES) -> QuadratureRule:
    """The Kalai embedding ``x -> (1, x)`` with uniform density, as a quadrature rule."""
    x, w = gauss_legendre(m)
    return QuadratureRule(np.column_stack([np.ones_like(x), x]), w)
