"""Core domain types: vector arrays, product measures, pair measures.

A vector array assigns an integer vector ``v[i][j]`` in Z^D to every
coordinate ``i`` and letter ``j``; the value of a word ``a`` is the sum
``V(a) = sum_i v[i][a_i]``.  Words are stored as tuples of letter *indices*
into the array's alphabet, so a binary word is a tuple of 0/1 ints.

Entropies are in bits throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Sequence

import numpy as np

ROW_TOL = 1e-12

BINARY = (0, 1)
PAIR_ALPHABET = ((0, 0), (0, 1), (1, 0), (1, 1))


class ShapeError(ValueError):
    """Raised when array, measure or word dimensions do not agree."""


def r_norm(v, R) -> float:
    """Scaled sup-norm ``max_d |v_d| / R_d``."""
    v = np.asarray(v, dtype=float)
    R = np.asarray(R, dtype=float)
    if v.shape[-1:] != R.shape:
        raise ShapeError(f"vector has {v.shape[-1:]} components, scaling has {R.shape}")
    if np.any(R <= 0):
        raise ValueError("scaling must be strictly positive")
    if v.ndim != 1:
        raise ShapeError("r_norm takes a single vector; use r_norms for batches")
    return float(np.max(np.abs(v) / R))


def r_norms(vs, R) -> np.ndarray:
    """Row-wise R-norms of a ``(m, D)`` batch."""
    return np.max(np.abs(np.asarray(vs, dtype=float)) / np.asarray(R, dtype=float), axis=-1)


def letter_entropy(p) -> np.ndarray:
    """Elementwise ``L(p) = -p log2 p`` with ``L(0) = 0``."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = -p[pos] * np.log2(p[pos])
    return out


@dataclass(frozen=True)
class VectorArray:
    """An (n, J)-array of integer vectors with a positive scaling ``R``.

    ``vectors`` has shape ``(n, |J|, D)``; ``alphabet`` lists the letter
    labels in index order.
    """

    vectors: np.ndarray
    scaling: np.ndarray
    alphabet: tuple = BINARY
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        vec = np.asarray(self.vectors)
        if vec.ndim != 3:
            raise ShapeError("vectors must have shape (n, |J|, D)")
        if not np.issubdtype(vec.dtype, np.integer):
            if not np.all(np.equal(np.mod(vec, 1), 0)):
                raise ValueError("array entries must be integers")
        vec = vec.astype(np.int64)
        R = np.asarray(self.scaling, dtype=float).reshape(-1)
        if R.shape != (vec.shape[2],):
            raise ShapeError(f"scaling must have D={vec.shape[2]} components")
        if np.any(R <= 0):
            raise ValueError("scaling must be strictly positive")
        alphabet = tuple(self.alphabet)
        if len(alphabet) != vec.shape[1]:
            raise ShapeError("alphabet size does not match vectors")
        if len(alphabet) < 2:
            raise ValueError("alphabet needs at least two letters")
        vec.setflags(write=False)
        R.setflags(write=False)
        object.__setattr__(self, "vectors", vec)
        object.__setattr__(self, "scaling", R)
        object.__setattr__(self, "alphabet", alphabet)

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_binary(cls, vs, scaling=None, name=None) -> "VectorArray":
        """Binary specialisation: letter 1 carries ``v_i``, letter 0 the zero vector."""
        vs = np.asarray(vs, dtype=np.int64)
        if vs.ndim == 1:
            vs = vs[:, None]
        n, D = vs.shape
        vec = np.zeros((n, 2, D), dtype=np.int64)
        vec[:, 1, :] = vs
        if scaling is None:
            scaling = np.maximum(np.abs(vs).max(axis=0), 1)
        return cls(vec, scaling, BINARY, name)

    @classmethod
    def kalai(cls, n: int) -> "VectorArray":
        """Kalai vectors ``v_i = (1, i)`` for ``i = 1..n`` with ``R = (1, n)``."""
        if n < 1:
            raise ValueError("n must be positive")
        idx = np.arange(1, n + 1)
        vs = np.stack([np.ones(n, dtype=np.int64), idx], axis=1)
        return cls.from_binary(vs, scaling=(1.0, float(n)), name=f"kalai:{n}")

    @classmethod
    def constant(cls, n: int, value: int = 1) -> "VectorArray":
        """One-dimensional constant array (the Frankl-Rodl setting)."""
        return cls.from_binary(np.full((n, 1), value), scaling=(abs(value) or 1,), name=f"constant:{n}")

    # -- shape ------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def D(self) -> int:
        return self.vectors.shape[2]

    @property
    def J(self) -> int:
        return self.vectors.shape[1]

    @property
    def is_binary(self) -> bool:
        return self.alphabet == BINARY and not np.any(self.vectors[:, 0, :])

    @property
    def binary_vectors(self) -> np.ndarray:
        """The ``(n, D)`` matrix of ``v_i`` for a binary array."""
        if not self.is_binary:
            raise ValueError("array is not a binary specialisation")
        return self.vectors[:, 1, :]

    def is_kalai(self) -> bool:
        if not self.is_binary or self.D != 2:
            return False
        vs = self.binary_vectors
        return bool(np.all(vs[:, 0] == 1) and np.all(vs[:, 1] == np.arange(1, self.n + 1)))

    def is_r_bounded(self) -> bool:
        return bool(np.all(np.abs(self.vectors) / self.scaling <= 1.0 + 1e-12))

    def letter_index(self, letter: Hashable) -> int:
        try:
            return self.alphabet.index(letter)
        except ValueError:
            raise ValueError(f"invalid letter {letter!r}") from None

    def check_word(self, a: Sequence[int]) -> tuple:
        a = tuple(int(x) for x in a)
        if len(a) != self.n:
            raise ShapeError(f"word has length {len(a)}, expected {self.n}")
        if any(x < 0 or x >= self.J for x in a):
            raise ValueError(f"invalid letter in word {a}")
        return a

    def value(self, a: Sequence[int]) -> np.ndarray:
        return array_value(self, a)

    def restrict(self, coords: Sequence[int]) -> "VectorArray":
        """Sub-array on the given coordinates (same alphabet and scaling)."""
        return VectorArray(self.vectors[list(coords)], self.scaling, self.alphabet)


def array_value(V: VectorArray, a: Sequence[int]) -> np.ndarray:
    """Exact integer value ``sum_i v[i][a_i]``."""
    a = V.check_word(a)
    return V.vectors[np.arange(V.n), list(a), :].sum(axis=0)


def parse_word(s: str) -> tuple:
    """``"0101"`` -> ``(0, 1, 0, 1)``."""
    return tuple(int(ch) for ch in s.strip())


def word_to_str(a: Sequence[int]) -> str:
    return "".join(str(int(x)) for x in a)


@dataclass(frozen=True)
class ProductMeasure:
    """Per-coordinate distributions ``p[i][j]`` over a finite alphabet."""

    p: np.ndarray
    alphabet: tuple = BINARY

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2:
            raise ShapeError("p must have shape (n, |J|)")
        if np.any(p < -ROW_TOL) or np.any(p > 1 + ROW_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        rows = p.sum(axis=1)
        if np.any(np.abs(rows - 1) > 1e-9):
            raise ValueError("rows must sum to 1")
        p = np.clip(p, 0.0, 1.0)
        p = p / p.sum(axis=1, keepdims=True)
        alphabet = tuple(self.alphabet)
        if len(alphabet) != p.shape[1]:
            alphabet = tuple(range(p.shape[1]))
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alphabet", alphabet)

    @classmethod
    def bernoulli(cls, p1) -> "ProductMeasure":
        """Binary product measure from the probabilities of letter 1."""
        p1 = np.asarray(p1, dtype=float).reshape(-1)
        return cls(np.stack([1 - p1, p1], axis=1), BINARY)

    @classmethod
    def uniform(cls, n: int, J: int = 2) -> "ProductMeasure":
        return cls(np.full((n, J), 1.0 / J), BINARY if J == 2 else tuple(range(J)))

    @classmethod
    def point_mass(cls, a: Sequence[int], J: int = 2) -> "ProductMeasure":
        p = np.zeros((len(a), J))
        p[np.arange(len(a)), list(a)] = 1.0
        return cls(p, BINARY if J == 2 else tuple(range(J)))

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def J(self) -> int:
        return self.p.shape[1]

    @property
    def p1(self) -> np.ndarray:
        return self.p[:, 1]

    def entropy(self) -> float:
        return entropy(self)

    def log2_prob(self, a: Sequence[int]) -> float:
        """``log2 mu(a)``; ``-inf`` for a zero-probability word."""
        probs = self.p[np.arange(self.n), list(a)]
        with np.errstate(divide="ignore"):
            return float(np.sum(np.log2(probs)))

    def log2_probs(self, words: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64)
        probs = self.p[np.arange(self.n)[None, :], words]
        with np.errstate(divide="ignore"):
            return np.log2(probs).sum(axis=1)

    def is_bounded(self, kappa: float) -> bool:
        return boundedness(self, kappa)

    def density(self, kappa: float) -> tuple[bool, int]:
        return density(self, kappa)


def entropy(mu) -> float:
    """Entropy in bits of a product (or pair) measure."""
    arr = mu.p if isinstance(mu, ProductMeasure) else mu.q
    return float(letter_entropy(arr).sum())


def coordinate_entropies(mu) -> np.ndarray:
    arr = mu.p if isinstance(mu, ProductMeasure) else mu.q.reshape(mu.n, -1)
    return letter_entropy(arr).sum(axis=1)


def expected_array_value(V: VectorArray, mu: ProductMeasure) -> np.ndarray:
    """``E_{a ~ mu} V(a) = sum_{i,j} p[i][j] v[i][j]``."""
    if mu.p.shape != V.vectors.shape[:2]:
        raise ShapeError(f"measure shape {mu.p.shape} does not match array {V.vectors.shape[:2]}")
    return np.einsum("ij,ijd->d", mu.p, V.vectors.astype(float))


@dataclass(frozen=True)
class PairMeasure:
    """Product measure on ``(J1 x J2)^n`` stored as ``q[i, j, j']``."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 3:
            raise ShapeError("q must have shape (n, |J1|, |J2|)")
        if np.any(q < -ROW_TOL) or np.any(q > 1 + ROW_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        rows = q.sum(axis=(1, 2))
        if np.any(np.abs(rows - 1) > 1e-9):
            raise ValueError("coordinate distributions must sum to 1")
        q = np.clip(q, 0.0, 1.0)
        q = q / q.sum(axis=(1, 2), keepdims=True)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @classmethod
    def independent(cls, p1: ProductMeasure, p2: ProductMeasure) -> "PairMeasure":
        if p1.n != p2.n:
            raise ShapeError("marginals have different lengths")
        return cls(p1.p[:, :, None] * p2.p[:, None, :])

    @classmethod
    def binary(cls, x11, p) -> "PairMeasure":
        """Symmetric binary coupling with ``q11 = x`` and both marginals ``p``."""
        x11 = np.asarray(x11, dtype=float).reshape(-1)
        p = np.asarray(p, dtype=float).reshape(-1)
        q = np.empty((len(p), 2, 2))
        q[:, 1, 1] = x11
        q[:, 0, 1] = q[:, 1, 0] = p - x11
        q[:, 0, 0] = 1 - 2 * p + x11
        return cls(q)

    @classmethod
    def frankl_rodl(cls, n: int, k: int, t: int) -> "PairMeasure":
        """Constant coupling with ``q11 = t/n`` and ``q01 = q10 = (k - t)/n``."""
        return cls.binary(np.full(n, t / n), np.full(n, k / n))

    @classmethod
    def from_product(cls, mu: ProductMeasure, J1: int = 2, J2: int = 2) -> "PairMeasure":
        """Reshape a product measure over the flattened pair alphabet."""
        return cls(mu.p.reshape(mu.n, J1, J2))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def entropy(self) -> float:
        return entropy(self)

    def marginal(self, side: int) -> ProductMeasure:
        return marginal(self, side)

    def is_bounded(self, kappa: float) -> bool:
        return boundedness(self, kappa)

    def to_product(self) -> ProductMeasure:
        J1, J2 = self.q.shape[1:]
        return ProductMeasure(self.q.reshape(self.n, J1 * J2), tuple(product(range(J1), range(J2))))


def marginal(mu: PairMeasure, side: int) -> ProductMeasure:
    """Row sums over the other side of the pair alphabet."""
    if side == 1:
        p = mu.q.sum(axis=2)
    elif side == 2:
        p = mu.q.sum(axis=1)
    else:
        raise ValueError("side must be 1 or 2")
    return ProductMeasure(p, BINARY if p.shape[1] == 2 else tuple(range(p.shape[1])))


def boundedness(mu, kappa: float) -> bool:
    """True when every cell probability lies in ``[kappa, 1 - kappa]``."""
    arr = mu.p if isinstance(mu, ProductMeasure) else mu.q
    return bool(np.all(arr >= kappa) and np.all(arr <= 1 - kappa))


def density(mu, kappa: float) -> tuple[bool, int]:
    """Whether at least ``kappa n`` coordinates have every letter with mass >= kappa.

    Returns the verdict and the witnessing coordinate count.
    """
    arr = mu.p if isinstance(mu, ProductMeasure) else mu.q.reshape(mu.n, -1)
    count = int(np.sum(np.all(arr >= kappa, axis=1)))
    return count >= kappa * arr.shape[0], count


@dataclass(frozen=True)
class Fibre:
    """The set of words ``a`` with ``V(a) = w``."""

    array: VectorArray
    target: tuple

    def __post_init__(self):
        w = tuple(int(x) for x in np.asarray(self.target).reshape(-1))
        if len(w) != self.array.D:
            raise ShapeError(f"target has {len(w)} components, array has D={self.array.D}")
        object.__setattr__(self, "target", w)

    def contains(self, a: Sequence[int]) -> bool:
        return tuple(int(x) for x in array_value(self.array, a)) == self.target


def all_words(n: int, J: int = 2) -> np.ndarray:
    """All of ``J^n`` as an integer matrix in lexicographic order."""
    return np.array(list(product(range(J), repeat=n)), dtype=np.int64).reshape(-1, n)
