"""JSON/CSV plumbing: array specs, measures and report serialisation."""
from __future__ import annotations

import dataclasses
import json
import math
import os
from fractions import Fraction

import numpy as np

from .measures import BINARY, PairMeasure, ProductMeasure, ShapeError, VectorArray

ARRAY_KEYS = {"n", "D", "alphabet", "scaling", "vectors", "name"}


class SchemaError(ValueError):
    """A JSON document does not match the expected schema."""


def parse_vector(text: str, kind=int) -> tuple:
    """``"15,200"`` -> ``(15, 200)``; ``kind=Fraction`` keeps rationals exact."""
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError(f"empty vector {text!r}")
    if kind is int:
        out = []
        for p in parts:
            f = Fraction(p)
            if f.denominator != 1:
                raise ValueError(f"{p!r} is not an integer")
            out.append(int(f))
        return tuple(out)
    if kind is Fraction:
        return tuple(Fraction(p) for p in parts)
    return tuple(float(Fraction(p)) for p in parts)


def array_from_json(obj) -> VectorArray:
    """Build an array from the JSON schema or the ``{"kind": ...}`` shorthand."""
    if not isinstance(obj, dict):
        raise SchemaError("array must be a JSON object")
    if "kind" in obj:
        extra = set(obj) - {"kind", "n", "value"}
        if extra:
            raise SchemaError(f"unknown keys {sorted(extra)}")
        if obj["kind"] == "kalai":
            return VectorArray.kalai(int(obj["n"]))
        if obj["kind"] == "constant":
            return VectorArray.constant(int(obj["n"]), int(obj.get("value", 1)))
        raise SchemaError(f"unknown array kind {obj['kind']!r}")
    extra = set(obj) - ARRAY_KEYS
    if extra:
        raise SchemaError(f"unknown keys {sorted(extra)}")
    try:
        n, D = int(obj["n"]), int(obj["D"])
        alphabet = tuple(obj.get("alphabet", BINARY))
        J = len(alphabet)
        vec = np.zeros((n, J, D), dtype=np.int64)
        seen = set()
        for key, v in obj["vectors"].items():
            i, j = (int(x) for x in key.split(","))
            if not (0 <= i < n and 0 <= j < J):
                raise SchemaError(f"entry {key!r} out of range")
            if len(v) != D:
                raise SchemaError(f"entry {key!r} has dimension {len(v)}, expected {D}")
            vec[i, j] = v
            seen.add((i, j))
        if len(seen) != n * J:
            raise SchemaError(f"expected {n * J} entries, got {len(seen)}")
        scaling = obj.get("scaling")
        if scaling is None:
            scaling = np.maximum(np.abs(vec).max(axis=(0, 1)), 1)
        return VectorArray(vec, scaling, alphabet, obj.get("name"))
    except KeyError as e:
        raise SchemaError(f"missing key {e.args[0]!r}") from None
    except ShapeError as e:
        raise SchemaError(str(e)) from None


def array_to_json(V: VectorArray) -> dict:
    out = {
        "n": V.n, "D": V.D,
        "alphabet": list(V.alphabet),
        "scaling": [float(x) for x in V.scaling],
        "vectors": {f"{i},{j}": V.vectors[i, j].tolist() for i in range(V.n) for j in range(V.J)},
    }
    if V.name:
        out["name"] = V.name
    return out


def load_array(spec: str) -> VectorArray:
    """Resolve ``kalai:n``, ``constant:n[:value]``, inline JSON or a JSON file path."""
    spec = spec.strip()
    head, _, rest = spec.partition(":")
    if head == "kalai" and rest:
        return VectorArray.kalai(int(rest))
    if head == "constant" and rest:
        n, _, v = rest.partition(":")
        return VectorArray.constant(int(n), int(v) if v else 1)
    if spec.startswith("{"):
        return array_from_json(json.loads(spec))
    if os.path.exists(spec):
        with open(spec) as fh:
            return array_from_json(json.load(fh))
    raise SchemaError(f"cannot resolve array spec {spec!r}")


def measure_from_json(obj) -> ProductMeasure:
    """A list of letter-1 probabilities or an ``n x |J|`` matrix."""
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 1:
        return ProductMeasure.bernoulli(arr)
    return ProductMeasure(arr)


def load_measure(spec: str, n: int | None = None) -> ProductMeasure:
    """``uniform``, ``const:p``, inline JSON or a JSON file."""
    spec = spec.strip()
    if spec == "uniform":
        if n is None:
            raise ValueError("uniform measure needs n")
        return ProductMeasure.uniform(n)
    if spec.startswith("const:"):
        if n is None:
            raise ValueError("constant measure needs n")
        return ProductMeasure.bernoulli(np.full(n, float(spec[6:])))
    if spec.startswith("["):
        return measure_from_json(json.loads(spec))
    with open(spec) as fh:
        return measure_from_json(json.load(fh))


def load_family(spec: str) -> np.ndarray:
    """A JSON list of words (lists of letter indices or strings of digits)."""
    if spec.strip().startswith("["):
        data = json.loads(spec)
    else:
        with open(spec) as fh:
            data = json.load(fh)
    rows = [[int(c) for c in w] for w in data]
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def _default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (ProductMeasure,)):
        return o.p.tolist()
    if isinstance(o, PairMeasure):
        return o.q.tolist()
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _finite(o):
    """Replace non-finite floats by strings so the output stays strict JSON."""
    if isinstance(o, float) and not math.isfinite(o):
        return "inf" if o > 0 else ("-inf" if o < 0 else "nan")
    if isinstance(o, dict):
        return {str(k): _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    return o


def dumps(obj, indent: int | None = None) -> str:
    plain = json.loads(json.dumps(obj, default=_default, allow_nan=True))
    return json.dumps(_finite(plain), indent=indent, allow_nan=False)


def rows_to_csv(header, rows) -> str:
    lines = [",".join(header)] + [",".join(str(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"
