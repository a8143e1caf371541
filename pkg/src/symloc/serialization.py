"""JSON encoding of states, matrices and nested results.

Complex numbers are written as ``[re, im]`` pairs and matrices as
row-major lists of such pairs.  Every top-level document carries a
``schema`` field; readers refuse versions they do not know.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .tensor_core import PureState

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise SchemaError(f"complex number must be a [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def encode_matrix(m: np.ndarray) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(z) for z in row] for row in m]


def decode_matrix(rows) -> np.ndarray:
    return np.array([[decode_complex(z) for z in row] for row in rows], dtype=complex)


def encode_state(state: PureState) -> dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "n": state.n,
        "d": state.d,
        "amps": [encode_complex(z) for z in state.amps],
    }


def check_schema(doc: dict[str, Any]) -> None:
    version = doc.get("schema", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {version!r}")


def decode_state(doc: dict[str, Any]) -> PureState:
    check_schema(doc)
    try:
        n, d, amps = int(doc["n"]), int(doc["d"]), doc["amps"]
    except KeyError as exc:
        raise SchemaError(f"state document missing field {exc}") from None
    return PureState(n, d, np.array([decode_complex(z) for z in amps], dtype=complex))


def to_jsonable(obj: Any) -> Any:
    """Recursively turn numpy/complex content into plain JSON types."""
    if isinstance(obj, PureState):
        return encode_state(obj)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2:
                return encode_matrix(obj)
            return [to_jsonable(x) for x in obj]
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return obj


def dumps(obj: Any) -> str:
    payload = to_jsonable(obj)
    if isinstance(payload, dict) and "schema" not in payload:
        payload = {"schema": SCHEMA_VERSION, **payload}
    return json.dumps(payload, sort_keys=True)


def loads(text: str) -> Any:
    doc = json.loads(text)
    if isinstance(doc, dict):
        check_schema(doc)
    return doc
