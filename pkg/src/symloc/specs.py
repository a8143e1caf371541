"""Named seed specifications shared by the CLI, scene files and the acceptance harness.

A seed spec is a plain dict such as ``{"name": "ek", "k": 2, "n": 4}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import stabilizer as stab
from . import symstates
from .locc import GridConfig, LoccScene
from .serialization import (
    SCHEMA_VERSION,
    SchemaError,
    check_schema,
    decode_complex,
    decode_matrix,
    encode_complex,
    encode_matrix,
)
from .stabilizer import StabilizerFamily, SymmetryElement
from .tensor_core import DEFAULT_TOL, GramFactor, ProductOp, PureState

SEED_NAMES = (
    "ek", "w", "ghz", "dicke", "multi_dicke", "direct_sum", "derog",
    "snk", "fnk", "product", "psi_mu", "qutrit4", "psi_derog",
)


def _int(spec: dict, key: str, default: int | None = None) -> int:
    if key not in spec:
        if default is None:
            raise SchemaError(f"seed spec {spec.get('name')!r} needs field {key!r}")
        return default
    return int(spec[key])


def _ints(spec: dict, key: str) -> tuple[int, ...]:
    if key not in spec:
        raise SchemaError(f"seed spec {spec.get('name')!r} needs field {key!r}")
    return tuple(int(x) for x in spec[key])


def _mu(spec: dict) -> complex | None:
    return None if spec.get("mu") is None else decode_complex(spec["mu"])


def build_seed(spec: dict[str, Any]) -> PureState:
    name = spec.get("name")
    if name == "ek":
        return symstates.e_k(_int(spec, "k"), _int(spec, "n"))
    if name == "w":
        return symstates.w(_int(spec, "n"))
    if name == "ghz":
        return symstates.ghz(_int(spec, "n"), _int(spec, "d", 2))
    if name == "dicke":
        return symstates.dicke(_int(spec, "n"), _int(spec, "k"))
    if name == "multi_dicke":
        return symstates.multi_dicke(_int(spec, "n"), _ints(spec, "occupations"))
    if name == "direct_sum":
        return symstates.direct_sum_ek(symstates.BlockSpec(_ints(spec, "excitations")), _int(spec, "n"))
    if name == "derog":
        return symstates.derog_ek(
            symstates.DerogSpec(_int(spec, "k"), _ints(spec, "occupations"), _ints(spec, "block_sizes"))
        )
    if name == "snk":
        return symstates.snk(_int(spec, "n"), _int(spec, "k"), _int(spec, "d", 3))
    if name == "fnk":
        return symstates.fnk(_int(spec, "n"), _int(spec, "k"), _int(spec, "d", 3))
    if name == "product":
        return symstates.product_string(_int(spec, "n"), _int(spec, "level"), _int(spec, "d", 3))
    if name == "psi_mu":
        mu = _mu(spec)
        if mu is None:
            raise SchemaError("psi_mu needs field 'mu'")
        return symstates.psi_mu(mu)
    if name == "qutrit4":
        return stab.qutrit4_seed(str(spec.get("rep")), _mu(spec))
    if name == "psi_derog":
        return symstates.psi_derog_5qutrit()
    raise SchemaError(f"unknown seed name {name!r}; expected one of {', '.join(SEED_NAMES)}")


def build_family(spec: dict[str, Any]) -> StabilizerFamily:
    """Stabilizer family whose seed is ``build_seed(spec)``."""
    name = spec.get("name")
    if name == "ek":
        return stab.ek_stabilizer(_int(spec, "k"), _int(spec, "n"))
    if name == "w":
        return stab.w_stabilizer(_int(spec, "n"))
    if name == "ghz":
        blocks = symstates.BlockSpec((0,) * _int(spec, "d", 2))
        return stab.direct_sum_stabilizer(blocks, _int(spec, "n"))
    if name == "dicke":
        return stab.dicke_stabilizer(_int(spec, "n"), _int(spec, "k"))
    if name == "multi_dicke":
        return stab.multi_dicke_stabilizer(_int(spec, "n"), _ints(spec, "occupations"))
    if name == "direct_sum":
        return stab.direct_sum_stabilizer(symstates.BlockSpec(_ints(spec, "excitations")), _int(spec, "n"))
    if name == "qutrit4":
        return stab.qutrit4_symmetry_family(str(spec.get("rep")), _mu(spec))
    if name == "psi_mu":
        return stab.qutrit4_symmetry_family("psi_mu", _mu(spec))
    if name == "psi_derog":
        return stab.psi_derog_stabilizer()
    seed = build_seed(spec)
    if seed.d == 2:
        return stab.generic_qubit_family(seed)
    raise SchemaError(f"no stabilizer family registered for seed {name!r}")


def decode_symmetry(doc: dict) -> SymmetryElement:
    ops = tuple(decode_matrix(m) for m in doc["ops"])
    scalar = decode_complex(doc.get("scalar", [1.0, 0.0]))
    return SymmetryElement(ProductOp(ops, scalar), decode_complex(doc["lambda"]), doc.get("tag", "Explicit"))


def encode_spec(spec: dict) -> dict:
    out = dict(spec)
    if isinstance(out.get("mu"), complex):
        out["mu"] = encode_complex(out["mu"])
    return out


def gram_arrays(doc) -> list[np.ndarray]:
    return [decode_matrix(g) for g in doc]


def encode_scene(
    seed_spec: dict,
    grams: Sequence,
    stabilizer_spec: dict | None = None,
    tol: float | None = None,
    grid: GridConfig | None = None,
    candidates: Sequence[SymmetryElement] = (),
    acting_sites: Sequence[int] | None = None,
) -> dict:
    doc: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "seed_spec": encode_spec(seed_spec),
        "gram_matrices": [encode_matrix(g.matrix if isinstance(g, GramFactor) else g) for g in grams],
    }
    if stabilizer_spec is not None:
        doc["stabilizer_spec"] = encode_spec(stabilizer_spec)
    if tol is not None:
        doc["tolerances"] = {"proportionality": tol}
    if grid is not None:
        doc["grid_config"] = grid.to_json()
    if candidates:
        doc["candidates"] = [c.to_json() for c in candidates]
    if acting_sites is not None:
        doc["acting_sites"] = list(acting_sites)
    return doc


@dataclass(frozen=True, eq=False)
class SceneFile:
    scene: LoccScene
    candidates: tuple[SymmetryElement, ...]
    acting_sites: tuple[int, ...] | None


def decode_scene(doc: dict, tol: float | None = None, grid: GridConfig | None = None) -> SceneFile:
    check_schema(doc)
    try:
        seed_spec = doc["seed_spec"]
        grams = gram_arrays(doc["gram_matrices"])
    except KeyError as exc:
        raise SchemaError(f"scene missing field {exc}") from None
    fam = build_family(doc.get("stabilizer_spec", seed_spec))
    seed = build_seed(seed_spec)
    if not np.array_equal(seed.amps, fam.seed.amps):
        raise SchemaError("seed_spec and stabilizer_spec describe different seeds")
    if tol is None:
        tol = float(doc.get("tolerances", {}).get("proportionality", DEFAULT_TOL))
    if grid is None:
        grid = GridConfig(**doc["grid_config"]) if "grid_config" in doc else GridConfig()
    cands = tuple(decode_symmetry(c) for c in doc.get("candidates", ()))
    sites = doc.get("acting_sites")
    return SceneFile(
        LoccScene(fam.seed, fam, tuple(grams), tol, grid), cands, None if sites is None else tuple(int(s) for s in sites)
    )
