from __future__ import annotations

import numpy as np
import pytest

from symloc import locc, specs
from symloc import symstates as ss
from symloc.serialization import SchemaError, dumps, loads
from symloc.stabilizer import SymmetryElement
from symloc.tensor_core import ProductOp

SPECS = [
    {"name": "ek", "k": 2, "n": 3},
    {"name": "w", "n": 4},
    {"name": "ghz", "n": 3, "d": 3},
    {"name": "dicke", "n": 4, "k": 2},
    {"name": "multi_dicke", "n": 5, "occupations": [2, 2, 1]},
    {"name": "direct_sum", "n": 3, "excitations": [2, 1]},
    {"name": "qutrit4", "rep": "S42+2^4"},
    {"name": "qutrit4", "rep": "psi_mu", "mu": [0.5, 0.2]},
    {"name": "psi_derog"},
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s["name"])
def test_family_seed_matches_seed(spec):
    seed = specs.build_seed(spec)
    fam = specs.build_family(spec)
    assert np.array_equal(seed.amps, fam.seed.amps)
    elem = fam.random_element(np.random.default_rng(0))
    assert elem.residual(seed) <= 1e-9


def test_seed_only_specs():
    assert specs.build_seed({"name": "product", "n": 3, "level": 2}).d == 3
    assert specs.build_seed({"name": "snk", "n": 4, "k": 2}).n == 4
    assert specs.build_seed({"name": "fnk", "n": 3, "k": 1}).d == 3
    derog = {"name": "derog", "k": 1, "occupations": [2, 1], "block_sizes": [2, 2]}
    assert specs.build_seed(derog).d == 4


def test_psi_mu_family():
    fam = specs.build_family({"name": "psi_mu", "mu": [0.5, 0.0]})
    assert fam.seed.n == 4
    with pytest.raises(ValueError, match="excluded"):
        specs.build_family({"name": "psi_mu", "mu": [0.0, 0.0]})


def test_qubit_fallback_family():
    # a product qubit seed has one fully degenerate root
    with pytest.raises(ValueError, match="nondegenerate"):
        specs.build_family({"name": "product", "n": 3, "level": 1, "d": 2})


def test_bad_specs():
    with pytest.raises(SchemaError, match="unknown seed"):
        specs.build_seed({"name": "nope"})
    with pytest.raises(SchemaError, match="needs field"):
        specs.build_seed({"name": "ek", "n": 3})
    with pytest.raises(SchemaError):
        specs.build_seed({"name": "psi_mu"})
    with pytest.raises(SchemaError, match="no stabilizer"):
        specs.build_family({"name": "snk", "n": 4, "k": 2})


def test_scene_round_trip():
    fam = specs.build_family({"name": "ek", "k": 2, "n": 3})
    grams = [np.diag([1.0, 2.0, 3.0]), np.eye(3), np.diag([2.0, 1.0, 1.0])]
    s = np.diag([1, -1, 1]).astype(complex)
    cand = SymmetryElement(ProductOp((s, s, s)), 1.0, "Explicit")
    doc = specs.encode_scene(
        {"name": "ek", "k": 2, "n": 3}, grams, tol=1e-8, grid=locc.GridConfig(angular_points=5),
        candidates=[cand], acting_sites=[1],
    )
    sf = specs.decode_scene(loads(dumps(doc)))
    assert sf.scene.tol == 1e-8
    assert sf.scene.grid.angular_points == 5
    assert sf.acting_sites == (1,)
    assert np.allclose(sf.candidates[0].op.ops[0], s)
    assert all(np.allclose(a.matrix, b) for a, b in zip(sf.scene.grams, grams))
    assert np.array_equal(sf.scene.seed.amps, fam.seed.amps)


def test_scene_overrides_and_errors():
    doc = specs.encode_scene({"name": "w", "n": 3}, [np.eye(2)] * 3)
    sf = specs.decode_scene(doc, tol=1e-6)
    assert sf.scene.tol == 1e-6 and sf.candidates == () and sf.acting_sites is None
    bad = dict(doc)
    del bad["gram_matrices"]
    with pytest.raises(SchemaError, match="missing"):
        specs.decode_scene(bad)
    mixed = dict(doc, stabilizer_spec={"name": "w", "n": 4})
    with pytest.raises(SchemaError, match="different seeds"):
        specs.decode_scene(mixed)


def test_encode_spec_complex_mu():
    out = specs.encode_spec({"name": "psi_mu", "mu": 1 + 2j})
    assert out["mu"] == [1.0, 2.0]
    assert ss.psi_mu(1 + 2j).n == 4
