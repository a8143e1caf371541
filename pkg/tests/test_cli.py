from __future__ import annotations

import json

import numpy as np
import pytest

from symloc import protocol_sim as ps
from symloc.cli import EXIT_OK, EXIT_TOLERANCE, EXIT_VALIDATION, main
from symloc.serialization import dumps, encode_matrix, loads


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_state_ek(capsys):
    code, out, _ = run(capsys, "state", "ek", "--k", "2", "--n", "2")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["n"] == 2 and doc["d"] == 3
    amps = [complex(*a) for a in doc["amps"]]
    # |02> + |11> + |20>
    assert [i for i, a in enumerate(amps) if a] == [2, 4, 6]


def test_state_majorana(capsys):
    code, out, _ = run(capsys, "state", "w", "--n", "3", "--majorana")
    assert code == EXIT_OK
    assert "roots" in json.loads(out)
    code, _, err = run(capsys, "state", "ek", "--k", "2", "--n", "3", "--majorana")
    assert code == EXIT_VALIDATION and json.loads(err)["error"] == "validation"


def test_state_spec_inline(capsys):
    code, out, _ = run(capsys, "state", "--spec", '{"name": "ghz", "n": 3}')
    assert code == EXIT_OK and json.loads(out)["d"] == 2


def test_validation_exit_codes(capsys):
    assert run(capsys, "state")[0] == EXIT_VALIDATION
    assert run(capsys, "state", "ek", "--n", "3")[0] == EXIT_VALIDATION
    assert run(capsys, "bogus")[0] == EXIT_VALIDATION
    assert run(capsys, "derog", "reach", "--n", "4", "--b", "1,2,0.5,0,0,0")[0] == EXIT_VALIDATION
    assert run(capsys, "reproduce", "--suite", "99")[0] == EXIT_VALIDATION


def test_tolerance_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--canned", "qutrit4", "--completeness-tol", "1e-30")
    assert code == EXIT_TOLERANCE
    assert json.loads(err)["error"] == "tolerance"


def test_stabilizer_samples(capsys):
    code, out, _ = run(capsys, "stabilizer", "w", "--n", "3", "--sample", "2")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert len(doc["elements"]) == 2
    assert max(e["residual"] for e in doc["elements"]) <= 1e-9


def test_quasicomm(capsys):
    S = json.dumps({"matrix": encode_matrix(np.diag([1, -1]))})
    G = json.dumps({"matrix": encode_matrix(np.eye(2))})
    code, out, _ = run(capsys, "quasicomm", "check", "--S", S, "--G", G)
    assert code == EXIT_OK and json.loads(out)["lambda"] == 1.0
    code, out, _ = run(capsys, "quasicomm", "family", "--k", "2", "--a", "0.5+0.5i", "--points", "4")
    assert code == EXIT_OK and len(json.loads(out)["members"]) == 4


def test_simulate_canned_and_saved(capsys, tmp_path):
    path = tmp_path / "w.json"
    code, out, _ = run(capsys, "simulate", "--canned", "w", "--n", "3", "--p-prime", "0.3",
                       "--save-protocol", str(path))
    assert code == EXIT_OK
    first = json.loads(out)
    assert all(first["leaf_matches"])
    code, out, _ = run(capsys, "simulate", "--protocol", str(path))
    assert code == EXIT_OK
    assert json.loads(out)["outcomes"] == first["outcomes"]
    assert ps.LoccProtocol.from_json(loads(path.read_text())).name == first["protocol"]


def test_measure_monotone(capsys, tmp_path):
    g = tmp_path / "g.json"
    g.write_text(dumps([np.diag([2.0, 1.0])] * 3))
    x = tmp_path / "x.json"
    x.write_text(dumps([np.array([1.0, 0.0])] * 3))
    code, out, _ = run(capsys, "measure", "monotone", "--G", str(g), "--x", str(x))
    assert code == EXIT_OK
    assert json.loads(out)["monotone"] == pytest.approx(8.0)


def test_derog_fixture_scene_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "derog", "fixtures", "--n", "4")
    assert code == EXIT_OK
    fixtures = json.loads(out)["fixtures"]
    assert len(fixtures) == 6
    fx = next(f for f in fixtures if f["rep"] == "S42+2^4")
    scene = tmp_path / "scene.json"
    scene.write_text(json.dumps(fx["scene"]))
    proto = tmp_path / "proto.json"
    code, out, _ = run(capsys, "decide", "convert", "--scene", str(scene), "--protocol", str(proto))
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["verdict"] == fx["expected"]["convert"]
    assert doc["payload"]["weights"] == pytest.approx(fx["expected"]["convert_weights"])
    code, out, _ = run(capsys, "simulate", "--protocol", str(proto), "--completeness-tol", "1e-9")
    assert code == EXIT_OK and all(json.loads(out)["leaf_matches"])


def test_derog_reach_and_reps(capsys):
    code, out, _ = run(capsys, "derog", "reach", "--n", "3", "--b", "1,2,0.5,0,1.5")
    assert code == EXIT_OK and json.loads(out)["representative"] == "e"
    code, out, _ = run(capsys, "derog", "reach", "--n", "4", "--type", "1", "--b", "0,0,1,0,0,1")
    assert code == EXIT_OK and json.loads(out)["representative"] == "S42+2^4"
    code, out, _ = run(capsys, "derog", "reps", "--n", "5")
    assert json.loads(out)["representatives"][0]["witness_residual"] <= 1e-12


def test_reproduce_single(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "reproduce", "--suite", "1,3", "--out", str(path))
    assert code == EXIT_OK
    assert out.count("PASS") == 2
    assert [c["criterion"] for c in json.loads(path.read_text())["criteria"]] == [1, 3]


def test_reproduce_list(capsys):
    code, out, _ = run(capsys, "reproduce", "--suite", "list")
    assert code == EXIT_OK and len(out.strip().splitlines()) == 16
