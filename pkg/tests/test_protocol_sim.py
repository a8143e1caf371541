from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from symloc import protocol_sim as ps
from symloc import symstates as ss
from symloc.serialization import dumps, loads
from symloc.tensor_core import PureState, normalize


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_w_protocol(n, p):
    proto = ps.w_class_protocol(n, p)
    assert max(proto.completeness_residuals()) <= 1e-12
    outs = ps.simulate(proto)
    assert len(outs) == 2**n
    assert max(ps.leaf_residuals(outs, ps.w_target(n, p))) <= 1e-10
    assert ps.total_probability(outs) == pytest.approx(1.0, abs=1e-10)


def test_w_target_closed_form():
    t = ps.w_target(3, 0.25)
    assert t.amplitude([0, 0, 0]) == pytest.approx(0.5)
    assert t.amplitude([0, 0, 1]) == pytest.approx(math.sqrt(0.75 / 3))


def test_round_phases_are_exact():
    assert ps.w_round_phase(1) == math.pi / 2
    assert ps.w_round_phase(2) == math.acos(math.sqrt(0.5))
    assert ps.w_round_phase(4) == math.acos(math.sqrt(3 / 4))


@settings(max_examples=10, deadline=None)
@given(hst.integers(2, 3), hst.integers(3, 4), hst.floats(0.05, 0.95))
def test_ek_protocol_property(k, n, p):
    proto = ps.ek_class_protocol(k, n, p)
    outs = ps.simulate(proto)
    assert max(ps.leaf_residuals(outs, ps.ek_class_target(k, n, p))) <= 1e-10


def test_ek_protocol_embedding():
    proto = ps.ek_class_protocol(2, 4, 0.3)
    assert proto.initial.d == 3
    assert np.array_equal(proto.initial.amps, ss.e_k(2, 4).amps)
    with pytest.raises(ValueError):
        ps.ek_class_protocol(2, 4, 1.0)


def test_ghz_protocol():
    rng = np.random.default_rng(0)
    for n in (3, 4):
        proto = ps.ghz_class_protocol(n, ps.random_ghz_gx(rng))
        outs = ps.simulate(proto)
        assert ps.is_deterministic(outs, proto.declared_target)


def test_ghz_protocol_validation():
    with pytest.raises(ValueError):
        ps.ghz_class_protocol(3, np.diag([1.0, 0.5]))
    with pytest.raises(ValueError):
        ps.ghz_class_protocol(3, np.eye(2))


def test_qutrit4_constants():
    # 30-digit closed-form values
    assert ps.QUTRIT4_P == pytest.approx(0.658918622597891122362878808648, abs=1e-15)
    assert ps.QUTRIT4_Q == pytest.approx(0.351153302357084494655231243851, abs=1e-15)


def test_qutrit4_protocol():
    proto = ps.qutrit4_probabilistic_protocol()
    res = proto.completeness_residuals()
    assert len(res) == 3 and max(res) <= 1e-9
    outs = ps.simulate(proto, completeness_tol=1e-9)
    assert max(ps.leaf_residuals(outs, proto.declared_target)) <= 1e-9
    assert proto.depth() == 2


def test_qutrit4_depth1_states_differ():
    cert = ps.qutrit4_depth1_certificate()
    assert not cert["proportional"]
    assert cert["monotone_gap"] > 1e-6
    assert cert["spectral_gap"] > 1e-3
    assert sum(cert["intermediate_probabilities"]) == pytest.approx(1.0)


def test_protocol_json_round_trip():
    proto = ps.w_class_protocol(3, 0.4)
    back = ps.LoccProtocol.from_json(loads(dumps(proto)))
    assert dumps(back) == dumps(proto)
    a, b = ps.simulate(proto), ps.simulate(back)
    assert [o.probability for o in a] == [o.probability for o in b]


def test_incomplete_measurement_is_rejected():
    bad = ps.LoccRound(0, (ps.Branch(np.diag([1.0, 0.5])),))
    proto = ps.LoccProtocol(bad, None, ss.w(3))
    with pytest.raises(ps.ProtocolError):
        ps.simulate(proto)


def test_nonunitary_correction_is_rejected():
    node = ps.LoccRound(0, (ps.Branch(np.eye(2), ((1, 2 * np.eye(2)),)),))
    with pytest.raises(ps.ProtocolError):
        ps.simulate(ps.LoccProtocol(node, None, ss.w(3)))


def test_corrections_must_skip_the_measuring_party():
    with pytest.raises(ps.ProtocolError):
        ps.LoccRound(0, (ps.Branch(np.eye(2), ((0, np.eye(2)),)),))


def test_simulate_needs_state():
    node = ps.LoccRound(0, (ps.Branch(np.eye(2)),))
    with pytest.raises(ps.ProtocolError):
        ps.simulate(ps.LoccProtocol(node))
    with pytest.raises(ps.ProtocolError):
        ps.simulate(ps.LoccProtocol(node), PureState(2, 2, np.zeros(4)))


def test_spectral_gap_detects_lu_difference():
    a = normalize(ss.w(3))
    assert ps.spectral_gap(a, a) == 0.0
    assert ps.spectral_gap(a, normalize(ss.ghz(3))) > 0.1
