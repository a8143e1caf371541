from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from symloc import locc
from symloc import protocol_sim as ps
from symloc import stabilizer as st
from symloc import symstates as ss
from symloc.quasicomm import corner_gram, quasi_commutes
from symloc.tensor_core import GramFactor, random_positive


def _scene(fam, grams, **kw):
    return locc.LoccScene(fam.seed, fam, tuple(grams), **kw)


def _w_end_scene():
    b, x = 1.7, 0.4 + 0.2j
    h = np.diag([1, b]).astype(complex)
    hl = np.array([[1, x], [0, b]])
    return _scene(st.w_stabilizer(3), [h.conj().T @ h] * 2 + [hl.conj().T @ hl])


def _dicke_scene():
    G = np.array([[1, 0.3], [0.3, 1]])
    return _scene(st.dicke_stabilizer(4, 2), [G] * 4)


def test_grid_config():
    g = locc.GridConfig(angular_points=4, radial_points=2)
    assert 1.0 in g.magnitudes()
    assert len(g.angles()) == 4
    with pytest.raises(ValueError):
        locc.GridConfig(angular_points=1)


def test_scene_validation():
    fam = st.w_stabilizer(3)
    with pytest.raises(ValueError):
        _scene(fam, [np.eye(2)] * 2)
    with pytest.raises(ValueError):
        _scene(fam, [np.eye(3)] * 3)
    with pytest.raises(ValueError):
        locc.LoccScene(ss.ghz(3), fam, (np.eye(2),) * 3)


def test_reach_witness_replays():
    scene = _w_end_scene()
    d = locc.reachable(scene)
    assert d.verdict == locc.WITNESSED
    wit = d.payload
    assert wit.symmetry.residual(scene.seed) < 1e-8
    passing = [quasi_commutes(o, g.matrix, 1e-8) is not None for o, g in zip(wit.symmetry.op.ops, scene.grams)]
    assert sum(passing) == 2 and not passing[wit.site]


def test_reaching_protocol_is_deterministic():
    scene = _w_end_scene()
    d = locc.reachable(scene)
    proto = locc.build_reaching_protocol(scene, d.payload.symmetry, d.payload.site, 0.4)
    assert max(proto.completeness_residuals()) <= 1e-12
    outs = ps.simulate(proto)
    assert ps.is_deterministic(outs, proto.declared_target)
    assert ps.total_probability(outs) == pytest.approx(1.0, abs=1e-10)


def test_reaching_protocol_validation():
    scene = _w_end_scene()
    ident = st.SymmetryElement(st.ProductOp.identity(3, 2), 1.0)
    with pytest.raises(ValueError):
        locc.build_reaching_protocol(scene, ident, 0, 1.5)


def test_convert_with_zero_sum_certificate():
    scene = _dicke_scene()
    d = locc.convertible_locc1(scene)
    assert d.verdict == locc.WITNESSED
    cert = d.payload
    assert cert.recipe == "zero_sum"
    assert cert.weights == pytest.approx((0.5, 0.5))
    G = scene.grams[cert.acting_site].matrix
    recon = sum(p * s.op.ops[cert.acting_site].conj().T @ cert.target_gram @ s.op.ops[cert.acting_site]
                for s, p in cert.symmetries)
    np.testing.assert_allclose(recon, G, atol=1e-10)
    proto = locc.build_conversion_protocol(scene, cert)
    assert ps.is_deterministic(ps.simulate(proto), proto.declared_target)


def test_consistency_between_decisions():
    scene = _dicke_scene()
    assert locc.reachable(scene).verdict == locc.REFUTED
    iso = locc.weakly_isolated(scene)
    assert iso.isolated is False


def test_isolation_implies_no_reach_or_convert():
    fam = st.ek_stabilizer(2, 4)
    scene = _scene(fam, locc.isolated_witness_ek(2, 4, (1.0, 2.0, 3.0, 4.0)))
    iso = locc.weakly_isolated(scene)
    assert iso.isolated is True
    assert iso.argument == "ek_corner"
    assert locc.reachable(scene).verdict != locc.WITNESSED
    assert locc.convertible_locc1(scene).verdict != locc.WITNESSED
    with pytest.raises(ValueError):
        locc.reachable(scene).isolated


def test_isolated_witness_ek_validation():
    with pytest.raises(ValueError):
        locc.isolated_witness_ek(2, 4, (1.0, 1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        locc.isolated_witness_ek(1, 4, (1.0, 2.0, 3.0, 4.0))
    grams = locc.isolated_witness_ek(3, 4, (0.5,) * 4)
    assert np.array_equal(grams[0].matrix, corner_gram(3, 0.5))


def test_symmetric_ek_witness_is_isolated():
    fam = st.ek_stabilizer(3, 4)
    d = locc.weakly_isolated(_scene(fam, locc.isolated_witness_ek(3, 4, (0.6,) * 4)))
    assert d.isolated is True


@pytest.mark.parametrize("spec", [(2, 1), (0, 0, 0), (3, 1)])
def test_sum_witness_is_isolated(spec):
    bs = ss.BlockSpec(spec)
    symmetric = spec == (3, 1)
    grams = locc.isolated_witness_sums(bs, 4, locc.default_sum_params(bs, 4, symmetric))
    d = locc.weakly_isolated(_scene(st.direct_sum_stabilizer(bs, 4), grams))
    assert d.isolated is True
    assert d.argument == "direct_sum_gconstruction"
    if symmetric:
        assert all(np.array_equal(g.matrix, grams[0].matrix) for g in grams)


def test_sum_witness_validation():
    bs = ss.BlockSpec((2, 1))
    params = locc.default_sum_params(bs, 4)
    params["c"] = [5.0, 5.0]
    with pytest.raises(ValueError):
        locc.isolated_witness_sums(bs, 4, params)
    with pytest.raises(ValueError):
        locc.isolated_witness_sums(ss.BlockSpec((0, 0)), 4)


def test_mub_overlaps():
    for d in (2, 3, 5):
        bases = locc.mub_bases(d)
        for i in range(3):
            np.testing.assert_allclose(bases[i].conj().T @ bases[i], np.eye(d), atol=1e-12)
            for j in range(i + 1, 3):
                np.testing.assert_allclose(np.abs(bases[i].conj().T @ bases[j]) ** 2, 1 / d, atol=1e-12)
    with pytest.raises(ValueError):
        locc.mub_bases(4)


def test_mub_witnesses_are_isolated():
    d2 = locc.weakly_isolated(_scene(st.dicke_stabilizer(5, 2), locc.mub_isolated_witness(2, 5, [1.0, 2.0])))
    assert d2.isolated is True and d2.argument == "mub"
    fam = st.multi_dicke_stabilizer(5, (2, 2, 1))
    d3 = locc.weakly_isolated(_scene(fam, locc.mub_isolated_witness(3, 5, [1.0, 2.0, 3.0])))
    assert d3.isolated is True
    with pytest.raises(ValueError):
        locc.mub_isolated_witness(2, 5, [1.0, 1.0])


def test_commutant_of_two_mub_grams_is_trivial():
    # matrices commuting with both G1 and G2 form the span of the identity
    for d in (2, 3):
        g1, g2 = (g.matrix for g in locc.mub_isolated_witness(d, 5, list(range(1, d + 1)))[:2])
        eye = np.eye(d)
        rows = [np.kron(eye, g) - np.kron(g.T, eye) for g in (g1, g2)]
        null = d * d - np.linalg.matrix_rank(np.vstack(rows), tol=1e-9)
        assert null == 1


def test_zero_sum_distribution_frozen():
    assert locc.zero_sum_distribution(math.pi) == [0.5, 0.5]
    assert locc.zero_sum_distribution(2 * math.pi / 3) == pytest.approx([1 / 3] * 3)
    with pytest.raises(ValueError):
        locc.zero_sum_distribution(0.0)


@settings(max_examples=40, deadline=None)
@given(hst.floats(0.05, 2 * math.pi - 0.05))
def test_zero_sum_distribution_property(alpha):
    try:
        p = locc.zero_sum_distribution(alpha)
    except ValueError:
        return
    assert min(p) >= 0
    assert sum(p) == pytest.approx(1.0)
    assert abs(sum(pk * np.exp(1j * k * alpha) for k, pk in enumerate(p))) < 1e-10


def test_monotone_scaling_and_validation():
    rng = np.random.default_rng(0)
    G = [random_positive(2, rng) for _ in range(3)]
    x = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(3)]
    base = locc.monotone(G, x)
    assert locc.monotone([2.5 * G[0]] + G[1:], x) == pytest.approx(2.5 * base)
    with pytest.raises(ValueError):
        locc.monotone(G, x[:2])
    with pytest.raises(ValueError):
        locc.monotone(G, [np.zeros(2)] + x[1:])


def test_self_conversion_probability_is_one():
    rng = np.random.default_rng(1)
    G = [GramFactor(random_positive(2, rng)) for _ in range(5)]
    assert locc.max_conversion_probability(G, G, 2.0, 2.0) == 1.0


def test_conversion_probability_frozen():
    # single nontrivial site: H = diag(1, 3) against G = 1 gives lambda_max = 3
    G = [np.eye(2)] * 3
    H = [np.diag([1.0, 3.0]), np.eye(2), np.eye(2)]
    assert locc.max_conversion_probability(G, H, 1.0, 1.0) == pytest.approx(1 / 3)


def test_decision_json_carries_certificate():
    doc = locc.convertible_locc1(_dicke_scene()).to_json()
    assert doc["verdict"] == locc.WITNESSED
    assert doc["payload"]["weights"] == pytest.approx([0.5, 0.5])
    assert "grid" in doc["report"]


def test_closure_helpers():
    assert locc.corner_parameter(3, corner_gram(3, 0.7j), 1e-9) == pytest.approx(0.7j)
    assert locc.qutrit4_pattern(np.diag([1.0, 2.0, 3.0]) + np.diag([0.1, 0.1], 1) + np.diag([0.1, 0.1], -1), 1e-9) == 1
    assert locc.qutrit4_pattern(np.eye(3), 1e-9) is None


def test_nonisolated_scene_reports_witness():
    fam = st.ek_stabilizer(2, 3)
    d = locc.weakly_isolated(_scene(fam, [np.eye(3)] * 3))
    assert d.isolated is False
    assert len(d.payload.sites) >= 2
