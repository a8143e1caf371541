from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from symloc import locc
from symloc import qutrit_derog as qd
from symloc import symstates as ss
from symloc.quasicomm import is_defective
from symloc.stabilizer import qutrit4_symmetry_family
from symloc.tensor_core import ProductOp, apply_product, proportional

TYPE2_IDS = ("F41", "S42+F41", "1^4+F41", "1^4+S42+F41", "S43+F41")


@pytest.mark.parametrize("n", [3, 4, 5])
def test_representative_witnesses_stabilize(n):
    for rep in qd.representatives(n):
        assert rep.witness_residual() <= 1e-12, rep.id
        assert is_defective(rep.B_matrix) == (rep.B_matrix is not qd.B1)


def test_representative_ids():
    assert [r.id for r in qd.representatives(3)] == list("abcde")
    assert [r.type_tag for r in qd.representatives(4)] == ["type1", "type1", "type2", "type2", "type1"]
    with pytest.raises(ValueError):
        qd.representatives(6)


@pytest.mark.parametrize("case", ["d", "e", "f", *TYPE2_IDS])
def test_slocc_reach_random(case):
    rng = np.random.default_rng(3)
    n = 3 if case in "def" else 4
    reps = {r.id: r for r in qd.type2_candidates(n)}
    for _ in range(10):
        b = qd.random_admissible_b(case, rng)
        assert qd.reach_case(b) == case
        A = qd.slocc_reach(reps[case], b)
        assert qd.reach_residual(reps[case].state, A, qd.psi_type2(b)) <= 1e-9
        assert A[1, 0] == A[2, 0] == A[2, 1] == 0


def test_slocc_reach_by_id():
    b = [1.0, 2.0, 0.5, 0.0, 0.0, 1.5]
    A = qd.slocc_reach("S42+F41", b)
    assert A[1, 1] == pytest.approx(math.sqrt(0.5))


def test_slocc_reach_errors():
    with pytest.raises(ValueError, match="selects|select"):
        qd.slocc_reach("F41", [1, 1, 1, 0, 0, 1])
    with pytest.raises(ValueError, match="F coefficient"):
        qd.reach_case([1, 1, 1, 1, 1, 0])
    with pytest.raises(ValueError):
        qd.random_admissible_b("nope", np.random.default_rng(0))


def test_special_quartic_branch():
    b4, b3 = 2.0, 1.0 + 1.0j
    b2 = math.sqrt(6) * b3**2 / (4 * b4)
    assert qd.reach_case([0, 0, b2, b3, b4, 1]) == "1^4+F41"
    assert qd.reach_case([0, 0, b2 + 0.1, b3, b4, 1]) == "1^4+S42+F41"


@settings(max_examples=25, deadline=None)
@given(
    hst.lists(hst.complex_numbers(min_magnitude=0.3, max_magnitude=3, allow_nan=False, allow_infinity=False),
              min_size=6, max_size=6)
)
def test_type1_reach_generic(a):
    target = qd.psi_type1(a)
    try:
        rid, mu, A = qd.type1_reach(a)
    except ValueError:
        # near-degenerate roots are outside the generic stratum
        return
    src = qd.type1_rep_state(rid, 4, mu)
    assert qd.reach_residual(src, A, target) <= 1e-7


def test_type1_strata():
    # |0000> + |1111> + |2222>: roots are the fourth roots of -1, generic
    rid, mu, A = qd.type1_reach([1, 0, 0, 0, 1, 1])
    assert rid == "psi_mu"
    assert qd.reach_residual(qd.type1_rep_state(rid, 4, mu), A, qd.psi_type1([1, 0, 0, 0, 1, 1])) <= 1e-8
    rid, mu, _ = qd.type1_reach([0, 0, 1, 0, 0, 1])
    assert rid == "S42+2^4" and mu is None
    rid, _, _ = qd.type1_reach([0, 1, 0, 0, 0, 1])
    assert rid == "S41+2^4"


def test_three_qutrit_type1():
    for a, rid in (([1, 0, 0, 0, 1], "a"), ([1, 0, 0, 1, 1], "b"), ([0, 1, 0, 0, 1], "c")):
        got, _, A = qd.type1_reach(a)
        assert got == rid
        assert qd.reach_residual(qd.type1_rep_state(rid, 3), A, qd.psi_type1(a)) <= 1e-8


def test_type1_reach_errors():
    with pytest.raises(ValueError):
        qd.type1_reach([1, 0, 0, 0, 1, 0])
    with pytest.raises(ValueError):
        qd.type1_reach([1, 1])


def test_j_invariants_and_symmetry_counts():
    assert qd.j_invariant(ss.psi_mu(0)) == pytest.approx(1728)
    assert qd.j_invariant(ss.psi_mu(math.sqrt(6))) == pytest.approx(1728)
    assert abs(qd.j_invariant(ss.psi_mu(math.sqrt(2) * 1j))) < 1e-6
    assert qd.qubit_symmetry_count(ss.psi_mu(0)) == 8
    assert qd.qubit_symmetry_count(ss.psi_mu(math.sqrt(2) * 1j)) == 12


def test_root_degeneracy_special_mu():
    special = ss.psi_mu(math.sqrt(2 / 3))
    assert qd.root_degeneracy(special) == (2, 2)
    assert qd.root_degeneracy(qd.type1_rep_state("S42+2^4", 4)) == (2, 2)
    assert qd.is_mu_special(math.sqrt(2) * 1j)
    assert not qd.is_mu_special(math.sqrt(2 / 3))


def test_symmetry_structure():
    rng = np.random.default_rng(1)
    for rep in qd.representatives(4):
        fam = qutrit4_symmetry_family(rep.id, rep.mu)
        for _ in range(5):
            elem = fam.random_element(rng)
            assert qd.symmetry_structure_check(rep, elem.op.ops)
    full = np.ones((3, 3))
    assert not qd.symmetry_structure_check(qd.representatives(4)[0], [full] * 4)
    with pytest.raises(ValueError):
        qd.symmetry_structure_check(qd.representatives(3)[0], [np.eye(3)] * 3)


def test_fixture_grams_are_positive():
    for g in qd.isolation_fixture_grams("psi_mu"):
        assert np.linalg.eigvalsh(g.matrix)[0] > 0
    with pytest.raises(ValueError):
        qd.isolation_fixture_grams("a")


@pytest.mark.parametrize("idx", range(5))
def test_isolation_fixtures(idx):
    rep = qd.representatives(4)[idx]
    d = locc.weakly_isolated(qd.isolation_scene(rep))
    assert d.isolated is True
    expected = "diagonal" if rep.id == "0^4+S42+2^4" else "qutrit4_patterns"
    assert d.argument == expected


@pytest.mark.parametrize("idx", range(5))
def test_reach_convert_fixtures(idx):
    rep = qd.representatives(4)[idx]
    for fx in qd.reach_convert_fixtures(rep):
        e = fx.expected
        assert locc.reachable(fx.scene, [e["symmetry"]]).verdict == e["reach"]
        conv = locc.convertible_locc1(fx.scene, [e["symmetry"]], acting_sites=[e["acting_site"]])
        assert conv.verdict == e["convert"]
        assert np.allclose(conv.payload.weights, e["convert_weights"], atol=1e-12)
        if "convert_target" in e:
            assert np.abs(conv.payload.target_gram - e["convert_target"]).max() <= 1e-12


def test_psi_derog_report():
    d = qd.psi_derog_isolation_report(samples=10)
    assert d.isolated is True and d.argument == "psi_derog_census"
    assert d.report["census"]["min_defective"] >= 2
    assert d.report["census"]["max_residual"] <= 1e-10


@pytest.mark.parametrize(
    "spec",
    [ss.DerogSpec(1, (2, 1), (2, 2)), ss.DerogSpec(1, (1, 2), (3, 3)), ss.DerogSpec(2, (3, 0), (3, 3))],
)
def test_multicopy_reassembles(spec):
    outer, inner = qd.multicopy_factorization(spec)
    back = qd.reassemble(outer, inner)
    assert proportional(ss.derog_ek(spec), back) is not None


def test_multicopy_needs_equal_blocks():
    with pytest.raises(ValueError):
        qd.multicopy_factorization(ss.DerogSpec(1, (2, 1), (2, 3)))


def test_derog_eg2_is_not_a_single_block_image():
    eg2 = qd.derog_eg2_state()
    assert eg2.d == 4 and eg2.n == 3
    rng = np.random.default_rng(5)
    for k in range(3):
        ek = ss.e_k(k, 3)
        t = np.zeros((4,) * 3, dtype=complex)
        t[(slice(0, ek.d),) * 3] = ek.tensor
        src = type(ek).from_tensor(t)
        for _ in range(20):
            A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            assert proportional(eg2, apply_product(src, ProductOp.uniform(A, 3))) is None


@settings(max_examples=30, deadline=None)
@given(hst.integers(0, 2**31 - 1))
def test_jordan_type_is_similarity_invariant(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    if np.linalg.cond(A) > 1e3:
        return
    Ainv = np.linalg.inv(A)
    for B in (qd.B1, qd.B2, qd.B_DEROG):
        assert is_defective(A @ B @ Ainv) == is_defective(B)
