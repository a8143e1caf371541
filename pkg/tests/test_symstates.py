from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from symloc import symstates as ss
from symloc.tensor_core import PureState, is_symmetric, proportional


def _strings(n: int, d: int, strings) -> np.ndarray:
    t = np.zeros((d,) * n, dtype=complex)
    for s in strings:
        t[tuple(s)] += 1
    return t.reshape(-1)


def _kron_perm_sum(vectors) -> np.ndarray:
    n = len(vectors)
    acc = np.zeros(2**n, dtype=complex)
    for perm in itertools.permutations(range(n)):
        v = np.array([1.0 + 0j])
        for i in perm:
            v = np.kron(v, vectors[i])
        acc += v
    return acc


def test_ek_two_qutrits():
    assert np.array_equal(ss.e_k(2, 2).amps, _strings(2, 3, [(1, 1), (0, 2), (2, 0)]))


def test_ek_counts_compositions():
    s = ss.e_k(3, 4)
    support = [idx for idx in np.ndindex(s.tensor.shape) if s.tensor[idx] != 0]
    assert all(sum(idx) == 3 for idx in support)
    assert len(support) == math.comb(3 + 4 - 1, 4 - 1)
    assert is_symmetric(s)


def test_w_and_ghz():
    assert np.array_equal(ss.w(3).amps, _strings(3, 2, [(0, 0, 1), (0, 1, 0), (1, 0, 0)]))
    assert np.array_equal(ss.ghz(3, 3).amps, _strings(3, 3, [(0, 0, 0), (1, 1, 1), (2, 2, 2)]))
    assert np.array_equal(ss.e_k(1, 3).amps, ss.w(3).amps)


def test_block_spec_orders_blocks():
    spec = ss.BlockSpec((1, 2))
    assert spec.excitations == (2, 1)
    assert spec.d == 5
    assert spec.offsets == (0, 3)
    assert list(spec.levels(1)) == [3, 4]
    with pytest.raises(ValueError):
        ss.BlockSpec((-1,))


def test_direct_sum_is_block_sum():
    spec = ss.BlockSpec((1, 0))
    got = ss.direct_sum_ek(spec, 3)
    expect = _strings(3, 3, [(0, 0, 1), (0, 1, 0), (1, 0, 0), (2, 2, 2)])
    assert np.array_equal(got.amps, expect)


def test_derog_validation():
    with pytest.raises(ValueError):
        ss.DerogSpec(2, (2, 1), (2, 2))
    with pytest.raises(ValueError):
        ss.DerogSpec(0, (1,), (1, 2))
    assert ss.DerogSpec(1, (0, 3), (1, 2)).d == 3


def test_snk_fnk_are_normalized():
    for n, k in ((4, 1), (4, 2), (3, 2)):
        assert ss.snk(n, k).norm() == pytest.approx(1.0)
        assert ss.fnk(n, k).norm() == pytest.approx(1.0)
    assert ss.fnk(4, 1).amplitude([0, 0, 0, 2]) == pytest.approx(0.5)


def test_psi_mu_admissibility():
    assert not ss.psi_mu_admissible(math.sqrt(6))
    assert not ss.psi_mu_admissible(-math.sqrt(2 / 3))
    assert ss.psi_mu_admissible(1.0)
    assert ss.psi_mu_admissible(math.sqrt(2) * 1j)


def test_psi_mu_qubit_polynomial():
    mu = 0.7 - 0.2j
    s = ss.psi_mu(mu)
    coeffs = [math.comb(4, k) * s.amplitude([0] * (4 - k) + [1] * k) for k in range(5)]
    np.testing.assert_allclose(coeffs, [1, 0, math.sqrt(6) * mu, 0, 1], atol=1e-12)


def test_psi_derog_has_no_double_two():
    t = ss.psi_derog_5qutrit().tensor
    for idx in np.ndindex(t.shape):
        if sum(x == 2 for x in idx) >= 2:
            assert t[idx] == 0
    assert t[0, 0, 0, 0, 0] == 1
    assert t[1, 1, 1, 1, 2] == 1


def test_majorana_of_dicke():
    rep = ss.state_to_majorana(ss.dicke(4, 1))
    assert rep.degeneracy == (1, 3)
    assert rep.infinity_mult == 1
    assert ss.state_to_majorana(ss.dicke(4, 2)).degeneracy == (2, 2)


def test_majorana_rejects_bad_input():
    with pytest.raises(ValueError):
        ss.state_to_majorana(PureState.basis(2, [0, 1]))
    with pytest.raises(ValueError):
        ss.state_to_majorana(ss.e_k(2, 3))


@settings(max_examples=30, deadline=None)
@given(hst.integers(2, 5), hst.integers(0, 2**32 - 1))
def test_majorana_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    vectors = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(n)]
    state = PureState(n, 2, _kron_perm_sum(vectors))
    assert proportional(ss.symmetric_from_vectors(vectors), state, 1e-9) is not None
    rep = ss.state_to_majorana(state)
    assert rep.n == n
    assert proportional(ss.majorana_to_state(rep), state, 1e-6) is not None


def test_majorana_json_round_trip():
    rep = ss.state_to_majorana(ss.random_symmetric_qubit_state(4, np.random.default_rng(3)))
    assert ss.MajoranaRep.from_json(rep.to_json()) == rep
