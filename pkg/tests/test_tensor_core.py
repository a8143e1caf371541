from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from symloc.tensor_core import (
    DimensionError,
    GramFactor,
    ProductOp,
    PureState,
    apply_at_site,
    apply_product,
    flat_index,
    is_symmetric,
    local_ranks,
    normalize,
    proportional,
    random_local,
    random_positive,
    random_state,
    reduced_density,
    relative_residual,
    symmetrize,
)


def test_site_zero_is_most_significant_digit():
    assert flat_index(3, [1, 0, 2]) == 1 * 9 + 0 * 3 + 2
    s = PureState.basis(3, [1, 0, 2])
    assert s.tensor[1, 0, 2] == 1.0
    assert s.amplitude([1, 0, 2]) == 1.0


def test_state_validation():
    with pytest.raises(ValueError):
        PureState(0, 2, [1.0])
    with pytest.raises(ValueError):
        PureState(2, 2, [1.0, 0.0, 0.0])
    with pytest.raises(DimensionError):
        PureState.from_tensor(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        PureState.basis(2, [0, 1]) + PureState.basis(3, [0, 1])


def test_apply_product_matches_dense_kron():
    rng = np.random.default_rng(1)
    state = random_state(3, 3, rng)
    op = ProductOp(tuple(random_local(3, rng) for _ in range(3)), 0.5 - 1j)
    np.testing.assert_allclose(apply_product(state, op).amps, op.dense() @ state.amps, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(hst.integers(1, 4), hst.integers(2, 3), hst.integers(0, 2**32 - 1))
def test_apply_at_site_agrees_with_product(n, d, seed):
    rng = np.random.default_rng(seed)
    state = random_state(n, d, rng)
    site = int(rng.integers(n))
    a = random_local(d, rng)
    via_product = apply_product(state, ProductOp.at_sites(n, d, {site: a}))
    np.testing.assert_allclose(apply_at_site(state, a, site).amps, via_product.amps, atol=1e-12)


def test_compose_and_power():
    rng = np.random.default_rng(2)
    a = ProductOp(tuple(random_local(2, rng) for _ in range(3)))
    b = ProductOp(tuple(random_local(2, rng) for _ in range(3)))
    np.testing.assert_allclose((a @ b).dense(), a.dense() @ b.dense(), atol=1e-10)
    np.testing.assert_allclose(a.power(3).dense(), np.linalg.matrix_power(a.dense(), 3), rtol=1e-9, atol=1e-9)


def test_proportional_and_residual():
    rng = np.random.default_rng(3)
    s = random_state(3, 2, rng)
    lam = proportional(s.scaled(2 - 1j), s)
    assert lam == pytest.approx(2 - 1j)
    t = s + PureState.basis(2, [0, 0, 0]).scaled(0.1)
    assert proportional(t, s, 1e-9) is None
    assert relative_residual(s.scaled(3j), s) < 1e-14


def test_symmetrize_and_ranks():
    s = PureState.basis(2, [0, 0, 1])
    sym = symmetrize(s)
    assert is_symmetric(sym)
    assert not is_symmetric(s)
    assert local_ranks(sym) == [2, 2, 2]
    assert local_ranks(PureState.basis(3, [2, 2])) == [1, 1]


def test_reduced_density_is_normalized():
    rng = np.random.default_rng(4)
    rho = reduced_density(random_state(4, 3, rng), 2)
    assert np.trace(rho).real == pytest.approx(1.0)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-14)


def test_normalize_rejects_zero():
    with pytest.raises(ValueError):
        normalize(PureState(2, 2, np.zeros(4)))


def test_gram_factor_roots():
    rng = np.random.default_rng(5)
    G = GramFactor(random_positive(3, rng))
    g = G.sqrt()
    np.testing.assert_allclose(g.conj().T @ g, G.matrix, atol=1e-12)
    np.testing.assert_allclose(G.inverse_sqrt() @ g, np.eye(3), atol=1e-12)


def test_gram_factor_rejects_bad_input():
    with pytest.raises(ValueError):
        GramFactor(np.array([[1, 1j], [0, 1]]))
    with pytest.raises(ValueError):
        GramFactor(np.diag([1.0, 0.0]))
    assert GramFactor(np.diag([1.0, 0.0]), definite=False).d == 2
