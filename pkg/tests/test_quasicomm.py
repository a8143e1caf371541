from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from symloc.quasicomm import (
    factor_unitary_similarity,
    is_defective,
    is_diagonalizable,
    lemma4_characterize,
    corner_factor,
    lemma4_family,
    corner_gram,
    phase_classes,
    positive_solution_space,
    quasi_commutation_residual,
    quasi_commutes,
)
from symloc.tensor_core import random_positive, random_unitary

seeds = hst.integers(0, 2**32 - 1)


def test_quasi_commutes_scaled_unitary():
    rng = np.random.default_rng(0)
    g = np.linalg.cholesky(random_positive(3, rng)).conj().T
    u = random_unitary(3, rng)
    s = 1.7 * np.linalg.inv(g) @ u @ g
    lam = quasi_commutes(s, g.conj().T @ g)
    assert lam == pytest.approx(1.7**2)
    assert quasi_commutation_residual(s, g.conj().T @ g) < 1e-12


def test_quasi_commutes_rejects():
    G = np.diag([1.0, 2.0])
    assert quasi_commutes(np.array([[1, 1], [0, 1]]), G) is None
    assert quasi_commutation_residual(np.array([[1, 1], [0, 1]]), G) > 0.1
    with pytest.raises(ValueError):
        quasi_commutes(np.eye(2), np.zeros((2, 2)))


@settings(max_examples=30, deadline=None)
@given(hst.integers(1, 4), hst.complex_numbers(min_magnitude=0.1, max_magnitude=3), hst.floats(0, 2 * np.pi))
def test_corner_family_quasi_commutes(k, a, theta):
    x = np.exp(1j * theta)
    m = lemma4_family(k, a, x)
    assert quasi_commutes(m, corner_gram(k, a), 1e-9) is not None
    assert lemma4_characterize(k, a, 2.5 * m)


def test_corner_corner_perturbation_breaks():
    k, a, x = 3, 0.8, np.exp(0.4j)
    m = lemma4_family(k, a, x)
    m[k - 1, k] += 1e-6
    assert quasi_commutes(m, corner_gram(k, a), 1e-9) is None
    assert not lemma4_characterize(k, a, m, 1e-9)


def test_corner_gram_is_factor_square():
    g = corner_factor(2, 0.5j)
    assert np.array_equal(corner_gram(2, 0.5j), g.conj().T @ g)
    with pytest.raises(ValueError):
        lemma4_family(2, 1.0, 1.5)


@settings(max_examples=30, deadline=None)
@given(hst.integers(2, 4), seeds)
def test_solution_space_contains_similarity_gram(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = np.linalg.inv(a) @ random_unitary(d, rng) @ a
    space = positive_solution_space(b)
    assert space is not None
    assert space.contains(a.conj().T @ a, 1e-8)
    sample = space.sample(rng)
    assert quasi_commutes(b, sample, 1e-8) is not None


@settings(max_examples=30, deadline=None)
@given(hst.integers(2, 4), seeds)
def test_defective_matrices_have_no_positive_solution(d, seed):
    rng = np.random.default_rng(seed)
    j = np.diag(rng.normal(size=d) + 1j * rng.normal(size=d))
    j[1, 1] = j[0, 0]
    j[0, 1] = 1.0
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = a @ j @ np.linalg.inv(a)
    assert is_defective(b)
    assert positive_solution_space(b) is None


def test_defective_and_diagonalizable():
    assert is_defective(np.array([[1, 1], [0, 1]]))
    assert not is_defective(np.eye(3))
    assert not is_defective(np.diag([1, 2, 3]))
    assert is_diagonalizable(np.diag([1, 2]))
    assert is_diagonalizable(np.array([[1, 1], [0, 1]])) is False


def test_phase_classes_group_equal_phases():
    assert phase_classes(np.array([0.0, np.pi, 2 * np.pi, np.pi + 1e-12])) == [[0, 2], [1, 3]]


def test_unitary_similarity_reconstructs():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 3))
    b = 2.0 * np.linalg.inv(a) @ random_unitary(3, rng) @ a
    fac = factor_unitary_similarity(b)
    np.testing.assert_allclose(fac.reconstruct(), b, atol=1e-9)
    assert factor_unitary_similarity(np.diag([1.0, 2.0])) is None
    with pytest.raises(ValueError):
        factor_unitary_similarity(np.zeros((2, 2)))
