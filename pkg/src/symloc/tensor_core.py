"""Dense state and operator arithmetic over (C^d)^{\\otimes n}.

States are stored as flat complex vectors of length d**n.  Site 0 is the
most significant digit of the flat index, so ``amps.reshape((d,) * n)``
gives a tensor whose axis ``i`` is site ``i``.  States are kept
unnormalized unless :func:`normalize` is called explicitly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9
COMPLETENESS_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when shapes of states and operators do not agree."""


def _as_complex_array(values, shape: tuple[int, ...] | None = None) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if shape is not None and arr.shape != shape:
        raise DimensionError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    n: int
    d: int
    amps: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        object.__setattr__(self, "amps", _as_complex_array(np.ravel(self.amps), (self.d**self.n,)))

    @classmethod
    def from_tensor(cls, tensor: np.ndarray, normalized: bool = False) -> PureState:
        tensor = np.asarray(tensor)
        n = tensor.ndim
        d = tensor.shape[0]
        if any(s != d for s in tensor.shape):
            raise DimensionError("all tensor axes must have the same length")
        return cls(n=n, d=d, amps=tensor.reshape(-1), normalized=normalized)

    @classmethod
    def basis(cls, d: int, digits: Sequence[int]) -> PureState:
        amps = np.zeros(d ** len(digits), dtype=complex)
        amps[flat_index(d, digits)] = 1.0
        return cls(n=len(digits), d=d, amps=amps)

    @property
    def tensor(self) -> np.ndarray:
        return self.amps.reshape((self.d,) * self.n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_zero(self) -> bool:
        return not np.any(self.amps)

    def __add__(self, other: PureState) -> PureState:
        _check_same_space(self, other)
        return PureState(self.n, self.d, self.amps + other.amps)

    def __sub__(self, other: PureState) -> PureState:
        _check_same_space(self, other)
        return PureState(self.n, self.d, self.amps - other.amps)

    def scaled(self, c: complex) -> PureState:
        return PureState(self.n, self.d, c * self.amps)

    def __rmul__(self, c: complex) -> PureState:
        return self.scaled(c)

    def amplitude(self, digits: Sequence[int]) -> complex:
        return complex(self.amps[flat_index(self.d, digits)])


def flat_index(d: int, digits: Sequence[int]) -> int:
    idx = 0
    for digit in digits:
        if not 0 <= digit < d:
            raise DimensionError(f"digit {digit} out of range for d={d}")
        idx = idx * d + int(digit)
    return idx


def _check_same_space(a: PureState, b: PureState) -> None:
    if (a.n, a.d) != (b.n, b.d):
        raise DimensionError(f"state spaces differ: (n={a.n}, d={a.d}) vs (n={b.n}, d={b.d})")


def as_local(op, d: int | None = None) -> np.ndarray:
    """Validate a local operator and return it as a read-only complex matrix."""
    arr = np.array(op, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"local operator must be square, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise DimensionError(f"local operator has dimension {arr.shape[0]}, expected {d}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProductOp:
    """scalar * ops[0] (x) ... (x) ops[n-1]."""

    ops: tuple[np.ndarray, ...]
    scalar: complex = 1.0

    def __post_init__(self) -> None:
        if len(self.ops) == 0:
            raise ValueError("ProductOp needs at least one site")
        d = np.asarray(self.ops[0]).shape[0]
        object.__setattr__(self, "ops", tuple(as_local(o, d) for o in self.ops))
        object.__setattr__(self, "scalar", complex(self.scalar))
        if not np.isfinite(self.scalar):
            raise ValueError("non-finite scalar")

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def d(self) -> int:
        return self.ops[0].shape[0]

    @classmethod
    def identity(cls, n: int, d: int) -> ProductOp:
        return cls(tuple(np.eye(d) for _ in range(n)))

    @classmethod
    def uniform(cls, op, n: int, scalar: complex = 1.0) -> ProductOp:
        return cls(tuple(op for _ in range(n)), scalar)

    @classmethod
    def at_sites(cls, n: int, d: int, placed: dict[int, np.ndarray], scalar: complex = 1.0) -> ProductOp:
        ops = [placed.get(i, np.eye(d)) for i in range(n)]
        return cls(tuple(ops), scalar)

    def compose(self, other: ProductOp) -> ProductOp:
        """self after other."""
        if (self.n, self.d) != (other.n, other.d):
            raise DimensionError("cannot compose product operators of different shape")
        return ProductOp(tuple(a @ b for a, b in zip(self.ops, other.ops)), self.scalar * other.scalar)

    def __matmul__(self, other: ProductOp) -> ProductOp:
        return self.compose(other)

    def power(self, k: int) -> ProductOp:
        ops = tuple(np.linalg.matrix_power(o, k) for o in self.ops)
        return ProductOp(ops, self.scalar**k)

    def dense(self) -> np.ndarray:
        out = np.array([[self.scalar]], dtype=complex)
        for o in self.ops:
            out = np.kron(out, o)
        return out


def _contract_site(tensor: np.ndarray, op: np.ndarray, site: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, tensor, axes=([1], [site])), 0, site)


def apply_product(state: PureState, op: ProductOp) -> PureState:
    if op.n != state.n or op.d != state.d:
        raise DimensionError(f"operator (n={op.n}, d={op.d}) does not match state (n={state.n}, d={state.d})")
    t = state.tensor
    eye = np.eye(state.d)
    for site, local in enumerate(op.ops):
        if np.array_equal(local, eye):
            continue
        t = _contract_site(t, local, site)
    return PureState(state.n, state.d, op.scalar * t.reshape(-1))


def apply_at_site(state: PureState, op, site: int) -> PureState:
    if not 0 <= site < state.n:
        raise IndexError(f"site {site} out of range for n={state.n}")
    local = as_local(op, state.d)
    return PureState(state.n, state.d, _contract_site(state.tensor, local, site).reshape(-1))


def proportional(a: PureState, b: PureState, tol: float = DEFAULT_TOL) -> complex | None:
    """Least-squares scalar with a ~ lam * b, or None if the residual exceeds tol*|a|."""
    _check_same_space(a, b)
    bb = np.vdot(b.amps, b.amps).real
    if bb == 0:
        raise ValueError("reference state is zero")
    lam = np.vdot(b.amps, a.amps) / bb
    resid = np.linalg.norm(a.amps - lam * b.amps)
    if resid <= tol * np.linalg.norm(a.amps):
        return complex(lam)
    return None


def relative_residual(a: PureState, b: PureState) -> float:
    """min_lam |a - lam b| / |a|; zero when a is zero and b is not."""
    _check_same_space(a, b)
    na = np.linalg.norm(a.amps)
    if na == 0:
        return 0.0
    bb = np.vdot(b.amps, b.amps).real
    lam = np.vdot(b.amps, a.amps) / bb
    return float(np.linalg.norm(a.amps - lam * b.amps) / na)


def symmetrize(state: PureState) -> PureState:
    t = state.tensor
    acc = np.zeros_like(t)
    perms = list(itertools.permutations(range(state.n)))
    for perm in perms:
        acc = acc + np.transpose(t, perm)
    return PureState(state.n, state.d, acc.reshape(-1) / len(perms))


def is_symmetric(state: PureState, tol: float = DEFAULT_TOL) -> bool:
    t = state.tensor
    scale = tol * max(np.linalg.norm(state.amps), 1e-300)
    for i in range(state.n - 1):
        perm = list(range(state.n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        if np.linalg.norm(np.transpose(t, perm) - t) > scale:
            return False
    return True


def _site_matrix(state: PureState, site: int) -> np.ndarray:
    return np.moveaxis(state.tensor, site, 0).reshape(state.d, -1)


def reduced_density(state: PureState, site: int) -> np.ndarray:
    m = _site_matrix(state, site)
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def local_ranks(state: PureState, tol: float = DEFAULT_TOL) -> list[int]:
    ranks = []
    for site in range(state.n):
        sv = np.linalg.svd(_site_matrix(state, site), compute_uv=False)
        ranks.append(int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0)
    return ranks


def normalize(state: PureState) -> PureState:
    nrm = state.norm()
    if nrm == 0:
        raise ValueError("cannot normalize the zero state")
    return PureState(state.n, state.d, state.amps / nrm, normalized=True)


@dataclass(frozen=True, eq=False)
class GramFactor:
    """Positive Hermitian site operator G = g^dagger g."""

    matrix: np.ndarray
    definite: bool = True
    tol: float = DEFAULT_TOL
    d: int = field(init=False)

    def __post_init__(self) -> None:
        m = as_local(self.matrix)
        scale = max(np.linalg.norm(m), 1e-300)
        if np.linalg.norm(m - m.conj().T) > self.tol * scale:
            raise ValueError("gram matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        evals = np.linalg.eigvalsh(m)
        if self.definite and evals[0] <= self.tol * scale:
            raise ValueError(f"gram matrix is not strictly positive (min eigenvalue {evals[0]:.3e})")
        if evals[0] < -self.tol * scale:
            raise ValueError(f"gram matrix is not positive semidefinite (min eigenvalue {evals[0]:.3e})")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "d", m.shape[0])

    @classmethod
    def from_factor(cls, g, definite: bool = True) -> GramFactor:
        g = as_local(g)
        return cls(g.conj().T @ g, definite=definite)

    @classmethod
    def identity(cls, d: int) -> GramFactor:
        return cls(np.eye(d))

    def sqrt(self) -> np.ndarray:
        """Hermitian positive square root, a valid choice of g."""
        evals, vecs = np.linalg.eigh(self.matrix)
        return (vecs * np.sqrt(np.clip(evals, 0, None))) @ vecs.conj().T

    def inverse_sqrt(self) -> np.ndarray:
        evals, vecs = np.linalg.eigh(self.matrix)
        return (vecs / np.sqrt(evals)) @ vecs.conj().T


def grams_of(ops: Iterable[np.ndarray]) -> list[GramFactor]:
    return [GramFactor.from_factor(g) for g in ops]


def random_state(n: int, d: int, rng: np.random.Generator) -> PureState:
    return PureState(n, d, rng.normal(size=d**n) + 1j * rng.normal(size=d**n))


def random_local(d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(random_local(d, rng))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_positive(d: int, rng: np.random.Generator, floor: float = 0.1) -> np.ndarray:
    a = random_local(d, rng)
    return a.conj().T @ a + floor * np.eye(d)
