"""Constructors for the named symmetric states and the Majorana round trip."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor_core import DEFAULT_TOL, PureState, is_symmetric


def _distinct_permutations(items: Sequence[int]) -> set[tuple[int, ...]]:
    return set(itertools.permutations(items))


def _from_strings(n: int, d: int, strings, coeff: complex = 1.0) -> PureState:
    t = np.zeros((d,) * n, dtype=complex)
    for s in strings:
        t[tuple(s)] += coeff
    return PureState.from_tensor(t)


def _strings_with_sum(n: int, total: int, cap: int):
    """All (i_1..i_n) with 0 <= i_j <= cap and sum total."""
    if n == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(cap, total) + 1):
        for rest in _strings_with_sum(n - 1, total - first, cap):
            yield (first,) + rest


def e_k(k: int, n: int) -> PureState:
    """|E_k>: sum of all basis strings over k+1 levels whose digits add to k."""
    if k < 0 or n < 1:
        raise ValueError("need k >= 0 and n >= 1")
    d = max(k + 1, 2)
    return _from_strings(n, d, _strings_with_sum(n, k, k))


@dataclass(frozen=True)
class BlockSpec:
    """Jordan block excitations (k_1, ..., k_K), kept in non-increasing order."""

    excitations: tuple[int, ...]

    def __post_init__(self) -> None:
        ks = tuple(int(k) for k in self.excitations)
        if len(ks) < 1 or any(k < 0 for k in ks):
            raise ValueError("need at least one block and nonnegative excitations")
        object.__setattr__(self, "excitations", tuple(sorted(ks, reverse=True)))

    @property
    def d(self) -> int:
        return sum(k + 1 for k in self.excitations)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for k in self.excitations:
            out.append(acc)
            acc += k + 1
        return tuple(out)

    def levels(self, block: int) -> range:
        off = self.offsets[block]
        return range(off, off + self.excitations[block] + 1)


def direct_sum_ek(spec: BlockSpec, n: int) -> PureState:
    d = spec.d
    if d < 2:
        raise ValueError("a single k=0 block gives a one-dimensional space")
    t = np.zeros((d,) * n, dtype=complex)
    for k, off in zip(spec.excitations, spec.offsets):
        for s in _strings_with_sum(n, k, k):
            t[tuple(off + i for i in s)] += 1
    return PureState.from_tensor(t)


@dataclass(frozen=True)
class DerogSpec:
    """Excitation number k, per-block occupations n_b and block sizes k_b + 1."""

    k: int
    occupations: tuple[int, ...]
    block_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "occupations", tuple(int(x) for x in self.occupations))
        object.__setattr__(self, "block_sizes", tuple(int(x) for x in self.block_sizes))
        if len(self.occupations) != len(self.block_sizes):
            raise ValueError("one occupation per block required")
        if any(x < 0 for x in self.occupations) or any(s < 1 for s in self.block_sizes):
            raise ValueError("occupations must be >= 0 and block sizes >= 1")
        if self.n < 1:
            raise ValueError("at least one site must be occupied")
        for nb, size in zip(self.occupations, self.block_sizes):
            if nb > 0 and size - 1 < self.k:
                raise ValueError(f"block of size {size} cannot hold {self.k} excitations but has occupation {nb}")

    @property
    def n(self) -> int:
        return sum(self.occupations)

    @property
    def d(self) -> int:
        return sum(self.block_sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.cumsum((0,) + self.block_sizes[:-1]))


def derog_ek(spec: DerogSpec) -> PureState:
    n, d = spec.n, spec.d
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    labels = [b for b, nb in enumerate(spec.occupations) for _ in range(nb)]
    caps = [size - 1 for size in spec.block_sizes]
    t = np.zeros((d,) * n, dtype=complex)
    for assign in _distinct_permutations(labels):
        for exc in _strings_with_sum(n, spec.k, spec.k):
            if any(e > caps[b] for e, b in zip(exc, assign)):
                continue
            t[tuple(spec.offsets[b] + e for b, e in zip(assign, exc))] += 1
    return PureState.from_tensor(t)


def multi_dicke(n: int, occupations: Sequence[int]) -> PureState:
    """Equal superposition of strings with occupations[l] digits equal to l."""
    if sum(occupations) != n:
        raise ValueError("occupations must add up to n")
    digits = [lvl for lvl, c in enumerate(occupations) for _ in range(c)]
    return _from_strings(n, max(len(occupations), 2), _distinct_permutations(digits))


def dicke(n: int, k: int) -> PureState:
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return multi_dicke(n, (n - k, k))


def w(n: int) -> PureState:
    return dicke(n, 1)


def ghz(n: int, d: int = 2) -> PureState:
    return _from_strings(n, d, [(i,) * n for i in range(d)])


def snk(n: int, k: int, d: int = 3) -> PureState:
    """Normalized symmetric state with k ones and n-k zeros."""
    return multi_dicke(n, (n - k, k) + (0,) * (d - 2)).scaled(1 / math.sqrt(math.comb(n, k)))


def fnk(n: int, k: int, d: int = 3) -> PureState:
    """Normalized symmetric state with k twos and n-k zeros."""
    if d < 3:
        raise ValueError("F states need a third level")
    return multi_dicke(n, (n - k, 0, k) + (0,) * (d - 3)).scaled(1 / math.sqrt(math.comb(n, k)))


def product_string(n: int, level: int, d: int = 3) -> PureState:
    return PureState.basis(d, [level] * n)


PSI_MU_EXCLUDED = (0.0, math.sqrt(2 / 3), -math.sqrt(2 / 3), math.sqrt(6), -math.sqrt(6))


def psi_mu(mu: complex) -> PureState:
    return product_string(4, 0) + snk(4, 2).scaled(mu) + product_string(4, 1) + product_string(4, 2)


def psi_mu_admissible(mu: complex, tol: float = DEFAULT_TOL) -> bool:
    return all(abs(mu - bad) > tol for bad in PSI_MU_EXCLUDED)


# block 1 is level 0 (k=0), block 2 is levels 1..2 (k=1)
PSI_DEROG_BLOCKS = (1, 2)


def psi_derog_5qutrit() -> PureState:
    parts = [
        DerogSpec(0, (5, 0), PSI_DEROG_BLOCKS),
        DerogSpec(0, (3, 2), PSI_DEROG_BLOCKS),
        DerogSpec(0, (2, 3), PSI_DEROG_BLOCKS),
        DerogSpec(1, (0, 5), PSI_DEROG_BLOCKS),
    ]
    out = derog_ek(parts[0])
    for spec in parts[1:]:
        out = out + derog_ek(spec)
    return out


# Majorana representation ----------------------------------------------------

@dataclass(frozen=True)
class MajoranaRep:
    """Finite roots as (alpha, beta, multiplicity) plus the multiplicity at infinity.

    A root (alpha, beta) stands for cos(alpha)|0> + e^{i beta} sin(alpha)|1>;
    the point at infinity is |1>, i.e. alpha = pi/2.
    """

    roots: tuple[tuple[float, float, int], ...]
    infinity_mult: int = 0

    @property
    def n(self) -> int:
        return sum(m for _, _, m in self.roots) + self.infinity_mult

    def points(self) -> list[tuple[float, float]]:
        pts = [(a, b) for a, b, m in self.roots for _ in range(m)]
        return pts + [(math.pi / 2, 0.0)] * self.infinity_mult

    @property
    def degeneracy(self) -> tuple[int, ...]:
        mults = [m for _, _, m in self.roots]
        if self.infinity_mult:
            mults.append(self.infinity_mult)
        return tuple(sorted(mults))

    @property
    def diversity(self) -> int:
        return len(self.degeneracy)

    def vectors(self) -> list[np.ndarray]:
        return [root_vector(a, b) for a, b in self.points()]

    def to_json(self) -> dict:
        return {
            "roots": [{"alpha": a, "beta": b, "mult": m} for a, b, m in self.roots],
            "infinity_mult": self.infinity_mult,
        }

    @classmethod
    def from_json(cls, doc: dict) -> MajoranaRep:
        roots = tuple((float(r["alpha"]), float(r["beta"]), int(r["mult"])) for r in doc["roots"])
        return cls(roots, int(doc.get("infinity_mult", 0)))


def root_vector(alpha: float, beta: float) -> np.ndarray:
    return np.array([math.cos(alpha), np.exp(1j * beta) * math.sin(alpha)], dtype=complex)


def vector_angles(v: np.ndarray) -> tuple[float, float]:
    """(alpha, beta) of the ray through v, with beta in [0, 2pi)."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    alpha = math.acos(min(1.0, abs(v[0])))
    if abs(v[0]) < 1e-15 or abs(v[1]) < 1e-15:
        return alpha, 0.0
    beta = float(np.angle(v[1] / v[0])) % (2 * math.pi)
    if 2 * math.pi - beta < 1e-12:
        beta = 0.0
    return alpha, beta


def symmetric_from_vectors(vectors: Sequence[np.ndarray]) -> PureState:
    """Permutation sum of the product of the given qubit vectors."""
    n = len(vectors)
    # elementary symmetric polynomials e_k of the |1> components against |0> components
    e = np.array([1.0 + 0j])
    for v in vectors:
        e = np.convolve(e, np.array([v[0], v[1]], dtype=complex))
    t = np.zeros((2,) * n, dtype=complex)
    for idx in itertools.product((0, 1), repeat=n):
        k = sum(idx)
        t[idx] = math.factorial(k) * math.factorial(n - k) * e[k]
    return PureState.from_tensor(t)


def majorana_to_state(rep: MajoranaRep) -> PureState:
    return symmetric_from_vectors(rep.vectors())


def _chordal(u: np.ndarray, v: np.ndarray) -> float:
    ov = abs(np.vdot(u, v)) ** 2 / (np.vdot(u, u).real * np.vdot(v, v).real)
    return 2.0 * math.sqrt(max(0.0, 1.0 - ov))


def cluster_rays(vectors: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> list[list[int]]:
    """Single-linkage clustering of rays; a merge into a cluster of size m
    is allowed when the linking distance is at most 10 * tol**(1/m)."""
    clusters = [[i] for i in range(len(vectors))]
    dist = np.array([[_chordal(a, b) for b in vectors] for a in vectors])
    while len(clusters) > 1:
        best = None
        for i, j in itertools.combinations(range(len(clusters)), 2):
            link = min(dist[a, b] for a in clusters[i] for b in clusters[j])
            size = len(clusters[i]) + len(clusters[j])
            if link <= 10 * tol ** (1 / size) and (best is None or link < best[0]):
                best = (link, i, j)
        if best is None:
            break
        _, i, j = best
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]
    return clusters


def state_to_majorana(state: PureState, tol: float = DEFAULT_TOL) -> MajoranaRep:
    if state.d != 2:
        raise ValueError("Majorana representation needs qubits")
    if not is_symmetric(state, max(tol, 1e-12)):
        raise ValueError("state is not permutation symmetric")
    n = state.n
    coeffs = np.array(
        [math.comb(n, k) * state.amplitude([0] * (n - k) + [1] * k) for k in range(n + 1)]
    )
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        raise ValueError("zero state")
    lead = 0
    while lead <= n and abs(coeffs[lead]) <= tol * scale:
        lead += 1
    poly = coeffs[lead:]
    # root z corresponds to the ray (1, -z); a dropped leading power is the ray |1>
    vectors = [np.array([1.0, -z], dtype=complex) for z in np.roots(poly)] if len(poly) > 1 else []
    vectors += [np.array([0.0, 1.0], dtype=complex)] * lead
    roots: list[tuple[float, float, int]] = []
    infinity = 0
    for cl in cluster_rays(vectors, tol):
        proj = sum(np.outer(vectors[i], vectors[i].conj()) / np.vdot(vectors[i], vectors[i]).real for i in cl)
        rep = np.linalg.eigh(proj)[1][:, -1]
        alpha, beta = vector_angles(rep)
        if abs(math.pi / 2 - alpha) <= tol:
            infinity += len(cl)
        else:
            roots.append((alpha, beta, len(cl)))
    roots.sort()
    return MajoranaRep(tuple(roots), infinity)


def random_symmetric_qubit_state(n: int, rng: np.random.Generator) -> PureState:
    """Gaussian coefficients on the normalized Dicke basis."""
    coeffs = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    out = dicke(n, 0).scaled(coeffs[0])
    for k in range(1, n + 1):
        out = out + dicke(n, k).scaled(coeffs[k] / math.sqrt(math.comb(n, k)))
    return out
