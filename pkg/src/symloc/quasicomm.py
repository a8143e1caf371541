"""The quasi-commutation relation S^dagger G S = lambda G."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import DEFAULT_TOL, GramFactor, as_local


def _gram_array(G) -> np.ndarray:
    return G.matrix if isinstance(G, GramFactor) else np.asarray(G, dtype=complex)


def quasi_commutes(S, G, tol: float = DEFAULT_TOL) -> float | None:
    """Positive lambda with |S^dag G S - lambda G| <= tol |S^dag G S|, else None."""
    s = as_local(S)
    g = _gram_array(G)
    m = s.conj().T @ g @ s
    gg = np.vdot(g, g).real
    if gg == 0:
        raise ValueError("zero gram matrix")
    lam = np.vdot(g, m) / gg
    scale = np.linalg.norm(m)
    if scale == 0:
        return None
    if abs(lam.imag) > tol * abs(lam) or lam.real <= 0:
        return None
    lam = lam.real
    if np.linalg.norm(m - lam * g) > tol * scale:
        return None
    return float(lam)


def quasi_commutation_residual(S, G) -> float:
    """Relative distance of S^dag G S from the positive multiples of G."""
    s = np.asarray(S, dtype=complex)
    g = _gram_array(G)
    m = s.conj().T @ g @ s
    lam = max(np.vdot(g, m).real / np.vdot(g, g).real, 0.0)
    scale = np.linalg.norm(m)
    return float(np.linalg.norm(m - lam * g) / scale) if scale else 0.0


@dataclass(frozen=True, eq=False)
class UnitarySimilarity:
    """B = scale * R diag(exp(i phases)) R^{-1}."""

    R: np.ndarray
    phases: np.ndarray
    scale: complex

    def reconstruct(self) -> np.ndarray:
        return self.scale * self.R @ np.diag(np.exp(1j * self.phases)) @ np.linalg.inv(self.R)


def factor_unitary_similarity(B, tol: float = DEFAULT_TOL) -> UnitarySimilarity | None:
    b = as_local(B)
    if abs(np.linalg.det(b)) <= tol * np.linalg.norm(b) ** b.shape[0]:
        raise ValueError("singular matrix")
    vals, vecs = np.linalg.eig(b)
    if np.linalg.cond(vecs) >= 1 / tol:
        return None
    mods = np.abs(vals)
    scale = float(np.mean(mods))
    if np.max(np.abs(mods - scale)) > tol * scale * 10:
        return None
    phases = np.mod(np.angle(vals), 2 * np.pi)
    out = UnitarySimilarity(vecs, phases, scale)
    if np.linalg.norm(out.reconstruct() - b) > 1e3 * tol * np.linalg.norm(b):
        return None
    return out


def phase_classes(phases: np.ndarray, tol: float = DEFAULT_TOL) -> list[list[int]]:
    """Group indices whose phases agree on the unit circle (single linkage, radius 10 tol)."""
    pts = np.exp(1j * np.asarray(phases))
    classes: list[list[int]] = []
    for i, p in enumerate(pts):
        hits = [c for c in classes if min(abs(p - pts[j]) for j in c) <= 10 * tol]
        merged = [i]
        for c in hits:
            merged.extend(c)
            classes.remove(c)
        classes.append(sorted(merged))
    return sorted(classes)


@dataclass(frozen=True, eq=False)
class PositiveSolutionSpace:
    """Positive A with B^dag A B proportional to A: A = R^{-dag} X R^{-1}, X block positive."""

    R: np.ndarray
    block_structure: tuple[tuple[int, ...], ...]

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        d = self.R.shape[0]
        x = np.zeros((d, d), dtype=complex)
        for blk in self.block_structure:
            m = len(blk)
            z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
            x[np.ix_(blk, blk)] = z.conj().T @ z + 0.1 * np.eye(m)
        rinv = np.linalg.inv(self.R)
        return rinv.conj().T @ x @ rinv

    def contains(self, A, tol: float = DEFAULT_TOL) -> bool:
        a = np.asarray(A, dtype=complex)
        x = self.R.conj().T @ a @ self.R
        mask = np.zeros(x.shape, dtype=bool)
        for blk in self.block_structure:
            mask[np.ix_(blk, blk)] = True
        if np.linalg.norm(x[~mask]) > tol * np.linalg.norm(x):
            return False
        return all(np.linalg.eigvalsh(x[np.ix_(blk, blk)])[0] > 0 for blk in self.block_structure)


def positive_solution_space(B, tol: float = DEFAULT_TOL) -> PositiveSolutionSpace | None:
    fac = factor_unitary_similarity(B, tol)
    if fac is None:
        return None
    blocks = tuple(tuple(c) for c in phase_classes(fac.phases, tol))
    return PositiveSolutionSpace(fac.R, blocks)


def lemma4_family(k: int, a: complex, x: complex, tol: float = DEFAULT_TOL) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be >= 1")
    if abs(abs(x) - 1) > tol:
        raise ValueError("x must have unit modulus")
    out = np.diag([x**l for l in range(k + 1)]).astype(complex)
    out[k - 1, k] = a * (1 / np.conj(x) ** (k - 1) - x**k)
    return out


def corner_factor(k: int, a: complex) -> np.ndarray:
    """g = 1 + a |k-1><k| on k+1 levels."""
    g = np.eye(k + 1, dtype=complex)
    g[k - 1, k] = a
    return g


def corner_gram(k: int, a: complex) -> np.ndarray:
    g = corner_factor(k, a)
    return g.conj().T @ g


def lemma4_characterize(k: int, a: complex, A, tol: float = DEFAULT_TOL) -> bool:
    m = as_local(A, k + 1)
    if abs(m[0, 0]) == 0:
        return False
    m = m / m[0, 0]
    x = m[1, 1]
    if abs(abs(x) - 1) > tol:
        return False
    expected = lemma4_family(k, a, x / abs(x))
    return bool(np.linalg.norm(m - expected) <= tol * max(1.0, np.linalg.norm(expected)))


def is_diagonalizable(B, tol: float = DEFAULT_TOL) -> bool | None:
    """True/False, or None when the eigenvector condition number is ambiguous."""
    b = np.asarray(B, dtype=complex)
    vals, vecs = np.linalg.eig(b)
    cond = np.linalg.cond(vecs)
    if cond < 1 / np.sqrt(tol):
        return True
    if cond >= 1 / tol:
        return False
    return None


def eigenvalue_clusters(B, eps: float = 1e-14) -> list[list[int]]:
    """Single-linkage clusters of eigenvalues.

    A defective block of size m splits its eigenvalue by about eps^(1/m), so a
    merge into a cluster of size m is allowed up to 10 eps^(1/m) (relative).
    """
    vals = np.linalg.eigvals(np.asarray(B, dtype=complex))
    scale = max(1.0, float(np.abs(vals).max()))
    clusters = [[i] for i in range(len(vals))]
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                link = min(abs(vals[a] - vals[b]) for a in clusters[i] for b in clusters[j])
                size = len(clusters[i]) + len(clusters[j])
                if link <= 10 * eps ** (1 / size) * scale and (best is None or link < best[0]):
                    best = (link, i, j)
        if best is None:
            break
        _, i, j = best
        clusters[i] += clusters.pop(j)
    return clusters


def is_defective(B, tol: float = DEFAULT_TOL) -> bool:
    """True when some eigenvalue cluster has fewer eigenvectors than its size."""
    b = np.asarray(B, dtype=complex)
    d = b.shape[0]
    vals = np.linalg.eigvals(b)
    scale = max(1.0, float(np.linalg.norm(b, 2)))
    for cl in eigenvalue_clusters(b):
        if len(cl) == 1:
            continue
        lam = np.mean(vals[cl])
        sv = np.linalg.svd(b - lam * np.eye(d), compute_uv=False)
        geometric = int(np.sum(sv <= 10 * tol * scale))
        if geometric < len(cl):
            return True
    return False
