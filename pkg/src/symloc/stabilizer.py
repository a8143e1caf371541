"""Local symmetry groups of the seed states.

A family is a list of components.  Each component maps a complex
parameter vector (plus an optional discrete choice) to a
:class:`SymmetryElement`.  Parameters are either ``"nonzero"`` (default
value 1, used multiplicatively) or ``"free"`` (default value 0).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.linalg import null_space

from . import symstates
from .symstates import BlockSpec
from .tensor_core import (
    DEFAULT_TOL,
    ProductOp,
    PureState,
    apply_at_site,
    apply_product,
    proportional,
)

TAGS = (
    "ToeplitzBB",
    "PowerDiag",
    "SbarGroup",
    "BlockGauge",
    "BlockPerm",
    "MajoranaPerm",
    "WFamily",
    "DickeDiag",
    "DickeSwap",
    "Explicit",
)

COMPLETE = "Complete"
GENERATORS_ONLY = "GeneratorsOnly"
HEURISTIC = "Heuristic"


@dataclass(frozen=True, eq=False)
class SymmetryElement:
    op: ProductOp
    lam: complex
    tag: str = "Explicit"

    def __post_init__(self) -> None:
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        object.__setattr__(self, "lam", complex(self.lam))

    def residual(self, seed: PureState) -> float:
        out = apply_product(seed, self.op)
        return float(np.linalg.norm(out.amps - self.lam * seed.amps) / seed.norm())

    def verifies(self, seed: PureState, tol: float = DEFAULT_TOL) -> bool:
        return self.residual(seed) <= tol

    def compose(self, other: SymmetryElement) -> SymmetryElement:
        return SymmetryElement(self.op @ other.op, self.lam * other.lam, "Explicit")

    def power(self, k: int) -> SymmetryElement:
        return SymmetryElement(self.op.power(k), self.lam**k, self.tag)

    def locals(self) -> tuple[np.ndarray, ...]:
        return self.op.ops

    def is_trivial(self, tol: float = DEFAULT_TOL) -> bool:
        return all(nontriviality(o) <= tol for o in self.op.ops)

    def to_json(self) -> dict:
        from .serialization import encode_complex, encode_matrix

        return {
            "tag": self.tag,
            "lambda": encode_complex(self.lam),
            "scalar": encode_complex(self.op.scalar),
            "ops": [encode_matrix(o) for o in self.op.ops],
        }


def nontriviality(op: np.ndarray) -> float:
    """Relative distance of op from the multiples of the identity."""
    op = np.asarray(op)
    d = op.shape[0]
    nrm = np.linalg.norm(op)
    if nrm == 0:
        return 0.0
    return float(np.linalg.norm(op - np.trace(op) / d * np.eye(d)) / nrm)


def verify_symmetry(seed: PureState, op: ProductOp, tol: float = DEFAULT_TOL) -> complex | None:
    return proportional(apply_product(seed, op), seed, tol)


Sampler = Callable[[np.ndarray, Any], SymmetryElement]


@dataclass(frozen=True, eq=False)
class Component:
    tag: str
    param_kinds: tuple[str, ...]
    sampler: Sampler
    choices: tuple[Any, ...] = (None,)

    @property
    def parameter_count(self) -> int:
        return len(self.param_kinds)

    @property
    def domain(self) -> str:
        discrete = len(self.choices) > 1 or self.choices[0] is not None
        if self.parameter_count == 0:
            return "discrete"
        return "complex+discrete" if discrete else "complex"

    @property
    def is_discrete(self) -> bool:
        return self.parameter_count == 0

    def default_params(self) -> np.ndarray:
        return np.array([1.0 if k == "nonzero" else 0.0 for k in self.param_kinds], dtype=complex)

    def random_params(self, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(self.parameter_count, dtype=complex)
        for i, kind in enumerate(self.param_kinds):
            if kind == "nonzero":
                out[i] = np.exp(0.4 * rng.normal() + 1j * rng.uniform(0, 2 * np.pi))
            else:
                out[i] = 0.7 * (rng.normal() + 1j * rng.normal())
        return out

    def sample(self, params=None, choice: Any = None) -> SymmetryElement:
        p = self.default_params() if params is None else np.asarray(params, dtype=complex)
        if p.shape != (self.parameter_count,):
            raise ValueError(f"component {self.tag} takes {self.parameter_count} parameters")
        if choice is None:
            choice = self.choices[0]
        return self.sampler(p, choice)


@dataclass(frozen=True, eq=False)
class StabilizerFamily:
    seed: PureState
    components: tuple[Component, ...]
    completeness: str
    kind: str
    attrs: dict = field(default_factory=dict)

    def random_element(self, rng: np.random.Generator, component: int | None = None) -> SymmetryElement:
        idx = int(rng.integers(len(self.components))) if component is None else component
        comp = self.components[idx]
        choice = comp.choices[int(rng.integers(len(comp.choices)))]
        return comp.sample(comp.random_params(rng), choice)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "completeness": self.completeness,
            "components": [
                {
                    "tag": c.tag,
                    "parameter_count": c.parameter_count,
                    "domain": c.domain,
                    "choices": [repr(ch) for ch in c.choices],
                }
                for c in self.components
            ],
            "attrs": {k: v for k, v in self.attrs.items() if isinstance(v, (int, float, str, bool, tuple, list))},
        }


# E_k machinery ---------------------------------------------------------------

def toeplitz_matrix(entries: Sequence[complex]) -> np.ndarray:
    """Upper triangular Toeplitz matrix sum_j b_j N^j."""
    size = len(entries)
    out = np.zeros((size, size), dtype=complex)
    for j, b in enumerate(entries):
        out += b * np.eye(size, k=j)
    return out


def toeplitz_bb(k: int, entries: Sequence[complex], site_i: int, site_j: int, n: int) -> SymmetryElement:
    if len(entries) != k + 1:
        raise ValueError(f"need k+1={k + 1} Toeplitz entries")
    if entries[0] == 0:
        raise ValueError("singular Toeplitz matrix (b_0 = 0)")
    if site_i == site_j or not (0 <= site_i < n and 0 <= site_j < n):
        raise ValueError("need two distinct sites in range")
    b = toeplitz_matrix(entries)
    op = ProductOp.at_sites(n, k + 1, {site_i: b, site_j: np.linalg.inv(b)})
    return SymmetryElement(op, 1.0, "ToeplitzBB")


def _sbar_from_row(row0: np.ndarray, y: Sequence[complex], k: int) -> np.ndarray:
    s = np.eye(k + 1, dtype=complex)
    s[0, 1:] = row0[1:]
    for i in range(k):
        for col in range(i + 2, k + 1):
            s[i + 1, col] = sum(s[i, col - j] * y[j - 1] for j in range(1, col - i + 1))
    return s


def _string_amplitude(s: np.ndarray, rows: Sequence[int], k: int) -> complex:
    # <rows| s^{(x)n} |E_k> is the z^k coefficient of prod_j sum_i s[rows_j, i] z^i
    poly = np.array([1.0 + 0j])
    for r in rows:
        poly = np.convolve(poly, s[r, :])[: k + 1]
    return complex(poly[k]) if len(poly) > k else 0j


def solve_sbar(
    k: int,
    n: int,
    toeplitz_row: Sequence[complex],
    free: dict[int, complex] | None = None,
    tol: float = 1e-10,
) -> np.ndarray | None:
    """Unit upper triangular S with S^{(x)n}|E_k> = |E_k>, or None."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < max(3, k - 1) and not (k <= 2 and n >= 2):
        raise ValueError("need n >= max(3, k-1)")
    y = np.asarray(toeplitz_row, dtype=complex)
    if y.shape != (k,):
        raise ValueError(f"need {k} Toeplitz entries y_1..y_k")
    free = free or {}
    row0 = np.zeros(k + 1, dtype=complex)
    row0[0] = 1.0
    for col in range(1, k + 1):
        # the string with k-col ones and zeros elsewhere must keep amplitude 0
        rows = [1] * (k - col) + [0] * (n - k + col)
        row0[col] = 0.0
        f0 = _string_amplitude(_sbar_from_row(row0, y, k), rows, k)
        row0[col] = 1.0
        slope = _string_amplitude(_sbar_from_row(row0, y, k), rows, k) - f0
        if abs(slope) <= tol:
            if abs(f0) > tol:
                return None
            row0[col] = free.get(col, 0.0)
        else:
            row0[col] = -f0 / slope
    s = _sbar_from_row(row0, y, k)
    seed = symstates.e_k(k, n)
    if k + 1 != seed.d:
        return s
    if verify_symmetry(seed, ProductOp.uniform(s, n), tol=1e-8) is None:
        return None
    return s


def ek_an_symmetry(k: int, n: int, x: complex, y: Sequence[complex]) -> SymmetryElement:
    if x == 0:
        raise ValueError("x must be nonzero")
    s = solve_sbar(k, n, y)
    if s is None:
        raise ValueError("no symmetry of the form D(x) Sbar(y) for these parameters")
    a = np.diag([x**l for l in range(k + 1)]) @ s
    return SymmetryElement(ProductOp.uniform(a, n), x**k, "PowerDiag")


def _ek_local_params(k: int) -> tuple[str, ...]:
    # x, (y_1 only when k == 2), y_2..y_k
    return ("nonzero",) + (("nonzero",) if k == 2 else ()) + ("free",) * (k - 1)


def _ek_block_sampler(k: int, n: int):
    """Sampler for D(x) Sbar(y) T_i with prod_i T_i = 1; returns locals and lambda."""
    head = len(_ek_local_params(k))

    def build(p: np.ndarray) -> tuple[list[np.ndarray], complex]:
        x = p[0]
        if k == 2:
            y = [p[1], p[2]]
        else:
            y = [1.0] + list(p[1:head])
        s = solve_sbar(k, n, y)
        if s is None:
            raise ValueError("infeasible Sbar parameters")
        a = np.diag([x**l for l in range(k + 1)]) @ s
        ts = [toeplitz_matrix(p[head + i * (k + 1): head + (i + 1) * (k + 1)]) for i in range(n - 1)]
        prod = np.eye(k + 1, dtype=complex)
        for t in ts:
            prod = prod @ t
        ts.append(np.linalg.inv(prod))
        return [a @ t for t in ts], x**k

    kinds = _ek_local_params(k) + (("nonzero",) + ("free",) * k) * (n - 1)
    return build, kinds


def ek_stabilizer(k: int, n: int) -> StabilizerFamily:
    if k < 1:
        raise ValueError("k must be >= 1")
    build, kinds = _ek_block_sampler(k, n)

    def sampler(p, _choice):
        ops, lam = build(p)
        return SymmetryElement(ProductOp(tuple(ops)), lam, "SbarGroup")

    return StabilizerFamily(
        symstates.e_k(k, n),
        (Component("SbarGroup", kinds, sampler),),
        COMPLETE,
        "ek",
        {"k": k, "n": n},
    )


def w_stabilizer(n: int) -> StabilizerFamily:
    if n < 3:
        raise ValueError("n must be >= 3")

    def sampler(p, _choice):
        x, ys = p[0], p[1:]
        ops = [np.array([[1, yi], [0, x]]) for yi in ys]
        ops.append(np.array([[1, -np.sum(ys)], [0, x]]))
        return SymmetryElement(ProductOp(tuple(ops), 1 / x), 1.0, "WFamily")

    kinds = ("nonzero",) + ("free",) * (n - 1)
    return StabilizerFamily(
        symstates.w(n), (Component("WFamily", kinds, sampler),), COMPLETE, "w", {"n": n}
    )


def _block_permutations(spec: BlockSpec) -> list[tuple[int, ...]]:
    ks = spec.excitations
    perms = []
    for perm in itertools.permutations(range(len(ks))):
        if all(ks[b] == ks[perm[b]] for b in range(len(ks))):
            perms.append(perm)
    return perms


def block_permutation_matrix(spec: BlockSpec, perm: Sequence[int]) -> np.ndarray:
    """X_sigma: maps level j of block b to level j of block perm[b]."""
    d = spec.d
    x = np.zeros((d, d), dtype=complex)
    for b, target in enumerate(perm):
        for j in range(spec.excitations[b] + 1):
            x[spec.offsets[target] + j, spec.offsets[b] + j] = 1.0
    return x


def direct_sum_stabilizer(spec: BlockSpec, n: int) -> StabilizerFamily:
    if n < 3:
        raise ValueError("n must be >= 3")
    ks = spec.excitations
    nblocks = len(ks)
    builders, widths = [], []
    for k in ks:
        if k >= 1:
            build, kinds = _ek_block_sampler(k, n)
            builders.append(build)
            widths.append(kinds)
        else:
            builders.append(None)
            widths.append(())
    gauge_kinds = ("nonzero",) * (nblocks * (n - 1))
    all_kinds = tuple(itertools.chain(*widths)) + gauge_kinds
    perms = _block_permutations(spec)

    def sampler(p, perm):
        pos = 0
        locals_ = [np.zeros((spec.d, spec.d), dtype=complex) for _ in range(n)]
        for b, (k, build) in enumerate(zip(ks, builders)):
            lv = spec.levels(b)
            if build is None:
                for i in range(n):
                    locals_[i][lv.start, lv.start] = 1.0
                continue
            width = len(widths[b])
            ops, lam = build(p[pos: pos + width])
            pos += width
            ops[0] = ops[0] / lam
            for i in range(n):
                locals_[i][lv.start: lv.stop, lv.start: lv.stop] = ops[i]
        gam = p[pos:].reshape(n - 1, nblocks)
        last = 1.0 / np.prod(gam, axis=0)
        gam = np.vstack([gam, last])
        xs = block_permutation_matrix(spec, perm)
        ops = []
        for i in range(n):
            dvec = np.concatenate([np.full(k + 1, gam[i, b]) for b, k in enumerate(ks)])
            ops.append(xs @ np.diag(dvec) @ locals_[i])
        tag = "BlockPerm" if list(perm) != list(range(nblocks)) else "BlockGauge"
        return SymmetryElement(ProductOp(tuple(ops)), 1.0, tag)

    return StabilizerFamily(
        symstates.direct_sum_ek(spec, n),
        (Component("BlockGauge", all_kinds, sampler, tuple(perms)),),
        COMPLETE,
        "direct_sum",
        {"spec": spec.excitations, "n": n},
    )


def dicke_stabilizer(n: int, k: int) -> StabilizerFamily:
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    if k > n - k:
        raise ValueError("use k <= n/2 (swap 0 and 1 otherwise)")
    swap = 2 * k == n

    def diag_sampler(p, _choice):
        r = p[0]
        return SymmetryElement(ProductOp.uniform(np.diag([1.0, r]), n), r**k, "DickeDiag")

    comps = [Component("DickeDiag", ("nonzero",), diag_sampler)]
    if swap:
        sx = np.array([[0, 1], [1, 0]], dtype=complex)

        def swap_sampler(p, _choice):
            r = p[0]
            return SymmetryElement(ProductOp.uniform(sx @ np.diag([1.0, r]), n), r**k, "DickeSwap")

        comps.append(Component("DickeSwap", ("nonzero",), swap_sampler))
    attrs = {"n": n, "k": k, "non_es": 2 <= k}
    if not swap:
        attrs.update(diagonal=True, diag_law="uniform")
    return StabilizerFamily(symstates.dicke(n, k), tuple(comps), COMPLETE, "dicke", attrs)


def multi_dicke_stabilizer(n: int, occupations: Sequence[int]) -> StabilizerFamily:
    """Diagonal A^{(x)n} plus level permutations preserving the occupations."""
    occ = tuple(occupations)
    d = len(occ)
    seed = symstates.multi_dicke(n, occ)
    perms = [p for p in itertools.permutations(range(d)) if all(occ[p[l]] == occ[l] for l in range(d))]

    def sampler(p, perm):
        diag = np.concatenate([[1.0], p])
        xs = np.zeros((d, d), dtype=complex)
        for l, t in enumerate(perm):
            xs[t, l] = 1.0
        lam = np.prod([diag[l] ** occ[l] for l in range(d)])
        tag = "DickeSwap" if list(perm) != list(range(d)) else "DickeDiag"
        return SymmetryElement(ProductOp.uniform(xs @ np.diag(diag), n), lam, tag)

    attrs = {"n": n, "occupations": occ, "non_es": es_witness_dimension(seed) == 1}
    if len(perms) == 1:
        attrs.update(diagonal=True, diag_law="uniform")
    return StabilizerFamily(
        seed, (Component("DickeDiag", ("nonzero",) * (d - 1), sampler, tuple(perms)),), COMPLETE, "multi_dicke", attrs
    )


def es_witness_space(state: PureState, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Basis of {B : (B (x) 1) psi = (1 (x) B) psi} on sites 0 and 1."""
    d = state.d
    cols = []
    for r in range(d):
        for c in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[r, c] = 1.0
            cols.append((apply_at_site(state, e, 0) - apply_at_site(state, e, 1)).amps)
    mat = np.array(cols).T
    scale = max(np.linalg.norm(mat), 1e-300)
    basis = null_space(mat, rcond=tol * 10) if scale > 0 else np.eye(d * d)
    return [basis[:, i].reshape(d, d) for i in range(basis.shape[1])]


def es_witness_dimension(state: PureState, tol: float = DEFAULT_TOL) -> int:
    return len(es_witness_space(state, tol))


def is_non_es(state: PureState, tol: float = DEFAULT_TOL) -> bool:
    """True when only multiples of the identity satisfy the B (x) B^-1 condition."""
    return es_witness_dimension(state, tol) == 1


# generic qubit symmetric states ---------------------------------------------

def qubit_symmetric_symmetry_search(state: PureState, tol: float = 1e-7) -> list[SymmetryElement]:
    """All A^{(x)n} symmetries with lambda = 1, one per root permutation (generic case)."""
    rep = symstates.state_to_majorana(state)
    if rep.degeneracy != (1,) * state.n:
        raise ValueError("only the nondegenerate root configuration is supported")
    if state.n > 8:
        raise ValueError("n > 8 is not supported")
    n = state.n
    eps = [v / np.linalg.norm(v) for v in rep.vectors()]
    base = np.column_stack([eps[0], eps[1]])
    c = np.linalg.solve(base, eps[2])
    found: list[SymmetryElement] = []
    for perm in itertools.permutations(range(n)):
        img = np.column_stack([eps[perm[0]], eps[perm[1]]])
        dvec = np.linalg.solve(img, eps[perm[2]])
        if abs(c[0]) < 1e-14 or abs(dvec[1]) < 1e-14:
            continue
        a1 = dvec[0] * c[1] / (dvec[1] * c[0])
        a = img @ np.diag([a1, 1.0]) @ np.linalg.inv(base)
        ok = True
        for j in range(3, n):
            v = a @ eps[j]
            ov = abs(np.vdot(eps[perm[j]], v)) / np.linalg.norm(v)
            if math.sqrt(max(0.0, 1 - ov**2)) > tol:
                ok = False
                break
        if not ok:
            continue
        lam = verify_symmetry(state, ProductOp.uniform(a, n), tol=1e-6)
        if lam is None:
            continue
        a = a / lam ** (1.0 / n)
        elem = SymmetryElement(ProductOp.uniform(a, n), 1.0, "MajoranaPerm")
        if elem.residual(state) <= 1e-8:
            found.append(elem)
    return found


# qutrit families ------------------------------------------------------------

def _close_products(vals: np.ndarray, target: complex = 1.0) -> np.ndarray:
    return np.concatenate([vals, [target / np.prod(vals)]])


PSI_MU_SPECIAL = math.sqrt(2) * 1j


def psi_mu_a3_choices() -> list[tuple[float, float, float, float]]:
    """(alpha, beta, delta, phi) with alpha, beta in {0, pi}, delta, phi in {pi/2, 3pi/2}
    and exp(i(alpha + beta + phi)) = i."""
    out = []
    for al, be, de, ph in itertools.product((0.0, math.pi), (0.0, math.pi), (math.pi / 2, 3 * math.pi / 2), (math.pi / 2, 3 * math.pi / 2)):
        if abs(np.exp(1j * (al + be + ph)) - 1j) < 1e-12:
            out.append((al, be, de, ph))
    return out


def psi_mu_a3_local(alpha: float, beta: float, delta: float, phi: float) -> np.ndarray:
    th = (delta + phi) / 2
    return np.array(
        [[1.0, np.exp(1j * (th + beta))], [1j * np.exp(1j * (th + alpha)), np.exp(1j * delta)]], dtype=complex
    )


def psi_mu_a3_product(delta: float, phi: float) -> complex:
    """Required product of the qubit-block prefactors."""
    if abs(np.exp(1j * (delta + phi)) - 1) < 1e-9:
        return (1 - math.sqrt(3) * 1j) / 8
    return (1 + math.sqrt(3) * 1j) / 8


def s43_local(a: complex, m: int, x: complex = 1.0, y: complex = 0.0) -> np.ndarray:
    """x (a (+) a^{-1/3} w^m (+) a^{-3}) plus y in the (0, 2) corner; principal cube root."""
    omega = np.exp(2j * math.pi * m / 3)
    return np.array(
        [[x * a, 0, y], [0, x * a ** (-1 / 3) * omega, 0], [0, 0, x * a**-3]], dtype=complex
    )


QUTRIT4_IDS = ("S42+2^4", "0^4+S42+2^4", "1^4+S42+F41", "S43+F41", "psi_mu")


def qutrit4_seed(rep_id: str, mu: complex | None = None) -> PureState:
    s42 = symstates.snk(4, 2)
    f41 = symstates.fnk(4, 1)
    lvl = symstates.product_string
    if rep_id == "S42+2^4":
        return s42 + lvl(4, 2)
    if rep_id == "0^4+S42+2^4":
        return lvl(4, 0) + s42 + lvl(4, 2)
    if rep_id == "1^4+S42+F41":
        return lvl(4, 1) + s42 + f41
    if rep_id == "S43+F41":
        return symstates.snk(4, 3) + f41
    if rep_id == "psi_mu":
        if mu is None:
            raise ValueError("psi_mu needs a value of mu")
        if not symstates.psi_mu_admissible(mu):
            raise ValueError(f"mu={mu} is an excluded value")
        return symstates.psi_mu(mu)
    raise ValueError(f"unknown 4-qutrit representative {rep_id!r}")


def qutrit4_symmetry_family(rep_id: str, mu: complex | None = None) -> StabilizerFamily:
    seed = qutrit4_seed(rep_id, mu)
    n = 4
    comps: list[Component] = []
    attrs: dict[str, Any] = {"rep_id": rep_id}

    def qubit_plus(mats, ys):
        ops = []
        for m, y in zip(mats, ys):
            op = np.zeros((3, 3), dtype=complex)
            op[:2, :2] = m
            op[2, 2] = y
            ops.append(op)
        return ops

    if rep_id == "S42+2^4":
        kinds = ("nonzero",) * 7

        def sampler(p, choice):
            form, s = choice
            a, xs, ys = p[0], _close_products(p[1:4]), _close_products(p[4:7])
            if form == "diag":
                mats = [np.diag([x * a, s * x / a]) for x in xs]
            else:
                mats = [np.array([[0, s * x / a], [x * a, 0]]) for x in xs]
            return SymmetryElement(ProductOp(tuple(qubit_plus(mats, ys))), 1.0, "Explicit")

        comps.append(Component("Explicit", kinds, sampler, tuple(itertools.product(("diag", "anti"), (1, -1)))))
        attrs["type"] = "type1"
    elif rep_id in ("0^4+S42+2^4", "psi_mu"):
        kinds = ("nonzero",) * 6
        forms = ("diag", "anti") if rep_id == "psi_mu" else ("diag",)

        def sampler(p, choice):
            form, s = choice
            xs, ys = _close_products(p[0:3]), _close_products(p[3:6])
            if form == "diag":
                mats = [np.diag([x, s * x]) for x in xs]
            else:
                mats = [np.array([[0, s * x], [x, 0]]) for x in xs]
            return SymmetryElement(ProductOp(tuple(qubit_plus(mats, ys))), 1.0, "Explicit")

        comps.append(Component("Explicit", kinds, sampler, tuple(itertools.product(forms, (1, -1)))))
        if rep_id == "psi_mu" and abs(mu - PSI_MU_SPECIAL) <= 1e-9:

            def a3_sampler(p, choice):
                al, be, de, ph = choice
                xs = _close_products(p[0:3], psi_mu_a3_product(de, ph))
                ys = _close_products(p[3:6])
                base = psi_mu_a3_local(al, be, de, ph)
                return SymmetryElement(ProductOp(tuple(qubit_plus([x * base for x in xs], ys))), 1.0, "Explicit")

            comps.append(Component("Explicit", kinds, a3_sampler, tuple(psi_mu_a3_choices())))
        if rep_id == "0^4+S42+2^4":
            attrs.update(diagonal=True, diag_law="product_one")
        attrs["type"] = "type1"
        attrs["mu"] = mu
    elif rep_id == "1^4+S42+F41":
        kinds = ("nonzero",) * 3 + ("free",) * 3

        def sampler(p, s):
            xs = _close_products(p[0:3])
            ts = np.concatenate([p[3:6], [-np.sum(p[3:6])]])
            ops = [x * np.array([[1, 0, t], [0, s, 0], [0, 0, 1]]) for x, t in zip(xs, ts)]
            return SymmetryElement(ProductOp(tuple(ops)), 1.0, "Explicit")

        comps.append(Component("Explicit", kinds, sampler, (1, -1)))
        attrs["type"] = "type2"
    elif rep_id == "S43+F41":
        # locals z_j (1 (+) w (+) w^3) + z_j t_j |0><2|; w = a^{-4/3} e^{2 pi i m/3}
        kinds = ("nonzero",) * 4 + ("free",) * 3

        def sampler(p, _choice):
            wv = p[0]
            zs = _close_products(p[1:4], 1.0 / wv**3)
            ts = np.concatenate([p[4:7], [-np.sum(p[4:7])]])
            ops = [z * np.array([[1, 0, t], [0, wv, 0], [0, 0, wv**3]]) for z, t in zip(zs, ts)]
            return SymmetryElement(ProductOp(tuple(ops)), 1.0, "Explicit")

        comps.append(Component("Explicit", kinds, sampler))
        attrs["type"] = "type2"
    else:
        raise ValueError(f"unknown 4-qutrit representative {rep_id!r}")
    return StabilizerFamily(seed, tuple(comps), COMPLETE, "qutrit4", attrs)


def psi_derog_stabilizer() -> StabilizerFamily:
    def sampler(p, _choice):
        a = np.concatenate([p, [-np.sum(p)]])
        ops = []
        for ai in a:
            op = np.eye(3, dtype=complex)
            op[1, 2] = ai
            ops.append(op)
        return SymmetryElement(ProductOp(tuple(ops)), 1.0, "Explicit")

    return StabilizerFamily(
        symstates.psi_derog_5qutrit(),
        (Component("Explicit", ("free",) * 4, sampler),),
        COMPLETE,
        "psi_derog",
        {"min_defective_sites": 2},
    )


def finite_family(seed: PureState, elements: Sequence[SymmetryElement], completeness: str = HEURISTIC) -> StabilizerFamily:
    """Family made of an explicit finite list of elements."""
    elems = tuple(elements)

    def sampler(_p, idx):
        return elems[idx]

    return StabilizerFamily(
        seed, (Component("Explicit", (), sampler, tuple(range(len(elems)))),), completeness, "finite", {}
    )


def generic_qubit_family(state: PureState) -> StabilizerFamily:
    """Finite stabilizer of a nondegenerate symmetric qubit state.

    The root-permutation search is exhaustive for A^{(x)n} symmetries; it is
    only the full stabilizer for non-ES seeds, which is checked here.
    """
    elems = qubit_symmetric_symmetry_search(state)
    complete = COMPLETE if is_non_es(state) else HEURISTIC
    fam = finite_family(state, elems, complete)
    return StabilizerFamily(fam.seed, fam.components, complete, "finite", {"non_es": complete == COMPLETE})
