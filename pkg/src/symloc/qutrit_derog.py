"""Derogatory qutrit classes: representatives, SLOCC reach maps and LOCC fixtures."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import locc, symstates
from .quasicomm import is_defective
from .stabilizer import (
    PSI_MU_SPECIAL,
    SymmetryElement,
    psi_derog_stabilizer,
    qubit_symmetric_symmetry_search,
    qutrit4_seed,
    qutrit4_symmetry_family,
)
from .symstates import DerogSpec, fnk, product_string, snk
from .tensor_core import DEFAULT_TOL, GramFactor, ProductOp, PureState, apply_product, proportional

B1 = np.diag([1.0, 1.0, 2.0]).astype(complex)
B2 = np.array([[1, 0, 1], [0, 1, 0], [0, 0, 1]], dtype=complex)
B_DEROG = np.array([[1, 0, 0], [0, 1, 1], [0, 0, 1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class QutritRep:
    id: str
    state: PureState
    type_tag: str
    B_matrix: np.ndarray
    mu: complex | None = None

    def witness(self) -> ProductOp:
        """B (x) B^-1 (x) 1 ... on the first two sites."""
        n, d = self.state.n, self.state.d
        return ProductOp.at_sites(n, d, {0: self.B_matrix, 1: np.linalg.inv(self.B_matrix)})

    def witness_residual(self) -> float:
        out = apply_product(self.state, self.witness())
        return float((out - self.state).norm() / self.state.norm())

    def to_json(self) -> dict:
        from .serialization import encode_complex, encode_matrix, encode_state

        doc = {
            "id": self.id,
            "type_tag": self.type_tag,
            "B_matrix": encode_matrix(self.B_matrix),
            "state": encode_state(self.state),
        }
        if self.mu is not None:
            doc["mu"] = encode_complex(self.mu)
        return doc


def _s(n: int, k: int) -> PureState:
    if k == 0:
        return product_string(n, 0)
    if k == n:
        return product_string(n, 1)
    return snk(n, k)


def _sum(*states: PureState) -> PureState:
    out = states[0]
    for s in states[1:]:
        out = out + s
    return out


def _three_qutrit_reps() -> list[QutritRep]:
    n = 3
    two = product_string(n, 2)
    f = fnk(n, 1)
    return [
        QutritRep("a", _sum(_s(n, 0), two), "none", B1),
        QutritRep("b", _sum(_s(n, 0), _s(n, 3), two), "none", B1),
        QutritRep("c", _sum(_s(n, 1), two), "none", B1),
        QutritRep("d", f, "none", B2),
        QutritRep("e", _sum(_s(n, 2), f), "none", B2),
    ]


def representatives(n: int, mu: complex = 1.0) -> list[QutritRep]:
    if n == 3:
        return _three_qutrit_reps()
    if n == 4:
        out = []
        for rid in ("S42+2^4", "0^4+S42+2^4", "1^4+S42+F41", "S43+F41", "psi_mu"):
            tag = "type2" if "F41" in rid else "type1"
            m = mu if rid == "psi_mu" else None
            out.append(QutritRep(rid, qutrit4_seed(rid, m), tag, B2 if tag == "type2" else B1, m))
        return out
    if n == 5:
        return [QutritRep("psi_derog", symstates.psi_derog_5qutrit(), "none", B_DEROG)]
    raise ValueError("representatives exist for n = 3, 4, 5")


def type2_candidates(n: int) -> list[QutritRep]:
    """Type-2 candidate representatives used by the SLOCC reach maps."""
    f = fnk(n, 1)
    if n == 3:
        return [
            QutritRep("d", f, "none", B2),
            QutritRep("e", _sum(_s(3, 2), f), "none", B2),
            QutritRep("f", _sum(_s(3, 3), f), "none", B2),
        ]
    if n == 4:
        return [
            QutritRep("F41", f, "none", B2),
            QutritRep("S42+F41", _sum(_s(4, 2), f), "none", B2),
            QutritRep("1^4+F41", _sum(_s(4, 4), f), "none", B2),
            QutritRep("1^4+S42+F41", _sum(_s(4, 4), _s(4, 2), f), "type2", B2),
            QutritRep("S43+F41", _sum(_s(4, 3), f), "type2", B2),
        ]
    raise ValueError("type-2 reach maps exist for n = 3, 4")


def psi_type1(a: Sequence[complex]) -> PureState:
    """a_0|0^n> + sum_k a_k S^n_k + a_n |1^n> + a_{n+1} |2^n>."""
    n = len(a) - 2
    return _sum(*[_s(n, k).scaled(a[k]) for k in range(n + 1)], product_string(n, 2).scaled(a[n + 1]))


def psi_type2(b: Sequence[complex]) -> PureState:
    """b_0|0^n> + sum_k b_k S^n_k + b_n |1^n> + b_{n+1} F^n_1."""
    n = len(b) - 2
    return _sum(*[_s(n, k).scaled(b[k]) for k in range(n + 1)], fnk(n, 1).scaled(b[n + 1]))


# type-2 reach maps ------------------------------------------------------------

def _nz(x: complex, tol: float) -> bool:
    return abs(x) > tol


def reach_case(b: Sequence[complex], tol: float = DEFAULT_TOL) -> str:
    """Which candidate representative reaches Psi_2(b)."""
    b = [complex(x) for x in b]
    n = len(b) - 2
    if not _nz(b[n + 1], tol):
        raise ValueError("the F coefficient must be nonzero (full local rank)")
    if n == 3:
        if not _nz(b[2], tol) and not _nz(b[3], tol):
            return "d"
        if _nz(b[2], tol) and not _nz(b[3], tol):
            return "e"
        return "f"
    if n == 4:
        b2, b3, b4 = b[2], b[3], b[4]
        if _nz(b4, tol):
            special = math.sqrt(6) * b3**2 / (4 * b4)
            return "1^4+F41" if abs(b2 - special) <= tol * max(1.0, abs(special)) else "1^4+S42+F41"
        if _nz(b3, tol):
            return "S43+F41"
        return "S42+F41" if _nz(b2, tol) else "F41"
    raise ValueError("reach maps exist for n = 3, 4")


def _a2(a: complex, d: complex, g: complex, e: complex, h: complex, p: complex) -> np.ndarray:
    return np.array([[a, d, g], [0, e, h], [0, 0, p]], dtype=complex)


def slocc_reach(rep: QutritRep | str, b: Sequence[complex], tol: float = DEFAULT_TOL) -> np.ndarray:
    """A with A^(x)n |rep> proportional to Psi_2(b), verified before returning."""
    rid = rep if isinstance(rep, str) else rep.id
    b = [complex(x) for x in b]
    n = len(b) - 2
    case = reach_case(b, tol)
    if case != rid:
        raise ValueError(f"coefficients select representative {case!r}, not {rid!r}")
    if n == 3:
        b0, b1, b2, b3, b4 = b
        if rid == "d":
            A = _a2(1, 0, b0 / math.sqrt(3), 1, b1, b4)
        elif rid == "e":
            A = _a2(1, 0, b0 / math.sqrt(3), np.sqrt(b2), b1, b4)
        else:
            c = b3 ** (1 / 3)
            A = _a2(
                1,
                b2 / (math.sqrt(3) * c**2),
                b0 / math.sqrt(3) - b2**3 / (9 * b3**2),
                c,
                b1 - b2**2 / (math.sqrt(3) * b3),
                b4,
            )
    else:
        b0, b1, b2, b3, b4, b5 = b
        if rid == "F41":
            A = _a2(1, 0, b0 / 2, 1, b1, b5)
        elif rid == "S42+F41":
            A = _a2(1, 0, b0 / 2, np.sqrt(b2), b1, b5)
        elif rid == "1^4+F41":
            e = b4**0.25
            d = b3 / (2 * e**3)
            A = _a2(1, d, (b0 - d**4) / 2, e, b1 - 2 * d**3 * e, b5)
        elif rid == "1^4+S42+F41":
            e = b4**0.25
            d = b3 / (2 * e**3)
            a = np.sqrt(b2 / e**2 - math.sqrt(6) * d**2)
            g = (b0 - d**4 - math.sqrt(6) * a**2 * d**2) / (2 * a**3)
            h = (b1 - 2 * d**3 * e - math.sqrt(6) * a**2 * d * e) / a**3
            A = _a2(a, d, g, e, h, b5 / a**3)
        else:
            e = b3 ** (1 / 3)
            d = b2 / (math.sqrt(6) * e**2)
            A = _a2(1, d, b0 / 2 - d**3, e, b1 - 3 * d**2 * e, b5)
    if abs(np.linalg.det(A)) <= tol:
        raise ValueError("constructed A is singular")
    src = rep.state if isinstance(rep, QutritRep) else _candidate_state(rid, n)
    check_reach(src, A, psi_type2(b), tol)
    return A


def _candidate_state(rid: str, n: int) -> PureState:
    for r in type2_candidates(n):
        if r.id == rid:
            return r.state
    raise ValueError(f"unknown representative {rid!r}")


def check_reach(src: PureState, A: np.ndarray, target: PureState, tol: float = DEFAULT_TOL) -> complex:
    img = apply_product(src, ProductOp.uniform(A, src.n))
    lam = proportional(target, img, tol)
    if lam is None:
        raise ArithmeticError("A^(x)n |rep> is not proportional to the target")
    return lam


def reach_residual(src: PureState, A: np.ndarray, target: PureState) -> float:
    img = apply_product(src, ProductOp.uniform(A, src.n)).amps
    t = target.amps
    lam = np.vdot(img, t) / np.vdot(img, img)
    return float(np.linalg.norm(t - lam * img) / np.linalg.norm(t))


def random_admissible_b(case: str, rng: np.random.Generator) -> np.ndarray:
    """Random coefficient vector selecting the given case."""

    def c() -> complex:
        return complex(rng.normal() + 1j * rng.normal())

    if case in ("d", "e", "f"):
        b = np.array([c() for _ in range(5)])
        if case == "d":
            b[2] = b[3] = 0
        elif case == "e":
            b[3] = 0
        return b
    b = np.array([c() for _ in range(6)])
    if case == "F41":
        b[2] = b[3] = b[4] = 0
    elif case == "S42+F41":
        b[3] = b[4] = 0
    elif case == "1^4+F41":
        b[2] = math.sqrt(6) * b[3] ** 2 / (4 * b[4])
    elif case == "S43+F41":
        b[4] = 0
    elif case != "1^4+S42+F41":
        raise ValueError(f"unknown case {case!r}")
    return b


# type-1 reach via Majorana roots -------------------------------------------------

def qubit_part(state: PureState) -> PureState:
    """Restriction of a qutrit state to levels {0, 1}."""
    t = state.tensor[(slice(0, 2),) * state.n]
    return PureState.from_tensor(np.ascontiguousarray(t))


def _distinct_points(state: PureState, tol: float) -> list[tuple[np.ndarray, int]]:
    rep = symstates.state_to_majorana(state, tol)
    pts = [(symstates.root_vector(a, b), m) for a, b, m in rep.roots]
    if rep.infinity_mult:
        pts.append((np.array([0, 1], dtype=complex), rep.infinity_mult))
    return pts


def _mobius_from(us: Sequence[np.ndarray], ws: Sequence[np.ndarray]) -> np.ndarray:
    """2x2 A with A u_i proportional to w_i (one, two or three pairs)."""
    if len(us) == 1:
        u, w = us[0], ws[0]
        uperp = np.array([-np.conj(u[1]), np.conj(u[0])])
        wperp = np.array([-np.conj(w[1]), np.conj(w[0])])
        return np.column_stack([w, wperp]) @ np.linalg.inv(np.column_stack([u, uperp]))
    U = np.column_stack(us[:2])
    W = np.column_stack(ws[:2])
    if len(us) == 2:
        return W @ np.linalg.inv(U)
    al = np.linalg.solve(U, us[2])
    be = np.linalg.solve(W, ws[2])
    return W @ np.diag(be / al) @ np.linalg.inv(U)


def qubit_slocc_map(src: PureState, target: PureState, tol: float = 1e-7) -> np.ndarray | None:
    """2x2 A with A^(x)n src proportional to target, by matching Majorana roots."""
    ps, pt = _distinct_points(src, tol), _distinct_points(target, tol)
    if sorted(m for _, m in ps) != sorted(m for _, m in pt):
        return None
    for perm in itertools.permutations(range(len(pt))):
        if any(ps[i][1] != pt[j][1] for i, j in enumerate(perm)):
            continue
        us = [ps[i][0] for i in range(len(ps))]
        ws = [pt[j][0] for j in perm]
        try:
            A = _mobius_from(us[:3], ws[:3])
        except np.linalg.LinAlgError:
            continue
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        if reach_residual(src, A, target) <= 1e-8:
            return A
    return None


def _cross_ratio(v: Sequence[np.ndarray]) -> complex:
    br = lambda a, b: v[a][0] * v[b][1] - v[a][1] * v[b][0]
    return complex(br(0, 2) * br(1, 3) / (br(1, 2) * br(0, 3)))


def mu_for_generic(target_qubit: PureState, tol: float = 1e-7) -> complex:
    """mu such that the qubit part of psi(mu) has the same root cross-ratio as the target."""
    pts = _distinct_points(target_qubit, tol)
    if len(pts) != 4:
        raise ValueError("needs four distinct Majorana roots")
    lam = _cross_ratio([p for p, _ in pts])
    s = np.sqrt(lam)
    t = (1 + s) / (1 - s)
    return complex(-(t + 1 / t) / math.sqrt(6))


TYPE1_QUBIT_REPS = {
    3: {"a": (3,), "b": (1, 1, 1), "c": (1, 2)},
    4: {"1^4+2^4": (4,), "S41+2^4": (1, 3), "S42+2^4": (2, 2), "0^4+S42+2^4": (1, 1, 2), "psi_mu": (1, 1, 1, 1)},
}


def type1_rep_state(rid: str, n: int, mu: complex | None = None) -> PureState:
    two = product_string(n, 2)
    table = {
        (3, "a"): lambda: _sum(_s(3, 0), two),
        (3, "b"): lambda: _sum(_s(3, 0), _s(3, 3), two),
        (3, "c"): lambda: _sum(_s(3, 1), two),
        (4, "1^4+2^4"): lambda: _sum(_s(4, 4), two),
        (4, "S41+2^4"): lambda: _sum(_s(4, 1), two),
        (4, "S42+2^4"): lambda: _sum(_s(4, 2), two),
        (4, "0^4+S42+2^4"): lambda: _sum(_s(4, 0), _s(4, 2), two),
        (4, "psi_mu"): lambda: symstates.psi_mu(mu),
    }
    try:
        return table[(n, rid)]()
    except KeyError:
        raise ValueError(f"unknown type-1 representative {rid!r} for n={n}") from None


def type1_reach(a: Sequence[complex], tol: float = 1e-7) -> tuple[str, complex | None, np.ndarray]:
    """(representative id, mu, A = A_2 (+) e) with A^(x)n |rep> proportional to Psi_1(a)."""
    a = [complex(x) for x in a]
    n = len(a) - 2
    if n not in TYPE1_QUBIT_REPS:
        raise ValueError("type-1 reach maps exist for n = 3, 4")
    if abs(a[n + 1]) <= tol:
        raise ValueError("the |2^n> coefficient must be nonzero")
    target = psi_type1(a)
    tq = qubit_part(target)
    if tq.norm() <= tol:
        raise ValueError("qubit part vanishes")
    deg = tuple(sorted(m for _, m in _distinct_points(tq, tol)))
    rid = next((r for r, dg in TYPE1_QUBIT_REPS[n].items() if tuple(sorted(dg)) == deg), None)
    if rid is None:
        raise ValueError(f"no representative with root degeneracy {deg}")
    mu = mu_for_generic(tq, tol) if rid == "psi_mu" else None
    src = type1_rep_state(rid, n, mu)
    A2 = qubit_slocc_map(qubit_part(src), tq, tol)
    if A2 is None:
        raise ArithmeticError("no Mobius map between the root configurations")
    img = apply_product(qubit_part(src), ProductOp.uniform(A2, n))
    c = np.vdot(img.amps, tq.amps) / np.vdot(img.amps, img.amps)
    # A^(x)n maps |2^n> to e^n |2^n>; match e^n / 1 with a_{n+1} / c
    e = complex(a[n + 1] / c) ** (1 / n)
    A = np.zeros((3, 3), dtype=complex)
    A[:2, :2] = A2
    A[2, 2] = e
    check_reach(src, A, target, 1e-8)
    return rid, mu, A


def j_invariant(state: PureState, tol: float = 1e-7) -> complex:
    """Klein j-invariant of four distinct Majorana roots of the qubit part."""
    pts = _distinct_points(qubit_part(state) if state.d > 2 else state, tol)
    if len(pts) != 4:
        raise ValueError("needs four distinct roots")
    lam = _cross_ratio([p for p, _ in pts])
    return complex(256 * (lam**2 - lam + 1) ** 3 / (lam**2 * (lam - 1) ** 2))


def qubit_symmetry_count(state: PureState) -> int:
    return len(qubit_symmetric_symmetry_search(qubit_part(state) if state.d > 2 else state))


def root_degeneracy(state: PureState, tol: float = 1e-7) -> tuple[int, ...]:
    return tuple(sorted(m for _, m in _distinct_points(qubit_part(state) if state.d > 2 else state, tol)))


# structure and fixtures -----------------------------------------------------------

def symmetry_structure_check(rep: QutritRep, S: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> bool:
    """Block-diagonal (type 1) or upper-triangular (type 2) zero pattern at every site."""
    if rep.type_tag == "type1":
        zeros = [(2, 0), (2, 1), (0, 2), (1, 2)]
    elif rep.type_tag == "type2":
        zeros = [(1, 0), (2, 0), (2, 1)]
    else:
        raise ValueError("structure check applies to type-1 and type-2 representatives")
    for s in S:
        m = np.asarray(s, dtype=complex)
        scale = max(np.linalg.norm(m), 1e-300)
        if any(abs(m[i, j]) > tol * scale for i, j in zeros):
            return False
    return True


def tridiagonal_gram(alpha: float, beta: complex, delta: float, eps: complex, nu: float) -> np.ndarray:
    return np.array(
        [[alpha, np.conj(beta), 0], [beta, delta, np.conj(eps)], [0, eps, nu]], dtype=complex
    )


def arrow_gram(alpha: float, beta: complex, gamma: complex, delta: float, nu: float) -> np.ndarray:
    return np.array(
        [[alpha, np.conj(beta), np.conj(gamma)], [beta, delta, 0], [gamma, 0, nu]], dtype=complex
    )


def isolation_fixture_grams(rep: QutritRep | str) -> list[GramFactor]:
    """Tridiagonal grams at sites 0 and 2, arrow grams at sites 1 and 3."""
    rid = rep if isinstance(rep, str) else rep.id
    if rid not in ("S42+2^4", "0^4+S42+2^4", "1^4+S42+F41", "S43+F41", "psi_mu"):
        raise ValueError("fixtures exist for the five 4-qutrit derogatory representatives")
    return [
        GramFactor(tridiagonal_gram(2.0, 0.5 + 0.3j, 2.5, 0.4 - 0.2j, 3.0)),
        GramFactor(arrow_gram(3.0, 0.6 - 0.1j, 0.3 + 0.4j, 2.0, 2.5)),
        GramFactor(tridiagonal_gram(2.2, -0.4 + 0.5j, 1.8, 0.3 + 0.3j, 2.6)),
        GramFactor(arrow_gram(2.4, 0.2 + 0.7j, -0.5 + 0.1j, 2.9, 1.7)),
    ]


def fixture_family(rep: QutritRep):
    return qutrit4_symmetry_family(rep.id, rep.mu)


def isolation_scene(rep: QutritRep, grid: locc.GridConfig | None = None) -> locc.LoccScene:
    fam = fixture_family(rep)
    return locc.LoccScene(fam.seed, fam, tuple(isolation_fixture_grams(rep)), grid=grid or locc.GridConfig())


H_TILDE = dict(alpha=2.0, beta=0.4 + 0.3j, delta=1.5, eps=0.2 - 0.35j, nu=1.8)
H_DIAG = ((1.3, 0.8, 1.1), (0.9, 1.4, 1.2), (1.6, 1.0, 0.7))


def _flip(s: np.ndarray, h: np.ndarray) -> np.ndarray:
    return s.conj().T @ h @ s


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    scene: locc.LoccScene
    expected: dict = field(default_factory=dict)


def _fixture_symmetry(rep: QutritRep) -> SymmetryElement:
    if rep.id == "S43+F41":
        s = np.diag([1, -1, -1]).astype(complex)
        ops = (s, s, s, -s)
    else:
        s = np.diag([1, -1, 1]).astype(complex)
        ops = (s, s, s, s)
    elem = SymmetryElement(ProductOp(ops), 1.0, "Explicit")
    if elem.residual(rep.state) > 1e-12:
        raise ArithmeticError("fixture symmetry does not stabilize the representative")
    return elem


def reach_convert_fixtures(rep: QutritRep, grid: locc.GridConfig | None = None) -> list[Fixture]:
    """Reachable-and-convertible scene for every representative plus the diagonal scene."""
    grid = grid or locc.GridConfig()
    fam = fixture_family(rep)
    sym = _fixture_symmetry(rep)
    s = sym.op.ops[0]
    p = H_TILDE
    h_tilde = tridiagonal_gram(p["alpha"], p["beta"], p["delta"], p["eps"], p["nu"])
    diag = [np.diag(v).astype(complex) for v in H_DIAG]
    flips_eps = rep.id != "S43+F41"
    eps_h = -2 * p["eps"] if flips_eps else p["eps"]
    eps_g = -p["eps"] / 3 if flips_eps else p["eps"]
    scene = locc.LoccScene(fam.seed, fam, (GramFactor(h_tilde), *map(GramFactor, diag)), grid=grid)
    out = [
        Fixture(
            "reach_convert",
            scene,
            {
                "reach": locc.WITNESSED,
                "convert": locc.WITNESSED,
                "symmetry": sym,
                "acting_site": 0,
                "reach_weights": (1 / 3, 2 / 3),
                "reach_initial_gram": tridiagonal_gram(p["alpha"], -p["beta"] / 3, p["delta"], eps_g, p["nu"]),
                "convert_weights": (0.25, 0.75),
                "convert_target": tridiagonal_gram(p["alpha"], -2 * p["beta"], p["delta"], eps_h, p["nu"]),
            },
        )
    ]
    if rep.id == "0^4+S42+2^4":
        g_diag = [np.diag(v).astype(complex) for v in ((2.0, 1.5, 1.8),) + H_DIAG]
        scene = locc.LoccScene(fam.seed, fam, tuple(map(GramFactor, g_diag)), grid=grid)
        out.append(
            Fixture(
                "convert_only",
                scene,
                {
                    "reach": locc.REFUTED,
                    "convert": locc.WITNESSED,
                    "symmetry": sym,
                    "acting_site": 0,
                    "convert_weights": (0.5, 0.5),
                },
            )
        )
    return out


# 5-qutrit class isolation ------------------------------------------------------------

def psi_derog_census(samples: int = 20, rng_seed: int = 7, tol: float = DEFAULT_TOL) -> dict:
    fam = psi_derog_stabilizer()
    rng = np.random.default_rng(rng_seed)
    counts, residuals = [], []
    for _ in range(samples):
        elem = fam.random_element(rng)
        residuals.append(elem.residual(fam.seed))
        counts.append(sum(is_defective(o, tol) for o in elem.op.ops))
    return {"samples": samples, "defective_counts": counts, "max_residual": max(residuals), "min_defective": min(counts)}


def psi_derog_isolation_report(samples: int = 20, rng_seed: int = 7) -> locc.Decision:
    """Class-level certificate: every nontrivial symmetry has two non-diagonalizable locals."""
    fam = psi_derog_stabilizer()
    census = psi_derog_census(samples, rng_seed)
    need = fam.attrs["min_defective_sites"]
    if census["min_defective"] < need:
        raise ArithmeticError("census contradicts the defective-site bound")
    report = {
        "census": census,
        "structural": "a_5 = -(a_1+...+a_4), so a nonzero vector has at least two nonzero entries",
        "scope": "all grams",
    }
    return locc.Decision("isolation", locc.REFUTED, None, "psi_derog_census", report)


def psi_derog_scene(grams: Sequence, grid: locc.GridConfig | None = None) -> locc.LoccScene:
    fam = psi_derog_stabilizer()
    return locc.LoccScene(fam.seed, fam, tuple(grams), grid=grid or locc.GridConfig())


# multi-copy factorization ------------------------------------------------------------

def multicopy_factorization(spec: DerogSpec) -> tuple[PureState, PureState]:
    """(Psi_{n_b}, E_k) with |i^(b)> -> |b> (x) |i> reassembling derog_ek(spec)."""
    sizes = set(spec.block_sizes)
    if len(sizes) != 1:
        raise ValueError("all block sizes must be equal")
    size = sizes.pop()
    n, K = spec.n, len(spec.block_sizes)
    outer = symstates.multi_dicke(n, spec.occupations) if K >= 2 else product_string(n, 0, 2)
    inner = symstates.e_k(spec.k, n)
    if inner.d < size:
        t = np.zeros((size,) * n, dtype=complex)
        t[(slice(0, inner.d),) * n] = inner.tensor
        inner = PureState.from_tensor(t)
    elif inner.d > size:
        inner = PureState.from_tensor(np.ascontiguousarray(inner.tensor[(slice(0, size),) * n]))
    return outer, inner


def reassemble(outer: PureState, inner: PureState, K: int | None = None) -> PureState:
    """Merge party-wise: level b*size + i for outer digit b and inner digit i."""
    n = outer.n
    K = K or outer.d
    size = inner.d
    ot = outer.tensor[(slice(0, K),) * n]
    t = np.tensordot(ot, inner.tensor, axes=0)
    order = [ax for i in range(n) for ax in (i, n + i)]
    t = np.transpose(t, order).reshape((K * size,) * n)
    return PureState.from_tensor(t)


def derog_eg2_state() -> PureState:
    """GHZ (x) 000 + W (x) W on three four-level parties."""
    sizes = (2, 2)
    return _sum(
        symstates.derog_ek(DerogSpec(1, (2, 1), sizes)),
        symstates.derog_ek(DerogSpec(0, (3, 0), sizes)),
        symstates.derog_ek(DerogSpec(0, (0, 3), sizes)),
    )


def is_mu_special(mu: complex, tol: float = DEFAULT_TOL) -> bool:
    return abs(mu - PSI_MU_SPECIAL) <= tol
