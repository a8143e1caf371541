"""Acceptance criteria executor: one named check per criterion, each with its tolerance."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import locc, protocol_sim as ps, qutrit_derog as qd, stabilizer as st, symstates as ss
from .quasicomm import (
    is_defective,
    lemma4_family,
    corner_gram,
    positive_solution_space,
    quasi_commutes,
)
from .tensor_core import GramFactor, ProductOp, PureState, apply_product, random_positive, relative_residual


@dataclass
class CriterionResult:
    number: int
    name: str
    tolerance: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} [{self.number:2d}] {self.name} (tol {self.tolerance})"

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "detail": self.detail,
        }


CRITERIA: dict[int, tuple[str, str, Callable[[np.random.Generator], tuple[bool, dict]]]] = {}


def criterion(number: int, name: str, tolerance: str):
    def wrap(fn):
        CRITERIA[number] = (name, tolerance, fn)
        return fn

    return wrap


def _strings_state(n: int, d: int, strings) -> PureState:
    t = np.zeros((d,) * n, dtype=complex)
    for s in strings:
        t[tuple(s)] += 1
    return PureState.from_tensor(t)


def _perms(word: str) -> set[tuple[int, ...]]:
    import itertools

    return {tuple(int(c) for c in p) for p in itertools.permutations(word)}


# criteria ----------------------------------------------------------------------

@criterion(1, "exact seed fixtures and multi-copy factorizations", "0")
def _c1(rng):
    ok_ek = np.array_equal(ss.e_k(2, 2).amps, _strings_state(2, 3, [(1, 1), (0, 2), (2, 0)]).amps)
    psi = ss.psi_derog_5qutrit().tensor
    twos = [
        idx for idx in np.ndindex(psi.shape) if sum(1 for x in idx if x == 2) >= 2 and psi[idx] != 0
    ]
    outer = {"000": _perms("000"), "W": _perms("001"), "Wbar": _perms("011"), "111": _perms("111")}
    inner = {0: _perms("000"), 1: _perms("001")}
    occ_to_outer = {(3, 0): "000", (2, 1): "W", (1, 2): "Wbar", (0, 3): "111"}
    mismatches = []
    for k in (0, 1):
        for occ, label in occ_to_outer.items():
            strings = [
                tuple(2 * b + i for b, i in zip(ob, ib)) for ob in outer[label] for ib in inner[k]
            ]
            expect = _strings_state(3, 4, strings)
            got = ss.derog_ek(ss.DerogSpec(k, occ, (2, 2)))
            if not np.array_equal(expect.amps, got.amps):
                mismatches.append(f"E_{k}^{occ}")
    return ok_ek and not twos and not mismatches, {
        "ek22": ok_ek,
        "psi_derog_double_two_strings": len(twos),
        "factorization_mismatches": mismatches,
    }


@criterion(2, "Toeplitz B (x) B^-1 symmetry of E_k", "1e-10")
def _c2(rng):
    worst = 0.0
    for k in range(1, 5):
        for n in range(3, 7):
            seed = ss.e_k(k, n)
            for _ in range(20):
                entries = rng.normal(size=k + 1) + 1j * rng.normal(size=k + 1)
                entries[0] = entries[0] + np.sign(entries[0].real or 1.0)
                i, j = rng.choice(n, size=2, replace=False)
                elem = st.toeplitz_bb(k, entries, int(i), int(j), n)
                worst = max(worst, elem.residual(seed))
    return worst <= 1e-10, {"max_residual": worst, "cases": 320}


@criterion(3, "closed form of Sbar for k = 2", "1e-12")
def _c3(rng):
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 8))
        y1 = complex(rng.normal(), rng.normal())
        y2 = complex(rng.normal(), rng.normal())
        s = st.solve_sbar(2, n, (y1, y2))
        e01 = -y2 / (y1 + n - 1)
        e02 = -(n - 1) * y2**2 / (2 * (y1 + n - 1) ** 2)
        if s is None:
            worst = math.inf
            break
        worst = max(worst, abs(s[0, 1] - e01), abs(s[0, 2] - e02))
    singular_ok = True
    for n in (3, 4, 5):
        y1 = -(n - 1)
        absent = st.solve_sbar(2, n, (y1, 0.7 - 0.2j)) is None
        free = st.solve_sbar(2, n, (y1, 0.0), free={1: 0.35 + 0.1j})
        singular_ok &= absent and free is not None and abs(free[0, 1] - (0.35 + 0.1j)) <= 1e-12
    return worst <= 1e-12 and singular_ok, {"max_error": worst, "singular_branch_ok": singular_ok}


@criterion(4, "diagonal law of the E_k symmetries", "1e-10")
def _c4(rng):
    worst_res, worst_diag, lam_err, done = 0.0, 0.0, 0.0, 0
    while done < 100:
        k = int(rng.integers(1, 5))
        n = int(rng.integers(max(3, k - 1), 7))
        x = complex(rng.normal(), rng.normal())
        y = rng.normal(size=k) + 1j * rng.normal(size=k)
        try:
            elem = st.ek_an_symmetry(k, n, x, y)
        except ValueError:
            continue
        seed = ss.e_k(k, n)
        worst_res = max(worst_res, elem.residual(seed) / max(1.0, abs(elem.lam)))
        lam_err = max(lam_err, abs(elem.lam - x**k) / abs(x**k))
        a = elem.op.ops[0]
        worst_diag = max(worst_diag, max(abs(a[l, l] - x**l) / abs(x**l) for l in range(k + 1)))
        done += 1
    ok = max(worst_res, worst_diag, lam_err) <= 1e-10
    return ok, {"max_residual": worst_res, "max_diag_error": worst_diag, "max_lambda_error": lam_err}


def _protocol_stats(proto: ps.LoccProtocol, target: PureState) -> dict:
    outs = ps.simulate(proto)
    return {
        "completeness": max(proto.completeness_residuals()),
        "leaf": max(ps.leaf_residuals(outs, target)),
        "leaves": len(outs),
        "total_probability": ps.total_probability(outs),
    }


@criterion(5, "W-class protocol", "completeness 1e-12, leaves 1e-10")
def _c5(rng):
    rows, ok = [], True
    for n in (3, 4, 5):
        for pp in (0.1, 0.5, 0.9):
            s = _protocol_stats(ps.w_class_protocol(n, pp), ps.w_target(n, pp))
            ok &= s["completeness"] <= 1e-12 and s["leaf"] <= 1e-10 and s["leaves"] == 2**n
            rows.append({"n": n, "p": pp, **s})
    phases = all(ps.w_round_phase(k) == math.acos(math.sqrt((k - 1) / k)) for k in range(1, 6))
    return ok and phases, {"runs": rows, "phases_exact": phases}


@criterion(6, "E_k-class protocol (k=2, n=4, p'=0.3)", "completeness 1e-12, leaves 1e-10")
def _c6(rng):
    proto = ps.ek_class_protocol(2, 4, 0.3)
    s = _protocol_stats(proto, ps.ek_class_target(2, 4, 0.3))
    return s["completeness"] <= 1e-12 and s["leaf"] <= 1e-10, s


@criterion(7, "GHZ-class protocol", "completeness 1e-12, leaves 1e-10")
def _c7(rng):
    worst_c, worst_l = 0.0, 0.0
    for n in (3, 4):
        for _ in range(10):
            proto = ps.ghz_class_protocol(n, ps.random_ghz_gx(rng))
            s = _protocol_stats(proto, proto.declared_target)
            worst_c, worst_l = max(worst_c, s["completeness"]), max(worst_l, s["leaf"])
    return worst_c <= 1e-12 and worst_l <= 1e-10, {"max_completeness": worst_c, "max_leaf": worst_l}


@criterion(8, "4-qutrit probabilistic protocol", "1e-9; monotone gap > 1e-6")
def _c8(rng):
    proto = ps.qutrit4_probabilistic_protocol()
    res = proto.completeness_residuals()
    outs = ps.simulate(proto, completeness_tol=1e-9)
    leaf = ps.leaf_residuals(outs, proto.declared_target)
    cert = ps.qutrit4_depth1_certificate()
    ok = len(res) == 3 and max(res) <= 1e-9 and max(leaf) <= 1e-9
    ok &= cert["monotone_gap"] > 1e-6 and not cert["proportional"]
    return ok, {
        "p": ps.QUTRIT4_P,
        "q": ps.QUTRIT4_Q,
        "completeness": res,
        "leaf_residuals": leaf,
        "monotone_gap": cert["monotone_gap"],
        "spectral_gap": cert["spectral_gap"],
    }


@criterion(9, "generic symmetric qubit stabilizers", "1e-8")
def _c9(rng):
    trivial_fail, nontrivial_fail, worst = 0, 0, 0.0
    for n in (5, 6):
        for _ in range(100):
            elems = st.qubit_symmetric_symmetry_search(ss.random_symmetric_qubit_state(n, rng))
            if any(not e.is_trivial(1e-6) for e in elems):
                trivial_fail += 1
    for n in (3, 4):
        for _ in range(100):
            state = ss.random_symmetric_qubit_state(n, rng)
            found = [e for e in st.qubit_symmetric_symmetry_search(state) if not e.is_trivial(1e-6)]
            if not found:
                nontrivial_fail += 1
            else:
                worst = max(worst, min(e.residual(state) for e in found))
    ok = trivial_fail == 0 and nontrivial_fail == 0 and worst <= 1e-8
    return ok, {"n56_nontrivial_found": trivial_fail, "n34_missing": nontrivial_fail, "max_residual": worst}


def _random_jordan_nondiag(rng: np.random.Generator) -> np.ndarray:
    d = int(rng.integers(2, 5))
    j = np.diag(rng.normal(size=d) + 1j * rng.normal(size=d))
    lead = int(rng.integers(0, d - 1))
    j[lead + 1, lead + 1] = j[lead, lead]
    j[lead, lead + 1] = 1.0
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a @ j @ np.linalg.inv(a)


@criterion(10, "quasi-commutation dichotomy", "1e-9")
def _c10(rng):
    from scipy.stats import unitary_group

    spurious = 0
    for _ in range(100):
        if positive_solution_space(_random_jordan_nondiag(rng)) is not None:
            spurious += 1
    missed, worst = 0, 0.0
    for _ in range(100):
        d = int(rng.integers(2, 5))
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        u = unitary_group.rvs(d, random_state=rng)
        b = np.linalg.inv(a) @ u @ a
        space = positive_solution_space(b)
        A = a.conj().T @ a
        if space is None or not space.contains(A, 1e-9):
            missed += 1
            continue
        worst = max(worst, np.linalg.norm(b.conj().T @ A @ b - A) / np.linalg.norm(A))
    return spurious == 0 and missed == 0 and worst <= 1e-9, {
        "nondiag_with_solution": spurious,
        "unitary_similar_missed": missed,
        "max_residual": worst,
    }


@criterion(11, "quasi-commuting family of the corner gram", "1e-9")
def _c11(rng):
    members_fail, perturb_pass = 0, 0
    xs = np.exp(2j * np.pi * np.arange(12) / 12)
    for k in range(1, 5):
        for a in (0.3, -1.2, 0.5j, 1 + 1j, 2.5):
            G = corner_gram(k, a)
            for x in xs:
                m = lemma4_family(k, a, x)
                if quasi_commutes(m, G, 1e-9) is None:
                    members_fail += 1
                bad = m.copy()
                bad[k - 1, k] += 1e-6
                if quasi_commutes(bad, G, 1e-9) is not None:
                    perturb_pass += 1
    return members_fail == 0 and perturb_pass == 0, {
        "members_failing": members_fail,
        "perturbations_passing": perturb_pass,
        "grid": 4 * 5 * 12,
    }


def isolation_cases() -> list[tuple[str, locc.LoccScene]]:
    out = []
    for k, a in ((2, (1.0, 2.0, 3.0, 4.0)), (3, (0.6,) * 4)):
        fam = st.ek_stabilizer(k, 4)
        out.append((f"ek k={k}", locc.LoccScene(fam.seed, fam, tuple(locc.isolated_witness_ek(k, 4, a)))))
    for spec in ((2, 1), (0, 0, 0)):
        bs = ss.BlockSpec(spec)
        fam = st.direct_sum_stabilizer(bs, 4)
        out.append((f"sums {spec}", locc.LoccScene(fam.seed, fam, tuple(locc.isolated_witness_sums(bs, 4)))))
    fam = st.dicke_stabilizer(5, 2)
    out.append(("mub d=2", locc.LoccScene(fam.seed, fam, tuple(locc.mub_isolated_witness(2, 5, [1.0, 2.0])))))
    fam = st.multi_dicke_stabilizer(5, (2, 2, 1))
    out.append(("mub d=3", locc.LoccScene(fam.seed, fam, tuple(locc.mub_isolated_witness(3, 5, [1.0, 2.0, 3.0])))))
    for rep in qd.representatives(4):
        out.append((f"qutrit4 {rep.id}", qd.isolation_scene(rep)))
    return out


@criterion(12, "isolation witnesses", "structural closure")
def _c12(rng):
    rows, ok = {}, True
    for name, scene in isolation_cases():
        d = locc.weakly_isolated(scene)
        good = d.verdict == locc.REFUTED and d.argument is not None and d.isolated is True
        ok &= good
        rows[name] = {"verdict": d.verdict, "argument": d.argument}
    return ok, rows


@criterion(13, "reach/convert fixtures with their mixing weights", "1e-12")
def _c13(rng):
    rows, ok = [], True
    for rep in qd.representatives(4):
        for fx in qd.reach_convert_fixtures(rep):
            e = fx.expected
            sym = e["symmetry"]
            reach = locc.reachable(fx.scene, [sym])
            conv = locc.convertible_locc1(fx.scene, [sym], acting_sites=[e["acting_site"]])
            good = reach.verdict == e["reach"] and conv.verdict == e["convert"]
            cw = conv.payload.weights if conv.payload else ()
            good &= np.allclose(cw, e["convert_weights"], rtol=0, atol=1e-12)
            err = 0.0
            if "convert_target" in e:
                err = float(np.abs(conv.payload.target_gram - e["convert_target"]).max())
            if "reach_weights" in e:
                p = e["reach_weights"][0]
                proto = locc.build_reaching_protocol(fx.scene, sym, e["acting_site"], p)
                outs = ps.simulate(proto)
                good &= ps.is_deterministic(outs, proto.declared_target)
                H = fx.scene.grams[0].matrix
                s = sym.op.ops[0]
                mixed = p * H + (1 - p) * s.conj().T @ H @ s
                err = max(err, float(np.abs(mixed - e["reach_initial_gram"]).max()))
            good &= err <= 1e-12
            ok &= good
            rows.append(
                {"rep": rep.id, "scene": fx.name, "reach": reach.verdict, "convert": conv.verdict,
                 "convert_weights": list(cw), "max_gram_error": err}
            )
    return ok, {"scenes": rows}


@criterion(14, "SLOCC reach maps onto the type-2 family", "1e-9")
def _c14(rng):
    worst = {}
    for rep in qd.type2_candidates(4):
        w = 0.0
        for _ in range(20):
            b = qd.random_admissible_b(rep.id, rng)
            A = qd.slocc_reach(rep, b)
            w = max(w, qd.reach_residual(rep.state, A, qd.psi_type2(b)))
        worst[rep.id] = w
    return max(worst.values()) <= 1e-9, {"max_residual": worst}


@criterion(15, "class-level isolation of the 5-qutrit derogatory state", "1e-10")
def _c15(rng):
    fam = st.psi_derog_stabilizer()
    seed = fam.seed
    worst, low = 0.0, []
    for _ in range(20):
        elem = fam.random_element(rng)
        worst = max(worst, elem.residual(seed))
        if not elem.is_trivial():
            count = sum(is_defective(o) for o in elem.op.ops)
            if count < 2:
                low.append(count)
    verdicts = []
    for _ in range(5):
        grams = [GramFactor(random_positive(3, rng)) for _ in range(5)]
        verdicts.append(locc.reachable(qd.psi_derog_scene(grams)).verdict)
    ok = worst <= 1e-10 and not low and all(v == locc.REFUTED for v in verdicts)
    return ok, {"max_residual": worst, "under_defective": low, "reach_verdicts": verdicts}


@criterion(16, "monotones bound the conversion probability", "1e-9")
def _c16(rng):
    n = 5
    G = [GramFactor(random_positive(2, rng)) for _ in range(n)]
    exact = locc.max_conversion_probability(G, G, 1.7, 1.7) == 1.0
    worst = math.inf
    pairs = 0
    while pairs < 10:
        seed = ss.random_symmetric_qubit_state(n, rng)
        if any(not e.is_trivial(1e-6) for e in st.qubit_symmetric_symmetry_search(seed)):
            continue
        g = [np.linalg.cholesky(random_positive(2, rng)).conj().T for _ in range(n)]
        h = [np.linalg.cholesky(random_positive(2, rng)).conj().T for _ in range(n)]
        psi = apply_product(seed, ProductOp(tuple(g)))
        phi = apply_product(seed, ProductOp(tuple(h)))
        Gs = [x.conj().T @ x for x in g]
        Hs = [x.conj().T @ x for x in h]
        closed = locc.max_conversion_probability(Gs, Hs, psi.norm(), phi.norm())
        xs = rng.normal(size=(10_000, n, 2)) + 1j * rng.normal(size=(10_000, n, 2))
        num = np.ones(len(xs))
        den = np.ones(len(xs))
        for i in range(n):
            num *= np.einsum("si,ij,sj->s", xs[:, i].conj(), Gs[i], xs[:, i]).real
            den *= np.einsum("si,ij,sj->s", xs[:, i].conj(), Hs[i], xs[:, i]).real
        ratio = (num / psi.norm() ** 2) / (den / phi.norm() ** 2)
        worst = min(worst, float(ratio.min() - closed))
        pairs += 1
    return exact and worst >= -1e-9, {"self_probability_exact": exact, "min_sampled_minus_closed": worst}


# runner -------------------------------------------------------------------------

def run_criterion(number: int, seed: int = 7) -> CriterionResult:
    name, tol, fn = CRITERIA[number]
    rng = np.random.default_rng([seed, number])
    t0 = time.perf_counter()
    try:
        passed, detail = fn(rng)
    except Exception as exc:  # a crash is a failure with its reason recorded
        passed, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    return CriterionResult(number, name, tol, bool(passed), detail, time.perf_counter() - t0)


def run_all(seed: int = 7, only: list[int] | None = None) -> list[CriterionResult]:
    return [run_criterion(k, seed) for k in sorted(CRITERIA) if only is None or k in only]


def format_table(results: list[CriterionResult]) -> str:
    lines = [r.line() for r in results]
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return "\n".join(lines)
