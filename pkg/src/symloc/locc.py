"""Reachability, one-round convertibility and weak isolation.

All three decisions reduce to one question about a stabilizer family and
a list of site grams: which symmetries satisfy S^dag G S ~ G at which
sites.  The search below scans each family on a deterministic grid.
Refutations come from structural closure arguments that are registered
per family kind, because a finite scan cannot rule out an infinite group.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Sequence

import numpy as np
from scipy.linalg import schur
from scipy.optimize import minimize

from .quasicomm import is_defective, corner_gram, quasi_commutation_residual, quasi_commutes
from .stabilizer import COMPLETE, StabilizerFamily, SymmetryElement, nontriviality
from .symstates import BlockSpec
from .tensor_core import DEFAULT_TOL, GramFactor, ProductOp, PureState

WITNESSED = "Witnessed"
REFUTED = "RefutedComplete"
NO_WITNESS = "NoWitnessFound"

NONTRIVIAL_TOL = 1e-7
SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class GridConfig:
    angular_points: int = 12
    radial_points: int = 5
    joint_samples: int = 32
    refine_steps: int = 2
    seed: int = 7

    def __post_init__(self) -> None:
        if self.angular_points < 2 or self.radial_points < 2:
            raise ValueError("grid sizes must be >= 2")

    def magnitudes(self) -> np.ndarray:
        mags = np.geomspace(0.5, 2.0, self.radial_points)
        if not np.any(np.isclose(mags, 1.0)):
            mags = np.sort(np.append(mags, 1.0))
        return mags

    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.angular_points) / self.angular_points

    def to_json(self) -> dict:
        return {
            "angular_points": self.angular_points,
            "radial_points": self.radial_points,
            "joint_samples": self.joint_samples,
            "refine_steps": self.refine_steps,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class LoccScene:
    seed: PureState
    stabilizer: StabilizerFamily
    grams: tuple[GramFactor, ...]
    tol: float = DEFAULT_TOL
    grid: GridConfig = field(default_factory=GridConfig)

    def __post_init__(self) -> None:
        grams = tuple(g if isinstance(g, GramFactor) else GramFactor(np.asarray(g)) for g in self.grams)
        object.__setattr__(self, "grams", grams)
        if len(grams) != self.seed.n:
            raise ValueError("one gram per site required")
        if any(g.d != self.seed.d for g in grams):
            raise ValueError("gram dimension does not match the seed")
        if not np.array_equal(self.seed.amps, self.stabilizer.seed.amps):
            raise ValueError("seed does not match the stabilizer family's seed")
        for g in grams:
            if np.linalg.eigvalsh(g.matrix)[0] <= 0:
                raise ValueError("grams must be strictly positive")

    @property
    def n(self) -> int:
        return self.seed.n

    def gram_arrays(self) -> list[np.ndarray]:
        return [g.matrix for g in self.grams]


@dataclass(frozen=True, eq=False)
class ConversionCertificate:
    acting_site: int
    target_gram: np.ndarray
    symmetries: tuple[tuple[SymmetryElement, float], ...]
    residual: float
    nonprop_checked: int
    recipe: str

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.symmetries)

    def to_json(self) -> dict:
        from .serialization import encode_matrix

        return {
            "acting_site": self.acting_site,
            "target_gram": encode_matrix(self.target_gram),
            "weights": list(self.weights),
            "symmetries": [s.to_json() for s, _ in self.symmetries],
            "residual": self.residual,
            "nonprop_checked": self.nonprop_checked,
            "recipe": self.recipe,
        }


@dataclass(frozen=True, eq=False)
class ReachWitness:
    symmetry: SymmetryElement
    site: int

    def to_json(self) -> dict:
        return {"site": self.site, "symmetry": self.symmetry.to_json()}


@dataclass(frozen=True, eq=False)
class NonIsolationWitness:
    symmetry: SymmetryElement
    sites: tuple[int, ...]

    def to_json(self) -> dict:
        return {"sites": list(self.sites), "symmetry": self.symmetry.to_json()}


@dataclass(frozen=True, eq=False)
class Decision:
    mode: str
    verdict: str
    payload: Any = None
    argument: str | None = None
    report: dict = field(default_factory=dict)

    @property
    def isolated(self) -> bool | None:
        """For isolation decisions: True, False, or None when undecided."""
        if self.mode != "isolation":
            raise ValueError("only isolation decisions carry an isolation flag")
        return {REFUTED: True, WITNESSED: False}.get(self.verdict)

    def to_json(self) -> dict:
        out = {"mode": self.mode, "verdict": self.verdict, "argument": self.argument, "report": self.report}
        if self.mode == "isolation":
            out["isolated"] = self.isolated
        if self.payload is not None:
            out["payload"] = self.payload.to_json()
        return out


# grid search --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Evaluated:
    element: SymmetryElement
    lams: tuple[float | None, ...]
    residuals: tuple[float, ...]
    site_nontrivial: tuple[bool, ...]
    origin: str

    @property
    def nontrivial(self) -> bool:
        return any(self.site_nontrivial)

    def passing(self) -> list[int]:
        return [i for i, lam in enumerate(self.lams) if lam is not None]


def _candidates(family: StabilizerFamily, grid: GridConfig) -> Iterator[tuple[int, Any, np.ndarray, str]]:
    comps = family.components
    for ci, comp in enumerate(comps):
        for ch in comp.choices:
            yield ci, ch, comp.default_params(), "default"
    values = np.array([r * np.exp(1j * t) for r in grid.magnitudes() for t in grid.angles()])
    for ci, comp in enumerate(comps):
        base = comp.default_params()
        for ch in comp.choices:
            for axis in range(comp.parameter_count):
                for v in values:
                    p = base.copy()
                    p[axis] = v
                    yield ci, ch, p, "axis"
    rng = np.random.default_rng(grid.seed)
    continuous = [ci for ci, c in enumerate(comps) if c.parameter_count > 0]
    for t in range(grid.joint_samples if continuous else 0):
        ci = continuous[t % len(continuous)]
        comp = comps[ci]
        ch = comp.choices[int(rng.integers(len(comp.choices)))]
        yield ci, ch, comp.random_params(rng), "joint"


def _evaluate(elem: SymmetryElement, grams: Sequence[np.ndarray], tol: float, origin: str) -> Evaluated:
    lams, res, nt = [], [], []
    for op, g in zip(elem.op.ops, grams):
        lams.append(quasi_commutes(op, g, tol))
        res.append(quasi_commutation_residual(op, g))
        nt.append(nontriviality(op) > NONTRIVIAL_TOL)
    return Evaluated(elem, tuple(lams), tuple(res), tuple(nt), origin)


def _safe_sample(comp, params, choice) -> SymmetryElement | None:
    try:
        with np.errstate(all="ignore"):
            elem = comp.sample(params, choice)
        if not all(np.all(np.isfinite(o)) for o in elem.op.ops):
            return None
        return elem
    except (ValueError, np.linalg.LinAlgError, ZeroDivisionError, FloatingPointError):
        return None


def _objective(ev: Evaluated) -> float:
    n = len(ev.residuals)
    mu = max(nontriviality(o) for o in ev.element.op.ops)
    if mu < 1e-6:
        return 1.0
    best = sorted(ev.residuals)[: n - 1]
    return float(sum(r * r for r in best) / mu**2)


@dataclass
class SearchResult:
    evaluated: list[Evaluated]
    report: dict


def _family_search(
    scene: LoccScene, extra: Sequence[SymmetryElement] = (), refine: bool = True
) -> SearchResult:
    grams = scene.gram_arrays()
    fam = scene.stabilizer
    out: list[Evaluated] = []
    for elem in extra:
        out.append(_evaluate(elem, grams, scene.tol, "given"))
    count = 0
    for ci, ch, params, origin in _candidates(fam, scene.grid):
        elem = _safe_sample(fam.components[ci], params, ch)
        if elem is None:
            continue
        count += 1
        out.append(_evaluate(elem, grams, scene.tol, origin))
    refined = _refine(scene, out) if refine else []
    out.extend(refined)
    report = {
        "grid": scene.grid.to_json(),
        "family": fam.describe(),
        "candidates_evaluated": count,
        "refined_candidates": len(refined),
    }
    return SearchResult(out, report)


def _refine(scene: LoccScene, evaluated: list[Evaluated]) -> list[Evaluated]:
    """Local minimization of the n-1 site residual from the best grid points."""
    if scene.grid.refine_steps <= 0:
        return []
    n = scene.n
    if any(ev.nontrivial and len(ev.passing()) >= n - 1 for ev in evaluated):
        return []
    fam = scene.stabilizer
    grams = scene.gram_arrays()
    scored = []
    for ci, ch, params, _ in _candidates(fam, scene.grid):
        comp = fam.components[ci]
        if comp.parameter_count == 0:
            continue
        elem = _safe_sample(comp, params, ch)
        if elem is None:
            continue
        scored.append((_objective(_evaluate(elem, grams, scene.tol, "grid")), ci, ch, params))
        if len(scored) > 4000:
            break
    scored.sort(key=lambda t: t[0])
    results = []
    for _, ci, ch, params in scored[: scene.grid.refine_steps]:
        comp = fam.components[ci]
        m = comp.parameter_count

        def fun(x: np.ndarray) -> float:
            elem = _safe_sample(comp, x[:m] + 1j * x[m:], ch)
            if elem is None:
                return 1.0
            return _objective(_evaluate(elem, grams, scene.tol, "refine"))

        x0 = np.concatenate([params.real, params.imag])
        with np.errstate(all="ignore"):
            res = minimize(fun, x0, method="Nelder-Mead", options={"maxiter": 400, "xatol": 1e-12, "fatol": 1e-24})
        elem = _safe_sample(comp, res.x[:m] + 1j * res.x[m:], ch)
        if elem is not None:
            results.append(_evaluate(elem, grams, scene.tol, "refine"))
    return results


# closure arguments -------------------------------------------------------

ISOLATION_MODES = ("reach", "convert", "isolation")


@dataclass(frozen=True)
class ClosureArgument:
    name: str
    modes: tuple[str, ...]
    check: Callable[[LoccScene], tuple[bool, str]]


def _normalized(g: np.ndarray) -> np.ndarray:
    return g / g[0, 0].real


def _is_diagonal(g: np.ndarray, tol: float) -> bool:
    return bool(np.linalg.norm(g - np.diag(np.diag(g))) <= tol * np.linalg.norm(g))


def _offdiag_connected(g: np.ndarray, tol: float) -> bool:
    d = g.shape[0]
    adj = np.abs(g) > tol * np.linalg.norm(g)
    seen, stack = {0}, [0]
    while stack:
        a = stack.pop()
        for b in range(d):
            if b not in seen and adj[a, b]:
                seen.add(b)
                stack.append(b)
    return len(seen) == d


def _diagonal_reach(scene: LoccScene) -> tuple[bool, str]:
    fam = scene.stabilizer
    if not fam.attrs.get("diagonal") or fam.attrs.get("diag_law") not in ("uniform", "product_one"):
        return False, "family is not diagonal"
    if not all(_is_diagonal(g, scene.tol) for g in scene.gram_arrays()):
        return False, "grams are not all diagonal"
    return True, (
        "diagonal symmetries quasi-commute with diagonal grams exactly when their moduli are constant; "
        f"the {fam.attrs['diag_law']} law makes this hold at all sites or at none"
    )


def _diagonal_isolation(scene: LoccScene) -> tuple[bool, str]:
    fam = scene.stabilizer
    law = fam.attrs.get("diag_law")
    if not fam.attrs.get("diagonal") or law not in ("uniform", "product_one"):
        return False, "family is not diagonal"
    connected = [i for i, g in enumerate(scene.gram_arrays()) if _offdiag_connected(g, scene.tol)]
    need = 2 if law == "uniform" else scene.n
    if len(connected) >= need:
        return True, f"connected off-diagonal gram graphs at sites {connected} force trivial locals"
    return False, f"only {len(connected)} sites have connected grams, need {need}"


def _uniform_product(scene: LoccScene) -> tuple[bool, str]:
    fam = scene.stabilizer
    if not fam.attrs.get("non_es"):
        return False, "seed not certified non-ES"
    g0 = _normalized(scene.grams[0].matrix)
    if all(np.linalg.norm(_normalized(g) - g0) <= scene.tol * np.linalg.norm(g0) for g in scene.gram_arrays()):
        return True, "non-ES symmetries are uniform products and all grams agree, so quasi-commutation holds at all sites or none"
    return False, "grams differ between sites"


def corner_parameter(k: int, g: np.ndarray, tol: float) -> complex | None:
    """a with g ~ corner_gram(k, a) up to a positive factor, else None."""
    gn = _normalized(g)
    a = gn[k - 1, k]
    if np.linalg.norm(gn - corner_gram(k, a)) <= tol * np.linalg.norm(gn):
        return complex(a)
    return None


def _ek_corner(scene: LoccScene) -> tuple[bool, str]:
    fam = scene.stabilizer
    if fam.kind != "ek" or fam.attrs["k"] < 2:
        return False, "not an E_k family with k >= 2"
    k = fam.attrs["k"]
    avals = [corner_parameter(k, g, scene.tol) for g in scene.gram_arrays()]
    if any(a is None or abs(a) <= scene.tol for a in avals):
        return False, "grams are not all of the corner form with nonzero a"
    if k == 2 and len({complex(round(a.real, 9), round(a.imag, 9)) for a in avals}) < len(avals):
        return False, "k = 2 needs pairwise different a_i"
    return True, f"corner-form grams with a = {[complex(a) for a in avals]} admit only trivial quasi-commuting symmetries"


def match_sum_construction(spec: BlockSpec, g: np.ndarray, tol: float) -> dict | None:
    """Recover (a_b, p_b, d_b, c_b) from a gram built by the junction construction."""
    gn = _normalized(g)
    ks, offs = spec.excitations, spec.offsets
    mask = np.zeros(gn.shape, dtype=bool)
    out: dict[str, dict[int, complex]] = {"a": {}, "p": {}, "d": {}, "c": {}}
    scale = np.linalg.norm(gn)
    for b, k in enumerate(ks):
        lv = spec.levels(b)
        sub = gn[lv.start: lv.stop, lv.start: lv.stop]
        mask[lv.start: lv.stop, lv.start: lv.stop] = True
        if k >= 2:
            a = sub[k - 1, k]
            if abs(a) <= tol or np.linalg.norm(sub - corner_gram(k, a)) > tol * scale:
                return None
            out["a"][b] = complex(a)
        elif k == 1:
            if abs(sub[0, 0] - 1) > tol * scale or abs(sub[0, 1]) <= tol:
                return None
            out["p"][b] = complex(sub[0, 1])
            out["d"][b] = complex(sub[1, 1])
        elif abs(sub[0, 0] - 1) > tol * scale:
            return None
    for b in range(1, len(ks)):
        c = gn[offs[b - 1], offs[b]]
        if abs(c) <= tol:
            return None
        out["c"][b] = complex(c)
        mask[offs[b - 1], offs[b]] = mask[offs[b], offs[b - 1]] = True
    if np.linalg.norm(gn[~mask]) > tol * scale:
        return None
    return out


def sum_construction_rules(spec: BlockSpec, matches: Sequence[dict], tol: float = 1e-9) -> list[str]:
    """Violated parameter rules of the junction construction (empty when valid)."""
    ks = spec.excitations
    problems = []
    if len(ks) < 2:
        problems.append("need at least two blocks")
    if all(k == 0 for k in ks) and len(ks) < 3:
        problems.append("an all-k=0 spec needs at least three blocks")

    def distinct(vals) -> bool:
        vals = list(vals)
        return all(abs(x - y) > tol for x, y in itertools.combinations(vals, 2))

    for i, m in enumerate(matches):
        if not distinct(abs(a) for a in m["a"].values()):
            problems.append(f"site {i}: |a_b| not pairwise different")
        if not distinct(m["d"].values()):
            problems.append(f"site {i}: d_b not pairwise different")
        zero_c = [m["c"][b] for b, k in enumerate(ks) if k == 0 and b in m["c"]]
        if not distinct(abs(c) for c in zero_c):
            problems.append(f"site {i}: |c_b| of k=0 blocks not pairwise different")
    for b, k in enumerate(ks):
        if k == 2 and not distinct(m["a"][b] for m in matches):
            problems.append(f"block {b}: k=2 needs a_(i,b) pairwise different across sites")
    return problems


def _direct_sum_gconstruction(scene: LoccScene) -> tuple[bool, str]:
    fam = scene.stabilizer
    if fam.kind != "direct_sum":
        return False, "not a direct-sum family"
    spec = BlockSpec(fam.attrs["spec"])
    matches = [match_sum_construction(spec, g, scene.tol) for g in scene.gram_arrays()]
    if any(m is None for m in matches):
        return False, "grams do not follow the junction construction"
    problems = sum_construction_rules(spec, matches)
    if problems:
        return False, "; ".join(problems)
    return True, "junction-coupled block grams exclude block permutations and force trivial gauges"


def qutrit4_pattern(g: np.ndarray, tol: float) -> int | None:
    """1 for the tridiagonal pattern, 2 for the arrow pattern, None otherwise."""
    gn = _normalized(g)
    s = tol * np.linalg.norm(gn)
    nz = lambda v: abs(v) > s
    if nz(gn[0, 1]) and nz(gn[1, 2]) and not nz(gn[0, 2]):
        return 1
    if nz(gn[0, 1]) and nz(gn[0, 2]) and not nz(gn[1, 2]):
        return 2
    return None


def _qutrit4_patterns(scene: LoccScene) -> tuple[bool, str]:
    if scene.stabilizer.kind != "qutrit4":
        return False, "not a 4-qutrit derogatory family"
    pats = [qutrit4_pattern(g, scene.tol) for g in scene.gram_arrays()]
    if any(p is None for p in pats):
        return False, f"violating patterns needed at all sites, got {pats}"
    return True, f"patterns {pats} exclude every nontrivial local; trivial locals at three sites force the fourth"


def _mub(scene: LoccScene) -> tuple[bool, str]:
    if not scene.stabilizer.attrs.get("non_es"):
        return False, "seed not certified non-ES"
    tol = scene.tol
    ident, spectral = [], []
    for i, g in enumerate(scene.gram_arrays()):
        gn = _normalized(g)
        if np.linalg.norm(gn - np.eye(len(gn))) <= tol:
            ident.append(i)
            continue
        vals, vecs = np.linalg.eigh(g)
        if np.min(np.diff(vals)) > 1e3 * tol * vals[-1]:
            spectral.append((i, vecs))
    if len(ident) < 2:
        return False, "need two sites with gram proportional to the identity"
    for trio in itertools.combinations(spectral, 3):
        if all(np.min(np.abs(a[1].conj().T @ b[1])) > 1e-6 for a, b in itertools.combinations(trio, 2)):
            return True, (
                f"identity grams at {ident[:2]} make A proportional to a unitary; nondegenerate grams at "
                f"{[t[0] for t in trio]} with unbiased eigenbases then force A ~ 1"
            )
    return False, "no three nondegenerate sites with pairwise unbiased eigenbases"


def _psi_derog_census(scene: LoccScene) -> tuple[bool, str]:
    fam = scene.stabilizer
    need = fam.attrs.get("min_defective_sites")
    if fam.kind != "psi_derog" or need is None or need < 2:
        return False, "no defective-site census for this family"
    return True, f"every nontrivial symmetry has >= {need} non-diagonalizable locals"


def _trivial_group(scene: LoccScene) -> tuple[bool, str]:
    fam = scene.stabilizer
    if not all(c.parameter_count == 0 for c in fam.components):
        return False, "family has continuous parameters"
    for comp in fam.components:
        for ch in comp.choices:
            if not comp.sample(None, ch).is_trivial(NONTRIVIAL_TOL):
                return False, "family has nontrivial elements"
    return True, "the stabilizer contains only multiples of the identity"


CLOSURE_ARGUMENTS: tuple[ClosureArgument, ...] = (
    ClosureArgument("trivial", ISOLATION_MODES, _trivial_group),
    ClosureArgument("mub", ISOLATION_MODES, _mub),
    ClosureArgument("diagonal", ("reach",), _diagonal_reach),
    ClosureArgument("diagonal", ISOLATION_MODES, _diagonal_isolation),
    ClosureArgument("uniform_product", ("reach",), _uniform_product),
    ClosureArgument("ek_corner", ISOLATION_MODES, _ek_corner),
    ClosureArgument("direct_sum_gconstruction", ISOLATION_MODES, _direct_sum_gconstruction),
    ClosureArgument("qutrit4_patterns", ISOLATION_MODES, _qutrit4_patterns),
    ClosureArgument("psi_derog_census", ISOLATION_MODES, _psi_derog_census),
)


def _closure(scene: LoccScene, mode: str, search: SearchResult) -> tuple[str | None, dict]:
    notes = {}
    if scene.stabilizer.completeness != COMPLETE:
        return None, {"completeness": scene.stabilizer.completeness}
    for arg in CLOSURE_ARGUMENTS:
        if mode not in arg.modes:
            continue
        fired, why = arg.check(scene)
        notes[arg.name] = why
        if fired:
            return arg.name, notes
    fired, why = _exhaustive(scene, mode, search)
    notes["exhaustive_enumeration"] = why
    return ("exhaustive_enumeration" if fired else None), notes


def _exhaustive(scene: LoccScene, mode: str, search: SearchResult) -> tuple[bool, str]:
    if not all(c.parameter_count == 0 for c in scene.stabilizer.components):
        return False, "family has continuous parameters"
    n = scene.n
    if mode == "reach":
        bad = [ev for ev in search.evaluated if len(ev.passing()) == n - 1]
    else:
        bad = [ev for ev in search.evaluated if ev.nontrivial and len(ev.passing()) >= n - 1]
    if bad:
        return False, "enumeration found elements the constructive recipes could not use"
    return True, "all group elements enumerated"


# decisions -----------------------------------------------------------------

def _verified(ev: Evaluated, seed: PureState) -> bool:
    return ev.element.residual(seed) <= SYMMETRY_TOL


def _search_for(scene: LoccScene, mode: str, extra: Sequence[SymmetryElement]) -> SearchResult:
    # refinement only matters when no structural argument can settle the question
    structural = scene.stabilizer.completeness == COMPLETE and any(
        mode in arg.modes and arg.check(scene)[0] for arg in CLOSURE_ARGUMENTS
    )
    return _family_search(scene, extra, refine=not structural)


def _finish(scene: LoccScene, mode: str, witness, search: SearchResult) -> Decision:
    argument, notes = _closure(scene, mode, search)
    report = dict(search.report, closure=notes)
    if witness is not None:
        if argument is not None:
            raise RuntimeError(f"closure argument {argument} contradicts a verified witness")
        return Decision(mode, WITNESSED, witness, None, report)
    if argument is not None:
        return Decision(mode, REFUTED, None, argument, report)
    return Decision(mode, NO_WITNESS, None, None, report)


def _check_scene(scene: LoccScene) -> None:
    for g in scene.grams:
        if np.linalg.eigvalsh(g.matrix)[0] <= scene.tol * np.linalg.norm(g.matrix):
            raise ValueError("grams must be strictly positive")


def reachable(scene: LoccScene, candidates: Sequence[SymmetryElement] = ()) -> Decision:
    _check_scene(scene)
    search = _search_for(scene, "reach", candidates)
    n = scene.n
    witness = None
    for ev in search.evaluated:
        passing = ev.passing()
        if len(passing) == n - 1 and _verified(ev, scene.seed):
            site = next(i for i in range(n) if i not in passing)
            witness = ReachWitness(ev.element, site)
            break
    return _finish(scene, "reach", witness, search)


def weakly_isolated(scene: LoccScene, candidates: Sequence[SymmetryElement] = ()) -> Decision:
    _check_scene(scene)
    search = _search_for(scene, "isolation", candidates)
    n = scene.n
    witness = None
    for ev in search.evaluated:
        passing = ev.passing()
        if ev.nontrivial and len(passing) >= n - 1 and _verified(ev, scene.seed):
            witness = NonIsolationWitness(ev.element, tuple(passing))
            break
    return _finish(scene, "isolation", witness, search)


CONVERSION_WEIGHTS = ((0.25, 0.75), (1 / 3, 2 / 3), (0.75, 0.25), (2 / 3, 1 / 3))


def convertible_locc1(
    scene: LoccScene,
    candidates: Sequence[SymmetryElement] = (),
    acting_sites: Sequence[int] | None = None,
    weights: Sequence[tuple[float, float]] = CONVERSION_WEIGHTS,
) -> Decision:
    _check_scene(scene)
    search = _search_for(scene, "convert", candidates)
    n = scene.n
    sites = range(n) if acting_sites is None else acting_sites
    cert = None
    for ev in search.evaluated:
        if not ev.nontrivial:
            continue
        passing = set(ev.passing())
        for j in sites:
            if not all(i in passing for i in range(n) if i != j):
                continue
            if not _verified(ev, scene.seed):
                break
            pool = [e for e in search.evaluated if all(i in e.passing() for i in range(n) if i != j)]
            if j in passing:
                if not ev.site_nontrivial[j]:
                    continue
                cert = phase_pair_certificate(scene, ev.element, j, pool)
            else:
                cert = linear_certificate(scene, ev.element, j, pool, weights)
            if cert is not None:
                break
        if cert is not None:
            break
    return _finish(scene, "convert", cert, search)


def _normalize_at(elem: SymmetryElement, site: int, c: complex) -> SymmetryElement:
    ops = list(elem.op.ops)
    ops[site] = ops[site] / c
    return SymmetryElement(ProductOp(tuple(ops), elem.op.scalar * c), elem.lam, elem.tag)


def _nonprop_ok(H: np.ndarray, G: np.ndarray, site: int, pool: Sequence[Evaluated], tol: float) -> int:
    """Number of pool members checked, or -1 if some S^dag G S is proportional to H."""
    d = G.shape[0]
    mats = [np.eye(d)] + [ev.element.op.ops[site] for ev in pool]
    for s in mats:
        m = s.conj().T @ G @ s
        lam = np.vdot(H, m).real / np.vdot(H, H).real
        if lam > 0 and np.linalg.norm(m - lam * H) <= 1e3 * tol * np.linalg.norm(m):
            return -1
    return len(mats)


def _largest_beta(G: np.ndarray, X: np.ndarray, tol: float) -> float | None:
    for t in range(60):
        beta = 2.0**-t
        if np.linalg.eigvalsh(G + beta * X)[0] > tol * np.linalg.norm(G):
            return beta
    return None


def zero_sum_distribution(alpha: float, m_max: int = 12) -> list[float]:
    """Weights p_k >= 0 (k = 0, 1, ...) summing to 1 with sum_k p_k e^{ik alpha} = 0."""
    a = math.remainder(alpha, 2 * math.pi)
    if abs(a) < 1e-12:
        raise ValueError("alpha must not be a multiple of 2 pi")
    for q in range(2, m_max + 1):
        if abs(math.remainder(q * a, 2 * math.pi)) < 1e-12:
            frac = Fraction(a / (2 * math.pi)).limit_denominator(q)
            if frac.denominator == q:
                return [1.0 / q] * q
    best = None
    for k1, k2 in itertools.combinations(range(1, m_max + 1), 2):
        ks = (0, k1, k2)
        mat = np.array([[1.0] * 3, [math.cos(k * a) for k in ks], [math.sin(k * a) for k in ks]])
        try:
            p = np.linalg.solve(mat, [1.0, 0.0, 0.0])
        except np.linalg.LinAlgError:
            continue
        if np.all(p >= 0):
            resid = abs(sum(pk * np.exp(1j * k * a) for pk, k in zip(p, ks)))
            if resid < 1e-12:
                best = [0.0] * (k2 + 1)
                for pk, k in zip(p, ks):
                    best[k] = float(pk)
                break
    if best is None:
        raise ValueError(f"no zero-sum distribution with powers up to {m_max}")
    return best


def phase_pair_certificate(
    scene: LoccScene, elem: SymmetryElement, site: int, pool: Sequence[Evaluated]
) -> ConversionCertificate | None:
    """H = G + beta X for a symmetry that also quasi-commutes at the acting site."""
    G = scene.grams[site].matrix
    s = elem.op.ops[site]
    lam = quasi_commutes(s, G, scene.tol)
    if lam is None:
        return None
    g = scene.grams[site].sqrt()
    unit = g @ s @ np.linalg.inv(g) / math.sqrt(lam)
    t, z = schur(unit, output="complex")
    phases = np.angle(np.diag(t))
    d = len(phases)
    pairs = [(a, b) for a in range(d) for b in range(a + 1, d) if abs(np.exp(1j * phases[a]) - np.exp(1j * phases[b])) > 1e-6]
    if not pairs:
        return None
    a0, b0 = pairs[0]
    alpha = phases[b0] - phases[a0]
    same = lambda a, b: min(abs(np.exp(1j * (phases[b] - phases[a])) - np.exp(1j * alpha)),
                            abs(np.exp(1j * (phases[a] - phases[b])) - np.exp(1j * alpha))) < 1e-9
    e = np.zeros((d, d), dtype=complex)
    for a, b in pairs:
        if same(a, b):
            e[a, b] = e[b, a] = 1.0
    X = g @ z @ e @ z.conj().T @ g
    try:
        probs = zero_sum_distribution(alpha)
    except ValueError:
        return None
    beta = _largest_beta(G, X, scene.tol)
    if beta is None:
        return None
    H = G + beta * X
    base = _normalize_at(elem, site, math.sqrt(lam))
    syms = tuple((base.power(k), p) for k, p in enumerate(probs) if p > 0)
    recon = sum(p * sk.op.ops[site].conj().T @ H @ sk.op.ops[site] for sk, p in syms)
    resid = float(np.linalg.norm(recon - G) / np.linalg.norm(G))
    if resid > 1e-10:
        return None
    checked = _nonprop_ok(H, G, site, pool, scene.tol)
    if checked < 0:
        return None
    return ConversionCertificate(site, H, syms, resid, checked, "zero_sum")


def linear_certificate(
    scene: LoccScene,
    elem: SymmetryElement,
    site: int,
    pool: Sequence[Evaluated],
    weights: Sequence[tuple[float, float]] = CONVERSION_WEIGHTS,
) -> ConversionCertificate | None:
    """Solve p0 H + p1 S^dag H S = G for a symmetry failing at the acting site."""
    G = scene.grams[site].matrix
    d = G.shape[0]
    s = elem.op.ops[site]
    c = abs(np.linalg.det(s)) ** (1.0 / d)
    base = _normalize_at(elem, site, c)
    sn = base.op.ops[site]
    conj_map = np.kron(sn.T, sn.conj().T)
    ident = SymmetryElement(ProductOp.identity(scene.n, d), 1.0, "Explicit")
    for p0, p1 in weights:
        mat = p0 * np.eye(d * d) + p1 * conj_map
        try:
            h = np.linalg.solve(mat, G.reshape(-1, order="F")).reshape(d, d, order="F")
        except np.linalg.LinAlgError:
            continue
        h = 0.5 * (h + h.conj().T)
        if np.linalg.eigvalsh(h)[0] <= scene.tol * np.linalg.norm(G):
            continue
        recon = p0 * h + p1 * sn.conj().T @ h @ sn
        resid = float(np.linalg.norm(recon - G) / np.linalg.norm(G))
        if resid > 1e-10:
            continue
        checked = _nonprop_ok(h, G, site, pool, scene.tol)
        if checked < 0:
            continue
        return ConversionCertificate(site, h, ((ident, p0), (base, p1)), resid, checked, "linear")
    return None


# monotones -----------------------------------------------------------------

def monotone(G: Sequence, x: Sequence[np.ndarray]) -> float:
    """prod_i <x_i|G_i|x_i>."""
    if len(G) != len(x):
        raise ValueError("one vector per site required")
    out = 1.0
    for g, v in zip(G, x):
        m = g.matrix if isinstance(g, GramFactor) else np.asarray(g)
        v = np.asarray(v, dtype=complex)
        if not np.any(v):
            raise ValueError("zero vector")
        out *= float(np.vdot(v, m @ v).real)
    return out


def max_conversion_probability(G: Sequence, H: Sequence, norm_psi: float, norm_phi: float) -> float:
    """(|Phi|^2 / |Psi|^2) / lambda_max(G^-1 H), per-site maxima multiplied."""
    from scipy.linalg import eigh

    lam = 1.0
    for g, h in zip(G, H):
        gm = g.matrix if isinstance(g, GramFactor) else np.asarray(g)
        hm = h.matrix if isinstance(h, GramFactor) else np.asarray(h)
        if np.array_equal(gm, hm):
            continue
        if np.linalg.eigvalsh(gm)[0] <= 0:
            raise ValueError("G must be strictly positive")
        lam *= float(eigh(hm, gm, eigvals_only=True)[-1])
    return (norm_phi**2 / norm_psi**2) / lam


# isolation witnesses -------------------------------------------------------

def isolated_witness_ek(k: int, n: int, a: Sequence[complex]) -> list[GramFactor]:
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(a) != n:
        raise ValueError("one parameter per site required")
    if any(abs(x) == 0 for x in a):
        raise ValueError("parameters must be nonzero")
    if k == 2 and len(set(complex(x) for x in a)) < n:
        raise ValueError("k = 2 needs pairwise different parameters")
    return [GramFactor(corner_gram(k, x)) for x in a]


def default_sum_params(spec: BlockSpec, n: int, symmetric: bool = False) -> dict:
    K = len(spec.excitations)
    a = [[0.3 * (b + 1) * (1 + (0 if symmetric else 0.17 * i)) * np.exp(0.4j * b) for b in range(K)] for i in range(n)]
    return {
        "a": a,
        "p": 0.3,
        "d": [1.5 + 0.5 * b for b in range(K)],
        "c": [0.1 + 0.07 * b for b in range(K)],
    }


def isolated_witness_sums(spec: BlockSpec, n: int, params: dict | None = None) -> list[GramFactor]:
    ks = spec.excitations
    K = len(ks)
    if K < 2:
        raise ValueError("need at least two blocks")
    if all(k == 0 for k in ks) and K < 3:
        raise ValueError("an all-k=0 spec needs at least three blocks")
    params = params or default_sum_params(spec, n)
    grams = []
    for i in range(n):
        g = np.zeros((spec.d, spec.d), dtype=complex)
        for b, k in enumerate(ks):
            lv = spec.levels(b)
            if k >= 2:
                blk = corner_gram(k, params["a"][i][b])
            elif k == 1:
                p = params["p"]
                blk = np.array([[1.0, p], [np.conj(p), params["d"][b]]])
            else:
                blk = np.eye(1)
            g[lv.start: lv.stop, lv.start: lv.stop] = blk
        for b in range(1, K):
            c = params["c"][b - 1] if len(params["c"]) == K - 1 else params["c"][b]
            g[spec.offsets[b - 1], spec.offsets[b]] = c
            g[spec.offsets[b], spec.offsets[b - 1]] = np.conj(c)
        if np.linalg.eigvalsh(g)[0] <= 0:
            raise ValueError("couplings too large: gram is not positive")
        grams.append(GramFactor(g))
    problems = sum_construction_rules(spec, [match_sum_construction(spec, g.matrix, 1e-12) for g in grams])
    if problems:
        raise ValueError("; ".join(problems))
    return grams


def mub_bases(d: int) -> list[np.ndarray]:
    """Three mutually unbiased bases (columns) for d = 2 or an odd prime d."""
    if d == 2:
        return [
            np.eye(2, dtype=complex),
            np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
            np.array([[1, 1], [1j, -1j]], dtype=complex) / math.sqrt(2),
        ]
    if d < 2 or any(d % q == 0 for q in range(2, int(math.isqrt(d)) + 1)):
        raise ValueError("MUBs are shipped for d = 2 and odd primes")
    w = np.exp(2j * math.pi / d)
    j = np.arange(d)
    fourier = np.array([[w ** (a * jj) for a in range(d)] for jj in j]) / math.sqrt(d)
    quad = np.array([[w ** (jj * jj + a * jj) for a in range(d)] for jj in j]) / math.sqrt(d)
    return [np.eye(d, dtype=complex), fourier, quad]


def mub_isolated_witness(d: int, n: int, x: Sequence[float], rest: Sequence | None = None) -> list[GramFactor]:
    if n < 5:
        raise ValueError("n must be >= 5")
    x = np.asarray(x, dtype=float)
    if x.shape != (d,) or np.any(x <= 0):
        raise ValueError("need d positive eigenvalues")
    if len(set(np.round(x, 12))) < d:
        raise ValueError("eigenvalues must be distinct")
    grams = [GramFactor(v @ np.diag(x) @ v.conj().T) for v in mub_bases(d)]
    grams += [GramFactor(np.eye(d)), GramFactor(np.eye(d))]
    extra = list(rest) if rest is not None else [np.eye(d)] * (n - 5)
    if len(extra) != n - 5:
        raise ValueError("rest must cover the remaining n-5 sites")
    grams += [g if isinstance(g, GramFactor) else GramFactor(np.asarray(g)) for g in extra]
    return grams


def defective_sites(elem: SymmetryElement, tol: float = DEFAULT_TOL) -> list[int]:
    return [i for i, o in enumerate(elem.op.ops) if is_defective(o, tol)]


# protocols from certificates ----------------------------------------------

def _unitary_correction(h: np.ndarray, s: np.ndarray, lam: float) -> np.ndarray:
    return h @ s @ np.linalg.inv(h) / math.sqrt(lam)


def _seed_with(seed: PureState, ops: Sequence[np.ndarray]) -> PureState:
    from .tensor_core import apply_at_site

    out = seed
    for i, op in enumerate(ops):
        out = apply_at_site(out, op, i)
    return out


def build_reaching_protocol(scene: LoccScene, S: SymmetryElement, site: int, p: float):
    """One round reaching the scene's state; the initial gram at ``site`` is (pH + (1-p)S^dag H S)/r."""
    from .protocol_sim import Branch, LoccProtocol, LoccRound

    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    if S.residual(scene.seed) > SYMMETRY_TOL:
        raise ValueError("S is not a symmetry of the seed")
    grams = scene.gram_arrays()
    lams = {}
    for i, g in enumerate(grams):
        if i == site:
            continue
        lam = quasi_commutes(S.op.ops[i], g, scene.tol)
        if lam is None:
            raise ValueError(f"S does not quasi-commute with the gram at site {i}")
        lams[i] = lam
    hs = [scene.grams[i].sqrt() for i in range(scene.n)]
    H = grams[site]
    s = S.op.ops[site]
    mixed = p * H + (1 - p) * s.conj().T @ H @ s
    r = float(np.trace(mixed).real / np.trace(H).real)
    g = GramFactor(mixed / r).sqrt()
    ginv = np.linalg.inv(g)
    corr = tuple((i, _unitary_correction(hs[i], S.op.ops[i], lams[i])) for i in sorted(lams))
    root = LoccRound(
        site,
        (
            Branch(math.sqrt(p / r) * hs[site] @ ginv),
            Branch(math.sqrt((1 - p) / r) * hs[site] @ s @ ginv, corr),
        ),
    )
    initial_ops = [g if i == site else hs[i] for i in range(scene.n)]
    return LoccProtocol(root, _seed_with(scene.seed, hs), _seed_with(scene.seed, initial_ops), "reach")


def build_conversion_protocol(scene: LoccScene, cert: ConversionCertificate):
    """One round converting the scene's state into the certificate's target."""
    from .protocol_sim import Branch, LoccProtocol, LoccRound

    j = cert.acting_site
    gs = [scene.grams[i].sqrt() for i in range(scene.n)]
    h = GramFactor(cert.target_gram).sqrt()
    ginv = np.linalg.inv(gs[j])
    branches = []
    for sym, pk in cert.symmetries:
        corr = []
        for i in range(scene.n):
            if i == j:
                continue
            lam = quasi_commutes(sym.op.ops[i], scene.grams[i].matrix, scene.tol)
            if lam is None:
                raise ValueError("certificate symmetry fails at a non-acting site")
            corr.append((i, _unitary_correction(gs[i], sym.op.ops[i], lam)))
        branches.append(Branch(math.sqrt(pk) * h @ sym.op.ops[j] @ ginv, tuple(corr)))
    target_ops = [h if i == j else gs[i] for i in range(scene.n)]
    return LoccProtocol(
        LoccRound(j, tuple(branches)), _seed_with(scene.seed, target_ops), _seed_with(scene.seed, gs), "convert"
    )
