"""Finite-round LOCC protocols as measurement trees, plus the shipped protocols."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.linalg import block_diag

from . import symstates
from .tensor_core import (
    COMPLETENESS_TOL,
    DEFAULT_TOL,
    PureState,
    apply_at_site,
    normalize,
    proportional,
    reduced_density,
)


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Branch:
    kraus: np.ndarray
    corrections: tuple[tuple[int, np.ndarray], ...] = ()
    child: LoccRound | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kraus", np.asarray(self.kraus, dtype=complex))
        object.__setattr__(
            self, "corrections", tuple((int(p), np.asarray(u, dtype=complex)) for p, u in self.corrections)
        )


@dataclass(frozen=True, eq=False)
class LoccRound:
    acting_party: int
    branches: tuple[Branch, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise ProtocolError("a round needs at least one branch")
        for b in self.branches:
            if any(p == self.acting_party for p, _ in b.corrections):
                raise ProtocolError("corrections go to the non-measuring parties")

    def completeness_residual(self) -> float:
        d = self.branches[0].kraus.shape[1]
        total = sum(b.kraus.conj().T @ b.kraus for b in self.branches)
        return float(np.abs(total - np.eye(d)).max())

    def correction_residual(self) -> float:
        worst = 0.0
        for b in self.branches:
            for _, u in b.corrections:
                worst = max(worst, float(np.abs(u.conj().T @ u - np.eye(len(u))).max()))
        return worst

    def nodes(self) -> Iterator[LoccRound]:
        yield self
        for b in self.branches:
            if b.child is not None:
                yield from b.child.nodes()

    def depth(self) -> int:
        return 1 + max((b.child.depth() for b in self.branches if b.child is not None), default=0)


@dataclass(frozen=True, eq=False)
class LoccProtocol:
    root: LoccRound
    declared_target: PureState | None = None
    initial: PureState | None = None
    name: str = ""

    def nodes(self) -> list[LoccRound]:
        return list(self.root.nodes())

    def depth(self) -> int:
        return self.root.depth()

    def completeness_residuals(self) -> list[float]:
        return [node.completeness_residual() for node in self.nodes()]

    def to_json(self) -> dict:
        from .serialization import encode_matrix, encode_state

        def rnd(r: LoccRound) -> dict:
            return {
                "acting_party": r.acting_party,
                "branches": [
                    {
                        "kraus": encode_matrix(b.kraus),
                        "corrections": [[p, encode_matrix(u)] for p, u in b.corrections],
                        "child": rnd(b.child) if b.child is not None else None,
                    }
                    for b in r.branches
                ],
            }

        out = {"name": self.name, "root": rnd(self.root)}
        if self.declared_target is not None:
            out["declared_target"] = encode_state(self.declared_target)
        if self.initial is not None:
            out["initial"] = encode_state(self.initial)
        return out

    @classmethod
    def from_json(cls, doc: dict) -> LoccProtocol:
        from .serialization import check_schema, decode_matrix, decode_state

        check_schema(doc)

        def rnd(r: dict) -> LoccRound:
            return LoccRound(
                int(r["acting_party"]),
                tuple(
                    Branch(
                        decode_matrix(b["kraus"]),
                        tuple((int(p), decode_matrix(u)) for p, u in b.get("corrections", [])),
                        rnd(b["child"]) if b.get("child") else None,
                    )
                    for b in r["branches"]
                ),
            )

        target = doc.get("declared_target")
        initial = doc.get("initial")
        return cls(
            rnd(doc["root"]),
            decode_state(target) if target else None,
            decode_state(initial) if initial else None,
            doc.get("name", ""),
        )


@dataclass(frozen=True, eq=False)
class BranchOutcome:
    path: tuple[int, ...]
    probability: float
    state: PureState

    def to_json(self) -> dict:
        from .serialization import encode_state

        return {"path": list(self.path), "probability": self.probability, "state": encode_state(self.state)}


def _check_node(node: LoccRound, n: int, d: int, completeness_tol: float, unitary_tol: float) -> None:
    if not 0 <= node.acting_party < n:
        raise ProtocolError(f"acting party {node.acting_party} out of range")
    for b in node.branches:
        if b.kraus.shape != (d, d):
            raise ProtocolError("kraus operator has the wrong dimension")
        for p, u in b.corrections:
            if not 0 <= p < n or u.shape != (d, d):
                raise ProtocolError("malformed correction")
    res = node.completeness_residual()
    if res > completeness_tol:
        raise ProtocolError(f"completeness violated at party {node.acting_party}: residual {res:.3e}")
    if node.correction_residual() > unitary_tol:
        raise ProtocolError("correction operator is not unitary")


def _walk(
    node: LoccRound,
    state: PureState,
    norm0: float,
    path: tuple[int, ...],
    max_depth: int | None,
    checks: tuple[float, float],
) -> Iterator[BranchOutcome]:
    _check_node(node, state.n, state.d, *checks)
    for idx, b in enumerate(node.branches):
        out = apply_at_site(state, b.kraus, node.acting_party)
        for party, u in b.corrections:
            out = apply_at_site(out, u, party)
        sub = path + (idx,)
        stop = b.child is None or (max_depth is not None and len(sub) >= max_depth)
        if stop:
            prob = (out.norm() / norm0) ** 2
            yield BranchOutcome(sub, float(prob), normalize(out) if out.norm() > 0 else out)
        else:
            yield from _walk(b.child, out, norm0, sub, max_depth, checks)


def simulate(
    protocol: LoccProtocol,
    initial: PureState | None = None,
    completeness_tol: float = COMPLETENESS_TOL,
    unitary_tol: float = DEFAULT_TOL,
    max_depth: int | None = None,
) -> list[BranchOutcome]:
    """Depth-first replay; ``max_depth`` stops early to expose intermediate states."""
    state = initial if initial is not None else protocol.initial
    if state is None:
        raise ProtocolError("no initial state given")
    if state.norm() == 0:
        raise ProtocolError("zero initial state")
    return list(_walk(protocol.root, state, state.norm(), (), max_depth, (completeness_tol, unitary_tol)))


def total_probability(outcomes: Sequence[BranchOutcome]) -> float:
    return float(sum(o.probability for o in outcomes))


def is_deterministic(outcomes: Sequence[BranchOutcome], target: PureState, tol: float = 1e-10) -> bool:
    return all(o.probability <= tol or proportional(o.state, target, tol) is not None for o in outcomes)


def leaf_residuals(outcomes: Sequence[BranchOutcome], target: PureState) -> list[float]:
    """Distance of each normalized leaf from the ray of the target."""
    t = normalize(target).amps
    out = []
    for o in outcomes:
        a = o.state.amps
        out.append(float(np.linalg.norm(a - np.vdot(t, a) * t)))
    return out


# W and E_k classes ---------------------------------------------------------

def _check_p_prime(p_prime: float) -> None:
    if not 0 < p_prime < 1:
        raise ValueError("p' must lie strictly between 0 and 1")


def w_round_phase(k: int) -> float:
    return math.acos(math.sqrt((k - 1) / k))


def _embedded(k: int, m2: np.ndarray) -> np.ndarray:
    """2x2 operator on span{|0>, |k>}, identity on the levels in between."""
    out = np.eye(k + 1, dtype=complex)
    out[np.ix_([0, k], [0, k])] = m2
    return out


def ek_class_protocol(k: int, n: int, p_prime: float) -> LoccProtocol:
    """n rounds taking |E_k> to the embedded W-like target; party r measures in round r."""
    if k < 1 or n < 3:
        raise ValueError("need k >= 1 and n >= 3")
    _check_p_prime(p_prime)
    b = math.sqrt(1 - p_prime)
    xs = [math.sqrt(r * p_prime) for r in range(n + 1)]
    rounds: list[tuple[int, list[tuple[np.ndarray, list]]]] = []
    for r in range(1, n + 1):
        phi = w_round_phase(r)
        h = _embedded(k, np.array([[1, xs[r]], [0, b]]))
        g_prev = _embedded(k, np.array([[1, xs[r - 1]], [0, 1]]))
        branches = []
        for sign in (-1, 1):
            s = np.diag(np.exp(1j * sign * phi / k) ** np.arange(k + 1))
            kraus = math.sqrt(0.5) * h @ s @ np.linalg.inv(g_prev)
            corr = [(i, s) for i in range(n) if i != r - 1]
            branches.append((kraus, corr))
        rounds.append((r - 1, branches))
    root = _chain(rounds)
    seed = symstates.e_k(k, n) if k > 1 else symstates.w(n)
    return LoccProtocol(root, ek_class_target(k, n, p_prime), seed, f"ek(k={k}, n={n})")


def _chain(rounds: list) -> LoccRound:
    """Identical sub-protocols under every branch, built from the last round up."""
    child = None
    for party, branches in reversed(rounds):
        child = LoccRound(party, tuple(Branch(kr, tuple(corr), child) for kr, corr in branches))
    return child


def ek_class_target(k: int, n: int, p_prime: float) -> PureState:
    b = math.sqrt(1 - p_prime)
    xn = math.sqrt(n * p_prime)
    state = symstates.e_k(k, n) if k > 1 else symstates.w(n)
    for i in range(n - 1):
        state = apply_at_site(state, _embedded(k, np.diag([1, b])), i)
    return apply_at_site(state, _embedded(k, np.array([[1, xn], [0, b]])), n - 1)


def w_class_protocol(n: int, p_prime: float) -> LoccProtocol:
    proto = ek_class_protocol(1, n, p_prime)
    return LoccProtocol(proto.root, proto.declared_target, proto.initial, f"w(n={n})")


def w_target(n: int, p_prime: float) -> PureState:
    """sqrt(p') |0...0> + sqrt(1-p') |W>, both normalized."""
    zero = PureState.basis(2, [0] * n)
    return math.sqrt(p_prime) * zero + math.sqrt(1 - p_prime) * normalize(symstates.w(n))


# GHZ class -----------------------------------------------------------------

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def z_phase(phi: float) -> np.ndarray:
    return np.diag([np.exp(1j * phi), np.exp(-1j * phi)])


def ghz_class_protocol(n: int, g_x) -> LoccProtocol:
    """Each party measures {g_x Z, g_x Z sigma_x}; party n-1 goes last."""
    g = np.asarray(g_x, dtype=complex)
    if g.shape != (2, 2):
        raise ValueError("g_x must be 2x2")
    if np.abs(g @ SIGMA_X - SIGMA_X @ g).max() > DEFAULT_TOL:
        raise ValueError("g_x must commute with sigma_x")
    if abs(np.trace(g.conj().T @ g) - 1) > DEFAULT_TOL:
        raise ValueError("g_x must satisfy tr(g_x^dag g_x) = 1")
    if n < 2:
        raise ValueError("n must be >= 2")
    z = z_phase(math.pi / 4)
    zinv = z_phase(-math.pi / 4)
    m1, m2 = g @ z, g @ z @ SIGMA_X
    last = n - 1
    rounds = []
    for j in range(n - 1):
        others = [i for i in range(n - 1) if i != j]
        rounds.append(
            (j, [(m1, [(last, zinv)]), (m2, [(i, SIGMA_X) for i in others] + [(last, zinv @ SIGMA_X)])])
        )
    rounds.append((last, [(m1, []), (m2, [(i, SIGMA_X) for i in range(n - 1)])]))
    seed = symstates.ghz(n)
    target = seed
    for i in range(n - 1):
        target = apply_at_site(target, g, i)
    target = apply_at_site(target, g @ z, last)
    return LoccProtocol(_chain(rounds), target, seed, f"ghz(n={n})")


def random_ghz_gx(rng: np.random.Generator) -> np.ndarray:
    """Random invertible g_x = a 1 + c sigma_x with tr(g_x^dag g_x) = 1."""
    while True:
        a, c = rng.normal(size=2) + 1j * rng.normal(size=2)
        g = a * np.eye(2) + c * SIGMA_X
        if abs(abs(a) - abs(c)) > 0.05:
            return g / math.sqrt(np.trace(g.conj().T @ g).real)


# 4-qutrit probabilistic protocol ---------------------------------------------

S2_, S3_, S6_ = math.sqrt(2), math.sqrt(3), math.sqrt(6)
QUTRIT4_P = (1 - S2_ + S3_) / 2
QUTRIT4_Q = (math.sqrt(2 + S2_) - 1) / (1 + S2_)


def _phase(t: float) -> complex:
    return complex(np.exp(1j * t))


@dataclass(frozen=True, eq=False)
class Qutrit4Fixture:
    seed: PureState
    G: tuple[np.ndarray, np.ndarray]
    H: tuple[np.ndarray, np.ndarray]
    ops: dict = field(default_factory=dict)


def qutrit4_fixture() -> Qutrit4Fixture:
    p, q = QUTRIT4_P, QUTRIT4_Q
    G1 = np.array(
        [
            [2 * p + 2, 1 - (2 * p - 1) * 1j, p * (1 - S3_ * 1j)],
            [1 + (2 * p - 1) * 1j, 4 - 2 * p, 0],
            [p * (1 + S3_ * 1j), 0, 2],
        ]
    )
    G2 = np.array(
        [
            [3, 3 - 2 / (1 - q) - 1j, (3 + S2_ + 1j) / S2_ * q],
            [3 - 2 / (1 - q) + 1j, 5, 0],
            [(3 + S2_ - 1j) / S2_ * q, 0, 4],
        ]
    )
    H1 = np.array(
        [
            [4, 1 - 1j, (1 + S3_) / 2 * (1 - 1j)],
            [1 + 1j, 2, 1],
            [(1 + S3_) / 2 * (1 + 1j), 1, 2],
        ]
    )
    H2 = np.array(
        [
            [5, -1j - (1 + q) / (1 - q), (1 + 1j) / S2_],
            [1j - (1 + q) / (1 - q), 3, 1],
            [(1 - 1j) / S2_, 1, 4],
        ]
    )
    X = np.array([[1, -1j], [1, 1j]])
    Y = np.array([[1, 1], [1j, -1j]])
    xb2 = q * (1 + S2_ + 1j) / (2 * (1 - q))
    xb1 = (1 + S3_ * 1j) / (4 * xb2)
    yb1 = (1 + 1j - S6_ * _phase(3 * math.pi / 4)) / 2 * xb1
    xt2 = 1j * q * (1 + S2_ + 1j) / (2 * (1 - q))
    xt1 = (1 - S3_ * 1j) / (4 * xt2)
    yt1 = (1 - 1j + S6_ * _phase(math.pi / 4)) / 2 * xt1
    e34 = _phase(3 * math.pi / 4)
    ops = {
        "S": (
            block_diag(np.array([[0, e34], [e34, 0]]), [[1]]),
            block_diag(SIGMA_X, [[(1 + 1j) / S2_]]),
            block_diag(SIGMA_X, [[1]]),
            block_diag(np.array([[0, 1 / e34], [1 / e34, 0]]), [[(1 - 1j) / S2_]]),
        ),
        "Sbar": (
            block_diag(xb1 * X, [[yb1]]),
            block_diag(xb2 * X, [[1]]),
            block_diag(X / S2_, [[1]]),
            block_diag(X / S2_, [[1 / yb1]]),
        ),
        "Stilde": (
            block_diag(xt1 * Y, [[yt1]]),
            block_diag(xt2 * Y, [[1]]),
            block_diag(Y / S2_, [[1]]),
            block_diag(Y / S2_, [[1 / yt1]]),
        ),
    }
    seed = symstates.psi_mu(S2_ * 1j)
    return Qutrit4Fixture(seed, (G1, G2), (H1, H2), ops)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    if vals[0] <= 0:
        raise ProtocolError("matrix is not positive definite")
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def qutrit4_probabilistic_protocol() -> LoccProtocol:
    fx = qutrit4_fixture()
    p, q = QUTRIT4_P, QUTRIT4_Q
    g1, g2 = (_psd_sqrt(m) for m in fx.G)
    h1, h2 = (_psd_sqrt(m) for m in fx.H)
    inv = np.linalg.inv
    S, Sb, St = fx.ops["S"], fx.ops["Sbar"], fx.ops["Stilde"]
    ub = h1 @ Sb[0] @ inv(h1)
    ut = h1 @ St[0] @ inv(h1)
    bar = LoccRound(
        1,
        (
            Branch(math.sqrt(q) * h2 @ inv(g2)),
            Branch(math.sqrt(1 - q) * h2 @ Sb[1] @ inv(g2), ((0, ub), (2, Sb[2]), (3, Sb[3]))),
        ),
    )
    tilde = LoccRound(
        1,
        (
            Branch(math.sqrt(q) * h2 @ S[1] @ inv(g2)),
            Branch(math.sqrt(1 - q) * h2 @ St[1] @ S[1] @ inv(g2), ((0, ut), (2, St[2]), (3, St[3]))),
        ),
    )
    root = LoccRound(
        0,
        (
            Branch(math.sqrt(p) * h1 @ inv(g1), (), bar),
            Branch(math.sqrt(1 - p) * h1 @ S[0] @ inv(g1), ((2, S[2]), (3, S[3])), tilde),
        ),
    )
    initial = apply_at_site(apply_at_site(fx.seed, g1, 0), g2, 1)
    target = apply_at_site(apply_at_site(fx.seed, h1, 0), h2, 1)
    return LoccProtocol(root, target, initial, "qutrit4")


def local_spectra(state: PureState) -> list[np.ndarray]:
    s = normalize(state)
    return [np.linalg.eigvalsh(reduced_density(s, i)) for i in range(s.n)]


def spectral_gap(a: PureState, b: PureState) -> float:
    """Largest mismatch of single-site reduced spectra; positive means LU-inequivalent."""
    return max(float(np.abs(x - y).max()) for x, y in zip(local_spectra(a), local_spectra(b)))


def monotone_gap(
    a_ops: Sequence[np.ndarray],
    b_ops: Sequence[np.ndarray],
    symmetries: Sequence[Sequence[np.ndarray]],
    rng: np.random.Generator,
    samples: int = 200,
) -> float:
    """min over swept symmetries S of max over product vectors of |E_a(x) - E_{bS}(x)|.

    E_a(x) = prod_i |a_i x_i|^2 compares a Psi_s with b S Psi_s in the seed
    frame.  Each pair is rescaled to equal mean, since symmetries carry a scalar;
    LU-equivalence through S would make the gap vanish.
    """
    d = a_ops[0].shape[0]
    xs = rng.normal(size=(samples, len(a_ops), d)) + 1j * rng.normal(size=(samples, len(a_ops), d))
    xs /= np.linalg.norm(xs, axis=2, keepdims=True)

    def values(ops: Sequence[np.ndarray]) -> np.ndarray:
        out = np.ones(samples)
        for i, op in enumerate(ops):
            out *= np.linalg.norm(xs[:, i, :] @ op.T, axis=1) ** 2
        return out / np.mean(out)

    va = values(a_ops)
    best = math.inf
    for sym in symmetries:
        vb = values([b @ s for b, s in zip(b_ops, sym)])
        best = min(best, float(np.abs(va - vb).max()))
    return best


def qutrit4_depth1_certificate(rng_seed: int = 7) -> dict:
    """Evidence that the two depth-1 states of the 4-qutrit protocol are LU-inequivalent."""
    from .locc import GridConfig, _candidates
    from .stabilizer import qutrit4_symmetry_family

    proto = qutrit4_probabilistic_protocol()
    mid = simulate(proto, max_depth=1)
    fx = qutrit4_fixture()
    g2 = _psd_sqrt(fx.G[1])
    h1 = _psd_sqrt(fx.H[0])
    eye = np.eye(3)
    a_ops = [h1, g2, eye, eye]
    S = fx.ops["S"]
    b_ops = [h1 @ S[0], g2, S[2], S[3]]
    fam = qutrit4_symmetry_family("psi_mu", S2_ * 1j)
    syms = []
    for ci, ch, params, _ in _candidates(fam, GridConfig(joint_samples=64, seed=rng_seed)):
        syms.append(fam.components[ci].sample(params, ch).op.ops)
    gap = monotone_gap(a_ops, b_ops, syms, np.random.default_rng(rng_seed))
    return {
        "intermediate_probabilities": [o.probability for o in mid],
        "proportional": proportional(mid[0].state, mid[1].state, 1e-9) is not None,
        "spectral_gap": spectral_gap(mid[0].state, mid[1].state),
        "monotone_gap": gap,
        "symmetries_swept": len(syms),
    }
