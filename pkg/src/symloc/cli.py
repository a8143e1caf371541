"""``symloc`` command line: JSON in, JSON out."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import locc, protocol_sim as ps, qutrit_derog as qd, specs
from . import stabilizer as st
from . import symstates as ss
from .quasicomm import lemma4_family, corner_gram, quasi_commutation_residual, quasi_commutes
from .serialization import SchemaError, decode_complex, decode_matrix, decode_state, dumps, encode_matrix, loads
from .tensor_core import DEFAULT_TOL, GramFactor

EXIT_OK, EXIT_VALIDATION, EXIT_TOLERANCE = 0, 1, 2


class ToleranceFailure(Exception):
    """A computation finished but missed a numerical tolerance."""


# helpers ----------------------------------------------------------------------

def _read_json(path: str) -> Any:
    """Load a JSON file; text starting with '{' or '[' is parsed inline."""
    if path.lstrip()[:1] in ("{", "["):
        try:
            return loads(path)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid inline JSON ({exc.msg})") from None
    try:
        return loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc.msg})") from None


def _emit(args: argparse.Namespace, obj: Any) -> None:
    text = dumps(obj)
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(args: argparse.Namespace) -> locc.GridConfig | None:
    if not getattr(args, "grid", None):
        return None
    parts = _int_list(args.grid)
    if len(parts) not in (2, 3):
        raise SchemaError("--grid expects ANGULAR,RADIAL[,REFINE]")
    kw = {"angular_points": parts[0], "radial_points": parts[1], "seed": args.seed}
    if len(parts) == 3:
        kw["refine_steps"] = parts[2]
    return locc.GridConfig(**kw)


def _seed_spec(args: argparse.Namespace) -> dict:
    if getattr(args, "spec", None):
        return json.loads(args.spec) if args.spec.lstrip().startswith("{") else _read_json(args.spec)
    spec: dict[str, Any] = {"name": args.name}
    for key in ("k", "n", "d", "level"):
        if getattr(args, key, None) is not None:
            spec[key] = getattr(args, key)
    for key in ("occupations", "excitations", "block_sizes"):
        if getattr(args, key, None) is not None:
            spec[key] = list(getattr(args, key))
    if getattr(args, "mu", None) is not None:
        spec["mu"] = [args.mu.real, args.mu.imag]
    if getattr(args, "rep", None) is not None:
        spec["rep"] = args.rep
    return spec


def _add_seed_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("name", nargs="?", choices=specs.SEED_NAMES, help="seed state name")
    p.add_argument("--spec", help="seed spec as inline JSON or a file path")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--level", type=int)
    p.add_argument("--occupations", type=_int_list)
    p.add_argument("--excitations", type=_int_list)
    p.add_argument("--block-sizes", dest="block_sizes", type=_int_list)
    p.add_argument("--mu", type=_complex_arg)
    p.add_argument("--rep", choices=st.QUTRIT4_IDS)


# subcommands -----------------------------------------------------------------

def cmd_state(args: argparse.Namespace) -> int:
    spec = _seed_spec(args)
    state = specs.build_seed(spec)
    if args.majorana:
        if state.d != 2:
            raise SchemaError("the Majorana representation needs a qubit state")
        _emit(args, ss.state_to_majorana(state, args.tol))
    else:
        _emit(args, state)
    return EXIT_OK


def cmd_stabilizer(args: argparse.Namespace) -> int:
    fam = specs.build_family(_seed_spec(args))
    rng = np.random.default_rng(args.seed)
    elems = []
    if args.params:
        doc = _read_json(args.params)
        comp = fam.components[int(doc.get("component", 0))]
        params = np.array([decode_complex(x) for x in doc.get("params", [])], dtype=complex)
        choice = doc.get("choice")
        if choice is None:
            choice = comp.choices[0]
        elif isinstance(choice, list):
            choice = tuple(choice)
        elems.append(comp.sample(params if params.size else None, choice))
    else:
        elems = [fam.random_element(rng) for _ in range(args.sample)]
    out = []
    worst = 0.0
    for e in elems:
        r = e.residual(fam.seed)
        worst = max(worst, r)
        out.append({**e.to_json(), "residual": r})
    _emit(args, {"family": fam.describe(), "elements": out})
    if worst > args.tol:
        raise ToleranceFailure(f"sampled element residual {worst:.3e} exceeds {args.tol:g}")
    return EXIT_OK


def cmd_quasicomm(args: argparse.Namespace) -> int:
    if args.action == "check":
        if not (args.S and args.G):
            raise SchemaError("check needs --S and --G")
        S = decode_matrix(_read_json(args.S)["matrix"])
        G = decode_matrix(_read_json(args.G)["matrix"])
        lam = quasi_commutes(S, G, args.tol)
        _emit(
            args,
            {"quasi_commutes": lam is not None, "lambda": lam, "residual": quasi_commutation_residual(S, G)},
        )
        return EXIT_OK
    if args.k is None or args.a is None:
        raise SchemaError("family needs --k and --a")
    G = corner_gram(args.k, args.a)
    xs = np.exp(2j * np.pi * np.arange(args.points) / args.points)
    members = []
    for x in xs:
        m = lemma4_family(args.k, args.a, x)
        members.append({"x": x, "matrix": m, "lambda": quasi_commutes(m, G, args.tol)})
    _emit(args, {"gram": G, "members": members})
    if any(m["lambda"] is None for m in members):
        raise ToleranceFailure("a family member failed to quasi-commute")
    return EXIT_OK


def cmd_decide(args: argparse.Namespace) -> int:
    doc = _read_json(args.scene)
    sf = specs.decode_scene(doc, tol=args.tol_override, grid=_grid(args))
    if args.question == "reach":
        d = locc.reachable(sf.scene, sf.candidates)
    elif args.question == "convert":
        d = locc.convertible_locc1(sf.scene, sf.candidates, acting_sites=sf.acting_sites)
    else:
        d = locc.weakly_isolated(sf.scene, sf.candidates)
    out = d.to_json()
    if args.protocol and d.verdict == locc.WITNESSED and args.question in ("reach", "convert"):
        if args.question == "reach":
            proto = locc.build_reaching_protocol(sf.scene, d.payload.symmetry, d.payload.site, 0.5)
        else:
            proto = locc.build_conversion_protocol(sf.scene, d.payload)
        Path(args.protocol).write_text(dumps(proto) + "\n")
        out["protocol_file"] = args.protocol
    _emit(args, out)
    return EXIT_OK


def _canned(args: argparse.Namespace) -> ps.LoccProtocol:
    p = args.p_prime
    if args.canned == "w":
        return ps.w_class_protocol(args.n or 3, p)
    if args.canned == "ek":
        return ps.ek_class_protocol(args.k or 2, args.n or 4, p)
    if args.canned == "ghz":
        return ps.ghz_class_protocol(args.n or 3, ps.random_ghz_gx(np.random.default_rng(args.seed)))
    return ps.qutrit4_probabilistic_protocol()


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.canned:
        proto = _canned(args)
    elif args.protocol:
        proto = ps.LoccProtocol.from_json(_read_json(args.protocol))
    else:
        raise SchemaError("give --protocol or --canned")
    initial = decode_state(_read_json(args.state)) if args.state else None
    completeness = proto.completeness_residuals()
    try:
        outs = ps.simulate(proto, initial, completeness_tol=args.completeness_tol)
    except ps.ProtocolError as exc:
        raise ToleranceFailure(str(exc)) from None
    doc: dict[str, Any] = {
        "protocol": proto.name,
        "completeness_residuals": completeness,
        "total_probability": ps.total_probability(outs),
        "outcomes": [o.to_json() for o in outs],
    }
    if proto.declared_target is not None:
        res = ps.leaf_residuals(outs, proto.declared_target)
        doc["leaf_residuals"] = res
        doc["leaf_matches"] = [r <= args.tol for r in res]
    if args.save_protocol:
        Path(args.save_protocol).write_text(dumps(proto) + "\n")
    _emit(args, doc)
    if not all(doc.get("leaf_matches", [True])):
        raise ToleranceFailure("a leaf is not proportional to the declared target")
    return EXIT_OK


def _gram_list(path: str) -> list[GramFactor]:
    doc = _read_json(path)
    mats = doc["gram_matrices"] if isinstance(doc, dict) else doc
    return [GramFactor(decode_matrix(m)) for m in mats]


def cmd_measure(args: argparse.Namespace) -> int:
    G = _gram_list(args.G)
    if args.quantity == "monotone":
        if not args.x:
            raise SchemaError("monotone needs --x")
        xdoc = _read_json(args.x)
        xs = [np.array([decode_complex(z) for z in v]) for v in (xdoc["vectors"] if isinstance(xdoc, dict) else xdoc)]
        _emit(args, {"monotone": locc.monotone(G, xs)})
        return EXIT_OK
    if not args.H:
        raise SchemaError("probability needs --H")
    H = _gram_list(args.H)
    doc: dict[str, Any] = {}
    if args.seed_spec:
        seed = specs.build_seed(json.loads(args.seed_spec) if args.seed_spec.lstrip().startswith("{") else _read_json(args.seed_spec))
        if seed.d == 2:
            nontrivial = [e for e in st.qubit_symmetric_symmetry_search(seed) if not e.is_trivial(1e-6)]
            doc["stabilizer_trivial"] = not nontrivial
            if nontrivial:
                raise SchemaError("the seed has a nontrivial stabilizer; the closed form does not apply")
    doc["probability"] = locc.max_conversion_probability(G, H, args.norm_psi, args.norm_phi)
    _emit(args, doc)
    return EXIT_OK


def cmd_derog(args: argparse.Namespace) -> int:
    n = args.n
    if args.action == "reps":
        reps = qd.representatives(n, args.mu if args.mu is not None else 1.0)
        _emit(args, {"n": n, "representatives": [{**r.to_json(), "witness_residual": r.witness_residual()} for r in reps]})
        return EXIT_OK
    if args.action == "reach":
        if not args.b:
            raise SchemaError("reach needs --b")
        b = [_complex_arg(x) for x in args.b.split(",")]
        if len(b) != n + 2:
            raise SchemaError(f"need {n + 2} coefficients for n={n}")
        if args.type == 1:
            rid, mu, A = qd.type1_reach(b)
            src = qd.type1_rep_state(rid, n, mu)
            target = qd.psi_type1(b)
        else:
            rid = qd.reach_case(b)
            rep = next(r for r in qd.type2_candidates(n) if r.id == rid)
            A, mu, src, target = qd.slocc_reach(rep, b), None, rep.state, qd.psi_type2(b)
        res = qd.reach_residual(src, A, target)
        _emit(args, {"representative": rid, "mu": mu, "A": encode_matrix(A), "residual": res})
        if res > args.tol:
            raise ToleranceFailure(f"reach residual {res:.3e} exceeds {args.tol:g}")
        return EXIT_OK
    if args.action == "isolate":
        if n == 5:
            _emit(args, qd.psi_derog_isolation_report(rng_seed=args.seed))
            return EXIT_OK
        if n != 4:
            raise SchemaError("isolate is available for n = 4 and n = 5")
        rows = {}
        for rep in qd.representatives(4, args.mu if args.mu is not None else 1.0):
            rows[rep.id] = locc.weakly_isolated(qd.isolation_scene(rep, _grid(args))).to_json()
        _emit(args, rows)
        return EXIT_OK
    if n != 4:
        raise SchemaError("fixtures are available for n = 4")
    out = []
    for rep in qd.representatives(4, args.mu if args.mu is not None else 1.0):
        spec = {"name": "qutrit4", "rep": rep.id}
        if rep.mu is not None:
            spec["mu"] = rep.mu
        for fx in qd.reach_convert_fixtures(rep):
            e = fx.expected
            scene = specs.encode_scene(
                spec, fx.scene.grams, candidates=[e["symmetry"]], acting_sites=[e["acting_site"]]
            )
            out.append(
                {"rep": rep.id, "name": fx.name, "scene": scene,
                 "expected": {"reach": e["reach"], "convert": e["convert"], "convert_weights": list(e["convert_weights"])}}
            )
    _emit(args, {"fixtures": out})
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    from . import acceptance

    only = None
    if args.suite == "list":
        for num, (name, tol, _) in sorted(acceptance.CRITERIA.items()):
            print(f"{num:2d}  {name}  (tol {tol})")
        return EXIT_OK
    if args.suite != "all":
        only = list(_int_list(args.suite))
        unknown = [k for k in only if k not in acceptance.CRITERIA]
        if unknown:
            raise SchemaError(f"unknown criteria {unknown}")
    results = acceptance.run_all(seed=args.seed, only=only)
    if args.format == "table":
        print(acceptance.format_table(results))
        if args.out:
            _emit(args, {"seed": args.seed, "criteria": [r.to_json() for r in results]})
    else:
        _emit(args, {"seed": args.seed, "criteria": [r.to_json() for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_TOLERANCE


# parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="proportionality tolerance")
    common.add_argument("--seed", type=int, default=7, help="RNG seed")
    common.add_argument("--out", help="write JSON here instead of stdout")
    common.add_argument("--format", choices=("json", "table"), default="json")

    parser = argparse.ArgumentParser(prog="symloc", description="LOCC transformations among symmetric multipartite states")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", parents=[common], help="build a seed state")
    _add_seed_options(p)
    p.add_argument("--majorana", action="store_true", help="emit the Majorana roots of a qubit state")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("stabilizer", parents=[common], help="sample the local stabilizer of a seed")
    _add_seed_options(p)
    p.add_argument("--sample", type=int, default=3)
    p.add_argument("--params", help="JSON file {component, params, choice}")
    p.set_defaults(func=cmd_stabilizer)

    p = sub.add_parser("quasicomm", parents=[common], help="quasi-commutation checks")
    p.add_argument("action", choices=("check", "family"))
    p.add_argument("--S", help="JSON file {matrix}")
    p.add_argument("--G", help="JSON file {matrix}")
    p.add_argument("--k", type=int)
    p.add_argument("--a", type=_complex_arg)
    p.add_argument("--points", type=int, default=12)
    p.set_defaults(func=cmd_quasicomm)

    p = sub.add_parser("decide", parents=[common], help="reachability, convertibility and isolation")
    p.add_argument("question", choices=("reach", "convert", "isolated"))
    p.add_argument("--scene", required=True)
    p.add_argument("--grid", help="ANGULAR,RADIAL[,REFINE]")
    p.add_argument("--protocol", help="write the certificate's protocol JSON here")
    p.set_defaults(func=cmd_decide, tol_override=None)

    p = sub.add_parser("simulate", parents=[common], help="replay an LOCC protocol")
    p.add_argument("--protocol")
    p.add_argument("--state")
    p.add_argument("--canned", choices=("w", "ek", "ghz", "qutrit4"))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p-prime", dest="p_prime", type=float, default=0.5)
    p.add_argument("--completeness-tol", dest="completeness_tol", type=float, default=1e-12)
    p.add_argument("--save-protocol", dest="save_protocol")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("measure", parents=[common], help="entanglement monotones and conversion probability")
    p.add_argument("quantity", choices=("monotone", "probability"))
    p.add_argument("--G", required=True, help="JSON list of gram matrices")
    p.add_argument("--H")
    p.add_argument("--x", help="JSON list of local vectors")
    p.add_argument("--norm-psi", dest="norm_psi", type=float, default=1.0)
    p.add_argument("--norm-phi", dest="norm_phi", type=float, default=1.0)
    p.add_argument("--seed-spec", dest="seed_spec", help="seed spec used to cross-check a trivial stabilizer")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("derog", parents=[common], help="derogatory qutrit classes")
    p.add_argument("action", choices=("reps", "reach", "isolate", "fixtures"))
    p.add_argument("--n", type=int, choices=(3, 4, 5), required=True)
    p.add_argument("--b", help="comma-separated coefficients")
    p.add_argument("--type", type=int, choices=(1, 2), default=2)
    p.add_argument("--mu", type=_complex_arg)
    p.add_argument("--grid", help="ANGULAR,RADIAL[,REFINE]")
    p.set_defaults(func=cmd_derog)

    p = sub.add_parser("reproduce", parents=[common], help="run the acceptance criteria")
    p.add_argument("--suite", default="all", help="'all', 'list' or comma-separated criterion numbers")
    p.set_defaults(func=cmd_reproduce, format="table")
    return parser


def _fail(code: int, kind: str, exc: BaseException) -> int:
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    if args.command == "decide":
        args.tol_override = args.tol if args.tol != DEFAULT_TOL else None
    if getattr(args, "name", None) is None and hasattr(args, "spec") and not args.spec:
        return _fail(EXIT_VALIDATION, "validation", SchemaError("give a seed name or --spec"))
    try:
        return args.func(args)
    except (ToleranceFailure, ArithmeticError, ps.ProtocolError) as exc:
        return _fail(EXIT_TOLERANCE, "tolerance", exc)
    except (ValueError, KeyError, TypeError, SchemaError, argparse.ArgumentTypeError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_VALIDATION, "validation", exc)


if __name__ == "__main__":
    sys.exit(main())
