"""Command-line interface: ``setcircuits <subcommand> ...``.

Exit codes: 0 decided result, 1 undecided/unknown/budget outcome, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, algebra
from .circuit import CircuitError, classify_fragment, evaluate, member, parse_circuit
from .equations import (
    EquationError,
    bounded_sat,
    least_fixpoint,
    parse_system,
    resolve,
    semidecide_unsat,
    stage_solutions,
    EXHAUSTIVE_BITS,
)
from .grammar import GrammarError, bounded_language, naive_derivable, parse_grammar, to_equation_system
from .equations import format_term
from .natset import FinCofSet, NotClosedError, TriBool, WindowSet, format_set, parse_set

EXIT_OK, EXIT_UNDECIDED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _set_json(v) -> dict:
    if isinstance(v, FinCofSet):
        return {"kind": "cofinite" if v.cofinite else "finite", "support": list(v.support), "text": format_set(v)}
    return {
        "kind": "window",
        "bound": v.bound,
        "elements": v.elements(),
        "undecided": v.undecided(),
        "tail": v.tail.value,
    }


def _set_text(v) -> str:
    if isinstance(v, FinCofSet):
        return format_set(v)
    from .natset import format_window

    return format_window(v)


def _parse_assign(items: list[str]) -> dict[str, FinCofSet]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"--assign expects var=set, got {item!r}")
        name, lit = item.split("=", 1)
        try:
            out[name.strip()] = parse_set(lit)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    return out


def _base(args, engine: str, bound) -> dict:
    return {
        "tool": "setcircuits",
        "version": __version__,
        "command": args.command,
        "engine": engine,
        "bound": bound,
        "seed": args.seed,
    }


# ---------------------------------------------------------------------------
# subcommands; each returns (report, text lines, exit code)


def cmd_eval(args):
    c = parse_circuit(_read(args.circuit))
    env = _parse_assign(args.assign)
    if args.window is not None and args.engine == "fincof":
        raise InputError("--window selects the window engine; drop --engine fincof")
    bound = args.window
    engine = "fincof" if bound is None else "window"
    report = _base(args, engine, bound)
    frag = classify_fragment(c)
    report["fragment"] = {"ops": sorted(frag.ops), "monotone": frag.monotone, "additive": frag.additive_exact}
    try:
        ev = evaluate(c, env, window=bound)
    except NotClosedError as exc:
        report["status"] = "not-closed"
        report["message"] = str(exc)
        return report, [f"not closed: {exc}", "rerun with --window B"], EXIT_UNDECIDED
    report["status"] = "ok"
    report["value"] = _set_json(ev.output)
    code = EXIT_UNDECIDED if isinstance(ev.output, WindowSet) and ev.output.unknown else EXIT_OK
    return report, [_set_text(ev.output)], code


def cmd_member(args):
    c = parse_circuit(_read(args.circuit))
    if args.n < 0:
        raise InputError("n must be a natural number")
    env = _parse_assign(args.assign)
    bound = args.window if args.window is not None else max(args.n, c.max_constant)
    ans = member(c, args.n, bound=bound, assignment=env)
    report = _base(args, "window", bound)
    report["n"] = args.n
    report["answer"] = str(ans)
    code = EXIT_UNDECIDED if ans is TriBool.UNDECIDED else EXIT_OK
    return report, [str(ans)], code


def cmd_algebra(args):
    if args.n < 0:
        raise InputError("n must be a natural number")
    alg = algebra.make_bn(args.n)
    report = _base(args, "exhaustive", None)
    report["algebra"] = f"B_{args.n}"
    report["atoms"] = alg.atom_count
    lines = [f"B_{args.n}: {alg.atom_count} atoms, {alg.size} elements"]
    do_ids = args.check_identities or not args.classify
    if do_ids:
        res = []
        schemes = algebra.cbm_axioms() + algebra.ge_identities(args.n + 2)
        for s in schemes:
            r = algebra.check_identity(s, alg)
            cex = None
            if r.counterexample is not None:
                cex = {k: alg.format_element(v) for k, v in r.counterexample.items()}
            res.append({"identity": s.label, "holds": r.holds, "counterexample": cex, "checked": r.checked})
            lines.append(f"{s.label}: {'holds' if r.holds else 'FAILS ' + json.dumps(cex, sort_keys=True)}")
        report["identities"] = res
        report["all_hold"] = all(r["holds"] for r in res)
    if args.classify:
        cl = algebra.classify(alg)
        cong = algebra.congruences(alg)
        report["classification"] = {
            "subdirectly_irreducible": cl.subdirectly_irreducible,
            "simple": cl.simple,
            "annihilators": [alg.format_element(z) for z in cl.annihilators],
            "isomorphic_to_bn": cl.isomorphic_to_bn,
            "congruence_count": len(cong),
            "congruence_chain": algebra.is_chain(cong),
            "monolith": None if cl.monolith is None else alg.format_element(cl.monolith),
        }
        for k, v in report["classification"].items():
            lines.append(f"{k}: {v}")
    return report, lines, EXIT_OK


def _fmt_assignment(a) -> str:
    return ", ".join(f"{v}={{{','.join(map(str, s))}}}" for v, s in a.items())


def cmd_solve(args):
    system = parse_system(_read(args.system))
    if args.semidecide:
        if args.max_n is None:
            raise InputError("--semidecide needs --max-n")
        r = semidecide_unsat(system, args.max_n, budget=args.budget)
        report = _base(args, "stage", args.max_n)
        report.update({"status": r.status, "stage": r.stage, "max_n": r.max_n})
        if r.note:
            report["note"] = r.note
        if r.status == "unsat":
            return report, [f"Unsat at stage {r.stage}"], EXIT_OK
        return report, [f"Unknown up to stage {r.max_n}" + (f" ({r.note})" if r.note else "")], EXIT_UNDECIDED
    if args.stage is None:
        raise InputError("solve needs --stage n or --semidecide --max-n N")
    r = bounded_sat(system, args.stage, mode=args.mode, budget=args.budget, seed=args.seed)
    report = _base(args, "stage", args.stage)
    report.update({"status": r.status, "method": r.method, "explored": r.explored, "assignment": r.assignment})
    lines = []
    if r.found:
        lines.append(f"solution: {_fmt_assignment(r.assignment)}")
        if args.mode == "exhaustive" and len(system.variables) * (args.stage + 1) <= EXHAUSTIVE_BITS:
            count = 0
            for _ in stage_solutions(system, args.stage):
                count += 1
                if count > 1:
                    break
            report["unique"] = count == 1
            lines.append("unique" if count == 1 else "not unique")
    elif r.status == "none":
        lines.append(f"no solution at stage {args.stage}")
    else:
        lines.append(f"budget exhausted after {r.explored} candidates")
    return report, lines, EXIT_UNDECIDED if r.status == "budget" else EXIT_OK


def cmd_fixpoint(args):
    rs = resolve(parse_system(_read(args.system)))
    r = least_fixpoint(rs, args.window)
    report = _base(args, "window", args.window)
    report["iterations"] = r.iterations
    report["values"] = {v: _set_json(w) for v, w in r.values.items()}
    lines = [f"{v} = {_set_text(w)}" for v, w in r.values.items()]
    return report, lines, EXIT_OK


def cmd_grammar(args):
    g = parse_grammar(_read(args.grammar))
    report = _base(args, "window", args.language)
    report["start"] = g.start
    lines = []
    if args.to_system:
        rs, start = to_equation_system(g)
        eqs = [f"(= {v} {format_term(c)})" for v, c in rs.defs.items()]
        report["system"] = eqs
        lines += eqs
    if args.language is not None:
        lang = bounded_language(g, args.language)
        report["language"] = lang
        lines.append("{" + ",".join(map(str, lang)) + "}")
    if args.member is not None:
        ok = naive_derivable(g, args.member)
        report["member"] = {"k": args.member, "derivable": ok}
        lines.append(f"a^{args.member}: {'In' if ok else 'Out'}")
    if not lines:
        raise InputError("grammar needs --language B, --to-system or --member k")
    return report, lines, EXIT_OK


# ---------------------------------------------------------------------------


def _nat(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="setcircuits", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate a circuit")
    e.add_argument("circuit")
    e.add_argument("--assign", action="append", metavar="VAR=SET")
    e.add_argument("--window", type=_nat)
    e.add_argument("--engine", choices=("fincof", "window"), default=None)
    e.set_defaults(func=cmd_eval)

    m = sub.add_parser("member", parents=[common], help="decide n in I(circuit)")
    m.add_argument("circuit")
    m.add_argument("n", type=int)
    m.add_argument("--assign", action="append", metavar="VAR=SET")
    m.add_argument("--window", type=_nat)
    m.set_defaults(func=cmd_member)

    a = sub.add_parser("algebra", parents=[common], help="finite algebra checks")
    a.add_argument("family", choices=("bn",))
    a.add_argument("n", type=int)
    a.add_argument("--check-identities", action="store_true")
    a.add_argument("--classify", action="store_true")
    a.set_defaults(func=cmd_algebra)

    s = sub.add_parser("solve", parents=[common], help="stage satisfiability of an equation system")
    s.add_argument("system")
    s.add_argument("--stage", type=_nat)
    s.add_argument("--semidecide", action="store_true")
    s.add_argument("--max-n", type=_nat)
    s.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    s.add_argument("--budget", type=_nat)
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("fixpoint", parents=[common], help="least solution of a resolved system")
    f.add_argument("system")
    f.add_argument("--window", type=_nat, required=True)
    f.set_defaults(func=cmd_fixpoint)

    g = sub.add_parser("grammar", parents=[common], help="conjunctive grammar tools")
    g.add_argument("grammar")
    g.add_argument("--language", type=_nat, metavar="B")
    g.add_argument("--to-system", action="store_true")
    g.add_argument("--member", type=_nat, metavar="k")
    g.set_defaults(func=cmd_grammar)
    return p


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        report, lines, code = args.func(args)
    except (InputError, CircuitError, EquationError, GrammarError, algebra.AlgebraError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else str(exc)
        err = {"type": type(exc).__name__, "message": msg}
        for attr in ("line", "pos"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        if args.format == "json":
            out.write(json.dumps({"tool": "setcircuits", "version": __version__, "error": err}, sort_keys=True) + "\n")
        else:
            sys.stderr.write(f"error: {msg}\n")
        return EXIT_INPUT
    if args.format == "json":
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    return code


def main() -> None:
    sys.exit(run())
