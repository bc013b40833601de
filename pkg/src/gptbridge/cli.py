"""Command-line interface.

Exit codes: 0 when every check is satisfied, 2 when a principle is violated,
1 on input or usage errors.  Every command prints a human-readable table
followed by a machine-readable JSON block introduced by ``MACHINE_MARKER``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import zoo
from .contextual import (HypergraphError, check_ce, dump_hypergraph,
                         dump_weight, is_probability_weight, load_hypergraph, load_weight)
from .deciders import NO_RESTRICTION, RESTRICTED, is_orthogonal_effect_set, is_pure_effect, \
    sufficient_orthogonality
from .gpt import GptSystem, InvalidSystemError, dump_system, load_system
from .nonlocality import (Event, InvalidBehaviorError, ParseError, check_lo, dump_behavior,
                          is_no_signalling, load_behavior, load_json)
from .numerics.scalars import IntervalScalar, QuadraticScalar, sign, to_json
from .orthograph import ENGINES, ResourceCapExceeded, check_level
from .verdict import DeciderError, ImpureInput, NonOrthogonalInput

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2
MACHINE_MARKER = "--- machine-readable ---"


class UsageError(ValueError):
    pass


# -- formatting ----------------------------------------------------------------------

def fmt_scalar(x) -> str:
    """Rationals as ``p/q``, intervals with an explicit ``±`` radius."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, Fraction)):
        f = Fraction(x)
        return f"{f.numerator}/{f.denominator}"
    if isinstance(x, (IntervalScalar, QuadraticScalar)):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def fmt_label(label) -> str:
    if isinstance(label, tuple):
        return "(" + "; ".join(fmt_label(l) for l in label) + ")"
    return str(label)


def jsonable(x: Any):
    """Convert witnesses to JSON, scalars via their exact encoding."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, Fraction, float, IntervalScalar, QuadraticScalar)):
        return to_json(x)
    if isinstance(x, Event):
        return str(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "coords"):
        return [to_json(c) for c in x.coords]
    if hasattr(x, "value"):  # enums
        return x.value
    return str(x)


def emit(out, command: list[str], rows: list[tuple[str, str]], machine: dict):
    print("$ gptbridge " + " ".join(command), file=out)
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        print(f"  {k.ljust(width)}  {v}", file=out)
    print(MACHINE_MARKER, file=out)
    print(json.dumps({"command": command, **machine}, indent=2, ensure_ascii=False), file=out)


def parse_machine_block(text: str) -> dict:
    """Extract the JSON block from a command's standard output."""
    _, _, block = text.partition(MACHINE_MARKER + "\n")
    if not block:
        raise ValueError("no machine-readable block in output")
    return json.loads(block)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


# -- hierarchy reports -----------------------------------------------------------------

def _lift(report, base_clique: tuple, base_total):
    """A violation at level j gives one at level j+1: extend the clique by a unit-weight clique."""
    labels = tuple(l + (b,) for l in report.witness for b in base_clique)
    return type(report)(
        level=report.level + 1,
        satisfied=False,
        max_clique_value=report.max_clique_value * base_total,
        witness=labels,
        exact=False,
        certainty=report.certainty,
        vertices=0,
        pruned_zero=0,
        engine="lifted",
        upper_bound=None,
    )


def _hierarchy(args, run, base_clique, base_total, what: str) -> tuple[list, list[tuple[str, str]]]:
    check_level(args.level, args.max_level)
    reports = []
    rows = []
    for k in range(1, args.level + 1):
        if reports and not reports[-1].satisfied and not args.no_lift:
            rep = _lift(reports[-1], base_clique, base_total)
        else:
            rep = run(k)
        reports.append(rep)
        value = fmt_scalar(rep.max_clique_value)
        if rep.engine == "lifted":
            value = ">= " + value + " (lifted from level %d)" % (k - 1)
        elif not rep.exact:
            value = ">= " + value
        status = "satisfied" if rep.satisfied else "VIOLATED"
        rows.append((f"{what} level {k}", f"{status}  max clique weight {value}  [{rep.certainty.value}, "
                                          f"{rep.engine}, {rep.vertices} vertices]"))
        if not rep.satisfied:
            rows.append(("  witness", ", ".join(fmt_label(l) for l in rep.witness)))
    return reports, rows


def _report_json(rep) -> dict:
    return {
        "level": rep.level,
        "satisfied": rep.satisfied,
        "value": jsonable(rep.max_clique_value),
        "exact": rep.exact,
        "certainty": rep.certainty.value,
        "engine": rep.engine,
        "vertices": rep.vertices,
        "witness": [fmt_label(l) for l in rep.witness],
    }


def _engine_kwargs(args) -> dict:
    return dict(max_vertices=args.max_vertices, max_level=args.max_level,
                early_stop=1 if args.first_violation else None,
                node_limit=args.node_limit, engine=args.engine)


def cmd_check_lo(args, out) -> int:
    b = load_behavior(_read(args.behavior))
    # all outputs of one input string are pairwise locally orthogonal and sum to 1
    x0 = (0,) * b.parties
    base = tuple(e for e in b.events() if e.x == x0 and sign(b.p(e.y, e.x)) != 0)
    total = sum((b.p(e.y, e.x) for e in base), Fraction(0))
    reports, rows = _hierarchy(args, lambda k: check_lo(b, k, **_engine_kwargs(args)), base, total, "LO")
    emit(out, args.argv, rows, {"principle": "LO", "reports": [_report_json(r) for r in reports]})
    return EXIT_OK if all(r.satisfied for r in reports) else EXIT_VIOLATED


def cmd_check_ce(args, out) -> int:
    h = load_hypergraph(_read(args.hypergraph))
    w = load_weight(_read(args.weight), h)
    base = tuple(v for v in h.edges[0] if sign(w[v]) != 0)
    total = sum((w[v] for v in base), Fraction(0))
    reports, rows = _hierarchy(args, lambda k: check_ce(w, k, **_engine_kwargs(args)), base, total, "CE")
    emit(out, args.argv, rows, {"principle": "CE", "reports": [_report_json(r) for r in reports]})
    return EXIT_OK if all(r.satisfied for r in reports) else EXIT_VIOLATED


def cmd_check_ns(args, out) -> int:
    b = load_behavior(_read(args.behavior))
    v = is_no_signalling(b)
    rows = [("no-signalling", "satisfied" if v.holds else "VIOLATED"),
            ("certainty", v.certainty.value)]
    if not v.holds:
        rows.append(("  witness", json.dumps(jsonable(v.witness))))
    emit(out, args.argv, rows, {"principle": "NS", "satisfied": v.holds,
                                "certainty": v.certainty.value, "witness": jsonable(v.witness)})
    return EXIT_OK if v.holds else EXIT_VIOLATED


def _effect_token(sys_: GptSystem, token: str) -> int:
    try:
        return sys_.effect_index(token)
    except KeyError:
        pass
    try:
        return sys_.effect_index(token.replace("_", ""))
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def cmd_check_so(args, out) -> int:
    s = load_system(_read(args.system))
    idx = [_effect_token(s, t) for t in args.effects]
    names = [s.effect_label(i) for i in idx]
    effects = [s.effect(i) for i in idx]
    rows = [("system", repr(s)), ("effects", ", ".join(names))]
    for n, e in zip(names, effects):
        if not is_pure_effect(e, s):
            raise ImpureInput(f"precondition failed: effect {n} is not pure")
    orth = is_orthogonal_effect_set(effects, s)
    if not orth.holds:
        raise NonOrthogonalInput(f"precondition failed: {orth.detail or 'effects are not orthogonal'}")
    v = sufficient_orthogonality(effects, s, args.mode)
    wit = v.witness
    rows.append(("sufficient orthogonality", "satisfied" if v.holds else "VIOLATED"))
    rows.append(("certainty", v.certainty.value))
    rest = wit["rest"]
    rows.append(("rest effect", "(" + ", ".join(fmt_scalar(c) for c in rest.coords) + ")"))
    if not v.holds and "state" in wit:
        rows.append(("  witness state", f"{wit['state']}: total probability "
                                        f"{fmt_scalar(wit['total_probability'])} > 1"))
    machine = {"principle": "SO", "effects": names, "satisfied": v.holds, "mode": args.mode,
               "certainty": v.certainty.value,
               "witness": {k: jsonable(wit[k]) for k in ("rest", "state", "total_probability")
                           if k in wit}}
    emit(out, args.argv, rows, machine)
    return EXIT_OK if v.holds else EXIT_VIOLATED


# -- zoo -------------------------------------------------------------------------------

def _zoo_object(name: str, params: list[str], exact: bool):
    def n_param(default=None):
        if params:
            return int(params[0])
        if default is None:
            raise UsageError(f"zoo {name} needs an integer parameter")
        return default

    if name == "squarebit":
        return "system", zoo.square_bit()
    if name == "polygon":
        return "system", zoo.polygon_system(n_param(), exact=exact or None)
    if name == "classical":
        return "system", zoo.classical_system(n_param())
    if name in zoo.BEHAVIORS:
        return "behavior", zoo.BEHAVIORS[name]()
    if name == "pentagon":
        return "weight", zoo.pentagon_half_weight()
    if name == "kcbs":
        return "weight", zoo.kcbs_weight()
    raise UsageError(f"unknown model {name!r}; known: {', '.join(ZOO_NAMES)}")


ZOO_NAMES = ("squarebit", "polygon", "classical", *zoo.BEHAVIORS, "pentagon", "kcbs")


def _write(path: str | None, text: str, out):
    if path is None:
        print(text, file=out)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def cmd_zoo(args, out) -> int:
    kind, obj = _zoo_object(args.name, args.params, args.exact)
    rows = [("model", args.name + "".join(" " + p for p in args.params)), ("kind", kind)]
    machine: dict = {"model": args.name, "kind": kind}
    files = []
    if kind == "system":
        reloaded = load_system(dump_system(obj))
        rows += [("dimension", str(obj.dim)), ("pure states", str(len(obj.pure_states))),
                 ("effect generators", ", ".join(obj.effect_label(i)
                                                 for i in range(len(obj.effect_generators)))),
                 ("certainty", obj.certainty.value), ("validated", "yes")]
        machine.update(dim=obj.dim, certainty=obj.certainty.value, valid=True,
                       round_trip=reloaded.dim == obj.dim)
        if args.out:
            _write(args.out, dump_system(obj), out)
            files.append(args.out)
    elif kind == "behavior":
        ns = is_no_signalling(obj)
        rows += [("parties", str(obj.parties)), ("no-signalling", str(ns.holds).lower()),
                 ("certainty", obj.certainty.value)]
        machine.update(parties=obj.parties, no_signalling=ns.holds, certainty=obj.certainty.value)
        if args.out:
            _write(args.out, dump_behavior(obj), out)
            files.append(args.out)
    else:
        h = obj.hypergraph
        pw = is_probability_weight(obj.w, h)
        rows += [("vertices", str(len(h.vertices))), ("hyperedges", str(len(h.edges))),
                 ("probability weight", str(pw.holds).lower()), ("certainty", obj.certainty.value)]
        machine.update(vertices=len(h.vertices), probability_weight=pw.holds,
                       certainty=obj.certainty.value)
        if args.out:
            weight_out = args.weight_out or str(Path(args.out).with_suffix(".weight.json"))
            _write(args.out, dump_hypergraph(h), out)
            _write(weight_out, dump_weight(obj), out)
            files += [args.out, weight_out]
    if files:
        rows.append(("wrote", ", ".join(files)))
    machine["files"] = files
    emit(out, args.argv, rows, machine)
    if not args.out:
        text = dump_system(obj) if kind == "system" else dump_behavior(obj) if kind == "behavior" \
            else dump_hypergraph(obj.hypergraph)
        print(text, file=out)
    return EXIT_OK


# -- validate --------------------------------------------------------------------------

def cmd_validate(args, out) -> int:
    text = _read(args.file)
    data = load_json(text)
    if isinstance(data, dict) and "table" in data:
        b = load_behavior(text)
        kind, summary = "behavior", f"{b.parties} parties, inputs {b.n_inputs}, outputs {b.n_outputs}"
    elif isinstance(data, dict) and "pure_states" in data:
        s = load_system(text)
        kind, summary = "system", repr(s)
    elif isinstance(data, dict) and "edges" in data:
        h = load_hypergraph(text)
        kind, summary = "hypergraph", f"{len(h.vertices)} vertices, {len(h.edges)} hyperedges"
    elif args.hypergraph:
        w = load_weight(text, load_hypergraph(_read(args.hypergraph)))
        kind, summary = "weight", f"probability weight on {len(w.w)} vertices"
    else:
        raise UsageError("unrecognised file; pass --hypergraph to validate a weight file")
    emit(out, args.argv, [("file", args.file), ("kind", kind), ("valid", "yes"), ("summary", summary)],
         {"kind": kind, "valid": True})
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------

def _hierarchy_flags(p: argparse.ArgumentParser):
    p.add_argument("--level", "-k", type=int, default=1, help="report levels 1..k")
    p.add_argument("--max-vertices", type=int, default=None,
                   help="product-graph vertex cap (default 10^6, or $GPTBRIDGE_MAX_VERTICES)")
    p.add_argument("--max-level", type=int, default=None, help="override the level cap of 3")
    p.add_argument("--node-limit", type=int, default=None, help="branch-and-bound node budget")
    p.add_argument("--engine", choices=ENGINES, default="auto")
    p.add_argument("--first-violation", action="store_true",
                   help="stop the clique search at the first clique heavier than 1")
    p.add_argument("--no-lift", action="store_true",
                   help="search every level even after a lower level is violated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gptbridge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-lo", help="Local Orthogonality hierarchy of a behavior file")
    p.add_argument("behavior")
    _hierarchy_flags(p)
    p.set_defaults(func=cmd_check_lo)

    p = sub.add_parser("check-ce", help="Consistent Exclusivity hierarchy of a weighted hypergraph")
    p.add_argument("hypergraph")
    p.add_argument("weight")
    _hierarchy_flags(p)
    p.set_defaults(func=cmd_check_ce)

    p = sub.add_parser("check-ns", help="no-signalling test of a behavior file")
    p.add_argument("behavior")
    p.set_defaults(func=cmd_check_ns)

    p = sub.add_parser("check-so", help="Sufficient Orthogonality for chosen effects of a system")
    p.add_argument("system")
    p.add_argument("effects", nargs="+", help="effect names or 0-based indices")
    p.add_argument("--mode", choices=(NO_RESTRICTION, RESTRICTED), default=NO_RESTRICTION)
    p.set_defaults(func=cmd_check_so)

    p = sub.add_parser("zoo", help="export a built-in model")
    p.add_argument("name", help=", ".join(ZOO_NAMES))
    p.add_argument("params", nargs="*")
    p.add_argument("--out", "-o", default=None)
    p.add_argument("--weight-out", default=None, help="weight file for hypergraph models")
    p.add_argument("--exact", action="store_true", help="exact coordinates for polygons where possible")
    p.set_defaults(func=cmd_zoo)

    p = sub.add_parser("validate", help="parse and validate a system, behavior, hypergraph or weight file")
    p.add_argument("file")
    p.add_argument("--hypergraph", default=None)
    p.set_defaults(func=cmd_validate)
    return parser


ERRORS = (ParseError, InvalidBehaviorError, InvalidSystemError, HypergraphError, DeciderError,
          ResourceCapExceeded, UsageError, KeyError, ValueError)


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    args.argv = argv
    if getattr(args, "level", 1) < 1:
        print("error: --level must be at least 1", file=err)
        return EXIT_ERROR
    try:
        return args.func(args, out)
    except ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
