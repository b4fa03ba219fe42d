"""``durcsp`` command-line front end.

Exit codes: 0 success or Bisimilar, 1 NotBisimilar or diagnostics,
2 usage or I/O error, 3 Inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import constraints as K
from . import corpus
from . import equivalence as Q
from . import opsem
from . import syntax as S
from . import tcts as T
from .config import initial_config, render_config
from .generate import random_specs

SCHEDULE_HEADER = "# durcsp-schedule v1"

OK, DIAG, USAGE, INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- input -------------------------------------------------------------------

def _read_text(ref: str) -> str:
    path = Path(ref)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    if ref in corpus.names():
        return corpus.source(ref)
    raise UsageError(f"{ref}: no such file or corpus entry")


def load_spec(ref: str) -> S.Spec:
    return S.parse_spec(_read_text(ref))


def _corpus_depth(ref: str, default: int) -> int:
    if not Path(ref).is_file() and ref in corpus.names():
        return int(corpus.sidecar(ref).get("compile_depth", default))
    return default


def _frac(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None
    return q


def _pos_frac(text: str) -> Fraction:
    q = _frac(text)
    if q <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return q


def read_schedule(text: str) -> list:
    lines = text.splitlines()
    if not lines or lines[0].strip() != SCHEDULE_HEADER:
        raise UsageError(f"schedule must start with {SCHEDULE_HEADER!r}")
    out = []
    for n, raw in enumerate(lines[1:], start=2):
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            continue
        word, _, arg = ln.partition(" ")
        try:
            if word == "PICK":
                out.append(("pick", int(arg)))
            elif word == "WAIT":
                out.append(("wait", Fraction(arg.strip())))
            else:
                raise ValueError(word)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"schedule line {n}: expected 'PICK n' or 'WAIT p/q', got {ln!r}") from None
    return out


# -- output ------------------------------------------------------------------

def _emit(args, human: str, data) -> None:
    if args.json:
        sys.stdout.write(json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2) + "\n")
    else:
        sys.stdout.write(human if human.endswith("\n") else human + "\n")


def _q(x) -> str:
    return str(Fraction(x))


def verdict_data(v) -> dict:
    if isinstance(v, Q.Bisimilar):
        return {"verdict": "Bisimilar", "within_bounds": v.within_bounds, "depth": v.depth, "grid": _q(v.grid)}
    if isinstance(v, Q.NotBisimilar):
        f = v.counterexample.failure
        return {
            "verdict": "NotBisimilar",
            "clause": f.clause,
            "side": f.side,
            "counterexample": v.counterexample.lines(),
            "depth": v.depth,
            "grid": _q(v.grid),
        }
    return {"verdict": "Inconclusive", "reason": v.reason}


def verdict_code(v) -> int:
    if isinstance(v, Q.Bisimilar):
        return OK
    if isinstance(v, Q.NotBisimilar):
        return DIAG
    return INCONCLUSIVE


def _worst(codes) -> int:
    order = {OK: 0, INCONCLUSIVE: 1, DIAG: 2}
    return max(codes, key=order.__getitem__, default=OK)


def _model_data(m: T.TimedCTS, diags=()) -> dict:
    return {
        "states": [
            {"id": s.id, "events": [str(e) for e in sorted(s.events)], "truncated": s.truncated} for s in m.states
        ],
        "transitions": [
            {
                "source": t.source,
                "target": t.target,
                "label": t.label,
                "causes": [str(e) for e in sorted(t.causes)],
                "event": t.event,
                "guard": K.render(t.guard),
                "resets": sorted(t.resets),
            }
            for t in m.transitions
        ],
        "initial": m.initial,
        "truncated": m.truncated,
        "diagnostics": [str(d) for d in diags],
    }


# -- commands ----------------------------------------------------------------

def cmd_parse(args) -> int:
    spec = load_spec(args.input)
    data = {
        "root": spec.root,
        "durations": {a: _q(d) for a, d in spec.durations.items()},
        "definitions": {n: S.render(p) for n, p in spec.definitions.items()},
    }
    _emit(args, S.render_spec(spec), data)
    return OK


def cmd_simulate(args) -> int:
    spec = load_spec(args.input)
    try:
        text = Path(args.schedule).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{args.schedule}: {exc.strerror}") from None
    sched = read_schedule(text)
    c0 = initial_config(spec.process, spec.definitions)
    try:
        tr = opsem.run(c0, sched, spec, allow_expiry=not args.no_expiry)
    except opsem.ScheduleError as exc:
        raise UsageError(str(exc)) from None
    data = {
        "steps": [
            {"act": str(it)} if isinstance(it, opsem.ActionStep) else {"delay": _q(it)} for it, _ in tr.steps
        ],
        "final": render_config(tr.final),
    }
    _emit(args, opsem.format_trace(tr), data)
    return OK


def _compile(args, spec):
    depth = args.max_depth if args.max_depth is not None else _corpus_depth(args.input, 64)
    return T.compile(spec, max_states=args.max_states, max_depth=depth)


def cmd_compile(args) -> int:
    spec = load_spec(args.input)
    m = _compile(args, spec)
    diags = T.validate_cts(m) if args.check else []
    human = T.to_dot(m) if args.dot else T.to_text(m)
    _emit(args, human, _model_data(m, diags))
    for d in diags:
        print(f"{args.input}: {d}", file=sys.stderr)
    return DIAG if diags else OK


def cmd_export(args) -> int:
    spec = load_spec(args.input)
    m = _compile(args, spec)
    text = T.to_dot(m) if args.format == "dot" else T.to_text(m)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return OK


def _params(args, **kw) -> Q.CheckParams:
    depth = args.depth if args.depth is not None else getattr(args, "default_depth", 8)
    return Q.CheckParams(
        max_depth=kw.pop("max_depth", depth),
        delay_grid=args.grid,
        node_budget=args.node_budget,
        **kw,
    )


def cmd_check_theorem1(args) -> int:
    items = [(ref, load_spec(ref), _corpus_depth(ref, 64)) for ref in args.inputs]
    if args.random:
        for k, s in enumerate(random_specs(args.seed, args.random)):
            items.append((f"random[{args.seed}:{k}]", s, 64))
    results, codes = [], []
    for name, spec, cdepth in items:
        m = T.compile(spec, max_depth=args.max_depth or cdepth)
        depth = args.depth if args.depth is not None else T.longest_path(m) + 1
        try:
            v = Q.tau_bisimilar(m, spec, _params(args, max_depth=depth))
        except Q.SynchronizationError as exc:
            print(f"{name}: SYNCH1 violated\n{exc}", file=sys.stderr)
            codes.append(DIAG)
            results.append({"input": name, "verdict": "SynchronizationError"})
            continue
        codes.append(verdict_code(v))
        results.append({"input": name, **verdict_data(v)})
        if not args.json:
            prefix = f"{name}: " if len(items) > 1 else ""
            print(prefix + str(v))
    if args.json:
        _emit(args, "", results if len(results) > 1 else results[0])
    return _worst(codes)


def _merged_durations(*specs) -> dict:
    out = {}
    for s in specs:
        for a, d in s.durations.items():
            if a in out and out[a] != d:
                raise UsageError(f"inputs disagree on the duration of {a!r}")
            out[a] = d
    return out


def cmd_check_bisim(args) -> int:
    a, b = load_spec(args.left), load_spec(args.right)
    if args.mode == "cts":
        ma = T.compile(a, max_depth=_corpus_depth(args.left, 64))
        mb = T.compile(b, max_depth=_corpus_depth(args.right, 64))
        v = Q.cts_run_bisimilar(ma, mb, _params(args))
    else:
        defs = {**a.definitions, **b.definitions}
        params = _params(args, durations=_merged_durations(a, b), definitions=defs)
        v = Q.config_bisimilar(initial_config(a.process, a.definitions), initial_config(b.process, b.definitions), params)
    _emit(args, str(v), verdict_data(v))
    return verdict_code(v)


def _parse_duration(text: str):
    a, sep, q = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected ACTION=DURATION, got {text!r}")
    return a.strip(), _frac(q)


def cmd_refine_check(args) -> int:
    p, q = load_spec(args.left), load_spec(args.right)
    durs = _merged_durations(p, q)
    try:
        by_spec = load_spec(args.by)
        by = by_spec.process
        durs.update({k: v for k, v in by_spec.durations.items() if k not in durs})
    except UsageError:
        by = S.parse_process(args.by)
    durs.update(dict(args.duration or ()))
    missing = sorted(x for x in S.actions_of(by) if x not in durs and x not in S.RESERVED_ACTIONS)
    if missing:
        raise UsageError(f"no duration for {', '.join(missing)}; pass --duration")
    params = _params(args, durations=durs)
    cp = initial_config(p.process, p.definitions)
    cq = initial_config(q.process, q.definitions)
    try:
        v = Q.refinement_preserved(by, args.action, cp, cq, params)
    except Q.PreconditionError as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return DIAG
    _emit(args, str(v), verdict_data(v))
    return verdict_code(v)


def cmd_makespan(args) -> int:
    spec = load_spec(args.input)
    c0 = initial_config(spec.process, spec.definitions)
    ms = opsem.min_makespan(c0, spec, args.grid, max_states=args.max_states, max_steps=args.depth)
    data = {
        "infimum": _q(ms.infimum),
        "open": ms.open,
        "samples": [[_q(g), _q(v)] for g, v in ms.samples],
    }
    _emit(args, str(ms), data)
    return OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def globals_(suppress):
        g = argparse.ArgumentParser(add_help=False)
        kw = {"default": argparse.SUPPRESS} if suppress else {}
        g.add_argument("--json", action="store_true", help="structured output", **kw)
        g.add_argument("--seed", type=int, help="seed for randomized inputs", **({"default": 0} | kw))
        return g

    # options may come before or after the subcommand; the copy on each
    # subcommand must not overwrite a value given before it
    common = globals_(True)

    check = argparse.ArgumentParser(add_help=False)
    check.add_argument("--depth", type=int, default=None, help="action depth of the bisimulation game")
    check.add_argument("--grid", type=_pos_frac, default=None, help="delay grid (default: half the gcd)")
    check.add_argument("--node-budget", type=int, default=500_000)

    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--max-states", type=int, default=5000)
    bounds.add_argument("--max-depth", type=int, default=None, help="compile depth bound")

    ap = argparse.ArgumentParser(prog="durcsp", description="duration-CSP workbench", parents=[globals_(False)])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse, validate and pretty-print a spec")
    p.add_argument("input")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("simulate", parents=[common], help="replay a schedule file")
    p.add_argument("input")
    p.add_argument("schedule")
    p.add_argument("--no-expiry", action="store_true", help="closed windows refuse further delay")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compile", parents=[common, bounds], help="compile to a timed-CTS")
    p.add_argument("input")
    p.add_argument("--dot", action="store_true", help="DOT instead of model text")
    p.add_argument("--check", action="store_true", help="validate the model structurally")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("export", parents=[common, bounds], help="write the compiled model")
    p.add_argument("input")
    p.add_argument("--format", choices=("dot", "model"), default="model")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("check-theorem1", parents=[common, check], help="compiled model vs operational semantics")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--random", type=int, default=0, metavar="N", help="also check N generated specs")
    p.add_argument("--max-depth", type=int, default=None, help="compile depth bound")
    p.set_defaults(func=cmd_check_theorem1)

    p = sub.add_parser("check-bisim", parents=[common, check], help="timed causal bisimulation of two specs")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--mode", choices=("config", "cts"), default="config")
    p.set_defaults(func=cmd_check_bisim, default_depth=8)

    p = sub.add_parser("refine-check", parents=[common, check], help="refinement preserves bisimilarity")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--action", required=True)
    p.add_argument("--by", required=True, help="refining process: text, file or corpus name")
    p.add_argument("--duration", type=_parse_duration, action="append", metavar="A=Q")
    p.set_defaults(func=cmd_refine_check, default_depth=10)

    p = sub.add_parser("makespan", parents=[common], help="least completion time")
    p.add_argument("input")
    p.add_argument("--grid", type=_pos_frac, default=None)
    p.add_argument("--depth", type=int, default=None, help="maximum action steps per schedule")
    p.add_argument("--max-states", type=int, default=200_000)
    p.set_defaults(func=cmd_makespan)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if getattr(args, "func", None) is cmd_check_theorem1 and not args.inputs and not args.random:
        print("durcsp: check-theorem1 needs an input or --random N", file=sys.stderr)
        return USAGE
    try:
        return args.func(args)
    except (S.ParseError, S.SpecError) as exc:
        where = getattr(args, "input", None) or getattr(args, "left", "")
        diags = exc.diagnostics if isinstance(exc, S.SpecError) else [exc]
        for d in diags:
            print(f"{where}: {d}", file=sys.stderr)
        return DIAG
    except (UsageError, corpus.CorpusError, Q.ParamsError, T.CompileError) as exc:
        print(f"durcsp: {exc}", file=sys.stderr)
        return USAGE
    except OSError as exc:
        print(f"durcsp: {exc}", file=sys.stderr)
        return USAGE
    except (opsem.MakespanError, Q.SynchronizationError) as exc:
        print(f"durcsp: {exc}", file=sys.stderr)
        return DIAG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
