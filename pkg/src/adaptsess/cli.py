"""Command-line front end.

Exit codes: 0 success; 1 validation failure (or a negative answer from
`complete`/`adequate`); 2 unreadable or unparsable input.  `simulate`
additionally uses 3 when the system is stuck or a session cannot start,
4 when the step budget runs out, 5 when an adaptation fails and 6 when a
monitored process stops being adequate for its monitor.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from random import Random
from typing import Sequence, TextIO

from .adaptation import AdaptationError, Decision, adapt, complete, target_session
from .projection import ProjectionUndefined, project_par
from .runtime import (
    BUDGET, DONE, STUCK, AdequacyViolation, Init, InitError, RunResult, find_process,
    initial_system, monprocs, run, step, step_init,
)
from .surface import (
    ParseError, Scenario, ScenarioError, load_scenario, parse_monitor, parse_process_par, pretty,
)
from .syntax import canonicalize, evaluate, pa, threads_of
from .typecheck import Inadequate, TypingError, match_threads, type_process

EXIT_OK, EXIT_INVALID, EXIT_INPUT = 0, 1, 2
EXIT_STUCK, EXIT_BUDGET, EXIT_ADAPT, EXIT_ADEQUACY = 3, 4, 5, 6

_VERDICT_EXIT = {DONE: EXIT_OK, STUCK: EXIT_STUCK, BUDGET: EXIT_BUDGET}


class _InputError(Exception):
    def __init__(self, message: str, code: int):
        self.code = code
        super().__init__(message)


def _load(path: str) -> Scenario:
    try:
        return load_scenario(path)
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}", EXIT_INPUT) from exc
    except ScenarioError as exc:
        raise _InputError(str(exc), EXIT_INVALID) from exc
    except ParseError as exc:
        raise _InputError(str(exc), EXIT_INPUT) from exc


def _globals(sc: Scenario, name: str | None) -> dict:
    if name is None:
        return sc.globals
    if name not in sc.globals:
        raise _InputError(f"no global named {name}", EXIT_INVALID)
    return {name: sc.globals[name]}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    sc = _load(args.file)
    problems = []
    for name, g in list(sc.globals.items()) + [(f"rule {r.name}", r.new_global) for r in sc.rules]:
        for p in sorted(pa(g)):
            try:
                project_par(g, p)
            except ProjectionUndefined as exc:
                problems.append(f"{name}: {exc}")
    for name, q in sc.collection.items():
        try:
            type_process(q)
        except TypingError as exc:
            problems.append(f"collection {name}: {exc}")
    for msg in problems:
        print(f"{sc.file}: {msg}", file=err)
    if problems:
        return EXIT_INVALID
    print(f"{sc.file}: ok ({len(sc.globals)} global(s), {len(sc.collection)} process(es), "
          f"{len(sc.rules)} rule(s))", file=out)
    return EXIT_OK


def cmd_project(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    sc = _load(args.file)
    code = EXIT_OK
    for name, g in _globals(sc, args.global_name).items():
        try:
            m = project_par(g, args.participant)
        except ProjectionUndefined as exc:
            print(f"{name}: {exc}", file=err)
            code = EXIT_INVALID
            continue
        prefix = f"{name}: " if len(sc.globals) > 1 and args.global_name is None else ""
        print(prefix + pretty(canonicalize(m)), file=out)
    return code


def cmd_typecheck(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    sc = _load(args.file)
    code = EXIT_OK
    names = [args.process] if args.process else list(sc.collection)
    for name in names:
        if name not in sc.collection:
            print(f"no process named {name}", file=err)
            return EXIT_INVALID
        try:
            print(f"{name} : {pretty(canonicalize(type_process(sc.collection[name])))}", file=out)
        except TypingError as exc:
            print(f"{name}: {exc}", file=err)
            code = EXIT_INVALID
    return code


def cmd_adequate(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    if args.process_text is not None or args.monitor_text is not None:
        if args.process_text is None or args.monitor_text is None:
            raise _InputError("--process and --monitor go together", EXIT_INPUT)
        try:
            pp = parse_process_par(args.process_text, "<process>")
            mm = parse_monitor(args.monitor_text, "<monitor>")
        except ParseError as exc:
            raise _InputError(str(exc), EXIT_INPUT) from exc
        try:
            matching = match_threads(pp, mm)
        except Inadequate as exc:
            print(f"not adequate: {exc}", file=out)
            return EXIT_INVALID
        pairs = ", ".join(f"{i}->{j}" for i, j in matching.pairs)
        print(f"adequate (process thread -> monitor thread: {pairs or 'none'})", file=out)
        return EXIT_OK
    if args.file is None or args.participant is None:
        raise _InputError("give a scenario and --participant, or --process and --monitor",
                          EXIT_INPUT)
    sc = _load(args.file)
    code = EXIT_OK
    for name, g in _globals(sc, args.global_name).items():
        try:
            mm = project_par(g, args.participant)
        except ProjectionUndefined as exc:
            print(f"{name}: {exc}", file=err)
            code = EXIT_INVALID
            continue
        for m in threads_of(mm):
            found = find_process(sc.collection, m)
            print(f"{pretty(canonicalize(m))}  <=  {found[0] if found else 'none'}", file=out)
            if found is None:
                code = EXIT_INVALID
    return code


def cmd_complete(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    sc = _load(args.file)
    report = complete(sc.collection, sc.all_globals())
    if report.complete:
        print("complete", file=out)
        return EXIT_OK
    for p, m in report.missing:
        print(f"missing process for {p}: {pretty(canonicalize(m))}", file=out)
    return EXIT_INVALID


def _simulate_one(sc: Scenario, seed: int, args: argparse.Namespace,
                  sink: TextIO, err: TextIO) -> tuple[int, str]:
    def emit(ev) -> None:
        line = ev.to_json() if args.trace_format == "json" else ev.to_human()
        print(line, file=sink)

    try:
        res: RunResult = run(initial_system(sc), seed, args.max_steps, args.op_precedence,
                             on_event=emit)
    except InitError as exc:
        return EXIT_STUCK, f"stuck: session cannot start: {exc}"
    except AdaptationError as exc:
        return EXIT_ADAPT, f"adaptation failed: {exc}"
    except AdequacyViolation as exc:
        return EXIT_ADEQUACY, f"adequacy violated {exc}"
    code = _VERDICT_EXIT[res.verdict]
    msg = {DONE: "done", STUCK: "stuck: no reduction applies (progress fails)",
           BUDGET: f"step budget of {args.max_steps} exhausted"}[res.verdict]
    return code, msg


def _seed_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError("expected a range like 1..20")
    return range(int(lo), int(hi) + 1)


def cmd_simulate(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    sc = _load(args.file)
    if args.seeds is None:
        seed = args.seed if args.seed is not None else (sc.seed or 0)
        code, msg = _simulate_one(sc, seed, args, out, err)
        print(f"seed {seed}: {msg}", file=err)
        return code
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = "jsonl" if args.trace_format == "json" else "txt"

    def job(seed: int) -> tuple[int, int, str]:
        with open(out_dir / f"seed-{seed}.{ext}", "w", encoding="utf-8") as fh:
            code, msg = _simulate_one(sc, seed, args, fh, err)
        return seed, code, msg

    with ThreadPoolExecutor() as pool:
        results = list(pool.map(job, args.seeds))
    for seed, code, msg in results:
        print(f"seed {seed}: exit {code}: {msg}", file=out)
    return max(code for _, code, _ in results)


def cmd_adapt_dry_run(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    sc = _load(args.file)
    try:
        rule = sc.rule(args.rule)
    except KeyError:
        print(f"no rule named {args.rule}", file=err)
        return EXIT_INVALID
    system = initial_system(sc)
    rng = Random(args.seed)
    try:
        while any(isinstance(x, Init) for x in system.network.items):
            system, _ = step_init(system, next(x for x in system.network.items
                                               if isinstance(x, Init)))
        for _ in range(args.steps):
            res = step(system, rng)
            if isinstance(res, str):
                break
            system = res[0]
        env = system.env
        updates = {k: evaluate(e, env) for k, e in rule.set}
        decision = Decision(rule, target_session(system, rule), {**env, **updates}, updates)
        after, event = adapt(system, decision)
    except InitError as exc:
        print(f"session cannot start: {exc}", file=err)
        return EXIT_STUCK
    except AdaptationError as exc:
        print(f"adaptation failed: {exc}", file=err)
        return EXIT_ADAPT
    before = {(m.session, m.participant): m for m in monprocs(system.network)}
    now = {(m.session, m.participant): m for m in monprocs(after.network)}
    print(f"rule {rule.name} on {decision.session}: killed {event.payload['killed']}, "
          f"added {event.payload['added']}, relabelled={event.payload['relabelled']}", file=out)
    for key in sorted(set(before) | set(now)):
        old, new = before.get(key), now.get(key)
        status = "killed" if new is None else "new" if old is None else (
            "unchanged" if old == new else "adapted")
        print(f"{key[1]} ({status})", file=out)
        if new is not None:
            print(f"  monitor: {pretty(canonicalize(new.monitor))}", file=out)
            print(f"  process: {pretty(canonicalize(new.process))}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adaptsess", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a scenario")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("project", help="print the monitor of a participant")
    p.add_argument("file")
    p.add_argument("--participant", "-p", required=True)
    p.add_argument("--global", dest="global_name")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("typecheck", help="print the types of collection processes")
    p.add_argument("file")
    p.add_argument("--process")
    p.set_defaults(func=cmd_typecheck)

    p = sub.add_parser("adequate", help="check processes against monitors")
    p.add_argument("file", nargs="?")
    p.add_argument("--participant", "-p")
    p.add_argument("--global", dest="global_name")
    p.add_argument("--process", dest="process_text", help="process text (with --monitor)")
    p.add_argument("--monitor", dest="monitor_text", help="monitor text (with --process)")
    p.set_defaults(func=cmd_adequate)

    p = sub.add_parser("complete", help="check the collection covers every reachable monitor")
    p.add_argument("file")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("simulate", help="run the scenario")
    p.add_argument("file")
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", type=_seed_range, help="seed sweep, e.g. 1..20")
    p.add_argument("--out-dir", help="directory for per-seed traces of a sweep")
    p.add_argument("--max-steps", type=int, default=200)
    p.add_argument("--trace-format", choices=("human", "json"), default="human")
    p.add_argument("--op-precedence", choices=("per-process", "global"), default="per-process")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("adapt-dry-run", help="show the effect of a rule without running it")
    p.add_argument("file")
    p.add_argument("--rule", required=True)
    p.add_argument("--steps", type=int, default=0, help="reduction steps to run first")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_adapt_dry_run)
    return ap


def main(argv: Sequence[str] | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out, err)
    except _InputError as exc:
        print(str(exc), file=err)
        return exc.code


if __name__ == "__main__":
    raise SystemExit(main())
