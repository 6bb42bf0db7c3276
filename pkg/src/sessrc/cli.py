"""``sessrc`` command-line front end."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional

from sessrc import locks as L
from sessrc import session_types as ST
from sessrc.compiler import CompileError, compile_expr, resolve_primitives
from sessrc.explorer import (
    LANGUAGES, TARGET, ExploreLimits, canonicalize, default_limits, explore, fingerprint,
)
from sessrc.refinement import Verdict, check_refinement, obs_equiv_tgt
from sessrc.syntax import ParseError, parse_src, parse_tgt, show_tgt, show_type

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

_EXIT_OF = {Verdict.PASS: EXIT_OK, Verdict.FAIL: EXIT_FAIL, Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}
_STATUS_OF = {EXIT_OK: "ok", EXIT_FAIL: "fail", EXIT_USAGE: "error", EXIT_INCONCLUSIVE: "inconclusive"}


class UsageError(Exception):
    pass


def _lang_for(path: str, override: Optional[str]) -> str:
    if override:
        return override
    suffix = Path(path).suffix
    if suffix in (".src", ".tgt"):
        return suffix[1:]
    raise UsageError(f"cannot tell the language of {path}; pass --lang")


def load_program(path: str, lang: str):
    text = Path(path).read_text(encoding="utf-8")
    if lang == "src":
        return parse_src(text)
    return resolve_primitives(parse_tgt(text))


def _limits(args) -> ExploreLimits:
    base = default_limits()
    return ExploreLimits(
        max_states=args.max_states or base.max_states,
        max_depth=args.max_depth or base.max_depth,
    )


class _Out:
    def __init__(self, args):
        self.json = args.json
        self.payload = {"command": args.command}

    def line(self, s: str = "") -> None:
        if not self.json:
            print(s)

    def finish(self, code: int) -> int:
        if self.json:
            self.payload["status"] = _STATUS_OF[code]
            print(json.dumps(self.payload, indent=2))
        return code


# ---------------------------------------------------------------------------
# commands


def cmd_typecheck(args, out: _Out) -> int:
    e = load_program(args.file, "src")
    try:
        ty, _ = ST.typecheck(None, e)
    except ST.SessionTypeError as err:
        out.payload["error"] = str(err)
        out.line(str(err))
        return EXIT_FAIL
    out.payload["type"] = show_type(ty)
    out.line(show_type(ty))
    return EXIT_OK


def cmd_compile(args, out: _Out) -> int:
    e = load_program(args.file, "src")
    try:
        text = show_tgt(compile_expr(e))
    except CompileError as err:
        out.payload["error"] = str(err)
        out.line(str(err))
        return EXIT_FAIL
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
        out.payload["output"] = args.output
    else:
        out.payload["target"] = text
        out.line(text)
    return EXIT_OK


def _parse_schedule(s: str):
    if s == "bfs-all":
        return s
    try:
        return [int(x) for x in s.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad schedule {s!r}: expected thread indices or 'bfs-all'") from None


def cmd_run(args, out: _Out) -> int:
    name = _lang_for(args.file, args.lang)
    lang = LANGUAGES[name]
    e = load_program(args.file, name)
    schedule = _parse_schedule(args.schedule)
    cfg = lang.initial(e)
    if schedule == "bfs-all":
        g = explore(cfg, _limits(args), lang, jobs=args.jobs)
        finals = [n for n in range(len(g)) if g.is_terminal(n)]
        stuck = [n for n in range(len(g)) if g.has_stuck_thread(n)]
        outcomes = sorted({lang.show(g.configs[n].threads[0]) for n in finals})
        out.payload.update(nodes=len(g), truncated=g.truncated, outcomes=outcomes,
                           stuck=len(stuck), terminal=len(finals))
        out.line(f"{len(g)} states, {len(finals)} terminal, {len(stuck)} with a stuck thread"
                 + (" (truncated)" if g.truncated else ""))
        for v in outcomes:
            out.line(f"  main value: {v}")
        return EXIT_INCONCLUSIVE if g.truncated else EXIT_OK
    trace = []
    for k, i in enumerate(schedule):
        if not 0 <= i < len(cfg.threads):
            raise UsageError(f"step {k}: no thread {i}")
        d = lang.decompose(cfg.threads[i])
        redex = lang.show(d[1]) if d else "<value>"
        nxt = lang.step_pool(cfg, i)
        if nxt is None:
            out.payload.update(trace=trace, error=f"thread {i} cannot step", final=lang.show_config(cfg))
            out.line(f"step {k}: thread {i} cannot step ({redex})")
            return EXIT_FAIL
        trace.append({"step": k, "thread": i, "redex": redex})
        out.line(f"{k:4d}  t{i}  {redex}")
        cfg = nxt
    fp = fingerprint(canonicalize(cfg, lang))
    out.payload.update(trace=trace, final=lang.show_config(cfg), fingerprint=fp)
    out.line(f"final: {lang.show_config(cfg)}")
    out.line(f"fingerprint: {fp}")
    return EXIT_OK


def _report(out: _Out, report) -> int:
    out.payload.update(report.to_json())
    out.payload["overall"] = report.overall.value
    for k, c in zip(("cond1", "cond2", "cond3"), report.conditions):
        out.line(f"{k}: {c.verdict.value}" + (f"  ({c.note})" if c.note else ""))
        if c.verdict is Verdict.FAIL and c.witness:
            out.line("  witness: " + json.dumps(c.witness, indent=2).replace("\n", "\n  "))
    st = report.stats
    out.line(f"target {st['target']['nodes']} states, source {st['source']['nodes']} states")
    out.line(f"overall: {report.overall.value}")
    return _EXIT_OF[report.overall]


def cmd_check_refinement(args, out: _Out) -> int:
    src = load_program(args.file, "src")
    if args.target:
        tgt = load_program(args.target, _lang_for(args.target, "tgt"))
    else:
        tgt = compile_expr(src)
    t0 = time.perf_counter()
    report = check_refinement(tgt, src, _limits(args), jobs=args.jobs)
    out.payload["seconds"] = round(time.perf_counter() - t0, 4)
    return _report(out, report)


def cmd_check_locks(args, out: _Out) -> int:
    e = parse_tgt(Path(args.file).read_text(encoding="utf-8"))
    if args.naive:
        translated = L.naive_clh(e)
    else:
        try:
            translated, ty = L.translate_locks({}, e)
        except L.LockTypeError as err:
            out.payload["error"] = str(err)
            out.line(f"translation rejected: {err}")
            return EXIT_FAIL
        out.payload["type"] = L.show_lock_ty(ty)
        out.line(f"type: {L.show_lock_ty(ty)}")
    report = check_refinement(translated, L.resolve_ticket(e), _limits(args), tgt_lang=TARGET,
                              src_lang=TARGET, obs=obs_equiv_tgt, jobs=args.jobs)
    return _report(out, report)


def cmd_graph(args, out: _Out) -> int:
    name = _lang_for(args.file, args.lang)
    lang = LANGUAGES[name]
    e = load_program(args.file, name)
    if name == "src" and args.compiled:
        e, lang = compile_expr(e), TARGET
    g = explore(lang.initial(e), _limits(args), lang, jobs=args.jobs)
    dot = g.to_dot()
    if args.emit_dot:
        Path(args.emit_dot).write_text(dot, encoding="utf-8")
        out.payload["dot"] = args.emit_dot
    elif not args.json:
        print(dot, end="")
    out.payload.update(nodes=len(g), edges=g.num_edges, truncated=g.truncated)
    if args.emit_dot:
        out.line(f"{len(g)} nodes, {g.num_edges} edges" + (" (truncated)" if g.truncated else ""))
    return EXIT_INCONCLUSIVE if g.truncated else EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--max-states", type=int, default=None)
    common.add_argument("--max-depth", type=int, default=None)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for exploration")

    p = _Parser(prog="sessrc", description="Session-typed channels compiled to a shared heap.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("typecheck", parents=[common], help="affine session typecheck a .src file")
    s.add_argument("file")
    s.set_defaults(func=cmd_typecheck)

    s = sub.add_parser("compile", parents=[common], help="compile a .src file to MiniML")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("run", parents=[common], help="run under a schedule or explore all")
    s.add_argument("file")
    s.add_argument("--lang", choices=("src", "tgt"))
    s.add_argument("--schedule", default="bfs-all",
                   help="comma separated thread indices, or bfs-all (default)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("check-refinement", parents=[common],
                       help="check a target refines a source (compiled if --target is absent)")
    s.add_argument("file")
    s.add_argument("--target")
    s.set_defaults(func=cmd_check_refinement)

    s = sub.add_parser("check-locks", parents=[common],
                       help="translate ticket locks to CLH and check refinement")
    s.add_argument("file")
    s.add_argument("--naive", action="store_true",
                   help="substitute CLH code name-for-name instead of type-directed translation")
    s.set_defaults(func=cmd_check_locks)

    s = sub.add_parser("graph", parents=[common], help="dump the reachable-state graph as DOT")
    s.add_argument("file")
    s.add_argument("--lang", choices=("src", "tgt"))
    s.add_argument("--compiled", action="store_true", help="graph the compiled form of a .src file")
    s.add_argument("--emit-dot", metavar="PATH")
    s.set_defaults(func=cmd_graph)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Out(args)
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        code = args.func(args, out)
    except (UsageError, ParseError, OSError, ValueError) as err:
        out.payload["error"] = str(err)
        if not args.json:
            print(f"sessrc: error: {err}", file=sys.stderr)
        code = EXIT_USAGE
    return out.finish(code)


if __name__ == "__main__":
    sys.exit(main())
