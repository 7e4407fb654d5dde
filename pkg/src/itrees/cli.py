"""The ``itree`` command line: animate, execute, check, fd, serve."""

from __future__ import annotations

import argparse
import json
import sys

from .animator import (DeadlockPrompt, MenuPrompt, RejectedEvent, SessionError,
                       TauLimitPrompt, TerminatedPrompt, builtin_models,
                       model_text, resolve_model, session_start)
from .core import ExplorationBudget, render_value
from .dsl import (ElabError, ModelRuntimeError, ParseError, eval_literal,
                  node_to_json, parse_model)
from .protocol import run_stdio
from .semantics import TICK, fd_semantics
from .verify import Counterexample, Holds, Inconclusive
from .zmachine import check_pos

__all__ = ["main"]


def _parse_consts(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise SystemExit(f"--const expects NAME=VALUE, got {pair!r}")
        name, text = pair.split("=", 1)
        out[name.strip()] = eval_literal(text)
    return out


def _maybe_emit_ast(args) -> bool:
    if getattr(args, "emit_ast", False):
        ast = parse_model(model_text(args.file))
        json.dump(node_to_json(ast), sys.stdout, indent=2)
        print()
        return True
    return False


def _load(args):
    return resolve_model(args.file, _parse_consts(args.const))


# ---------------------------------------------------------------------------
# animate
# ---------------------------------------------------------------------------

def _print_prompt(session) -> None:
    prompt = session.prompt
    state = session.state_view()
    if state is not None:
        print(f"state: {json.dumps(state)}")
    if isinstance(prompt, MenuPrompt):
        print("events:")
        for i, label in prompt.entries:
            print(f"  [{i}] {label}")
        print("choose an event number (or label), c to continue, q to quit")
    elif isinstance(prompt, TerminatedPrompt):
        print(f"terminated with {render_value(prompt.value)}")
    elif isinstance(prompt, DeadlockPrompt):
        print("deadlock: no events are possible")
    elif isinstance(prompt, TauLimitPrompt):
        print(f"{prompt.taus} internal steps without stabilising; "
              "c to continue, q to quit")


def cmd_animate(args) -> int:
    if _maybe_emit_ast(args):
        return 0
    if args.json:
        run_stdio(default_model=args.file, default_target=args.target,
                  consts=_parse_consts(args.const), tau_budget=args.tau_budget)
        return 0
    if not args.target:
        raise SystemExit("animate needs --target NAME")
    session = session_start(args.file, args.target,
                            consts=_parse_consts(args.const),
                            tau_budget=args.tau_budget)
    print(f"animating {args.target} from {args.file}")
    _print_prompt(session)
    while True:
        if isinstance(session.prompt, (TerminatedPrompt, DeadlockPrompt)):
            return 0
        try:
            line = input("> ").strip()
        except EOFError:
            return 0
        if line in ("q", "quit"):
            return 0
        try:
            if line in ("c", "continue"):
                session.continue_taus()
            elif line.isdigit():
                session.choose(int(line))
            elif line:
                session.choose(line)
            else:
                continue
        except RejectedEvent as e:
            print(f"rejected: {e}")
            continue
        except SessionError as e:
            print(f"error: {e}")
            continue
        print(f"trace: {session.trace_labels()}")
        _print_prompt(session)


# ---------------------------------------------------------------------------
# execute
# ---------------------------------------------------------------------------

def cmd_execute(args) -> int:
    if _maybe_emit_ast(args):
        return 0
    model = _load(args)
    values = tuple(eval_literal(a) for a in args.args or ())
    tree = model.itree(args.target, values)
    from .combinators import Deadlock, Menu, Terminated, execute
    result = execute(tree, ExplorationBudget(tau_fuel=args.tau_fuel))
    if isinstance(result, Terminated):
        print(f"terminated: {render_value(result.value)}")
        return 0
    if isinstance(result, Deadlock):
        print("deadlock")
        return 1
    if isinstance(result, Menu):
        print("stopped at a menu (use `itree animate` to drive it interactively):")
        for e in result.events:
            print(f"  {e.label}")
        return 1
    print(f"timeout after {result.taus_consumed} internal steps")
    return 1


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def _verdict_json(verdict) -> dict:
    if isinstance(verdict, Holds):
        return {"result": "holds", "states_checked": verdict.states_checked,
                "exhaustive": True}
    if isinstance(verdict, Counterexample):
        cex = {
            "initial": repr(verdict.initial),
            "final": repr(verdict.final) if verdict.final is not None else None,
            "trace": [e.label for e in verdict.trace],
            "message": verdict.message,
        }
        if verdict.chain is not None:
            cex["chain"] = [{"trace": [e.label for e in tr], "state": repr(s)}
                            for tr, s in verdict.chain.steps]
        return {"result": "counterexample", "counterexample": cex,
                "states_checked": None, "exhaustive": True}
    assert isinstance(verdict, Inconclusive)
    return {"result": "inconclusive", "reason": verdict.reason,
            "states_checked": None, "exhaustive": False}


def cmd_check(args) -> int:
    if _maybe_emit_ast(args):
        return 0
    model = _load(args)
    machines = list(model.machines.values())
    if args.target:
        if args.target not in model.machines:
            raise SystemExit(f"no machine named {args.target!r} in {args.file}")
        machines = [model.machines[args.target]]
    if not machines:
        raise SystemExit(f"{args.file} declares no machines to check")
    report = []
    failed = False
    for machine in machines:
        for ob, verdict in check_pos(machine, mode=args.mode):
            report.append({"obligation": ob.name, **_verdict_json(verdict)})
            failed = failed or not isinstance(verdict, Holds)
    json.dump(report, sys.stdout, indent=2)
    print()
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# fd
# ---------------------------------------------------------------------------

def _ticked_label(e) -> str:
    return e.label


def cmd_fd(args) -> int:
    if _maybe_emit_ast(args):
        return 0
    model = _load(args)
    tree = model.itree(args.target)
    budget = ExplorationBudget(tau_fuel=args.tau_fuel, max_trace_len=args.depth)
    report = fd_semantics(tree, None, budget)
    payload = {
        "traces": [[_ticked_label(e) for e in tr] for tr in report.traces],
        "failures": [{"trace": [_ticked_label(e) for e in f.trace],
                      "refusal": sorted(("tick" if x == TICK else x.label)
                                        for x in f.refusal)}
                     for f in report.failures],
        "divergences": [[_ticked_label(e) for e in tr] for tr in report.divergences],
        "exhaustive": report.exhaustive,
    }
    json.dump(payload, sys.stdout, indent=2)
    print()
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    from .server import serve_forever
    serve_forever(args.port, static_dir=args.static, model_root=args.model_root)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itree",
        description="Animate and verify interaction-tree models "
                    f"(built-in models: {', '.join(builtin_models())})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_file_opts(p, needs_target=True):
        p.add_argument("file", help="model file (.itm) or built-in model name")
        p.add_argument("--target", required=False,
                       help="process or machine to run")
        p.add_argument("--const", action="append", metavar="NAME=VALUE",
                       help="bind an abstract constant")
        p.add_argument("--emit-ast", action="store_true",
                       help="dump the parsed model as JSON and exit")

    p = sub.add_parser("animate", help="drive a model interactively")
    add_file_opts(p)
    p.add_argument("--tau-budget", type=int, default=20,
                   help="internal steps allowed between prompts (default 20)")
    p.add_argument("--json", action="store_true",
                   help="speak the line-oriented JSON protocol on stdio")
    p.set_defaults(fn=cmd_animate)

    p = sub.add_parser("execute", help="run a model without interaction")
    add_file_opts(p)
    p.add_argument("--args", nargs="*", metavar="EXPR",
                   help="arguments for the target, as literal expressions")
    p.add_argument("--tau-fuel", type=int, default=10_000)
    p.set_defaults(fn=cmd_execute)

    p = sub.add_parser("check", help="check machine proof obligations")
    add_file_opts(p)
    p.add_argument("--mode", choices=("exhaustive", "reachable"),
                   default="exhaustive")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("fd", help="bounded traces/failures/divergences as JSON")
    add_file_opts(p)
    p.add_argument("--depth", type=int, default=5, help="maximum trace length")
    p.add_argument("--tau-fuel", type=int, default=20)
    p.set_defaults(fn=cmd_fd)

    p = sub.add_parser("serve", help="HTTP API plus the web client")
    p.add_argument("--port", type=int, default=8023)
    p.add_argument("--static", help="directory with the web client bundle")
    p.add_argument("--model-root", help="base directory for relative model paths")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) in ("execute", "fd") and not getattr(args, "emit_ast", False):
        if not args.target:
            raise SystemExit(f"{args.command} needs --target NAME")
    try:
        return args.fn(args)
    except (ParseError, ElabError, ModelRuntimeError, SessionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
