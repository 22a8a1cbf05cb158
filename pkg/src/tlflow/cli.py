"""Command-line front door.

Thin over the library: every command parses arguments, delegates to the
core modules or to an in-process project session, and renders the result.
Exit codes: 0 success, 1 query false / plan failure, 2 usage or parse
error, 3 search bounds exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import engine, lifecycle
from .engine import EvalConfig, Outcome
from .lifecycle import LifecycleError
from .service.sessions import ConflictError, ProjectSession, ValidationError
from .state import State, state_from_tlp
from .syntax import (
    MODE_POSSIBLE,
    ParseError,
    Pos,
    check_query_against,
    parse_program,
    parse_query,
)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3


def _add_bounds(parser: argparse.ArgumentParser) -> None:
    def bound(env: str, fallback: int) -> int:
        return int(os.environ.get(env, fallback))

    parser.add_argument(
        "--max-depth",
        type=int,
        default=bound("TLFLOW_MAX_DEPTH", EvalConfig.max_depth),
    )
    parser.add_argument(
        "--max-answers",
        type=int,
        default=bound("TLFLOW_MAX_ANSWERS", EvalConfig.max_answers),
    )
    parser.add_argument(
        "--max-interleavings",
        type=int,
        default=bound("TLFLOW_MAX_INTERLEAVINGS", EvalConfig.max_interleavings),
    )


def _config(args: argparse.Namespace) -> EvalConfig:
    return EvalConfig(
        max_depth=args.max_depth,
        max_answers=args.max_answers,
        max_interleavings=args.max_interleavings,
    )


def _load_program_arg(arg: str) -> tuple[str, str]:
    """Resolve a file path or corpus id to (program text, display name)."""
    path = Path(arg)
    if path.exists():
        return path.read_text("utf-8"), path.name
    try:
        entry = corpus_mod.get_corpus(arg)
        return entry.program, entry.id
    except corpus_mod.UnknownCorpusError:
        raise FileNotFoundError(f"no such file or corpus entry: {arg}")


# ── check ────────────────────────────────────────────────────────────


def cmd_check(args: argparse.Namespace) -> int:
    text, name = _load_program_arg(args.file)
    program = parse_program(text, source=name)
    model = lifecycle.recognize_tasks(program)
    if args.json:
        print(
            json.dumps(
                {
                    "source": name,
                    "tasks": [
                        {
                            "name": t.name,
                            "arity": t.arity,
                            "disjuncts": len(t.requirements),
                        }
                        for t in model.tasks
                    ],
                    "artifacts": list(model.artifacts),
                    "start_tasks": list(model.start_tasks),
                    "facts": [f.text() for f in program.facts],
                }
            )
        )
        return EXIT_OK
    print(f"{name}: ok")
    tasks = ", ".join(f"{t.name}/{t.arity}" for t in model.tasks) or "(none)"
    artifacts = ", ".join(model.artifacts) or "(none)"
    print(f"tasks ({len(model.tasks)}): {tasks}")
    print(f"artifacts ({len(model.artifacts)}): {artifacts}")
    starts = ", ".join(model.start_tasks) or "(none)"
    print(f"start tasks: {starts}")
    if program.facts:
        print(f"facts ({len(program.facts)}): "
              + ", ".join(f.text() for f in program.facts))
    return EXIT_OK


# ── query ────────────────────────────────────────────────────────────


def cmd_query(args: argparse.Namespace) -> int:
    text, name = _load_program_arg(args.file)
    program = parse_program(text, source=name)
    initial = list(program.facts)
    if args.facts:
        extra = state_from_tlp(Path(args.facts).read_text("utf-8"), args.facts)
        defined = program.defined_predicates()
        for atom in extra.facts():
            if atom.pred in defined:
                raise ParseError(
                    f"fact {atom.text()} uses the rule-defined predicate "
                    f"{atom.pred}",
                    Pos(1, 1),
                )
            initial.append(atom)
    state = State(tuple(initial))
    query = parse_query(args.query)
    check_query_against(program, query)
    config = _config(args)

    if query.mode == MODE_POSSIBLE:
        result = engine.possible(program, state, query.goal, config)
        outcome, witness = result.outcome, result.witness
    else:
        exec_result = engine.execute(program, state, query.goal, config)
        outcome = exec_result.outcome
        witness = exec_result.answer.trace if exec_result.answer else None

    if args.json:
        payload = {"result": outcome.value}
        if outcome is Outcome.TRUE and witness is not None:
            payload["witness"] = witness.texts()
        print(json.dumps(payload))
    else:
        print(outcome.value)
        if outcome is Outcome.TRUE and witness is not None:
            for step in witness.texts():
                print(f"  {step}")
    if outcome is Outcome.TRUE:
        return EXIT_OK
    if outcome is Outcome.UNKNOWN:
        return EXIT_UNKNOWN
    return EXIT_FALSE


# ── graph ────────────────────────────────────────────────────────────


def cmd_graph(args: argparse.Namespace) -> int:
    text, name = _load_program_arg(args.file)
    program = parse_program(text, source=name)
    model = lifecycle.recognize_tasks(program)
    graph = lifecycle.dependency_graph(model)
    if args.format == "dot":
        sys.stdout.write(lifecycle.graph_to_dot(graph))
    else:
        print(
            json.dumps(
                {
                    "tasks": list(graph.tasks),
                    "artifacts": list(graph.artifacts),
                    "requires": [
                        {"artifact": e.artifact, "task": e.task, "disjunct": e.disjunct}
                        for e in graph.requires
                    ],
                    "produces": [
                        {"task": e.task, "artifact": e.artifact, "action": e.polarity}
                        for e in graph.produces
                    ],
                }
            )
        )
    return EXIT_OK


# ── corpus ───────────────────────────────────────────────────────────


def cmd_corpus(args: argparse.Namespace) -> int:
    if args.action == "list":
        for entry in corpus_mod.list_corpus():
            print(f"{entry.id}  -  {entry.title}")
        return EXIT_OK
    entry = corpus_mod.get_corpus(args.id)
    sys.stdout.write(entry.program)
    return EXIT_OK


# ── repl ─────────────────────────────────────────────────────────────

_REPL_HELP = """\
commands:
  state                   show the current facts
  enabled                 list tasks executable right now
  run <task(args)>        execute a task and commit its effects
  assert <atom>           record an artifact as produced
  retract <atom>          remove an artifact
  undo                    revert the latest change
  plan <atom>             shortest task sequence producing an artifact
  ?- possible <goal>.     check whether a goal could execute (no commit)
  history                 show the event log
  help                    this text
  quit                    leave\
"""


def _repl_dispatch(session: ProjectSession, line: str) -> None:
    if line == "state":
        for fact in session.state_facts():
            print(fact)
        return
    if line == "enabled":
        statuses = [s for s in session.task_statuses() if s.enabled]
        if not statuses:
            print("(no tasks enabled)")
        for status in statuses:
            critical = sorted(
                lifecycle.critical_requirements(session.model, status.atom.pred)
            )
            note = f", critical: {', '.join(critical)}" if critical else ""
            print(f"{status.atom.text()}  [disjunct {status.disjunct}{note}]")
        return
    if line == "history":
        for event in session.history():
            print(f"{event.seq} {event.kind} {json.dumps(event.payload)}")
        return
    if line == "undo":
        event = session.undo()
        print(
            f"undid {event.payload['undone_kind']} "
            f"(event {event.payload['undone_seq']})"
        )
        return
    if line.startswith("run "):
        event = session.execute_task(line[4:])
        print(f"executed {event.payload['task']}")
        for step in event.payload["trace"]:
            print(f"  {step}")
        return
    if line.startswith("assert "):
        event = session.assert_fact(line[7:])
        print(f"asserted {event.payload['atom']}")
        return
    if line.startswith("retract "):
        event = session.retract_fact(line[8:])
        print(f"retracted {event.payload['atom']}")
        return
    if line.startswith("plan "):
        result = session.plan_for(line[5:])
        if result.outcome is Outcome.TRUE:
            if result.tasks:
                print("plan: " + ", ".join(a.text() for a in result.tasks))
            else:
                print("plan: (already satisfied)")
        elif result.outcome is Outcome.UNKNOWN:
            print("plan: unknown (length bound reached)")
        else:
            print("plan: impossible")
        return
    if line.startswith("?-"):
        outcome = session.query_possible(line)
        print(outcome.outcome.value)
        if outcome.outcome is Outcome.TRUE and outcome.witness is not None:
            for step in outcome.witness.texts():
                print(f"  {step}")
        return
    if line in ("help", "?"):
        print(_REPL_HELP)
        return
    print(f"unknown command: {line} (type 'help')")


def cmd_repl(args: argparse.Namespace) -> int:
    text, name = _load_program_arg(args.file)
    session = ProjectSession(
        "repl", {"program": text}, args.scope, _config(args)
    )
    tasks = ", ".join(session.model.task_names()) or "(none)"
    scope = ", ".join(session.scope) or "(empty)"
    print(f"loaded {name}  (tasks: {tasks}; scope: {scope})")
    print("type 'help' for commands")
    while True:
        sys.stdout.write("tl> ")
        sys.stdout.flush()
        raw = sys.stdin.readline()
        if not raw:
            print()
            return EXIT_OK
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line in ("quit", "exit"):
            return EXIT_OK
        try:
            _repl_dispatch(session, line)
        except (ValidationError, ConflictError, LifecycleError, ParseError) as exc:
            print(f"error: {exc}")


# ── serve ────────────────────────────────────────────────────────────


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import ServiceSettings, create_app

    data_dir = Path(args.data_dir) if args.data_dir else None
    settings = ServiceSettings(data_dir=data_dir, config=_config(args))
    app = create_app(settings)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# ── entry point ──────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tlflow",
        description="Transaction-logic workflow engine for life-cycle models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a program and summarize its model")
    p.add_argument("file", help="a .tlp file or corpus id")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("query", help="evaluate a query against a program")
    p.add_argument("file", help="a .tlp file or corpus id")
    p.add_argument("query", help="e.g. \"?- possible task4(car).\"")
    p.add_argument("--facts", help="extra initial facts (.tlp fact file)")
    p.add_argument("--json", action="store_true")
    _add_bounds(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("repl", help="interactive project session")
    p.add_argument("file", help="a .tlp file or corpus id")
    p.add_argument("--scope", nargs="*", default=[], help="component constants")
    _add_bounds(p)
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("graph", help="export the dependency graph")
    p.add_argument("file", help="a .tlp file or corpus id")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("corpus", help="list or show built-in example models")
    corpus_sub = p.add_subparsers(dest="action", required=True)
    pl = corpus_sub.add_parser("list")
    pl.set_defaults(func=cmd_corpus)
    ps = corpus_sub.add_parser("show")
    ps.add_argument("id")
    ps.set_defaults(func=cmd_corpus)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default=os.environ.get("TLFLOW_HOST", "127.0.0.1"))
    p.add_argument(
        "--port", type=int, default=int(os.environ.get("TLFLOW_PORT", "8000"))
    )
    p.add_argument(
        "--data-dir",
        default=os.environ.get("TLFLOW_DATA_DIR"),
        help="persist event logs here and reload them on startup",
    )
    _add_bounds(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LifecycleError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except corpus_mod.UnknownCorpusError as exc:
        print(f"error: unknown corpus entry {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConflictError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FALSE


if __name__ == "__main__":
    sys.exit(main())
