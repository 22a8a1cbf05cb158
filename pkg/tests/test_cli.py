"""Command-line behavior: exit codes, outputs, REPL transcript, serve."""

import io
import json
import threading
import time

import httpx
import pytest
import uvicorn

from tlflow.cli import build_parser, main
from tlflow.corpus import list_corpus
from tlflow.service.app import create_app


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ── check ────────────────────────────────────────────────────────────

def test_check_corpus_entries_pass(capsys):
    for entry in list_corpus():
        code, out, _ = run_cli(capsys, "check", entry.id)
        assert code == 0
        assert f"{entry.id}: ok" in out


def test_check_empty_file_passes(tmp_path, capsys):
    empty = tmp_path / "empty.tlp"
    empty.write_text("")
    code, out, _ = run_cli(capsys, "check", str(empty))
    assert code == 0
    assert "tasks (0)" in out


def test_check_malformed_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.tlp"
    bad.write_text("task2(C :- artifact1.")
    code, _, err = run_cli(capsys, "check", str(bad))
    assert code == 2
    assert "error" in err and ":" in err


def test_check_json_summary(capsys):
    code, out, _ = run_cli(capsys, "check", "sample_network", "--json")
    assert code == 0
    summary = json.loads(out)
    assert [t["name"] for t in summary["tasks"]] == [
        "task1",
        "task2",
        "task3",
        "task4",
    ]


# ── query ────────────────────────────────────────────────────────────

def test_query_false_exits_1(capsys):
    code, out, _ = run_cli(
        capsys, "query", "sample_network", "?- possible task4(car)."
    )
    assert code == 1
    assert out.strip() == "false"


def test_query_true_with_facts_exits_0(tmp_path, capsys):
    facts = tmp_path / "facts.tlp"
    facts.write_text("artifact1(car).\n")
    code, out, _ = run_cli(
        capsys,
        "query",
        "sample_network",
        "?- possible task4(car).",
        "--facts",
        str(facts),
    )
    assert code == 0
    assert out.splitlines() == ["true", "  +artifact5(car)"]


def test_query_malformed_exits_2(capsys):
    code, _, err = run_cli(
        capsys, "query", "sample_network", "?- +artifact1(car) * possible..."
    )
    assert code == 2
    assert "error" in err


def test_query_unknown_exits_3(tmp_path, capsys):
    looping = tmp_path / "loop.tlp"
    looping.write_text("p :- p.\n")
    code, out, _ = run_cli(
        capsys, "query", str(looping), "?- possible p.", "--max-depth", "4"
    )
    assert code == 3
    assert out.strip() == "unknown"


def test_query_json_mirrors_service_payload(tmp_path, capsys):
    facts = tmp_path / "facts.tlp"
    facts.write_text("artifact1(car).\n")
    code, out, _ = run_cli(
        capsys,
        "query",
        "sample_network",
        "?- possible task4(car).",
        "--facts",
        str(facts),
        "--json",
    )
    assert code == 0
    assert json.loads(out) == {"result": "true", "witness": ["+artifact5(car)"]}


def test_query_execute_mode_commits_trace(capsys, tmp_path):
    facts = tmp_path / "facts.tlp"
    facts.write_text("artifact1(car).\n")
    code, out, _ = run_cli(
        capsys, "query", "sample_network", "?- task2(car).", "--facts", str(facts)
    )
    assert code == 0
    assert "+artifact3(car)" in out


# ── graph ────────────────────────────────────────────────────────────

def test_graph_dot_has_nine_nodes(capsys):
    code, out, _ = run_cli(capsys, "graph", "sample_network")
    assert code == 0
    assert out.count("shape=") == 9


def test_graph_empty_model(tmp_path, capsys):
    empty = tmp_path / "empty.tlp"
    empty.write_text("")
    code, out, _ = run_cli(capsys, "graph", str(empty))
    assert code == 0
    assert out.startswith("digraph")
    assert "shape=" not in out


def test_graph_json(capsys):
    code, out, _ = run_cli(capsys, "graph", "sample_network", "--format", "json")
    assert code == 0
    body = json.loads(out)
    assert len(body["tasks"]) == 4 and len(body["artifacts"]) == 5


# ── corpus ───────────────────────────────────────────────────────────

def test_corpus_list_and_show(capsys):
    code, out, _ = run_cli(capsys, "corpus", "list")
    assert code == 0
    assert "sample_network" in out
    code, out, _ = run_cli(capsys, "corpus", "show", "sample_network")
    assert code == 0
    assert "task4(C) :- artifact4(C) * +artifact5(C)." in out


def test_corpus_show_unknown_exits_2(capsys):
    code, _, err = run_cli(capsys, "corpus", "show", "nope")
    assert code == 2


# ── repl ─────────────────────────────────────────────────────────────

SCENARIO_INPUT = """\
enabled
?- possible task4(car).
assert artifact1(car)
enabled
?- possible task4(car).
run task4(car)
state
undo
state
plan artifact4(car)
quit
"""

SCENARIO_TRANSCRIPT = """\
loaded sample_network  (tasks: task1, task2, task3, task4; scope: car)
type 'help' for commands
tl> (no tasks enabled)
tl> false
tl> asserted artifact1(car)
tl> task2(car)  [disjunct 0, critical: artifact1]
task4(car)  [disjunct 0]
tl> true
  +artifact5(car)
tl> executed task4(car)
  +artifact5(car)
tl> artifact1(car)
artifact5(car)
start
tl> undid execute (event 3)
tl> artifact1(car)
start
tl> plan: task2(car), task1(car), task3(car)
tl> """


def repl_run(monkeypatch, capsys, text):
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    code = main(["repl", "sample_network", "--scope", "car"])
    out = capsys.readouterr().out
    return code, out


def test_repl_scenario_transcript(monkeypatch, capsys):
    code, out = repl_run(monkeypatch, capsys, SCENARIO_INPUT)
    assert code == 0
    assert out == SCENARIO_TRANSCRIPT


def test_repl_transcript_byte_stable(monkeypatch, capsys):
    _, first = repl_run(monkeypatch, capsys, SCENARIO_INPUT)
    _, second = repl_run(monkeypatch, capsys, SCENARIO_INPUT)
    assert first == second


def test_repl_undo_after_run_restores_state(monkeypatch, capsys):
    text = "assert artifact1(car)\nrun task2(car)\nundo\nstate\nquit\n"
    _, out = repl_run(monkeypatch, capsys, text)
    tail = out.split("undid execute (event 3)\ntl> ", 1)[1]
    assert tail.startswith("artifact1(car)\nstart\n")


def test_repl_error_keeps_session_alive(monkeypatch, capsys):
    text = "run task9(car)\nrun bogus syntax\nstate\nquit\n"
    code, out = repl_run(monkeypatch, capsys, text)
    assert code == 0
    assert out.count("error:") == 2
    assert "start" in out


# ── serve ────────────────────────────────────────────────────────────

def test_serve_parser_defaults():
    args = build_parser().parse_args(["serve", "--port", "9100"])
    assert args.port == 9100
    assert args.max_depth == 256


def test_served_app_answers_http():
    config = uvicorn.Config(
        create_app(), host="127.0.0.1", port=0, log_level="error"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.time() + 15
        while not server.started:
            time.sleep(0.02)
            assert time.time() < deadline, "server did not start"
        port = server.servers[0].sockets[0].getsockname()[1]
        response = httpx.get(f"http://127.0.0.1:{port}/projects", timeout=5)
        assert response.status_code == 200
        assert response.json() == []
    finally:
        server.should_exit = True
        thread.join(timeout=5)
