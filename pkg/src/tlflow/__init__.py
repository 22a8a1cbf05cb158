"""Transaction-logic workflow engine for software life-cycle models."""

from .engine import (
    Answer,
    EvalConfig,
    EvalError,
    ExecuteResult,
    Outcome,
    PossibleResult,
    Trace,
    execute,
    possible,
    solve,
    solve_all,
    unify,
)
from .lifecycle import (
    LifecycleModel,
    TaskDef,
    compile_model,
    compile_task,
    critical_requirements,
    dependency_graph,
    enabled_tasks,
    plan,
    reachable_artifacts,
    recognize_tasks,
)
from .state import State
from .syntax import (
    ParseError,
    Program,
    Query,
    parse_program,
    parse_query,
    pretty_print,
)

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "EvalConfig",
    "EvalError",
    "ExecuteResult",
    "LifecycleModel",
    "Outcome",
    "ParseError",
    "PossibleResult",
    "Program",
    "Query",
    "State",
    "TaskDef",
    "Trace",
    "compile_model",
    "compile_task",
    "critical_requirements",
    "dependency_graph",
    "enabled_tasks",
    "execute",
    "parse_program",
    "parse_query",
    "plan",
    "possible",
    "pretty_print",
    "reachable_artifacts",
    "recognize_tasks",
    "solve",
    "solve_all",
    "unify",
    "__version__",
]
