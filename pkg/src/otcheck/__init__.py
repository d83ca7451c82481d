"""Convergence checking for operational-transformation text editing algorithms.

Enumerates causally-valid executions of N replicas under a chosen inclusion
transformation, reports replayable counterexamples when stable replicas
diverge, and checks the TP1/TP2 transformation properties directly over
bounded operation spaces.
"""

from .causality import StampedOp, concurrent, dominates, happened_before, ready
from .doc_state import (
    EMPTY,
    ExtensionFields,
    OpKind,
    OpSignature,
    Window,
    apply,
    apply_seq,
    make_window,
)
from .explorer import (
    Counterexample,
    ExplorerConfig,
    ExploreResult,
    Model,
    ScenarioError,
    SearchStats,
    SystemState,
    TraceStep,
    Verdict,
    derouler,
    explore,
    explore_concrete,
    explore_symbolic,
    replay_scenario,
    stable_pair,
)
from .integration import (
    HistoryEntry,
    SiteState,
    integrate,
    reorder,
    transform_against_history,
)
from .properties import (
    PropertyBounds,
    TPViolation,
    check_convergence,
    check_tp1,
    check_tp2,
)
from .report import (
    RunReport,
    SchemaError,
    load_scenario,
    render_trace_table,
    save_counterexample,
)
from .transform import AlgorithmId, TransformableOp, it, it_star

__all__ = [
    "AlgorithmId",
    "Counterexample",
    "EMPTY",
    "ExplorerConfig",
    "ExploreResult",
    "ExtensionFields",
    "HistoryEntry",
    "Model",
    "OpKind",
    "OpSignature",
    "PropertyBounds",
    "RunReport",
    "ScenarioError",
    "SchemaError",
    "SearchStats",
    "SiteState",
    "StampedOp",
    "SystemState",
    "TPViolation",
    "TraceStep",
    "TransformableOp",
    "Verdict",
    "Window",
    "apply",
    "apply_seq",
    "check_convergence",
    "check_tp1",
    "check_tp2",
    "concurrent",
    "derouler",
    "dominates",
    "explore",
    "explore_concrete",
    "explore_symbolic",
    "happened_before",
    "integrate",
    "it",
    "it_star",
    "load_scenario",
    "make_window",
    "ready",
    "render_trace_table",
    "reorder",
    "replay_scenario",
    "save_counterexample",
    "stable_pair",
    "transform_against_history",
]

__version__ = "0.1.0"
