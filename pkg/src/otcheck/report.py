"""Run reports, counterexample serialization, human-readable trace tables.

The machine format is JSON with a fixed shape::

    {
      "config":         {...run configuration echo...},
      "verdict":        "Converged" | "Diverged" | "Aborted",
      "statistics":     {"statesExplored": int, "assignmentsTested": int},
      "signatures":     [{"id", "owner", "kind", "pos", "ch", "clock"}],
      "sites":          [{"id", "trace": [{"opId","kind","pos","ch"}],
                          "finalText": [ints]}],
      "divergentCells": [ints]
    }

``signatures``/``sites``/``divergentCells`` are null when there is no
counterexample.  The same documents double as replay inputs.  Exit codes are
the machine contract for verdicts; the JSON adds the evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .causality import StampedOp
from .doc_state import EMPTY, KIND_NAMES, KINDS_BY_NAME, OpKind, OpSignature
from .explorer import (
    Counterexample,
    ExplorerConfig,
    Model,
    SearchStats,
    TraceStep,
)
from .properties import TPViolation
from .transform import AlgorithmId, TransformableOp


class SchemaError(ValueError):
    """A document does not match the scenario schema; names the field path."""


@dataclass
class RunReport:
    """What one checker invocation reports: config echo, verdict, evidence."""

    config: dict
    verdict: str
    statistics: dict
    counterexample: Optional[Counterexample] = None
    violation: Optional[TPViolation] = None

    def to_json(self) -> dict:
        doc: dict[str, Any] = {
            "config": self.config,
            "verdict": self.verdict,
            "statistics": self.statistics,
        }
        if self.violation is not None:
            doc["violation"] = violation_to_json(self.violation)
        ce = self.counterexample
        doc["signatures"] = [_signature_to_json(op) for op in ce.signatures] if ce else None
        doc["sites"] = (
            [
                _site_to_json(ce.site_a, ce.trace_a, ce.text_a),
                _site_to_json(ce.site_b, ce.trace_b, ce.text_b),
            ]
            if ce
            else None
        )
        doc["divergentCells"] = list(ce.divergent_cells) if ce else None
        return doc

    def render_json(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def config_to_json(cfg: ExplorerConfig) -> dict:
    """Echo the configuration; optional fields stay null when defaulted so
    that save followed by load reproduces the exact config value."""
    return {
        "alg": cfg.alg.value,
        "sites": cfg.nb_sites,
        "iters": list(cfg.iters),
        "window": cfg.window_len,
        "alphabet": cfg.alphabet,
        "model": cfg.model.value,
        "deps": [list(pair) for pair in cfg.deps],
        "initialText": list(cfg.initial_text) if cfg.initial_text is not None else None,
        "genPosMax": cfg.gen_pos_max,
        "stopAtFirst": cfg.stop_at_first,
        "budgetStates": cfg.budget_states,
    }


def stats_to_json(stats: SearchStats) -> dict:
    return {
        "statesExplored": stats.states_explored,
        "assignmentsTested": stats.assignments_tested,
    }


def _signature_to_json(op: StampedOp) -> dict:
    sig = op.sig
    assert sig is not None
    return {
        "id": op.id,
        "owner": op.owner,
        "kind": KIND_NAMES[sig.kind],
        "pos": sig.pos,
        "ch": sig.ch,
        "clock": list(op.clock) if op.clock is not None else None,
    }


def _site_to_json(site_id: int, trace: tuple[TraceStep, ...], text) -> dict:
    return {
        "id": site_id,
        "trace": [
            {"opId": st.op_id, "kind": KIND_NAMES[st.kind], "pos": st.pos, "ch": st.ch}
            for st in trace
        ],
        "finalText": list(text),
    }


def violation_to_json(v: TPViolation) -> dict:
    def op_json(op: TransformableOp) -> dict:
        return {
            "kind": KIND_NAMES[op.kind],
            "pos": op.pos,
            "ch": op.ch,
            "pr": op.pr,
            "u": op.u,
            "ip": op.ip,
            "av": sorted(op.av),
            "ap": sorted(op.ap),
        }

    doc: dict[str, Any] = {"property": v.kind, "ops": [op_json(op) for op in v.ops]}
    if v.kind == "TP1":
        doc["witness"] = list(v.witness)
        doc["results"] = [list(r) for r in v.results]
    else:
        doc["results"] = [op_json(r) for r in v.results]
    return doc


def counterexample_to_json(ce: Counterexample) -> dict:
    report = RunReport(
        config=config_to_json(ce.config),
        verdict="Diverged",
        statistics={"statesExplored": 0, "assignmentsTested": 0},
        counterexample=ce,
    )
    return report.to_json()


def save_counterexample(ce: Counterexample, path: str | Path) -> None:
    Path(path).write_text(json.dumps(counterexample_to_json(ce), indent=2) + "\n")


# -- scenario loading --------------------------------------------------------


def _take(doc: dict, path: str, key: str, types, optional: bool = False):
    here = f"{path}.{key}" if path else key
    if key not in doc:
        if optional:
            return None
        raise SchemaError(f"missing field {here}")
    value = doc[key]
    if value is None and optional:
        return None
    if not isinstance(value, types):
        raise SchemaError(f"field {here} has the wrong type")
    return value


def _int_list(value, path: str) -> list[int]:
    if not isinstance(value, list) or any(
        not isinstance(x, int) or isinstance(x, bool) for x in value
    ):
        raise SchemaError(f"field {path} must be a list of integers")
    return value


def _parse_kind(name, path: str) -> OpKind:
    if name not in KINDS_BY_NAME:
        raise SchemaError(f"field {path} must be one of {sorted(KINDS_BY_NAME)}")
    return KINDS_BY_NAME[name]


def load_scenario(path: str | Path) -> Counterexample:
    """Load a stored counterexample/scenario; save→load is the identity."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top-level document must be an object")
    raw_cfg = _take(doc, "", "config", dict)
    try:
        alg = AlgorithmId(_take(raw_cfg, "config", "alg", str))
    except ValueError:
        raise SchemaError("field config.alg names an unknown algorithm") from None
    try:
        model = Model(_take(raw_cfg, "config", "model", str))
    except ValueError:
        raise SchemaError("field config.model names an unknown model") from None
    iters = _int_list(_take(raw_cfg, "config", "iters", list), "config.iters")
    deps_raw = _take(raw_cfg, "config", "deps", list, optional=True) or []
    deps = []
    for i, pair in enumerate(deps_raw):
        pair = _int_list(pair if isinstance(pair, list) else None, f"config.deps[{i}]")
        if len(pair) != 2:
            raise SchemaError(f"field config.deps[{i}] must be a pair")
        deps.append((pair[0], pair[1]))
    initial = _take(raw_cfg, "config", "initialText", list, optional=True)
    if initial is not None:
        initial = tuple(_int_list(initial, "config.initialText"))
    stop_at_first = _take(raw_cfg, "config", "stopAtFirst", bool, optional=True)
    try:
        cfg = ExplorerConfig(
            nb_sites=_take(raw_cfg, "config", "sites", int),
            iters=tuple(iters),
            alg=alg,
            model=model,
            window_len=_take(raw_cfg, "config", "window", int, optional=True),
            alphabet=_take(raw_cfg, "config", "alphabet", int, optional=True) or 2,
            deps=tuple(deps),
            stop_at_first=True if stop_at_first is None else stop_at_first,
            budget_states=_take(raw_cfg, "config", "budgetStates", int, optional=True),
            initial_text=initial,
            gen_pos_max=_take(raw_cfg, "config", "genPosMax", int, optional=True),
        )
    except ValueError as exc:
        raise SchemaError(f"invalid config: {exc}") from exc

    signatures = []
    raw_sigs = _take(doc, "", "signatures", list)
    for i, raw in enumerate(raw_sigs):
        where = f"signatures[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(f"field {where} must be an object")
        kind = _parse_kind(_take(raw, where, "kind", str), f"{where}.kind")
        clock = _take(raw, where, "clock", list, optional=True)
        if clock is not None:
            clock = tuple(_int_list(clock, f"{where}.clock"))
        ch = _take(raw, where, "ch", int, optional=True) or 0
        try:
            sig = OpSignature(kind, _take(raw, where, "pos", int), ch)
        except ValueError as exc:
            raise SchemaError(f"invalid {where}: {exc}") from exc
        signatures.append(
            StampedOp(_take(raw, where, "id", int), _take(raw, where, "owner", int), clock, sig)
        )

    raw_sites = _take(doc, "", "sites", list)
    if len(raw_sites) != 2:
        raise SchemaError("field sites must list exactly the two compared sites")
    parsed_sites = []
    for i, raw in enumerate(raw_sites):
        where = f"sites[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(f"field {where} must be an object")
        steps = []
        for j, st in enumerate(_take(raw, where, "trace", list)):
            sw = f"{where}.trace[{j}]"
            if not isinstance(st, dict):
                raise SchemaError(f"field {sw} must be an object")
            steps.append(
                TraceStep(
                    _take(st, sw, "opId", int),
                    _parse_kind(_take(st, sw, "kind", str), f"{sw}.kind"),
                    _take(st, sw, "pos", int),
                    _take(st, sw, "ch", int, optional=True) or 0,
                )
            )
        text = tuple(
            _int_list(_take(raw, where, "finalText", list), f"{where}.finalText")
        )
        parsed_sites.append((_take(raw, where, "id", int), tuple(steps), text))

    cells = _take(doc, "", "divergentCells", list, optional=True)
    cells = tuple(_int_list(cells, "divergentCells")) if cells is not None else ()
    (site_a, trace_a, text_a), (site_b, trace_b, text_b) = parsed_sites
    return Counterexample(
        config=cfg,
        signatures=tuple(signatures),
        site_a=site_a,
        site_b=site_b,
        trace_a=trace_a,
        trace_b=trace_b,
        text_a=text_a,
        text_b=text_b,
        divergent_cells=cells,
    )


# -- human-readable rendering -------------------------------------------------


def render_window(win) -> str:
    """Cells up to one trailing empty, then an ellipsis for the rest."""
    last = -1
    for i, c in enumerate(win):
        if c != EMPTY:
            last = i
    upto = min(len(win), last + 2)
    parts = [str(c) for c in win[:upto]]
    if upto < len(win):
        parts.append("...")
    return " ".join(parts)


def _sig_str(kind: OpKind, pos: int, ch: int) -> str:
    if kind is OpKind.NOP:
        return "Nop"
    if kind is OpKind.DEL:
        return f"Del {pos}"
    return f"Ins {pos} {ch}"


def render_trace_table(ce: Counterexample) -> str:
    """A variables/operations/list/text table, one column per compared site."""
    columns = [(ce.site_a, ce.trace_a, ce.text_a), (ce.site_b, ce.trace_b, ce.text_b)]
    own: dict[int, list[str]] = {site_id: [] for site_id, _, _ in columns}
    for op in ce.signatures:
        if op.owner in own:
            assert op.sig is not None
            own[op.owner].append(_sig_str(op.sig.kind, op.sig.pos, op.sig.ch))
    rows: list[tuple[str, list[str]]] = []
    rows.append(("operations", [" ; ".join(own[sid]) or "-" for sid, _, _ in columns]))
    height = max(len(tr) for _, tr, _ in columns)
    for line in range(height):
        label = "list" if line == 0 else ""
        cells = []
        for _, trace, _ in columns:
            if line < len(trace):
                st = trace[line]
                cells.append(f"{st.op_id}  {_sig_str(st.kind, st.pos, st.ch)}")
            else:
                cells.append("")
        rows.append((label, cells))
    rows.append(("text", [render_window(text) for _, _, text in columns]))

    headers = ["variables"] + [f"site {sid}" for sid, _, _ in columns]
    table = [headers] + [[label] + cells for label, cells in rows]
    widths = [max(len(row[c]) for row in table) for c in range(len(headers))]
    lines = []
    for r, row in enumerate(table):
        lines.append(" | ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip())
        if r == 0:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines)
