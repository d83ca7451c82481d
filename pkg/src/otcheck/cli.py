"""Command-line front end.

Exit codes are the machine contract: 0 convergence / property holds within
bounds, 1 divergence / property violation, 2 usage or configuration error,
3 search aborted (budget exhausted).  The JSON report goes to ``--out`` when
given (human output then uses stdout), otherwise stdout carries exactly the
JSON document and human output goes to stderr; wall time appears only in the
human output so reports stay byte-deterministic.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional

from .explorer import (
    Counterexample,
    ExplorerConfig,
    ExploreResult,
    Model,
    ScenarioError,
    Verdict,
    explore,
    replay_scenario,
)
from .properties import PropertyBounds, check_tp1, check_tp2
from .report import (
    RunReport,
    SchemaError,
    config_to_json,
    load_scenario,
    render_trace_table,
    render_window,
    stats_to_json,
)
from .transform import AlgorithmId

EXIT_CONVERGED = 0
EXIT_DIVERGED = 1
EXIT_USAGE = 2
EXIT_ABORTED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otcheck",
        description=(
            "Exhaustively check replica convergence of operational-transformation "
            "algorithms, or check the TP1/TP2 transformation properties directly."
        ),
    )
    parser.add_argument("--alg", choices=[a.value for a in AlgorithmId], help="IT algorithm")
    parser.add_argument("--sites", type=int, help="number of sites")
    parser.add_argument("--iters", help="per-site local operation counts, e.g. 1,1,1")
    parser.add_argument("--window", type=int, help="observed window length (default 2*total ops)")
    parser.add_argument("--alphabet", type=int, default=2, help="alphabet size (default 2)")
    parser.add_argument(
        "--model",
        choices=[m.value for m in Model],
        default=Model.CONCRETE.value,
        help="exploration model (default concrete)",
    )
    parser.add_argument("--deps", help="dependency pairs for symbolic-fixeddeps, e.g. 0>1,2>3")
    parser.add_argument("--check", choices=["tp1", "tp2"], help="check a transformation property")
    parser.add_argument("--pmax", type=int, default=4, help="position bound for --check (default 4)")
    parser.add_argument(
        "--synth-ext",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="synthesize extension fields for --check candidates "
        "(default: off for tp1, on for tp2)",
    )
    parser.add_argument("--budget-states", type=int, help="abort after exploring this many states")
    parser.add_argument("--out", help="write the JSON report to this file")
    parser.add_argument("--replay", help="replay a stored scenario file")
    parser.add_argument("--threads", type=int, default=1, help="parallel search processes")
    return parser


def _parse_iters(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"cannot parse --iters {text!r}: expected integers like 1,1,1")


def _parse_deps(text: Optional[str]) -> tuple[tuple[int, int], ...]:
    if not text:
        return ()
    out = []
    for chunk in text.split(","):
        parts = chunk.split(">")
        if len(parts) != 2:
            raise ValueError(f"cannot parse dependency {chunk!r}: expected a>b")
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValueError(f"cannot parse dependency {chunk!r}: expected integers")
    return tuple(out)


class _Streams:
    """Route the machine report and the human report per the --out contract."""

    def __init__(self, out_path: Optional[str]):
        self.out_path = out_path
        self.human = sys.stdout if out_path else sys.stderr

    def emit(self, report: RunReport, human_text: str) -> None:
        if self.out_path:
            Path(self.out_path).write_text(report.render_json())
            sys.stdout.write(human_text)
        else:
            sys.stdout.write(report.render_json())
            sys.stderr.write(human_text)


def _verdict_exit(verdict: Verdict) -> int:
    return {
        Verdict.CONVERGED: EXIT_CONVERGED,
        Verdict.DIVERGED: EXIT_DIVERGED,
        Verdict.ABORTED: EXIT_ABORTED,
    }[verdict]


def _human_explore(cfg: ExplorerConfig, result: ExploreResult, elapsed: float) -> str:
    lines = [
        f"{cfg.alg.value} / {cfg.model.value}: {result.verdict.value}"
        f"  (states {result.stats.states_explored},"
        f" assignments {result.stats.assignments_tested},"
        f" {elapsed:.2f}s)"
    ]
    if result.counterexample is not None:
        lines.append("")
        lines.append(render_trace_table(result.counterexample))
    return "\n".join(lines) + "\n"


def _run_explore(args) -> int:
    missing = [name for name in ("alg", "sites", "iters") if getattr(args, name) is None]
    if missing:
        print(f"error: missing required flag(s): {', '.join('--' + m for m in missing)}",
              file=sys.stderr)
        return EXIT_USAGE
    cfg = ExplorerConfig(
        nb_sites=args.sites,
        iters=_parse_iters(args.iters),
        alg=AlgorithmId(args.alg),
        model=Model(args.model),
        window_len=args.window,
        alphabet=args.alphabet,
        deps=_parse_deps(args.deps),
        budget_states=args.budget_states,
        threads=args.threads,
    )
    started = time.monotonic()
    result = explore(cfg)
    elapsed = time.monotonic() - started
    report = RunReport(
        config=config_to_json(cfg),
        verdict=result.verdict.value,
        statistics=stats_to_json(result.stats),
        counterexample=result.counterexample,
    )
    _Streams(args.out).emit(report, _human_explore(cfg, result, elapsed))
    return _verdict_exit(result.verdict)


def _run_check(args) -> int:
    if args.alg is None:
        print("error: --check requires --alg", file=sys.stderr)
        return EXIT_USAGE
    alg = AlgorithmId(args.alg)
    bounds = PropertyBounds(
        pos_max=args.pmax,
        alphabet=args.alphabet,
        window_len=args.window,
        synth_ext=args.synth_ext,
    )
    started = time.monotonic()
    violation = check_tp1(alg, bounds) if args.check == "tp1" else check_tp2(alg, bounds)
    elapsed = time.monotonic() - started
    verdict = Verdict.DIVERGED if violation is not None else Verdict.CONVERGED
    report = RunReport(
        config={
            "check": args.check,
            "alg": alg.value,
            "pmax": bounds.pos_max,
            "alphabet": bounds.alphabet,
            "window": bounds.window,
            "synthExt": bounds.synth_ext,
        },
        verdict=verdict.value,
        statistics={"statesExplored": 0, "assignmentsTested": 0},
        violation=violation,
    )
    outcome = "violated" if violation is not None else "holds within bounds"
    human = f"{args.check} / {alg.value}: {outcome}  ({elapsed:.2f}s)\n"
    _Streams(args.out).emit(report, human)
    return EXIT_DIVERGED if violation is not None else EXIT_CONVERGED


def _run_replay(args) -> int:
    scenario = load_scenario(args.replay)
    replayed = replay_scenario(scenario)
    state_a = replayed[scenario.site_a]
    state_b = replayed[scenario.site_b]
    recorded = {scenario.site_a: scenario.text_a, scenario.site_b: scenario.text_b}
    for site_id, state in ((scenario.site_a, state_a), (scenario.site_b, state_b)):
        if tuple(recorded[site_id]) != state.text:
            print(
                f"error: site {site_id} replays to [{render_window(state.text)}], "
                f"but the scenario records [{render_window(recorded[site_id])}]",
                file=sys.stderr,
            )
            return EXIT_USAGE
    cells = tuple(
        idx for idx, (x, y) in enumerate(zip(state_a.text, state_b.text)) if x != y
    )
    if scenario.divergent_cells and cells != tuple(scenario.divergent_cells):
        print(
            f"error: recomputed divergent cells {list(cells)} do not match "
            f"the recorded {list(scenario.divergent_cells)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    verdict = Verdict.DIVERGED if cells else Verdict.CONVERGED
    replayed_ce = Counterexample(
        config=scenario.config,
        signatures=scenario.signatures,
        site_a=scenario.site_a,
        site_b=scenario.site_b,
        trace_a=scenario.trace_a,
        trace_b=scenario.trace_b,
        text_a=state_a.text,
        text_b=state_b.text,
        divergent_cells=cells,
    )
    report = RunReport(
        config=config_to_json(scenario.config),
        verdict=verdict.value,
        statistics={"statesExplored": 0, "assignmentsTested": 1},
        counterexample=replayed_ce,
    )
    human = (
        f"replay {args.replay}: {verdict.value}\n\n{render_trace_table(replayed_ce)}\n"
    )
    _Streams(args.out).emit(report, human)
    return EXIT_DIVERGED if cells else EXIT_CONVERGED


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        if args.replay:
            return _run_replay(args)
        if args.check:
            return _run_check(args)
        return _run_explore(args)
    except (ValueError, ScenarioError, SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
