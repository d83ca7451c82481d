"""Multiprocess exploration over disjoint top-level branches.

The branch space (first-level transitions, or the assignment ranks for the
preselect variants) is split into contiguous chunks, one worker per chunk,
each running the ordinary single-threaded search on its chunk.  Contiguous
chunks preserve the canonical order: the reported counterexample is the one
from the lowest diverging chunk, which is exactly the single-threaded result.
Visited-state sets are per worker, so overlapping subtrees may be explored
more than once; statesExplored is the sum over workers.
"""

from __future__ import annotations

import multiprocessing

from .explorer import (
    ExploreResult,
    ExplorerConfig,
    SearchStats,
    Verdict,
    count_top_branches,
    explore_branches,
)


def _chunks(total: int, parts: int) -> list[range]:
    parts = max(1, min(parts, total))
    size, extra = divmod(total, parts)
    out = []
    start = 0
    for i in range(parts):
        end = start + size + (1 if i < extra else 0)
        if end > start:
            out.append(range(start, end))
        start = end
    return out


def _worker(args: tuple[ExplorerConfig, range]) -> ExploreResult:
    cfg, branch_range = args
    return explore_branches(cfg, branch_range)


def explore_parallel(cfg: ExplorerConfig) -> ExploreResult:
    total = count_top_branches(cfg)
    if total == 0:
        return explore_branches(cfg, range(0))
    chunks = _chunks(total, cfg.threads)
    if len(chunks) == 1:
        return explore_branches(cfg, chunks[0])
    with multiprocessing.Pool(len(chunks)) as pool:
        results = pool.map(_worker, [(cfg, chunk) for chunk in chunks])
    stats = SearchStats(
        states_explored=sum(r.stats.states_explored for r in results),
        assignments_tested=sum(r.stats.assignments_tested for r in results),
    )
    for result in results:  # chunk order == canonical order
        if result.verdict is Verdict.DIVERGED:
            return ExploreResult(Verdict.DIVERGED, result.counterexample, stats)
        if result.verdict is Verdict.ABORTED:
            return ExploreResult(Verdict.ABORTED, None, stats)
    return ExploreResult(Verdict.CONVERGED, None, stats)
