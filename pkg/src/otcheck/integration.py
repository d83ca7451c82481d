"""Per-site integration: reorder history, transform, execute, append.

A site's history records operations exactly as executed there (transformed
positions, possibly Nop-ified).  Integrating a remote operation reorders the
history so causal predecessors of the incoming operation come first; if that
changed anything, every entry is recomputed from its original signature
against its new prefix (the partial-concurrency repair), and the incoming
operation is then folded through the entries concurrent with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .causality import StampedOp, dominates
from .doc_state import OpKind, Window, apply_kpc
from .transform import AlgorithmId, TransformableOp, it, operand

IsConcurrent = Callable[[int, int], bool]

_NO_IDS: frozenset[int] = frozenset()


@dataclass(frozen=True, slots=True)
class HistoryEntry:
    """One executed operation: id plus its as-executed shape at this site."""

    op_id: int
    kind: OpKind
    pos: int
    ch: int = 0
    av_ids: frozenset[int] = _NO_IDS
    ap_ids: frozenset[int] = _NO_IDS


@dataclass(frozen=True, slots=True)
class SiteState:
    """One replica: id, observed window, clock row, executed history."""

    pid: int
    text: Window
    clock: tuple[int, ...]
    history: tuple[HistoryEntry, ...]


def _entry_from(t: TransformableOp) -> HistoryEntry:
    return HistoryEntry(t.op_id, t.kind, t.pos, t.ch, t.av, t.ap)


def _fresh_entry(op: StampedOp) -> HistoryEntry:
    """History entry reset to the operation's generation-time signature."""
    return HistoryEntry(op.id, op.sig.kind, op.sig.pos, op.sig.ch, op.sig.ext.av, op.sig.ext.ap)


def _entry_operand(entry: HistoryEntry, ops: Sequence[Optional[StampedOp]]) -> TransformableOp:
    op = ops[entry.op_id]
    assert op is not None
    return TransformableOp(
        op_id=entry.op_id,
        kind=entry.kind,
        pos=entry.pos,
        ch=entry.ch,
        pr=op.owner,
        u=op.owner,
        ip=op.sig.pos,
        av=entry.av_ids,
        ap=entry.ap_ids,
    )


def reorder(
    op: TransformableOp,
    history: Sequence[HistoryEntry],
    ops: Sequence[Optional[StampedOp]],
    is_concurrent: IsConcurrent,
) -> tuple[tuple[HistoryEntry, ...], bool]:
    """Stable-partition ``history`` around ``op``.

    Entries causally related to ``op`` come first, reset to their original
    positions; entries concurrent with ``op`` follow, keeping their
    as-executed shape.  ``swapped`` is true iff any entry changed index.
    """
    op_id = op.op_id
    first_dep = -1
    for idx, entry in enumerate(history):
        if not is_concurrent(op_id, entry.op_id):
            first_dep = idx
            break
    if first_dep < 0:
        return tuple(history), False
    deps: list[HistoryEntry] = []
    concs: list[HistoryEntry] = list(history[:first_dep])
    swapped = False
    for idx in range(first_dep, len(history)):
        entry = history[idx]
        if is_concurrent(op_id, entry.op_id):
            concs.append(entry)
        else:
            if idx != len(deps):
                swapped = True
            stamped = ops[entry.op_id]
            assert stamped is not None
            deps.append(_fresh_entry(stamped))
    return tuple(deps) + tuple(concs), swapped


def transform_against_history(
    alg: AlgorithmId,
    op: TransformableOp,
    history: Sequence[HistoryEntry],
    ops: Sequence[Optional[StampedOp]],
    is_concurrent: IsConcurrent,
) -> TransformableOp:
    """Transform ``op`` against the entries of ``history`` concurrent with it.

    When the reorder moved anything, every reordered entry is first recomputed
    from its original signature against its own prefix (recursively), so the
    fold sees positions consistent with the reordered execution.
    """
    if not history:
        return op
    ordered, swapped = reorder(op, history, ops, is_concurrent)
    if swapped:
        rebuilt: list[HistoryEntry] = []
        for entry in ordered:
            stamped = ops[entry.op_id]
            assert stamped is not None
            redone = transform_against_history(
                alg, operand(stamped), rebuilt, ops, is_concurrent
            )
            rebuilt.append(_entry_from(redone))
        ordered = tuple(rebuilt)
    result = op
    for entry in ordered:
        if is_concurrent(op.op_id, entry.op_id):
            result = it(alg, result, _entry_operand(entry, ops))
    return result


def integrate(
    alg: AlgorithmId,
    op: StampedOp,
    site: SiteState,
    ops: Sequence[Optional[StampedOp]],
    is_concurrent: IsConcurrent,
) -> SiteState:
    """Execute ``op`` at ``site``: transform if remote, apply, record, tick.

    The caller must only hand over ready operations; violations are scheduler
    bugs and trip assertions rather than being handled.
    """
    if op.owner != site.pid:
        if op.clock is not None:
            assert dominates(site.clock, op.clock), (
                f"op {op.id} delivered to site {site.pid} before its dependencies"
            )
        transformed = transform_against_history(
            alg, operand(op), site.history, ops, is_concurrent
        )
    else:
        transformed = operand(op)
    text = apply_kpc(site.text, transformed.kind, transformed.pos, transformed.ch)
    clock = site.clock[: op.owner] + (site.clock[op.owner] + 1,) + site.clock[op.owner + 1 :]
    return SiteState(site.pid, text, clock, site.history + (_entry_from(transformed),))


def history_text(initial: Window, history: Sequence[HistoryEntry]) -> Window:
    """Replay a history's as-executed signatures from an initial window."""
    win = initial
    for entry in history:
        win = apply_kpc(win, entry.kind, entry.pos, entry.ch)
    return win
