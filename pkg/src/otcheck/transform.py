"""The five inclusion-transformation algorithms and sequence transformation.

Each algorithm is implemented exactly as published, including its quirks:
Ellis's insert-vs-delete case decrements on position ties, characterwise Sun
uses a strict bound in its delete-vs-insert case but a non-strict one in
insert-vs-delete, and so on.  The checker exists to expose the published
rules' flaws, so none of them are "repaired" here.

Tie-breaking inputs follow the conventional assignments: Ellis priorities and
Ressel site identifiers are the issuing site's id, and the character ordering
``code(c)`` is the identity on the integer alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .causality import StampedOp
from .doc_state import OpKind, OpSignature


class AlgorithmId(str, Enum):
    ELLIS = "ellis"
    RESSEL = "ressel"
    SUN = "sun"
    SULEIMAN = "suleiman"
    IMINE = "imine"


_NO_IDS: frozenset[int] = frozenset()


@dataclass(frozen=True, slots=True)
class TransformableOp:
    """An operation in transformable form: current position plus extension fields."""

    op_id: int
    kind: OpKind
    pos: int
    ch: int = 0
    pr: int = 0
    u: int = 0
    ip: int = 0
    av: frozenset[int] = _NO_IDS
    ap: frozenset[int] = _NO_IDS

    def signature(self) -> OpSignature:
        """The document-effect part of the operation."""
        return OpSignature(self.kind, self.pos, self.ch if self.kind is OpKind.INS else 0)


def operand(op: StampedOp) -> TransformableOp:
    """A StampedOp restarted from its generation-time signature."""
    sig = op.sig
    return TransformableOp(
        op_id=op.id,
        kind=sig.kind,
        pos=sig.pos,
        ch=sig.ch,
        pr=op.owner,
        u=op.owner,
        ip=sig.pos,
        av=sig.ext.av,
        ap=sig.ext.ap,
    )


def _at(o: TransformableOp, pos: int) -> TransformableOp:
    return TransformableOp(o.op_id, o.kind, pos, o.ch, o.pr, o.u, o.ip, o.av, o.ap)


def _nop(o: TransformableOp) -> TransformableOp:
    return TransformableOp(o.op_id, OpKind.NOP, o.pos, o.ch, o.pr, o.u, o.ip, o.av, o.ap)


def _ellis(o1: TransformableOp, o2: TransformableOp) -> TransformableOp:
    if o1.kind is OpKind.INS and o2.kind is OpKind.INS:
        if o1.pos < o2.pos:
            return o1
        if o1.pos > o2.pos:
            return _at(o1, o1.pos + 1)
        if o1.ch == o2.ch:
            return _nop(o1)
        if o1.pr > o2.pr:
            return _at(o1, o1.pos + 1)
        return o1
    if o1.kind is OpKind.INS:  # Ins vs Del; decrements on the position tie
        if o1.pos < o2.pos:
            return o1
        return _at(o1, o1.pos - 1)
    if o2.kind is OpKind.INS:  # Del vs Ins
        if o1.pos < o2.pos:
            return o1
        return _at(o1, o1.pos + 1)
    if o1.pos < o2.pos:  # Del vs Del
        return o1
    if o1.pos > o2.pos:
        return _at(o1, o1.pos - 1)
    return _nop(o1)


def _ressel(o1: TransformableOp, o2: TransformableOp) -> TransformableOp:
    if o1.kind is OpKind.INS and o2.kind is OpKind.INS:
        if o1.pos < o2.pos or (o1.pos == o2.pos and o1.u < o2.u):
            return o1
        return _at(o1, o1.pos + 1)
    if o1.kind is OpKind.INS:
        if o1.pos <= o2.pos:
            return o1
        return _at(o1, o1.pos - 1)
    if o2.kind is OpKind.INS:
        if o1.pos < o2.pos:
            return o1
        return _at(o1, o1.pos + 1)
    if o1.pos < o2.pos:
        return o1
    if o1.pos > o2.pos:
        return _at(o1, o1.pos - 1)
    return _nop(o1)


def _sun(o1: TransformableOp, o2: TransformableOp) -> TransformableOp:
    if o1.kind is OpKind.INS and o2.kind is OpKind.INS:
        if o1.pos < o2.pos:
            return o1
        return _at(o1, o1.pos + 1)
    if o1.kind is OpKind.INS:
        if o1.pos <= o2.pos:
            return o1
        return _at(o1, o1.pos - 1)
    if o2.kind is OpKind.INS:
        if o1.pos < o2.pos:
            return o1
        return _at(o1, o1.pos + 1)
    if o1.pos < o2.pos:
        return o1
    if o1.pos > o2.pos:
        return _at(o1, o1.pos - 1)
    return _nop(o1)


def _suleiman(o1: TransformableOp, o2: TransformableOp) -> TransformableOp:
    if o1.kind is OpKind.INS and o2.kind is OpKind.INS:
        if o1.pos < o2.pos:
            return o1
        if o1.pos > o2.pos:
            return _at(o1, o1.pos + 1)
        if o1.av & o2.ap:
            return _at(o1, o1.pos + 1)
        if o1.ap & o2.av:
            return o1
        if o1.ch > o2.ch:
            return o1
        if o1.ch < o2.ch:
            return _at(o1, o1.pos + 1)
        return _nop(o1)
    if o1.kind is OpKind.INS:  # Ins vs Del grows exactly one of the delete sets
        if o1.pos <= o2.pos:
            return TransformableOp(
                o1.op_id, o1.kind, o1.pos, o1.ch, o1.pr, o1.u, o1.ip, o1.av, o1.ap | {o2.op_id}
            )
        return TransformableOp(
            o1.op_id, o1.kind, o1.pos - 1, o1.ch, o1.pr, o1.u, o1.ip, o1.av | {o2.op_id}, o1.ap
        )
    if o2.kind is OpKind.INS:
        if o1.pos < o2.pos:
            return o1
        return _at(o1, o1.pos + 1)
    if o1.pos < o2.pos:
        return o1
    if o1.pos > o2.pos:
        return _at(o1, o1.pos - 1)
    return _nop(o1)


def _imine(o1: TransformableOp, o2: TransformableOp) -> TransformableOp:
    if o1.kind is OpKind.INS and o2.kind is OpKind.INS:
        if o1.pos < o2.pos:
            return o1
        if o1.pos > o2.pos:
            return _at(o1, o1.pos + 1)
        if o1.ip < o2.ip:
            return o1
        if o1.ip > o2.ip:
            return _at(o1, o1.pos + 1)
        if o1.ch < o2.ch:
            return o1
        if o1.ch > o2.ch:
            return _at(o1, o1.pos + 1)
        return _nop(o1)
    if o1.kind is OpKind.INS:
        if o1.pos <= o2.pos:
            return o1
        return _at(o1, o1.pos - 1)
    if o2.kind is OpKind.INS:
        if o1.pos < o2.pos:
            return o1
        return _at(o1, o1.pos + 1)
    if o1.pos < o2.pos:
        return o1
    if o1.pos > o2.pos:
        return _at(o1, o1.pos - 1)
    return _nop(o1)


_TABLES = {
    AlgorithmId.ELLIS: _ellis,
    AlgorithmId.RESSEL: _ressel,
    AlgorithmId.SUN: _sun,
    AlgorithmId.SULEIMAN: _suleiman,
    AlgorithmId.IMINE: _imine,
}


def it(alg: AlgorithmId, o1: TransformableOp, o2: TransformableOp) -> TransformableOp:
    """Transform o1 to include the effect of concurrent o2.

    Total for every algorithm; Nop is absorbing on the left and neutral on
    the right.  Inputs are never mutated.
    """
    if o1.kind is OpKind.NOP:
        return o1
    if o2.kind is OpKind.NOP:
        return o1
    return _TABLES[alg](o1, o2)


def it_star(
    alg: AlgorithmId, o: TransformableOp, seq: Sequence[TransformableOp]
) -> TransformableOp:
    """Left fold of :func:`it` over an operation sequence."""
    for other in seq:
        o = it(alg, o, other)
    return o
