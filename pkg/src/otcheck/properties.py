"""Direct checkers for convergence and the TP1/TP2 transformation properties.

TP1 demands that executing two concurrent operations in either order (each
transformed against the other) produces the same state; TP2 demands that
transforming a third operation along the two equivalent orders produces the
same operation.  Both are universally quantified, so the checkers finitize:
candidate operations range over a bounded position/character space, and TP1's
state identity is tested extensionally over a family of initial windows.
Within those bounds a reported violation is exact; "no violation" is a claim
about the bounds only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .doc_state import OpKind, Window, apply_kpc, make_window
from .explorer import SystemState, stable_pair
from .transform import AlgorithmId, TransformableOp, it, it_star

SYNTH_DEL_BASE = 1000  # ids of synthetic concurrent deletes, one per position


@dataclass(frozen=True)
class PropertyBounds:
    """Finitization of the property checks: positions, alphabet, windows.

    ``synth_ext`` controls whether candidates carry synthetic extension
    fields (non-empty delete sets, initial positions); None picks the
    per-property default (off for TP1, on for TP2: generation-time operations
    have empty extensions, while TP2's interesting triples only arise as
    transformation results).
    """

    pos_max: int
    alphabet: int = 2
    window_len: Optional[int] = None
    synth_ext: Optional[bool] = None

    def __post_init__(self) -> None:
        if self.pos_max < 0:
            raise ValueError("position bound must be non-negative")
        if self.alphabet < 1:
            raise ValueError("alphabet size must be at least 1")
        if self.window <= self.pos_max:
            raise ValueError("window must be longer than the position bound")

    @property
    def window(self) -> int:
        return self.window_len if self.window_len is not None else self.pos_max + 4


@dataclass(frozen=True)
class TPViolation:
    """A refuted property instance; re-evaluating the stored operations
    reproduces the inequality."""

    kind: str  # "TP1" | "TP2"
    alg: AlgorithmId
    ops: tuple[TransformableOp, ...]
    witness: Optional[Window]
    results: tuple

    def verify(self) -> bool:
        if self.kind == "TP1":
            o1, o2 = self.ops
            a, b = _tp1_outcomes(self.alg, o1, o2, self.witness)
            return a != b and (a, b) == self.results
        o, o1, o2 = self.ops
        r1, r2 = _tp2_outcomes(self.alg, o, o1, o2)
        return not _effect_equal(r1, r2) and (r1, r2) == self.results


def check_convergence(state: SystemState) -> list[tuple[int, int, tuple[int, ...]]]:
    """All stable pairs with unequal texts, with the differing cell indices."""
    out = []
    n = len(state.sites)
    for i in range(n):
        for j in range(i + 1, n):
            if not stable_pair(state, i, j):
                continue
            ti, tj = state.sites[i].text, state.sites[j].text
            if ti != tj:
                cells = tuple(k for k, (x, y) in enumerate(zip(ti, tj)) if x != y)
                out.append((i, j, cells))
    return out


def _apply_op(win: Window, op: TransformableOp) -> Window:
    return apply_kpc(win, op.kind, op.pos, op.ch if op.kind is OpKind.INS else 0)


def _tp1_outcomes(alg, o1, o2, win) -> tuple[Window, Window]:
    a = _apply_op(_apply_op(win, o1), it(alg, o2, o1))
    b = _apply_op(_apply_op(win, o2), it(alg, o1, o2))
    return a, b


def _tp2_outcomes(alg, o, o1, o2) -> tuple[TransformableOp, TransformableOp]:
    r1 = it_star(alg, o, (o1, it(alg, o2, o1)))
    r2 = it_star(alg, o, (o2, it(alg, o1, o2)))
    return r1, r2


def _effect_equal(a: TransformableOp, b: TransformableOp) -> bool:
    """Equality on the document effect: extension fields are bookkeeping."""
    if a.kind is OpKind.NOP and b.kind is OpKind.NOP:
        return True
    return (a.kind, a.pos, a.ch) == (b.kind, b.pos, b.ch)


def _candidates(
    alg: AlgorithmId, bounds: PropertyBounds, owner: int, synth: bool
) -> list[TransformableOp]:
    """Candidate operations for one slot, canonically ordered."""
    out: list[TransformableOp] = []
    for p in range(bounds.pos_max + 1):
        out.append(TransformableOp(owner, OpKind.DEL, p, 0, pr=owner, u=owner, ip=p))
    for p in range(bounds.pos_max + 1):
        for c in range(bounds.alphabet):
            base = TransformableOp(owner, OpKind.INS, p, c, pr=owner, u=owner, ip=p)
            if not synth:
                out.append(base)
            elif alg is AlgorithmId.SULEIMAN:
                synthetic = frozenset({SYNTH_DEL_BASE + p})
                for av in (frozenset(), synthetic):
                    for ap in (frozenset(), synthetic):
                        out.append(
                            TransformableOp(
                                owner, OpKind.INS, p, c, pr=owner, u=owner, ip=p, av=av, ap=ap
                            )
                        )
            elif alg is AlgorithmId.IMINE:
                for ip in range(bounds.pos_max + 1):
                    out.append(
                        TransformableOp(owner, OpKind.INS, p, c, pr=owner, u=owner, ip=ip)
                    )
            else:
                out.append(base)
    return out


def _windows(bounds: PropertyBounds) -> list[Window]:
    """Initial windows: every occupied prefix over the alphabet.

    The prefix length is capped at window-2 so that no candidate path (at
    most two insertions) can push occupied cells off the window edge; beyond
    that cap the bounded check would report truncation artifacts that are not
    violations over unbounded texts.
    """
    length = bounds.window
    max_occupied = min(bounds.pos_max + 2, length - 2)
    out = []
    for n in range(max_occupied + 1):
        for cells in itertools.product(range(bounds.alphabet), repeat=n):
            out.append(make_window(cells, length))
    return out


def check_tp1(alg: AlgorithmId, bounds: PropertyBounds) -> Optional[TPViolation]:
    """First pair of concurrent operations whose two execution orders differ
    on some enumerated window, or None within bounds."""
    synth = bounds.synth_ext if bounds.synth_ext is not None else False
    first = _candidates(alg, bounds, 0, synth)
    second = _candidates(alg, bounds, 1, synth)
    windows = _windows(bounds)
    for o1 in first:
        for o2 in second:
            t21 = it(alg, o2, o1)
            t12 = it(alg, o1, o2)
            for win in windows:
                a = _apply_op(_apply_op(win, o1), t21)
                b = _apply_op(_apply_op(win, o2), t12)
                if a != b:
                    return TPViolation("TP1", alg, (o1, o2), win, (a, b))
    return None


def check_tp2(
    alg: AlgorithmId, bounds: PropertyBounds, find_all: bool = False
):
    """First triple of pairwise-concurrent operations where transforming the
    third along the two equivalent orders differs, or None within bounds.

    With ``find_all`` every violating triple in canonical order is returned.
    """
    synth = bounds.synth_ext if bounds.synth_ext is not None else True
    slot0 = _candidates(alg, bounds, 0, synth)
    slot1 = _candidates(alg, bounds, 1, synth)
    slot2 = _candidates(alg, bounds, 2, synth)
    found: list[TPViolation] = []
    for o in slot0:
        for o1 in slot1:
            for o2 in slot2:
                r1 = it_star(alg, o, (o1, it(alg, o2, o1)))
                r2 = it_star(alg, o, (o2, it(alg, o1, o2)))
                if not _effect_equal(r1, r2):
                    violation = TPViolation("TP2", alg, (o, o1, o2), None, (r1, r2))
                    if not find_all:
                        return violation
                    found.append(violation)
    return found if find_all else None
