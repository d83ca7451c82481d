"""Bounded document window and the effect of primitive editing operations.

A replica's text is observed through a fixed-length window of cells.  Empty
cells hold ``EMPTY`` (-1); occupied cells hold symbols from a finite integer
alphabet.  An insertion shifts cells right from the insertion point (the last
cell falls off the window); a deletion shifts left and refills the tail with
``EMPTY``.  Operations whose position lies outside ``[0, L-1]`` are ignored,
not rejected: the window is a view onto a conceptually unbounded text.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

EMPTY = -1

Window = tuple[int, ...]


class OpKind(IntEnum):
    """Primitive operation tag.  DEL < INS gives the canonical signature order."""

    DEL = 0
    INS = 1
    NOP = 2


KIND_NAMES = {OpKind.DEL: "Del", OpKind.INS: "Ins", OpKind.NOP: "Nop"}
KINDS_BY_NAME = {name: kind for kind, name in KIND_NAMES.items()}


@dataclass(frozen=True, slots=True)
class ExtensionFields:
    """Algorithm-specific operation attributes.

    ``pr``: Ellis priority; ``u``: Ressel issuer site id; ``ip``: Imine initial
    position; ``av``/``ap``: Suleiman sets of concurrent delete operation ids
    (deletes before / after the insertion point).
    """

    pr: int = 0
    u: int = 0
    ip: int = 0
    av: frozenset[int] = frozenset()
    ap: frozenset[int] = frozenset()


EMPTY_EXT = ExtensionFields()


@dataclass(frozen=True, slots=True)
class OpSignature:
    """An operation as selected at generation time."""

    kind: OpKind
    pos: int = 0
    ch: int = 0
    ext: ExtensionFields = EMPTY_EXT

    def __post_init__(self) -> None:
        if self.kind is OpKind.DEL and self.ch != 0:
            raise ValueError("delete operations carry character 0")


def make_window(values: Iterable[int] = (), length: int = 0) -> Window:
    """Build a window of ``length`` cells: ``values`` then EMPTY padding."""
    cells = tuple(values)
    if len(cells) > length:
        raise ValueError(f"{len(cells)} cells do not fit a window of length {length}")
    return cells + (EMPTY,) * (length - len(cells))


def apply_kpc(win: Window, kind: int, pos: int, ch: int) -> Window:
    """Apply one operation given as a (kind, pos, ch) triple."""
    if kind == OpKind.NOP or pos < 0 or pos >= len(win):
        return win
    if kind == OpKind.INS:
        return win[:pos] + (ch,) + win[pos:-1]
    return win[:pos] + win[pos + 1 :] + (EMPTY,)


def apply(win: Window, sig: OpSignature) -> Window:
    """Apply ``sig`` to ``win``.  Total: out-of-window positions are no-ops."""
    return apply_kpc(win, sig.kind, sig.pos, sig.ch)


def apply_seq(win: Window, seq: Sequence[OpSignature]) -> Window:
    """Left fold of :func:`apply` over an operation sequence."""
    for sig in seq:
        win = apply(win, sig)
    return win
