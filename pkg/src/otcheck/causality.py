"""Vector-clock bookkeeping: happened-before, concurrency, causal readiness.

Clock convention: an operation's clock is a copy of its owner's clock taken
*before* the owner increments its own entry, so ``op.clock[op.owner]`` equals
the number of the owner's earlier local operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .doc_state import OpSignature

Clock = tuple[int, ...]


@dataclass(frozen=True, slots=True)
class StampedOp:
    """A generated operation: owner, generation-time clock, original signature.

    ``clock`` is None under the fixed-dependency model, where timestamp
    vectors are replaced by a declared dependency relation; ``sig`` is None
    for symbolic operations whose signature has not been assigned yet.
    """

    id: int
    owner: int
    clock: Optional[Clock]
    sig: Optional[OpSignature]


def dominates(v1: Sequence[int], v2: Sequence[int]) -> bool:
    """Componentwise v1[i] >= v2[i].  Both vectors must have equal length."""
    assert len(v1) == len(v2), "vector clocks of different site counts"
    return all(a >= b for a, b in zip(v1, v2))


def concurrent(o1: StampedOp, o2: StampedOp) -> bool:
    """Neither operation saw the other before being generated."""
    assert o1.clock is not None and o2.clock is not None
    return (
        o1.clock[o1.owner] >= o2.clock[o1.owner]
        and o2.clock[o2.owner] >= o1.clock[o2.owner]
    )


def happened_before(o1: StampedOp, o2: StampedOp) -> bool:
    """True iff o2's issuer had executed o1 before generating o2."""
    assert o1.clock is not None and o2.clock is not None
    return o2.clock[o1.owner] > o1.clock[o1.owner]


def nth_owned(ops: Sequence[Optional[StampedOp]], owner: int, rank: int) -> StampedOp:
    """The rank-th (0-based) generated operation owned by ``owner``."""
    seen = 0
    for op in ops:
        if op is not None and op.owner == owner:
            if seen == rank:
                return op
            seen += 1
    raise LookupError(f"site {owner} has generated fewer than {rank + 1} operations")


def ready(
    site: int,
    k: int,
    clocks: Sequence[Sequence[int]],
    ops: Sequence[Optional[StampedOp]],
    iters: Sequence[int],
) -> bool:
    """Can ``site`` execute the next operation of site ``k``?

    Local slot: true while the site has local operations left to generate.
    Remote: site k must have executed an operation site has not, and the
    candidate's clock must be dominated by site's clock (causal delivery).
    """
    if k == site:
        return clocks[site][site] < iters[site]
    if clocks[site][k] >= clocks[k][k]:
        return False
    op = nth_owned(ops, k, clocks[site][k])
    assert op.clock is not None
    return dominates(clocks[site], op.clock)


def causal_delivery_violation(
    ops: Sequence[StampedOp], traces: Sequence[Sequence[int]]
) -> Optional[tuple[int, int, int]]:
    """First (o1, o2, site) where o1 -> o2 but o2 ran first at ``site``, else None."""
    for site, trace in enumerate(traces):
        position = {op_id: i for i, op_id in enumerate(trace)}
        for a in trace:
            for b in trace:
                if a != b and happened_before(ops[a], ops[b]) and position[a] > position[b]:
                    return (a, b, site)
    return None
