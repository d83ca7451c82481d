import itertools

from otcheck.causality import (
    StampedOp,
    concurrent,
    dominates,
    happened_before,
    nth_owned,
    ready,
)
from otcheck.doc_state import OpKind, OpSignature

SIG = OpSignature(OpKind.INS, 0, 0)


def op(op_id, owner, clock):
    return StampedOp(op_id, owner, tuple(clock), SIG)


def test_dominates_zero_vector():
    assert dominates((1, 0, 0), (0, 0, 0))


def test_dominates_incomparable_pair():
    assert not dominates((0, 1), (1, 0))
    assert not dominates((1, 0), (0, 1))


def test_dominates_reflexive():
    for v in [(0, 0), (2, 1), (1, 1, 3)]:
        assert dominates(v, v)


def test_concurrent_when_neither_saw_the_other():
    assert concurrent(op(0, 0, (0, 0)), op(1, 1, (0, 0)))


def test_not_concurrent_after_delivery():
    # site 1 executed op0 before generating op1
    assert not concurrent(op(0, 0, (0, 0)), op(1, 1, (1, 0)))


def test_concurrent_is_symmetric():
    clocks = [(0, 0), (1, 0), (0, 1), (1, 1)]
    for c1, c2 in itertools.product(clocks, repeat=2):
        o1, o2 = op(0, 0, c1), op(1, 1, c2)
        assert concurrent(o1, o2) == concurrent(o2, o1)


def test_happened_before_after_delivery():
    assert happened_before(op(0, 0, (0, 0)), op(1, 1, (1, 0)))


def test_no_happened_before_between_fresh_ops():
    o1, o2 = op(0, 0, (0, 0)), op(1, 1, (0, 0))
    assert not happened_before(o1, o2)
    assert not happened_before(o2, o1)


def test_happened_before_excludes_concurrency():
    # brute force over all clock pairs with entries in {0,1,2}, three sites
    entries = range(3)
    for c1 in itertools.product(entries, repeat=3):
        for c2 in itertools.product(entries, repeat=3):
            for s1, s2 in itertools.product(range(3), repeat=2):
                o1, o2 = op(0, s1, c1), op(1, s2, c2)
                if happened_before(o1, o2):
                    assert not concurrent(o1, o2)


def test_ready_local_slot_initially_enabled():
    clocks = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    assert ready(0, 0, clocks, [], (1, 1, 1))


def test_ready_remote_disabled_before_broadcast():
    clocks = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    assert not ready(0, 1, clocks, [], (1, 1, 1))


def test_ready_remote_with_dominated_clock():
    ops = [op(0, 0, (0, 0, 0))]
    clocks = [[1, 0, 0], [0, 1, 0], [0, 0, 0]]
    assert ready(1, 0, clocks, ops, (1, 1, 1))


def test_ready_remote_blocked_by_missing_dependency():
    # op of site 0 generated after site 0 executed an op of site 2
    ops = [op(0, 0, (0, 0, 1))]
    clocks = [[1, 0, 1], [0, 1, 0], [0, 0, 1]]
    assert not ready(1, 0, clocks, ops, (1, 1, 1))


def test_nth_owned_skips_other_owners():
    ops = [op(0, 1, (0, 0)), op(1, 0, (0, 0)), op(2, 1, (0, 0))]
    assert nth_owned(ops, 1, 1).id == 2
