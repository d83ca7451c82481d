import itertools
import random

from otcheck.causality import StampedOp
from otcheck.doc_state import EMPTY, OpKind, OpSignature, make_window
from otcheck.explorer import _clock_concurrency
from otcheck.integration import (
    HistoryEntry,
    SiteState,
    history_text,
    integrate,
    reorder,
    transform_against_history,
)
from otcheck.transform import AlgorithmId, operand

I, D, N = OpKind.INS, OpKind.DEL, OpKind.NOP
L = 6


def stamped(op_id, owner, clock, kind, pos, ch=0):
    return StampedOp(op_id, owner, tuple(clock), OpSignature(kind, pos, ch))


def fresh_site(pid, nb=3, length=L, initial=()):
    return SiteState(pid, make_window(initial, length), (0,) * nb, ())


def run_site(alg, pid, ops, order, nb=3, length=L, initial=()):
    site = fresh_site(pid, nb, length, initial)
    conc = _clock_concurrency(ops)
    for op_id in order:
        site = integrate(alg, ops[op_id], site, ops, conc)
    return site


# -- reorder -------------------------------------------------------------------


def _fig4_ops():
    # letters a=0, e=1, f=2; ops 0,1 by site 0 (0 -> 1), op 2 by site 1
    return [
        stamped(0, 0, (0, 0), I, 0, 0),
        stamped(1, 0, (1, 0), I, 1, 2),
        stamped(2, 1, (0, 0), I, 0, 1),
    ]


def test_reorder_all_concurrent_keeps_history():
    ops = _fig4_ops()
    conc = _clock_concurrency(ops)
    history = (HistoryEntry(2, I, 0, 1), HistoryEntry(0, I, 1, 0))
    ordered, swapped = reorder(operand(ops[1]), history, ops, conc)
    # op 2 is concurrent with op 1; op 0 causally precedes it and moves first
    assert [e.op_id for e in ordered] == [0, 2]
    assert swapped


def test_reorder_without_dependencies_is_identity():
    ops = _fig4_ops()
    conc = _clock_concurrency(ops)
    history = (HistoryEntry(0, I, 0, 0),)
    ordered, swapped = reorder(operand(ops[2]), history, ops, conc)
    assert [e.op_id for e in ordered] == [0]
    assert not swapped
    assert ordered[0].pos == 0  # concurrent entries keep the executed position


def test_reorder_empty_history():
    ops = _fig4_ops()
    ordered, swapped = reorder(operand(ops[0]), (), ops, _clock_concurrency(ops))
    assert ordered == () and not swapped


def test_reorder_resets_dependent_entries_to_original_position():
    ops = _fig4_ops()
    conc = _clock_concurrency(ops)
    # op 0 executed at a drifted position; as a causal predecessor of op 1 it
    # is restarted from its generation-time signature
    history = (HistoryEntry(2, I, 0, 1), HistoryEntry(0, I, 3, 0))
    ordered, _ = reorder(operand(ops[1]), history, ops, conc)
    dep = next(e for e in ordered if e.op_id == 0)
    assert dep.pos == ops[0].sig.pos


def test_reorder_is_a_permutation():
    ops = _fig4_ops()
    conc = _clock_concurrency(ops)
    history = (HistoryEntry(2, I, 0, 1), HistoryEntry(0, I, 0, 0))
    ordered, _ = reorder(operand(ops[1]), history, ops, conc)
    assert sorted(e.op_id for e in ordered) == sorted(e.op_id for e in history)


# -- transform_against_history ---------------------------------------------------


def test_empty_history_transforms_nothing():
    ops = _fig4_ops()
    out = transform_against_history(
        AlgorithmId.RESSEL, operand(ops[2]), (), ops, _clock_concurrency(ops)
    )
    assert out == operand(ops[2])


def test_partial_concurrency_repair():
    # site 1 executed op 2 locally, then op 0 (tie resolved in op 0's favour);
    # incoming op 1 depends on op 0 and must see op 2 re-expressed after it
    ops = _fig4_ops()
    conc = _clock_concurrency(ops)
    for alg in (AlgorithmId.RESSEL, AlgorithmId.ELLIS):
        site = run_site(alg, 1, ops, [2, 0], nb=2)
        assert [e.pos for e in site.history] == [0, 0]
        out = transform_against_history(alg, operand(ops[1]), site.history, ops, conc)
        assert (out.kind, out.pos, out.ch) == (I, 1, 2)


def test_delete_against_concurrent_insert():
    ops = [
        stamped(0, 0, (0, 0, 0), D, 0),
        stamped(1, 1, (0, 0, 0), I, 0, 0),
    ]
    conc = _clock_concurrency(ops)
    history = (HistoryEntry(1, I, 0, 0),)
    out = transform_against_history(AlgorithmId.ELLIS, operand(ops[0]), history, ops, conc)
    assert (out.kind, out.pos) == (D, 1)


# -- integrate -------------------------------------------------------------------


def test_local_generation_executes_untransformed():
    ops = [stamped(0, 0, (0, 0, 0), I, 0, 0)]
    site = run_site(AlgorithmId.ELLIS, 0, ops, [0])
    assert site.text == make_window([0], L)
    assert site.history == (HistoryEntry(0, I, 0, 0),)
    assert site.clock == (1, 0, 0)


def _three_concurrent_ops():
    zeros = (0, 0, 0)
    return [
        stamped(0, 0, zeros, D, 0),
        stamped(1, 1, zeros, I, 0, 0),
        stamped(2, 2, zeros, I, 1, 0),
    ]


def test_three_site_divergence_site0():
    # the published three-op scenario; with the tie-decrementing insert rule
    # op 1 lands out of the window and op 2 folds against that executed form
    site = run_site(AlgorithmId.ELLIS, 0, _three_concurrent_ops(), [0, 1, 2])
    assert [(e.op_id, e.kind, e.pos) for e in site.history] == [
        (0, D, 0),
        (1, I, -1),
        (2, I, 1),
    ]
    assert site.text == make_window([EMPTY, 0], L)


def test_three_site_divergence_site1():
    site = run_site(AlgorithmId.ELLIS, 1, _three_concurrent_ops(), [1, 0, 2])
    assert [(e.op_id, e.kind, e.pos) for e in site.history] == [
        (1, I, 0),
        (0, D, 1),
        (2, I, 1),
    ]
    assert site.text == make_window([0, 0], L)


def test_suleiman_four_op_scenario_diverges():
    # ops 0,1 by site 0 with 0 -> 1; ops 2,3 concurrent; initial text "0000"
    ops = [
        stamped(0, 0, (0, 0, 0), D, 3),
        stamped(1, 0, (1, 0, 0), I, 3, 0),
        stamped(2, 1, (0, 0, 0), I, 3, 0),
        stamped(3, 2, (0, 0, 0), I, 4, 1),
    ]
    a = run_site(AlgorithmId.SULEIMAN, 1, ops, [2, 3, 0, 1], length=8, initial=(0, 0, 0, 0))
    b = run_site(AlgorithmId.SULEIMAN, 2, ops, [3, 2, 0, 1], length=8, initial=(0, 0, 0, 0))
    assert a.text == make_window([0, 0, 0, 0, 1], 8)
    assert b.text == make_window([0, 0, 0, 0, 1, 0], 8)
    assert [e.kind for e in a.history] == [I, I, D, N]
    assert [(e.op_id, e.pos) for e in b.history] == [(3, 4), (2, 3), (0, 4), (1, 5)]


# -- invariants -------------------------------------------------------------------


def _random_runs():
    ops = _three_concurrent_ops()
    orders = [p for p in itertools.permutations(range(3))]
    for alg in AlgorithmId:
        for pid in range(3):
            for order in orders:
                yield alg, pid, ops, order


def test_history_clock_and_replay_fidelity():
    for alg, pid, ops, order in _random_runs():
        site = fresh_site(pid)
        conc = _clock_concurrency(ops)
        for op_id in order:
            site = integrate(alg, ops[op_id], site, ops, conc)
            assert len(site.history) == sum(site.clock)
            assert site.text == history_text(make_window((), L), site.history)


def test_local_op_signature_never_altered():
    rng = random.Random(7)
    for alg in AlgorithmId:
        for _ in range(20):
            pos, ch = rng.randrange(L), rng.randrange(2)
            kind = rng.choice([I, D])
            ops = [
                stamped(0, 1, (0, 0, 0), I, 2, 1),
                stamped(1, 0, (0, 1, 0), kind, pos, ch if kind is I else 0),
            ]
            site = run_site(alg, 0, ops, [0, 1])
            own = site.history[1]
            assert (own.kind, own.pos, own.ch) == (
                ops[1].sig.kind,
                ops[1].sig.pos,
                ops[1].sig.ch,
            )
