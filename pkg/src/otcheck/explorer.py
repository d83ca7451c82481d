"""Exhaustive search for convergence violations.

Two families of state-space exploration over N replicas exchanging editing
operations:

* the *concrete* family instantiates operation signatures while exploring
  (``concrete``), optionally choosing all signatures up front
  (``concrete-preselect``) and additionally merging the receives of sites
  that finished generating into single covering steps (``concrete-covering``);

* the *symbolic* family first enumerates owner/clock execution traces and
  defers signatures to a final sweep over every assignment (``symbolic``),
  with variants that pre-number operations (``symbolic-prenumber``), stop as
  soon as two sites complete and compare just those two
  (``symbolic-earlystop``), or drop timestamp vectors for a declared
  dependency relation (``symbolic-fixeddeps``).

Convergence is treated as an invariant: every reachable state is checked for
a stable pair of sites with different windows (the symbolic family checks the
complete trace sets it constructs).  The canonical transition order, fixing
what "first counterexample" means, is: per state, for each site in ascending
order, receives ordered by source operation id, then local generations
ordered by signature ``(kind, pos, ch)`` with ``Del < Ins``; covering
combinations come last, in site-major lexicographic order of the
participating sites' choices.  Depth-first search in this order makes
single-threaded runs fully deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

from .causality import StampedOp, causal_delivery_violation, nth_owned, ready
from .doc_state import EMPTY, OpKind, OpSignature, Window, make_window
from .integration import HistoryEntry, SiteState, integrate
from .sweep import Sweeper, signature_space
from .transform import AlgorithmId

DEFAULT_BUDGET_BEYOND_DESK_SCALE = 5_000_000


class Model(str, Enum):
    CONCRETE = "concrete"
    CONCRETE_PRESELECT = "concrete-preselect"
    CONCRETE_COVERING = "concrete-covering"
    SYMBOLIC = "symbolic"
    SYMBOLIC_PRENUMBER = "symbolic-prenumber"
    SYMBOLIC_EARLYSTOP = "symbolic-earlystop"
    SYMBOLIC_FIXEDDEPS = "symbolic-fixeddeps"


CONCRETE_MODELS = frozenset(
    {Model.CONCRETE, Model.CONCRETE_PRESELECT, Model.CONCRETE_COVERING}
)
SYMBOLIC_MODELS = frozenset(
    {Model.SYMBOLIC, Model.SYMBOLIC_PRENUMBER, Model.SYMBOLIC_EARLYSTOP, Model.SYMBOLIC_FIXEDDEPS}
)


class Verdict(str, Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    ABORTED = "Aborted"


class ScenarioError(ValueError):
    """A stored scenario is malformed or causally invalid."""


@dataclass(frozen=True)
class ExplorerConfig:
    """One checker run: topology, bounds, algorithm, model variant."""

    nb_sites: int
    iters: tuple[int, ...]
    alg: AlgorithmId
    model: Model = Model.CONCRETE
    window_len: Optional[int] = None
    alphabet: int = 2
    deps: tuple[tuple[int, int], ...] = ()
    stop_at_first: bool = True
    budget_states: Optional[int] = None
    initial_text: Optional[tuple[int, ...]] = None
    threads: int = 1
    gen_pos_max: Optional[int] = None

    def __post_init__(self) -> None:
        if self.nb_sites < 2:
            raise ValueError("at least two sites are required")
        if len(self.iters) != self.nb_sites:
            raise ValueError("iters must list one local-operation count per site")
        if any(n < 0 for n in self.iters):
            raise ValueError("per-site operation counts must be non-negative")
        if self.alphabet < 1:
            raise ValueError("alphabet size must be at least 1")
        if self.window < 1:
            raise ValueError("window length must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.deps and self.model is not Model.SYMBOLIC_FIXEDDEPS:
            raise ValueError("deps are only meaningful with the symbolic-fixeddeps model")
        for a, b in self.deps:
            if a == b:
                raise ValueError(f"dependency {a}>{b} relates an operation to itself")
            if not (0 <= a < self.max_iter and 0 <= b < self.max_iter):
                raise ValueError(f"dependency {a}>{b} names an unknown operation id")
        reach = _closure(self.deps, self.max_iter)
        if reach is None:
            raise ValueError("dependency relation is cyclic")
        if self.model is Model.SYMBOLIC_FIXEDDEPS:
            offsets = _owner_offsets(self.iters)
            owner_of = {}
            for s, n in enumerate(self.iters):
                for r in range(n):
                    owner_of[offsets[s] + r] = s
            for a, b in self.deps:
                if owner_of[a] != owner_of[b]:
                    raise ValueError(
                        f"dependency {a}>{b} crosses sites; under own-operations-first "
                        "scheduling the owner of the dependent operation could never "
                        "have executed the remote ancestor before generating"
                    )
            for s, n in enumerate(self.iters):
                for i in range(n):
                    for j in range(i + 1, n):
                        a, b = offsets[s] + i, offsets[s] + j
                        if not reach[a][b]:
                            raise ValueError(
                                f"operations {a} and {b} share site {s} but are not "
                                f"declared dependent; a site's later operations causally "
                                f"follow its earlier ones (declare {a}>{b})"
                            )
        if self.initial_text is not None:
            if len(self.initial_text) > self.window:
                raise ValueError("initial text does not fit the window")
            if any(c < EMPTY or c >= self.alphabet for c in self.initial_text):
                raise ValueError("initial text cell outside the alphabet")
        if self.gen_pos_max is not None and not (0 <= self.gen_pos_max < self.window):
            raise ValueError("generation position bound must lie inside the window")

    @property
    def max_iter(self) -> int:
        return sum(self.iters)

    @property
    def window(self) -> int:
        return self.window_len if self.window_len is not None else 2 * self.max_iter

    @property
    def gen_positions(self) -> int:
        """Number of generatable positions.

        By default operations are generated at positions [0, MaxIter-1]: each
        one can be shifted right at most MaxIter-1 times, so with the default
        window of 2*MaxIter nothing ever reaches the last cell and the bounded
        window behaves exactly like the unbounded text.  Raising gen_pos_max
        (up to window-1) re-admits window-edge truncation effects.
        """
        if self.gen_pos_max is not None:
            return self.gen_pos_max + 1
        return max(1, min(self.max_iter, self.window))

    @property
    def budget(self) -> Optional[int]:
        if self.budget_states is not None:
            return self.budget_states
        if self.nb_sites > 3 or self.max_iter > 4:
            return DEFAULT_BUDGET_BEYOND_DESK_SCALE
        return None

    def initial_window(self) -> Window:
        return make_window(self.initial_text or (), self.window)


@dataclass(frozen=True, slots=True)
class SystemState:
    """A snapshot of the whole system: replicas plus the operation table."""

    sites: tuple[SiteState, ...]
    ops: tuple[Optional[StampedOp], ...]
    ns: int


@dataclass
class SearchStats:
    states_explored: int = 0
    assignments_tested: int = 0


@dataclass(frozen=True, slots=True)
class TraceStep:
    op_id: int
    kind: OpKind
    pos: int
    ch: int


@dataclass(frozen=True)
class Counterexample:
    """Two divergent stable replicas plus the replayable scenario."""

    config: ExplorerConfig
    signatures: tuple[StampedOp, ...]
    site_a: int
    site_b: int
    trace_a: tuple[TraceStep, ...]
    trace_b: tuple[TraceStep, ...]
    text_a: Window
    text_b: Window
    divergent_cells: tuple[int, ...]


@dataclass(frozen=True)
class ExploreResult:
    verdict: Verdict
    counterexample: Optional[Counterexample]
    stats: SearchStats


def stable_pair(state: SystemState, i: int, j: int) -> bool:
    """Both sites have executed every operation generated so far."""
    assert i != j
    clocks = [site.clock for site in state.sites]
    return all(
        clocks[i][k] == clocks[k][k] and clocks[j][k] == clocks[k][k]
        for k in range(len(state.sites))
    )


def _closure(deps: Sequence[tuple[int, int]], n: int) -> Optional[list[list[bool]]]:
    """Transitive closure of the declared dependency pairs; None if cyclic."""
    reach = [[False] * n for _ in range(n)]
    for a, b in deps:
        reach[a][b] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    for i in range(n):
        if reach[i][i]:
            return None
    return reach


def _clock_concurrency(ops: Sequence[Optional[StampedOp]]) -> Callable[[int, int], bool]:
    def conc(a: int, b: int) -> bool:
        oa, ob = ops[a], ops[b]
        return (
            oa.clock[oa.owner] >= ob.clock[oa.owner]
            and ob.clock[ob.owner] >= oa.clock[ob.owner]
        )

    return conc


def _deps_concurrency(reach: Sequence[Sequence[bool]]) -> Callable[[int, int], bool]:
    def conc(a: int, b: int) -> bool:
        return not reach[a][b] and not reach[b][a]

    return conc


def _owner_offsets(iters: Sequence[int]) -> list[int]:
    offsets = [0]
    for n in iters:
        offsets.append(offsets[-1] + n)
    return offsets


def _divergent_pair(
    sites: Sequence[SiteState],
) -> Optional[tuple[int, int, tuple[int, ...]]]:
    """First stable pair (ascending) with unequal texts, with differing cells."""
    n = len(sites)
    stable = []
    for i in range(n):
        clock_i = sites[i].clock
        for k in range(n):
            if clock_i[k] != sites[k].clock[k]:
                break
        else:
            stable.append(i)
    if len(stable) < 2:
        return None
    for a in range(len(stable)):
        for b in range(a + 1, len(stable)):
            i, j = stable[a], stable[b]
            if sites[i].text != sites[j].text:
                cells = tuple(
                    idx
                    for idx, (x, y) in enumerate(zip(sites[i].text, sites[j].text))
                    if x != y
                )
                return (i, j, cells)
    return None


def _trace_steps(history: Sequence[HistoryEntry]) -> tuple[TraceStep, ...]:
    return tuple(TraceStep(e.op_id, e.kind, e.pos, e.ch) for e in history)


def _build_counterexample(
    cfg: ExplorerConfig,
    ops: Sequence[Optional[StampedOp]],
    i: int,
    j: int,
    state_i: SiteState,
    state_j: SiteState,
    cells: tuple[int, ...],
) -> Counterexample:
    return Counterexample(
        config=cfg,
        signatures=tuple(op for op in ops if op is not None),
        site_a=i,
        site_b=j,
        trace_a=_trace_steps(state_i.history),
        trace_b=_trace_steps(state_j.history),
        text_a=state_i.text,
        text_b=state_j.text,
        divergent_cells=cells,
    )


class _Aborted(Exception):
    pass


class _ConcreteEngine:
    """Depth-first exploration of the concrete model and its two variants."""

    def __init__(self, cfg: ExplorerConfig, stats: SearchStats):
        self.cfg = cfg
        self.stats = stats
        self.ns_count = cfg.nb_sites
        self.iters = cfg.iters
        self.max_iter = cfg.max_iter
        self.sig_space = signature_space(cfg.gen_positions, cfg.alphabet)
        self.offsets = _owner_offsets(cfg.iters)
        self.initial = cfg.initial_window()
        self.trace_radix = self.max_iter + 1
        self.trace_span = self.trace_radix**self.max_iter
        self.op_radix = self.ns_count * len(self.sig_space) + 1
        self.preselect = cfg.model in (Model.CONCRETE_PRESELECT, Model.CONCRETE_COVERING)
        self.covering = cfg.model is Model.CONCRETE_COVERING
        self.first_ce: Optional[Counterexample] = None

    # A state node is (sites, ops, ns, ops_code, tcodes): the two trailing
    # components encode the generated signatures and the per-site executed
    # id sequences, from which everything else is reproducible; their packed
    # combination is the visited-set key.

    def _root(self):
        sites = tuple(
            SiteState(i, self.initial, (0,) * self.ns_count, ())
            for i in range(self.ns_count)
        )
        ops: tuple[Optional[StampedOp], ...]
        ops = (None,) * self.max_iter if self.preselect else ()
        return (sites, ops, 0, 0, (0,) * self.ns_count)

    def _receive_candidates(self, clocks, ops, s):
        out = []
        clock_s = clocks[s]
        n = self.ns_count
        for k in range(n):
            if k == s or clock_s[k] >= clocks[k][k]:
                continue
            op = nth_owned(ops, k, clock_s[k])
            oc = op.clock
            for j in range(n):
                if clock_s[j] < oc[j]:
                    break
            else:
                out.append(op.id)
        out.sort()
        return out

    def _transitions(self, sites, ops, ns, assignment):
        out: list[tuple] = []
        covering_sites: list[tuple[int, list[int]]] = []
        clocks = [site.clock for site in sites]
        for s in range(self.ns_count):
            can_generate = clocks[s][s] < self.iters[s]
            recvs = self._receive_candidates(clocks, ops, s)
            if self.covering and not can_generate:
                if recvs:
                    covering_sites.append((s, recvs))
            else:
                out.extend(("R", s, op_id) for op_id in recvs)
            if can_generate:
                if self.preselect:
                    out.append(("G", s, assignment[self.offsets[s] + clocks[s][s]]))
                else:
                    out.extend(("G", s, idx) for idx in range(len(self.sig_space)))
        if covering_sites:
            site_ids = [s for s, _ in covering_sites]
            for combo in itertools.product(*(choices for _, choices in covering_sites)):
                out.append(("C", tuple(zip(site_ids, combo))))
        return out

    def _child_key(self, node, tr) -> int:
        sites, _, ns, ops_code, tcodes = node
        tcodes = list(tcodes)
        if tr[0] == "R":
            _, s, op_id = tr
            tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        elif tr[0] == "G":
            _, s, sigidx = tr
            if self.preselect:
                op_id = self.offsets[s] + sites[s].clock[s]
            else:
                op_id = ns
                ops_code = ops_code * self.op_radix + (s * len(self.sig_space) + sigidx + 1)
            tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        else:
            for s, op_id in tr[1]:
                tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        key = ops_code
        for t in tcodes:
            key = key * self.trace_span + t
        return key

    def _apply(self, node, tr):
        sites, ops, ns, ops_code, tcodes = node
        tcodes = list(tcodes)
        alg = self.cfg.alg
        if tr[0] == "R":
            _, s, op_id = tr
            op = ops[op_id]
            sites = (
                sites[:s]
                + (integrate(alg, op, sites[s], ops, _clock_concurrency(ops)),)
                + sites[s + 1 :]
            )
            tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        elif tr[0] == "G":
            _, s, sigidx = tr
            kind, pos, ch = self.sig_space[sigidx]
            if self.preselect:
                op_id = self.offsets[s] + sites[s].clock[s]
            else:
                op_id = ns
                ops_code = ops_code * self.op_radix + (s * len(self.sig_space) + sigidx + 1)
                ns += 1
                self.stats.assignments_tested += 1
            op = StampedOp(op_id, s, sites[s].clock, OpSignature(kind, pos, ch))
            if self.preselect:
                ops = ops[:op_id] + (op,) + ops[op_id + 1 :]
            else:
                ops = ops + (op,)
            sites = (
                sites[:s]
                + (integrate(alg, op, sites[s], ops, _clock_concurrency(ops)),)
                + sites[s + 1 :]
            )
            tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        else:
            conc = _clock_concurrency(ops)
            for s, op_id in tr[1]:
                op = ops[op_id]
                sites = sites[:s] + (integrate(alg, op, sites[s], ops, conc),) + sites[s + 1 :]
                tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        return (sites, ops, ns, ops_code, tuple(tcodes))

    def _is_terminal(self, sites) -> bool:
        return all(len(site.history) == self.max_iter for site in sites)

    def _dfs(
        self,
        assignment: Optional[tuple[int, ...]],
        branch_slice: Optional[Sequence[int]] = None,
    ) -> Optional[Verdict]:
        cfg = self.cfg
        budget = cfg.budget
        root = self._root()
        visited = {0}
        self.stats.states_explored += 1
        stack = [root]
        first_level = True
        while stack:
            node = stack.pop()
            trs = self._transitions(node[0], node[1], node[2], assignment)
            if not trs and not self._is_terminal(node[0]):
                raise AssertionError("scheduler stalled: no enabled step in a non-terminal state")
            if first_level and branch_slice is not None:
                trs = [tr for idx, tr in enumerate(trs) if idx in branch_slice]
            first_level = False
            fresh = []
            for tr in trs:
                key = self._child_key(node, tr)
                if key in visited:
                    continue
                visited.add(key)
                if budget is not None and self.stats.states_explored >= budget:
                    raise _Aborted()
                child = self._apply(node, tr)
                self.stats.states_explored += 1
                hit = _divergent_pair(child[0])
                if hit is not None:
                    i, j, cells = hit
                    if self.first_ce is None:
                        self.first_ce = _build_counterexample(
                            cfg, child[1], i, j, child[0][i], child[0][j], cells
                        )
                    if cfg.stop_at_first:
                        return Verdict.DIVERGED
                fresh.append(child)
            stack.extend(reversed(fresh))
        return None

    def run(
        self, branch_slice: Optional[Sequence[int]] = None
    ) -> tuple[Verdict, Optional[Counterexample]]:
        try:
            if self.preselect:
                assignments: Iterable[tuple[int, ...]] = itertools.product(
                    range(len(self.sig_space)), repeat=self.max_iter
                )
                for rank, assignment in enumerate(assignments):
                    if branch_slice is not None and rank not in branch_slice:
                        continue
                    self.stats.assignments_tested += 1
                    if self._dfs(assignment) is Verdict.DIVERGED:
                        return (Verdict.DIVERGED, self.first_ce)
            else:
                if self._dfs(None, branch_slice) is Verdict.DIVERGED:
                    return (Verdict.DIVERGED, self.first_ce)
        except _Aborted:
            return (Verdict.ABORTED, self.first_ce)
        if self.first_ce is not None:
            return (Verdict.DIVERGED, self.first_ce)
        return (Verdict.CONVERGED, None)


class _SymbolicEngine:
    """Trace-space exploration; signatures are swept at complete trace sets."""

    def __init__(self, cfg: ExplorerConfig, stats: SearchStats):
        self.cfg = cfg
        self.stats = stats
        self.ns_count = cfg.nb_sites
        self.iters = cfg.iters
        self.max_iter = cfg.max_iter
        self.offsets = _owner_offsets(cfg.iters)
        self.fixed = cfg.model is Model.SYMBOLIC_FIXEDDEPS
        self.prenumber = cfg.model in (Model.SYMBOLIC_PRENUMBER, Model.SYMBOLIC_FIXEDDEPS)
        self.earlystop = cfg.model is Model.SYMBOLIC_EARLYSTOP
        self.trace_radix = self.max_iter + 1
        self.trace_span = self.trace_radix**self.max_iter
        self.reach = _closure(cfg.deps, self.max_iter) if self.fixed else None
        self.sweeper = Sweeper(
            cfg.alg, cfg.gen_positions, cfg.alphabet, self.max_iter, cfg.initial_window()
        )
        self.first_ce: Optional[Counterexample] = None

    def _root(self):
        if self.prenumber:
            ops: tuple = tuple(
                StampedOp(self.offsets[s] + r, s, None, None)
                for s in range(self.ns_count)
                for r in range(self.iters[s])
            )
        else:
            ops = ()
        clocks = tuple((0,) * self.ns_count for _ in range(self.ns_count))
        return (ops, clocks, ((),) * self.ns_count, 0, (0,) * self.ns_count)

    def _transitions(self, ops, clocks, traces):
        out: list[tuple] = []
        if self.fixed:
            executed = [set(t) for t in traces]
            reach = self.reach
            for s in range(self.ns_count):
                own_done = sum(
                    1 for o in traces[s] if self.offsets[s] <= o < self.offsets[s + 1]
                )
                if own_done < self.iters[s]:
                    # Generate own operations first: the generation context is
                    # then exactly the op's declared ancestors, so the relation
                    # under which it is later transformed matches the state it
                    # was generated on.
                    out.append(("R", s, self.offsets[s] + own_done))
                    continue
                candidates = []
                for op in ops:
                    y = op.id
                    if y in executed[s] or op.owner == s:
                        continue
                    if any(reach[d][y] and d not in executed[s] for d in range(self.max_iter)):
                        continue
                    if y not in executed[op.owner]:
                        continue  # not broadcast yet: owner has not executed it
                    candidates.append(y)
                out.extend(("R", s, y) for y in sorted(candidates))
            return out
        for s in range(self.ns_count):
            recvs = []
            for k in range(self.ns_count):
                if k != s and ready(s, k, clocks, ops, self.iters):
                    recvs.append(nth_owned(ops, k, clocks[s][k]).id)
            out.extend(("R", s, op_id) for op_id in sorted(recvs))
            if clocks[s][s] < self.iters[s]:
                out.append(("G", s))
        return out

    def _child_key(self, node, tr) -> int:
        ops, clocks, _, ops_code, tcodes = node
        tcodes = list(tcodes)
        if tr[0] == "G":
            s = tr[1]
            if self.prenumber:
                op_id = self.offsets[s] + clocks[s][s]
            else:
                op_id = len(ops)
                ops_code = ops_code * (self.ns_count + 1) + s + 1
            tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        else:
            _, s, op_id = tr
            tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        key = ops_code
        for t in tcodes:
            key = key * self.trace_span + t
        return key

    def _apply(self, node, tr):
        ops, clocks, traces, ops_code, tcodes = node
        tcodes = list(tcodes)
        if tr[0] == "G":
            s = tr[1]
            if self.prenumber:
                op_id = self.offsets[s] + clocks[s][s]
                ops = tuple(
                    replace(op, clock=clocks[s]) if op.id == op_id else op for op in ops
                )
            else:
                op_id = len(ops)
                ops = ops + (StampedOp(op_id, s, clocks[s], None),)
                ops_code = ops_code * (self.ns_count + 1) + s + 1
            clocks = self._tick(clocks, s, s)
        else:
            _, s, op_id = tr
            if not self.fixed:
                clocks = self._tick(clocks, s, ops[op_id].owner)
        traces = traces[:s] + (traces[s] + (op_id,),) + traces[s + 1 :]
        tcodes[s] = tcodes[s] * self.trace_radix + op_id + 1
        return (ops, clocks, traces, ops_code, tuple(tcodes))

    @staticmethod
    def _tick(clocks, s, k):
        row = clocks[s]
        row = row[:k] + (row[k] + 1,) + row[k + 1 :]
        return clocks[:s] + (row,) + clocks[s + 1 :]

    def _complete_sites(self, traces):
        return [s for s in range(self.ns_count) if len(traces[s]) == self.max_iter]

    def _conc(self, ops):
        if self.fixed:
            return _deps_concurrency(self.reach)
        return _clock_concurrency(ops)

    def _sweep(self, ops, traces, pairs) -> Optional[Counterexample]:
        conc = self._conc(ops)
        conc_key = ("deps", self.cfg.deps) if self.fixed else "clocks"
        hit = self.sweeper.first_violation(ops, traces, pairs, conc, conc_key)
        if hit is None:
            self.stats.assignments_tested += self.sweeper.total
            return None
        rank, i, j = hit
        self.stats.assignments_tested += rank + 1
        assignment = self.sweeper.unrank(rank)
        sigged: list[Optional[StampedOp]] = [None] * self.max_iter
        for op in ops:
            kind, pos, ch = assignment[op.id]
            sigged[op.id] = StampedOp(op.id, op.owner, op.clock, OpSignature(kind, pos, ch))
        conc = self._conc(sigged)
        replayed = {}
        for site_id in (i, j):
            site = SiteState(site_id, self.cfg.initial_window(), (0,) * self.ns_count, ())
            for op_id in traces[site_id]:
                site = integrate(self.cfg.alg, sigged[op_id], site, sigged, conc)
            replayed[site_id] = site
        cells = tuple(
            idx
            for idx, (x, y) in enumerate(zip(replayed[i].text, replayed[j].text))
            if x != y
        )
        assert cells, "sweep reported a divergence the reference replay does not show"
        return _build_counterexample(
            self.cfg, sigged, i, j, replayed[i], replayed[j], cells
        )

    def run(
        self, branch_slice: Optional[Sequence[int]] = None
    ) -> tuple[Verdict, Optional[Counterexample]]:
        cfg = self.cfg
        budget = cfg.budget
        root = self._root()
        visited = {0}
        self.stats.states_explored += 1
        stack = [root]
        first_level = True
        try:
            while stack:
                node = stack.pop()
                trs = self._transitions(node[0], node[1], node[2])
                if not trs:
                    if len(self._complete_sites(node[2])) != self.ns_count:
                        raise AssertionError(
                            "scheduler stalled: no enabled step in a non-terminal state"
                        )
                    continue
                if first_level and branch_slice is not None:
                    trs = [tr for idx, tr in enumerate(trs) if idx in branch_slice]
                first_level = False
                fresh = []
                for tr in trs:
                    key = self._child_key(node, tr)
                    if key in visited:
                        continue
                    visited.add(key)
                    if budget is not None and self.stats.states_explored >= budget:
                        raise _Aborted()
                    child = self._apply(node, tr)
                    self.stats.states_explored += 1
                    complete = self._complete_sites(child[2])
                    if (self.earlystop and len(complete) >= 2) or len(complete) == self.ns_count:
                        if self.earlystop:
                            pairs = [
                                (complete[a], complete[b])
                                for a in range(len(complete))
                                for b in range(a + 1, len(complete))
                            ]
                        else:
                            pairs = [
                                (a, b)
                                for a in range(self.ns_count)
                                for b in range(a + 1, self.ns_count)
                            ]
                        ce = self._sweep(child[0], child[2], pairs)
                        if ce is not None:
                            if self.first_ce is None:
                                self.first_ce = ce
                            if cfg.stop_at_first:
                                return (Verdict.DIVERGED, self.first_ce)
                        continue  # construction halts below swept states
                    fresh.append(child)
                stack.extend(reversed(fresh))
        except _Aborted:
            return (Verdict.ABORTED, self.first_ce)
        if self.first_ce is not None:
            return (Verdict.DIVERGED, self.first_ce)
        return (Verdict.CONVERGED, None)


def explore(cfg: ExplorerConfig) -> ExploreResult:
    """Run the configured model; dispatches the concrete vs symbolic families."""
    if cfg.threads > 1:
        from . import parallel

        return parallel.explore_parallel(cfg)
    stats = SearchStats()
    if cfg.model in CONCRETE_MODELS:
        verdict, ce = _ConcreteEngine(cfg, stats).run()
    else:
        verdict, ce = _SymbolicEngine(cfg, stats).run()
    return ExploreResult(verdict, ce, stats)


def explore_branches(cfg: ExplorerConfig, branch_slice: Sequence[int]) -> ExploreResult:
    """Explore only the given top-level branches (parallel worker entry)."""
    cfg = replace(cfg, threads=1)
    stats = SearchStats()
    if cfg.model in CONCRETE_MODELS:
        verdict, ce = _ConcreteEngine(cfg, stats).run(branch_slice=branch_slice)
    else:
        verdict, ce = _SymbolicEngine(cfg, stats).run(branch_slice=branch_slice)
    return ExploreResult(verdict, ce, stats)


def count_top_branches(cfg: ExplorerConfig) -> int:
    """Number of first-level branches the parallel driver may split over."""
    stats = SearchStats()
    if cfg.model in (Model.CONCRETE_PRESELECT, Model.CONCRETE_COVERING):
        return (cfg.gen_positions * (cfg.alphabet + 1)) ** cfg.max_iter
    if cfg.model in CONCRETE_MODELS:
        eng = _ConcreteEngine(cfg, stats)
        root = eng._root()
        return len(eng._transitions(root[0], root[1], root[2], None))
    seng = _SymbolicEngine(cfg, stats)
    sroot = seng._root()
    return len(seng._transitions(sroot[0], sroot[1], sroot[2]))


def explore_concrete(cfg: ExplorerConfig) -> ExploreResult:
    if cfg.model not in CONCRETE_MODELS:
        raise ValueError(f"{cfg.model.value} is not a concrete-family model")
    return explore(cfg)


def explore_symbolic(cfg: ExplorerConfig) -> ExploreResult:
    if cfg.model not in SYMBOLIC_MODELS:
        raise ValueError(f"{cfg.model.value} is not a symbolic-family model")
    return explore(cfg)


def derouler(
    cfg: ExplorerConfig,
    ops: Sequence[StampedOp],
    traces: Sequence[Sequence[int]],
    pairs: Optional[Sequence[tuple[int, int]]] = None,
) -> Optional[Counterexample]:
    """Sweep every signature assignment over complete traces; first violation.

    ``ops`` carry owners and clocks only (signatures are ignored); ``pairs``
    defaults to every pair among the traced sites.
    """
    stats = SearchStats()
    engine = _SymbolicEngine(replace(cfg, model=_sweep_model(cfg.model)), stats)
    traces = tuple(tuple(t) for t in traces)
    if pairs is None:
        pairs = [
            (i, j)
            for i in range(cfg.nb_sites)
            for j in range(i + 1, cfg.nb_sites)
            if len(traces[i]) == cfg.max_iter and len(traces[j]) == cfg.max_iter
        ]
    return engine._sweep(tuple(ops), traces, list(pairs))


def _sweep_model(model: Model) -> Model:
    return model if model in SYMBOLIC_MODELS else Model.SYMBOLIC


# -- scenario replay ---------------------------------------------------------


def replay_scenario(ce: Counterexample) -> dict[int, SiteState]:
    """Re-execute a stored scenario; returns the final replica per listed site.

    Causally invalid traces are rejected with a diagnostic naming the violated
    dependency.
    """
    cfg = ce.config
    ops: list[Optional[StampedOp]] = [None] * cfg.max_iter
    for op in ce.signatures:
        if not (0 <= op.id < cfg.max_iter):
            raise ScenarioError(f"signature id {op.id} out of range")
        ops[op.id] = op
    listed = [(ce.site_a, ce.trace_a), (ce.site_b, ce.trace_b)]
    if cfg.model is Model.SYMBOLIC_FIXEDDEPS:
        reach = _closure(cfg.deps, cfg.max_iter)
        assert reach is not None
        conc = _deps_concurrency(reach)
        ordered = [
            (a, b) for a in range(cfg.max_iter) for b in range(cfg.max_iter) if reach[a][b]
        ]
    else:
        for op in ce.signatures:
            if op.clock is None:
                raise ScenarioError(f"signature {op.id} carries no clock")
        conc = _clock_concurrency(ops)
        ordered = [
            (a.id, b.id)
            for a in ce.signatures
            for b in ce.signatures
            if a.id != b.id and b.clock[a.owner] > a.clock[a.owner]
        ]
    for site_id, steps in listed:
        ids = [st.op_id for st in steps]
        if sorted(ids) != list(range(cfg.max_iter)):
            raise ScenarioError(
                f"site {site_id} is not stable: trace must execute every operation exactly once"
            )
        position = {op_id: idx for idx, op_id in enumerate(ids)}
        for a, b in ordered:
            if position[a] > position[b]:
                raise ScenarioError(
                    f"scenario violates dependency {a}->{b} at site {site_id}: "
                    f"operation {b} executed before operation {a}"
                )
    out: dict[int, SiteState] = {}
    for site_id, steps in listed:
        site = SiteState(site_id, cfg.initial_window(), (0,) * cfg.nb_sites, ())
        for st in steps:
            op = ops[st.op_id]
            assert op is not None
            site = integrate(cfg.alg, op, site, ops, conc)
        out[site_id] = site
    return out


def validate_causal_delivery(
    ops: Sequence[StampedOp], traces: Sequence[Sequence[int]]
) -> None:
    """Assert the happened-before order is respected by every trace."""
    violation = causal_delivery_violation(ops, traces)
    assert violation is None, (
        f"operation {violation[0]} -> {violation[1]} but executed after it "
        f"at site {violation[2]}"
    )
