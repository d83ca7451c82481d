"""Deferred signature sweep over complete symbolic traces.

Given an operation table (owners and clocks, signatures unassigned) and the
complete execution traces of the sites under comparison, the sweep tests
every signature assignment in canonical order (operation-id-major, signatures
ordered by (kind, pos, ch) with Del < Ins) and reports the first assignment
on which two compared replicas end up different.

The enumeration is organized per (site, trace) as a prefix tree in trace
order: each tree node integrates one operation under one candidate signature,
and each leaf stores the packed final window into an array indexed by the
canonical assignment rank.  Comparing two replicas is then an elementwise
array comparison whose first mismatch *is* the canonically-first violating
assignment.  Per-trace arrays and per-pair verdicts are cached, so repeated
trace sets across the search cost one array comparison per pair.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .causality import StampedOp
from .doc_state import OpKind, OpSignature, Window, apply_kpc
from .integration import HistoryEntry, transform_against_history
from .transform import AlgorithmId, TransformableOp, operand

IsConcurrent = Callable[[int, int], bool]

SigTriple = tuple[OpKind, int, int]


def signature_space(positions: int, alphabet: int) -> list[SigTriple]:
    """All generatable signatures, lexicographic by (kind, pos, ch)."""
    dels: list[SigTriple] = [(OpKind.DEL, p, 0) for p in range(positions)]
    inss: list[SigTriple] = [(OpKind.INS, p, c) for p in range(positions) for c in range(alphabet)]
    return dels + inss


class Sweeper:
    """Holds sweep caches for one explorer run."""

    def __init__(
        self,
        alg: AlgorithmId,
        positions: int,
        alphabet: int,
        max_iter: int,
        initial: Window,
    ):
        self.alg = alg
        self.positions = positions
        self.alphabet = alphabet
        self.max_iter = max_iter
        self.initial = initial
        self.sig_space = signature_space(positions, alphabet)
        self.base = len(self.sig_space)
        self.total = self.base**max_iter
        self._oracles: dict = {}

    def unrank(self, rank: int) -> tuple[SigTriple, ...]:
        """Canonical assignment for a rank: signature triple per op id."""
        digits = []
        for i in range(self.max_iter):
            weight = self.base ** (self.max_iter - 1 - i)
            digits.append(self.sig_space[(rank // weight) % self.base])
        return tuple(digits)

    def first_violation(
        self,
        ops: Sequence[StampedOp],
        traces: Sequence[tuple[int, ...]],
        pairs: Sequence[tuple[int, int]],
        conc: IsConcurrent,
        conc_key: object,
    ) -> Optional[tuple[int, int, int]]:
        """First (assignment rank, site i, site j) violating convergence.

        Iterating assignments outer and pairs inner, as the atomic sweep does;
        returns None when every assignment converges on every pair.
        """
        okey = (conc_key, tuple((op.id, op.owner, op.clock) for op in ops))
        oracle = self._oracles.get(okey)
        if oracle is None:
            oracle = _Oracle(self, ops, conc)
            self._oracles[okey] = oracle
        best: Optional[tuple[int, int, int, int]] = None
        for order, (i, j) in enumerate(pairs):
            if traces[i] == traces[j]:
                continue  # identical executions can never differ
            hit = oracle.first_divergence(i, traces[i], j, traces[j])
            if hit is not None and (best is None or (hit, order) < (best[0], best[1])):
                best = (hit, order, i, j)
        if best is None:
            return None
        return (best[0], best[2], best[3])


class _Oracle:
    """Per operation-table cache of packed replay outcomes."""

    def __init__(self, sweeper: Sweeper, ops: Sequence[StampedOp], conc: IsConcurrent):
        self.sw = sweeper
        self.conc = conc
        self.owners = {op.id: op.owner for op in ops}
        self.clocks = {op.id: op.clock for op in ops}
        self.bits = max(1, sweeper.alphabet.bit_length())
        self.packable = self.bits * len(sweeper.initial) <= 63
        m = sweeper.max_iter
        self.weights = [sweeper.base ** (m - 1 - i) for i in range(m)]
        # Pre-built per (op id, signature) operands; the working table below is
        # what the transform reads for original signatures during rebuilds.
        self.variants: dict[int, list[tuple[StampedOp, TransformableOp]]] = {}
        for op in ops:
            row = []
            for kind, pos, ch in sweeper.sig_space:
                stamped = StampedOp(op.id, op.owner, op.clock, OpSignature(kind, pos, ch))
                row.append((stamped, operand(stamped)))
            self.variants[op.id] = row
        self.working: list[Optional[StampedOp]] = [None] * m
        self._texts: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}
        self._pairs: dict[tuple, Optional[int]] = {}

    def _pack(self, text: Window):
        if not self.packable:
            return text
        code = 0
        for i, c in enumerate(text):
            code |= (c + 1) << (i * self.bits)
        return code

    def texts(self, pid: int, trace: tuple[int, ...]) -> np.ndarray:
        cached = self._texts.get((pid, trace))
        if cached is not None:
            return cached
        dtype = np.uint64 if self.packable else object
        out = np.empty(self.sw.total, dtype=dtype)
        self._fill(pid, trace, 0, self.sw.initial, [], 0, out)
        self._texts[(pid, trace)] = out
        return out

    def _fill(self, pid, trace, depth, text, history, rank, out) -> None:
        if depth == len(trace):
            out[rank] = self._pack(text)
            return
        op_id = trace[depth]
        weight = self.weights[op_id]
        local = self.owners[op_id] == pid
        working = self.working
        alg = self.sw.alg
        for sigidx, (stamped, top) in enumerate(self.variants[op_id]):
            working[op_id] = stamped
            if local or not history:
                t = top
            else:
                t = transform_against_history(alg, top, history, working, self.conc)
            history.append(HistoryEntry(t.op_id, t.kind, t.pos, t.ch, t.av, t.ap))
            self._fill(
                pid,
                trace,
                depth + 1,
                apply_kpc(text, t.kind, t.pos, t.ch),
                history,
                rank + sigidx * weight,
                out,
            )
            history.pop()
        working[op_id] = None

    def first_divergence(
        self, pid_i: int, ti: tuple[int, ...], pid_j: int, tj: tuple[int, ...]
    ) -> Optional[int]:
        key = (pid_i, ti, pid_j, tj)
        if key in self._pairs:
            return self._pairs[key]
        a = self.texts(pid_i, ti)
        b = self.texts(pid_j, tj)
        mismatch = np.flatnonzero(a != b)
        hit = int(mismatch[0]) if mismatch.size else None
        self._pairs[key] = hit
        return hit
