"""Exact rewrite rules on pulse sequences, normalization and replayable traces.

Every rule preserves the sequence unitary exactly.  A SWAP is the t = 1
pulse, equal to -P_ij, so moving one past another pulse only relabels that
pulse and no phase bookkeeping is needed.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from xpulse.pulse_sequence import PulseSequence, from_document, to_document
from xpulse.spin_system import ExchangePulse, permutation_operator

RULES = ("SwapCommute", "MergeSplit", "SwapPairInsert", "SwapPairRemove", "ThreeSwapReduce", "DropZeroPulse")
EXACT_TOL = 1e-12


class RewriteError(ValueError):
    """A rule does not apply at the requested position."""


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    position: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rule not in RULES:
            raise RewriteError(f"unknown rule {self.rule!r}")

    def to_document(self) -> dict:
        return {"rule": self.rule, "position": self.position, "params": dict(self.params)}

    @classmethod
    def from_document(cls, doc: dict) -> "RewriteStep":
        params = dict(doc.get("params", {}))
        if "pair" in params:
            params["pair"] = tuple(params["pair"])
        return cls(doc["rule"], int(doc["position"]), params)


def _pulse(i: int, j: int, t: float) -> ExchangePulse:
    return ExchangePulse(min(i, j), max(i, j), t)


def _swap(pair) -> ExchangePulse:
    return _pulse(pair[0], pair[1], 1.0)


def _relabel(p: ExchangePulse, pair) -> ExchangePulse:
    a, b = pair
    m = {a: b, b: a}
    return _pulse(m.get(p.i, p.i), m.get(p.j, p.j), p.t)


def _need(seq: PulseSequence, k: int, count: int, step: RewriteStep) -> None:
    if not 0 <= k <= len(seq) - count:
        raise RewriteError(f"{step.rule} at position {k}: needs {count} pulses, sequence has {len(seq)}")


def _fail(step: RewriteStep, why: str):
    raise RewriteError(f"{step.rule} at position {step.position}: {why}")


def apply_step(seq: PulseSequence, step: RewriteStep) -> PulseSequence:
    """Apply one rule; the result may hold non-neighbour pulses and is marked rewritten."""
    k, ps, par = step.position, list(seq.pulses), step.params
    rule = step.rule
    if rule == "SwapCommute":
        _need(seq, k, 2, step)
        direction = par.get("direction", "right")
        if direction == "right":
            s, x = ps[k], ps[k + 1]
            if not s.is_swap:
                _fail(step, f"pulse {k} is not a SWAP")
            ps[k : k + 2] = [_relabel(x, s.pair), _pulse(*s.pair, 1.0)]
        elif direction == "left":
            x, s = ps[k], ps[k + 1]
            if not s.is_swap:
                _fail(step, f"pulse {k + 1} is not a SWAP")
            ps[k : k + 2] = [_pulse(*s.pair, 1.0), _relabel(x, s.pair)]
        else:
            _fail(step, f"direction must be 'right' or 'left', got {direction!r}")
    elif rule == "MergeSplit":
        mode = par.get("mode", "merge")
        if mode == "merge":
            _need(seq, k, 2, step)
            a, b = ps[k], ps[k + 1]
            if a.pair != b.pair:
                _fail(step, f"pulses act on {a.pair} and {b.pair}, not the same pair")
            ps[k : k + 2] = [_pulse(*a.pair, a.t + b.t)]
        elif mode == "split":
            _need(seq, k, 1, step)
            if "t_first" not in par:
                _fail(step, "split needs t_first")
            a, t1 = ps[k], float(par["t_first"])
            ps[k : k + 1] = [_pulse(*a.pair, t1), _pulse(*a.pair, a.t - t1)]
        else:
            _fail(step, f"mode must be 'merge' or 'split', got {mode!r}")
    elif rule == "SwapPairInsert":
        if not 0 <= k <= len(ps):
            _fail(step, f"insert position outside 0..{len(ps)}")
        pair = tuple(par.get("pair", ()))
        if len(pair) != 2 or pair[0] == pair[1] or max(pair) >= seq.n_spins or min(pair) < 0:
            _fail(step, f"invalid pair {pair!r}")
        ps[k:k] = [_swap(pair), _swap(pair)]
    elif rule == "SwapPairRemove":
        _need(seq, k, 2, step)
        a, b = ps[k], ps[k + 1]
        if not (a.is_swap and b.is_swap and a.pair == b.pair):
            _fail(step, "pulses are not two SWAPs on the same pair")
        del ps[k : k + 2]
    elif rule == "ThreeSwapReduce":
        mode = par.get("mode", "reduce")
        if mode == "reduce":
            _need(seq, k, 3, step)
            a, b, c = ps[k : k + 3]
            if not (a.is_swap and b.is_swap and c.is_swap and a.pair == c.pair):
                _fail(step, "pattern is not SWAP(i j) SWAP(j k) SWAP(i j)")
            shared = set(a.pair) & set(b.pair)
            if len(shared) != 1:
                _fail(step, "outer and middle SWAPs must share exactly one spin")
            ends = (set(a.pair) | set(b.pair)) - shared
            ps[k : k + 3] = [_swap(sorted(ends))]
        elif mode == "expand":
            _need(seq, k, 1, step)
            a = ps[k]
            m = par.get("middle")
            if not a.is_swap:
                _fail(step, f"pulse {k} is not a SWAP")
            if m is None or m in a.pair or not 0 <= m < seq.n_spins:
                _fail(step, f"middle spin {m!r} must be a third spin of the register")
            i, j = a.pair
            ps[k : k + 1] = [_swap((i, m)), _swap((m, j)), _swap((i, m))]
        else:
            _fail(step, f"mode must be 'reduce' or 'expand', got {mode!r}")
    elif rule == "DropZeroPulse":
        mode = par.get("mode", "drop")
        if mode == "drop":
            _need(seq, k, 1, step)
            if not ps[k].is_zero:
                _fail(step, f"pulse {k} has duration {ps[k].t}, not zero")
            del ps[k]
        elif mode == "insert":
            if not 0 <= k <= len(ps):
                _fail(step, f"insert position outside 0..{len(ps)}")
            pair = tuple(par.get("pair", ()))
            if len(pair) != 2 or pair[0] == pair[1]:
                _fail(step, f"invalid pair {pair!r}")
            ps[k:k] = [_pulse(*pair, 0.0)]
        else:
            _fail(step, f"mode must be 'drop' or 'insert', got {mode!r}")
    return seq.with_pulses(ps, rewritten=True)


def verify_step(seq: PulseSequence, step: RewriteStep, claimed: PulseSequence | None = None,
                tol: float = EXACT_TOL) -> bool:
    """Exact unitary equality of ``seq`` and the rewritten (or claimed) sequence."""
    try:
        after = apply_step(seq, step) if claimed is None else claimed
    except RewriteError:
        return False
    return bool(np.abs(seq.unitary() - after.unitary()).max() < tol)


def inverse_step(before: PulseSequence, step: RewriteStep) -> RewriteStep:
    """Step undoing ``step``, which was applied to ``before``."""
    k, par, rule = step.position, step.params, step.rule
    if rule == "SwapCommute":
        back = "left" if par.get("direction", "right") == "right" else "right"
        return RewriteStep(rule, k, {"direction": back})
    if rule == "MergeSplit":
        if par.get("mode", "merge") == "merge":
            return RewriteStep(rule, k, {"mode": "split", "t_first": before[k].t})
        return RewriteStep(rule, k, {"mode": "merge"})
    if rule == "SwapPairInsert":
        return RewriteStep("SwapPairRemove", k)
    if rule == "SwapPairRemove":
        return RewriteStep("SwapPairInsert", k, {"pair": before[k].pair})
    if rule == "ThreeSwapReduce":
        if par.get("mode", "reduce") == "reduce":
            middle = (set(before[k].pair) & set(before[k + 1].pair)).pop()
            return RewriteStep(rule, k, {"mode": "expand", "middle": middle})
        return RewriteStep(rule, k, {"mode": "reduce"})
    if par.get("mode", "drop") == "drop":
        return RewriteStep(rule, k, {"mode": "insert", "pair": before[k].pair})
    return RewriteStep(rule, k, {"mode": "drop"})


def replay(start: PulseSequence, steps) -> PulseSequence:
    seq = start
    for step in steps:
        seq = apply_step(seq, step)
    return seq


# ---------------------------------------------------------------------------
# normalization


class _Recorder:
    def __init__(self, seq: PulseSequence):
        self.seq = seq.with_pulses(seq.pulses, rewritten=True)
        self.steps: list[RewriteStep] = []

    def do(self, rule: str, position: int, **params) -> None:
        step = RewriteStep(rule, position, params)
        self.seq = apply_step(self.seq, step)
        self.steps.append(step)


def _word_start(pulses) -> int:
    k = len(pulses)
    while k > 0 and pulses[k - 1].is_swap:
        k -= 1
    return k


def _split_long(rec: _Recorder) -> bool:
    for k, p in enumerate(rec.seq.pulses):
        if 1.0 + 1e-12 < p.t < 2.0 - 1e-12:
            rec.do("MergeSplit", k, mode="split", t_first=p.t - 1.0)
            return True
    return False


def _sink_swaps(rec: _Recorder) -> bool:
    """Commute the rightmost SWAP that still precedes a non-SWAP to the trailing word."""
    ps = rec.seq.pulses
    w = _word_start(ps)
    cand = [k for k in range(w) if ps[k].is_swap]
    if not cand:
        return False
    k = cand[-1]
    while k < _word_start(rec.seq.pulses):
        rec.do("SwapCommute", k, direction="right")
        k += 1
    return True


def _merge_core(rec: _Recorder) -> bool:
    ps = rec.seq.pulses
    w = _word_start(ps)
    for k in range(w):
        if ps[k].is_zero:
            rec.do("DropZeroPulse", k, mode="drop")
            return True
    for k in range(w - 1):
        if ps[k].pair == ps[k + 1].pair:
            rec.do("MergeSplit", k, mode="merge")
            return True
    return False


def _canonical_word(rec: _Recorder) -> None:
    """Rewrite the trailing SWAP word into its unique canonical form.

    For each spin v from the top down, SWAPs not touching v are commuted to the
    left and the SWAPs touching v are fused into at most one, which then stays
    at the end.  The result is (v1 a1)(v2 a2)... with v ascending and a < v.
    """
    lo = _word_start(rec.seq.pulses)
    hi = len(rec.seq)
    for v in range(rec.seq.n_spins - 1, -1, -1):
        changed = True
        while changed:
            changed = False
            ps = rec.seq.pulses
            for k in range(lo, hi - 1):
                if v in ps[k].pair and v not in ps[k + 1].pair:
                    rec.do("SwapCommute", k, direction="left")
                    changed = True
                    break
        m = lo
        while m < hi and v not in rec.seq.pulses[m].pair:
            m += 1
        while hi - m >= 2:
            a, b = rec.seq.pulses[m], rec.seq.pulses[m + 1]
            if a.pair == b.pair:
                rec.do("SwapPairRemove", m)
                hi -= 2
            else:
                rec.do("SwapCommute", m, direction="right")
                m += 1
        if hi - m == 1:
            hi -= 1


@dataclass(frozen=True)
class NormalizeResult:
    core: PulseSequence
    residual: PulseSequence  # trailing SWAP word, acting after the core
    permutation: tuple
    steps: tuple
    rewritten: PulseSequence  # core followed by residual, the literal end of ``steps``

    @property
    def absorbable(self) -> bool:
        return residual_is_local(self.permutation)


def word_permutation(n: int, pulses) -> tuple:
    """perm[k] = final position of the state that started on spin k."""
    perm = list(range(n))
    for p in pulses:
        perm = [p.j if x == p.i else p.i if x == p.j else x for x in perm]
    return tuple(perm)


def residual_is_local(perm, triples=((0, 1, 2), (3, 4, 5))) -> bool:
    """True when every qubit triple is mapped onto itself."""
    n = len(perm)
    for tri in triples:
        if max(tri) >= n:
            continue
        if {perm[k] for k in tri} != set(tri):
            return False
    return True


def normalize(seq: PulseSequence, layout="complete", split_long: bool = False) -> NormalizeResult:
    """Reduce ``seq`` by exact rewrites.

    ``complete``: every SWAP is commuted to the end, neighbouring same-pair pulses are merged and
    zero pulses dropped, to a fixpoint; the trailing SWAP word is then put in
    canonical form.  With ``split_long`` durations in (1, 2) are first split
    into t - 1 and a SWAP, which gives every equivalent arrangement of the same
    core one normal form.  ``linear``: merging and zero-dropping only.
    unitary(seq) = unitary(residual) @ unitary(core) holds exactly.
    """
    rec = _Recorder(seq)
    if layout == "complete":
        while (split_long and _split_long(rec)) or _sink_swaps(rec) or _merge_core(rec):
            pass
        _canonical_word(rec)
    elif layout == "linear":
        changed = True
        while changed:
            changed = False
            ps = rec.seq.pulses
            for k, p in enumerate(ps):
                if p.is_zero:
                    rec.do("DropZeroPulse", k, mode="drop")
                    changed = True
                    break
                if k + 1 < len(ps) and ps[k + 1].pair == p.pair:
                    rec.do("MergeSplit", k, mode="merge")
                    changed = True
                    break
    else:
        raise ValueError(f"normalize supports 'complete' or 'linear', got {layout!r}")
    ps = rec.seq.pulses
    w = _word_start(ps) if layout == "complete" else len(ps)
    core = PulseSequence(seq.n_spins, ps[:w], layout, rewritten=layout != "complete")
    residual = PulseSequence(seq.n_spins, ps[w:], layout, rewritten=True)
    perm = word_permutation(seq.n_spins, residual.pulses)
    return NormalizeResult(core, residual, perm, tuple(rec.steps), rec.seq)


def residual_operator(result: NormalizeResult) -> np.ndarray:
    """(-1)^k times the permutation operator of the k-SWAP residual word."""
    return (-1) ** len(result.residual) * permutation_operator(result.core.n_spins, result.permutation)


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class RewriteTrace:
    start: PulseSequence
    steps: tuple
    end: PulseSequence
    residual: PulseSequence  # pulses after ``end`` in the replayed sequence

    def replay(self) -> PulseSequence:
        return replay(self.start, self.steps)

    def check(self, tol: float = 1e-12) -> bool:
        """Replay reproduces end + residual pulse by pulse."""
        out = self.replay()
        want = self.end.pulses + self.residual.pulses
        return len(out) == len(want) and all(p.same_as(q, tol) for p, q in zip(out.pulses, want))

    def to_document(self) -> dict:
        return {
            "start": to_document(self.start),
            "steps": [s.to_document() for s in self.steps],
            "end": to_document(self.end),
            "residual": to_document(self.residual),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "RewriteTrace":
        return cls(
            from_document(doc["start"]),
            tuple(RewriteStep.from_document(s) for s in doc["steps"]),
            from_document(doc["end"]),
            from_document(doc["residual"]),
        )


def connect(start: PulseSequence, target: PulseSequence, residual: PulseSequence) -> RewriteTrace:
    """Trace from ``start`` to ``target + residual`` through their common normal form."""
    goal = target.with_pulses(target.pulses + residual.pulses, rewritten=True)
    a = normalize(start, split_long=True)
    b = normalize(goal, split_long=True)
    if len(a.rewritten) != len(b.rewritten) or not all(
        p.same_as(q) for p, q in zip(a.rewritten.pulses, b.rewritten.pulses)
    ):
        raise RewriteError("sequences have different normal forms")
    back = []
    seq = goal.with_pulses(goal.pulses, rewritten=True)
    befores = []
    for step in b.steps:
        befores.append(seq)
        seq = apply_step(seq, step)
    for before, step in zip(reversed(befores), reversed(b.steps)):
        back.append(inverse_step(before, step))
    return RewriteTrace(start, a.steps + tuple(back), target, residual)


def _data(name: str) -> str:
    return resources.files("xpulse").joinpath("data", name).read_text()


def fw_rhs() -> PulseSequence:
    """Eighteen-pulse nearest-neighbour form of the FW sequence."""
    return from_document(json.loads(_data("fw_rhs.json")))


def fw_equivalence_trace() -> RewriteTrace:
    """Stored trace turning the three-R form into the eighteen-pulse form plus one SWAP."""
    return RewriteTrace.from_document(json.loads(_data("fw_trace.json")))


# ---------------------------------------------------------------------------
# bounded search


def _moves(seq: PulseSequence):
    ps = seq.pulses
    for k in range(len(ps) - 1):
        if ps[k].is_swap:
            yield RewriteStep("SwapCommute", k, {"direction": "right"})
        if ps[k + 1].is_swap:
            yield RewriteStep("SwapCommute", k, {"direction": "left"})
        if ps[k].pair == ps[k + 1].pair:
            yield RewriteStep("MergeSplit", k, {"mode": "merge"})
            if ps[k].is_swap and ps[k + 1].is_swap:
                yield RewriteStep("SwapPairRemove", k)
    for k in range(len(ps) - 2):
        yield RewriteStep("ThreeSwapReduce", k, {"mode": "reduce"})
    for k, p in enumerate(ps):
        if p.is_zero:
            yield RewriteStep("DropZeroPulse", k, {"mode": "drop"})


def _key(seq: PulseSequence) -> tuple:
    return tuple((p.pair, round(p.t, 9)) for p in seq.pulses)


def search_trace(start: PulseSequence, target: PulseSequence, max_depth: int = 6,
                 max_nodes: int = 200_000) -> tuple | None:
    """Breadth-first search for a step list turning ``start`` into ``target``.

    Only length-non-increasing rules are explored, so the search suits short
    sequences.  Returns None when nothing is found within the bounds.
    """
    goal = _key(target)
    start = start.with_pulses(start.pulses, rewritten=True)
    seen = {_key(start)}
    queue = deque([(start, ())])
    while queue:
        seq, path = queue.popleft()
        if _key(seq) == goal:
            return path
        if len(path) >= max_depth:
            continue
        for step in _moves(seq):
            try:
                nxt = apply_step(seq, step)
            except RewriteError:
                continue
            key = _key(nxt)
            if key not in seen:
                if len(seen) >= max_nodes:
                    return None
                seen.add(key)
                queue.append((nxt, path + (step,)))
    return None
