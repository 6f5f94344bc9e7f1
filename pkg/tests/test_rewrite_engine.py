import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from xpulse import gate_library as gl
from xpulse import rewrite_engine as rw
from xpulse.pulse_sequence import PulseSequence
from xpulse.spin_system import ExchangePulse, permutation_operator


def seq(n, *pulses):
    return PulseSequence(n, tuple(pulses), "complete")


@st.composite
def sequences(draw, max_n=6, max_len=20):
    n = draw(st.integers(2, max_n))
    pair = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1])
    dur = st.one_of(st.just(1.0), st.just(0.5), st.just(1.5), st.just(0.0), st.floats(0, 2, exclude_max=True))
    pulses = draw(st.lists(st.tuples(pair, dur), max_size=max_len))
    return seq(n, *((i, j, t) for (i, j), t in pulses))


def close(a, b, tol=1e-12):
    return np.abs(a.unitary() - b.unitary()).max() < tol


def test_swap_commute_relabels():
    s = seq(3, (0, 1, 1.0), (1, 2, 0.3))
    step = rw.RewriteStep("SwapCommute", 0)
    out = rw.apply_step(s, step)
    assert [p.pair for p in out] == [(0, 2), (0, 1)]
    assert rw.verify_step(s, step)


def test_swap_commute_without_relabel_is_rejected():
    s = seq(3, (0, 1, 1.0), (1, 2, 0.3))
    naive = seq(3, (1, 2, 0.3), (0, 1, 1.0))
    assert not rw.verify_step(s, rw.RewriteStep("SwapCommute", 0), claimed=naive)


@pytest.mark.parametrize(
    "start,step,length",
    [
        (seq(3, (0, 1, 0.3), (0, 1, 0.4)), rw.RewriteStep("MergeSplit", 0), 1),
        (seq(3, (0, 1, 0.7)), rw.RewriteStep("MergeSplit", 0, {"mode": "split", "t_first": 0.2}), 2),
        (seq(3, (0, 1, 0.7)), rw.RewriteStep("SwapPairInsert", 1, {"pair": (1, 2)}), 3),
        (seq(3, (0, 1, 1.0), (0, 1, 1.0)), rw.RewriteStep("SwapPairRemove", 0), 0),
        (seq(3, (0, 1, 1.0), (1, 2, 1.0), (0, 1, 1.0)), rw.RewriteStep("ThreeSwapReduce", 0), 1),
        (seq(3, (0, 2, 1.0)), rw.RewriteStep("ThreeSwapReduce", 0, {"mode": "expand", "middle": 1}), 3),
        (seq(3, (0, 1, 0.0), (1, 2, 0.4)), rw.RewriteStep("DropZeroPulse", 0), 1),
        (seq(3, (1, 2, 0.4)), rw.RewriteStep("DropZeroPulse", 1, {"mode": "insert", "pair": (0, 2)}), 2),
    ],
)
def test_each_rule_is_exact_and_invertible(start, step, length):
    out = rw.apply_step(start, step)
    assert len(out) == length and out.rewritten
    assert close(start, out)
    back = rw.apply_step(out, rw.inverse_step(start, step))
    assert back.same_as(start)


@pytest.mark.parametrize(
    "start,step",
    [
        (seq(3, (0, 1, 0.5), (1, 2, 0.3)), rw.RewriteStep("SwapCommute", 0)),
        (seq(3, (0, 1, 0.5), (1, 2, 0.3)), rw.RewriteStep("MergeSplit", 0)),
        (seq(3, (0, 1, 1.0), (1, 2, 1.0)), rw.RewriteStep("SwapPairRemove", 0)),
        (seq(3, (0, 1, 0.3)), rw.RewriteStep("DropZeroPulse", 0)),
        (seq(3, (0, 1, 1.0)), rw.RewriteStep("ThreeSwapReduce", 0, {"mode": "expand", "middle": 0})),
        (seq(3, (0, 1, 1.0)), rw.RewriteStep("SwapCommute", 5)),
    ],
)
def test_inapplicable_rules_raise(start, step):
    with pytest.raises(rw.RewriteError):
        rw.apply_step(start, step)
    assert not rw.verify_step(start, step)


def test_unknown_rule():
    with pytest.raises(rw.RewriteError):
        rw.RewriteStep("Teleport", 0)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(sequences(), st.booleans())
def test_normalize_steps_are_exact(s, split):
    res = rw.normalize(s, "complete", split_long=split)
    cur = s
    for step in res.steps:
        nxt = rw.apply_step(cur, step)
        assert close(cur, nxt)
        cur = nxt
    assert cur.same_as(res.rewritten)
    assert close(s, res.rewritten)
    # residual is a SWAP word; the core carries no SWAPs or zero pulses
    assert all(p.is_swap for p in res.residual)
    assert not any(p.is_swap or p.is_zero for p in res.core)
    perm_op = permutation_operator(s.n_spins, res.permutation)
    sign = (-1) ** len(res.residual)
    assert np.abs(res.residual.unitary() - sign * perm_op).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(sequences())
def test_normalize_is_idempotent_and_never_grows(s):
    res = rw.normalize(s)
    assert len(res.rewritten) <= len(s)
    again = rw.normalize(res.rewritten)
    assert again.rewritten.same_as(res.rewritten)


def test_word_permutation_and_locality():
    assert rw.word_permutation(3, [ExchangePulse(0, 1, 1)]) == (1, 0, 2)
    assert rw.residual_is_local((1, 0, 2, 3, 5, 4))
    assert not rw.residual_is_local((3, 1, 2, 0, 4, 5))


@pytest.mark.parametrize(
    "build,n_in,n_out",
    [
        (lambda: gl.controlled_rotation_package(0.7).core, 28, 22),
        (lambda: gl.cphase_package(1.2).core, 25, 23),
        (lambda: gl.fw_sequence("RHS"), 18, 12),
        (gl.fw_lhs, 20, 12),
    ],
)
def test_complete_layout_counts(build, n_in, n_out):
    s = build()
    res = rw.normalize(s)
    assert (len(s), len(res.core)) == (n_in, n_out)
    assert res.absorbable
    assert np.abs(s.unitary() - rw.residual_operator(res) @ res.core.unitary()).max() < 1e-12


def test_linear_layout_keeps_sequence_legal():
    s = PulseSequence(4, ((0, 1, 1.0), (1, 2, 0.4), (2, 3, 0.3)), "linear")
    res = rw.normalize(s, "linear")
    assert all(abs(p.i - p.j) == 1 for p in res.rewritten)
    assert close(s, res.rewritten)


def test_fw_trace_replays_and_round_trips():
    trace = rw.fw_equivalence_trace()
    assert trace.start.same_as(gl.fw_lhs())
    assert trace.check()
    assert np.abs(trace.start.unitary() - (trace.end + trace.residual).unitary()).max() < 1e-12
    back = rw.RewriteTrace.from_document(json.loads(json.dumps(trace.to_document())))
    assert back.check() and len(back.steps) == len(trace.steps)


def test_connect_between_equivalent_sequences():
    a = seq(3, (0, 1, 1.0), (1, 2, 0.3), (0, 1, 0.4))
    b = rw.normalize(a)
    trace = rw.connect(a, b.core, b.residual)
    assert trace.check()


def test_connect_rejects_different_gates():
    with pytest.raises(rw.RewriteError):
        rw.connect(seq(3, (0, 1, 0.3)), seq(3, (0, 1, 0.4)), seq(3))


def test_search_trace_finds_short_path():
    a = seq(3, (0, 1, 1.0), (1, 2, 0.3), (0, 1, 1.0))
    target = seq(3, (0, 2, 0.3))
    path = rw.search_trace(a, target, max_depth=3)
    assert path is not None
    assert rw.replay(a, path).same_as(target)
    assert rw.search_trace(seq(3, (0, 1, 0.3)), seq(3, (0, 1, 0.4)), max_depth=2) is None
