import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpulse.pulse_sequence import (
    GateSequencePackage,
    PulseSequence,
    SequenceFormatError,
    parse,
    pulse_count,
    serialize,
    to_document,
)
from xpulse.spin_system import ExchangePulse


def test_linear_layout_rejects_distant_pair():
    with pytest.raises(ValueError):
        PulseSequence(4, ((0, 2, 0.5),), "linear")
    assert len(PulseSequence(4, ((0, 2, 0.5),), "complete")) == 1


def test_out_of_range_spin():
    with pytest.raises(ValueError):
        PulseSequence(3, ((2, 3, 0.5),), "complete")


def test_inverse_undoes_sequence():
    seq = PulseSequence(4, ((0, 1, 0.3), (1, 2, 1.2), (2, 3, 1.0)))
    u = seq.unitary() @ seq.inverse().unitary()
    assert np.allclose(u, np.eye(16), atol=1e-13)


def test_concatenation_order():
    a = PulseSequence(3, ((0, 1, 0.3),))
    b = PulseSequence(3, ((1, 2, 0.6),))
    assert np.allclose((a + b).unitary(), b.unitary() @ a.unitary(), atol=1e-14)


def test_pulse_count_modes():
    seq = PulseSequence(3, ((0, 1, 1.0), (1, 2, 0.5), (0, 1, 0.0)))
    assert pulse_count(seq) == 3
    assert pulse_count(seq, "non_swap") == 1
    with pytest.raises(ValueError):
        pulse_count(seq, "odd")


def test_package_rejects_two_qubit_correction():
    core = PulseSequence(6, ((2, 3, 0.5),))
    with pytest.raises(ValueError):
        GateSequencePackage(core, PulseSequence(6, ((2, 3, 0.5),)))


def test_package_full_order():
    core = PulseSequence(6, ((2, 3, 0.5),))
    pre = PulseSequence(6, ((0, 1, 0.2),))
    post = PulseSequence(6, ((4, 5, 0.7),))
    pkg = GateSequencePackage(core, pre, post)
    assert [p.pair for p in pkg.full()] == [(0, 1), (2, 3), (4, 5)]


def test_package_round_trip():
    pkg = GateSequencePackage(PulseSequence(6, ((2, 3, 0.5),)), PulseSequence(6, ((1, 2, 0.1),)))
    back = parse(serialize(pkg))
    assert isinstance(back, GateSequencePackage)
    assert back == pkg


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        json.dumps({"pulses": []}),
        json.dumps({"n_spins": 3, "pulses": [[0, 1]]}),
        json.dumps({"n_spins": 3, "pulses": [[0, 5, 0.5]]}),
    ],
)
def test_malformed_documents(text):
    with pytest.raises((SequenceFormatError, ValueError)):
        parse(text)


pulse = st.tuples(st.integers(0, 4), st.integers(0, 4), st.floats(0, 2, allow_nan=False, exclude_max=True))


@settings(max_examples=80, deadline=None)
@given(st.lists(pulse.filter(lambda p: p[0] != p[1]), max_size=12))
def test_serialization_round_trip_is_exact(ps):
    seq = PulseSequence(5, tuple(ps), "complete")
    back = parse(serialize(seq))
    assert back == seq
    assert to_document(back) == to_document(seq)
