import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpulse.spin_system import (
    ExchangePulse,
    apply_sequence,
    exchange_unitary,
    is_unitary,
    permutation_operator,
    phase_distance,
    reduce_duration,
    swap,
    total_s2,
    total_sz,
    transposition,
)

# two-spin SWAP in the |00>,|01>,|10>,|11> basis
P2 = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def oracle_pulse(t):
    """Closed form ((1+e^{-i pi t})/2) 1 - ((1-e^{-i pi t})/2) P on two spins."""
    e = np.exp(-1j * np.pi * t)
    return (1 + e) / 2 * np.eye(4) - (1 - e) / 2 * P2


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 1.0, 1.5, 1.9])
def test_two_spin_pulse_matches_closed_form(t):
    u = exchange_unitary(2, ExchangePulse(0, 1, t))
    assert np.allclose(u, oracle_pulse(t), atol=1e-14)


def test_full_pulse_is_minus_swap():
    u = exchange_unitary(3, swap(0, 2))
    assert np.allclose(u, -transposition(3, 0, 2), atol=1e-14)


def test_first_pulse_acts_first():
    a, b = ExchangePulse(0, 1, 0.3), ExchangePulse(1, 2, 0.7)
    u = apply_sequence(3, [a, b])
    assert np.allclose(u, exchange_unitary(3, b) @ exchange_unitary(3, a), atol=1e-14)


def test_reduce_duration():
    assert reduce_duration(2.5) == pytest.approx(0.5)
    assert reduce_duration(-0.5) == pytest.approx(1.5)
    assert reduce_duration(-1e-16) == 0.0


def test_pulse_validation():
    with pytest.raises(ValueError):
        ExchangePulse(1, 1, 0.5)
    with pytest.raises(ValueError):
        ExchangePulse(-1, 1, 0.5)


def test_pulse_helpers():
    p = ExchangePulse(3, 1, 0.4)
    assert p.pair == (1, 3)
    assert p.inverse().t == pytest.approx(1.6)
    assert p.same_as(ExchangePulse(1, 3, 2.4))
    assert swap(0, 1).is_swap and ExchangePulse(0, 1, 0).is_zero


def test_permutation_operator_moves_states():
    # spin 0 up, others down: |100>; cycle 0->1->2->0 gives |010>
    op = permutation_operator(3, (1, 2, 0))
    v = np.zeros(8)
    v[0b100] = 1
    assert np.argmax(np.abs(op @ v)) == 0b010


def test_phase_distance_ignores_global_phase():
    u = exchange_unitary(3, ExchangePulse(0, 2, 0.37))
    assert phase_distance(u, np.exp(0.7j) * u) < 1e-14
    assert phase_distance(u, np.eye(8)) > 0.1


def test_total_spin_operators():
    assert np.allclose(np.diag(total_sz(2)), [1, 0, 0, -1])
    # two spins: triplet S(S+1)=2 three times, singlet 0 once
    assert np.allclose(np.sort(np.linalg.eigvalsh(total_s2(2))), [0, 2, 2, 2])


pulse = st.tuples(st.integers(0, 3), st.integers(0, 3), st.floats(0, 2, allow_nan=False)).filter(lambda p: p[0] != p[1])


@settings(max_examples=60, deadline=None)
@given(st.lists(pulse, max_size=8))
def test_sequences_are_unitary_and_conserve_spin(ps):
    u = apply_sequence(4, [ExchangePulse(*p) for p in ps])
    assert is_unitary(u)
    s2, sz = total_s2(4), total_sz(4)
    assert np.abs(u @ s2 - s2 @ u).max() < 1e-12
    assert np.abs(u @ sz - sz @ u).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2), st.floats(0, 2))
def test_pulse_group_law(a, b):
    u = lambda t: exchange_unitary(3, ExchangePulse(0, 2, t))
    assert np.abs(u(a) @ u(b) - u(a + b)).max() < 1e-12
    assert np.abs(u(a) @ u(2 - a) - np.eye(8)).max() < 1e-12
