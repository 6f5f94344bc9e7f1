import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpulse import gate_library as gl
from xpulse.pulse_sequence import pulse_count
from xpulse.reproduce import duration_targets


def ket(bits):
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(map(str, bits)), 2)] = 1
    return v


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 2 * np.pi - 0.01))
def test_durations_solve_the_phase_equation(phi):
    d = gl.solve_durations(phi)
    assert 0 <= d.t <= 1 <= d.tbar <= 2
    assert np.pi * (d.t + d.tbar - 1) == pytest.approx(phi, abs=1e-12)
    assert abs(np.tan(np.pi * d.t / 2) * np.tan(np.pi * d.tbar / 2) + 2) < 1e-8


def test_duration_endpoints():
    assert (gl.solve_durations(0).t, gl.solve_durations(0).tbar) == pytest.approx((0, 1))
    assert (gl.solve_durations(2 * np.pi).t, gl.solve_durations(2 * np.pi).tbar) == pytest.approx((1, 2))
    with pytest.raises(ValueError):
        gl.solve_durations(7.0)


def test_t1_value():
    assert gl.named_durations()["t1"].t == pytest.approx(0.426548, abs=1e-5)


def test_named_durations_follow_block_angles():
    d = gl.named_durations()
    assert d["t2"].phi == pytest.approx(gl.PHI3, abs=1e-12)
    assert d["t3"].phi == pytest.approx(2 * np.pi - gl.PHI2, abs=1e-12)


@pytest.mark.xfail(strict=True, reason="listed t2 and t3 values belong to the other angle")
@pytest.mark.parametrize("label,phi,want,tol", duration_targets()[1:])
def test_listed_durations_literal(label, phi, want, tol):
    assert abs(gl.solve_durations(phi).t - want) < tol


def test_listed_durations_match_swapped_angles():
    # the listed numbers are the solutions at the other cone angle
    assert gl.solve_durations(gl.PHI3).t == pytest.approx(0.469699, abs=1e-5)
    assert gl.solve_durations(2 * np.pi - gl.PHI2).t == pytest.approx(0.685037, abs=1e-5)


def test_u3_on_explicit_states():
    phi = 1.1
    d = gl.solve_durations(phi)
    u = gl.u3_sequence(phi).unitary()
    singlet = (np.kron(ket([0, 1]), ket([0])) - np.kron(ket([1, 0]), ket([0]))) / np.sqrt(2)
    doublet = (2 * ket([0, 0, 1]) - ket([0, 1, 0]) - ket([1, 0, 0])) / np.sqrt(6)
    quartet = (ket([0, 0, 1]) + ket([0, 1, 0]) + ket([1, 0, 0])) / np.sqrt(3)
    # spin 0 up is bit 0 here; all three states have Sz = 1/2
    a, b, c = (np.vdot(s, u @ s) for s in (singlet, doublet, quartet))
    assert abs(a) == pytest.approx(1, abs=1e-12) and abs(b) == pytest.approx(1, abs=1e-12)
    assert a / b == pytest.approx(np.exp(-1j * np.pi * d.tbar), abs=1e-12)
    assert c / b == pytest.approx(np.exp(-1j * phi), abs=1e-12)


@pytest.mark.parametrize("kind", ["U3", "U3bar", "U4"])
@pytest.mark.parametrize("phi", [0.3, np.pi / 2, 2.0, 4.5, 6.0])
def test_phase_block_contracts(kind, phi):
    rep = gl.verify_contract(kind, phi)
    assert rep.passed, rep.message
    assert rep.max_deviation < 1e-10


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 1.6])
def test_t_contract(t):
    rep = gl.verify_contract("T", t)
    assert rep.passed and rep.blocks["c_leakage"] < 1e-12


@pytest.mark.parametrize("kind", ["S", "R"])
def test_fixed_contracts(kind):
    assert gl.verify_contract(kind).passed


def test_contract_argument_errors():
    with pytest.raises(ValueError):
        gl.verify_contract("U3")
    with pytest.raises(ValueError):
        gl.verify_contract("T")


def test_pulse_counts():
    assert len(gl.t_sequence(0.4)) == 11
    assert len(gl.controlled_rotation_package(0.4).core) == 28
    assert len(gl.cphase_package(1.0).core) == 25
    assert len(gl.u5bar_sequence(1.0)) == 47
    assert len(gl.fw_lhs()) == 20
    assert len(gl.fw_sequence("RHS")) == 18
    assert pulse_count(gl.fw_sequence("RHS"), "non_swap") == 12


def test_t_parts_compose_to_t():
    pre, core, post = gl.t_parts(0.8)
    assert (pre + core + post).same_as(gl.t_sequence(0.8))


def test_u5bar_contract():
    assert gl.verify_contract("U5bar", 1.3).passed


def test_out_of_range_parameters():
    with pytest.raises(ValueError):
        gl.cphase_package(-0.1)
    with pytest.raises(ValueError):
        gl.controlled_rotation_package(1.95)
    with pytest.raises(ValueError):
        gl.fw_sequence("middle")
