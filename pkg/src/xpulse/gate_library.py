"""Named pulse sequences for encoded two-qubit gates.

Building blocks act on a few consecutive spins and are placed on a register
through the ``spins`` argument.  The six-spin register holds qubit a on spins
0-2 and qubit b on spins 3-5; the two-qubit constructions only touch the five
spins 1-5.  All sequences are nearest-neighbour and listed in time order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from xpulse import coupling_basis as cb
from xpulse.pulse_sequence import GateSequencePackage, PulseSequence
from xpulse.spin_system import ExchangePulse, apply_sequence, swap

HALF = cb.HALF
N_REGISTER = 6
CONTRACT_TOL = 1e-9


# ---------------------------------------------------------------------------
# durations


@dataclass(frozen=True)
class DurationPair:
    """Durations t <= tbar of a three-pulse phase block."""

    t: float
    tbar: float

    @property
    def s(self) -> float:
        return 2.0 - self.t

    @property
    def sbar(self) -> float:
        return 2.0 - self.tbar

    @property
    def phi(self) -> float:
        return np.pi * (self.t + self.tbar - 1.0)

    @property
    def residual(self) -> float:
        """tan(pi t/2) tan(pi tbar/2) + 2; infinite at the degenerate endpoints."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(np.tan(np.pi * self.t / 2) * np.tan(np.pi * self.tbar / 2) + 2.0)


def solve_durations(phi: float) -> DurationPair:
    """Solve tan(pi t/2) tan(pi tbar/2) = -2 with pi (t + tbar - 1) = phi.

    With tbar = 1 + phi/pi - t the root is bracketed on the branch t in [0, 1],
    tbar in [1, 2].  The residual is multiplied by cos(pi t/2) cos(pi tbar/2) so
    it stays finite across the tangent poles; the root is unchanged.  At
    phi = 0 and 2 pi the equation degenerates and the limits (0, 1) and (1, 2)
    are returned.
    """
    phi = float(phi)
    if not -1e-12 <= phi <= 2 * np.pi + 1e-12:
        raise ValueError(f"phi must lie in [0, 2 pi], got {phi}")
    phi = min(max(phi, 0.0), 2 * np.pi)
    total = 1.0 + phi / np.pi

    def g(t):
        a, b = np.pi * t / 2, np.pi * (total - t) / 2
        return np.sin(a) * np.sin(b) + 2.0 * np.cos(a) * np.cos(b)

    lo, hi = max(0.0, total - 2.0), min(1.0, total - 1.0)
    if hi - lo < 1e-15 or g(lo) * g(hi) > 0:
        # endpoint: the bracket collapses onto t = 0 or t = 1
        t = lo if abs(g(lo)) <= abs(g(hi)) else hi
    else:
        t = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return DurationPair(t, total - t)


# cone angles of the CPHASE construction, in closed form
PHI1 = float(np.arccos(1 / 4))
PHI2 = float(np.arccos(-7 / 8))
PHI3 = float(np.arccos(-11 / 16))


@lru_cache(maxsize=None)
def named_durations() -> dict:
    """The fixed durations t1, t2, t3 and their partners.

    t1 solves phi = 2 pi/3.  t2 belongs to the U3 block at angle PHI3 and t3 to
    the mirrored block at angle 2 pi - PHI2, which is how both enter the
    CPHASE sequence.
    """
    return {
        "t1": solve_durations(2 * np.pi / 3),
        "t2": solve_durations(PHI3),
        "t3": solve_durations(2 * np.pi - PHI2),
    }


# ---------------------------------------------------------------------------
# helpers


def _seq(n: int, pulses) -> PulseSequence:
    return PulseSequence(n, tuple(ExchangePulse(*p) for p in pulses), "linear")


def _n(spins: Sequence[int], n_spins: int | None) -> int:
    return max(spins) + 1 if n_spins is None else n_spins


def _merge_adjacent(pulses) -> list[ExchangePulse]:
    """Combine consecutive pulses on the same pair; drop pulses that vanish."""
    out: list[ExchangePulse] = []
    for p in pulses:
        if out and out[-1].pair == p.pair:
            q = ExchangePulse(p.i, p.j, out[-1].t + p.t)
            out.pop()
            if not q.is_zero:
                out.append(q)
        else:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# three- and four-spin blocks


def u3_sequence(phi: float, mirrored: bool = False, spins=(0, 1, 2), n_spins: int | None = None,
                durations: DurationPair | None = None) -> PulseSequence:
    """t, tbar, t block on spins (a, b, c).

    The plain block pulses (b c), (a b), (b c) and conserves the spin of pair
    (a b); the mirrored block pulses (a b), (b c), (a b) and conserves (b c).
    """
    a, b, c = spins
    d = solve_durations(phi) if durations is None else durations
    if mirrored:
        pulses = [(a, b, d.t), (b, c, d.tbar), (a, b, d.t)]
    else:
        pulses = [(b, c, d.t), (a, b, d.tbar), (b, c, d.t)]
    return _seq(_n(spins, n_spins), pulses)


def u4_sequence(phi: float, spins=(0, 1, 2, 3), n_spins: int | None = None) -> PulseSequence:
    """Phase gate on two pairs: X, then U3(phi) on the first three spins, then X^-1.

    X is a fixed four-pulse scaffold built from the t1 block and one pulse of
    duration 2/3.  The pair (p0 p1) carries label a, the pair (p2 p3) label b.
    """
    p0, p1, p2, p3 = spins
    n = _n(spins, n_spins)
    d1 = named_durations()["t1"]
    scaffold = _seq(n, [(p1, p2, d1.tbar), (p0, p1, d1.t), (p1, p2, d1.tbar), (p2, p3, 2 / 3)])
    return scaffold + u3_sequence(phi, False, (p0, p1, p2), n) + scaffold.inverse()


def powt_sequence(spins=(0, 1, 2), n_spins: int | None = None) -> PulseSequence:
    """Moves the lone spin p0 past the pair (p1 p2): SWAP(p0 p1) then SWAP(p1 p2)."""
    p0, p1, p2 = spins
    return _seq(_n(spins, n_spins), [(p0, p1, 1), (p1, p2, 1)])


# ---------------------------------------------------------------------------
# four-spin elevated operations; spins (p0, p1, p2, p3) with p0 the lone spin


def v0_sequence(spins=(0, 1, 2, 3), n_spins: int | None = None) -> PulseSequence:
    p0, p1, p2, _ = spins
    return _seq(_n(spins, n_spins), [(p0, p1, 0.5), (p1, p2, 1.5)])


def v_sequence(spins=(0, 1, 2, 3), n_spins: int | None = None) -> PulseSequence:
    """V = V0 V1 with V1 = U34(3/2) U23(1/2); V1 acts first."""
    p0, p1, p2, p3 = spins
    n = _n(spins, n_spins)
    return _seq(n, [(p1, p2, 0.5), (p2, p3, 1.5)]) + v0_sequence(spins, n)


def w_sequence(spins=(0, 1, 2, 3), n_spins: int | None = None) -> PulseSequence:
    """Basis change used by S: one 2/3 pulse followed by the t1 block."""
    p0, p1, p2, p3 = spins
    d1 = named_durations()["t1"]
    return _seq(_n(spins, n_spins), [(p0, p1, 2 / 3), (p1, p2, d1.t), (p2, p3, d1.tbar), (p1, p2, d1.t)])


def _central(spins, n, t) -> PulseSequence:
    p0, p1, p2, p3 = spins
    return _seq(n, [(p0, p1, t), (p2, p3, t)])


def r_sequence(spins=(0, 1, 2, 3), n_spins: int | None = None) -> PulseSequence:
    """R = V0^-1 U12(1) U34(1) V0."""
    n = _n(spins, n_spins)
    v0 = v0_sequence(spins, n)
    return v0 + _central(spins, n, 1.0) + v0.inverse()


def t_sequence(t: float, spins=(0, 1, 2, 3), n_spins: int | None = None) -> PulseSequence:
    """T = U34(2s) V^-1 U12(t) U34(t) V, eleven pulses in time order."""
    n = _n(spins, n_spins)
    v = v_sequence(spins, n)
    p0, p1, p2, p3 = spins
    return v + _central(spins, n, t) + v.inverse() + _seq(n, [(p2, p3, 2 * (2.0 - t))])


def t_parts(t: float, spins=(0, 1, 2, 3), n_spins: int | None = None):
    """(pre, core, post) split of T; pre and post act inside the lone-spin-free triple."""
    n = _n(spins, n_spins)
    p0, p1, p2, p3 = spins
    v0 = v0_sequence(spins, n)
    pre = _seq(n, [(p1, p2, 0.5), (p2, p3, 1.5)])
    core = v0 + _central(spins, n, t) + v0.inverse()
    post = pre.inverse() + _seq(n, [(p2, p3, 2 * (2.0 - t))])
    return pre, core, post


def s_sequence(spins=(0, 1, 2, 3), n_spins: int | None = None) -> PulseSequence:
    """S = W^-1 U12(1) U34(1) W."""
    n = _n(spins, n_spins)
    w = w_sequence(spins, n)
    return w + _central(spins, n, 1.0) + w.inverse()


# ---------------------------------------------------------------------------
# five-spin constructions on the six-spin register

ACTIVE = (1, 2, 3, 4, 5)
ELEVATED = (2, 3, 4, 5)  # lone spin 2 plus the triple of qubit b


def _powt_pair(n: int):
    fwd = powt_sequence((3, 4, 5), n)
    return fwd, fwd.inverse()


def u4_wrapped(phi: float, n_spins: int = N_REGISTER) -> PulseSequence:
    """U4 on pairs (1 2) and (4 5), with spin 3 moved out of the way and back."""
    fwd, back = _powt_pair(n_spins)
    return fwd + u4_sequence(phi, (1, 2, 3, 4), n_spins) + back


def u5_sequence(phi: float, n_spins: int = N_REGISTER) -> PulseSequence:
    """Q U4(phi) Q^-1 with Q = U3(PHI3) U3bar(PHI2), adjacent same-pair pulses merged."""
    d = named_durations()
    u3_phi3 = u3_sequence(PHI3, False, (1, 2, 3), n_spins, d["t2"])
    u3bar_chi2 = u3_sequence(2 * np.pi - PHI2, True, (3, 4, 5), n_spins, d["t3"])
    q_inv = u3_phi3.inverse() + u3bar_chi2
    q = u3bar_chi2.inverse() + u3_phi3
    raw = q_inv + u4_wrapped(phi, n_spins) + q
    return raw.with_pulses(_merge_adjacent(raw.pulses))


def u5bar_sequence(phi: float, n_spins: int = N_REGISTER) -> PulseSequence:
    """P U4(phi) P^-1 with P = U4(2 pi - PHI1) U3bar(PHI1)."""
    u3bar = u3_sequence(PHI1, True, (3, 4, 5), n_spins)
    u4_phi1 = u4_wrapped(PHI1, n_spins)
    raw = u4_phi1 + u3bar.inverse() + u4_wrapped(phi, n_spins) + u3bar + u4_phi1.inverse()
    return raw.with_pulses(_merge_adjacent(raw.pulses))


def cphase_package(phi: float) -> GateSequencePackage:
    """U5(phi) core plus the duration-tbar pulse on pair (1 2) that fixes the a = 0 phase."""
    if not 0.0 <= phi <= 2 * np.pi:
        raise ValueError(f"phi must lie in [0, 2 pi], got {phi}")
    core = u5_sequence(phi)
    post = _seq(N_REGISTER, [(1, 2, solve_durations(phi).tbar)])
    return GateSequencePackage(core, _seq(N_REGISTER, []), post)


T_MAX = float(4 * np.arctan(np.sqrt(2 - np.sqrt(3))))


def controlled_rotation_package(t: float) -> GateSequencePackage:
    """S, SWAP(1 2), T, SWAP(1 2), S with the qubit-b parts of T moved outside."""
    if not 0.0 <= t <= T_MAX + 1e-12:
        raise ValueError(f"t must lie in [0, {T_MAX:.10g}], got {t}")
    n = N_REGISTER
    s_op = s_sequence(ELEVATED, n)
    pre, t_core, post = t_parts(t, ELEVATED, n)
    sw = _seq(n, [(1, 2, 1)])
    core = s_op + sw + t_core + sw + s_op
    return GateSequencePackage(core, pre, post)


def fw_lhs() -> PulseSequence:
    """R, SWAP(1 2), R, SWAP(1 2), R on the six-spin register."""
    r = r_sequence(ELEVATED, N_REGISTER)
    sw = _seq(N_REGISTER, [(1, 2, 1)])
    return r + sw + r + sw + r


def fw_sequence(variant: str = "LHS") -> PulseSequence:
    variant = variant.upper()
    if variant == "LHS":
        return fw_lhs()
    if variant == "RHS":
        from xpulse.rewrite_engine import fw_rhs

        return fw_rhs()
    raise ValueError(f"unknown FW variant {variant!r}")


# ---------------------------------------------------------------------------
# contracts


@dataclass
class ContractReport:
    kind: str
    parameter: float | None
    passed: bool
    max_deviation: float
    blocks: dict = field(default_factory=dict)
    message: str = ""

    @classmethod
    def from_blocks(cls, kind, parameter, blocks: dict, tol: float) -> "ContractReport":
        worst = max(blocks, key=blocks.get)
        dev = float(blocks[worst])
        passed = dev <= tol
        message = "" if passed else f"block {worst} deviates by {dev:.3e}"
        return cls(kind, parameter, passed, dev, dict(blocks), message)


def _block(n: int, seq: PulseSequence, basis, sz) -> np.ndarray:
    vecs = np.array([cb.coupled_state(tree, n, sz) for tree in basis]).T
    return vecs.conj().T @ apply_sequence(n, seq.pulses) @ vecs


def _phase_aligned_dev(m: np.ndarray, target: np.ndarray) -> float:
    """Entrywise deviation after removing the best global phase."""
    overlap = np.trace(target.conj().T @ m)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.abs(m - phase * target).max())


def _contract_blocks(kind: str, param):
    """(sequence, register size, list of (name, basis, Sz, target)) for ``kind``."""
    F = cb.couple
    if kind in ("U3", "U3bar"):
        mirrored = kind == "U3bar"
        seq = u3_sequence(param, mirrored)
        d = solve_durations(param)
        target = np.diag([np.exp(-1j * np.pi * d.tbar), 1.0, np.exp(-1j * param)])
        if mirrored:
            basis = [F(0, F(1, 2, 0), HALF), F(0, F(1, 2, 1), HALF), F(0, F(1, 2, 1), 1.5)]
        else:
            basis = [F(F(0, 1, 0), 2, HALF), F(F(0, 1, 1), 2, HALF), F(F(0, 1, 1), 2, 1.5)]
        return seq, 3, [("ac", basis, HALF, target)]
    if kind == "U4":
        seq = u4_sequence(param)
        d = solve_durations(param)
        e = np.exp(-1j * param)
        a1 = [F(F(0, 1, 1), F(2, 3, 0), 1), F(F(0, 1, 1), F(2, 3, 1), 0),
              F(F(0, 1, 1), F(2, 3, 1), 1), F(F(0, 1, 1), F(2, 3, 1), 2)]
        a0 = [F(F(0, 1, 0), F(2, 3, 0), 0), F(F(0, 1, 0), F(2, 3, 1), 1)]
        # a = 1 at Sz = 0 holds all four d labels; the a = 0 block sits at Sz = 0 too
        full = a0 + a1
        target = np.diag([np.exp(-1j * np.pi * d.tbar)] * 2 + [1, 1, e, e])
        return seq, 4, [("bd", full, 0, target)]
    if kind in ("T", "S"):
        if kind == "T":
            from xpulse.encoded_analysis import t_gate_closed_form

            seq = t_sequence(param)
            lower = t_gate_closed_form(param)
        else:
            seq = s_sequence()
            lower = -np.eye(2)
        basis = [F(0, F(1, F(2, 3, b), HALF), dd) for dd in (0, 1) for b in (0, 1)]
        target = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), lower]])
        return seq, 4, [("d", basis, 0, target)]
    if kind == "R":
        from xpulse.encoded_analysis import N0, dot_sigma

        seq = r_sequence()
        basis = [F(0, F(1, F(2, 3, b), HALF), dd) for dd in (0, 1) for b in (0, 1)]
        target = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), dot_sigma(N0)]])
        return seq, 4, [("d", basis, 0, target)]
    raise ValueError(f"no block contract for {kind!r}")


def verify_contract(kind: str, param: float | None = None, tol: float = CONTRACT_TOL) -> ContractReport:
    """Simulate a named sequence and compare it with its matrix contract.

    Block contracts (U3, U3bar, U4, T, S, R) are checked entrywise in the
    coupled basis after removing one global phase.  Register-level kinds
    (FW_LHS, FW_RHS, CROT, CPHASE, U5, U5bar) are checked through the encoded
    two-qubit gate.
    """
    kind_u = kind.upper().replace("-", "_")
    aliases = {"U3BAR": "U3bar", "U3": "U3", "U4": "U4", "T": "T", "S": "S", "R": "R"}
    if kind_u in aliases:
        k = aliases[kind_u]
        if k in ("U3", "U3bar", "U4") and param is None:
            raise ValueError(f"{k} needs phi")
        if k == "T" and param is None:
            raise ValueError("T needs t")
        seq, n, specs = _contract_blocks(k, param)
        blocks = {name: _phase_aligned_dev(_block(n, seq, basis, sz), target) for name, basis, sz, target in specs}
        if k in ("T", "S", "R"):
            blocks["c_leakage"] = _c_leakage(seq)
        return ContractReport.from_blocks(k, param, blocks, tol)
    from xpulse import encoded_analysis as ea

    return ea.verify_gate_contract(kind_u, param, tol)


def _c_leakage(seq: PulseSequence) -> float:
    """Amplitude moved from c = 1/2 to c = 3/2 in the lone-spin-free triple."""
    F = cb.couple
    src = [F(0, F(1, F(2, 3, b), HALF), 1) for b in (0, 1)]
    dst = F(0, F(1, F(2, 3, 1), 1.5), 1)
    u = apply_sequence(4, seq.pulses)
    out = 0.0
    for sz in (0, 1):
        d = cb.coupled_state(dst, 4, sz)
        for tree in src:
            out = max(out, abs(d.conj() @ u @ cb.coupled_state(tree, 4, sz)))
    return float(out)
