"""Encoded two-qubit gates, leakage, local invariants and pseudospin oracles."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial.transform import Rotation

from xpulse import coupling_basis as cb
from xpulse.coupling_basis import HALF, couple, dot_sigma
from xpulse.pulse_sequence import GateSequencePackage, PulseSequence
from xpulse.spin_system import ExchangePulse, apply_sequence, is_unitary, phase_distance

LEAKAGE_TOL = 1e-8
STRUCTURE_TOL = 1e-9
THREE_HALVES = 3 * HALF

# ---------------------------------------------------------------------------
# rotation axes


@dataclass(frozen=True)
class RotationAxes:
    n0: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    n3: np.ndarray
    f0: np.ndarray
    f4: np.ndarray


_r3 = np.sqrt(3.0)
_r2 = np.sqrt(2.0)
AXES = RotationAxes(
    n0=np.array([0.0, _r3 / 2, -0.5]),
    n1=np.array([_r3 / 4, -_r3 / 2, 0.25]),
    n2=np.array([2 * _r2 / 3, 0.0, -1 / 3]),
    n3=np.array([-4 * _r2 / 9, 0.0, -7 / 9]),
    f0=np.array([0.0, -_r3 / 2, -0.5]),
    f4=np.array([0.0, _r3 / 2, -0.5]),
)
N0, N1, N2, N3 = AXES.n0, AXES.n1, AXES.n2, AXES.n3
Z_AXIS = np.array([0.0, 0.0, 1.0])


def spin_rotation(angle: float, axis) -> np.ndarray:
    """exp(i angle n.sigma / 2)."""
    axis = np.asarray(axis, dtype=float)
    return np.cos(angle / 2) * np.eye(2) + 1j * np.sin(angle / 2) * dot_sigma(axis)


# ---------------------------------------------------------------------------
# encoded basis and gate extraction


@dataclass(frozen=True)
class EncodedBasis:
    g: int
    sz: float
    states: np.ndarray  # 64 x 4, columns |ab> = 00, 01, 10, 11


@lru_cache(maxsize=None)
def _basis_states(g: int, sz) -> np.ndarray:
    trees = [
        couple(couple(0, couple(1, 2, a), HALF), couple(3, couple(4, 5, b), HALF), g)
        for a in (0, 1)
        for b in (0, 1)
    ]
    return np.array([cb.coupled_state(t, 6, sz) for t in trees]).T


def encoded_basis(g: int = 0, sz=None) -> EncodedBasis:
    """((o(oo)_a)_1/2 (o(oo)_b)_1/2)_g on six spins; Sz defaults to g."""
    if g not in (0, 1):
        raise ValueError(f"total spin of two encoded qubits is 0 or 1, got {g}")
    sz = g if sz is None else sz
    states = _basis_states(g, cb._frac(sz))
    return EncodedBasis(g, float(sz), states)


@dataclass
class EncodedGateReport:
    gate: np.ndarray
    leakage: float
    sector: int
    makhlin_g1: complex | None = None
    makhlin_g2: float | None = None
    diagonal_phase_invariant: float | None = None
    block_structure: str = "general"


def _register_unitary(seq) -> np.ndarray:
    if isinstance(seq, GateSequencePackage):
        seq = seq.full()
    if isinstance(seq, PulseSequence):
        n, pulses = seq.n_spins, seq.pulses
    else:
        pulses = tuple(seq)
        n = 6
    if n == 5:
        # five active spins sit on spins 1-5 of the register
        pulses = tuple(ExchangePulse(p.i + 1, p.j + 1, p.t) for p in pulses)
        n = 6
    if n != 6:
        raise ValueError(f"encoded gates need the six-spin register, got {n} spins")
    return apply_sequence(6, pulses)


def leakage_of(u: np.ndarray, basis: np.ndarray) -> float:
    """Largest norm of U|b> outside span(basis), over basis columns."""
    ub = u @ basis
    out = ub - basis @ (basis.conj().T @ ub)
    return float(np.linalg.norm(out, axis=0).max())


def classify(gate: np.ndarray, tol: float = STRUCTURE_TOL) -> str:
    off = gate - np.diag(np.diag(gate))
    if np.abs(off).max() < tol:
        return "diagonal"
    g = gate / (gate[0, 0] / abs(gate[0, 0])) if abs(gate[0, 0]) > tol else gate
    if np.abs(g[:2, :2] - np.eye(2)).max() < tol and np.abs(g[:2, 2:]).max() < tol and np.abs(g[2:, :2]).max() < tol:
        return "diag(1,M)"
    return "general"


def diagonal_phase_invariant(gate: np.ndarray) -> float:
    """alpha00 - alpha01 - alpha10 + alpha11 wrapped into (-pi, pi]."""
    a = np.angle(np.diag(gate))
    x = a[0] - a[1] - a[2] + a[3]
    return float(np.pi - (np.pi - x) % (2 * np.pi))


def extract_gate(seq, sector: int = 0, sz=None) -> EncodedGateReport:
    """Encoded 4x4 gate of a register sequence in total-spin sector ``sector``."""
    basis = encoded_basis(sector, sz).states
    u = _register_unitary(seq)
    gate = basis.conj().T @ u @ basis
    report = EncodedGateReport(gate, leakage_of(u, basis), sector)
    if report.leakage < LEAKAGE_TOL:
        report.makhlin_g1, report.makhlin_g2 = makhlin_invariants(gate)
        report.block_structure = classify(gate)
        if report.block_structure == "diagonal":
            report.diagonal_phase_invariant = diagonal_phase_invariant(gate)
    return report


def _pair(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def report_document(report: EncodedGateReport) -> dict:
    return {
        "sector": report.sector,
        "leakage": report.leakage,
        "gate": [[_pair(z) for z in row] for row in report.gate],
        "makhlin": None if report.makhlin_g1 is None else {"g1": _pair(report.makhlin_g1), "g2": report.makhlin_g2},
        "phase_invariant": report.diagonal_phase_invariant,
        "classification": report.block_structure,
    }


# ---------------------------------------------------------------------------
# local invariants and single-qubit rotations

_MAGIC = np.array([[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]]) / np.sqrt(2)


def makhlin_invariants(gate: np.ndarray, tol: float = LEAKAGE_TOL) -> tuple[complex, float]:
    """Local invariants (G1, G2); identity gives (1, 3), CNOT gives (0, 1)."""
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4) or not is_unitary(gate, tol):
        raise ValueError("Makhlin invariants need a 4x4 unitary")
    ub = _MAGIC.T @ gate @ _MAGIC
    m = ub.T @ ub
    det = np.linalg.det(gate)
    tr = np.trace(m)
    g1 = tr**2 / (16 * det)
    g2 = (tr**2 - np.trace(m @ m)) / (4 * det)
    return complex(g1), float(np.real(g2))


@dataclass(frozen=True)
class RotationResult:
    phi: float
    axis: np.ndarray | None
    xi: float
    eigenphase_gap: float
    degenerate: bool


def rotation_angle(m: np.ndarray, xi: float | None = None) -> RotationResult:
    """Write M = exp(i xi) exp(i phi n.sigma/2).

    With ``xi`` given, phi is read off in [0, 2 pi].  Without it the pair
    (phi, n) is only fixed up to (2 pi - phi, -n), and phi is reported in
    [0, pi].  ``eigenphase_gap`` is |arg(l1/l2)| from the eigenvalues.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2) or not is_unitary(m):
        raise ValueError("rotation_angle needs a 2x2 unitary")
    lam = np.linalg.eigvals(m)
    gap = float(abs(np.angle(lam[0] / lam[1])))
    if xi is None:
        xi = float(np.angle(np.linalg.det(m)) / 2)
        reduce = True
    else:
        reduce = False
    su = np.exp(-1j * xi) * m
    paulis = (dot_sigma((1, 0, 0)), dot_sigma((0, 1, 0)), dot_sigma((0, 0, 1)))
    # sin(phi/2) n and cos(phi/2); atan2 stays accurate near phi = 0 and 2 pi
    sn = np.array([np.trace(su @ p).imag / 2 for p in paulis])
    s = float(np.linalg.norm(sn))
    phi = float(2 * np.arctan2(s, np.trace(su).real / 2))
    axis = None if s < 1e-12 else sn / s
    if reduce and phi > np.pi:
        phi, xi = 2 * np.pi - phi, xi + np.pi
        axis = None if axis is None else -axis
    xi = float(np.pi - (np.pi - xi) % (2 * np.pi))
    return RotationResult(phi, axis, xi, gap, axis is None)


T_MAX = float(4 * np.arctan(np.sqrt(2 - np.sqrt(3))))


def phi_of_t(t: float) -> float:
    """Rotation angle of the T sequence: 2 arccos((3 cos(pi t/2) + 5 cos(3 pi t/2))/8)."""
    t = float(t)
    if not 0.0 <= t < 2.0:
        raise ValueError(f"t must lie in [0, 2), got {t}")
    arg = (3 * np.cos(np.pi * t / 2) + 5 * np.cos(3 * np.pi * t / 2)) / 8
    if abs(arg) > 1 + 1e-12:
        raise ValueError(f"arccos argument {arg} outside [-1, 1]")
    return float(2 * np.arccos(np.clip(arg, -1.0, 1.0)))


def t_gate_xi(t: float) -> float:
    return -np.pi * float(t) / 2


def t_gate_closed_form(t: float) -> np.ndarray:
    """exp(-i pi t/2) exp(i pi (2 - t) Z) exp(-i pi t n1.sigma/2)."""
    t = float(t)
    return np.exp(-1j * np.pi * t / 2) * spin_rotation(2 * np.pi * (2 - t), Z_AXIS) @ spin_rotation(-np.pi * t, N1)


# ---------------------------------------------------------------------------
# pseudospin oracles

PSEUDOSPIN_KINDS = ("U4_f12", "U4_f32", "U3bar", "U3")


def pseudospin_oracle(kind: str, phi: float) -> np.ndarray:
    """Closed-form action on the pseudospin {up_f, down_f} of the ab = 11 space.

    U4_f12 and U3 hold in the f = 1/2 sector, U4_f32 in f = 3/2, and U3bar in
    both.  Matrices are fixed up to a global phase.
    """
    if kind == "U4_f12":
        return np.exp(-1j * phi / 2) * spin_rotation(phi, N2)
    if kind == "U4_f32":
        return np.exp(-1j * phi) * np.eye(2)
    if kind == "U3bar":
        return np.diag([1.0, np.exp(-1j * phi)])
    if kind == "U3":
        return np.exp(-1j * phi / 2) * spin_rotation(phi, N3)
    raise ValueError(f"unknown pseudospin oracle {kind!r}")


def pseudospin_basis(f) -> np.ndarray:
    """Columns up_f = (T(o T)_1/2)_f and down_f = (T(o T)_3/2)_f on spins 1-5, Sz = f."""
    f = cb._frac(f)
    trees = [couple(couple(1, 2, 1), couple(3, couple(4, 5, 1), c), f) for c in (HALF, THREE_HALVES)]
    return np.array([cb.coupled_state(t, 6, f) for t in trees]).T


def simulate_pseudospin(kind: str, phi: float, f=HALF) -> np.ndarray:
    """Simulated 2x2 pseudospin block for the sequence behind ``kind``."""
    from xpulse import gate_library as gl

    if kind in ("U4_f12", "U4_f32"):
        seq = gl.u4_wrapped(phi)
        f = HALF if kind == "U4_f12" else THREE_HALVES
    elif kind == "U3bar":
        seq = gl.u3_sequence(phi, True, (3, 4, 5), 6)
    elif kind == "U3":
        seq = gl.u3_sequence(phi, False, (1, 2, 3), 6)
    else:
        raise ValueError(f"unknown pseudospin oracle {kind!r}")
    b = pseudospin_basis(f)
    return b.conj().T @ seq.unitary() @ b


# ---------------------------------------------------------------------------
# cone geometry


def cone_angles(n2=N2, n3=N3) -> tuple[float, float, float]:
    """(phi1, phi2, phi3) from the axis components."""
    n2x, n2z = n2[0], n2[2]
    n3x, n3z = n3[0], n3[2]
    phi1 = np.arccos(n2z / (n2z - 1))
    phi2 = np.arccos(-n3z * (1 + n2z) / (n2x * n3x))
    phi3 = np.arccos(-(n2z + n3z**2) / n3x**2)
    return float(phi1), float(phi2), float(phi3)


def cone_composite(phi2: float, phi3: float, n2=N2, n3=N3) -> np.ndarray:
    """Image of n2 under a z rotation by phi2 followed by an n3 rotation by phi3."""
    rz = Rotation.from_rotvec(phi2 * Z_AXIS)
    rn = Rotation.from_rotvec(phi3 * np.asarray(n3))
    return (rn * rz).apply(n2)


# ---------------------------------------------------------------------------
# recoupling factors from simulation


def powt_factor() -> np.ndarray:
    """Overlaps <((oo)_1 o)_c | U | (o(oo)_1)_c'> for U = SWAP(0 1) then SWAP(1 2)."""
    u = apply_sequence(3, [ExchangePulse(0, 1, 1), ExchangePulse(1, 2, 1)])
    cs = (HALF, THREE_HALVES)
    left = np.array([cb.coupled_state(couple(couple(0, 1, 1), 2, c), 3, HALF) for c in cs]).T
    right = np.array([cb.coupled_state(couple(0, couple(1, 2, 1), c), 3, HALF) for c in cs]).T
    return left.conj().T @ u @ right


F0_ALPHA = -(2 + 1j) / np.sqrt(6)
F0_BETA = 1j / np.sqrt(6)


def compute_F0(with_phase: bool = False):
    """F0[v_k, b] = <v_k| V0 |(o(o(oo)_b)_1/2)_1> on four spins.

    The raw overlaps carry a global phase; it is removed so that F0 is
    Hermitian with a negative top-left entry.  ``with_phase`` also returns
    the removed phase.
    """
    from xpulse.gate_library import v0_sequence

    v1 = cb.coupled_state(couple(couple(0, 1, 1), couple(2, 3, 1), 1), 4, 1)
    v2 = F0_ALPHA * cb.coupled_state(couple(couple(0, 1, 1), couple(2, 3, 0), 1), 4, 1) + F0_BETA * cb.coupled_state(
        couple(couple(0, 1, 0), couple(2, 3, 1), 1), 4, 1
    )
    ins = np.array([cb.coupled_state(couple(0, couple(1, couple(2, 3, b), HALF), 1), 4, 1) for b in (0, 1)]).T
    raw = np.array([v1, v2]).conj() @ v0_sequence().unitary() @ ins
    phase = -raw[0, 0] / abs(raw[0, 0])
    f0 = raw / phase
    return (f0, complex(phase)) if with_phase else f0


# ---------------------------------------------------------------------------
# register-level contracts


def _same_across_sectors(seq) -> tuple[list, float]:
    reports = [extract_gate(seq, g) for g in (0, 1)]
    return reports, phase_distance(reports[0].gate, reports[1].gate)


def _normalized(gate: np.ndarray) -> np.ndarray:
    return gate / (gate[0, 0] / abs(gate[0, 0]))


def fw_correction() -> PulseSequence:
    """Single-qubit SWAP on pair (4 5) that lines the RHS variant up with the LHS."""
    return PulseSequence(6, (ExchangePulse(4, 5, 1),))


REGISTER_KINDS = ("FW_LHS", "FW_RHS", "CROT", "CPHASE", "U5", "U5BAR")
_ALIASES = {"FIG9TOP": "CROT", "FIG9BOTTOM": "CPHASE"}  # legacy kind names
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def synthesize_register(kind: str, param: float | None = None):
    """Sequence or package behind a register-level contract kind."""
    from xpulse import gate_library as gl

    kind = _ALIASES.get(kind, kind)
    if kind == "FW_LHS":
        return gl.fw_sequence("LHS")
    if kind == "FW_RHS":
        return gl.fw_sequence("RHS")
    if kind == "CROT":
        return gl.controlled_rotation_package(param)
    if kind == "CPHASE":
        return gl.cphase_package(param)
    if kind == "U5":
        return gl.u5_sequence(param)
    if kind == "U5BAR":
        return gl.u5bar_sequence(param)
    raise ValueError(f"no register contract for {kind!r}")


def check_register_gate(kind: str, seq, param: float | None = None, tol: float = STRUCTURE_TOL):
    """Check the encoded gate of ``seq`` against the contract of ``kind``."""
    from xpulse import gate_library as gl

    kind = _ALIASES.get(kind, kind)
    blocks: dict = {}
    if kind in ("FW_LHS", "FW_RHS"):
        if kind == "FW_RHS":
            seq = seq + fw_correction()
        target = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), dot_sigma(N0)]])
        reports, across = _same_across_sectors(seq)
        blocks["target"] = phase_distance(reports[0].gate, target)
        blocks["makhlin"] = _makhlin_gap(reports[0], _CNOT)
    elif kind == "CROT":
        reports, across = _same_across_sectors(seq)
        g = _normalized(reports[0].gate)
        target = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), t_gate_closed_form(param)]])
        blocks["target"] = float(np.abs(g - target).max())
        rot = rotation_angle(g[2:, 2:], xi=t_gate_xi(param))
        blocks["angle"] = abs(rot.phi - phi_of_t(param))
    elif kind in ("CPHASE", "U5", "U5BAR"):
        reports, across = _same_across_sectors(seq)
        g = reports[0].gate
        blocks["off_diagonal"] = float(np.abs(g - np.diag(np.diag(g))).max())
        d = (diagonal_phase_invariant(g) + param) % (2 * np.pi)
        blocks["phase_invariant"] = float(min(d, 2 * np.pi - d))
    else:
        raise ValueError(f"no register contract for {kind!r}")
    blocks["sector_mismatch"] = across
    blocks["leakage"] = max(r.leakage for r in reports)
    return gl.ContractReport.from_blocks(kind, param, blocks, tol)


def _makhlin_gap(report: EncodedGateReport, reference: np.ndarray) -> float:
    if report.makhlin_g1 is None:
        return float("inf")
    g1, g2 = makhlin_invariants(reference)
    return float(abs(report.makhlin_g1 - g1) + abs(report.makhlin_g2 - g2))


def verify_gate_contract(kind: str, param: float | None = None, tol: float = STRUCTURE_TOL):
    """Synthesize the sequence for ``kind`` and check its encoded gate."""
    return check_register_gate(kind, synthesize_register(kind, param), param, tol)
