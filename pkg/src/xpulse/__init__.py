"""Exchange-pulse sequences on three-spin encoded qubits."""
from xpulse.pulse_sequence import GateSequencePackage, PulseSequence, parse, serialize
from xpulse.spin_system import ExchangePulse, apply_sequence, phase_distance

__all__ = [
    "ExchangePulse",
    "GateSequencePackage",
    "PulseSequence",
    "apply_sequence",
    "parse",
    "phase_distance",
    "serialize",
]
__version__ = "0.1.0"
