"""Dense linear algebra for registers of spin-1/2 particles.

Basis states are Sz product states with spin 0 as the most significant bit;
bit value 0 means spin up.  All operators live in the full 2**n space.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

UNITARY_TOL = 1e-10
CONSERVATION_TOL = 1e-12
MAX_SPINS = 12


def reduce_duration(t: float) -> float:
    """Map a pulse duration onto [0, 2)."""
    t = float(t) % 2.0
    # float modulo can return exactly 2.0 for tiny negative inputs
    if t >= 2.0 or abs(t - 2.0) < 1e-12:
        t = 0.0
    return t


@dataclass(frozen=True)
class ExchangePulse:
    """Exchange pulse between spins ``i`` and ``j`` of duration ``t`` (units of pi/J)."""

    i: int
    j: int
    t: float

    def __post_init__(self):
        i, j = int(self.i), int(self.j)
        if i == j:
            raise ValueError(f"exchange pulse needs two distinct spins, got i = j = {i}")
        if i < 0 or j < 0:
            raise ValueError(f"negative spin index in pulse ({i}, {j})")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "t", reduce_duration(self.t))

    @property
    def pair(self) -> tuple[int, int]:
        return (min(self.i, self.j), max(self.i, self.j))

    @property
    def is_swap(self) -> bool:
        return abs(self.t - 1.0) < 1e-12

    @property
    def is_zero(self) -> bool:
        return self.t < 1e-12 or self.t > 2.0 - 1e-12

    def inverse(self) -> "ExchangePulse":
        return ExchangePulse(self.i, self.j, 2.0 - self.t)

    def relabel(self, mapping) -> "ExchangePulse":
        return ExchangePulse(mapping[self.i], mapping[self.j], self.t)

    def same_as(self, other: "ExchangePulse", tol: float = 1e-12) -> bool:
        """Equal up to index order, durations compared on the circle mod 2."""
        if self.pair != other.pair:
            return False
        d = abs(self.t - other.t)
        return min(d, 2.0 - d) < tol


def swap(i: int, j: int) -> ExchangePulse:
    return ExchangePulse(i, j, 1.0)


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_SPINS:
        raise ValueError(f"register size must be in [1, {MAX_SPINS}], got {n}")


@lru_cache(maxsize=None)
def _basis_bits(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    # column k holds the state of spin k
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def permutation_operator(n: int, perm: Sequence[int]) -> np.ndarray:
    """Operator moving the state of spin ``k`` onto spin ``perm[k]``.

    Composition follows ``perm_op(sigma o tau) = perm_op(sigma) @ perm_op(tau)``
    where ``(sigma o tau)[k] = sigma[tau[k]]``.
    """
    _check_n(n)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of range({n})")
    bits = _basis_bits(n)
    new_bits = np.empty_like(bits)
    new_bits[:, perm] = bits
    target = new_bits @ (1 << (n - 1 - np.arange(n)))
    out = np.zeros((2**n, 2**n), dtype=complex)
    out[target, np.arange(2**n)] = 1.0
    return out


def transposition(n: int, i: int, j: int) -> np.ndarray:
    perm = list(range(n))
    perm[i], perm[j] = perm[j], perm[i]
    return permutation_operator(n, perm)


def exchange_unitary(n: int, pulse: ExchangePulse) -> np.ndarray:
    """Closed-form exchange evolution: singlet picks up 1, triplet exp(-i pi t)."""
    _check_n(n)
    if pulse.i >= n or pulse.j >= n:
        raise ValueError(f"pulse ({pulse.i}, {pulse.j}) out of range for {n} spins")
    phase = np.exp(-1j * np.pi * pulse.t)
    return 0.5 * (1 + phase) * np.eye(2**n) - 0.5 * (1 - phase) * transposition(n, pulse.i, pulse.j)


def apply_sequence(n: int, pulses: Iterable[ExchangePulse]) -> np.ndarray:
    """Time-ordered product; the first pulse acts first."""
    _check_n(n)
    out = np.eye(2**n, dtype=complex)
    for p in pulses:
        out = exchange_unitary(n, p) @ out
    return out


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - |tr(U^dag V)| / d; zero exactly when U and V differ by a global phase."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    return float(max(0.0, 1.0 - abs(np.trace(u.conj().T @ v)) / d))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() < tol)


# total spin operators, used for conservation checks and coupled-state checks

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _site_operator(n: int, k: int, op: np.ndarray) -> np.ndarray:
    left = np.eye(2**k)
    right = np.eye(2 ** (n - k - 1))
    return np.kron(np.kron(left, op), right)


@lru_cache(maxsize=None)
def _total_spin_components(n: int, sites: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    comps = []
    for axis in "xyz":
        op = np.zeros((2**n, 2**n), dtype=complex)
        for k in sites:
            op += 0.5 * _site_operator(n, k, _PAULI[axis])
        comps.append(op)
    return tuple(comps)


def total_sz(n: int, sites: Sequence[int] | None = None) -> np.ndarray:
    sites = tuple(range(n)) if sites is None else tuple(sites)
    return _total_spin_components(n, sites)[2]


def total_s2(n: int, sites: Sequence[int] | None = None) -> np.ndarray:
    """S^2 of the listed spins (all spins by default)."""
    sites = tuple(range(n)) if sites is None else tuple(sites)
    sx, sy, sz = _total_spin_components(n, sites)
    return sx @ sx + sy @ sy + sz @ sz
