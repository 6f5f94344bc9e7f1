"""Total-spin coupled states and recoupling matrices.

Spins are coupled pairwise along a binary tree, left child first, with
Clebsch-Gordan coefficients in the Condon-Shortley convention.  Every
effective particle (a spin-1 pair, a three-spin qubit) is expanded into its
constituent spin-1/2 particles, so all numerics happen in the product space.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from xpulse.spin_system import MAX_SPINS

HALF = Fraction(1, 2)


def _frac(x) -> Fraction:
    return Fraction(x).limit_denominator(4)


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients by ladder-operator recursion


def _lowering(j: Fraction) -> np.ndarray:
    """J- in the basis m = j, j-1, ..., -j."""
    dim = int(2 * j + 1)
    out = np.zeros((dim, dim))
    for k in range(dim - 1):
        m = j - k
        out[k + 1, k] = np.sqrt(float(j * (j + 1) - m * (m - 1)))
    return out


@lru_cache(maxsize=None)
def _cg_table(j1: Fraction, j2: Fraction) -> dict:
    """Coupled states |J M> of j1 x j2, as vectors in the |m1>|m2> product basis."""
    d1, d2 = int(2 * j1 + 1), int(2 * j2 + 1)
    lower = np.kron(_lowering(j1), np.eye(d2)) + np.kron(np.eye(d1), _lowering(j2))
    m1 = np.array([float(j1 - k) for k in range(d1)])
    m2 = np.array([float(j2 - k) for k in range(d2)])
    mtot = (m1[:, None] + m2[None, :]).ravel()
    states: dict[tuple[Fraction, Fraction], np.ndarray] = {}
    J = j1 + j2
    while J >= abs(j1 - j2):
        # highest weight: M = J subspace orthogonal to every larger J
        idx = np.flatnonzero(np.isclose(mtot, float(J)))
        sub = np.eye(d1 * d2)[:, idx]
        for (Jp, Mp), v in states.items():
            if Mp == J:
                sub = sub - np.outer(v, v @ sub)
        u, s, _ = np.linalg.svd(sub, full_matrices=False)
        vec = u[:, np.argmax(s)]
        # Condon-Shortley: <j1 j1; j2 (J - j1) | J J> > 0
        lead = np.flatnonzero(np.abs(vec) > 1e-12)[0]
        vec = vec * np.sign(vec[lead])
        vec = vec / np.linalg.norm(vec)
        M = J
        states[(J, M)] = vec
        while M > -J:
            vec = lower @ vec
            vec = vec / np.linalg.norm(vec)
            M -= 1
            states[(J, M)] = vec
        J -= 1
    return states


def cg_coefficient(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M>; zero whenever the labels are not admissible."""
    j1, m1, j2, m2, J, M = (_frac(x) for x in (j1, m1, j2, m2, J, M))
    if m1 + m2 != M or abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        return 0.0
    if not abs(j1 - j2) <= J <= j1 + j2 or (j1 + j2 - J).denominator != 1:
        return 0.0
    if (j1 - m1).denominator != 1 or (j2 - m2).denominator != 1:
        return 0.0
    vec = _cg_table(j1, j2)[(J, M)]
    d2 = int(2 * j2 + 1)
    return float(vec[int(j1 - m1) * d2 + int(j2 - m2)])


# ---------------------------------------------------------------------------
# coupling trees


@dataclass(frozen=True)
class Couple:
    """Internal node: ``left`` and ``right`` coupled to total spin ``spin``."""

    left: "Tree"
    right: "Tree"
    spin: Fraction

    def __post_init__(self):
        object.__setattr__(self, "spin", _frac(self.spin))


Tree = Union[int, Couple]


def couple(left: Tree, right: Tree, spin) -> Couple:
    return Couple(left, right, _frac(spin))


def leaves(tree: Tree) -> list[int]:
    if isinstance(tree, Couple):
        return leaves(tree.left) + leaves(tree.right)
    return [int(tree)]


def tree_spin(tree: Tree) -> Fraction:
    return tree.spin if isinstance(tree, Couple) else HALF


def validate_tree(tree: Tree) -> None:
    ls = leaves(tree)
    if len(set(ls)) != len(ls):
        raise ValueError(f"duplicate leaf index in coupling tree: {ls}")
    _validate_node(tree)


def _validate_node(tree: Tree) -> None:
    if not isinstance(tree, Couple):
        return
    _validate_node(tree.left)
    _validate_node(tree.right)
    a, b = tree_spin(tree.left), tree_spin(tree.right)
    if not abs(a - b) <= tree.spin <= a + b or (a + b - tree.spin).denominator != 1:
        raise ValueError(f"spin label {tree.spin} not reachable from {a} x {b}")


def _local_state(tree: Tree, m: Fraction) -> np.ndarray:
    """State on the tree's own leaves (leaf order, first leaf most significant)."""
    if not isinstance(tree, Couple):
        if m == HALF:
            return np.array([1.0, 0.0])
        if m == -HALF:
            return np.array([0.0, 1.0])
        raise ValueError(f"spin-1/2 leaf cannot carry m = {m}")
    j1, j2 = tree_spin(tree.left), tree_spin(tree.right)
    n_left, n_right = len(leaves(tree.left)), len(leaves(tree.right))
    out = np.zeros(2 ** (n_left + n_right))
    m1 = -j1
    while m1 <= j1:
        m2 = m - m1
        if abs(m2) <= j2:
            c = cg_coefficient(j1, m1, j2, m2, tree.spin, m)
            if c != 0.0:
                out += c * np.kron(_local_state(tree.left, m1), _local_state(tree.right, m2))
        m1 += 1
    return out


def _embed(local: np.ndarray, sites: Sequence[int], n: int) -> np.ndarray:
    k = len(sites)
    out = np.zeros(2**n, dtype=complex)
    for idx in range(2**k):
        amp = local[idx]
        if amp == 0:
            continue
        full = 0
        for pos, site in enumerate(sites):
            bit = (idx >> (k - 1 - pos)) & 1
            full |= bit << (n - 1 - site)
        out[full] = amp
    return out


def coupled_state(tree: Tree, n: int, sz=None) -> np.ndarray:
    """Normalized product-space vector of a coupled state.

    Spins outside the tree are set to spin up.  ``sz`` defaults to the
    highest weight of the root.
    """
    if not 1 <= n <= MAX_SPINS:
        raise ValueError(f"register size must be in [1, {MAX_SPINS}], got {n}")
    validate_tree(tree)
    sites = leaves(tree)
    if max(sites) >= n:
        raise ValueError(f"tree leaves {sites} do not fit in {n} spins")
    root = tree_spin(tree)
    m = root if sz is None else _frac(sz)
    if abs(m) > root or (root - m).denominator != 1:
        raise ValueError(f"Sz = {m} not allowed for total spin {root}")
    vec = _embed(_local_state(tree, m), sites, n)
    return vec / np.linalg.norm(vec)


# ---------------------------------------------------------------------------
# recoupling matrices


@dataclass(frozen=True)
class RecouplingMatrix:
    source: tuple
    target: tuple
    entries: np.ndarray  # entries[k, l] = <target_k | source_l>


def recoupling_matrix(source: Sequence[Tree], target: Sequence[Tree], tol: float = 1e-10) -> RecouplingMatrix:
    """Overlaps between two coupled bases of the same subspace."""
    source, target = tuple(source), tuple(target)
    if len(source) != len(target):
        raise ValueError("bases of different size cannot span the same subspace")
    roots = {tree_spin(t) for t in source + target}
    sites = sorted(set().union(*(leaves(t) for t in source + target)))
    if any(sorted(leaves(t)) != sites for t in source + target):
        raise ValueError("bases couple different sets of spins")
    n = max(sites) + 1
    sz = min(roots)
    s_vecs = np.array([coupled_state(t, n, sz) for t in source]).T
    t_vecs = np.array([coupled_state(t, n, sz) for t in target]).T
    entries = t_vecs.conj().T @ s_vecs
    # span check: each source vector must lie in the target span
    resid = s_vecs - t_vecs @ entries
    if np.abs(resid).max() > tol or np.linalg.matrix_rank(s_vecs, tol) != len(source):
        raise ValueError("source and target bases do not span the same subspace")
    return RecouplingMatrix(source, target, entries)


_SQ = np.sqrt
ANALYTIC_AXES = {
    "F1": np.array([_SQ(3) / 2, 0.0, -0.5]),
    "F2": np.array([_SQ(2 / 3), 0.0, -1 / _SQ(3)]),
    "F3": np.array([2 * _SQ(2) / 3, 0.0, -1 / 3]),
}


def dot_sigma(axis) -> np.ndarray:
    x, y, z = axis
    return np.array([[z, x - 1j * y], [x + 1j * y, -z]], dtype=complex)


def analytic_F(which: str) -> np.ndarray:
    """Closed-form recoupling matrix f . sigma for ``which`` in {F1, F2, F3}."""
    try:
        axis = ANALYTIC_AXES[which]
    except KeyError:
        raise ValueError(f"unknown recoupling matrix {which!r}") from None
    return dot_sigma(axis).real


# named bases used across the package; spin indices are local to each example


def qubit_basis(lone: int, p: int, q: int) -> list[Couple]:
    """(o(oo)_a)_{1/2} for a = 0, 1."""
    return [couple(lone, couple(p, q, a), HALF) for a in (0, 1)]


def pair_first_basis(p: int, q: int, lone: int) -> list[Couple]:
    """((oo)_a' o)_{1/2} for a' = 0, 1."""
    return [couple(couple(p, q, a), lone, HALF) for a in (0, 1)]


def triangle(p: int, q: int) -> Couple:
    """Spin pair fixed in its triplet, used as an effective spin-1."""
    return couple(p, q, 1)


def recoupling_bases(which: str) -> tuple[list[Couple], list[Couple]]:
    """(source, target) bases whose overlap table is F1, F2 or F3.

    F1: three spins, (o(oo)_a)_1/2 to ((oo)_a' o)_1/2.
    F2: four spins with (23) fixed to 1, (o(o T)_c)_1 to ((oo)_b' T)_1.
    F3: five spins with (01) and (34) fixed to 1, (T(o T)_c)_1/2 to ((T o)_c' T)_1/2.
    """
    h3 = 3 * HALF
    if which == "F1":
        return qubit_basis(0, 1, 2), pair_first_basis(0, 1, 2)
    if which == "F2":
        tri = triangle(2, 3)
        src = [couple(0, couple(1, tri, c), 1) for c in (HALF, h3)]
        return src, [couple(couple(0, 1, b), tri, 1) for b in (0, 1)]
    if which == "F3":
        left, right = triangle(0, 1), triangle(3, 4)
        src = [couple(left, couple(2, right, c), HALF) for c in (HALF, h3)]
        return src, [couple(couple(left, 2, c), right, HALF) for c in (HALF, h3)]
    raise ValueError(f"unknown recoupling matrix {which!r}")


def numeric_F(which: str) -> np.ndarray:
    """Recoupling matrix computed from Clebsch-Gordan coupled states."""
    source, target = recoupling_bases(which)
    return recoupling_matrix(source, target).entries
