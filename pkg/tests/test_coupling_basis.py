from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpulse import coupling_basis as cb
from xpulse.spin_system import total_s2, total_sz

H = Fraction(1, 2)

# textbook values: <j1 m1; j2 m2 | J M>
KNOWN_CG = [
    ((H, H, H, -H, 1, 0), 1 / np.sqrt(2)),
    ((H, -H, H, H, 1, 0), 1 / np.sqrt(2)),
    ((H, H, H, -H, 0, 0), 1 / np.sqrt(2)),
    ((H, -H, H, H, 0, 0), -1 / np.sqrt(2)),
    ((1, 1, H, -H, Fraction(3, 2), H), 1 / np.sqrt(3)),
    ((1, 0, H, H, Fraction(3, 2), H), np.sqrt(2 / 3)),
    ((1, 1, H, -H, H, H), np.sqrt(2 / 3)),
    ((1, 0, H, H, H, H), -1 / np.sqrt(3)),
    ((1, 1, 1, -1, 0, 0), 1 / np.sqrt(3)),
    ((1, 0, 1, 0, 0, 0), -1 / np.sqrt(3)),
]


@pytest.mark.parametrize("labels,value", KNOWN_CG)
def test_cg_against_table(labels, value):
    assert cb.cg_coefficient(*labels) == pytest.approx(value, abs=1e-12)


def test_cg_selection_rules():
    assert cb.cg_coefficient(H, H, H, H, 1, 0) == 0.0
    assert cb.cg_coefficient(H, H, H, -H, 2, 0) == 0.0


@pytest.mark.parametrize("j1,j2", [(H, H), (1, H), (1, 1), (Fraction(3, 2), 1)])
def test_cg_orthogonality(j1, j2):
    j1, j2 = Fraction(j1), Fraction(j2)
    ms = lambda j: [j - k for k in range(int(2 * j) + 1)]
    Js = [abs(j1 - j2) + k for k in range(int(j1 + j2 - abs(j1 - j2)) + 1)]
    rows = [(J, M) for J in Js for M in ms(J)]
    cols = [(m1, m2) for m1 in ms(j1) for m2 in ms(j2)]
    c = np.array([[cb.cg_coefficient(j1, m1, j2, m2, J, M) for m1, m2 in cols] for J, M in rows])
    assert np.allclose(c @ c.T, np.eye(len(rows)), atol=1e-12)


trees = [
    cb.couple(0, 1, 0),
    cb.couple(0, 1, 1),
    cb.couple(0, cb.couple(1, 2, 1), H),
    cb.couple(cb.couple(0, 1, 1), cb.couple(2, 3, 1), 1),
    cb.couple(cb.couple(0, 1, 1), cb.couple(2, cb.couple(3, 4, 1), Fraction(3, 2)), H),
]


@pytest.mark.parametrize("tree", trees)
def test_coupled_state_is_spin_eigenstate(tree):
    n = max(cb.leaves(tree)) + 1
    s = cb.tree_spin(tree)
    for m in (s, -s):
        v = cb.coupled_state(tree, n, m)
        assert np.allclose(total_s2(n) @ v, float(s * (s + 1)) * v, atol=1e-12)
        assert np.allclose(total_sz(n) @ v, float(m) * v, atol=1e-12)


def test_invalid_trees():
    with pytest.raises(ValueError):
        cb.coupled_state(cb.couple(0, 1, 2), 2)
    with pytest.raises(ValueError):
        cb.coupled_state(cb.couple(0, 0, 1), 2)
    with pytest.raises(ValueError):
        cb.coupled_state(cb.couple(0, 1, 1), 2, 2)


@pytest.mark.parametrize("which", ["F1", "F2", "F3"])
def test_recoupling_matches_closed_form(which):
    f = cb.numeric_F(which)
    assert np.abs(f - cb.analytic_F(which)).max() < 1e-12
    assert np.allclose(f @ f.T, np.eye(2), atol=1e-12)


def test_recoupling_rejects_mismatched_bases():
    with pytest.raises(ValueError):
        cb.recoupling_matrix(cb.qubit_basis(0, 1, 2), [cb.couple(0, 1, 0)])
    with pytest.raises(ValueError):
        cb.analytic_F("F9")


@settings(max_examples=30, deadline=None)
@given(st.permutations([0, 1, 2, 3]))
def test_two_pair_bases_are_orthonormal(order):
    a, b, c, d = order
    basis = [cb.couple(cb.couple(a, b, x), cb.couple(c, d, y), 0) for x, y in ((0, 0), (1, 1))]
    vecs = np.array([cb.coupled_state(t, 4, 0) for t in basis])
    assert np.allclose(vecs.conj() @ vecs.T, np.eye(2), atol=1e-12)
