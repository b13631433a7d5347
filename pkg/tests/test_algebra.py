import itertools

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.linalg import expm

from mmflow.algebra import (
    TORUS,
    complexified_action,
    group_action,
    infinitesimal_action,
    make_matrix_rep,
    make_torus_rep,
    maximal_torus_in,
    orthonormalize,
    stabilizer_algebra,
    su2_basis,
)
from mmflow.errors import (
    DimensionMismatch,
    EmptyWeights,
    InputError,
    NotClosedUnderBracket,
    NotSkewHermitian,
    NotSubalgebra,
    Overflow,
)

from conftest import complex_vectors, torus_instances


def levi_civita(a, b, c):
    return int(np.sign(np.linalg.det(np.eye(3)[[a, b, c]])))


# -- construction ---------------------------------------------------------------


def test_torus_rho_is_diagonal_weights():
    rep = make_torus_rep(1, [[1], [-1]])
    assert rep.kind == TORUS
    np.testing.assert_array_equal(rep.rho([1.0]), np.diag([1j, -1j]))
    assert rep.inner_product == ((1,),)


def test_rank_two_torus():
    rep = make_torus_rep(2, [[1, 0], [0, 1], [-1, -1]])
    assert rep.dim == 3 and rep.rank == 2
    np.testing.assert_array_equal(rep.rho([0, 1]), np.diag([0, 1j, -1j]))


@pytest.mark.parametrize("rank, weights", [(1, []), (0, [[1]])])
def test_empty_weights(rank, weights):
    with pytest.raises(EmptyWeights):
        make_torus_rep(rank, weights)


def test_non_integer_weights_rejected():
    with pytest.raises(InputError):
        make_torus_rep(1, [[0.5]])


def test_weight_bound():
    make_torus_rep(1, [[10**6]])
    with pytest.raises(InputError):
        make_torus_rep(1, [[10**6 + 1]])


def test_single_matrix_rep():
    rep = make_matrix_rep([np.diag([1j, -1j])])
    assert rep.rank == 1
    # -Tr(diag(i,-i)^2) = 2
    assert rep.inner_product == ((2,),)


def test_su2_bracket_table_against_pauli_products():
    rep = make_matrix_rep(su2_basis())
    basis = su2_basis()
    for a, b in itertools.product(range(3), repeat=2):
        comm = basis[a] @ basis[b] - basis[b] @ basis[a]
        # coordinates of the commutator via the trace form, which is -Tr/ (1/2)
        coords = np.array([(-np.trace(comm @ basis[c])).real / 0.5 for c in range(3)])
        np.testing.assert_allclose(rep.bracket(np.eye(3)[a], np.eye(3)[b]), coords, atol=1e-14)
        expected = [-levi_civita(a, b, c) if len({a, b, c}) == 3 else 0 for c in range(3)]
        np.testing.assert_allclose(coords, expected, atol=1e-14)


def test_nilpotent_not_skew_hermitian():
    with pytest.raises(NotSkewHermitian):
        make_matrix_rep([[[0, 1], [0, 0]]])


def test_not_closed_under_bracket_reports_pair():
    b = su2_basis()
    with pytest.raises(NotClosedUnderBracket) as info:
        make_matrix_rep([b[0], b[1]])
    assert info.value.pair == (0, 1)
    assert info.value.residual > 0.1


def test_custom_inner_product_must_be_ad_invariant():
    with pytest.raises(InputError):
        make_matrix_rep(su2_basis(), inner_product=[[1, 0, 0], [0, 2, 0], [0, 0, 1]])
    rep = make_matrix_rep(su2_basis(), inner_product=[[3, 0, 0], [0, 3, 0], [0, 0, 3]])
    assert rep.gram[0, 0] == 3


def test_inner_product_must_be_positive_definite():
    with pytest.raises(InputError):
        make_torus_rep(2, [[1, 0], [0, 1]], inner_product=[[1, 2], [2, 1]])


# -- infinitesimal and group actions ---------------------------------------------


def test_infinitesimal_action_examples():
    rep = make_torus_rep(1, [[1], [-1]])
    np.testing.assert_array_equal(infinitesimal_action(rep, [1.0], [1, 0]), [-1j, 0])
    np.testing.assert_array_equal(infinitesimal_action(rep, [1.0], [0, 0]), [0, 0])
    rep23 = make_torus_rep(1, [[2], [3]])
    np.testing.assert_array_equal(infinitesimal_action(rep23, [1.0], [1, 1]), [-2j, -3j])


def test_dimension_mismatch():
    rep = make_torus_rep(1, [[1], [-1]])
    with pytest.raises(DimensionMismatch):
        infinitesimal_action(rep, [1.0], [1, 0, 0])
    with pytest.raises(DimensionMismatch):
        group_action(rep, [1.0, 0.0], 1.0, [1, 0])


def test_group_action_half_turn_matches_expm():
    rep = make_torus_rep(1, [[1], [-1]])
    out = group_action(rep, [1.0], np.pi, [1, 1])
    np.testing.assert_allclose(out, expm(-np.pi * np.diag([1j, -1j])) @ [1, 1], atol=1e-15)
    np.testing.assert_allclose(out, [-1, -1], atol=1e-15)
    np.testing.assert_array_equal(group_action(rep, [1.0], 0.0, [0.3, 2j]), [0.3, 2j])


@given(torus_instances(), st.floats(-3, 3), st.floats(-3, 3))
def test_group_action_is_one_parameter_group(inst, t, s):
    rep, x = inst
    xi = np.arange(1, rep.rank + 1) / rep.rank
    both = group_action(rep, xi, t + s, x)
    split = group_action(rep, xi, s, group_action(rep, xi, t, x))
    assert np.linalg.norm(both - split) <= 1e-12 * max(1.0, np.linalg.norm(x))
    assert abs(np.linalg.norm(both) - np.linalg.norm(x)) <= 1e-12 * max(1.0, np.linalg.norm(x))


@given(complex_vectors(2), st.floats(-2, 2))
def test_matrix_group_action_matches_expm(x, t):
    rep = make_matrix_rep(su2_basis())
    xi = np.array([0.3, -0.7, 1.1])
    np.testing.assert_allclose(group_action(rep, xi, t, x), expm(-t * rep.rho(xi)) @ x, atol=1e-13)


@given(torus_instances(), st.floats(-2, 2), st.floats(-2, 2))
def test_infinitesimal_action_is_linear(inst, a, b):
    rep, x = inst
    xi = np.ones(rep.rank)
    eta = np.arange(rep.rank, dtype=float)
    lhs = infinitesimal_action(rep, a * xi + b * eta, x)
    rhs = a * infinitesimal_action(rep, xi, x) + b * infinitesimal_action(rep, eta, x)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(lhs))


def test_flow_consistency_first_order():
    rep = make_matrix_rep(su2_basis())
    xi = np.array([0.4, -0.2, 0.9])
    x = np.array([0.6 - 0.1j, 0.3 + 0.5j])
    t = 0.7
    moved = group_action(rep, xi, t, x)
    errs = []
    for eps in (1e-4, 1e-5):
        fd = (group_action(rep, xi, t + eps, x) - moved) / eps
        errs.append(np.linalg.norm(fd - infinitesimal_action(rep, xi, moved)))
    assert errs[0] < 1e-4
    # first-order decay: ten times smaller step, roughly ten times smaller error
    assert 5 < errs[0] / errs[1] < 20


def test_complexified_action_eigen_signs_match_expm():
    rep = make_torus_rep(1, [[1], [-1]])
    for t in (0.0, 0.5, 3.0):
        out = complexified_action(rep, [1.0], t, [1, 1])
        np.testing.assert_allclose(out, expm(-1j * t * rep.rho([1.0])) @ [1, 1], rtol=1e-12)
        np.testing.assert_allclose(out, [np.exp(t), np.exp(-t)], rtol=1e-12)
    with pytest.raises(Overflow):
        complexified_action(rep, [1.0], 300.0, [1, 1])


def test_complexified_matrix_action_matches_expm():
    rep = make_matrix_rep(su2_basis())
    xi = np.array([1.0, 0.5, -0.3])
    x = np.array([1.0, 1j])
    np.testing.assert_allclose(
        complexified_action(rep, xi, 2.0, x), expm(-2j * rep.rho(xi)) @ x, rtol=1e-10
    )
    with pytest.raises(Overflow):
        complexified_action(rep, xi, 1e4, x)


def test_complexified_action_fixes_stabilized_points():
    rep = make_torus_rep(2, [[1, 0], [-1, 0], [0, 1]])
    x = np.array([1, 1, 0])
    (xi,) = stabilizer_algebra(rep, x)
    for t in (1.0, 50.0):
        np.testing.assert_allclose(complexified_action(rep, xi, t, x), x)


# -- stabilizers and tori -------------------------------------------------------


def test_stabilizer_examples():
    rep = make_torus_rep(1, [[1], [-1]])
    assert stabilizer_algebra(rep, [1, 1]) == []
    full = stabilizer_algebra(make_matrix_rep(su2_basis()), [0, 0])
    assert len(full) == 3
    rep2 = make_torus_rep(2, [[1, 0], [-1, 0], [0, 1]])
    (xi,) = stabilizer_algebra(rep2, [1, 1, 0])
    np.testing.assert_allclose(np.abs(xi), [0, 1], atol=1e-14)


def test_stabilizer_is_orthonormal_for_custom_inner_product():
    rep = make_torus_rep(3, [[1, 0, 0], [0, 0, 0], [0, 0, 0]], inner_product=[[2, 1, 0], [1, 2, 0], [0, 0, 5]])
    basis = stabilizer_algebra(rep, [1, 1, 1])
    assert len(basis) == 2
    gram = np.array([[rep.pair(u, v) for v in basis] for u in basis])
    np.testing.assert_allclose(gram, np.eye(2), atol=1e-12)


@given(torus_instances())
def test_stabilizer_vectors_kill_x(inst):
    rep, x = inst
    tol = 1e-8
    # coordinates comparable to the tolerance are numerically ambiguous
    mags = np.abs(x)
    assume(not np.any((mags > 0) & (mags < 1e-4 * mags.max(initial=0.0))))
    for xi in stabilizer_algebra(rep, x, tol):
        assert np.linalg.norm(rep.rho(xi) @ x) <= 10 * tol * np.linalg.norm(x) + 1e-300
    # dimension equals corank of the support weights
    supp = np.abs(x) > 0
    expected = rep.rank - np.linalg.matrix_rank(rep.weights[supp]) if supp.any() else rep.rank
    assert len(stabilizer_algebra(rep, x, tol)) == expected


def test_maximal_torus():
    rep = make_matrix_rep(su2_basis())
    assert len(maximal_torus_in(np.eye(3), rep)) == 1
    assert maximal_torus_in([], rep) == []
    torus = make_torus_rep(2, [[1, 2], [3, 4]])
    vecs = [np.array([1.0, 0.0]), np.array([1.0, 1.0])]
    out = maximal_torus_in(vecs, torus)
    assert len(out) == 2 and all(np.array_equal(a, b) for a, b in zip(out, vecs))


def test_maximal_torus_requires_subalgebra():
    rep = make_matrix_rep(su2_basis())
    with pytest.raises(NotSubalgebra):
        maximal_torus_in([np.eye(3)[0], np.eye(3)[1]], rep)


def test_orthonormalize_drops_dependent():
    rep = make_torus_rep(2, [[1, 0], [0, 1]], inner_product=[[2, 0], [0, 1]])
    out = orthonormalize(rep, [[1, 0], [2, 0], [1, 1]])
    assert len(out) == 2
    np.testing.assert_allclose([[rep.pair(u, v) for v in out] for u in out], np.eye(2), atol=1e-14)
