import numpy as np
import pytest

from indefpencil import linalg as la
from indefpencil.builtins import PAPER5X5_B, PAPER5X5_C
from indefpencil.errors import InputError, PreconditionError


def test_sym_eigen_identity():
    w, V = la.sym_eigen(np.eye(3))
    np.testing.assert_allclose(w, [1, 1, 1])
    np.testing.assert_allclose(V.T @ V, np.eye(3), atol=1e-14)


def test_sym_eigen_2x2_hand_quadratic():
    # mu^2 + mu - 7 = 0
    w = la.sym_eigen([[2, -1], [-1, -3]]).eigenvalues
    np.testing.assert_allclose(w, [(-1 - np.sqrt(29)) / 2, (-1 + np.sqrt(29)) / 2], rtol=1e-14)


def test_sym_eigen_diagonal():
    np.testing.assert_allclose(la.sym_eigen(np.diag([5.0, -2.0, 0.0])).eigenvalues, [-2, 0, 5])


def test_sym_eigen_sign_convention():
    _, V = la.sym_eigen(np.array([[1.0, 2.0], [2.0, 1.0]]))
    for k in range(2):
        first = V[np.flatnonzero(np.abs(V[:, k]) > 1e-10)[0], k]
        assert first > 0


def test_sym_eigen_rejects_nonsymmetric():
    with pytest.raises(InputError):
        la.sym_eigen([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(InputError):
        la.sym_eigen(np.ones((2, 3)))
    with pytest.raises(InputError):
        la.sym_eigen([[np.nan]])


def test_gen_eigen_identity_metric_matches_standard():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((4, 4))
    M = M + M.T
    np.testing.assert_allclose(la.gen_sym_def_eigen(M, np.eye(4)).eigenvalues, la.sym_eigen(M).eigenvalues)


def test_gen_eigen_identity_pencil():
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    np.testing.assert_allclose(la.gen_sym_def_eigen(A, A).eigenvalues, [1, 1])


def test_gen_eigen_hand_division():
    w, V = la.gen_sym_def_eigen(np.diag([4.0, 0.0]), np.diag([2.0, 1.0]))
    np.testing.assert_allclose(w, [0, 2])
    np.testing.assert_allclose(V.T @ np.diag([2.0, 1.0]) @ V, np.eye(2), atol=1e-14)


def test_gen_eigen_not_spd_names_eigenvalue():
    with pytest.raises(PreconditionError, match="smallest eigenvalue"):
        la.gen_sym_def_eigen(np.eye(2), np.diag([1.0, -1.0]))


def test_kernel_basis_builtin_C():
    K = la.kernel_basis(PAPER5X5_C)
    assert K.shape == (5, 3)
    assert la.same_span(K, np.eye(5)[:, :3])


def test_kernel_basis_identity_and_threshold():
    assert la.kernel_basis(np.eye(3)).shape == (3, 0)
    K = la.kernel_basis(np.diag([1.0, 1e-14]), 1e-10)
    assert la.same_span(K, np.array([[0.0], [1.0]]))
    assert la.kernel_basis(np.zeros((2, 2))).shape == (2, 2)


def test_restrict_form_builtin_B():
    R = la.restrict_form(PAPER5X5_B, np.eye(5)[:, :3])
    np.testing.assert_array_equal(R, [[0, 0, 0], [0, 2, -1], [0, -1, -3]])


def test_restrict_form_identity_and_rayleigh():
    M = np.array([[2.0, 1.0], [1.0, 3.0]])
    np.testing.assert_array_equal(la.restrict_form(M, np.eye(2)), M)
    w, V = la.sym_eigen(M)
    np.testing.assert_allclose(la.restrict_form(M, V[:, :1]), [[w[0]]])


def test_orthonormal_complement():
    W = la.orthonormal_complement(np.eye(3)[:, :1], np.eye(3))
    assert la.same_span(W, np.eye(3)[:, 1:])
    assert la.orthonormal_complement(np.zeros((3, 0)), np.eye(3)).shape == (3, 3)
    v = np.array([[1.0], [1.0]]) / np.sqrt(2)
    W = la.orthonormal_complement(v, np.eye(2))
    assert la.same_span(W, np.array([[1.0], [-1.0]]))


def test_orthonormal_complement_metric():
    G = np.diag([1.0, 4.0, 9.0])
    V = la.metric_orthonormalize(np.array([[1.0], [1.0], [0.0]]), G)
    W = la.orthonormal_complement(V, G)
    np.testing.assert_allclose(V.T @ G @ W, 0, atol=1e-14)
    np.testing.assert_allclose(W.T @ G @ W, np.eye(2), atol=1e-14)


def test_intersection_dim():
    e = np.eye(4)
    assert la.intersection_dim(e[:, :2], e[:, 1:3]) == 1
    assert la.intersection_dim(e[:, :2], e[:, 2:]) == 0
