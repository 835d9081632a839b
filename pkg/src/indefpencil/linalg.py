"""Dense symmetric linear algebra used by every other module.

Matrices are plain ``numpy.ndarray`` objects. A *basis* is an ``(n, k)``
array whose columns are orthonormal in some metric (Euclidean unless a
metric is passed). ``k`` may be zero.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import InputError, PreconditionError

KERNEL_RTOL = 1e-10
SYM_RTOL = 1e-12
SPD_RTOL = 1e-13


class SpectralDecomp(NamedTuple):
    eigenvalues: np.ndarray
    vectors: np.ndarray


def as_symmetric(M, name: str = "M") -> np.ndarray:
    """Validate ``M`` as a real symmetric matrix and return a float copy.

    The copy is exactly symmetrized so that later rounding cannot
    introduce spurious complex spectra.
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise InputError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(M))))
    asym = float(np.max(np.abs(M - M.T)))
    if asym > SYM_RTOL * scale:
        raise InputError(f"{name} is not symmetric (max |M - M^T| = {asym:.3e})")
    return 0.5 * (M + M.T)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # first non-negligible component of each column made positive
    if V.size == 0:
        return V
    V = V.copy()
    amax = np.max(np.abs(V), axis=0)
    for k in range(V.shape[1]):
        idx = np.flatnonzero(np.abs(V[:, k]) > 1e-10 * amax[k])
        if idx.size and V[idx[0], k] < 0:
            V[:, k] = -V[:, k]
    return V


def sym_eigen(M) -> SpectralDecomp:
    """Full spectral decomposition of a symmetric matrix.

    Eigenvalues ascend; each eigenvector has its first non-negligible
    component positive.
    """
    M = as_symmetric(M)
    w, V = np.linalg.eigh(M)
    return SpectralDecomp(w, _fix_signs(V))


def smallest_eigenvalue(M) -> float:
    return float(np.linalg.eigvalsh(as_symmetric(M))[0])


def check_spd(A, name: str = "A") -> np.ndarray:
    A = as_symmetric(A, name)
    w = np.linalg.eigvalsh(A)
    if w[0] <= SPD_RTOL * max(abs(w[-1]), abs(w[0])):
        raise PreconditionError(
            f"{name} is not positive definite (smallest eigenvalue {w[0]:.6e})"
        )
    return A


def gen_sym_def_eigen(M, A) -> SpectralDecomp:
    """Solve ``M v = mu A v`` for symmetric ``M`` and positive definite ``A``.

    Returns ascending ``mu`` and ``A``-orthonormal eigenvectors.

    Raises
    ------
    PreconditionError
        If ``A`` is not positive definite; the message names its smallest
        eigenvalue.
    """
    M = as_symmetric(M, "M")
    A = as_symmetric(A, "A")
    if M.shape != A.shape:
        raise InputError(f"shape mismatch: {M.shape} vs {A.shape}")
    try:
        w, V = sla.eigh(M, A)
    except np.linalg.LinAlgError:
        lo = smallest_eigenvalue(A)
        raise PreconditionError(
            f"A is not positive definite (smallest eigenvalue {lo:.6e})"
        ) from None
    return SpectralDecomp(w, _fix_signs(V))


def kernel_basis(M, rel_tol: float = KERNEL_RTOL) -> np.ndarray:
    """Euclidean-orthonormal basis of the numerical kernel of symmetric ``M``.

    An eigenvalue counts as zero when ``|mu| <= rel_tol * max|mu|``; the
    zero matrix has the whole space as kernel.
    """
    if rel_tol <= 0:
        raise InputError("rel_tol must be positive")
    w, V = sym_eigen(M)
    scale = float(np.max(np.abs(w)))
    if scale == 0.0:
        return np.eye(len(w))
    return V[:, np.abs(w) <= rel_tol * scale]


def restrict_form(M, V) -> np.ndarray:
    """Matrix of the form ``M`` on the column span of ``V``: ``V^T M V``."""
    M = np.asarray(M, dtype=float)
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != M.shape[0]:
        raise InputError(f"basis with shape {V.shape} does not fit matrix {M.shape}")
    R = V.T @ M @ V
    return 0.5 * (R + R.T)


def metric_orthonormalize(Z, metric=None) -> np.ndarray:
    """Orthonormalize the columns of ``Z`` in the given metric.

    Columns are assumed linearly independent.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.shape[1] == 0:
        return Z
    if metric is None:
        Q, _ = np.linalg.qr(Z)
        return Q
    Gz = restrict_form(metric, Z)
    L = np.linalg.cholesky(Gz)
    return sla.solve_triangular(L, Z.T, lower=True).T


def null_space(M, rel_tol: float = KERNEL_RTOL) -> np.ndarray:
    """Euclidean-orthonormal basis of the right null space of a rectangular
    matrix, with the same relative rank tolerance as ``kernel_basis``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[1]
    if M.shape[0] == 0 or not np.any(M):
        return np.eye(n)
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > rel_tol * s[0]))
    return Vt[rank:].T.copy()


def orthonormal_complement(V, metric) -> np.ndarray:
    """Basis ``W`` of the ``metric``-orthogonal complement of span ``V``.

    ``W`` is ``metric``-orthonormal with ``W^T metric V = 0`` and
    ``dim W = n - dim V``.
    """
    metric = check_spd(metric, "metric")
    V = np.asarray(V, dtype=float).reshape(metric.shape[0], -1)
    W0 = null_space((metric @ V).T) if V.shape[1] else np.eye(metric.shape[0])
    return metric_orthonormalize(W0, metric)


def same_span(U, V, tol: float = 1e-8) -> bool:
    """True when the column spans of ``U`` and ``V`` coincide."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape[1] != V.shape[1]:
        return False
    if U.shape[1] == 0:
        return True
    Qu, _ = np.linalg.qr(U)
    Qv, _ = np.linalg.qr(V)
    return float(np.linalg.norm(Qu @ Qu.T - Qv @ Qv.T, 2)) <= tol


def intersection_dim(U, V, rel_tol: float = 1e-8) -> int:
    """Dimension of span(U) ∩ span(V) from the principal angles."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape[1] == 0 or V.shape[1] == 0:
        return 0
    Qu, _ = np.linalg.qr(U)
    Qv, _ = np.linalg.qr(V)
    s = np.linalg.svd(Qu.T @ Qv, compute_uv=False)
    return int(np.sum(s > 1.0 - rel_tol))
