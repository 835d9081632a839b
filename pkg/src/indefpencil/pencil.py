"""Finite-dimensional triples ``(H, a, b^t)`` with ``b^t = b - t c``.

A :class:`Pencil` holds symmetric matrices ``A``, ``B``, ``C`` and the Gram
matrix ``G`` of the ambient inner product. Eigenpairs solve
``A v = lam (B - t C) v``; internally the reciprocal problem
``(B - t C) v = mu A v`` is solved and ``lam = 1 / mu``.

Two regimes are supported:

``fixed``
    ``A`` is positive definite.
``moving``
    ``A`` has a finite-dimensional kernel meeting ``Ker(C)`` trivially.
    The problem is posed on ``H^t = {u : b^t(u, w) = 0 for w in Ker A}``,
    which is well behaved once ``|t|`` exceeds :func:`threshold_T`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from . import linalg as la
from .errors import (
    ConditionViolation,
    InputError,
    NotApplicable,
    PostconditionError,
    PreconditionError,
)

MODES = ("fixed", "moving")
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class Pencil:
    """The triple ``(R^n, a, b^t)`` with ambient Gram matrix ``G``.

    Parameters
    ----------
    A, B, C : array_like
        Symmetric ``n x n`` matrices of the forms ``a``, ``b``, ``c``.
    G : array_like, optional
        Positive definite Gram matrix of the inner product; identity by
        default.
    mode : {"fixed", "moving"}
    kerA : array_like, optional
        Basis of ``Ker(A)`` (moving mode). Computed when omitted; when given
        it must span the numerical kernel of ``A``. Stored ``G``-orthonormal.
    check : bool
        Validate the structural hypotheses. Reduced pencils produced
        internally skip this.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    G: np.ndarray | None = None
    mode: str = "fixed"
    kerA: np.ndarray | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        A = la.as_symmetric(self.A, "A")
        n = A.shape[0]
        B = la.as_symmetric(self.B, "B")
        C = la.as_symmetric(self.C, "C")
        G = np.eye(n) if self.G is None else la.as_symmetric(self.G, "G")
        for name, M in (("B", B), ("C", C), ("G", G)):
            if M.shape != (n, n):
                raise InputError(f"{name} has shape {M.shape}, expected {(n, n)}")
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "G", G)

        if self.mode == "moving":
            ker = la.kernel_basis(A)
            if self.kerA is not None:
                given = np.asarray(self.kerA, dtype=float).reshape(n, -1)
                if not la.same_span(given, ker):
                    raise ConditionViolation("kerA does not span the numerical kernel of A")
                ker = given
            ker = la.metric_orthonormalize(ker, G)
        else:
            ker = np.zeros((n, 0))
        object.__setattr__(self, "kerA", ker)
        if self.check:
            self._validate()

    def _validate(self):
        la.check_spd(self.G, "G")
        wc = np.linalg.eigvalsh(self.C)
        cnorm = float(np.max(np.abs(wc)))
        if cnorm == 0.0:
            raise ConditionViolation("C must be nonzero")
        if wc[0] < -la.KERNEL_RTOL * cnorm:
            raise ConditionViolation(f"C is not positive semi-definite (eigenvalue {wc[0]:.3e})")
        if self.K.shape[1] == 0:
            raise ConditionViolation("Ker(C) is trivial; there is no limiting problem")
        if self.mode == "fixed":
            w = la.gen_sym_def_eigen(self.A, self.G).eigenvalues
            if w[0] <= la.SPD_RTOL * abs(w[-1]):
                raise ConditionViolation(
                    f"fixed mode needs A coercive: smallest (A, G) eigenvalue {w[0]:.3e}"
                )
        else:
            m = self.kerA.shape[1]
            if m == 0:
                raise ConditionViolation("moving mode needs a nontrivial Ker(A)")
            if la.intersection_dim(self.kerA, self.K) > 0:
                raise ConditionViolation("Ker(A) meets Ker(C) nontrivially")
            W = la.orthonormal_complement(self.kerA, self.G)
            w = np.linalg.eigvalsh(la.restrict_form(self.A, W))
            if w[0] <= la.SPD_RTOL * abs(w[-1]):
                raise ConditionViolation("A is not positive definite off Ker(A)")

    # -- derived data -----------------------------------------------------

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @cached_property
    def K(self) -> np.ndarray:
        """Euclidean-orthonormal basis of ``Ker(C)``."""
        return la.kernel_basis(self.C)

    @cached_property
    def rank_C(self) -> int:
        return self.n - self.K.shape[1]

    def Bt(self, t: float) -> np.ndarray:
        return self.B - t * self.C

    def negated(self) -> "Pencil":
        """The pencil with ``B`` replaced by ``-B``."""
        return Pencil(self.A, -self.B, self.C, self.G, self.mode, self.kerA, check=False)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        d = {"A": self.A.tolist(), "B": self.B.tolist(), "C": self.C.tolist()}
        if not np.array_equal(self.G, np.eye(self.n)):
            d["G"] = self.G.tolist()
        d["mode"] = self.mode
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Pencil":
        try:
            return cls(d["A"], d["B"], d["C"], d.get("G"), d.get("mode", "fixed"))
        except KeyError as exc:
            raise InputError(f"pencil JSON is missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed pencil JSON: {exc}") from None

    @classmethod
    def from_json(cls, path) -> "Pencil":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))


@dataclass
class Spectrum:
    """Signed, indexed spectrum of a triple at one parameter value.

    ``positives`` ascend (``lam_1 <= lam_2 <= ...``); ``negatives`` are
    listed from the one closest to zero (``lam_-1 >= lam_-2 >= ...``).
    Vector columns follow the same order and are ``A``-normalized.
    ``kernel_vectors`` span ``Ker(B^t)`` on the active space (the
    eigenvalues at infinity).
    """

    t: float
    positives: np.ndarray
    negatives: np.ndarray
    zero_multiplicity: int
    infinity_multiplicity: int
    pos_vectors: np.ndarray
    neg_vectors: np.ndarray
    kernel_vectors: np.ndarray
    active_dim: int
    G: np.ndarray
    pre_threshold: bool = False

    @property
    def n_pos(self) -> int:
        return len(self.positives)

    @property
    def n_neg(self) -> int:
        return len(self.negatives)

    def lam(self, j: int) -> float:
        """Signed index access: ``lam(2)`` is the second positive eigenvalue,
        ``lam(-1)`` the negative eigenvalue closest to zero."""
        if j > 0:
            return float(self.positives[j - 1])
        if j < 0:
            return float(self.negatives[-j - 1])
        raise IndexError("index 0 is not an eigenvalue index")

    def _g_normalize(self, V):
        if V.shape[1] == 0:
            return V
        norms = np.sqrt(np.einsum("ij,ik,kj->j", V, self.G, V))
        return V / norms

    @property
    def pos_vectors_g(self) -> np.ndarray:
        return self._g_normalize(self.pos_vectors)

    @property
    def neg_vectors_g(self) -> np.ndarray:
        return self._g_normalize(self.neg_vectors)

    @property
    def mu_scale(self) -> float:
        """``max |1/lam|`` over finite eigenvalues (0 when there are none)."""
        m = 0.0
        for arr in (self.positives, self.negatives):
            if len(arr):
                m = max(m, float(np.max(1.0 / np.abs(arr))))
        return m

    def finite(self):
        """All finite eigenvalues ascending, with matching vector columns."""
        lam = np.concatenate([self.negatives[::-1], self.positives])
        V = np.hstack([self.neg_vectors[:, ::-1], self.pos_vectors])
        return lam, V


def _tie_break(mu, V, scale):
    # deterministic order inside clusters of equal eigenvalues
    order = list(range(len(mu)))
    tol = 1e-12 * max(scale, 1e-300)
    i = 0
    while i < len(mu):
        j = i + 1
        while j < len(mu) and abs(mu[j] - mu[i]) <= tol:
            j += 1
        if j - i > 1:
            block = sorted(range(i, j), key=lambda k: tuple(np.round(-V[:, k], 12)))
            order[i:j] = block
        i = j
    return mu[order], V[:, order]


def _spectrum_from_reciprocal(t, mu, V, G, active_dim, pre_threshold=False) -> Spectrum:
    """Split ascending reciprocal eigenvalues ``mu`` into signed classes."""
    n = V.shape[0]
    scale = float(np.max(np.abs(mu))) if len(mu) else 0.0
    if len(mu):
        mu, V = _tie_break(mu, V, scale)
    if scale == 0.0:
        zero_mask = np.ones(len(mu), dtype=bool)
    else:
        zero_mask = np.abs(mu) <= la.KERNEL_RTOL * scale
    pos = (~zero_mask) & (mu > 0)
    neg = (~zero_mask) & (mu < 0)
    # mu descending <=> lam ascending on the positive side
    pidx = np.flatnonzero(pos)[::-1]
    nidx = np.flatnonzero(neg)
    return Spectrum(
        t=t,
        positives=1.0 / mu[pidx],
        negatives=1.0 / mu[nidx],
        zero_multiplicity=0,
        infinity_multiplicity=int(np.sum(zero_mask)),
        pos_vectors=V[:, pidx] if len(pidx) else np.zeros((n, 0)),
        neg_vectors=V[:, nidx] if len(nidx) else np.zeros((n, 0)),
        kernel_vectors=V[:, zero_mask] if np.any(zero_mask) else np.zeros((n, 0)),
        active_dim=active_dim,
        G=G,
        pre_threshold=pre_threshold,
    )


def _solve_fixed(M, A):
    dec = la.gen_sym_def_eigen(M, A)
    return dec.eigenvalues, dec.vectors


def _check_residuals(p: Pencil, spec: Spectrum):
    Bt = p.Bt(spec.t)
    nA = np.linalg.norm(p.A, 2)
    nB = np.linalg.norm(Bt, 2)
    lam, V = spec.finite()
    for k in range(len(lam)):
        v = V[:, k]
        mu = 1.0 / lam[k]
        r = np.linalg.norm(Bt @ v - mu * (p.A @ v))
        if r > RESIDUAL_RTOL * (nB + abs(mu) * nA) * max(np.linalg.norm(v), 1.0):
            raise PostconditionError(f"eigenpair residual {r:.3e} at t={spec.t} violates the full eigenequation")


def spectrum_at(p: Pencil, t: float, allow_pre_threshold: bool = False) -> Spectrum:
    """Spectrum of ``(H, a, b^t)`` at a fixed parameter.

    In moving mode the problem is deflated onto ``H^t`` and requires
    ``|t| > threshold_T(p)``. With ``allow_pre_threshold`` the full
    (non-deflated) problem is solved instead below the threshold and the
    result is flagged ``pre_threshold``.
    """
    t = float(t)
    if p.mode == "fixed":
        mu, V = _solve_fixed(p.Bt(t), p.A)
        return _spectrum_from_reciprocal(t, mu, V, p.G, p.n)
    T = threshold_T(p)
    if abs(t) <= T:
        if not allow_pre_threshold:
            raise PreconditionError(f"moving mode requires |t| > T = {T:.12g}, got t = {t:.12g}")
        return spectrum_full(p, t)
    red, Z = deflate_moving(p, t)
    mu, Y = _solve_fixed(red.Bt(t), red.A)
    spec = _spectrum_from_reciprocal(t, mu, Z @ Y, p.G, red.n)
    _check_residuals(p, spec)
    return spec


def spectrum_full(p: Pencil, t: float) -> Spectrum:
    """Spectrum of the full problem ``A v = lam B^t v`` on all of ``R^n``
    by QZ, without deflation.

    Used below the moving-mode threshold and as an independent route for
    checking that deflation preserves the nonzero spectrum. Eigenvalue
    zero (from ``Ker A``) is reported in ``zero_multiplicity``.
    """
    t = float(t)
    A = p.A
    Bt = p.Bt(t)
    nA = np.linalg.norm(A, 2)
    nB = np.linalg.norm(Bt, 2)
    if nB == 0.0:
        n = p.n
        return Spectrum(t, np.empty(0), np.empty(0), 0, n, np.zeros((n, 0)), np.zeros((n, 0)),
                        np.eye(n), n, p.G, pre_threshold=True)
    w, V = sla.eig(A / nA, Bt / nB, homogeneous_eigvals=True)
    alpha, beta = w
    nrm = np.hypot(np.abs(alpha), np.abs(beta))
    alpha, beta = alpha / nrm, beta / nrm
    zero = np.abs(alpha) <= 1e-9
    inf = (np.abs(beta) <= 1e-9) & ~zero
    fin = ~zero & ~inf
    lam = np.real(alpha[fin] / beta[fin]) * (nA / nB)
    Vf = np.real(V[:, fin])
    # A-normalize where possible
    an = np.sqrt(np.abs(np.einsum("ij,ik,kj->j", Vf, A, Vf)))
    an[an == 0] = 1.0
    Vf = Vf / an
    pos = lam > 0
    po = np.argsort(lam[pos])
    ne = np.argsort(-lam[~pos])
    n = p.n
    return Spectrum(
        t=t,
        positives=lam[pos][po],
        negatives=lam[~pos][ne],
        zero_multiplicity=int(np.sum(zero)),
        infinity_multiplicity=int(np.sum(inf)),
        pos_vectors=Vf[:, pos][:, po],
        neg_vectors=Vf[:, ~pos][:, ne],
        kernel_vectors=np.real(V[:, inf]),
        active_dim=n,
        G=p.G,
        pre_threshold=True,
    )


def limiting_spectrum(p: Pencil) -> Spectrum:
    """Spectrum of the limiting triple ``(Ker C, a, b)``.

    Vectors are returned in ambient coordinates. ``len(positives)``,
    ``len(negatives)`` and ``infinity_multiplicity`` are the counts
    ``J_+``, ``J_-`` and ``J_inf``.
    """
    K = p.K
    n = p.n
    if K.shape[1] == 0:
        return Spectrum(np.inf, np.empty(0), np.empty(0), 0, 0, np.zeros((n, 0)),
                        np.zeros((n, 0)), np.zeros((n, 0)), 0, p.G)
    AK = la.restrict_form(p.A, K)
    BK = la.restrict_form(p.B, K)
    if p.mode == "moving":
        w = np.linalg.eigvalsh(AK)
        if w[0] <= la.SPD_RTOL * max(abs(w[-1]), 1e-300):
            raise ConditionViolation("A is not positive definite on Ker(C): Ker(A) meets Ker(C)")
    mu, Y = _solve_fixed(BK, AK)
    return _spectrum_from_reciprocal(np.inf, mu, K @ Y, p.G, K.shape[1])


class _KerAData(NamedTuple):
    M_absB: float
    m_C: float
    T: float


def _kera_extremes(p: Pencil) -> _KerAData:
    if p.mode != "moving":
        raise NotApplicable("the threshold T is only defined in moving mode")
    W = p.kerA
    wb = np.linalg.eigvalsh(la.restrict_form(p.B, W))
    wc = np.linalg.eigvalsh(la.restrict_form(p.C, W))
    M = float(np.max(np.abs(wb)))
    m = float(wc[0])
    if m <= la.KERNEL_RTOL * max(1.0, float(np.max(np.abs(wc)))):
        raise ConditionViolation("min of C over the unit sphere of Ker(A) is zero")
    return _KerAData(M, m, M / m + 1.0)


def threshold_T(p: Pencil) -> float:
    """``T = M_|B| / m_C + 1`` with the max of ``|B|`` and the min of ``C``
    taken over the ``G``-unit sphere of ``Ker(A)``.

    For ``|t| > T`` the form ``b^t`` is definite on ``Ker(A)``.
    """
    cached = p.__dict__.get("_threshold")
    if cached is None:
        cached = _kera_extremes(p).T
        p.__dict__["_threshold"] = cached
    return cached


def threshold_audit(p: Pencil, n_samples: int = 64, seed: int = 0) -> float:
    """Largest sampled ``B^t(w)`` over unit ``w`` in ``Ker(A)`` and ``t > T``.

    Negative means the sign property behind the threshold held on every
    sample.
    """
    T = threshold_T(p)
    rng = np.random.default_rng(seed)
    W = p.kerA
    worst = -np.inf
    for _ in range(n_samples):
        x = rng.standard_normal(W.shape[1])
        w = W @ (x / np.linalg.norm(x))
        t = T * (1.0 + 1e-9) + rng.exponential(T)
        worst = max(worst, float(w @ p.Bt(t) @ w))
    return worst


def deflate_moving(p: Pencil, t: float):
    """Restrict a moving-mode pencil to ``H^t``.

    Returns
    -------
    reduced : Pencil
        Fixed-mode pencil of the restricted forms in ``G``-orthonormal
        coordinates (its Gram matrix is the identity).
    Z : ndarray
        ``G``-orthonormal basis of ``H^t``, shape ``(n, n - dim Ker A)``.
    """
    T = threshold_T(p)
    if abs(t) <= T:
        raise PreconditionError(f"deflation requires |t| > T = {T:.12g}, got t = {t:.12g}")
    W = p.kerA
    Z = la.null_space(W.T @ p.Bt(t))
    Z = la.metric_orthonormalize(Z, p.G)
    if Z.shape[1] != p.n - W.shape[1]:
        raise PostconditionError(f"dim H^t = {Z.shape[1]}, expected {p.n - W.shape[1]}")
    # H = H^t (+) Ker(A): the joint basis must be nonsingular
    L = np.linalg.cholesky(p.G)
    s = np.linalg.svd(L.T @ np.hstack([Z, W]), compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise PostconditionError("H^t and Ker(A) are not complementary")
    red = Pencil(
        la.restrict_form(p.A, Z),
        la.restrict_form(p.B, Z),
        la.restrict_form(p.C, Z),
        np.eye(Z.shape[1]),
        "fixed",
        check=False,
    )
    return red, Z


def hinf_basis(p: Pencil) -> np.ndarray:
    """``G``-orthonormal basis of ``H^inf = {u : b(u, w) = c(u, w) = 0, w in Ker A}``.

    In fixed mode ``Ker A = 0`` and this is the whole space.
    """
    if p.mode == "fixed":
        return la.metric_orthonormalize(np.eye(p.n), p.G)
    W = p.kerA
    N = la.null_space(np.vstack([W.T @ p.B, W.T @ p.C]))
    return la.metric_orthonormalize(N, p.G)


def k_cap_hinf(p: Pencil) -> np.ndarray:
    """Euclidean-orthonormal basis of ``K ∩ H^inf``.

    The kernel test on ``C`` restricted to ``H^inf`` is made against
    ``||C||``, not against the (possibly tiny) restricted matrix itself.
    """
    H = hinf_basis(p)
    if H.shape[1] == 0:
        return H
    Q, _ = np.linalg.qr(H)
    w, V = np.linalg.eigh(la.restrict_form(p.C, Q))
    cn = float(np.max(np.abs(np.linalg.eigvalsh(p.C))))
    return Q @ V[:, np.abs(w) <= la.KERNEL_RTOL * cn]


def negative_limit_count(p: Pencil) -> int:
    """How many negative eigenvalues drain to zero as ``t -> +inf``:
    ``rank C`` in fixed mode, ``codim of K ∩ H^inf in H^inf`` in moving mode."""
    if p.mode == "fixed":
        return p.rank_C
    return hinf_basis(p).shape[1] - k_cap_hinf(p).shape[1]


def singular_times(p: Pencil) -> np.ndarray:
    """Real ``t`` at which ``Ker(B - tC)`` is nontrivial, repeated by
    multiplicity, ascending.

    The generalized problem ``B v = t C v`` is reduced to the range of
    ``C`` (Schur complement over ``Ker C``, with the part of ``Ker C`` on
    which ``B`` vanishes turned into a linear constraint), which leaves a
    symmetric-definite problem. Roots are then polished by Newton steps on
    ``det(B - tC)``.

    Raises
    ------
    ConditionViolation
        If ``Ker B ∩ Ker C`` is nontrivial; the message names a common
        kernel vector.
    """
    B, C = p.B, p.C
    common = la.null_space(np.vstack([B, C]))
    if common.shape[1]:
        v = common[:, 0]
        raise ConditionViolation(f"Ker(B) ∩ Ker(C) contains {np.array2string(v, precision=6)}")
    wc, U = la.sym_eigen(C)
    rng_mask = wc > la.KERNEL_RTOL * float(np.max(np.abs(wc)))
    Ur, U0 = U[:, rng_mask], U[:, ~rng_mask]
    D = np.diag(wc[rng_mask])
    Brr = la.restrict_form(B, Ur)
    if U0.shape[1] == 0:
        S, Q = Brr, np.eye(Ur.shape[1])
    else:
        B00 = la.restrict_form(B, U0)
        B0r = U0.T @ B @ Ur
        Zk = la.kernel_basis(B00) if np.any(B00) else np.eye(B00.shape[0])
        Y = la.null_space(Zk.T) if Zk.shape[1] else np.eye(B00.shape[0])
        if Y.shape[1]:
            B11 = la.restrict_form(B00, Y)
            B1r = Y.T @ B0r
            S = Brr - B1r.T @ np.linalg.solve(B11, B1r)
        else:
            S = Brr
        Q = la.null_space(Zk.T @ B0r) if Zk.shape[1] else np.eye(Ur.shape[1])
    if Q.shape[1] == 0:
        return np.empty(0)
    ts = la.gen_sym_def_eigen(la.restrict_form(S, Q), la.restrict_form(D, Q)).eigenvalues
    return np.sort(np.array([_polish(B, C, t) for t in ts]))


def _polish(B, C, t, steps: int = 3) -> float:
    def merit(s):
        return np.linalg.svd(B - s * C, compute_uv=False)[-1]

    best, fbest = t, merit(t)
    cur = t
    for _ in range(steps):
        try:
            tr = np.trace(np.linalg.solve(B - cur * C, C))
        except np.linalg.LinAlgError:
            break
        if tr == 0 or not np.isfinite(tr):
            break
        cur = cur + 1.0 / tr
        f = merit(cur)
        if f < fbest:
            best, fbest = cur, f
        else:
            break
    return float(best)


def unique_times(ts, tol: float = 1e-9) -> list[tuple[float, int]]:
    """Collapse a sorted multiset of times into ``(t, multiplicity)`` pairs."""
    out: list[tuple[float, int]] = []
    for t in ts:
        if out and abs(t - out[-1][0]) <= tol * max(1.0, abs(t)):
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((float(t), 1))
    return out
