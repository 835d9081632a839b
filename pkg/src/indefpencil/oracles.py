"""Independent checks of computed spectra and sweeps.

``brute_force_spectrum`` shares no eigen-decomposition code with
:mod:`indefpencil.linalg`: it reduces the pencil to a symmetric tridiagonal
matrix with hand-written Cholesky and Householder steps and counts
eigenvalues by Sturm sequences. ``vc_lower_bound`` samples the sup-inf
variational characterization. ``run_audit_suite`` checks a sweep against
the quantitative statements about the curves.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from . import linalg as la
from ._io import atomic_write
from .continuation import ROUNDOFF, SweepReport, classify_asymptotics, value_tol
from .errors import InputError, PreconditionError
from .pencil import Pencil, Spectrum, hinf_basis, k_cap_hinf, negative_limit_count, spectrum_at

BRUTE_MAX_DIM = 8
REL_TOL = 1e-8


# -- hand-written dense kernels for the oracle ----------------------------------


def _cholesky(A):
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0:
            raise PreconditionError("oracle Cholesky: matrix is not positive definite")
        L[j, j] = math.sqrt(d)
        for i in range(j + 1, n):
            L[i, j] = (A[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def _forward(L, B):
    # solve L X = B column by column
    n = L.shape[0]
    X = np.zeros_like(B)
    for i in range(n):
        X[i] = (B[i] - L[i, :i] @ X[:i]) / L[i, i]
    return X


def _householder_tridiag(M):
    """Diagonal and off-diagonal of an orthogonally similar tridiagonal."""
    T = np.array(M, dtype=float)
    n = T.shape[0]
    for k in range(n - 2):
        x = T[k + 1 :, k].copy()
        alpha = -math.copysign(np.linalg.norm(x), x[0] if x[0] != 0 else 1.0)
        v = x.copy()
        v[0] -= alpha
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        v /= vn
        # T <- P T P with P = I - 2 v v^T acting on rows/cols k+1:
        S = T[k + 1 :, :]
        S -= 2.0 * np.outer(v, v @ S)
        S = T[:, k + 1 :]
        S -= 2.0 * np.outer(S @ v, v)
    return np.diag(T).copy(), np.diag(T, 1).copy()


def _householder_null(M):
    """Null space of a full-row-rank ``m x n`` matrix from the QR of ``M^T``."""
    m, n = M.shape
    R = np.array(M.T, dtype=float)
    Q = np.eye(n)
    for k in range(m):
        x = R[k:, k]
        alpha = -math.copysign(np.linalg.norm(x), x[0] if x[0] != 0 else 1.0)
        v = x.copy()
        v[0] -= alpha
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        v /= vn
        R[k:, :] -= 2.0 * np.outer(v, v @ R[k:, :])
        Q[:, k:] -= 2.0 * np.outer(Q[:, k:] @ v, v)
    return Q[:, m:]


def _reciprocal_eigs(M, A):
    L = _cholesky(0.5 * (A + A.T))
    X = _forward(L, M)            # L^-1 M
    S = _forward(L, X.T).T        # L^-1 M L^-T
    d, e = _householder_tridiag(0.5 * (S + S.T))
    return np.asarray(_kernels.tridiag_eigvalsh(d, e))


def brute_force_spectrum(p: Pencil, t: float) -> Spectrum:
    """Eigenvalues of ``A v = lam B^t v`` by an independent route.

    Only eigenvalues are produced: the vector fields of the returned
    :class:`Spectrum` are empty. Limited to dimension ``<= 8``.
    """
    n = p.n
    if n > BRUTE_MAX_DIM:
        raise InputError(f"brute-force oracle is limited to dimension {BRUTE_MAX_DIM}, got {n}")
    Bt = p.B - t * p.C
    if p.mode == "fixed":
        mu = _reciprocal_eigs(Bt, p.A)
        active = n
    else:
        Z = _householder_null(p.kerA.T @ Bt)
        mu = _reciprocal_eigs(Z.T @ Bt @ Z, Z.T @ p.A @ Z)
        active = Z.shape[1]
    scale = float(np.max(np.abs(mu))) if len(mu) else 0.0
    zero = np.abs(mu) <= la.KERNEL_RTOL * scale if scale > 0 else np.ones(len(mu), dtype=bool)
    pos = np.sort(1.0 / mu[(mu > 0) & ~zero])
    neg = np.sort(1.0 / mu[(mu < 0) & ~zero])[::-1]
    empty = np.zeros((n, 0))
    return Spectrum(float(t), pos, neg, 0, int(np.sum(zero)), empty, empty, empty, active, p.G)


# -- variational sampling --------------------------------------------------------


def _subspace_value(p, Bt, X):
    """``min B^t(u)`` over ``u`` in span X with ``A(u) = 1``, or None when
    ``A`` is (numerically) singular on span X."""
    X, _ = np.linalg.qr(X)
    Ax = la.restrict_form(p.A, X)
    w = np.linalg.eigvalsh(Ax)
    if w[0] <= 1e-10 * max(w[-1], 1e-300):
        return None
    return float(la.gen_sym_def_eigen(la.restrict_form(Bt, X), Ax).eigenvalues[0])


def vc_samples(p: Pencil, t: float, j: int, n_samples: int, seed=0, include_eigenspan=False):
    """Values of the inner infimum over random ``j``-dimensional subspaces.

    Directions are Gaussian in the ``G`` geometry. Subspaces on which ``A``
    degenerates (those meeting ``Ker A``) are rejected and redrawn.
    """
    if n_samples < 1:
        raise InputError("n_samples must be positive")
    spec = spectrum_at(p, t)
    if not 1 <= j <= spec.n_pos:
        raise PreconditionError(f"lambda_{j} does not exist at t={t}: only {spec.n_pos} positive eigenvalues")
    Bt = p.Bt(t)
    Lg = np.linalg.cholesky(p.G)
    rng = np.random.default_rng(seed)
    vals = []
    tries = 0
    while len(vals) < n_samples:
        tries += 1
        if tries > 20 * n_samples:
            raise PreconditionError("could not draw subspaces avoiding Ker(A)")
        Z = rng.standard_normal((p.n, j))
        X = np.linalg.solve(Lg.T, Z)
        v = _subspace_value(p, Bt, X)
        if v is not None:
            vals.append(v)
    if include_eigenspan:
        vals.append(_subspace_value(p, Bt, spec.pos_vectors[:, :j]))
    return np.array(vals), 1.0 / spec.positives[j - 1]


def vc_lower_bound(p: Pencil, t: float, j: int, n_samples: int = 200, seed=0, include_eigenspan=False) -> float:
    """Best sampled sup-inf value; never exceeds ``1 / lam_j^t``."""
    vals, _ = vc_samples(p, t, j, n_samples, seed, include_eigenspan)
    return float(np.max(vals))


# -- audit suite -------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    status: str  # pass | fail | skip
    margin: float
    witness: dict | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"


@dataclass
class AuditReport:
    checks: list = field(default_factory=list)
    seed: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "seed": self.seed, "checks": [asdict(c) for c in self.checks]}

    def to_json(self, path) -> None:
        atomic_write(path, json.dumps(self.to_dict(), indent=1, default=_json_default) + "\n")

    def summary_lines(self) -> list[str]:
        return [f"{c.name:24s} {c.status.upper():5s} margin={c.margin:.3e} {c.detail}" for c in self.checks]


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))


class _Worst:
    """Tracks the smallest slack and the witness that produced it."""

    def __init__(self):
        self.margin = math.inf
        self.witness = None

    def add(self, slack, **witness):
        if slack < self.margin:
            self.margin = float(slack)
            self.witness = witness

    def result(self, name, detail="", seed=0):
        if self.margin == math.inf:
            return CheckResult(name, "pass", math.inf, None, detail or "nothing to check")
        ok = self.margin >= 0
        wit = None if ok else dict(self.witness, seed=seed)
        return CheckResult(name, "pass" if ok else "fail", self.margin, wit, detail)


def _audited_curves(rep):
    return [c for c in rep.curves if not c.pre_threshold]


def check_monotonicity(rep: SweepReport, seed=0) -> CheckResult:
    w = _Worst()
    for c in _audited_curves(rep):
        for a in range(len(c.lam) - 1):
            s0, s1 = rep.spectra[c.idx[a]], rep.spectra[c.idx[a + 1]]
            tol = value_tol(s0, c.lam[a]) + value_tol(s1, c.lam[a + 1])
            w.add(c.lam[a + 1] - c.lam[a] + tol, curve=c.id, t=c.t[a + 1], j=a + 1,
                  values=[c.lam[a], c.lam[a + 1]], vector=np.asarray(c.vectors[a + 1]))
    return w.result("monotonicity", "curves non-decreasing in t", seed)


def check_count_monotonicity(rep: SweepReport, seed=0) -> CheckResult:
    if rep.pencil.mode != "fixed":
        return CheckResult("count_monotonicity", "skip", math.inf, None, "fixed mode only")
    w = _Worst()
    sp = rep.spectra
    for k in range(len(sp) - 1):
        w.add(sp[k].n_pos - sp[k + 1].n_pos, t=sp[k + 1].t, kind="positives", counts=[sp[k].n_pos, sp[k + 1].n_pos])
        w.add(sp[k + 1].n_neg - sp[k].n_neg, t=sp[k + 1].t, kind="negatives", counts=[sp[k].n_neg, sp[k + 1].n_neg])
    return w.result("count_monotonicity", "#positives non-increasing, #negatives non-decreasing", seed)


def check_upper_bound(rep: SweepReport, seed=0) -> CheckResult:
    w = _Worst()
    for c in _audited_curves(rep):
        if c.clause != "ii":
            continue
        for k, v in enumerate(c.lam):
            w.add(c.limit + value_tol(rep.spectra[c.idx[k]], v) - v, curve=c.id, t=c.t[k], value=v, limit=c.limit,
                  vector=np.asarray(c.vectors[k]))
    return w.result("upper_bound", "converging curves stay below their limit", seed)


def lipschitz_constant(p: Pencil) -> float:
    """``1 / lam_1(A, C)``: the largest eigenvalue of ``C v = nu A v``."""
    return float(la.gen_sym_def_eigen(p.C, p.A).eigenvalues[-1])


def check_lipschitz(rep: SweepReport, seed=0) -> CheckResult:
    p = rep.pencil
    if p.mode != "fixed":
        return CheckResult("lipschitz", "skip", math.inf, None, "fixed mode only")
    L = lipschitz_constant(p)
    w = _Worst()
    for c in _audited_curves(rep):
        if c.sign < 0:
            continue
        for a in range(len(c.lam) - 1):
            dt = c.t[a + 1] - c.t[a]
            dq = abs(1.0 / c.lam[a + 1] - 1.0 / c.lam[a])
            w.add(dt * L + 1e-8 - dq, curve=c.id, t=[c.t[a], c.t[a + 1]], quotient=dq / dt, constant=L)
    return w.result("lipschitz", f"|d(1/lam)/dt| <= {L:.12g}", seed)


def draining_mu(p: Pencil) -> float:
    """Largest eigenvalue of ``B v = mu A v``."""
    return float(la.gen_sym_def_eigen(p.B, p.A).eigenvalues[-1])


def check_draining(rep: SweepReport, seed=0) -> CheckResult:
    p = rep.pencil
    if p.mode != "fixed":
        return CheckResult("draining", "skip", math.inf, None, "fixed mode only")
    mu = draining_mu(p)
    if mu <= 0:
        return CheckResult("draining", "skip", math.inf, None, "B has no positive direction")
    w = _Worst()
    worst_g = 0.0
    for k, sp in enumerate(rep.spectra):
        if sp.t <= 0 or not rep.grid.audited[k] or sp.n_pos == 0:
            continue
        V = sp.pos_vectors
        cu = np.einsum("ij,ik,kj->j", V, p.C, V)
        for j in range(V.shape[1]):
            w.add(mu + 1e-8 * max(1.0, mu) - sp.t * cu[j], t=sp.t, j=j + 1, value=sp.t * cu[j], mu=mu,
                  vector=V[:, j])
        Vg = sp.pos_vectors_g
        worst_g = max(worst_g, float(np.max(sp.t * np.einsum("ij,ik,kj->j", Vg, p.C, Vg))))
    return w.result("draining", f"t C(u) <= mu = {mu:.12g}; G-normalized max {worst_g:.3e}", seed)


def decomposition_residual(p: Pencil, sp: Spectrum) -> float:
    """Largest violation of the a-orthogonal splitting at one t.

    Combines eigen-residuals, the deviation of ``V^T A V`` from the
    identity on the eigenvectors, the A-coupling of eigen and kernel
    vectors, and the rank deficit of all vectors together.
    """
    Bt = p.Bt(sp.t)
    lam, V = sp.finite()
    K = sp.kernel_vectors
    nA = np.linalg.norm(p.A, 2)
    nB = np.linalg.norm(Bt, 2)
    r = 0.0
    for k in range(len(lam)):
        v = V[:, k]
        mu = 1.0 / lam[k]
        r = max(r, np.linalg.norm(Bt @ v - mu * (p.A @ v)) / ((nB + abs(mu) * nA) * max(1.0, np.linalg.norm(v))))
    if len(lam):
        r = max(r, float(np.max(np.abs(V.T @ p.A @ V - np.eye(len(lam))))) / max(1.0, nA))
    if K.shape[1] and len(lam):
        Kn = K / np.linalg.norm(K, axis=0)
        r = max(r, float(np.max(np.abs(V.T @ p.A @ Kn))) / max(1.0, nA))
    allv = np.hstack([V, K])
    if allv.shape[1] != sp.active_dim:
        return math.inf
    if allv.shape[1]:
        Q = allv / np.linalg.norm(allv, axis=0)
        s = np.linalg.svd(Q, compute_uv=False)
        if s[-1] < 1e-8:
            r = max(r, 1.0)
    return float(r)


def check_decomposition(rep: SweepReport, seed=0) -> CheckResult:
    w = _Worst()
    for k, sp in enumerate(rep.spectra):
        if not rep.grid.audited[k]:
            continue
        res = decomposition_residual(rep.pencil, sp)
        w.add(REL_TOL - res, t=sp.t, residual=res)
    return w.result("decomposition", "A-orthogonal splitting spans the active space", seed)


def negative_drain_data(p: Pencil):
    """Subspace ``H'``, its constants ``lam_j(H', a, c)`` and ``M``.

    Fixed mode: ``H' = range(C)``. Moving mode: the ``G``-complement of
    ``K ∩ H^inf`` inside ``H^inf``, which has dimension
    ``negative_limit_count`` and lies in every ``H^t``.
    """
    if p.mode == "fixed":
        w, U = la.sym_eigen(p.C)
        H = U[:, w > la.KERNEL_RTOL * float(np.max(np.abs(w)))]
    else:
        Hinf = hinf_basis(p)
        N = k_cap_hinf(p)
        if N.shape[1]:
            # Hinf is G-orthonormal, so coordinates are G-inner products
            y = Hinf.T @ p.G @ N
            H = Hinf @ la.null_space(y.T)
        else:
            H = Hinf
    if H.shape[1] == 0:
        return H, np.empty(0), 0.0
    Ah = la.restrict_form(p.A, H)
    lam_c = 1.0 / la.gen_sym_def_eigen(la.restrict_form(p.C, H), Ah).eigenvalues[::-1]
    mb = float(la.gen_sym_def_eigen(la.restrict_form(p.B, H), Ah).eigenvalues[-1])
    mc = float(la.gen_sym_def_eigen(la.restrict_form(p.C, H), Ah).eigenvalues[0])
    return H, lam_c, max(mb, 0.0) / mc


def check_negative_drain(rep: SweepReport, seed=0) -> CheckResult:
    p = rep.pencil
    H, lam_c, M = negative_drain_data(p)
    r = min(negative_limit_count(p), len(lam_c))
    w = _Worst()
    for k, sp in enumerate(rep.spectra):
        if not rep.grid.audited[k] or sp.t <= M + 1.0:
            continue
        for j in range(min(r, sp.n_neg)):
            bound = lam_c[j] / (sp.t - M)
            w.add(bound + 1e-8 - abs(sp.negatives[j]), t=sp.t, j=-(j + 1), value=float(sp.negatives[j]),
                  bound=bound, vector=sp.neg_vectors[:, j])
    return w.result("negative_drain", f"|lam_-j| <= lam_j(H',a,c)/(t - M), M = {M:.6g}", seed)


def check_vc(rep: SweepReport, n_samples=50, n_times=3, seed=0) -> CheckResult:
    p = rep.pencil
    w = _Worst()
    # in moving mode the sup-inf over subspaces avoiding Ker(A) needs
    # B^t < 0 on Ker(A), i.e. t > T (not t < -T)
    tmin = rep.grid.T if p.mode == "moving" else -math.inf
    idx = [k for k, sp in enumerate(rep.spectra) if rep.grid.audited[k] and sp.n_pos and sp.t > tmin]
    if idx:
        picks = np.linspace(0, len(idx) - 1, min(n_times, len(idx))).round().astype(int)
        for q, k in enumerate(picks):
            sp = rep.spectra[idx[k]]
            for j in range(1, sp.n_pos + 1):
                vals, target = vc_samples(p, sp.t, j, n_samples, seed=[seed, q, j], include_eigenspan=True)
                tol = 1e-9 * max(1.0, abs(target)) + ROUNDOFF * sp.mu_scale
                w.add(target + tol - float(np.max(vals[:-1])), t=sp.t, j=j, sampled=float(np.max(vals[:-1])))
                w.add(tol - abs(vals[-1] - target), t=sp.t, j=j, eigenspan=float(vals[-1]), target=target)
    return w.result("vc_sampling", "sampled sup-inf <= 1/lam_j, attained on the eigen-span", seed)


def check_oracle(rep: SweepReport, n_times=5, seed=0) -> CheckResult:
    p = rep.pencil
    if p.n > BRUTE_MAX_DIM:
        return CheckResult("oracle_agreement", "skip", math.inf, None, f"dimension {p.n} > {BRUTE_MAX_DIM}")
    w = _Worst()
    idx = [k for k in range(len(rep.spectra)) if rep.grid.audited[k]]
    rng = np.random.default_rng([seed, 7])
    for k in rng.choice(idx, size=min(n_times, len(idx)), replace=False) if idx else []:
        sp = rep.spectra[k]
        w.add(oracle_gap(p, sp), t=sp.t)
    return w.result("oracle_agreement", "brute-force eigenvalues within 1e-7", seed)


def oracle_gap(p: Pencil, sp: Spectrum, tol=1e-7) -> float:
    """``tol`` minus the largest relative eigenvalue mismatch (inf counts
    must agree, else ``-inf``)."""
    bf = brute_force_spectrum(p, sp.t)
    if bf.n_pos != sp.n_pos or bf.n_neg != sp.n_neg:
        return -math.inf
    gap = 0.0
    for a, b in ((bf.positives, sp.positives), (bf.negatives, sp.negatives)):
        if len(a):
            gap = max(gap, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))))
    return tol - gap


CORE_CHECKS = (
    check_monotonicity,
    check_count_monotonicity,
    check_upper_bound,
    check_lipschitz,
    check_draining,
    check_decomposition,
    check_negative_drain,
)


def run_audit_suite(p: Pencil, report: SweepReport, seed: int = 0, extras: bool = False) -> AuditReport:
    """Run the curve audits in a fixed order.

    With ``extras`` the variational sampling and brute-force oracle checks
    are appended. Failures are recorded, never raised.
    """
    if report.pencil is not p:
        raise InputError("report was computed for a different pencil")
    if not report.clause_counts:
        try:
            classify_asymptotics(report)
        except PreconditionError:
            pass
    out = AuditReport(seed=seed)
    for fn in CORE_CHECKS:
        out.checks.append(fn(report, seed=seed))
    if report.clause_counts:
        bad = report.classification_failures
        out.checks.append(
            CheckResult("classification", "fail" if bad else "pass", -1.0 if bad else 0.0,
                        {"failures": bad, "seed": seed} if bad else None,
                        " ".join(f"({k})={v}" for k, v in report.clause_counts.items()))
        )
    if extras:
        out.checks.append(check_vc(report, seed=seed))
        out.checks.append(check_oracle(report, seed=seed))
    report.audit = out
    return out


def corrupt_report(report: SweepReport, curve_id: int | None = None) -> SweepReport:
    """Negative control: make one positive curve decrease somewhere.

    Picks the longest positive curve when ``curve_id`` is omitted and
    swaps two of its values.
    """
    cands = [c for c in report.curves if c.sign > 0 and len(c.lam) >= 3 and not c.pre_threshold]
    if curve_id is not None:
        cands = [c for c in cands if c.id == curve_id]
    if not cands:
        raise InputError("no positive curve with at least three points to corrupt")
    c = max(cands, key=lambda c: len(c.lam))
    k = len(c.lam) // 2
    lo, hi = c.lam[k], c.lam[k + 1]
    c.lam[k], c.lam[k + 1] = hi + abs(hi - lo) + 1e-3 * max(1.0, abs(hi)), lo
    return report
