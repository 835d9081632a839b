"""Closed-form principal eigenpair of the two-piece Neumann problem.

On ``(-1, 1)`` solve ``-u'' = lam * w_t * u`` with ``u'(-1) = u'(1) = 0`` and
weight ``w_t = 1`` on ``(-1, 0)``, ``w_t = -t`` on ``(0, 1)``. For ``t > 1`` the
principal positive eigenfunction is

    u(x) = cos(sqrt(lam) (x + 1))                          on [-1, 0]
    u(x) = cos(sqrt(lam)) cosh(k (x - 1)) / cosh(k)        on [0, 1]

with ``k = sqrt(lam t)``, and ``lam`` is the root in ``(0, (pi/2)^2)`` of the
derivative-matching condition at ``x = 0``. As ``t -> inf`` the root rises to
``(pi/2)^2``, the first eigenvalue of the mixed problem on ``(-1, 0)`` with
``u'(-1) = 0`` and ``u(0) = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError, PreconditionError

PI2_SQ = (0.5 * math.pi) ** 2
POLE_EPS = 1e-9
POLE_COS_TOL = 1e-12


@dataclass(frozen=True)
class ShootingEigenpair:
    """Principal eigenpair; ``u`` has max-norm one, attained at ``x = -1``.

    ``left_amp`` multiplies ``cos(sqrt(lam)(x + 1))`` and ``right_amp`` is
    the value at ``x = 1`` of the ``cosh(k (x - 1))`` piece.
    """

    t: float
    lam: float
    left_amp: float
    right_amp: float

    @property
    def k(self) -> float:
        return math.sqrt(self.lam * self.t)

    @property
    def u0(self) -> float:
        return self.left_amp * math.cos(math.sqrt(self.lam))

    def interface_jumps(self) -> tuple[float, float]:
        """(value jump, derivative jump) at ``x = 0``, right minus left."""
        s, k = math.sqrt(self.lam), self.k
        left_v = self.u0
        left_d = -self.left_amp * s * math.sin(s)
        right_v = self.u0
        right_d = -self.u0 * k * math.tanh(k)
        return right_v - left_v, right_d - left_d


def matching_residual(lam: float, t: float) -> float:
    """``sqrt(lam) tan(sqrt(lam)) - sqrt(lam t) tanh(sqrt(lam t))``.

    Zero exactly at principal-branch eigenvalues. Raises near the poles of
    ``tan`` so callers keep their brackets away from them.
    """
    if not lam > 0 or not t > 0:
        raise InputError(f"need lam > 0 and t > 0, got lam={lam}, t={t}")
    if abs(math.cos(math.sqrt(lam))) < POLE_COS_TOL:
        raise PreconditionError(f"lam={lam!r} sits on a pole of the residual")
    return _kernels.matching_residual(float(lam), float(t))


def _check_t(t):
    t = float(t)
    if not math.isfinite(t):
        raise InputError(f"t must be finite, got {t}")
    if t <= 1.0:
        raise PreconditionError(
            f"no positive principal eigenvalue for t = {t:g}: the principal eigenvalue "
            f"takes the sign opposite to the weight integral 1 - t = {1 - t:g}, which is >= 0"
        )
    return t


def first_positive_eig(t: float, tol: float = 1e-15) -> float:
    """Principal positive eigenvalue for ``t > 1`` by bisection.

    The bracket is ``(lo, (pi/2)^2 - 1e-9)``; near ``lam = 0`` the residual
    behaves like ``lam (1 - t) < 0`` and below the pole it is positive.
    """
    t = _check_t(t)
    hi = PI2_SQ - POLE_EPS
    lo = 0.5 * hi
    for _ in range(200):
        if _kernels.matching_residual(lo, t) < 0:
            break
        lo *= 0.5
    else:
        raise PreconditionError(f"could not bracket the principal root for t = {t:g}")
    return float(_kernels.shooting_bisect(t, lo, hi, tol))


def eigenpair(t: float) -> ShootingEigenpair:
    lam = first_positive_eig(t)
    k = math.sqrt(lam * t)
    u0 = math.cos(math.sqrt(lam))
    right = 2.0 * u0 * math.exp(-k) / (1.0 + math.exp(-2.0 * k))  # u0 / cosh(k)
    return ShootingEigenpair(t=float(t), lam=lam, left_amp=1.0, right_amp=right)


def limiting_eig(j: int) -> float:
    """``((2j - 1) pi / 2)^2``, the j-th eigenvalue of the mixed problem on
    ``(-1, 0)``."""
    if int(j) != j or j < 1:
        raise InputError(f"j must be a positive integer, got {j}")
    return ((2 * j - 1) * 0.5 * math.pi) ** 2


def eigenfunction_sample(pair: ShootingEigenpair, xs) -> np.ndarray:
    """Evaluate the eigenfunction at sorted points of ``[-1, 1]``."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and (xs.min() < -1.0 or xs.max() > 1.0):
        raise InputError("sample points must lie in [-1, 1]")
    s, k = math.sqrt(pair.lam), pair.k
    out = np.empty_like(xs)
    left = xs <= 0
    out[left] = pair.left_amp * np.cos(s * (xs[left] + 1.0))
    xr = xs[~left]
    # cosh(k (x - 1)) / cosh(k) without overflow
    ratio = np.exp(-k * xr) * (1.0 + np.exp(-2.0 * k * (1.0 - xr))) / (1.0 + math.exp(-2.0 * k))
    out[~left] = pair.u0 * ratio
    return out


def interface_value(t: float) -> float:
    """``u(0)`` of the max-norm-one principal eigenfunction."""
    return eigenpair(t).u0


def energy_parts(pair: ShootingEigenpair) -> dict:
    """Closed-form integrals of the eigenfunction.

    Returns ``a = int u'^2`` over ``(-1, 1)``, ``b_plus = int_{-1}^0 u^2`` and
    ``c = int_0^1 u^2``; ``a = lam (b_plus - t c)`` holds at an eigenpair.
    """
    s, k, u0 = math.sqrt(pair.lam), pair.k, pair.u0
    A2 = pair.left_amp**2
    sech2 = 1.0 / math.cosh(k) ** 2 if k < 350 else 0.0
    th = math.tanh(k)
    a_left = A2 * pair.lam * (0.5 - math.sin(2 * s) / (4 * s))
    b_plus = A2 * (0.5 + math.sin(2 * s) / (4 * s))
    a_right = 0.5 * u0**2 * (k * th - k * k * sech2)
    c = 0.5 * u0**2 * (th / k + sech2)
    return {"a": a_left + a_right, "b_plus": b_plus, "c": c}


def draining_product(t: float) -> float:
    """``t * C(u)`` for the eigenfunction scaled to ``A(u) = 1``."""
    e = energy_parts(eigenpair(t))
    return float(t) * e["c"] / e["a"]


def fig2_table(ts=(1.5, 5.0, 100.0, 1e5)) -> list[tuple[float, float, float]]:
    """Rows ``(t, lambda, u0)``."""
    rows = []
    for t in ts:
        pr = eigenpair(t)
        rows.append((float(t), pr.lam, pr.u0))
    return rows
