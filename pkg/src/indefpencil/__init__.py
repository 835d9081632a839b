"""Spectra of indefinite pencils ``A v = lam (B - t C) v`` and their limits
as ``t -> +-inf``.

Modules: :mod:`~indefpencil.linalg` (dense kernels), :mod:`~indefpencil.pencil`
(spectrum at fixed ``t``, limiting problem, thresholds),
:mod:`~indefpencil.continuation` (curve tracking and classification),
:mod:`~indefpencil.sturm1d` (closed-form interval problem),
:mod:`~indefpencil.fem1d` (1-D Galerkin assembly) and
:mod:`~indefpencil.oracles` (independent checks and audits).
"""
from ._kernels import BACKEND
from .continuation import classify_asymptotics, emit_curves, make_grid, read_curves, sweep
from .errors import (
    ConditionViolation,
    InputError,
    NotApplicable,
    PencilError,
    PostconditionError,
    PreconditionError,
)
from .pencil import (
    Pencil,
    Spectrum,
    deflate_moving,
    hinf_basis,
    limiting_spectrum,
    negative_limit_count,
    singular_times,
    spectrum_at,
    threshold_T,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Pencil",
    "Spectrum",
    "spectrum_at",
    "limiting_spectrum",
    "threshold_T",
    "singular_times",
    "deflate_moving",
    "hinf_basis",
    "negative_limit_count",
    "make_grid",
    "sweep",
    "classify_asymptotics",
    "emit_curves",
    "read_curves",
    "PencilError",
    "InputError",
    "PreconditionError",
    "ConditionViolation",
    "NotApplicable",
    "PostconditionError",
]
