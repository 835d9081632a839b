"""1-D Galerkin discretizations of weighted second- and fourth-order problems.

Second-order problems use continuous P1 elements; beam problems use C1
Hermite cubics with nodal (value, slope) degrees of freedom. Weights ``b``
and ``c`` are constant on each element, so all element matrices are exact.

Problem rows
------------
=====================  ===========================================  =======
kind                   a(u, v)                                      mode
=====================  ===========================================  =======
DirichletSchrodinger   int u'v' + V u v, u = 0 at both ends         fixed
Robin                  int u'v' + alpha (u v)(ends)                 fixed
ClampedBeam            int u''v'' + tau u'v', u = u' = 0 at ends    fixed
Neumann                int u'v'                                     moving
FreeBeam               int u''v'' + tau u'v'                        moving
DynamicalBC            int u'v', b^t = int u v - t (u v)(ends)      moving
=====================  ===========================================  =======
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg as la
from .errors import ConditionViolation, InputError, PostconditionError
from .pencil import Pencil, spectrum_at, threshold_T

KINDS = ("DirichletSchrodinger", "Robin", "ClampedBeam", "Neumann", "FreeBeam", "DynamicalBC")
FOURTH_ORDER = ("ClampedBeam", "FreeBeam")
MOVING = ("Neumann", "FreeBeam", "DynamicalBC")


@dataclass(frozen=True)
class ProblemKind:
    """One problem row with its parameters.

    ``V`` is a scalar or per-element array (DirichletSchrodinger), ``alpha``
    the Robin coefficient and ``tau`` the beam tension.
    """

    name: str
    V: object = 0.0
    alpha: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        if self.name not in KINDS:
            raise InputError(f"unknown problem kind {self.name!r}; expected one of {KINDS}")
        if self.name == "Robin" and not self.alpha > 0:
            raise InputError(f"Robin needs alpha > 0, got {self.alpha}")
        if self.name in FOURTH_ORDER and not self.tau >= 0:
            raise InputError(f"{self.name} needs tau >= 0, got {self.tau}")
        if self.name == "DirichletSchrodinger" and np.any(np.asarray(self.V, dtype=float) < 0):
            raise InputError("DirichletSchrodinger needs V >= 0")

    @property
    def fourth_order(self) -> bool:
        return self.name in FOURTH_ORDER

    @property
    def mode(self) -> str:
        return "moving" if self.name in MOVING else "fixed"


@dataclass(frozen=True, eq=False)
class Mesh1D:
    nodes: np.ndarray
    interface_node: int | None = None

    @property
    def n_elems(self) -> int:
        return len(self.nodes) - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])


def make_mesh(x_min: float, x_max: float, n_elems: int, interface_x: float | None = None) -> Mesh1D:
    """Uniform mesh; an interface not already on a node is inserted as one."""
    if not (math.isfinite(x_min) and math.isfinite(x_max)) or x_min >= x_max:
        raise InputError(f"invalid domain [{x_min}, {x_max}]")
    if int(n_elems) != n_elems or n_elems < 1:
        raise InputError(f"n_elems must be a positive integer, got {n_elems}")
    nodes = np.linspace(x_min, x_max, int(n_elems) + 1)
    iface = None
    if interface_x is not None:
        if not x_min < interface_x < x_max:
            raise InputError(f"interface {interface_x} must lie strictly inside ({x_min}, {x_max})")
        tol = 1e-12 * (x_max - x_min)
        hit = np.flatnonzero(np.abs(nodes - interface_x) <= tol)
        if hit.size:
            nodes[hit[0]] = interface_x
            iface = int(hit[0])
        else:
            nodes = np.sort(np.append(nodes, interface_x))
            iface = int(np.flatnonzero(nodes == interface_x)[0])
    return Mesh1D(nodes=nodes, interface_node=iface)


@dataclass(frozen=True, eq=False)
class PiecewiseWeight:
    """Element-wise constant weights ``b`` and ``c >= 0``."""

    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).ravel()
        c = np.asarray(self.c, dtype=float).ravel()
        if b.shape != c.shape:
            raise InputError("b and c need one value per element")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InputError("weights must be finite")
        if np.any(c < 0):
            raise InputError("c must be nonnegative")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    def check_support(self):
        if not np.any(self.c > 0):
            raise ConditionViolation("c vanishes identically")
        if np.all(self.c > 0):
            raise ConditionViolation("{c = 0} is empty, so Ker(C) is trivial")

    @classmethod
    def from_functions(cls, mesh: Mesh1D, bfun, cfun) -> "PiecewiseWeight":
        xm = mesh.midpoints
        return cls(np.array([bfun(x) for x in xm]), np.array([cfun(x) for x in xm]))

    @classmethod
    def split(cls, mesh: Mesh1D, b_lr, c_lr) -> "PiecewiseWeight":
        """Two-valued weights, left and right of the interface node."""
        if mesh.interface_node is None:
            raise InputError("two-valued weights need an interface")
        xi = mesh.nodes[mesh.interface_node]
        left = mesh.midpoints < xi
        return cls(np.where(left, b_lr[0], b_lr[1]), np.where(left, c_lr[0], c_lr[1]))


def fig2_weight(mesh: Mesh1D) -> PiecewiseWeight:
    """``b = 1`` on the left of the interface, ``c = 1`` on the right."""
    return PiecewiseWeight.split(mesh, (1.0, 0.0), (0.0, 1.0))


# -- element matrices ----------------------------------------------------------


def _p1_stiff(h):
    return np.array([[1.0, -1.0], [-1.0, 1.0]]) / h


def _p1_mass(h):
    return np.array([[2.0, 1.0], [1.0, 2.0]]) * h / 6.0


def _herm_bend(h):
    return np.array(
        [
            [12, 6 * h, -12, 6 * h],
            [6 * h, 4 * h * h, -6 * h, 2 * h * h],
            [-12, -6 * h, 12, -6 * h],
            [6 * h, 2 * h * h, -6 * h, 4 * h * h],
        ]
    ) / h**3


def _herm_geom(h):
    return np.array(
        [
            [36, 3 * h, -36, 3 * h],
            [3 * h, 4 * h * h, -3 * h, -h * h],
            [-36, -3 * h, 36, -3 * h],
            [3 * h, -h * h, -3 * h, 4 * h * h],
        ]
    ) / (30.0 * h)


def _herm_mass(h):
    return np.array(
        [
            [156, 22 * h, 54, -13 * h],
            [22 * h, 4 * h * h, 13 * h, -3 * h * h],
            [54, 13 * h, 156, -22 * h],
            [-13 * h, -3 * h * h, -22 * h, 4 * h * h],
        ]
    ) * h / 420.0


class KernelInfo(NamedTuple):
    dim: int
    generators: tuple


def expected_kernel(kind: ProblemKind | str, tau: float = 0.0) -> KernelInfo:
    """Dimension and generators of ``Ker(a)`` for a problem row."""
    name = kind.name if isinstance(kind, ProblemKind) else kind
    if isinstance(kind, ProblemKind):
        tau = kind.tau
    if name in ("Neumann", "DynamicalBC"):
        return KernelInfo(1, ("1",))
    if name == "FreeBeam":
        return KernelInfo(2, ("1", "x")) if tau == 0 else KernelInfo(1, ("1",))
    if name in KINDS:
        return KernelInfo(0, ())
    raise InputError(f"unknown problem kind {name!r}")


@dataclass(eq=False)
class AssembledProblem:
    """Assembled pencil plus the mesh data needed to interpret its dofs.

    ``dof_x[i]`` is the node position of free dof ``i`` and ``dof_type[i]``
    is ``"u"`` (value) or ``"du"`` (slope).
    """

    pencil: Pencil
    kind: ProblemKind
    mesh: Mesh1D
    weight: PiecewiseWeight | None
    dof_x: np.ndarray
    dof_type: np.ndarray
    limiting: bool = False
    meta: dict = field(default_factory=dict)


def _global(kind: ProblemKind, mesh: Mesh1D, w: PiecewiseWeight | None, elems):
    """Global A, B, C, G over all dofs, summing only the listed elements."""
    nn = len(mesh.nodes)
    fourth = kind.fourth_order
    per = 2 if fourth else 1
    N = per * nn
    A, B, C, G = (np.zeros((N, N)) for _ in range(4))
    V = np.broadcast_to(np.asarray(kind.V, dtype=float), (mesh.n_elems,))
    for e in elems:
        h = mesh.h[e]
        idx = np.arange(per * e, per * e + 2 * per)
        ix = np.ix_(idx, idx)
        if fourth:
            Kb, Kg, M = _herm_bend(h), _herm_geom(h), _herm_mass(h)
            A[ix] += Kb + kind.tau * Kg
            G[ix] += Kb + Kg + M
        else:
            Kg, M = _p1_stiff(h), _p1_mass(h)
            A[ix] += Kg
            if kind.name == "DirichletSchrodinger":
                A[ix] += V[e] * M
            G[ix] += Kg + M
        if kind.name == "DynamicalBC":
            B[ix] += M
        else:
            B[ix] += w.b[e] * M
            C[ix] += w.c[e] * M
    ends = (0, per * (nn - 1))
    if kind.name == "Robin":
        for i in ends:
            A[i, i] += kind.alpha
    if kind.name == "DynamicalBC":
        for i in ends:
            C[i, i] += 1.0
    return A, B, C, G


def _dof_tables(mesh, fourth):
    if fourth:
        x = np.repeat(mesh.nodes, 2)
        typ = np.tile(np.array(["u", "du"]), len(mesh.nodes))
    else:
        x = mesh.nodes.copy()
        typ = np.array(["u"] * len(mesh.nodes))
    return x, typ


def _essential(kind: ProblemKind, nn: int) -> set:
    per = 2 if kind.fourth_order else 1
    last = per * (nn - 1)
    if kind.name == "DirichletSchrodinger":
        return {0, last}
    if kind.name == "ClampedBeam":
        return {0, 1, last, last + 1}
    return set()


def _kernel_vectors(kind: ProblemKind, mesh: Mesh1D, free):
    info = expected_kernel(kind)
    if info.dim == 0:
        return None
    nn = len(mesh.nodes)
    if kind.fourth_order:
        one = np.tile([1.0, 0.0], nn)
        cols = [one]
        if info.dim == 2:
            xv = np.column_stack([mesh.nodes, np.ones(nn)]).ravel()
            cols.append(xv)
    else:
        cols = [np.ones(nn)]
    return np.column_stack(cols)[free]


def assemble(kind: ProblemKind, mesh: Mesh1D, w: PiecewiseWeight | None = None) -> AssembledProblem:
    """Assemble the pencil ``(A, B, C, G)`` of one problem row.

    Essential conditions are imposed by deleting the constrained dofs.
    ``G`` is the full H1 (P1) or H2 (Hermite) Gram matrix. For
    ``DynamicalBC`` the weight is ignored: ``B`` is the mass matrix and
    ``C`` picks out the two endpoint values.
    """
    if kind.name != "DynamicalBC":
        if w is None:
            raise InputError(f"{kind.name} needs a weight")
        if len(w.b) != mesh.n_elems:
            raise InputError(f"weight has {len(w.b)} values for {mesh.n_elems} elements")
        w.check_support()
    A, B, C, G = _global(kind, mesh, w, range(mesh.n_elems))
    ess = _essential(kind, len(mesh.nodes))
    free = np.array([i for i in range(A.shape[0]) if i not in ess])
    sub = np.ix_(free, free)
    x, typ = _dof_tables(mesh, kind.fourth_order)
    kerA = _kernel_vectors(kind, mesh, free)
    p = Pencil(A[sub], B[sub], C[sub], G[sub], kind.mode, kerA)
    if kerA is not None and p.kerA.shape[1] != expected_kernel(kind).dim:
        raise PostconditionError("assembled kernel dimension differs from the expected one")
    return AssembledProblem(p, kind, mesh, w, x[free], typ[free])


def limiting_dofs(kind: ProblemKind, mesh: Mesh1D, w: PiecewiseWeight | None) -> np.ndarray:
    """Global dofs whose basis functions live entirely in ``{c = 0}`` and
    are not constrained by an outer essential condition."""
    nn = len(mesh.nodes)
    per = 2 if kind.fourth_order else 1
    ess = _essential(kind, nn)
    if kind.name == "DynamicalBC":
        # c lives on the boundary: limit is Dirichlet at both ends
        ess = ess | {0, per * (nn - 1)}
        touching = np.zeros(nn, dtype=bool)
    else:
        touching = np.zeros(nn, dtype=bool)
        hot = np.flatnonzero(w.c > 0)
        touching[hot] = True
        touching[hot + 1] = True
    keep = []
    for node in range(nn):
        if touching[node]:
            continue
        for k in range(per):
            d = per * node + k
            if d not in ess:
                keep.append(d)
    return np.array(keep, dtype=int)


def assemble_limiting(kind: ProblemKind, mesh: Mesh1D, w: PiecewiseWeight | None = None) -> AssembledProblem:
    """Assemble the limiting problem on ``{c = 0}``.

    Only elements with ``c = 0`` contribute; the interface dofs (value, and
    slope for beams) are removed as essential conditions and the outer
    boundary condition is kept. The result is a fixed-mode pencil whose
    ``C`` is zero, so ``spectrum_at(pencil, 0)`` is the limiting spectrum.
    """
    if kind.name == "DynamicalBC":
        elems = range(mesh.n_elems)
    else:
        if w is None:
            raise InputError(f"{kind.name} needs a weight")
        w.check_support()
        elems = np.flatnonzero(w.c == 0)
    A, B, C, G = _global(kind, mesh, w, elems)
    keep = limiting_dofs(kind, mesh, w)
    if len(keep) == 0:
        raise ConditionViolation("the limiting region carries no free dofs")
    sub = np.ix_(keep, keep)
    la.check_spd(A[sub], "limiting A")
    p = Pencil(A[sub], B[sub], np.zeros((len(keep), len(keep))), G[sub], "fixed", check=False)
    x, typ = _dof_tables(mesh, kind.fourth_order)
    return AssembledProblem(p, kind, mesh, w, x[keep], typ[keep], limiting=True)


def first_positive(p: Pencil, t: float) -> float:
    spec = spectrum_at(p, t)
    if spec.n_pos == 0:
        raise PostconditionError(f"no positive eigenvalue at t={t}")
    return float(spec.positives[0])


def convergence_study(kind: ProblemKind, mesh_sizes, t_list, *, domain=(-1.0, 1.0), interface=0.0,
                      weight=fig2_weight, reference=None) -> list[dict]:
    """First positive eigenvalue over a mesh-refinement sequence.

    Returns one row per ``(h, t)`` with the eigenvalue, the error against
    ``reference(t)`` when given (the Neumann rows default to the shooting
    solution) and the observed order from consecutive meshes. Without a
    reference the order is Richardson's, from three consecutive values.
    """
    hs = [float(h) for h in mesh_sizes]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise InputError("mesh sizes must decrease")
    if reference is None and kind.name == "Neumann":
        from .sturm1d import first_positive_eig

        reference = first_positive_eig
    length = domain[1] - domain[0]
    rows = []
    for t in t_list:
        vals = []
        for h in hs:
            n = int(round(length / h))
            mesh = make_mesh(domain[0], domain[1], n, interface)
            try:
                prob = assemble(kind, mesh, weight(mesh) if kind.name != "DynamicalBC" else None)
                lam = first_positive(prob.pencil, t)
            except Exception as exc:
                raise type(exc)(f"h={h:g}, t={t:g}: {exc}") from exc
            vals.append(lam)
        ref = reference(t) if reference is not None else None
        for i, (h, lam) in enumerate(zip(hs, vals)):
            row = {"h": h, "t": float(t), "lambda": lam, "ref": ref, "err": None, "order": None}
            if ref is not None:
                row["err"] = abs(lam - ref)
                if i > 0 and rows[-1]["err"] and row["err"]:
                    row["order"] = math.log(rows[-1]["err"] / row["err"]) / math.log(hs[i - 1] / h)
            elif i > 1:
                d1, d2 = vals[i - 1] - vals[i - 2], vals[i] - vals[i - 1]
                if d1 and d2 and d1 / d2 > 0:
                    row["order"] = math.log(d1 / d2) / math.log(hs[i - 1] / h)
            rows.append(row)
    return rows


def neumann_threshold(h: float) -> float:
    mesh = make_mesh(-1.0, 1.0, int(round(2.0 / h)), 0.0)
    return threshold_T(assemble(ProblemKind("Neumann"), mesh, fig2_weight(mesh)).pencil)


# -- config ---------------------------------------------------------------------


def problem_from_config(cfg: dict):
    """Build ``(kind, mesh, weight)`` from a problem config.

    ``b`` and ``c`` are per-element lists, or two-element lists giving the
    values left and right of the interface.
    """
    try:
        params = dict(cfg.get("params", {}))
        kind = ProblemKind(cfg["kind"], **params)
        x0, x1 = (float(v) for v in cfg["domain"])
        mesh = make_mesh(x0, x1, int(cfg["nElems"]), cfg.get("interface"))
    except KeyError as exc:
        raise InputError(f"problem config is missing {exc}") from None
    except TypeError as exc:
        raise InputError(f"bad problem config: {exc}") from None
    w = None
    if kind.name != "DynamicalBC" or "b" in cfg:
        if "b" not in cfg or "c" not in cfg:
            raise InputError("problem config needs 'b' and 'c'")
        b, c = list(cfg["b"]), list(cfg["c"])
        if len(b) == 2 and len(c) == 2 and mesh.n_elems != 2:
            w = PiecewiseWeight.split(mesh, b, c)
        else:
            w = PiecewiseWeight(b, c)
    return kind, mesh, w


def load_problem(path):
    with open(path) as fh:
        return problem_from_config(json.load(fh))
