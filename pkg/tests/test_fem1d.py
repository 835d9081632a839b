import math

import numpy as np
import pytest
from scipy.optimize import brentq

from indefpencil import fem1d as f
from indefpencil import linalg as la
from indefpencil.errors import ConditionViolation, InputError
from indefpencil.pencil import limiting_spectrum, negative_limit_count, spectrum_at, threshold_T
from indefpencil.sturm1d import first_positive_eig, limiting_eig


def beam_beta(fn, lo, hi):
    return brentq(fn, lo, hi, xtol=1e-14)


# clamped-clamped: cosh b cos b = 1; clamped-free: cosh b cos b = -1 (unit length)
BETA_CC = beam_beta(lambda b: math.cosh(b) * math.cos(b) - 1.0, 4.0, 5.0)
BETA_CF = beam_beta(lambda b: math.cosh(b) * math.cos(b) + 1.0, 1.5, 2.5)


def fig2_problem(kind, n):
    mesh = f.make_mesh(-1.0, 1.0, n, 0.0)
    w = None if kind == "DynamicalBC" else f.fig2_weight(mesh)
    return f.ProblemKind(kind), mesh, w


def test_beam_oracle_roots():
    assert BETA_CC == pytest.approx(4.730040744862704, abs=1e-12)
    assert BETA_CF == pytest.approx(1.875104068711961, abs=1e-12)


# -- meshes and weights -----------------------------------------------------------


def test_make_mesh_examples():
    np.testing.assert_allclose(f.make_mesh(-1, 1, 4, 0).nodes, [-1, -0.5, 0, 0.5, 1])
    m = f.make_mesh(-1, 1, 3, 0)
    assert m.n_elems == 4 and m.nodes[m.interface_node] == 0.0
    np.testing.assert_allclose(f.make_mesh(0, 3, 3).nodes, [0, 1, 2, 3])
    assert f.make_mesh(0, 3, 3).interface_node is None


@pytest.mark.parametrize("args", [(1, -1, 4, None), (-1, 1, 0, None), (-1, 1, 4, 1.0), (-1, 1, 2.5, None)])
def test_make_mesh_errors(args):
    with pytest.raises(InputError):
        f.make_mesh(*args)


def test_weight_validation():
    with pytest.raises(InputError):
        f.PiecewiseWeight([1.0, 1.0], [0.0, -1.0])
    with pytest.raises(InputError):
        f.PiecewiseWeight([1.0], [0.0, 1.0])
    with pytest.raises(ConditionViolation):
        f.PiecewiseWeight([1.0, 1.0], [1.0, 1.0]).check_support()
    with pytest.raises(ConditionViolation):
        f.PiecewiseWeight([1.0, 1.0], [0.0, 0.0]).check_support()


def test_problem_kind_validation():
    with pytest.raises(InputError):
        f.ProblemKind("Poisson")
    with pytest.raises(InputError):
        f.ProblemKind("Robin", alpha=0.0)
    with pytest.raises(InputError):
        f.ProblemKind("FreeBeam", tau=-1.0)


# -- assembly ------------------------------------------------------------------------


def test_neumann_two_elements_constants_in_kernel():
    mesh = f.make_mesh(-1, 1, 2, 0)
    pr = f.assemble(f.ProblemKind("Neumann"), mesh, f.PiecewiseWeight([1.0, 1.0], [0.0, 1.0]))
    p = pr.pencil
    assert p.A.shape == (3, 3) and p.mode == "moving"
    np.testing.assert_allclose(p.A @ np.ones(3), 0.0, atol=1e-15)


def test_dynamical_bc_C_picks_endpoints():
    pr = f.assemble(f.ProblemKind("DynamicalBC"), f.make_mesh(-1, 1, 4))
    C = pr.pencil.C
    nz = np.argwhere(C != 0)
    assert len(nz) == 2 and set(map(tuple, nz)) == {(0, 0), (4, 4)}
    assert np.all(C[C != 0] == 1.0)


def test_free_beam_kernel_is_linear_functions():
    mesh = f.make_mesh(-1, 1, 8, 0)
    pr = f.assemble(f.ProblemKind("FreeBeam"), mesh, f.fig2_weight(mesh))
    one = np.tile([1.0, 0.0], 9)
    x = np.column_stack([mesh.nodes, np.ones(9)]).ravel()
    assert la.same_span(la.kernel_basis(pr.pencil.A), np.column_stack([one, x]))
    assert pr.pencil.kerA.shape[1] == 2


@pytest.mark.parametrize(
    "name,tau,dim",
    [("Neumann", 0, 1), ("FreeBeam", 0, 2), ("FreeBeam", 1.0, 1), ("DynamicalBC", 0, 1),
     ("DirichletSchrodinger", 0, 0), ("Robin", 0, 0), ("ClampedBeam", 0, 0)],
)
def test_expected_kernel_matches_assembly(name, tau, dim):
    assert f.expected_kernel(name, tau).dim == dim
    kind = f.ProblemKind(name, tau=tau)
    mesh = f.make_mesh(-1, 1, 8, 0)
    pr = f.assemble(kind, mesh, None if name == "DynamicalBC" else f.fig2_weight(mesh))
    w = np.linalg.eigvalsh(pr.pencil.A)
    assert int(np.sum(np.abs(w) <= 1e-10 * np.max(np.abs(w)))) == dim
    assert pr.pencil.mode == ("moving" if dim else "fixed")


def test_assemble_needs_weight():
    with pytest.raises(InputError):
        f.assemble(f.ProblemKind("Neumann"), f.make_mesh(-1, 1, 4, 0))


# -- limiting problems ---------------------------------------------------------------


@pytest.mark.parametrize("kind", f.KINDS)
def test_limiting_spectrum_equals_assembled_limit(kind):
    kd, mesh, w = fig2_problem(kind, 16)
    full = limiting_spectrum(f.assemble(kd, mesh, w).pencil)
    lim = spectrum_at(f.assemble_limiting(kd, mesh, w).pencil, 0.0)
    np.testing.assert_allclose(np.sort(full.positives), np.sort(lim.positives), rtol=1e-9)
    np.testing.assert_allclose(np.sort(full.negatives), np.sort(lim.negatives), rtol=1e-9)


def test_neumann_limit_converges_to_mixed_problem():
    errs = []
    for n in (16, 32, 64):
        kd, mesh, w = fig2_problem("Neumann", n)
        errs.append(spectrum_at(f.assemble_limiting(kd, mesh, w).pencil, 0.0).positives[0] - limiting_eig(1))
    assert errs[-1] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_dynamical_bc_limit_is_dirichlet():
    kd, mesh, _ = fig2_problem("DynamicalBC", 64)
    lam = spectrum_at(f.assemble_limiting(kd, mesh).pencil, 0.0).positives[:3]
    exact = (np.arange(1, 4) * np.pi / 2) ** 2
    np.testing.assert_allclose(lam, exact, rtol=5e-3)


def test_clamped_beam_limit_vs_transcendental_oracle():
    kd, mesh, w = fig2_problem("ClampedBeam", 32)
    lam = spectrum_at(f.assemble_limiting(kd, mesh, w).pencil, 0.0).positives[0]
    assert lam == pytest.approx(BETA_CC**4, rel=1e-4)


def test_free_beam_limit_is_cantilever():
    kd, mesh, w = fig2_problem("FreeBeam", 32)
    lam = spectrum_at(f.assemble_limiting(kd, mesh, w).pencil, 0.0).positives[0]
    assert lam == pytest.approx(BETA_CF**4, rel=1e-5)


# -- convergence ---------------------------------------------------------------------


def test_neumann_convergence_vs_shooting():
    rows = f.convergence_study(f.ProblemKind("Neumann"), [1 / 16, 1 / 32, 1 / 64], [5.0])
    errs = [r["err"] for r in rows]
    assert all(3.5 <= a / b <= 4.5 for a, b in zip(errs, errs[1:]))
    assert rows[-1]["order"] == pytest.approx(2.0, abs=0.05)
    assert rows[0]["ref"] == first_positive_eig(5.0)


def test_dirichlet_schrodinger_t0_is_dirichlet_laplacian():
    mesh = f.make_mesh(-1, 1, 64, 0)
    pr = f.assemble(f.ProblemKind("DirichletSchrodinger"), mesh, f.PiecewiseWeight.split(mesh, (1, 1), (0, 1)))
    lam = spectrum_at(pr.pencil, 0.0).positives[:3]
    np.testing.assert_allclose(lam, (np.arange(1, 4) * np.pi / 2) ** 2, rtol=3e-3)


@pytest.mark.parametrize("kind,t", [("ClampedBeam", 5.0), ("FreeBeam", 50.0)])
def test_beam_observed_order(kind, t):
    rows = f.convergence_study(f.ProblemKind(kind), [1 / 8, 1 / 16, 1 / 32, 1 / 64], [t])
    assert rows[-1]["order"] >= 2.0


def test_convergence_study_needs_decreasing_h():
    with pytest.raises(InputError):
        f.convergence_study(f.ProblemKind("Neumann"), [1 / 32, 1 / 16], [5.0])


def test_threshold_neumann_tends_to_2():
    vals = [f.neumann_threshold(h) for h in (1 / 8, 1 / 64)]
    assert abs(vals[-1] - 2.0) < 0.05
    assert abs(vals[0] - 2.0) < 0.05


def test_dynamical_bc_counts():
    kd, mesh, _ = fig2_problem("DynamicalBC", 32)
    p = f.assemble(kd, mesh).pencil
    assert negative_limit_count(p) == 1
    assert threshold_T(p) == pytest.approx(2.0, rel=1e-12)


# -- config -----------------------------------------------------------------------------


def test_problem_from_config(tmp_path):
    cfg = {"kind": "Neumann", "domain": [-1, 1], "nElems": 8, "interface": 0.0, "b": [1, 0], "c": [0, 1]}
    kind, mesh, w = f.problem_from_config(cfg)
    assert kind.name == "Neumann" and mesh.n_elems == 8
    np.testing.assert_array_equal(w.c, [0] * 4 + [1] * 4)
    path = tmp_path / "p.json"
    path.write_text('{"kind": "DynamicalBC", "domain": [-1, 1], "nElems": 4}')
    assert f.load_problem(path)[2] is None


@pytest.mark.parametrize(
    "cfg",
    [{"domain": [-1, 1], "nElems": 4}, {"kind": "Neumann", "domain": [-1, 1], "nElems": 4},
     {"kind": "Robin", "params": {"alpha": -1}, "domain": [0, 1], "nElems": 4, "b": [1, 1], "c": [0, 1]}],
)
def test_problem_config_errors(cfg):
    with pytest.raises(InputError):
        f.problem_from_config(cfg)
