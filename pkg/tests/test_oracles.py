import copy
import json

import numpy as np
import pytest

from conftest import diag_pencil
from indefpencil.builtins import random_pencil
from indefpencil.continuation import classify_asymptotics, make_grid, sweep
from indefpencil.errors import InputError, PreconditionError
from indefpencil.oracles import (
    brute_force_spectrum,
    corrupt_report,
    decomposition_residual,
    draining_mu,
    lipschitz_constant,
    oracle_gap,
    run_audit_suite,
    vc_lower_bound,
    vc_samples,
)
from indefpencil.pencil import Pencil, spectrum_at


def test_brute_force_diagonal():
    s = brute_force_spectrum(diag_pencil([2.0, -3.0], [0.0, 1.0]), 0.0)
    np.testing.assert_allclose(s.positives, [0.5], rtol=1e-14)
    np.testing.assert_allclose(s.negatives, [-1 / 3], rtol=1e-14)


def test_brute_force_2x2_quadratic():
    p = Pencil(np.eye(2), [[2.0, -1.0], [-1.0, -3.0]], np.diag([1.0, 0.0]))
    s = brute_force_spectrum(p, 0.0)
    # reciprocals of the roots of mu^2 + mu - 7
    np.testing.assert_allclose(s.positives, [2 / (-1 + np.sqrt(29))], rtol=1e-13)
    np.testing.assert_allclose(s.negatives, [2 / (-1 - np.sqrt(29))], rtol=1e-13)


@pytest.mark.parametrize("t", [0.0, 10.0, 100.0])
def test_brute_force_builtin5x5(p5, t):
    assert oracle_gap(p5, spectrum_at(p5, t)) <= 1e-7
    s, b = spectrum_at(p5, t), brute_force_spectrum(p5, t)
    np.testing.assert_allclose(b.positives, s.positives, rtol=1e-10)
    np.testing.assert_allclose(b.negatives, s.negatives, rtol=1e-10)


def test_brute_force_dimension_limit():
    n = 9
    with pytest.raises(InputError):
        brute_force_spectrum(Pencil(np.eye(n), np.eye(n), np.diag([1.0] + [0.0] * (n - 1))), 0.0)


def test_brute_force_moving():
    rng = np.random.default_rng(11)
    p = random_pencil(rng, 5, "moving")
    from indefpencil.pencil import threshold_T

    t = 3.0 * threshold_T(p)
    assert oracle_gap(p, spectrum_at(p, t)) <= 1e-7


def test_vc_eigenspan_attains(p5):
    for t in (-5.0, 10.0):
        s = spectrum_at(p5, t)
        for j in range(1, s.n_pos + 1):
            vals, target = vc_samples(p5, t, j, 50, seed=1, include_eigenspan=True)
            assert np.all(vals <= target + 1e-9)
            assert abs(vals[-1] - target) <= 1e-9


def test_vc_random_subspaces_bounded_at_t10(p5):
    target = 1.0 / spectrum_at(p5, 10.0).positives[0]
    assert vc_lower_bound(p5, 10.0, 1, n_samples=200, seed=0) <= target + 1e-9


def test_vc_whole_space():
    # B^t positive definite: the only d-dimensional subspace is the space
    p = Pencil(np.eye(3), np.diag([1.0, 2.0, 4.0]), np.diag([0.0, 0.0, 1.0]))
    vals, target = vc_samples(p, -1.0, 3, 10, seed=0)
    np.testing.assert_allclose(vals, target, rtol=1e-12)


def test_vc_index_error(p5):
    with pytest.raises(PreconditionError):
        vc_lower_bound(p5, 10.0, 4)
    with pytest.raises(InputError):
        vc_samples(p5, 10.0, 1, 0)


def test_constants_builtin5x5(p5):
    assert lipschitz_constant(p5) == pytest.approx(2.0, abs=1e-12)
    assert draining_mu(p5) == pytest.approx(np.max(np.linalg.eigvalsh(p5.B)), rel=1e-12)


def test_decomposition_residual(p5):
    for t in (-30.0, 0.5, 7.0):
        assert decomposition_residual(p5, spectrum_at(p5, t)) <= 1e-8


def test_suite_builtin5x5_all_pass(p5, p5_report):
    rep = run_audit_suite(p5, p5_report, seed=0, extras=True)
    assert rep.passed, rep.summary_lines()
    names = [c.name for c in rep.checks]
    assert names[:7] == ["monotonicity", "count_monotonicity", "upper_bound", "lipschitz", "draining",
                         "decomposition", "negative_drain"]
    assert rep["draining"].passed


def test_suite_diagonal_all_pass():
    p = diag_pencil([2.0, -1.0, 3.0, 1.0], [1.0, 0.0, 2.0, 0.0])
    r = sweep(p, make_grid(-1e4, 1e5, 100, p))
    classify_asymptotics(r)
    assert run_audit_suite(p, r, extras=True).passed


def test_negative_control_fails_with_witness(p5_report):
    rep = copy.deepcopy(p5_report)
    corrupt_report(rep)
    audit = run_audit_suite(rep.pencil, rep, seed=7)
    assert not audit.passed
    mono = audit["monotonicity"]
    assert mono.status == "fail" and mono.margin < 0
    assert {"t", "curve", "vector", "values"} <= set(mono.witness)
    assert mono.witness["seed"] == 7


def test_audit_json(tmp_path, p5, p5_report):
    rep = run_audit_suite(p5, p5_report)
    rep.to_json(tmp_path / "a.json")
    doc = json.loads((tmp_path / "a.json").read_text())
    assert doc["passed"] is True and len(doc["checks"]) == 8


def test_audit_rejects_foreign_report(p5_report):
    with pytest.raises(InputError):
        run_audit_suite(diag_pencil([1.0, 2.0], [1.0, 0.0]), p5_report)
