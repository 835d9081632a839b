"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, repeated in the terminal summary.
"""
import math
import time

import numpy as np

from conftest import LAM1, LAM_NEG1, record
from indefpencil import fem1d, sturm1d
from indefpencil.builtins import paper5x5, random_pencil
from indefpencil.continuation import classify_asymptotics, make_grid, sweep
from indefpencil.oracles import (
    check_count_monotonicity,
    check_decomposition,
    check_draining,
    check_monotonicity,
    oracle_gap,
    vc_samples,
)
from indefpencil.pencil import limiting_spectrum, singular_times, spectrum_at, threshold_T

FIG2_TS = (1.5, 5.0, 100.0, 1e5)


def _slope(t, y):
    return float(np.polyfit(np.log(t), np.log(y), 1)[0])


def test_criterion_1_limiting_spectrum():
    t0 = time.perf_counter()
    lim = limiting_spectrum(paper5x5())
    dt = time.perf_counter() - t0
    e1 = abs(lim.positives[0] - LAM1)
    e2 = abs(lim.negatives[0] - LAM_NEG1)
    ok = e1 <= 1e-10 and e2 <= 1e-10 and lim.infinity_multiplicity == 1 and dt < 1.0
    record(1, ok, f"|dlam_1|={e1:.1e} |dlam_-1|={e2:.1e} J_inf={lim.infinity_multiplicity} time={dt:.3f}s")
    assert ok


def test_criterion_2_sweep_classification():
    t0 = time.perf_counter()
    p = paper5x5()
    rep = sweep(p, make_grid(-1e6, 1e6, 400, p))
    classify_asymptotics(rep)
    dt = time.perf_counter() - t0
    counts = rep.clause_counts
    conv = [c for c in rep.curves if c.clause == "ii"][0]
    t = np.asarray(conv.t)
    err = np.abs(np.asarray(conv.lam) - LAM1)
    sel = t >= 1e3
    bound_ok = bool(np.all(err[sel] <= 10.0 / t[sel]))
    slope = _slope(t[sel], err[sel])
    sing = singular_times(p)
    reapp = [float(c.reappears_at) for c in rep.curves if c.reappears_at is not None]
    adjacent = len(reapp) == 1 and np.min(np.abs(sing - reapp[0])) < 1e-9
    ok = (counts == {"i": 1, "ii": 1, "iii": 2, "iv": 1} and len(rep.grid) >= 400 and bound_ok
          and 0.8 <= -slope <= 1.2 and adjacent and dt < 10.0)
    record(2, ok, f"counts={counts} points={len(rep.grid)} max t*err={np.max(t[sel] * err[sel]):.4f} "
                  f"exponent={-slope:.3f} reappearance={reapp} time={dt:.2f}s")
    assert ok


def test_criterion_3_lipschitz(p5_report):
    worst = 0.0
    for c in p5_report.curves:
        t = np.asarray(c.t)
        inv = 1.0 / np.asarray(c.lam)
        if len(t) > 1:
            worst = max(worst, float(np.max(np.abs(np.diff(inv)) / np.diff(t))))
    ok = worst <= 2.0 + 1e-8
    record(3, ok, f"max difference quotient of 1/lam = {worst:.10f} (bound 2)")
    assert ok


def test_criterion_4_fig2():
    lam = [sturm1d.first_positive_eig(t) for t in FIG2_TS]
    u0 = [sturm1d.interface_value(t) for t in FIG2_TS]
    mono = all(a < b for a, b in zip(lam, lam[1:]))
    gap = abs(lam[-1] - (0.5 * math.pi) ** 2)
    dec = all(a > b for a, b in zip(u0, u0[1:]))
    ok = mono and gap <= 1e-3 and dec and u0[-1] < 0.01
    record(4, ok, f"monotone={mono} |lam(1e5)-(pi/2)^2|={gap:.3e} (tol 1e-3) u0 decreasing={dec} "
                  f"u0(1e5)={u0[-1]:.5f}")
    assert ok


def test_criterion_5_fem_vs_shooting():
    rows = fem1d.convergence_study(fem1d.ProblemKind("Neumann"), [1 / 16, 1 / 32, 1 / 64], [5.0])
    errs = [r["err"] for r in rows]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    T = fem1d.neumann_threshold(1 / 64)
    ok = all(3.5 <= r <= 4.5 for r in ratios) and abs(T - 2.0) <= 0.05
    record(5, ok, f"errors={[f'{e:.4e}' for e in errs]} ratios={[round(r, 4) for r in ratios]} T={T:.6f}")
    assert ok


def test_criterion_6_dynamical_bc():
    h = 1 / 64
    mesh = fem1d.make_mesh(-1.0, 1.0, int(round(2 / h)))
    p = fem1d.assemble(fem1d.ProblemKind("DynamicalBC"), mesh).pencil
    ts = np.array([10.0, 30.0, 100.0, 1e3, 1e4, 1e5])
    specs = [spectrum_at(p, t) for t in ts]
    one_neg = all(s.n_neg == 1 for s in specs)
    neg = np.array([abs(s.negatives[0]) for s in specs])
    K = float(np.max(neg * ts))
    slope = _slope(ts, neg)
    lam1 = spectrum_at(p, 1e4).positives[0]
    dev = abs(lam1 - math.pi**2 / 4)
    ok = one_neg and bool(np.all(neg <= K / ts)) and 0.8 <= -slope <= 1.2 and dev <= h * h
    record(6, ok, f"one negative={one_neg} K={K:.4f} exponent={-slope:.4f} "
                  f"|lam_1(1e4)-pi^2/4|={dev:.2e} (h^2={h * h:.2e})")
    assert ok


def test_criterion_7_property_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = {"oracle": np.inf, "decomp": np.inf, "mono": np.inf, "count": np.inf, "drain": np.inf,
             "vc": np.inf, "vc_attain": np.inf}
    for i in range(100):
        mode = ("fixed", "moving")[i % 2]
        p = random_pencil(rng, int(rng.integers(2, 7)), mode)
        st = singular_times(p)
        T = threshold_T(p) if mode == "moving" else 0.0
        sc = max(1.0, float(np.max(np.abs(st))) if len(st) else 1.0, T)
        rep = sweep(p, make_grid(-1e4 * sc if mode == "fixed" else 0.0, 1e4 * sc, 80, p))
        worst["decomp"] = min(worst["decomp"], check_decomposition(rep).margin)
        worst["mono"] = min(worst["mono"], check_monotonicity(rep).margin)
        worst["count"] = min(worst["count"], check_count_monotonicity(rep).margin)
        worst["drain"] = min(worst["drain"], check_draining(rep).margin)
        # oracle agreement at 5 random audited t
        for t in (T if mode == "moving" else -20.0) + rng.uniform(1e-3, 40.0, 5):
            worst["oracle"] = min(worst["oracle"], oracle_gap(p, spectrum_at(p, t)))
        # variational characterization at a moderate t, absolute tolerance 1e-9
        t = 1.5 * T + 1.0
        sp = spectrum_at(p, t)
        for j in range(1, sp.n_pos + 1):
            vals, target = vc_samples(p, t, j, 200, seed=[i, j], include_eigenspan=True)
            worst["vc"] = min(worst["vc"], target + 1e-9 - float(np.max(vals[:-1])))
            worst["vc_attain"] = min(worst["vc_attain"], 1e-9 - abs(vals[-1] - target))
    dt = time.perf_counter() - t0
    ok = all(v >= 0 for v in worst.values()) and dt < 60.0
    record(7, ok, " ".join(f"{k}={v:.2e}" for k, v in worst.items()) + f" time={dt:.1f}s")
    assert ok


def test_criterion_8_mirror_identity():
    rng = np.random.default_rng(88)
    worst = 0.0
    for i in range(20):
        mode = ("fixed", "moving")[i % 2]
        p = random_pencil(rng, int(rng.integers(2, 7)), mode)
        q = p.negated()
        grid = make_grid(-1e5, 1e5, 120, p)
        rep = sweep(p, grid)
        for k, sp in enumerate(rep.spectra):
            if not rep.grid.audited[k]:
                continue
            m = spectrum_at(q, -sp.t)
            if m.n_pos != sp.n_neg:
                worst = np.inf
                continue
            if sp.n_neg:
                rel = np.max(np.abs(sp.negatives + m.positives) / np.abs(sp.negatives))
                worst = max(worst, float(rel))
    ok = worst <= 1e-10
    record(8, ok, f"max relative mismatch over 20 pencils = {worst:.2e} (tol 1e-10)")
    assert ok
