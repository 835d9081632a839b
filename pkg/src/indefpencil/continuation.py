"""Eigenvalue curves of a pencil over a compactified t-grid.

Curves are carried from one grid point to the next by maximal ``A``-metric
eigenvector overlap inside each sign class. Blow-up at a singular time and
the reappearance of the lost eigenvalue from ``-inf`` are detected from the
curve structure around the singular times rather than by literally
reaching a numerical infinity.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._io import atomic_write, write_csv
from .errors import InputError, PreconditionError
from .pencil import (
    Pencil,
    Spectrum,
    limiting_spectrum,
    negative_limit_count,
    singular_times,
    spectrum_at,
    threshold_T,
    unique_times,
)

MATCH_THRESHOLD = 0.5
DECISIVE = 0.9
ROUNDOFF = 64 * np.finfo(float).eps
TIE_TOL = 1e-6
BLOW_UP_CAP = 1e9
LIMIT_RTOL = 1e-3

CSV_COLUMNS = ("curve_id", "t", "s_compactified", "lambda", "status")


@dataclass
class TGrid:
    """Strictly increasing parameter grid with its compactified coordinate.

    ``audited[k]`` is False for moving-mode points with ``|t| <= T``.
    """

    t: np.ndarray
    scale: float
    singular_times: np.ndarray
    audited: np.ndarray
    T: float | None = None

    @property
    def s(self) -> np.ndarray:
        return compactify(self.t, self.scale)

    def __len__(self):
        return len(self.t)


def compactify(t, scale: float = 1.0):
    """``s = (2/pi) atan(t / scale)``, mapping the real line onto (-1, 1)."""
    return 2.0 / np.pi * np.arctan(np.asarray(t, dtype=float) / scale)


def decompactify(s, scale: float = 1.0):
    return scale * np.tan(0.5 * np.pi * np.asarray(s, dtype=float))


def make_grid(
    t_min: float,
    t_max: float,
    n_points: int,
    p: Pencil | None = None,
    *,
    scale: float = 1.0,
    gap: float | None = None,
    levels: int = 8,
    tail_per_decade: int = 4,
) -> TGrid:
    """Compactified grid on ``[t_min, t_max]`` refined around singular times.

    Parameters
    ----------
    t_min, t_max : float
        Finite endpoints, ``t_min < t_max``.
    n_points : int
        Number of points uniform in the compactified coordinate.
    p : Pencil, optional
        When given, each singular time ``t*`` in range gets the points
        ``t* +- 2**-k * gap`` for ``k = 1..levels`` and base points closer
        than ``gap`` to ``t*`` are dropped.
    gap : float, optional
        Refinement half-width. Default: ``min(1, 0.01 max(1, |t*|))``,
        capped at a quarter of the distance to the neighbouring singular
        time.
    tail_per_decade : int
        Extra log-spaced points per decade beyond ``10 * scale``, so that
        the approach to ``+-inf`` is sampled despite the compactification.
    """
    if not (np.isfinite(t_min) and np.isfinite(t_max)) or t_min >= t_max:
        raise InputError(f"invalid t-range [{t_min}, {t_max}]")
    if n_points < 2:
        raise InputError("n_points must be at least 2")
    if scale <= 0:
        raise InputError("scale must be positive")
    s = np.linspace(compactify(t_min, scale), compactify(t_max, scale), int(n_points))
    pts = [decompactify(s[1:-1], scale), [t_min, t_max]]
    lo = 10.0 * scale
    for side, bound in ((1.0, t_max), (-1.0, -t_min)):
        if bound > lo and tail_per_decade > 0:
            nd = math.log10(bound / lo)
            k = max(2, int(math.ceil(nd * tail_per_decade)) + 1)
            pts.append(side * np.logspace(math.log10(lo), math.log10(bound), k))
    t = np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)) for x in pts])
    t = t[(t >= t_min) & (t <= t_max)]

    sing = np.empty(0)
    if p is not None:
        allsing = np.array([u for u, _ in unique_times(singular_times(p))])
        sing = allsing[(allsing > t_min) & (allsing < t_max)] if len(allsing) else allsing
        extra = []
        for i, ts in enumerate(sing):
            g = gap if gap is not None else min(1.0, 0.01 * max(1.0, abs(ts)))
            neighbours = [abs(ts - u) for u in allsing if u != ts]
            if neighbours:
                g = min(g, 0.25 * min(neighbours))
            g = min(g, 0.5 * (ts - t_min), 0.5 * (t_max - ts))
            t = t[np.abs(t - ts) >= g]
            extra.append(ts + np.outer([-1.0, 1.0], 0.5 ** np.arange(1, levels + 1)).ravel() * g)
        if extra:
            t = np.concatenate([t, *extra])
    t = np.unique(t)
    T = None
    audited = np.ones(len(t), dtype=bool)
    if p is not None and p.mode == "moving":
        T = threshold_T(p)
        audited = np.abs(t) > T
    return TGrid(t=t, scale=float(scale), singular_times=sing, audited=audited, T=T)


@dataclass
class Curve:
    """One tracked eigenvalue branch.

    ``status`` holds the asymptotic label first, then any event labels,
    e.g. ``["drains-to-zero", "reappears-from(-inf at 0.5)"]``.
    """

    id: int
    sign: int
    idx: list = field(default_factory=list)
    t: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    vectors: list = field(default_factory=list)
    status: list = field(default_factory=list)
    pre_threshold: bool = False
    clause: str | None = None
    limit: float | None = None
    blowup_at: float | None = None
    reappears_at: float | None = None

    @property
    def status_str(self) -> str:
        return ";".join(self.status) if self.status else "unclassified"

    def append(self, k, t, lam, v):
        self.idx.append(k)
        self.t.append(float(t))
        self.lam.append(float(lam))
        self.vectors.append(v)


@dataclass
class SweepReport:
    pencil: Pencil
    grid: TGrid
    spectra: list
    curves: list
    singular_times: np.ndarray
    limiting: Spectrum
    negative_limit_count: int
    warnings: list = field(default_factory=list)
    clause_counts: dict = field(default_factory=dict)
    classification_failures: list = field(default_factory=list)
    t_large: float | None = None
    audit: object = None

    def curves_by_status(self, label: str) -> list:
        return [c for c in self.curves if any(s.startswith(label) for s in c.status)]


def _points(spec: Spectrum, sign: int):
    if sign > 0:
        lam, V = spec.positives, spec.pos_vectors
    else:
        lam, V = spec.negatives, spec.neg_vectors
    keep = np.abs(lam) <= BLOW_UP_CAP
    return lam[keep], V[:, keep]


def _match(A, lam0, V0, lam1, V1, t, warnings):
    """Assignment of old columns to new columns; returns dict old->new."""
    if len(lam0) == 0 or len(lam1) == 0:
        return {}
    O = np.abs(V0.T @ A @ V1)
    dl = np.abs(lam0[:, None] - lam1[None, :])
    prox = dl / (dl.max(axis=1, keepdims=True) + 1e-300)
    cost = -O + 2.0 * TIE_TOL * prox
    rows, cols = linear_sum_assignment(cost)
    out = {}
    for r, c in zip(rows, cols):
        if O[r, c] < MATCH_THRESHOLD:
            continue
        row = O[r]
        near = np.flatnonzero((row >= MATCH_THRESHOLD) & (row >= row.max() - TIE_TOL))
        if len(near) > 1:
            warnings.append(
                f"overlap tie at t={t:.12g} for value {lam0[r]:.12g}: "
                f"{len(near)} candidates within {TIE_TOL:g}; chose nearest eigenvalue"
            )
        out[r] = c
    return out


def value_tol(spec: Spectrum, lam: float) -> float:
    """Comparison tolerance for an eigenvalue at one t.

    ``1e-9`` relative, plus the roundoff of ``lam = 1/mu`` when ``mu`` is
    computed to ``~eps * max|mu|`` (dominant at very large ``|t|``).
    """
    return 1e-9 * max(1.0, abs(lam)) + ROUNDOFF * lam * lam * spec.mu_scale


def _decisive(A, s0: Spectrum, s1: Spectrum) -> bool:
    """True when every eigenvector at ``s0`` has an unambiguous, non-decreasing
    continuation at ``s1``; exact clusters are judged as subspaces."""
    for sign in (1, -1):
        lam0, V0 = _points(s0, sign)
        lam1, V1 = _points(s1, sign)
        if len(lam0) == 0 or len(lam1) == 0:
            continue
        O = np.abs(V0.T @ A @ V1)
        rows, cols = linear_sum_assignment(-O)
        for r, c in zip(rows, cols):
            if O[r, c] < DECISIVE:
                cl = np.abs(lam1 - lam1[c]) <= 1e-8 * max(1.0, abs(lam1[c]))
                if np.sum(O[r, cl] ** 2) < DECISIVE**2:
                    if max(len(lam0), len(lam1)) > 1 or O[r, c] < MATCH_THRESHOLD:
                        return False
            if lam1[c] < lam0[r] - value_tol(s1, lam1[c]) - value_tol(s0, lam0[r]):
                return False
    return True


def sweep(p: Pencil, grid: TGrid, workers: int | None = None, max_refine: int = 12) -> SweepReport:
    """Compute spectra on the grid and link them into curves.

    An interval whose end spectra cannot be linked decisively (overlap
    below 0.9, or a link that would make a curve decrease) is bisected, up
    to ``max_refine`` levels; inserted points join the report grid.
    Moving-mode points with ``|t| <= T`` are solved without deflation,
    tracked into curves flagged ``pre-threshold-unlabeled`` and never
    linked across the threshold.
    """
    base_t = list(grid.t)

    def solve_at(t, audited):
        return spectrum_at(p, t, allow_pre_threshold=not audited)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            base = list(ex.map(solve_at, base_t, grid.audited))
    else:
        base = [solve_at(t, a) for t, a in zip(base_t, grid.audited)]

    ts, spectra, audited = [base_t[0]], [base[0]], [bool(grid.audited[0])]
    n_inserted = 0
    for k in range(1, len(base_t)):
        aud = bool(grid.audited[k])
        if aud != bool(grid.audited[k - 1]):
            ts.append(base_t[k]); spectra.append(base[k]); audited.append(aud)
            continue
        # depth-first bisection of (t_{k-1}, t_k)
        stack = [(base_t[k], base[k], 0)]
        left_t, left_s = base_t[k - 1], base[k - 1]
        while stack:
            rt, rs, depth = stack[-1]
            if depth < max_refine and not _decisive(p.A, left_s, rs):
                mt = 0.5 * (left_t + rt)
                if left_t < mt < rt:
                    stack.append((mt, solve_at(mt, aud), depth + 1))
                    stack[-2] = (rt, rs, depth + 1)
                    n_inserted += 1
                    continue
            stack.pop()
            ts.append(rt); spectra.append(rs); audited.append(aud)
            left_t, left_s = rt, rs
    if n_inserted:
        grid = TGrid(t=np.array(ts), scale=grid.scale, singular_times=grid.singular_times,
                     audited=np.array(audited), T=grid.T)

    warnings: list[str] = []
    curves: list[Curve] = []
    active = {1: [], -1: []}  # curve per column of the previous point
    for k, spec in enumerate(spectra):
        linked = k > 0 and audited[k] == audited[k - 1]
        for sign in (1, -1):
            lam1, V1 = _points(spec, sign)
            new_active = [None] * len(lam1)
            if linked:
                lam0, V0 = _points(spectra[k - 1], sign)
                m = _match(p.A, lam0, V0, lam1, V1, spec.t, warnings)
                for r, c in m.items():
                    new_active[c] = active[sign][r]
            for c in range(len(lam1)):
                cur = new_active[c]
                if cur is None:
                    cur = Curve(id=-1, sign=sign, pre_threshold=not audited[k])
                    curves.append(cur)
                    new_active[c] = cur
                cur.append(k, spec.t, lam1[c], V1[:, c])
            active[sign] = new_active

    # deterministic ids: by start t, then sign, then first value
    curves.sort(key=lambda c: (c.t[0], -c.sign, c.lam[0]))
    for i, c in enumerate(curves):
        c.id = i
        if c.pre_threshold:
            c.status.append("pre-threshold-unlabeled")

    rep = SweepReport(
        pencil=p,
        grid=grid,
        spectra=spectra,
        curves=curves,
        singular_times=grid.singular_times,
        limiting=limiting_spectrum(p),
        negative_limit_count=negative_limit_count(p),
        warnings=warnings,
    )
    _detect_events(rep)
    return rep


def _sing_between(sing, a, b):
    inside = [u for u in sing if a < u < b]
    return inside[0] if inside else None


def _detect_events(rep: SweepReport):
    t = rep.grid.t
    n = len(t)
    for c in rep.curves:
        if c.pre_threshold:
            continue
        first, last = c.idx[0], c.idx[-1]
        # positive branch running into a pole: ends just before a singular
        # time while increasing
        if c.sign > 0 and last < n - 1:
            ts = _sing_between(rep.singular_times, t[last], t[last + 1])
            if ts is not None and len(c.lam) >= 2 and c.lam[-1] > c.lam[-2] > 0:
                c.blowup_at = ts
                c.status.append(f"blows-up-at({ts:.12g})")
        # negative branch coming up from -inf just after a singular time
        if c.sign < 0 and first > 0:
            ts = _sing_between(rep.singular_times, t[first - 1], t[first])
            if ts is not None and len(c.lam) >= 2 and c.lam[1] > c.lam[0]:
                c.reappears_at = ts
                c.status.append(f"reappears-from(-inf at {ts:.12g})")


def classify_asymptotics(rep: SweepReport, lim: Spectrum | None = None, t_large: float | None = None):
    """Assign curves to the four clauses of the large-``t`` limit.

    (i) positive curves that grow without bound, (ii) positive curves
    converging to the limiting positives, (iii) negative curves draining to
    zero and (iv) negative curves converging to the limiting negatives.
    Counts must equal ``J_inf``, ``J_+``, ``negative_limit_count`` and
    ``J_-``; mismatches are recorded in ``classification_failures``.
    """
    lim = rep.limiting if lim is None else lim
    t = rep.grid.t
    sing = rep.singular_times
    need = 100.0 * max(1.0, float(np.max(np.abs(sing))) if len(sing) else 1.0)
    if t_large is None:
        cand = np.flatnonzero(rep.grid.audited & (t >= need))
        if len(cand) == 0:
            raise PreconditionError(f"sweep must reach t >= {need:.6g} to classify")
        k_large = int(cand[-1])
    else:
        k_large = int(np.argmin(np.abs(t - t_large)))
    t_large = float(t[k_large])
    rep.t_large = t_large
    last_sing = float(np.max(sing)) if len(sing) else -np.inf
    fails = []

    alive = [c for c in rep.curves if not c.pre_threshold and k_large in c.idx]
    at = {c.id: c.lam[c.idx.index(k_large)] for c in alive}
    pos = sorted((c for c in alive if c.sign > 0), key=lambda c: at[c.id])
    neg = sorted((c for c in alive if c.sign < 0), key=lambda c: -at[c.id])

    # positive curves that vanished into the eigenvalue at infinity after
    # the last singular time while increasing
    vanished = [
        c
        for c in rep.curves
        if c.sign > 0
        and not c.pre_threshold
        and c.blowup_at is None
        and c.t[-1] > max(last_sing, 0.0)
        and c.idx[-1] < k_large
        and len(c.lam) >= 2
        and c.lam[-1] > c.lam[-2]
    ]

    def near(c, target):
        # raw value, or its 1/t Richardson extrapolation, within tolerance;
        # a vanished curve is judged at its last point
        tol = LIMIT_RTOL * max(1.0, abs(target))
        ts = np.asarray(c.t)
        if c.id in at:
            t2, v2 = t_large, at[c.id]
        else:
            t2, v2 = float(ts[-1]), c.lam[-1]
        if abs(v2 - target) <= tol:
            return True
        cand = np.flatnonzero((ts >= 1.0) & (ts < 0.5 * t2))
        if len(cand) == 0:
            return False
        i1 = cand[np.argmin(np.abs(np.log(ts[cand] / (0.25 * t2))))]
        t1, v1 = ts[i1], c.lam[i1]
        ext = (t2 * v2 - t1 * v1) / (t2 - t1)
        return abs(ext - target) <= tol

    counts = {"i": 0, "ii": 0, "iii": 0, "iv": 0}
    lp = list(lim.positives)
    # a large limit has |mu| close to the infinity cut-off, so its curve may
    # vanish before t_large; vanished curves still take part in the matching
    vals = {c.id: (at[c.id] if c.id in at else c.lam[-1]) for c in pos + vanished}
    for j, c in enumerate(sorted(pos + vanished, key=lambda c: vals[c.id])):
        v = vals[c.id]
        if j < len(lp) and near(c, lp[j]):
            c.clause, c.limit = "ii", lp[j]
            c.status.insert(0, f"converges-to-limit({lp[j]:.12g})")
            counts["ii"] += 1
        elif j >= len(lp) or v > lp[j] or c.id not in at:
            c.clause = "i"
            c.status.insert(0, "blows-up-at(+inf)")
            counts["i"] += 1
        else:
            fails.append(f"positive curve {c.id} at t={t_large:.6g} has value {v:.12g} below limit {lp[j]:.12g}")

    ln = list(lim.negatives)
    r = rep.negative_limit_count
    for j, c in enumerate(neg):
        v = at[c.id]
        if j < r:
            c.clause = "iii"
            c.status.insert(0, "drains-to-zero")
            counts["iii"] += 1
            if ln and abs(v) > 0.5 * abs(ln[0]):
                fails.append(f"draining curve {c.id} still at {v:.12g} at t={t_large:.6g}")
        else:
            jj = j - r
            if jj < len(ln) and near(c, ln[jj]):
                c.clause, c.limit = "iv", ln[jj]
                c.status.insert(0, f"converges-to-limit({ln[jj]:.12g})")
                counts["iv"] += 1
            else:
                fails.append(f"negative curve {c.id} with value {v:.12g} matches no limit")

    expected = {
        "i": lim.infinity_multiplicity,
        "ii": len(lim.positives),
        "iii": r,
        "iv": len(lim.negatives),
    }
    for key, val in expected.items():
        if counts[key] != val:
            fails.append(f"clause ({key}) has {counts[key]} curves, expected {val}")
    rep.clause_counts = counts
    rep.classification_failures = fails
    return rep


# -- output ------------------------------------------------------------------


def _curve_rows(rep: SweepReport):
    scale = rep.grid.scale
    for c in sorted(rep.curves, key=lambda c: c.id):
        for t, lam in zip(c.t, c.lam):
            yield (c.id, float(t), float(compactify(t, scale)), float(lam), c.status_str)


def emit_curves(rep: SweepReport | None, fmt: str, path) -> None:
    """Write curve data as CSV (``curve_id, t, s_compactified, lambda,
    status``) or the equivalent JSON document."""
    rows = list(_curve_rows(rep)) if rep is not None else []
    if fmt == "csv":
        write_csv(path, CSV_COLUMNS, rows)
    elif fmt == "json":
        doc = {
            "columns": list(CSV_COLUMNS),
            "rows": [list(r) for r in rows],
            "singular_times": [] if rep is None else [float(u) for u in rep.singular_times],
        }
        atomic_write(path, json.dumps(doc, indent=1) + "\n")
    else:
        raise InputError(f"unknown format {fmt!r}")


def read_curves(path) -> list[tuple]:
    """Parse a file written by :func:`emit_curves` back into row tuples."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        return [(int(r[0]), float(r[1]), float(r[2]), float(r[3]), r[4]) for r in doc["rows"]]
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if tuple(header) != CSV_COLUMNS:
            raise InputError(f"unexpected header {header}")
        return [(int(r[0]), float(r[1]), float(r[2]), float(r[3]), r[4]) for r in rd]
