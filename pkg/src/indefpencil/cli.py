"""Command-line entry point.

Subcommands
-----------
run        sweep a configured problem, classify its curves, audit, write files
reproduce  write the data behind the interface-problem and 5x5 figures
audit      audits only, printing per-check worst margins

Exit codes: 0 success, 1 audit failure, 2 malformed input or unwritable
output.

Run config (JSON)
-----------------
``problem``
    exactly one of ``{"builtin": "paper5x5"}``, ``{"builtin": "fig2",
    "nElems": 32}``, ``{"builtin": "random", "dim": 5, "mode": "fixed",
    "count": 1}``, ``{"pencil": {...}}`` (pencil JSON schema),
    ``{"pencil_file": path}``, ``{"fem": {...}}`` (problem config schema) or
    ``{"fem_file": path}``. Relative paths are resolved against the config
    file's directory.
``grid``
    ``{"tMin": -1e6, "tMax": 1e6, "nPoints": 400}``
``audits``
    ``true``/``false``, or ``{"extras": true}`` to add variational sampling
    and the brute-force oracle.
``seed``, ``format`` (``csv``/``json``), ``out``, ``workers``
``inject_fault``
    corrupt one curve before auditing (negative control).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fem1d, sturm1d
from ._io import atomic_write, write_csv
from .builtins import paper5x5, random_pencil
from .continuation import classify_asymptotics, emit_curves, make_grid, sweep
from .errors import InputError, PencilError, PreconditionError
from .oracles import corrupt_report, run_audit_suite
from .pencil import Pencil, threshold_T

DEFAULT_GRID = {"tMin": -1e6, "tMax": 1e6, "nPoints": 400}
FIG2_TS = (1.5, 5.0, 100.0, 1e5)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=_plain) + "\n"


def _plain(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def load_config(path) -> dict:
    cfg = _read_json(path)
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    cfg["_base"] = str(Path(path).resolve().parent)
    return cfg


def build_pencils(cfg: dict, seed: int) -> list[tuple[str, Pencil]]:
    """Resolve the problem source into named pencils."""
    prob = cfg.get("problem")
    if not isinstance(prob, dict):
        raise InputError("config needs a 'problem' object")
    sources = [k for k in ("builtin", "pencil", "pencil_file", "fem", "fem_file") if k in prob]
    if len(sources) != 1:
        raise InputError(f"problem needs exactly one source, got {sources or 'none'}")
    src = sources[0]
    base = Path(cfg.get("_base", "."))
    if src == "builtin":
        name = prob["builtin"]
        if name == "paper5x5":
            return [("paper5x5", paper5x5())]
        if name == "fig2":
            n = int(prob.get("nElems", 32))
            mesh = fem1d.make_mesh(-1.0, 1.0, n, 0.0)
            kind = fem1d.ProblemKind("Neumann")
            return [("fig2", fem1d.assemble(kind, mesh, fem1d.fig2_weight(mesh)).pencil)]
        if name == "random":
            count = int(prob.get("count", 1))
            mode = prob.get("mode", "fixed")
            out = []
            for i in range(count):
                rng = np.random.default_rng([seed, i])
                d = int(prob["dim"]) if "dim" in prob else int(rng.integers(2, int(prob.get("maxDim", 6)) + 1))
                m = mode if mode != "mixed" else ("fixed", "moving")[i % 2]
                out.append((f"random-{seed}-{i}", random_pencil(rng, d, m)))
            return out
        raise InputError(f"unknown builtin {name!r}")
    if src in ("pencil", "pencil_file"):
        d = prob["pencil"] if src == "pencil" else _read_json(base / prob["pencil_file"])
        return [("pencil", Pencil.from_dict(d))]
    d = prob["fem"] if src == "fem" else _read_json(base / prob["fem_file"])
    kind, mesh, w = fem1d.problem_from_config(d)
    return [(kind.name, fem1d.assemble(kind, mesh, w).pencil)]


def _grid_for(p: Pencil, cfg: dict):
    g = dict(DEFAULT_GRID)
    g.update(cfg.get("grid", {}))
    try:
        return make_grid(float(g["tMin"]), float(g["tMax"]), int(g["nPoints"]), p)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PencilError):
            raise
        raise InputError(f"bad grid spec: {exc}") from None


def _analyse(name, p, cfg, seed, audits=True):
    grid = _grid_for(p, cfg)
    rep = sweep(p, grid, workers=cfg.get("workers"))
    try:
        classify_asymptotics(rep)
    except PreconditionError as exc:
        rep.classification_failures = [f"not classified: {exc}"]
    if cfg.get("inject_fault"):
        corrupt_report(rep)
    audit = None
    if audits:
        extras = isinstance(cfg.get("audits"), dict) and cfg["audits"].get("extras", False)
        audit = run_audit_suite(p, rep, seed=seed, extras=extras)
    return rep, audit


def _summary(name, p, rep, audit) -> dict:
    lim = rep.limiting
    return {
        "problem": name,
        "n": p.n,
        "mode": p.mode,
        "threshold_T": threshold_T(p) if p.mode == "moving" else None,
        "singular_times": [float(u) for u in rep.singular_times],
        "limiting": {
            "positives": [float(v) for v in lim.positives],
            "negatives": [float(v) for v in lim.negatives],
            "infinity_multiplicity": lim.infinity_multiplicity,
        },
        "negative_limit_count": rep.negative_limit_count,
        "t_large": rep.t_large,
        "clause_counts": rep.clause_counts,
        "classification_failures": rep.classification_failures,
        "curves": [
            {"curve_id": c.id, "status": c.status_str, "t_start": c.t[0], "t_end": c.t[-1], "points": len(c.t)}
            for c in rep.curves
        ],
        "grid_points": len(rep.grid),
        "warnings": rep.warnings,
        "audit": audit.to_dict() if audit is not None else None,
    }


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc}") from None
    return out


def cmd_run(args, audits_only=False) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    fmt = args.format or cfg.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise InputError(f"unknown format {fmt!r}")
    out = _outdir(args.out or cfg.get("out") or "out")
    want_audits = cfg.get("audits", True) is not False or audits_only
    ok = True
    summaries = []
    for name, p in build_pencils(cfg, seed):
        rep, audit = _analyse(name, p, cfg, seed, want_audits)
        summ = _summary(name, p, rep, audit)
        summaries.append(summ)
        tag = name if name not in ("pencil",) else "pencil"
        if not audits_only:
            emit_curves(rep, fmt, out / f"{tag}_curves.{fmt}")
        if audit is not None:
            audit.to_json(out / f"{tag}_audit.json")
            ok &= audit.passed
            if audits_only or not audit.passed:
                print(f"[{name}]")
                for line in audit.summary_lines():
                    print("  " + line)
    atomic_write(out / "summary.json", _dump(summaries if len(summaries) > 1 else summaries[0]))
    if not ok:
        print(f"audit failed; see {out}", file=sys.stderr)
        return 1
    return 0


def reproduce_fig2(out: Path, fmt: str) -> int:
    rows = sturm1d.fig2_table(FIG2_TS)
    write_csv(out / "fig2_lambda.csv", ("t", "lambda", "u0"), rows)
    xs = np.linspace(-1.0, 1.0, 401)
    for t, _, _ in rows:
        pair = sturm1d.eigenpair(t)
        u = sturm1d.eigenfunction_sample(pair, xs)
        write_csv(out / f"fig2_u_t{t:g}.csv", ("x", "u"), zip(map(float, xs), map(float, u)))
    u0 = [r[2] for r in rows]
    lam = [r[1] for r in rows]
    ok = all(a > b for a, b in zip(u0, u0[1:])) and all(a < b for a, b in zip(lam, lam[1:]))
    atomic_write(
        out / "fig2_summary.json",
        _dump({"t": list(FIG2_TS), "lambda": lam, "u0": u0, "limit": sturm1d.limiting_eig(1),
               "u0_decreasing": ok}),
    )
    return 0 if ok else 1


def reproduce_fig3(out: Path, fmt: str, seed: int) -> int:
    p = paper5x5()
    rep, audit = _analyse("paper5x5", p, {"grid": DEFAULT_GRID}, seed)
    emit_curves(rep, fmt, out / f"fig3_curves.{fmt}")
    atomic_write(out / "fig3_summary.json", _dump(_summary("paper5x5", p, rep, audit)))
    ok = audit.passed and not rep.classification_failures
    return 0 if ok else 1


def cmd_reproduce(args) -> int:
    out = _outdir(args.out or "out")
    fmt = args.format or "csv"
    if args.which == "fig2":
        return reproduce_fig2(out, fmt)
    return reproduce_fig3(out, fmt, args.seed or 0)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="indefpencil", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="run config JSON")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="seed override")
        sp.add_argument("--format", choices=("csv", "json"))

    common(sub.add_parser("run", help="sweep, classify, audit and write curves"))
    rp = sub.add_parser("reproduce", help="write figure data")
    rp.add_argument("which", choices=("fig2", "fig3"))
    common(rp, config=False)
    common(sub.add_parser("audit", help="audits only"))
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "audit":
            return cmd_run(args, audits_only=True)
        return cmd_reproduce(args)
    except PencilError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
