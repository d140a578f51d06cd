"""Command line interface: simulate, contaminate, estimate, select-p, experiment."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .contamination import ContaminationSpec
from .estimators import EstimatorConfig, estimate_hurst, estimate_sigma2
from .filters import FILTERS, make_filter
from .harness import ExperimentConfig, rows_csv, run_figures, run_tables, tables_csv
from .pselect import PSelectConfig, parse_grid, select_p
from .synth import HurstParams, SamplePath, simulate_fbm, simulate_fgn

log = logging.getLogger("exphurst")


def sidecar(path) -> Path:
    return Path(str(path) + ".json")


def write_path(sp: SamplePath, out) -> None:
    out = Path(out)
    np.savetxt(out, sp.values, fmt="%.17g")
    sidecar(out).write_text(json.dumps(sp.meta, indent=2) + "\n")


def read_path(src) -> SamplePath:
    """Read one value per line; metadata comes from the JSON sidecar when present."""
    src = Path(src)
    values = np.atleast_1d(np.loadtxt(src, dtype=float))
    meta = {}
    if sidecar(src).exists():
        meta = json.loads(sidecar(src).read_text())
    known = {k: meta.get(k) for k in ("H", "sigma", "seed")}
    extra = {k: v for k, v in meta.items()
             if k not in ("H", "sigma", "seed", "kind", "contamination", "n")}
    return SamplePath(values, kind=meta.get("kind", "fbm"),
                      contamination=meta.get("contamination", "none"), extra=extra, **known)


def cmd_simulate(args):
    params = HurstParams(args.hurst, args.sigma)
    sim = simulate_fgn if args.kind == "fgn" else simulate_fbm
    write_path(sim(params, args.n, args.seed), args.out)


def _increment_variance(sp: SamplePath, filter_name: str) -> float:
    if sp.sigma is not None:
        return float(sp.sigma) ** 2
    a = make_filter(filter_name)
    H = estimate_hurst(sp, EstimatorConfig("ST", filter=a)).H_hat
    H = min(max(H, 0.01), 0.99)
    return estimate_sigma2(sp, a, H)


def cmd_contaminate(args):
    sp = read_path(args.inp)
    if args.kind == "outliers":
        spec = ContaminationSpec("outliers", args.fraction, args.snr, args.db_factor)
    else:
        spec = ContaminationSpec("rounding", mode=args.rounding_mode)
    s2 = args.sigma2_increment
    if s2 is None and spec.kind == "outliers":
        s2 = _increment_variance(sp, "d4")
    write_path(spec.apply(sp, s2 or 0.0, args.seed), args.out)


def _estimator_from_args(args) -> EstimatorConfig:
    return EstimatorConfig(args.method, p=args.p, beta=args.beta, trim=args.trim,
                           filter=make_filter(args.filter), M=args.M)


def cmd_estimate(args):
    sp = read_path(args.inp)
    cfg = _estimator_from_args(args)
    est = estimate_hurst(sp, cfg)
    report = {"input": str(args.inp), "config": cfg.to_dict(), **est.to_dict()}
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _contaminator(name: str, args) -> ContaminationSpec | None:
    if name == "none":
        return None
    if name == "outliers":
        return ContaminationSpec("outliers", args.fraction, args.snr, args.db_factor)
    return ContaminationSpec("rounding", mode=args.rounding_mode)


def cmd_select_p(args):
    sp = read_path(args.inp)
    cfg = PSelectConfig(grid=tuple(parse_grid(args.grid)), B=args.B,
                        contaminator=_contaminator(args.contaminator, args),
                        filter=make_filter(args.filter), M=args.M, beta=args.beta)
    res = select_p(sp, cfg, args.seed)
    with open(args.out, "w") as fh:
        fh.write("p,mse\n")
        for p, m in res.mse_curve:
            fh.write(f"{p:.10g},{m:.10g}\n")
    summary = res.to_dict()
    summary.pop("mse_curve")
    sys.stdout.write(json.dumps(summary) + "\n")


def cmd_experiment(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "log.txt", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("exphurst")
    root.addHandler(handler)
    root.setLevel(logging.INFO)
    errors = []
    try:
        raw = json.loads(Path(args.config).read_text())
        if args.workers:
            raw["workers"] = args.workers
        cfg = ExperimentConfig.from_dict(raw)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        errors.append({"stage": "config", "error": f"{type(exc).__name__}: {exc}"})
        sys.stderr.write(json.dumps({"errors": errors}) + "\n")
        root.removeHandler(handler)
        return 2
    t0 = time.time()
    log.info("config hash %s", cfg.digest())
    report = run_tables(cfg)
    (out / "tables.csv").write_text(tables_csv(report))
    result = report.to_dict()
    result["meta"]["config"] = cfg.to_dict()
    fig = cfg.figures if cfg.figures is not None else {}
    if fig.get("enabled", True):
        figs = run_figures(fig, cfg.master_seed)
        for name in ("fig1", "fig2", "fig3"):
            (out / f"{name}.csv").write_text(rows_csv(figs[name]))
        result["variance_scaling_slopes"] = figs["slopes"]
    for c in report.cells:
        if len(c.estimates) == 0:
            errors.append({"stage": "aggregate", "error": f"no successful replication for "
                                                          f"{c.scenario.label} / {c.method}"})
    result["errors"] = errors
    (out / "report.json").write_text(json.dumps(result, indent=2, allow_nan=True) + "\n")
    log.info("finished in %.1f s", time.time() - t0)
    root.removeHandler(handler)
    handler.close()
    if errors:
        sys.stderr.write(json.dumps({"errors": errors}) + "\n")
        return 1
    return 0


def _add_estimator_args(p):
    p.add_argument("--filter", default="d4", choices=sorted(FILTERS))
    p.add_argument("--M", type=int, default=5)
    p.add_argument("--beta", type=float, default=2.0)


def _add_contamination_args(p):
    p.add_argument("--fraction", type=float, default=0.05)
    p.add_argument("--snr", type=float, default=-20.0, help="SNR in dB")
    p.add_argument("--db-factor", type=float, default=20.0, choices=[10.0, 20.0],
                   help="noise variance = sigma2 * 10**(-snr/db_factor)")
    p.add_argument("--rounding-mode", default="increments", choices=["increments", "path"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="exphurst", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate fGn or fBm")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=["fgn", "fbm"], default="fbm")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("contaminate", help="add outliers to, or round, an fBm path")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--kind", choices=["outliers", "rounding"], required=True)
    _add_contamination_args(p)
    p.add_argument("--sigma2-increment", type=float, default=None,
                   help="increment variance (default: sidecar sigma**2, else estimated)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_contaminate)

    p = sub.add_parser("estimate", help="estimate the Hurst exponent of an fBm path")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--method", choices=["E", "ELOG", "ST", "MED", "TM"], default="E")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--trim", type=float, default=0.05)
    _add_estimator_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("select-p", help="Monte-Carlo choice of the expectile order")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--contaminator", choices=["none", "outliers", "rounding"], default="none")
    _add_contamination_args(p)
    p.add_argument("--grid", default="0.05:0.95:0.05")
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    _add_estimator_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select_p)

    p = sub.add_parser("experiment", help="run a JSON-configured Monte-Carlo experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level)
    for h in logging.getLogger().handlers:
        h.setLevel(level)
    try:
        rc = args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        sys.stderr.write(json.dumps({"errors": [f"{type(exc).__name__}: {exc}"]}) + "\n")
        return 1
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
