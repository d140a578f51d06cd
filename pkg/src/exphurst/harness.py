"""Monte-Carlo experiments: estimator tables, expectile convergence, variance scaling.

Every replication draws its randomness from ``mix_seed(master_seed,
scenario_index, rep, stream)`` so results do not depend on which methods are
requested or on how work is split across processes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .contamination import ContaminationSpec
from .estimators import EstimatorConfig, ScaleDegenerateError, estimate_hurst
from .expectile import Transform, expectile_sorted, theoretical_expectile
from .filters import make_filter
from .pselect import PSelectConfig, default_grid, parse_grid, select_p
from .synth import HurstParams, mix_seed, simulate_fbm, simulate_fgn

log = logging.getLogger(__name__)

MODELS = ("standard", "outliers", "rounded")
POPT_LABEL = "E(p=p^opt)"
FIG_P = tuple(np.round(np.arange(1, 10) * 0.1, 10))

_PATH, _CONTAM, _PSEL = 0, 1, 2


@dataclass(frozen=True)
class Scenario:
    model: str
    H: float
    sigma: float = 0.5
    n: int = 500

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        HurstParams(self.H, self.sigma)
        if self.n < 2:
            raise ValueError("n must be >= 2")

    @property
    def label(self) -> str:
        return f"{self.model} H={self.H:g} n={self.n}"


@dataclass(frozen=True)
class MethodSpec:
    """One table row: a fixed estimator, or the expectile estimator with
    ``p`` re-selected on every replication (``popt=True``)."""

    estimator: EstimatorConfig
    popt: bool = False

    @property
    def label(self) -> str:
        return POPT_LABEL if self.popt else self.estimator.label

    @classmethod
    def from_dict(cls, d: dict, filter_name="d4", M=5, beta=2.0) -> "MethodSpec":
        d = dict(d)
        method = d.pop("method")
        p = d.pop("p", 0.5)
        popt = p == "opt"
        kw = dict(filter=make_filter(d.pop("filter", filter_name)), M=d.pop("M", M),
                  beta=d.pop("beta", beta))
        if "trim" in d:
            kw["trim"] = d.pop("trim")
        if d:
            raise ValueError(f"unknown method fields {sorted(d)}")
        if popt and method != "E":
            raise ValueError("p='opt' is only meaningful for method E")
        return cls(EstimatorConfig(method, p=0.5 if popt else float(p), **kw), popt)


def table_methods() -> list[MethodSpec]:
    rows = [MethodSpec(EstimatorConfig("E", p=p)) for p in (0.2, 0.4, 0.6, 0.8)]
    rows.append(MethodSpec(EstimatorConfig("E"), popt=True))
    rows += [MethodSpec(EstimatorConfig(m)) for m in ("MED", "TM", "ST")]
    return rows


def table_scenarios(H: float, sigma: float = 0.5) -> list[Scenario]:
    return [Scenario(m, H, sigma, n) for m in MODELS for n in (500, 5000)]


@dataclass
class ExperimentConfig:
    scenarios: list
    methods: list = field(default_factory=table_methods)
    replications: int = 200
    master_seed: int = 20240101
    outliers: ContaminationSpec = field(default_factory=lambda: ContaminationSpec("outliers"))
    rounding: ContaminationSpec = field(default_factory=lambda: ContaminationSpec("rounding"))
    popt_grid: tuple = tuple(default_grid())
    popt_B: int = 100
    workers: int = 1
    figures: dict | None = None

    def __post_init__(self):
        if self.replications < 10:
            raise ValueError("replications must be >= 10")
        if not self.scenarios:
            raise ValueError("at least one scenario is required")

    def contaminator(self, model: str) -> ContaminationSpec | None:
        return {"standard": None, "outliers": self.outliers, "rounded": self.rounding}[model]

    def to_dict(self) -> dict:
        return {
            "scenarios": [asdict(s) for s in self.scenarios],
            "methods": [{**m.estimator.to_dict(), "p": "opt" if m.popt else m.estimator.p}
                        for m in self.methods],
            "replications": self.replications,
            "master_seed": self.master_seed,
            "contamination": {"outliers": self.outliers.to_dict(),
                              "rounding": self.rounding.to_dict()},
            "popt": {"grid": list(self.popt_grid), "B": self.popt_B},
            "figures": self.figures,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        fname, M, beta = d.pop("filter", "d4"), d.pop("M", 5), d.pop("beta", 2.0)
        scenarios = [Scenario(**s) for s in d.pop("scenarios")]
        methods = d.pop("methods", None)
        kw = {}
        if methods is not None:
            kw["methods"] = [MethodSpec.from_dict(m, fname, M, beta) for m in methods]
        cont = d.pop("contamination", {})
        for key in ("outliers", "rounding"):
            if key in cont:
                spec = {k: v for k, v in cont[key].items() if k != "kind"}
                kw[key] = ContaminationSpec(key, **spec)
        popt = d.pop("popt", {})
        if "grid" in popt:
            g = popt["grid"]
            kw["popt_grid"] = tuple(parse_grid(g) if isinstance(g, str) else g)
        if "B" in popt:
            kw["popt_B"] = int(popt["B"])
        for key in ("replications", "master_seed", "workers", "figures"):
            if key in d:
                kw[key] = d.pop(key)
        if d:
            raise ValueError(f"unknown config fields {sorted(d)}")
        return cls(scenarios, **kw)


@dataclass
class CellResult:
    scenario: Scenario
    method: str
    estimates: np.ndarray
    failures: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.estimates)) if len(self.estimates) else float("nan")

    @property
    def sd(self) -> float:
        return float(np.std(self.estimates, ddof=1)) if len(self.estimates) > 1 else float("nan")

    def to_dict(self) -> dict:
        return {**asdict(self.scenario), "method": self.method, "mean": self.mean,
                "sd": self.sd, "count": int(len(self.estimates)), "failures": self.failures}


@dataclass
class ExperimentReport:
    cells: list
    popt: dict  # scenario label -> list of selected p (one per replication)
    meta: dict

    def cell(self, scenario: Scenario, method: str) -> CellResult:
        for c in self.cells:
            if c.scenario == scenario and c.method == method:
                return c
        raise KeyError((scenario, method))

    def to_dict(self) -> dict:
        hist = {}
        for lab, ps in self.popt.items():
            vals, counts = np.unique(np.round(ps, 10), return_counts=True)
            hist[lab] = {f"{v:g}": int(c) for v, c in zip(vals, counts)}
        return {"meta": self.meta, "cells": [c.to_dict() for c in self.cells],
                "popt_histogram": hist}


def _replicate(args):
    """Simulate, contaminate and estimate one replication of one scenario."""
    cfg, sid, rep = args
    sc = cfg.scenarios[sid]
    path = simulate_fbm(HurstParams(sc.H, sc.sigma), sc.n,
                        mix_seed(cfg.master_seed, sid, rep, _PATH))
    contam = cfg.contaminator(sc.model)
    if contam is not None:
        path = contam.apply(path, sc.sigma**2, mix_seed(cfg.master_seed, sid, rep, _CONTAM))
    out, p_opt, errors = {}, None, []
    for m in cfg.methods:
        est = m.estimator
        try:
            if m.popt:
                pcfg = PSelectConfig(grid=cfg.popt_grid, B=cfg.popt_B, contaminator=contam,
                                     filter=est.filter, M=est.M, beta=est.beta)
                res = select_p(path, pcfg, mix_seed(cfg.master_seed, sid, rep, _PSEL))
                p_opt = res.p_opt
                est = EstimatorConfig("E", p=p_opt, beta=est.beta, filter=est.filter, M=est.M)
            out[m.label] = estimate_hurst(path, est).H_hat
        except (ScaleDegenerateError, ValueError, RuntimeError) as exc:
            out[m.label] = None
            errors.append(f"{sc.label} rep={rep} {m.label}: {exc}")
    return sid, rep, out, p_opt, errors


def _map(fn, jobs, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs, chunksize=4))
    return [fn(j) for j in jobs]


def run_tables(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every scenario x replication x method and aggregate mean/sd of the estimates."""
    jobs = [(cfg, sid, rep) for sid in range(len(cfg.scenarios)) for rep in range(cfg.replications)]
    results = _map(_replicate, jobs, cfg.workers)
    labels = [m.label for m in cfg.methods]
    cells, popt = [], {}
    for sid, sc in enumerate(cfg.scenarios):
        rows = [r for r in results if r[0] == sid]
        rows.sort(key=lambda r: r[1])
        for lab in labels:
            vals = [r[2][lab] for r in rows]
            ok = np.array([v for v in vals if v is not None], dtype=float)
            cells.append(CellResult(sc, lab, ok, len(vals) - len(ok)))
        ps = [r[3] for r in rows if r[3] is not None]
        if ps:
            popt[sc.label] = ps
        for r in rows:
            for e in r[4]:
                log.warning("replication failed: %s", e)
    meta = {"config_hash": cfg.digest(), "master_seed": cfg.master_seed,
            "replications": cfg.replications}
    return ExperimentReport(cells, popt, meta)


def tables_csv(report: ExperimentReport) -> str:
    """Wide table: one row per method, one column per scenario, cells ``mean (sd)``."""
    scen = []
    for c in report.cells:
        if c.scenario not in scen:
            scen.append(c.scenario)
    methods = []
    for c in report.cells:
        if c.method not in methods:
            methods.append(c.method)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method"] + [s.label for s in scen])
    for m in methods:
        row = [m]
        for s in scen:
            c = report.cell(s, m)
            cell = f"{c.mean:.3f} ({c.sd:.3f})"
            if c.failures:
                cell += f" [{c.failures} failed]"
            row.append(cell)
        w.writerow(row)
    return buf.getvalue()


def run_expectile_convergence(H: float, transforms, p_grid=FIG_P, n: int = 500,
                              reps: int = 200, seed: int = 0) -> list[dict]:
    """Sample expectiles of ``h(fGn)`` (unit variance) per transform, ``p`` and replication.

    Each row also carries the theoretical expectile of ``h(Y)``, ``Y ~ N(0, 1)``.
    """
    params = HurstParams(H, 1.0)
    p_grid = np.asarray(p_grid, dtype=float)
    theo = {t.label: [theoretical_expectile(t, p) for p in p_grid] for t in transforms}
    rows = []
    for rep in range(reps):
        y = simulate_fgn(params, n, mix_seed(seed, rep)).values
        for t in transforms:
            e = expectile_sorted(np.sort(t(y)), p_grid)
            for p, val, th in zip(p_grid, e, theo[t.label]):
                rows.append({"H": H, "transform": t.label, "p": float(p), "rep": rep,
                             "sample_expectile": float(val), "theoretical": th})
    return rows


def run_variance_scaling(H: float, transforms, n_grid=(250, 500, 1000, 2000, 4000),
                         reps: int = 200, seed: int = 0, p_grid=FIG_P):
    """Mean over ``p`` of the across-replication variance of sample expectiles, per ``n``.

    Returns ``(rows, slopes)`` where ``slopes[label]`` is the OLS slope of
    ``log(variance)`` against ``log(n)``.
    """
    n_grid = list(n_grid)
    if len(n_grid) < 4 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be increasing with at least 4 points")
    params = HurstParams(H, 1.0)
    p_grid = np.asarray(p_grid, dtype=float)
    rows, curves = [], {t.label: [] for t in transforms}
    for n in n_grid:
        est = {t.label: np.empty((reps, len(p_grid))) for t in transforms}
        for rep in range(reps):
            y = simulate_fgn(params, n, mix_seed(seed, n, rep)).values
            for t in transforms:
                est[t.label][rep] = expectile_sorted(np.sort(t(y)), p_grid)
        for t in transforms:
            v = float(np.mean(np.var(est[t.label], axis=0, ddof=1)))
            curves[t.label].append(v)
            rows.append({"H": H, "transform": t.label, "n": n, "mean_variance": v})
    ln = np.log(n_grid)
    slopes = {lab: float(np.polyfit(ln, np.log(v), 1)[0]) for lab, v in curves.items()}
    for r in rows:
        r["slope"] = slopes[r["transform"]]
    return rows, slopes


def rows_csv(rows: list[dict], floatfmt: str = "{:.10g}") -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: floatfmt.format(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def fig_transforms(which: str):
    if which == "fig1":
        return [Transform("identity")]
    return [Transform("square"), Transform("log_abs")]


def run_figures(fig: dict, master_seed: int) -> dict:
    """Convergence boxplot data (fig1/fig2) and variance-scaling data (fig3)."""
    hursts = fig.get("hursts", [0.3, 0.7])
    reps = int(fig.get("reps", 200))
    n = int(fig.get("n", 500))
    n_grid = fig.get("n_grid", [250, 500, 1000, 2000, 4000])
    out = {"fig1": [], "fig2": [], "fig3": [], "slopes": {}}
    for i, H in enumerate(hursts):
        for name in ("fig1", "fig2"):
            out[name] += run_expectile_convergence(H, fig_transforms(name), FIG_P, n, reps,
                                                   mix_seed(master_seed, 100 + i))
        tr = fig_transforms("fig1") + fig_transforms("fig2")
        rows, slopes = run_variance_scaling(H, tr, n_grid, reps, mix_seed(master_seed, 200 + i))
        out["fig3"] += rows
        out["slopes"][f"H={H:g}"] = slopes
    return out
