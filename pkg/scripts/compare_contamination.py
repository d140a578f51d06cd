"""Compare contamination conventions on the H = 0.2 rounded and H = 0.8 outlier cells.

Rounding can act on the path (floor of each value) or on the increments
(nearest integer, then re-accumulate); an SNR in dB can be read as a
variance ratio 10**(-snr/20) or a power ratio 10**(-snr/10). The
conventions lead to very different estimator behaviour, and this script
prints the table cells under each one side by side.
"""
import argparse

from exphurst.contamination import ContaminationSpec
from exphurst.estimators import EstimatorConfig
from exphurst.harness import ExperimentConfig, MethodSpec, Scenario, run_tables

FIXED = [MethodSpec(EstimatorConfig("E", p=p)) for p in (0.2, 0.4, 0.6, 0.8)] + [
    MethodSpec(EstimatorConfig(m)) for m in ("MED", "TM", "ST")]


def show(title, report):
    print(title)
    for c in report.cells:
        print(f"  {c.method:10s} {c.mean:.3f} ({c.sd:.3f})  failures={c.failures}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replications", type=int, default=50)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--master-seed", type=int, default=20240101)
    args = ap.parse_args()
    kw = dict(replications=args.replications, master_seed=args.master_seed)

    rounded = [Scenario("rounded", 0.2, 0.5, args.n)]
    for mode in ("increments", "path"):
        cfg = ExperimentConfig(rounded, FIXED, rounding=ContaminationSpec("rounding", mode=mode), **kw)
        show(f"rounded H=0.2, mode={mode}", run_tables(cfg))

    outl = [Scenario("outliers", 0.8, 0.5, args.n)]
    for dbf in (20.0, 10.0):
        cfg = ExperimentConfig(outl, FIXED, outliers=ContaminationSpec("outliers", db_factor=dbf), **kw)
        show(f"outliers H=0.8, db_factor={dbf:g}", run_tables(cfg))


if __name__ == "__main__":
    main()
