"""Command-line interface: simulate, estimate, test and run experiments."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .. import rng
from ..avar import DENOMINATORS, JUMP_FILTERS, PAIRINGS, rv_avar
from ..cojump import VARIANTS, cojump_test
from ..errors import DegenerateError, ParameterError, ShapeError
from ..paths import read_csv, write_csv, write_truth
from ..siml import integrated_volatility, siml
from ..variation import bipower_variation, power_variation, truncated_rv
from .cases import CASES, EstimatorConfig, case
from .experiments import ExperimentConfig, run_experiment
from .io import load_config, save_results, to_jsonable, write_json

QUICK_REPS = 100


def _estimator(args) -> EstimatorConfig:
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            return EstimatorConfig.from_dict(json.load(fh).get("estimator"))
    return EstimatorConfig()


def _emit(payload, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        write_json(payload, out)
    else:
        json.dump(to_jsonable(payload), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def cmd_simulate(args):
    sample = case(args.case, args.n).simulate(rng.seed_sequence(args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(sample, out / f"{args.case}.csv")
    write_truth(sample, out / f"{args.case}_truth.json")
    print(f"wrote {out / (args.case + '.csv')} (n={sample.n}, d={sample.d})")


def _univariate_estimates(y, est):
    fit = siml(y, est.siml)
    trvc, trvj = truncated_rv(y, est.trunc)
    report = {
        "rv": power_variation(y, 2),
        "bpv_scaled": bipower_variation(y, scaled=True),
        "trvc": trvc,
        "trvj": trvj,
        "siml_qv": float(fit.qv[0, 0]),
        "zeta_hat": float(fit.zeta_hat[0]),
        "iv_hat": float(integrated_volatility(y, est.siml, est.trunc)[0, 0]),
    }
    for mode in ("continuous", "jump"):
        report[f"rv_avar_{mode}"] = rv_avar(y, mode, est.siml, est.window, est.trunc).value
    return report


def cmd_estimate(args):
    sample = read_csv(args.input)
    est = _estimator(args)
    payload = {"n": sample.n, "d": sample.d, "estimator": est.to_dict(),
               "components": [_univariate_estimates(sample.y[m], est) for m in range(sample.d)]}
    if sample.d == 2:
        payload["iv_matrix"] = integrated_volatility(sample, est.siml, est.trunc)
    _emit(payload, args.out)


def cmd_test(args):
    sample = read_csv(args.input)
    est = _estimator(args)
    report = cojump_test(sample, args.level, args.variant, est.siml, est.window, est.trunc,
                         args.pairing, args.denominator, args.jump_filter)
    _emit(report.to_dict(), args.out)


def _experiment_config(args, experiment) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig(experiment)
    if cfg.experiment != experiment:
        raise ParameterError(f"config is for {cfg.experiment!r}, command runs {experiment!r}")
    changes = {}
    if args.cases:
        changes["cases"] = tuple(args.cases)
    for key in ("n", "seed", "reps", "jobs", "pairing", "denominator", "jump_filter"):
        value = getattr(args, key)
        if value is not None:
            changes[key] = value
    if args.quick and args.reps is None:
        changes["reps"] = min(cfg.reps, QUICK_REPS)
    if args.variant:
        changes["variants"] = (args.variant,)
    return replace(cfg, **changes)


def cmd_experiment(args):
    experiment = args.command.removeprefix("exp-").replace("order", "order-study")
    cfg = _experiment_config(args, experiment)
    table = run_experiment(cfg)
    written = save_results(table, args.out)
    for label, row in table.rows.items():
        cells = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items())
        print(f"{label}: {cells}")
    print(f"{len(written)} files in {args.out} ({table.wall_time:.1f} s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smallnoise", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one path of a registered case")
    p.add_argument("--case", required=True, choices=list(CASES))
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="paths")
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (("estimate", cmd_estimate, "volatility and noise estimates for a CSV path"),
                                 ("test", cmd_test, "co-jump test on a bivariate CSV path")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input")
        p.add_argument("--config", help="JSON file whose 'estimator' block sets the tuning constants")
        p.add_argument("--out", help="write JSON here instead of stdout")
        if name == "test":
            p.add_argument("--level", type=float, default=0.05)
            p.add_argument("--variant", choices=VARIANTS, default="corrected")
            p.add_argument("--pairing", choices=PAIRINGS, default="limit")
            p.add_argument("--denominator", choices=DENOMINATORS, default="squared")
            p.add_argument("--jump-filter", choices=JUMP_FILTERS, default="joint")
        p.set_defaults(func=func)

    for name in ("exp-rmse", "exp-sizepower", "exp-density", "exp-order"):
        p = sub.add_parser(name, help=f"run the {name[4:]} Monte Carlo experiment")
        p.add_argument("--config")
        p.add_argument("--cases", nargs="+")
        p.add_argument("--seed", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--reps", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--out", default=f"results/{name[4:]}")
        p.add_argument("--quick", action="store_true", help=f"at most {QUICK_REPS} replications")
        p.add_argument("--variant", choices=VARIANTS)
        p.add_argument("--pairing", choices=PAIRINGS)
        p.add_argument("--denominator", choices=DENOMINATORS)
        p.add_argument("--jump-filter", choices=JUMP_FILTERS)
        p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ParameterError, ShapeError, DegenerateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
