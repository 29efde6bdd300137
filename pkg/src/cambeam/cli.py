"""Command-line front end: calibrate / run / train-mlp / compare / report."""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .errors import CambeamError, ConfigError
from .config import load_scenario
from .mlp import TrainConfig, save_model, train_mlp
from .mobility import rotation_trajectory
from .simulation import (POLICIES, RunResult, compute_quantile_thresholds,
                         run_scenario, write_records_csv, write_summary_csv)

DEFAULT_QUANTILES = (0.80, 0.90, 0.95)


def _add_run_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenarios", nargs="+", help="scenario TOML file(s)")
    p.add_argument("-o", "--outdir", required=True)
    p.add_argument("--seed", type=int, default=None, help="seed override")
    p.add_argument("--policy", choices=POLICIES, default=None, help="policy override")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--gamma-th", type=float, default=None,
                   help="absolute SNR threshold override (dB)")


def cmd_calibrate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    # each quantile is an availability target: threshold sits at the 1-q
    # empirical quantile of the calibrated best-pair SNR distribution
    thresholds = compute_quantile_thresholds(
        scenario, [1.0 - q for q in args.quantiles])
    with open(args.output, "w") as fh:
        fh.write("# schema=cambeam-thresholds-v1\n")
        fh.write("quantile,gamma_th_db\n")
        for q, g in zip(args.quantiles, thresholds):
            fh.write(f"{q},{g!r}\n")
    print(f"wrote {args.output}")
    return 0


def _one_run(spec: tuple) -> tuple[str, RunResult]:
    path, overrides, seed, gamma_th, outdir = spec
    scenario = load_scenario(path, **overrides)
    if seed is not None:
        scenario = replace(scenario, seed=seed)
    result = run_scenario(scenario, gamma_th_db=gamma_th)
    name = f"{scenario.scenario_id}_{scenario.policy}_seed{scenario.seed}.csv"
    out = os.path.join(outdir, name)
    write_records_csv(result, out)
    return out, result


def cmd_run(args: argparse.Namespace) -> int:
    os.makedirs(args.outdir, exist_ok=True)
    specs = []
    for path in args.scenarios:
        overrides = {}
        if args.policy:
            overrides["policy"] = args.policy
        base_scenario = load_scenario(path, **overrides)  # fail fast on bad files
        base_seed = args.seed if args.seed is not None else base_scenario.seed
        for i in range(args.repeat):
            specs.append((path, overrides, base_seed + i, args.gamma_th, args.outdir))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_one_run, specs))
    else:
        outcomes = [_one_run(s) for s in specs]
    results = [r for _, r in sorted(outcomes, key=lambda o: o[0])]
    write_summary_csv(results, os.path.join(args.outdir, "summary.csv"))
    for path, res in outcomes:
        s = res.summary
        print(f"{path}: {s.n_records} records, outage {s.outage_pct:.1f}%, "
              f"mean T_b {s.mean_tb_s:.3f}s")
    return 0


def _load_offset_dataset(path: str) -> list:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            vals = [float(v) for v in line.split()]
            if len(vals) < 2:
                raise ConfigError(f"{path}:{lineno}: need features plus target")
            rows.append((np.array(vals[:-1]), vals[-1]))
    return rows


def cmd_train_mlp(args: argparse.Namespace) -> int:
    if args.dataset:
        dataset = _load_offset_dataset(args.dataset)
    elif args.from_scenario:
        scenario = load_scenario(args.from_scenario, policy="ma")
        dataset = []
        for i in range(args.replay_runs):
            log: list = []
            run_scenario(replace(scenario, seed=scenario.seed + i), offset_log=log)
            dataset.extend(log)
        if not dataset:
            raise ConfigError("replay produced no offset samples")
    else:
        raise ConfigError("provide --dataset or --from-scenario")
    hyper = TrainConfig(lr=args.lr, epochs=args.epochs, batch=args.batch,
                        dropout_p=args.dropout, seed=args.seed)
    model = train_mlp(dataset, hyper)
    save_model(model, args.output)
    if args.loss_csv:
        with open(args.loss_csv, "w") as fh:
            fh.write("# schema=cambeam-loss-v1\n")
            fh.write("epoch,loss\n")
            for i, loss in enumerate(model.loss_curve):
                fh.write(f"{i},{loss!r}\n")
    print(f"trained on {len(dataset)} samples, final loss "
          f"{model.loss_curve[-1]:.6f}, wrote {args.output}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    os.makedirs(args.outdir, exist_ok=True)
    base = load_scenario(args.scenario)
    if base.trajectory.kind != "rotation":
        raise ConfigError("compare sweeps rotation speeds; use a rotation scenario")
    rows = []
    for speed in args.speeds:
        traj = rotation_trajectory(base.trajectory.start_pose, speed,
                                   base.trajectory.arc_deg)
        scenario_speed = replace(base, trajectory=traj)
        thresholds = compute_quantile_thresholds(
            scenario_speed, [1.0 - q for q in args.quantiles])
        for q, gamma_th in zip(args.quantiles, thresholds):
            for policy in args.policies:
                scenario = replace(scenario_speed, policy=policy,
                                   mlp_model=base.mlp_model)
                if policy == "mlp" and scenario.mlp_model is None:
                    raise ConfigError("comparison includes 'mlp' but no model_file "
                                      "is configured in [mlp]")
                result = run_scenario(scenario, gamma_th_db=gamma_th)
                s = result.summary
                rows.append((policy, speed, q, gamma_th, s.outage_pct,
                             s.mean_tb_s, s.mean_n_beams))
                write_records_csv(result, os.path.join(
                    args.outdir,
                    f"{base.scenario_id}_{policy}_s{speed}_q{q}.csv"))
    out = os.path.join(args.outdir, "comparison.csv")
    with open(out, "w") as fh:
        fh.write("# schema=cambeam-comparison-v1\n")
        fh.write("policy,speed_deg_s,quantile,gamma_th_db,outage_pct,mean_tb_s,mean_n_beams\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    print(f"wrote {out} ({len(rows)} grid cells)")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    merged = []
    for name in sorted(os.listdir(args.results_dir)):
        if not name.endswith(".csv") or name in ("summary.csv", "report.csv"):
            continue
        path = os.path.join(args.results_dir, name)
        with open(path) as fh:
            header = fh.readline()
        if "cambeam-records-v1" not in header:
            continue
        merged.append(path)
    if not merged:
        raise ConfigError(f"no records CSVs found in {args.results_dir}")
    with open(args.output, "w") as fh:
        fh.write("# schema=cambeam-report-v1\n")
        fh.write("records_csv\n")
        for path in merged:
            fh.write(path + "\n")
    print(f"indexed {len(merged)} records files into {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cambeam",
        description="Camera-primed double-directional beam alignment simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="compute quantile SNR thresholds")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--quantiles", type=float, nargs="+", default=list(DEFAULT_QUANTILES))
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("run", help="execute scenarios and emit records CSVs")
    _add_run_spec_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train-mlp", help="train the offset regressor")
    p.add_argument("--dataset", help="text file: feature columns then target offset")
    p.add_argument("--from-scenario", help="generate the dataset by replaying MA runs")
    p.add_argument("--replay-runs", type=int, default=5)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--loss-csv")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_mlp)

    p = sub.add_parser("compare", help="policy x speed x quantile grid")
    p.add_argument("scenario")
    p.add_argument("-o", "--outdir", required=True)
    p.add_argument("--speeds", type=float, nargs="+", default=[0.25, 1.0, 4.0])
    p.add_argument("--quantiles", type=float, nargs="+", default=list(DEFAULT_QUANTILES))
    p.add_argument("--policies", nargs="+", choices=POLICIES,
                   default=["ma", "camera-only", "nr-hier", "exhaustive"])
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="index records CSVs for the plotting tool")
    p.add_argument("results_dir")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CambeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
