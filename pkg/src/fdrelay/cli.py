"""Command-line entry point.

Subcommands mirror the experiments: outage, si-sweep, ber, accuracy,
optimize, contour. Each accepts a JSON config file plus the common
overrides and writes a CSV (stdout summary otherwise).
"""
import argparse
import dataclasses
import json
import sys

from .harness import (
    SimConfig,
    emit_results,
    run_ber_experiment,
    run_outage_experiment,
    run_selection_accuracy,
    run_si_sweep,
)
from .optimize import (
    OptimizeConfig,
    contour_grid,
    optimize_location_equal_gain,
    optimize_location_given_power,
    optimize_power_given_location,
    optimize_power_separate_constraints,
)


def _load_sim_config(args) -> SimConfig:
    cfg = SimConfig.from_json(args.config) if args.config else SimConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["n_trials"] = args.trials
        overrides["ber_frames"] = args.trials
    if args.mode is not None:
        overrides["mode"] = args.mode
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _load_opt_config(args) -> OptimizeConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in dataclasses.fields(OptimizeConfig)}
        extra = {"mode", "d_sr", "p_s", "p_s_max", "p_r_max", "resolution"}
        unknown = set(data) - known - extra
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        base = {k: v for k, v in data.items() if k in known}
        return OptimizeConfig(**base), data
    return OptimizeConfig(p_tot=10.0), {}


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="experiment seed override")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--trials", type=int, help="Monte Carlo trials/frames per point")
    p.add_argument("--mode", choices=["analytic", "mc", "both"],
                   help="evaluation mode override")


def _finish(rows, args):
    if args.out:
        emit_results(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        for r in rows:
            print(f"{r.sweep:.6g}\t{r.metric}\t{r.value:.6g}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fdrelay",
        description="Symbol-selective full-duplex relaying: simulation, "
                    "closed-form outage, and power/location optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("outage", "si-sweep", "ber", "accuracy", "optimize", "contour"):
        _add_common(sub.add_parser(name))

    args = parser.parse_args(argv)

    if args.command == "outage":
        _finish(run_outage_experiment(_load_sim_config(args)), args)
    elif args.command == "si-sweep":
        _finish(run_si_sweep(_load_sim_config(args)), args)
    elif args.command == "ber":
        _finish(run_ber_experiment(_load_sim_config(args)), args)
    elif args.command == "accuracy":
        cfg = _load_sim_config(args)
        _finish(run_selection_accuracy(cfg, orders=(2, 4, 16)), args)
    elif args.command == "optimize":
        cfg, data = _load_opt_config(args)
        mode = data.get("mode", "power_given_location")
        if mode == "equal_gain_location":
            rep = optimize_location_equal_gain(cfg)
        elif mode == "power_given_location":
            rep = optimize_power_given_location(cfg, data.get("d_sr", cfg.d_sd / 2))
        elif mode == "location_given_power":
            rep = optimize_location_given_power(cfg, data.get("p_s", cfg.p_tot / 2))
        elif mode == "separate_constraints":
            rep = optimize_power_separate_constraints(
                cfg, data.get("p_s_max", cfg.p_tot / 2),
                data.get("p_r_max", cfg.p_tot / 2),
                data.get("d_sr", cfg.d_sd / 2))
        else:
            raise ValueError(f"unknown optimize mode {mode!r}")
        print(json.dumps(dataclasses.asdict(rep), indent=2))
    elif args.command == "contour":
        cfg, data = _load_opt_config(args)
        rows = contour_grid(cfg, int(data.get("resolution", 51)))
        out = args.out or "contour.csv"
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("p_s_frac,d_sr_frac,outage\n")
            for pf, df, val in rows:
                fh.write(f"{pf:.10e},{df:.10e},{val:.10e}\n")
        print(f"wrote {len(rows)} grid points to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
