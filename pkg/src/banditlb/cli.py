"""Batch front-end: run bound computation, simulation or verification from
an experiment config, emitting CSV files and a standalone plot script.

Exit codes are a stable contract: 0 success, 2 configuration error,
3 model/bound incompatibility, 4 simulation failure, 5 verification
failure.
"""

import argparse
import os
import sys

from .backend import have_kernel
from .bounds import CURVE_BOUND_IDS, LargeTConstants, build_curve
from .config import ConfigError, ExperimentConfig, figure1_config, load_config
from .models import FamilyMismatchError, ModelMismatchError, ParameterMismatchError
from .simulate import SimulationError, linear_grid, log_grid, monte_carlo
from .strategies import STRATEGY_IDS
from .verify import FAULT_MODES, full_battery

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCOMPATIBLE = 3
EXIT_SIMULATION = 4
EXIT_VERIFY = 5


class IncompatibilityError(RuntimeError):
    pass


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(out_dir: str, name: str, header, rows) -> str:
    """Write a CSV atomically (temp file then rename); '.' decimal
    separator regardless of locale via repr formatting."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    os.replace(tmp, path)
    return path


PLOT_SCRIPT = '''#!/usr/bin/env python3
"""Render the mean regret curve (with a 2-standard-error band) together
with any bound curves present next to this script.  Needs matplotlib."""
import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
fig, ax = plt.subplots(figsize=(7.0, 4.5))

curve = os.path.join(here, "regret_curve.csv")
if os.path.exists(curve):
    ts, mean, lo, hi = [], [], [], []
    with open(curve) as fh:
        for row in csv.DictReader(fh):
            t = int(row["T"])
            m = float(row["mean_regret"])
            s = float(row["stderr"])
            ts.append(t)
            mean.append(m)
            lo.append(m - 2.0 * s)
            hi.append(m + 2.0 * s)
    ax.plot(ts, mean, color="tab:blue", label="mean regret")
    ax.fill_between(ts, lo, hi, color="tab:blue", alpha=0.25, linewidth=0)

for path in sorted(glob.glob(os.path.join(here, "bound_*.csv"))):
    ts, vals = [], []
    with open(path) as fh:
        for row in csv.DictReader(fh):
            ts.append(int(row["T"]))
            vals.append(float(row["value"]))
    ax.plot(ts, vals, linestyle="--", label=os.path.basename(path)[6:-4])

ax.set_xscale("log")
ax.set_xlabel("round")
ax.set_ylabel("cumulative regret")
ax.legend(loc="upper left")
fig.tight_layout()
out = os.path.join(here, "regret.png")
fig.savefig(out, dpi=150)
print("wrote", out)
'''


def _emit_plot_script(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "plot_results.py")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PLOT_SCRIPT)
    os.replace(tmp, path)
    return path


def _grid(cfg: ExperimentConfig):
    kind = cfg.checkpoints[0]
    if kind == "log":
        return log_grid(cfg.horizon, cfg.checkpoints[1])
    if kind == "linear":
        return linear_grid(cfg.horizon, cfg.checkpoints[1])
    pts = tuple(sorted(set(cfg.checkpoints[1])))
    if pts[0] < 1 or pts[-1] > cfg.horizon:
        raise ConfigError("checkpoint list leaves [1, horizon]")
    return pts


def cmd_bounds(cfg: ExperimentConfig) -> int:
    if cfg.problem is None:
        raise ConfigError("the bounds command needs a [problem] section")
    ids = list(cfg.bounds)
    if "envelope" not in ids:
        ids.append("envelope")
    for bid in ids:
        if bid not in CURVE_BOUND_IDS:
            raise ConfigError(f"unknown bound-id {bid!r}")
    grid = _grid(cfg)
    consts = LargeTConstants(c_psi=cfg.c_psi, omega=cfg.omega)
    for bid in ids:
        try:
            curve = build_curve(bid, cfg.problem, grid, eps=cfg.eps,
                                delta=cfg.delta, consts=consts)
        except (FamilyMismatchError, ParameterMismatchError, ModelMismatchError,
                ValueError) as exc:
            raise IncompatibilityError(
                f"bound {bid!r} is incompatible with the problem: {exc}"
            ) from exc
        _write_csv(cfg.out_dir, f"bound_{bid}.csv",
                   ("bound_id", "T", "value", "void", "attained_by"),
                   curve.csv_rows())
        print(f"bounds: wrote bound_{bid}.csv ({len(curve.points)} points)")
    return EXIT_OK


def _run_simulation(cfg: ExperimentConfig) -> int:
    if cfg.problem is None:
        raise ConfigError("the simulate command needs a [problem] section")
    if cfg.strategy_id is None:
        raise ConfigError("the simulate command needs a [strategy] section")
    if cfg.strategy_id not in STRATEGY_IDS:
        raise ConfigError(f"unknown strategy id {cfg.strategy_id!r}")
    grid = _grid(cfg)
    agg = monte_carlo(cfg.problem, (cfg.strategy_id, cfg.strategy_params),
                      cfg.horizon, cfg.runs, cfg.seed, checkpoints=grid)
    _write_csv(cfg.out_dir, "regret_curve.csv",
               ("T", "mean_regret", "stderr", "runs"), agg.regret_csv_rows())
    _write_csv(cfg.out_dir, "arm_counts.csv",
               ("arm", "mean_count", "stderr"), agg.counts_csv_rows())
    _emit_plot_script(cfg.out_dir)
    print(f"simulate: {cfg.runs} runs of {cfg.strategy_id} to horizon "
          f"{cfg.horizon} ({'compiled' if have_kernel() else 'pure'} backend); "
          f"wrote regret_curve.csv, arm_counts.csv, plot_results.py")
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig) -> int:
    return _run_simulation(cfg)


def cmd_verify(cfg: ExperimentConfig, quick: bool = False,
               fault: str | None = None) -> int:
    rows = full_battery(quick=quick, fault=fault)
    out_dir = cfg.out_dir
    _write_csv(out_dir, "verify_report.csv",
               ("instance_id", "check", "value", "threshold", "pass"),
               ((r.instance_id, r.check, r.value, r.threshold, r.passed)
                for r in rows))
    failures = [r for r in rows if not r.passed]
    for r in failures:
        print(f"verify: FAIL {r.check} [{r.instance_id}] value={r.value!r} "
              f"threshold={r.threshold!r}")
    print(f"verify: {len(rows) - len(failures)}/{len(rows)} checks passed; "
          f"wrote verify_report.csv")
    return EXIT_OK if not failures else EXIT_VERIFY


def cmd_figure1(cfg: ExperimentConfig) -> int:
    code = _run_simulation(cfg)
    if code != EXIT_OK:
        return code
    return cmd_bounds(cfg)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditlb",
        description="bandit lower bounds: bound curves, seeded simulation, "
                    "and numerical verification batteries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", metavar="PATH", required=config_required,
                       help="experiment config file")
        p.add_argument("--out", metavar="DIR", help="output directory override")
        p.add_argument("--seed", metavar="N", type=int, help="seed override")
        p.add_argument("--quick", action="store_true",
                       help="smaller verification batteries")

    common(sub.add_parser("bounds", help="evaluate bound curves to CSV"), True)
    common(sub.add_parser("simulate", help="Monte Carlo regret curves to CSV"), True)
    p_verify = sub.add_parser("verify", help="run the numerical batteries")
    common(p_verify, False)
    p_verify.add_argument("--inject-fault", choices=FAULT_MODES, default=None,
                          help="negative control: run against a broken kernel")
    common(sub.add_parser(
        "figure1",
        help="the flagship preset: posterior sampling on the six-arm "
             "coin problem, 500 runs, with bound curves",
    ), False)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "figure1":
            cfg = figure1_config(
                seed=args.seed if args.seed is not None else 1,
                out_dir=args.out if args.out is not None else "results",
            )
        elif args.config is not None:
            cfg = load_config(args.config)
            overrides = {}
            if args.out is not None:
                overrides["out_dir"] = args.out
            if args.seed is not None:
                overrides["seed"] = args.seed
            if overrides:
                from dataclasses import replace

                cfg = replace(cfg, **overrides)
            if cfg.command != args.command:
                raise ConfigError(
                    f"config declares command {cfg.command!r}, "
                    f"invoked as {args.command!r}"
                )
        else:
            # verify runs without a config; honor the flag overrides
            cfg = ExperimentConfig(
                command="verify",
                seed=args.seed if args.seed is not None else 1,
                out_dir=args.out if args.out is not None else "results",
            )

        if args.command == "bounds":
            return cmd_bounds(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, quick=args.quick,
                              fault=getattr(args, "inject_fault", None))
        return cmd_figure1(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IncompatibilityError as exc:
        print(f"incompatible: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
