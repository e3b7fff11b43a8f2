"""Command line entry point.

Exit codes: 0 on success, 1 for invalid input (bad arguments, config or CSV
files, missing files) and 2 for runtime or numerical failures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .errors import InsufficientDataError, NumericalError, SoilKrigeError, ValidationError
from .exploration import KINDS, Plan, StrategyConfig
from .grid import locations_array
from .simulation import compare_strategies, fit_model, kv_mse_correlation, run_exploration
from .variogram import experimental_semivariogram, fit_linear

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


def _config(args):
    cfg = io.load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seeds=(args.seed,))
    if getattr(args, "seeds", None):
        cfg = replace(cfg, seeds=tuple(args.seeds))
    if getattr(args, "budgets", None):
        cfg = replace(cfg, budgets=tuple(args.budgets))
    if getattr(args, "strategies", None):
        cfg = replace(cfg, strategies=tuple(StrategyConfig(k) for k in args.strategies))
    if getattr(args, "noise_sd", None) is not None:
        if args.noise_sd < 0:
            raise ValidationError("--noise-sd must be >= 0")
        cfg = replace(cfg, noise_sd_kpa=args.noise_sd)
    return cfg


def cmd_fit_variogram(args):
    spec = None
    step = args.depth_step
    if args.config:
        cfg = io.load_config(args.config)
        spec = cfg.layers
        step = step or cfg.profile_step_cm
    samples = io.load_samples_csv(args.samples, spec, step)
    m = len(samples[0].layer_values)
    if not 0 <= args.layer < m:
        raise ValidationError(f"--layer must be in [0, {m - 1}], got {args.layer}")
    ev = experimental_semivariogram(
        locations_array([s.location for s in samples]),
        [s.layer_values[args.layer] for s in samples],
        args.bin_width,
        args.max_lag,
    )
    params = fit_linear(ev)
    io.write_variogram_csv(ev, args.out)
    flag = " degenerate" if params.degenerate else ""
    print(f"p0={io.fmt(params.nugget)} p1={io.fmt(params.range)} p2={io.fmt(params.sill)}{flag}")


def cmd_krige(args):
    cfg = io.load_config(args.grid)
    grid = cfg.grid()
    samples = io.load_samples_csv(args.samples, cfg.layers, cfg.profile_step_cm)
    v = cfg.variogram
    model = fit_model(
        samples, grid, cfg.layers, v.prior, v.bin_width_m, v.max_lag_m, v.freeze, v.nugget_floor
    )
    io.export_model(model, args.out)
    print(f"mean_kv={io.fmt(model.mean_kv)}")


def cmd_explore(args):
    cfg = _config(args)
    grid = cfg.grid()
    strategy = cfg.strategies[0]
    budget = args.budget or max(cfg.budgets)
    seed = cfg.seeds[0]
    strategy = replace(strategy, budget=budget, seed=seed)
    field = cfg.surrogate_for(seed, grid)
    rec = run_exploration(
        strategy, field, cfg.layers, keep_kv_grids=args.kv_steps, **cfg.run_kwargs()
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_run_csv(rec, out / "run.csv")
    io.export_model(rec.final_model, out)
    io.export_plan_csv(Plan(tuple(rec.route), rec.origin), grid, out / "route.csv")
    for t, kv in enumerate(rec.kv_grids, start=1):
        io.export_grid_csv(kv, out / f"mean_kv_step{t}.csv")
    msg = f"{strategy.kind}: {len(rec.steps)} samples, path_m={io.fmt(rec.path_m)}, rmse={io.fmt(rec.final_rmse)}"
    try:
        msg += f", r={io.fmt(kv_mse_correlation(rec))}"
    except NumericalError:
        pass
    print(msg)


def cmd_compare(args):
    cfg = _config(args)
    grid = cfg.grid()
    if cfg.surrogate.mode == "synthetic" and cfg.surrogate.seed is None:
        field = lambda s: cfg.surrogate_for(s, grid)  # noqa: E731
    else:
        field = cfg.surrogate_for(None, grid)
    rows = compare_strategies(
        cfg.strategies, field, cfg.seeds, cfg.budgets, cfg.layers, **cfg.run_kwargs()
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_comparison_csv(rows, out / "comparison.csv")
    for metric, name in (("mean_rmse", "rmse"), ("mean_path_m", "path_m"), ("mean_kv", "kv")):
        io.write_pivot_csv(rows, metric, out / f"comparison_{name}.csv")
    print(f"{len(rows)} rows written to {out / 'comparison.csv'}")


def cmd_gen_surrogate(args):
    cfg = _config(args)
    seed = args.seed if args.seed is not None else cfg.surrogate.seed
    if cfg.surrogate.mode != "synthetic":
        raise ValidationError("gen-surrogate needs surrogate.mode: synthetic")
    field = cfg.surrogate_for(seed if seed is not None else 0)
    io.save_surrogate(field, args.out)
    print(f"{field.layer_count} layers written to {args.out}")


def cmd_report_nrmse(args):
    a = io.load_layer_stack(args.a, args.prefix_a)
    b = io.load_layer_stack(args.b, args.prefix_b)
    rows = io.normalized_rmse_report(a, b)
    if args.out:
        io.write_nrmse_csv(rows, args.out)
    else:
        io.write_nrmse_csv(rows, sys.stdout)


def build_parser():
    p = argparse.ArgumentParser(prog="soilkrige", description="Kriging-driven soil sampling simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit-variogram", help="fit the bounded linear variogram to one layer")
    s.add_argument("--samples", required=True)
    s.add_argument("--layer", type=int, default=0)
    s.add_argument("--bin-width", type=float, required=True)
    s.add_argument("--max-lag", type=float, required=True)
    s.add_argument("--config", help="run config supplying the layer spec and depth step")
    s.add_argument("--depth-step", type=float, help="depth step (cm) for raw profile files")
    s.add_argument("--out", default="variogram.csv")
    s.set_defaults(func=cmd_fit_variogram)

    s = sub.add_parser("krige", help="krige samples over the configured grid")
    s.add_argument("--samples", required=True)
    s.add_argument("--grid", required=True, help="run config describing the field")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_krige)

    s = sub.add_parser("explore", help="simulate one exploration run")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--strategy", dest="strategies", action="append", choices=KINDS)
    s.add_argument("--budget", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--noise-sd", type=float)
    s.add_argument("--kv-steps", action="store_true", help="write mean_kv_step{t}.csv per step")
    s.set_defaults(func=cmd_explore)

    s = sub.add_parser("compare", help="compare strategies over seeds and budgets")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=".")
    s.add_argument("--strategy", dest="strategies", action="append", choices=KINDS)
    s.add_argument("--budgets", type=int, nargs="+")
    s.add_argument("--seeds", type=int, nargs="+")
    s.add_argument("--noise-sd", type=float)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("gen-surrogate", help="write a synthetic ground truth")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_gen_surrogate)

    s = sub.add_parser("report-nrmse", help="per-layer RMSE normalized by the reference mean")
    s.add_argument("--a", required=True, help="directory of reference layer grids")
    s.add_argument("--b", required=True, help="directory of compared layer grids")
    s.add_argument("--prefix-a", default="estimate")
    s.add_argument("--prefix-b", default="estimate")
    s.add_argument("--out")
    s.set_defaults(func=cmd_report_nrmse)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if getattr(args, "budget", None) is not None and args.budget < 3:
            raise ValidationError(f"--budget must be >= 3, got {args.budget}")
        args.func(args)
    except (ValidationError, InsufficientDataError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SoilKrigeError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
