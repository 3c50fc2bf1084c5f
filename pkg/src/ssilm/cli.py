"""Command-line experiment orchestration and CSV emission.

Subcommands: run (one p value), sweep (p grid with summary), baseline
(background-value manifest), compare (sweep per architecture). Outputs
are deterministic byte-for-byte for a fixed invocation and seed.

Config files are flat ``key = value`` lines with ``#`` comments; any
SimConfig field plus runs/p_min/p_max/p_step/jobs/preset is accepted.
Command-line flags override file keys. Floating CSV values use fixed
6-decimal formatting with a ``.`` separator.
"""

import argparse
import os
import sys
from dataclasses import replace

from . import __version__
from .ilm import PRESETS, SimConfig, preset, run_batch
from .metrics import (
    BASELINE_SEED,
    Baselines,
    baseline_compositionality,
    baseline_expressivity,
    baseline_similarity,
    compute_baselines,
    mc_expressivity,
    mc_similarity,
)
from .neuralnet import NumericalDivergenceError

import numpy as np

DEFAULT_ARCHS = ["10x10x10", "10x12x10", "9x11x12", "10x15x20"]

TRAJ_HEADER = "run,p,generation,x,c,s,a,b,x_raw,c_raw,s_raw,a_raw,b_raw"
SUMMARY_HEADER = "p,frac_a_gt_0.9,frac_b_gt_0.9,mean_a,mean_b"

_INT_KEYS = {"n1", "n2", "n3", "bottleneck_size", "auto_pool_size", "r", "epochs",
             "generations", "seed", "baseline_samples", "runs", "jobs"}
_FLOAT_KEYS = {"learning_rate", "p", "p_min", "p_max", "p_step"}
_STR_KEYS = {"auto_per", "loss", "preset"}
_CONFIG_FIELDS = {f for f in SimConfig.__dataclass_fields__}


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


def _fmt(value) -> str:
    """Fixed 6-decimal float formatting; empty string for missing values."""
    return "" if value is None else f"{value:.6f}"


def parse_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _INT_KEYS:
            values[key] = int(value)
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        elif key in _STR_KEYS:
            values[key] = value
        else:
            raise ConfigError(f"unknown config key: {key}")
    return values


def build_config(args, file_values: dict) -> tuple:
    """Merge preset, config-file keys, and CLI flags into (SimConfig, run params)."""
    preset_name = args.preset or file_values.get("preset") or "small"
    try:
        cfg = preset(preset_name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    overrides = {k: v for k, v in file_values.items() if k in _CONFIG_FIELDS}
    for key in ("p", "generations", "seed"):
        flag = getattr(args, key, None)
        if flag is not None:
            overrides[key] = flag
    if getattr(args, "auto_per", None) is not None:
        overrides["auto_per"] = args.auto_per
    if getattr(args, "loss", None) is not None:
        overrides["loss"] = args.loss
    try:
        cfg = replace(cfg, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    run_params = {
        "runs": file_values.get("runs", 50),
        "jobs": file_values.get("jobs", os.cpu_count() or 1),
        "p_min": file_values.get("p_min", 0.5),
        "p_max": file_values.get("p_max", 1.0),
        "p_step": file_values.get("p_step", 0.05),
    }
    if getattr(args, "runs", None) is not None:
        run_params["runs"] = args.runs
    if getattr(args, "jobs", None) is not None:
        run_params["jobs"] = args.jobs
    if run_params["runs"] < 1:
        raise ConfigError(f"runs must be >= 1, got {run_params['runs']}")
    return cfg, run_params


def p_grid(p_min: float, p_max: float, p_step: float) -> list:
    if p_step <= 0 or p_max < p_min:
        raise ConfigError(f"invalid p grid: [{p_min}, {p_max}] step {p_step}")
    count = int(round((p_max - p_min) / p_step)) + 1
    grid = [round(p_min + i * p_step, 10) for i in range(count)]
    if abs(grid[-1] - p_max) > 1e-9:
        raise ConfigError(f"p_step {p_step} does not divide [{p_min}, {p_max}]")
    return grid


def trajectory_rows(trajectories, with_final: bool = False):
    """CSV data rows ordered by (p, run, generation)."""
    rows = []
    for traj in sorted(trajectories, key=lambda t: (t.p_index, t.run_index)):
        final = traj.records[-1].metrics
        for rec in traj.records:
            m = rec.metrics
            row = [
                str(traj.run_index),
                _fmt(traj.p),
                str(rec.generation),
                _fmt(m.x), _fmt(m.c), _fmt(m.s), _fmt(m.a), _fmt(m.b),
                _fmt(m.x_raw), _fmt(m.c_raw), _fmt(m.s_raw), _fmt(m.a_raw), _fmt(m.b_raw),
            ]
            if with_final:
                row += [_fmt(final.a), _fmt(final.b)]
            rows.append(",".join(row))
    return rows


def write_trajectories(path, trajectories, with_final: bool = False) -> None:
    header = TRAJ_HEADER + (",final_a,final_b" if with_final else "")
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in trajectory_rows(trajectories, with_final=with_final):
            fh.write(row + "\n")


def summarize(trajectories, grid) -> list:
    """Per-p final-generation summary rows for the sweep CSV."""
    rows = []
    for ip, p in enumerate(grid):
        finals = [t.records[-1].metrics for t in trajectories if t.p_index == ip]
        a = np.array([m.a for m in finals])
        b = np.array([m.b for m in finals])
        rows.append(",".join([
            _fmt(p),
            _fmt(float(np.mean(a > 0.9))),
            _fmt(float(np.mean(b > 0.9))),
            _fmt(float(a.mean())),
            _fmt(float(b.mean())),
        ]))
    return rows


def write_summary(path, trajectories, grid) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for row in summarize(trajectories, grid):
            fh.write(row + "\n")


def write_manifest(path, command: str, cfg: SimConfig, master_seed: int,
                   baselines: Baselines, trajectories) -> None:
    with open(path, "w") as fh:
        fh.write(f"command = {command}\n")
        fh.write(f"version = {__version__}\n")
        fh.write(f"master_seed = {master_seed}\n")
        for name in SimConfig.__dataclass_fields__:
            fh.write(f"config.{name} = {getattr(cfg, name)}\n")
        fh.write(f"baseline.f0 = {baselines.f0:.10g}\n")
        fh.write(f"baseline.x0 = {baselines.x0:.10g}\n")
        fh.write(f"baseline.c0 = {baselines.c0:.10g}\n")
        fh.write(f"baseline.c0_se = {baselines.c0_se:.10g}\n")
        fh.write(f"baseline.c0_samples = {baselines.c0_samples}\n")
        fh.write(f"baseline.c0_seed = {baselines.c0_seed}\n")
        fh.write(f"baseline.provenance = {baselines.provenance}\n")
        for traj in sorted(trajectories, key=lambda t: (t.p_index, t.run_index)):
            fh.write(
                f"subseed p={traj.p:g} run={traj.run_index} = "
                f"spawn_key=({traj.p_index},{traj.run_index}) "
                f"parents=({traj.parent_a_id},{traj.parent_b_id})\n"
            )


def cmd_run(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    cfg, params = build_config(args, file_values)
    p = cfg.p
    os.makedirs(args.out, exist_ok=True)
    baselines = compute_baselines(cfg.n1, cfg.n3, cfg.baseline_samples)
    trajectories = run_batch(cfg, [p], params["runs"], cfg.seed,
                             jobs=params["jobs"], baselines=baselines)
    write_trajectories(os.path.join(args.out, "trajectories.csv"), trajectories)
    write_manifest(os.path.join(args.out, "manifest.txt"), "run", cfg,
                   cfg.seed, baselines, trajectories)
    return 0


def cmd_sweep(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    cfg, params = build_config(args, file_values)
    grid = p_grid(params["p_min"], params["p_max"], params["p_step"])
    os.makedirs(args.out, exist_ok=True)
    baselines = compute_baselines(cfg.n1, cfg.n3, cfg.baseline_samples)
    trajectories = run_batch(cfg, grid, params["runs"], cfg.seed,
                             jobs=params["jobs"], baselines=baselines)
    write_trajectories(os.path.join(args.out, "trajectories.csv"), trajectories,
                       with_final=True)
    write_summary(os.path.join(args.out, "summary.csv"), trajectories, grid)
    write_manifest(os.path.join(args.out, "manifest.txt"), "sweep", cfg,
                   cfg.seed, baselines, trajectories)
    return 0


def cmd_baseline(args) -> int:
    if args.samples < 100:
        raise ConfigError(f"samples must be >= 100, got {args.samples}")
    n1, n3 = args.n1, args.n3
    rng = np.random.default_rng(args.seed)
    f0 = baseline_similarity(n1, n3)
    x0 = baseline_expressivity(n1, n3)
    f0_mc, f0_se = mc_similarity(n1, n3, args.samples, rng)
    x0_mc, x0_se = mc_expressivity(n1, n3, args.samples, rng)
    c0_mc, c0_se = baseline_compositionality(n1, n3, args.samples,
                                             np.random.default_rng(args.seed))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "baselines.txt")
    with open(path, "w") as fh:
        fh.write(f"n1 = {n1}\n")
        fh.write(f"n3 = {n3}\n")
        fh.write(f"samples = {args.samples}\n")
        fh.write(f"seed = {args.seed}\n")
        for name, analytic, mc, se in (
            ("f0", f0, f0_mc, f0_se),
            ("x0", x0, x0_mc, x0_se),
            ("c0", None, c0_mc, c0_se),
        ):
            if analytic is not None:
                fh.write(f"{name}.analytic = {analytic:.10g}\n")
            fh.write(f"{name}.mc = {mc:.10g}\n")
            fh.write(f"{name}.se = {se:.10g}\n")
            if analytic is not None:
                ok = abs(mc - analytic) <= 3.0 * se
                fh.write(f"{name}.ok = {'true' if ok else 'false'}\n")
    print(f"wrote {path}")
    return 0


def parse_arch(token: str, default_r: int) -> tuple:
    """'n1xn2xn3' with optional ':r<count>' suffix -> (label, n1, n2, n3, r)."""
    body, _, rpart = token.partition(":")
    try:
        n1, n2, n3 = (int(v) for v in body.split("x"))
        r = int(rpart.lstrip("r")) if rpart else default_r
    except ValueError as exc:
        raise ConfigError(f"bad architecture {token!r}; expected n1xn2xn3[:rN]") from exc
    return token, n1, n2, n3, r


def cmd_compare(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    cfg, params = build_config(args, file_values)
    archs = args.arch or DEFAULT_ARCHS
    grid = p_grid(params["p_min"], params["p_max"], params["p_step"])
    os.makedirs(args.out, exist_ok=True)
    merged = ["arch,p,run,final_a,final_b"]
    for token in archs:
        label, n1, n2, n3, r = parse_arch(token, cfg.r)
        try:
            acfg = replace(cfg, n1=n1, n2=n2, n3=n3, r=r)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        adir = os.path.join(args.out, label.replace(":", "_"))
        os.makedirs(adir, exist_ok=True)
        baselines = compute_baselines(acfg.n1, acfg.n3, acfg.baseline_samples)
        trajectories = run_batch(acfg, grid, params["runs"], acfg.seed,
                                 jobs=params["jobs"], baselines=baselines)
        write_trajectories(os.path.join(adir, "trajectories.csv"), trajectories,
                           with_final=True)
        write_summary(os.path.join(adir, "summary.csv"), trajectories, grid)
        write_manifest(os.path.join(adir, "manifest.txt"), "compare", acfg,
                       acfg.seed, baselines, trajectories)
        for traj in trajectories:
            final = traj.records[-1].metrics
            merged.append(",".join([
                label, _fmt(traj.p), str(traj.run_index),
                _fmt(final.a), _fmt(final.b),
            ]))
    with open(os.path.join(args.out, "compare.csv"), "w", newline="") as fh:
        fh.write("\n".join(merged) + "\n")
    return 0


def _add_common(sub, with_p: bool = True):
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--preset", choices=sorted(PRESETS), help="base parameter set")
    if with_p:
        sub.add_argument("--p", type=float, help="mixing weight toward the first parent")
    sub.add_argument("--runs", type=int, help="simulations per p value")
    sub.add_argument("--generations", type=int)
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--jobs", type=int, help="parallel worker count (default: cores)")
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--auto-per", dest="auto_per", choices=["iteration", "epoch"])
    sub.add_argument("--loss", choices=["mse", "bce"])


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssilm",
        description="Iterated-learning simulator for binary-language contact",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="trajectories at a single p value")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="trajectories over the p grid")
    _add_common(p_sweep, with_p=False)
    p_sweep.set_defaults(func=cmd_sweep)

    p_base = sub.add_parser("baseline", help="emit background-value manifest")
    p_base.add_argument("--n1", type=int, default=10)
    p_base.add_argument("--n3", type=int, default=10)
    p_base.add_argument("--samples", type=int, default=1000)
    p_base.add_argument("--seed", type=int, default=BASELINE_SEED)
    p_base.add_argument("--out", default="out")
    p_base.set_defaults(func=cmd_baseline)

    p_cmp = sub.add_parser("compare", help="sweep per architecture")
    _add_common(p_cmp, with_p=False)
    p_cmp.add_argument("--arch", action="append",
                       help="architecture n1xn2xn3[:rN]; repeatable")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalDivergenceError as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
