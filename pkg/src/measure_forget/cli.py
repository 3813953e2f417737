"""Command-line front end: experiment dispatch and figure-data emission.

Each subcommand reads an optional `key = value` config file plus flag
overrides, runs the experiment, and writes a CSV data file together with
a JSON run manifest.  Progress goes to stderr; stdout stays free for
`--out -` streaming.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import experiments
from .engine import CONVENTIONS, CircuitConfig, TrajectoryError
from .experiments import SweepSpec
from .meta import code_version


class ConfigError(Exception):
    pass


def _parse_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


_CONFIG_KEYS = {
    "n": int, "depth": int, "pm": float, "pf": float,
    "realizations": int, "seed": int, "workers": int, "out": str,
}


def _grid(text: str) -> list:
    """Parse 'start:stop:count' or a comma list into sorted floats."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return sorted(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad grid specification {text!r}") from exc


def _int_list(text: str) -> list:
    try:
        return sorted(int(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfsim",
        description="Measure-and-forget random Clifford circuit experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--n", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--pm", type=float)
        p.add_argument("--pf", type=float)
        p.add_argument("--realizations", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output stem ('-' streams CSV to stdout)")
        p.add_argument("--workers", type=int,
                       help="parallel trajectory workers (default $MF_WORKERS or 1)")

    p = sub.add_parser("forget-sweep", help="final S/N vs forgetting rate")
    common(p)
    p.add_argument("--pf-grid", default="0:0.8:17")

    p = sub.add_parser("time-series", help="S/N vs layer for several sizes")
    common(p)
    p.add_argument("--sizes", default="32,64,128")

    p = sub.add_parser("turning-points", help="turning points vs depth + power-law fit")
    common(p)
    p.add_argument("--depths", default="4,8,16,32,64")
    p.add_argument("--epsilon", type=float, default=experiments.DEFAULT_TURNING_EPSILON)
    p.add_argument("--resolution", type=float, default=0.01,
                   help="bisection stopping width for each turning point")

    p = sub.add_parser("phase-diagram", help="(p_m, p_f) entropy diagram")
    common(p)
    p.add_argument("--pf-grid", default="0:0.5:16")
    p.add_argument("--pm-grid", default="0:0.5:16")

    p = sub.add_parser("mutual-info", help="final I(A,B) vs forgetting rate")
    common(p)
    p.add_argument("--pf-grid", default="0,0.001,0.0025,0.005,0.01")

    p = sub.add_parser("purification", help="purification curve + critical fit")
    common(p)
    p.add_argument("--pm-grid", default="0:0.25:11")
    p.add_argument("--window", default="0.05,0.15",
                   help="p_m window for the critical fit, 'lo,hi'")

    p = sub.add_parser("selftest", help="stabilizer vs dense oracle equivalence")
    p.add_argument("--trajectories", type=int, default=120)

    return parser


def _resolve_config(args) -> tuple[CircuitConfig, dict]:
    """Merge defaults, config file, and flags into a CircuitConfig."""
    merged = {"n": 64, "depth": 8, "pm": 0.0, "pf": 0.0,
              "realizations": 200, "seed": 0,
              "workers": int(os.environ.get("MF_WORKERS", "1")),
              "out": "mfsim-output"}
    if getattr(args, "config", None):
        for key, val in _parse_config_file(args.config).items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                merged[key] = _CONFIG_KEYS[key](val)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {val!r}") from exc
    for key in merged:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    try:
        config = CircuitConfig(
            n=merged["n"], depth=merged["depth"], p_m=merged["pm"],
            p_f=merged["pf"], realizations=merged["realizations"],
            master_seed=merged["seed"])
        config.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config, merged


def _emit(out_stem: str, header, rows) -> list:
    outputs = []
    if out_stem == "-":
        sys.stdout.write(f"# schema={experiments.CSV_SCHEMA}\n")
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(",".join(
                f"{v:.12g}" if isinstance(v, float) else str(v) for v in row) + "\n")
        return outputs
    csv_path = out_stem + ".csv"
    experiments.write_csv(csv_path, header, rows)
    outputs.append(csv_path)
    return outputs


def _write_manifest(out_stem, command, config, merged, outputs, started, extra=None):
    if out_stem == "-":
        return
    manifest = {
        "command": command,
        "config": asdict(config),
        "master_seed": config.master_seed,
        "workers": merged["workers"],
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "code_version": code_version(),
        "conventions": dict(CONVENTIONS),
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    path = out_stem + ".manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")
    for out in outputs:
        assert os.path.exists(out)


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _cmd_forget_sweep(args) -> int:
    config, merged = _resolve_config(args)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    spec = SweepSpec(base=config, axis1=("p_f", _grid(args.pf_grid)))
    _progress(f"forget-sweep: n={config.n} depth={config.depth} "
              f"{len(spec.axis1[1])} grid points x {config.realizations} realizations")
    curve = experiments.sweep_forget_rate(spec, workers=merged["workers"])
    outputs = _emit(merged["out"], ["p_f", "mean_entropy_density", "stderr", "realizations"],
                    curve.rows())
    _write_manifest(merged["out"], "forget-sweep", config, merged, outputs, started)
    return 0


def _cmd_time_series(args) -> int:
    config, merged = _resolve_config(args)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    sizes = _int_list(args.sizes)
    spec = SweepSpec(base=config, axis1=("n", sizes))
    _progress(f"time-series: sizes {sizes}, p_f={config.p_f}, depth={config.depth}")
    series = experiments.time_series(spec, workers=merged["workers"])
    rows = []
    for size, mean, err in series:
        for layer, (m, s) in enumerate(zip(mean, err)):
            rows.append([size, layer, float(m), float(s), config.realizations])
    outputs = _emit(merged["out"],
                    ["n", "layer", "mean_entropy_density", "stderr", "realizations"],
                    rows)
    _write_manifest(merged["out"], "time-series", config, merged, outputs, started)
    return 0


def _cmd_turning_points(args) -> int:
    config, merged = _resolve_config(args)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    depths = _int_list(args.depths)
    workers = merged["workers"]
    points = []
    for depth in depths:
        base = experiments.replace(config, depth=depth)
        grid = sorted(set(list(np.geomspace(0.005, 1.0, 13)) + [1.0]))
        curve_pts = []
        evaluator = experiments.make_density_evaluator(base, workers)
        for pf in grid:
            curve_pts.append((pf, evaluator(pf)))
        s_max = curve_pts[-1][1]
        pf_star = experiments.find_turning_point(
            curve_pts, s_max, epsilon=args.epsilon,
            evaluate=evaluator, resolution=args.resolution)
        points.append((depth, pf_star))
        _progress(f"turning-points: depth {depth} -> p_f* = {pf_star:.4f}")
    fit = experiments.fit_power_law(points)
    rows = [[d, p, config.realizations] for d, p in points]
    outputs = _emit(merged["out"], ["depth", "pf_star", "realizations"], rows)
    _write_manifest(merged["out"], "turning-points", config, merged, outputs, started,
                    extra={"fit": {"model": fit.model, "params": fit.params,
                                   "stderr": fit.stderr}})
    _progress(f"power-law fit: alpha={fit.params['alpha']:.3f} v={fit.params['v']:.3f}")
    return 0


def _cmd_phase_diagram(args) -> int:
    config, merged = _resolve_config(args)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    spec = SweepSpec(base=config, axis1=("p_f", _grid(args.pf_grid)),
                     axis2=("p_m", _grid(args.pm_grid)))
    _progress(f"phase-diagram: {len(spec.axis1[1])}x{len(spec.axis2[1])} grid, "
              f"n={config.n} depth={config.depth}")
    grid = experiments.sweep_phase_diagram(spec, workers=merged["workers"])
    outputs = _emit(merged["out"],
                    ["p_f", "p_m", "mean_entropy_density", "stderr", "realizations"],
                    grid.rows())
    _write_manifest(merged["out"], "phase-diagram", config, merged, outputs, started)
    return 0


def _cmd_mutual_info(args) -> int:
    config, merged = _resolve_config(args)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    spec = SweepSpec(base=config, axis1=("p_f", _grid(args.pf_grid)))
    _progress(f"mutual-info: n={config.n} depth={config.depth} half-system bipartition")
    curve = experiments.mutual_information_sweep(spec, workers=merged["workers"])
    outputs = _emit(merged["out"],
                    ["p_f", "mean_mutual_information", "stderr", "realizations"],
                    curve.rows())
    _write_manifest(merged["out"], "mutual-info", config, merged, outputs, started,
                    extra={"partition": curve.meta})
    return 0


def _cmd_purification(args) -> int:
    config, merged = _resolve_config(args)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    config = experiments.replace(config, initial="maximally_mixed")
    spec = SweepSpec(base=config, axis1=("p_m", _grid(args.pm_grid)))
    _progress(f"purification: n={config.n} depth={config.depth} p_f={config.p_f}")
    curve = experiments.purification_curve(spec, workers=merged["workers"])
    window = tuple(float(v) for v in args.window.split(","))
    fit_info = None
    try:
        fit = experiments.fit_critical(list(zip(curve.values, curve.mean)), window)
        fit_info = {"model": fit.model, "params": fit.params, "stderr": fit.stderr}
        _progress(f"critical fit: p_c={fit.params['p_c']:.4f} "
                  f"A={fit.params['A']:.3f} v={fit.params['v']:.3f}")
    except (experiments.FitError, ValueError) as exc:
        _progress(f"critical fit skipped: {exc}")
    outputs = _emit(merged["out"],
                    ["p_m", "residual_entropy_density", "stderr", "realizations"],
                    curve.rows())
    _write_manifest(merged["out"], "purification", config, merged, outputs, started,
                    extra={"fit": fit_info, "fit_window": list(window)})
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest
    report = run_selftest(trajectories=args.trajectories, verbose_print=_progress)
    print(f"selftest: {report.cases} synchronized trajectories, "
          f"{report.comparisons} entropy comparisons, "
          f"max error {report.max_error_bits:.3e} bits -> "
          f"{'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


_COMMANDS = {
    "forget-sweep": _cmd_forget_sweep,
    "time-series": _cmd_time_series,
    "turning-points": _cmd_turning_points,
    "phase-diagram": _cmd_phase_diagram,
    "mutual-info": _cmd_mutual_info,
    "purification": _cmd_purification,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TrajectoryError as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
