"""Sweep drivers and curve analysis for the figure-style experiments.

Covers the forget-rate sweep, entropy-vs-depth time series, (p_m, p_f)
phase diagrams, turning-point extraction with its power-law fit, the
purification curve with its critical fit, and mutual-information sweeps.
All results are serialized as CSV plus a JSON sidecar that embeds the
configuration, the random seed, the code version, and the fixed
conventions in force.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .engine import CONVENTIONS, CircuitConfig, EnsembleResult, replace, run_ensemble
from .meta import code_version

SWEEP_PARAMETERS = ("p_f", "p_m", "n", "depth")

# default analysis settings; always echoed in output metadata
DEFAULT_TURNING_EPSILON = 1e-2
DEFAULT_CRITICAL_WINDOW = (0.05, 0.15)


class NoTurningPointError(RuntimeError):
    """The entropy curve never reaches the turning-point threshold."""


class FitError(RuntimeError):
    """Nonlinear fit failed or the data are degenerate."""


@dataclass(frozen=True)
class SweepSpec:
    base: CircuitConfig
    axis1: tuple  # (parameter name, sorted value list)
    axis2: Optional[tuple] = None
    observable: str = "entropy_density"

    def validate(self) -> None:
        for axis in (self.axis1, self.axis2):
            if axis is None:
                continue
            name, values = axis
            if name not in SWEEP_PARAMETERS:
                raise ValueError(f"unknown sweep parameter {name!r}")
            if len(values) == 0:
                raise ValueError("sweep value list is empty")
            if list(values) != sorted(values):
                raise ValueError("sweep values must be sorted ascending")


@dataclass
class FitResult:
    model: str                     # "power_law" or "critical"
    params: dict                   # name -> estimate
    stderr: dict                   # name -> standard error
    residual_norm: float


@dataclass
class Curve:
    """One observable against one swept parameter."""
    parameter: str
    values: list
    mean: list
    stderr: list
    config: CircuitConfig
    meta: dict = field(default_factory=dict)

    def rows(self):
        for v, m, s in zip(self.values, self.mean, self.stderr):
            yield [v, m, s, self.config.realizations]


@dataclass
class Grid:
    axis1: str
    values1: list
    axis2: str
    values2: list
    mean: np.ndarray     # shape (len(values2), len(values1))
    stderr: np.ndarray
    config: CircuitConfig
    meta: dict = field(default_factory=dict)

    def rows(self):
        for i2, v2 in enumerate(self.values2):
            for i1, v1 in enumerate(self.values1):
                yield [v1, v2, self.mean[i2, i1], self.stderr[i2, i1],
                       self.config.realizations]


def _configure(base: CircuitConfig, **params) -> CircuitConfig:
    return replace(base, **params)


def _final_density(res: EnsembleResult) -> tuple[float, float]:
    return res.final_entropy_density()


def sweep_forget_rate(spec: SweepSpec, workers: int = 1) -> Curve:
    """Final-layer S/N against p_f at p_m = 0 (fixed-depth forget sweep)."""
    spec.validate()
    name, values = spec.axis1
    if name != "p_f":
        raise ValueError("forget-rate sweep expects axis1 = p_f")
    if spec.base.p_m != 0:
        raise ValueError("forget-rate sweep expects p_m = 0")
    mean, err = [], []
    for pf in values:
        m, s = _final_density(run_ensemble(_configure(spec.base, p_f=pf), workers))
        mean.append(m)
        err.append(s)
    return Curve("p_f", list(values), mean, err, spec.base)


def time_series(spec: SweepSpec, workers: int = 1) -> list:
    """Per-layer ensemble means for each value of axis1 (n or p_f).

    Returns a list of (value, mean_series, stderr_series); the series are
    S/N per layer, or mutual information when the spec asks for it.
    """
    spec.validate()
    name, values = spec.axis1
    if name not in ("n", "p_f"):
        raise ValueError("time series expects axis1 in {n, p_f}")
    out = []
    for v in values:
        cfg = _configure(spec.base, **{name: v})
        if spec.observable == "mutual_information":
            if cfg.mi_partition is None:
                cfg = replace(cfg, mi_partition=half_partition(cfg.n))
            res = run_ensemble(cfg, workers)
            out.append((v, res.mi_mean, res.mi_stderr))
        else:
            res = run_ensemble(cfg, workers)
            out.append((v, res.entropy_mean / cfg.n, res.entropy_stderr / cfg.n))
    return out


def sweep_phase_diagram(spec: SweepSpec, workers: int = 1) -> Grid:
    """Mean final S/N on the full (p_f, p_m) grid."""
    spec.validate()
    if spec.axis1[0] != "p_f" or spec.axis2 is None or spec.axis2[0] != "p_m":
        raise ValueError("phase diagram expects axis1 = p_f and axis2 = p_m")
    pf_values = list(spec.axis1[1])
    pm_values = list(spec.axis2[1])
    mean = np.zeros((len(pm_values), len(pf_values)))
    err = np.zeros_like(mean)
    for i2, pm in enumerate(pm_values):
        for i1, pf in enumerate(pf_values):
            res = run_ensemble(_configure(spec.base, p_f=pf, p_m=pm), workers)
            mean[i2, i1], err[i2, i1] = _final_density(res)
    return Grid("p_f", pf_values, "p_m", pm_values, mean, err, spec.base)


def find_turning_point(curve: Sequence[tuple], s_max: float,
                       epsilon: float = DEFAULT_TURNING_EPSILON,
                       evaluate: Optional[Callable[[float], float]] = None,
                       resolution: Optional[float] = None) -> float:
    """Smallest p_f whose mean S/N first reaches (1 - epsilon) * s_max.

    `curve` is a sorted list of (p_f, mean S/N) samples.  When `evaluate`
    and `resolution` are given, the bracketing grid interval is refined
    by bisection, re-running ensembles at midpoints until the interval is
    narrower than `resolution`.
    """
    if s_max <= 0:
        raise ValueError("s_max must be positive")
    threshold = (1.0 - epsilon) * s_max
    pfs = [p for p, _ in curve]
    if pfs != sorted(pfs):
        raise ValueError("curve must be sorted in p_f")
    hit = None
    for idx, (pf, m) in enumerate(curve):
        if m >= threshold:
            hit = idx
            break
    if hit is None:
        raise NoTurningPointError(
            f"curve never reaches {threshold:.4f} (max {max(m for _, m in curve):.4f})")
    if hit == 0:
        return float(curve[0][0])
    lo, hi = float(curve[hit - 1][0]), float(curve[hit][0])
    if evaluate is not None and resolution is not None:
        while hi - lo > resolution:
            mid = (lo + hi) / 2
            if evaluate(mid) >= threshold:
                hi = mid
            else:
                lo = mid
    return hi


def make_density_evaluator(base: CircuitConfig, workers: int = 1):
    """Callable p_f -> mean final S/N, for turning-point bisection."""
    def evaluate(pf: float) -> float:
        return _final_density(run_ensemble(_configure(base, p_f=pf), workers))[0]
    return evaluate


def fit_power_law(points: Sequence[tuple]) -> FitResult:
    """Least squares for p* = alpha * d^v on log-log axes."""
    if len(points) < 3:
        raise ValueError("power-law fit needs at least 3 points")
    d = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.any(d <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs strictly positive data")
    lx, ly = np.log(d), np.log(y)
    design = np.column_stack([np.ones_like(lx), lx])
    coef, res_arr, *_ = np.linalg.lstsq(design, ly, rcond=None)
    fitted = design @ coef
    resid = ly - fitted
    dof = max(len(points) - 2, 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(design.T @ design)
    alpha = float(np.exp(coef[0]))
    se_b0, se_v = np.sqrt(np.diag(cov))
    return FitResult(
        model="power_law",
        params={"alpha": alpha, "v": float(coef[1])},
        stderr={"alpha": alpha * float(se_b0), "v": float(se_v)},
        residual_norm=float(np.linalg.norm(resid)),
    )


def purification_curve(spec: SweepSpec, workers: int = 1) -> Curve:
    """Residual S/N at the final layer vs p_m, maximally mixed start."""
    spec.validate()
    if spec.axis1[0] != "p_m":
        raise ValueError("purification curve expects axis1 = p_m")
    if spec.base.initial != "maximally_mixed":
        raise ValueError("purification curve expects a maximally mixed start")
    values = list(spec.axis1[1])
    mean, err = [], []
    for pm in values:
        m, s = _final_density(run_ensemble(_configure(spec.base, p_m=pm), workers))
        mean.append(m)
        err.append(s)
    return Curve("p_m", values, mean, err, spec.base)


def fit_critical(points: Sequence[tuple],
                 window: tuple = DEFAULT_CRITICAL_WINDOW,
                 noise_floor: float = 1e-3,
                 max_iterations: int = 20000) -> FitResult:
    """Nonlinear least squares for S/N = A * (p_c - p_m)^v below p_c.

    Deterministic initialization: p_c starts at the largest sampled p_m
    whose S/N sits above the noise floor, v at 1, and A from the first
    window point.  Only points inside `window` enter the fit.
    """
    pts = sorted((float(p), float(y)) for p, y in points)
    lo, hi = window
    sel = [(p, y) for p, y in pts if lo <= p <= hi]
    if len(sel) < 4:
        raise ValueError("critical fit needs at least 4 points inside the window")
    p = np.array([q for q, _ in sel])
    y = np.array([q for _, q in sel])
    if np.all(y <= noise_floor) or np.ptp(y) < noise_floor:
        raise FitError("data are flat at or below the noise floor")
    above = [q for q, yy in pts if yy > noise_floor]
    pc0 = max(above) if above else hi
    pc0 = max(pc0, p.max()) + 0.01
    a0 = y[0] / max(pc0 - p[0], 1e-6)

    def model(pm, a, pc, v):
        return a * np.power(np.clip(pc - pm, 1e-12, None), v)

    try:
        popt, pcov = curve_fit(
            model, p, y, p0=[a0, pc0, 1.0],
            bounds=([0.0, p.max() + 1e-6, 0.05], [np.inf, 1.0, 10.0]),
            maxfev=max_iterations, xtol=1e-14, ftol=1e-14, gtol=1e-14,
        )
    except RuntimeError as exc:
        raise FitError(f"critical fit did not converge: {exc}") from exc
    resid = y - model(p, *popt)
    se = np.sqrt(np.clip(np.diag(pcov), 0, None))
    return FitResult(
        model="critical",
        params={"A": float(popt[0]), "p_c": float(popt[1]), "v": float(popt[2])},
        stderr={"A": float(se[0]), "p_c": float(se[1]), "v": float(se[2])},
        residual_norm=float(np.linalg.norm(resid)),
    )


def half_partition(n: int) -> tuple:
    """Default bipartition: contiguous halves."""
    return (tuple(range(n // 2)), tuple(range(n // 2, n)))


def mutual_information_sweep(spec: SweepSpec, a=None, b=None,
                             workers: int = 1):
    """Ensemble-mean final-layer I(A,B) over axis1 (and axis2 if present)."""
    spec.validate()
    base = spec.base
    if a is None or b is None:
        a, b = half_partition(base.n)
    if set(a) & set(b):
        raise ValueError("subsystems must be disjoint")
    base = replace(base, mi_partition=(tuple(a), tuple(b)))

    def final_mi(cfg) -> tuple[float, float]:
        res = run_ensemble(cfg, workers)
        return float(res.mi_mean[-1]), float(res.mi_stderr[-1])

    n1, v1 = spec.axis1
    if spec.axis2 is None:
        mean, err = [], []
        for v in v1:
            m, s = final_mi(_configure(base, **{n1: v}))
            mean.append(m)
            err.append(s)
        return Curve(n1, list(v1), mean, err, base,
                     meta={"partition_a": list(a), "partition_b": list(b)})
    n2, v2 = spec.axis2
    mean = np.zeros((len(v2), len(v1)))
    err = np.zeros_like(mean)
    for i2, w2 in enumerate(v2):
        for i1, w1 in enumerate(v1):
            mean[i2, i1], err[i2, i1] = final_mi(
                _configure(base, **{n1: w1, n2: w2}))
    return Grid(n1, list(v1), n2, list(v2), mean, err, base,
                meta={"partition_a": list(a), "partition_b": list(b)})


# -- serialization ---------------------------------------------------------

CSV_SCHEMA = 1


def write_csv(path, header: Sequence[str], rows) -> None:
    """Fixed-layout CSV: '# schema=1' comment line, header, data rows."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.12g}" if isinstance(v, float) else v
                             for v in row])


def result_metadata(config: CircuitConfig, extra: Optional[dict] = None) -> dict:
    meta = {
        "config": dataclasses.asdict(config),
        "master_seed": config.master_seed,
        "code_version": code_version(),
        "conventions": dict(CONVENTIONS),
        "analysis_defaults": {
            "turning_point_epsilon": DEFAULT_TURNING_EPSILON,
            "critical_fit_window": list(DEFAULT_CRITICAL_WINDOW),
        },
    }
    if extra:
        meta.update(extra)
    return meta


def write_sidecar(path, config: CircuitConfig, extra: Optional[dict] = None) -> None:
    with open(path, "w") as fh:
        json.dump(result_metadata(config, extra), fh, indent=2, default=str)
        fh.write("\n")
