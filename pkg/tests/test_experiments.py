import json

import numpy as np
import pytest

from measure_forget import experiments
from measure_forget.engine import CircuitConfig
from measure_forget.experiments import (
    Curve,
    FitError,
    NoTurningPointError,
    SweepSpec,
    find_turning_point,
    fit_critical,
    fit_power_law,
    half_partition,
    mutual_information_sweep,
    result_metadata,
    sweep_forget_rate,
    sweep_phase_diagram,
    time_series,
    write_csv,
)

BASE = CircuitConfig(n=8, depth=4, realizations=5)


def test_sweep_spec_validation():
    SweepSpec(BASE, ("p_f", [0.0, 0.5])).validate()
    with pytest.raises(ValueError):
        SweepSpec(BASE, ("temperature", [1.0])).validate()
    with pytest.raises(ValueError):
        SweepSpec(BASE, ("p_f", [])).validate()
    with pytest.raises(ValueError):
        SweepSpec(BASE, ("p_f", [0.5, 0.1])).validate()


def test_sweep_forget_rate_shape_and_monotone_setup():
    curve = sweep_forget_rate(SweepSpec(BASE, ("p_f", [0.0, 0.5, 1.0])))
    assert curve.parameter == "p_f"
    assert len(curve.mean) == 3
    assert curve.mean[0] == 0.0  # no forgetting, pure state stays pure
    assert curve.mean[2] >= curve.mean[0]
    with pytest.raises(ValueError):
        sweep_forget_rate(SweepSpec(BASE, ("p_m", [0.1])))


def test_time_series_axes():
    out = time_series(SweepSpec(BASE, ("n", [4, 8])))
    assert [v for v, _, _ in out] == [4, 8]
    assert all(len(m) == BASE.depth + 1 for _, m, _ in out)
    with pytest.raises(ValueError):
        time_series(SweepSpec(BASE, ("depth", [2, 4])))


def test_phase_diagram_shape():
    grid = sweep_phase_diagram(
        SweepSpec(BASE, ("p_f", [0.0, 0.5]), ("p_m", [0.0, 0.3, 0.6])))
    assert grid.mean.shape == (3, 2)
    rows = list(grid.rows())
    assert len(rows) == 6
    with pytest.raises(ValueError):
        sweep_phase_diagram(SweepSpec(BASE, ("p_f", [0.1])))


def test_find_turning_point_on_grid():
    curve = [(0.1, 0.2), (0.2, 0.5), (0.3, 0.95), (0.4, 0.99), (0.5, 1.0)]
    assert find_turning_point(curve, 1.0, epsilon=0.05) == 0.3
    assert find_turning_point(curve, 1.0, epsilon=0.01) == 0.4
    with pytest.raises(NoTurningPointError):
        find_turning_point(curve[:2], 1.0, epsilon=0.01)
    with pytest.raises(ValueError):
        find_turning_point(list(reversed(curve)), 1.0)


def test_find_turning_point_bisection_refines():
    f = lambda p: min(1.0, p / 0.37)  # crosses 0.99 at 0.3663
    grid = [(p, f(p)) for p in np.linspace(0.05, 1.0, 8)]
    got = find_turning_point(grid, 1.0, epsilon=0.01, evaluate=f,
                             resolution=1e-4)
    assert got == pytest.approx(0.37 * 0.99, abs=2e-4)


def test_fit_power_law_exact_recovery():
    pts = [(d, 4.0 * d ** -1.25) for d in (4, 8, 16, 32, 64)]
    fit = fit_power_law(pts)
    assert fit.params["alpha"] == pytest.approx(4.0, rel=1e-9)
    assert fit.params["v"] == pytest.approx(-1.25, rel=1e-9)
    with pytest.raises(ValueError):
        fit_power_law(pts[:2])
    with pytest.raises(ValueError):
        fit_power_law([(1, 1.0), (2, -1.0), (3, 1.0)])


def test_fit_critical_exact_recovery():
    pm = np.linspace(0.05, 0.15, 12)
    pts = [(p, 7.3 * (0.159 - p) ** 1.28) for p in pm]
    fit = fit_critical(pts)
    assert fit.params["p_c"] == pytest.approx(0.159, rel=1e-6)
    assert fit.params["v"] == pytest.approx(1.28, rel=1e-6)
    assert fit.params["A"] == pytest.approx(7.3, rel=1e-6)


def test_fit_critical_rejects_flat_data():
    pts = [(p, 0.0) for p in np.linspace(0.05, 0.15, 8)]
    with pytest.raises(FitError):
        fit_critical(pts)
    with pytest.raises(ValueError):
        fit_critical(pts[:3])


def test_half_partition():
    a, b = half_partition(8)
    assert a == (0, 1, 2, 3) and b == (4, 5, 6, 7)


def test_mutual_information_sweep_defaults_to_halves():
    curve = mutual_information_sweep(SweepSpec(BASE, ("p_f", [0.0, 1.0])))
    assert isinstance(curve, Curve)
    assert curve.meta["partition_a"] == [0, 1, 2, 3]
    assert len(curve.mean) == 2
    with pytest.raises(ValueError):
        mutual_information_sweep(SweepSpec(BASE, ("p_f", [0.0])), a=[0], b=[0])


def test_write_csv_layout(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, ["a", "b"], [[0.5, 1], [0.25, 2]])
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema=1"
    assert lines[1] == "a,b"
    assert lines[2] == "0.5,1"


def test_result_metadata_and_sidecar(tmp_path):
    meta = result_metadata(BASE, {"note": "x"})
    assert meta["config"]["n"] == 8
    assert "conventions" in meta and "code_version" in meta
    assert meta["note"] == "x"
    path = tmp_path / "meta.json"
    experiments.write_sidecar(path, BASE)
    loaded = json.loads(path.read_text())
    assert loaded["master_seed"] == 0
