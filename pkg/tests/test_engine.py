import numpy as np
import pytest

from measure_forget.engine import (
    CONVENTIONS,
    CircuitConfig,
    TrajectoryError,
    brickwork_pairs,
    build_layer_plan,
    replace,
    run_ensemble,
    run_trajectory,
    trajectory_rng,
)


def test_brickwork_pairs_cover_ring():
    even = brickwork_pairs(8, 0)
    odd = brickwork_pairs(8, 1)
    assert even == [(0, 1), (2, 3), (4, 5), (6, 7)]
    assert odd == [(1, 2), (3, 4), (5, 6), (7, 0)]  # periodic wrap
    for pairs in (even, odd):
        touched = sorted(s for p in pairs for s in p)
        assert touched == list(range(8))


def test_config_validation():
    with pytest.raises(ValueError):
        CircuitConfig(n=5, depth=2).validate()
    with pytest.raises(ValueError):
        CircuitConfig(n=4, depth=2, p_m=1.5).validate()
    with pytest.raises(ValueError):
        CircuitConfig(n=4, depth=2, initial="ground").validate()
    with pytest.raises(ValueError):
        CircuitConfig(n=4, depth=2, mi_partition=((0, 1), (1, 2))).validate()
    CircuitConfig(n=4, depth=0).validate()


def test_layer_plan_strata():
    cfg = CircuitConfig(n=8, depth=4, p_m=1.0, p_f=0.0)
    plan = build_layer_plan(cfg, 0, trajectory_rng(0, 0))
    assert len(plan.gates) == 4
    assert list(plan.measure_sites) == list(range(8))
    assert len(plan.forget_sites) == 0


def test_trajectory_determinism():
    cfg = CircuitConfig(n=12, depth=6, p_m=0.3, p_f=0.3, master_seed=9)
    a = run_trajectory(cfg, 5)
    b = run_trajectory(cfg, 5)
    assert np.array_equal(a.entropy_series, b.entropy_series)
    assert a.final_rank == b.final_rank
    c = run_trajectory(cfg, 6)
    assert not np.array_equal(a.entropy_series, c.entropy_series)


def test_entropy_series_shape_and_initial_value():
    cfg = CircuitConfig(n=8, depth=5, p_f=0.5, initial="maximally_mixed")
    rec = run_trajectory(cfg, 0)
    assert rec.entropy_series.shape == (6,)
    assert rec.entropy_series[0] == 8.0
    cfg2 = replace(cfg, initial="pure_zero")
    assert run_trajectory(cfg2, 0).entropy_series[0] == 0.0


def test_unitary_only_trajectory_stays_pure():
    cfg = CircuitConfig(n=16, depth=10)
    rec = run_trajectory(cfg, 3)
    assert np.all(rec.entropy_series == 0.0)
    assert rec.final_rank == 16


def test_ensemble_invariants():
    cfg = CircuitConfig(n=8, depth=6, p_m=0.2, p_f=0.2, realizations=20)
    res = run_ensemble(cfg)
    assert np.all(res.entropy_stderr >= 0)
    assert np.all(res.entropy_mean >= 0) and np.all(res.entropy_mean <= cfg.n)
    mean, err = res.final_entropy_density()
    assert 0 <= mean <= 1 and err >= 0


def test_ensemble_worker_count_is_bit_identical():
    cfg = CircuitConfig(n=10, depth=5, p_m=0.3, p_f=0.3, realizations=12,
                        master_seed=4)
    serial = run_ensemble(cfg, workers=1)
    parallel = run_ensemble(cfg, workers=3)
    assert np.array_equal(serial.entropy_mean, parallel.entropy_mean)
    assert np.array_equal(serial.entropy_stderr, parallel.entropy_stderr)


def test_independent_runs_agree_within_error_bars():
    # self-consistency of the Monte Carlo error bars
    cfg = CircuitConfig(n=16, depth=8, p_f=0.5, realizations=200, master_seed=0)
    m1, s1 = run_ensemble(cfg).final_entropy_density()
    m2, s2 = run_ensemble(replace(cfg, master_seed=1)).final_entropy_density()
    assert abs(m1 - m2) <= 2 * (s1 + s2)


def test_mutual_information_series():
    part = (tuple(range(4)), tuple(range(4, 8)))
    cfg = CircuitConfig(n=8, depth=6, p_m=0.1, realizations=10,
                        mi_partition=part)
    res = run_ensemble(cfg)
    assert res.mi_mean.shape == (7,)
    assert res.mi_mean[0] == 0.0
    assert np.all(res.mi_mean >= -1e-12)


def test_subsystem_series():
    cfg = CircuitConfig(n=8, depth=4, p_f=0.5, realizations=5,
                        subsystems=((0, 1), (0, 1, 2, 3)))
    res = run_ensemble(cfg)
    assert set(res.subsystem_mean) == {(0, 1), (0, 1, 2, 3)}
    assert res.subsystem_mean[(0, 1)].shape == (5,)
    assert np.all(res.subsystem_mean[(0, 1)] <= 2 + 1e-12)


def test_trajectory_error_carries_location():
    cfg = CircuitConfig(n=4, depth=3, mi_partition=((0,), (1,)))
    bad = replace(cfg, subsystems=((0, 99),))
    with pytest.raises(ValueError):
        run_trajectory(bad, 0)  # rejected by validation, not mid-run
    assert TrajectoryError(7, 2, ValueError("x")).trajectory_index == 7


def test_conventions_are_pinned():
    assert CONVENTIONS["stratum_order"] == "gates,measurements,forgets"
    assert CONVENTIONS["observable_snapshot"] == "after_forget_stratum"
    assert CONVENTIONS["entropy_base"] == 2
    assert CONVENTIONS["boundary"] == "periodic"
