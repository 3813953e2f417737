"""Brickwork circuit schedule, seeded trajectories, and ensembles.

A layer is one brick row of freshly sampled two-qubit Cliffords on the
ring, followed by a measurement stratum (each site measured with
probability p_m) and a forget stratum (each site dephased with
probability p_f).  Observables are recorded after the forget stratum;
index 0 of every series is the initial state.

Trajectory k is driven entirely by the substream derived from
(master_seed, k), so results are independent of scheduling and worker
count.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import clifford
from .stabilizer import RandomOutcomes, StabilizerState

INITIAL_STATES = ("pure_zero", "maximally_mixed")

# fixed conventions, echoed in every output manifest
CONVENTIONS = {
    "stratum_order": "gates,measurements,forgets",
    "observable_snapshot": "after_forget_stratum",
    "entropy_base": 2,
    "boundary": "periodic",
    "seeding": "numpy SeedSequence(master_seed, spawn_key=(trajectory_index,))",
}


@dataclass(frozen=True)
class CircuitConfig:
    n: int
    depth: int
    p_m: float = 0.0
    p_f: float = 0.0
    initial: str = "pure_zero"
    realizations: int = 200
    master_seed: int = 0
    # optional per-layer observables beyond total entropy
    subsystems: tuple = ()           # tuple of site tuples
    mi_partition: Optional[tuple] = None  # ((sites A), (sites B))

    def validate(self) -> None:
        if self.n < 2 or self.n % 2:
            raise ValueError(f"system size must be even and >= 2, got {self.n}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if not (0.0 <= self.p_m <= 1.0 and 0.0 <= self.p_f <= 1.0):
            raise ValueError("rates must lie in [0, 1]")
        if self.initial not in INITIAL_STATES:
            raise ValueError(f"initial must be one of {INITIAL_STATES}")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        for sub in self.subsystems:
            for s in sub:
                if not 0 <= s < self.n:
                    raise ValueError(f"subsystem site {s} out of range")
        if self.mi_partition is not None:
            a, b = self.mi_partition
            if set(a) & set(b):
                raise ValueError("mutual-information subsystems must be disjoint")
            for s in list(a) + list(b):
                if not 0 <= s < self.n:
                    raise ValueError(f"mutual-information site {s} out of range")


@dataclass
class LayerPlan:
    pairs: list            # (i, j) gate sites
    gates: list            # CliffordGate2 per pair
    measure_sites: np.ndarray
    forget_sites: np.ndarray


@dataclass
class TrajectoryRecord:
    trajectory_index: int
    entropy_series: np.ndarray              # bits, length depth+1
    subsystem_series: dict = field(default_factory=dict)
    mutual_info_series: Optional[np.ndarray] = None
    final_rank: int = 0


@dataclass
class EnsembleResult:
    config: CircuitConfig
    realizations: int
    entropy_mean: np.ndarray
    entropy_stderr: np.ndarray
    subsystem_mean: dict = field(default_factory=dict)
    subsystem_stderr: dict = field(default_factory=dict)
    mi_mean: Optional[np.ndarray] = None
    mi_stderr: Optional[np.ndarray] = None

    def final_entropy_density(self) -> tuple[float, float]:
        """(mean, stderr) of S/N at the final layer."""
        return (float(self.entropy_mean[-1]) / self.config.n,
                float(self.entropy_stderr[-1]) / self.config.n)


class TrajectoryError(RuntimeError):
    def __init__(self, trajectory_index: int, layer: int, cause: BaseException):
        super().__init__(
            f"trajectory {trajectory_index} failed at layer {layer}: {cause}")
        self.trajectory_index = trajectory_index
        self.layer = layer


def brickwork_pairs(n: int, layer_index: int) -> list:
    """Gate pairs (2k+off, 2k+1+off) mod n with alternating offset."""
    off = layer_index % 2
    return [((2 * k + off) % n, (2 * k + 1 + off) % n) for k in range(n // 2)]


def build_layer_plan(config: CircuitConfig, layer_index: int,
                     rng: np.random.Generator) -> LayerPlan:
    """Sample one layer: brick gates, then measurement and forget strata."""
    n = config.n
    pairs = brickwork_pairs(n, layer_index)
    cls_idx, signs = clifford.sample_indices(rng, len(pairs))
    gates = [clifford.CliffordGate2(sym_index=int(c), sign_mask=int(s))
             for c, s in zip(cls_idx, signs)]
    measure_sites = np.nonzero(rng.random(n) < config.p_m)[0]
    forget_sites = np.nonzero(rng.random(n) < config.p_f)[0]
    return LayerPlan(pairs, gates, measure_sites, forget_sites)


def trajectory_rng(master_seed: int, trajectory_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trajectory_index,))
    return np.random.Generator(np.random.PCG64(ss))


def _initial_state(config: CircuitConfig) -> StabilizerState:
    if config.initial == "maximally_mixed":
        return StabilizerState.maximally_mixed(config.n)
    return StabilizerState.pure_zero(config.n)


def run_trajectory(config: CircuitConfig, trajectory_index: int) -> TrajectoryRecord:
    """One seeded trajectory; fully determined by (master_seed, index)."""
    config.validate()
    rng = trajectory_rng(config.master_seed, trajectory_index)
    outcomes = RandomOutcomes(rng)
    state = _initial_state(config)

    entropy = np.empty(config.depth + 1)
    subs = {sub: np.empty(config.depth + 1) for sub in config.subsystems}
    mi = np.empty(config.depth + 1) if config.mi_partition is not None else None

    def record(t):
        entropy[t] = state.entropy()
        for sub in config.subsystems:
            subs[sub][t] = state.subsystem_entropy(sub)
        if mi is not None:
            a, b = config.mi_partition
            mi[t] = state.mutual_information(a, b)

    record(0)
    for t in range(config.depth):
        try:
            plan = build_layer_plan(config, t, rng)
            for (i, j), gate in zip(plan.pairs, plan.gates):
                state.apply_clifford2(gate, i, j)
            for site in plan.measure_sites:
                state.measure_z(int(site), outcomes)
            for site in plan.forget_sites:
                state.forget_z(int(site))
        except Exception as exc:  # surface the failing layer index
            raise TrajectoryError(trajectory_index, t, exc) from exc
        record(t + 1)

    return TrajectoryRecord(trajectory_index, entropy, subs, mi, state.rank)


def _worker(args) -> TrajectoryRecord:
    config, k = args
    return run_trajectory(config, k)


def _mean_stderr(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = stack.mean(axis=0)
    if stack.shape[0] < 2:
        return mean, np.zeros_like(mean)
    se = stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])
    return mean, se


def run_ensemble(config: CircuitConfig, workers: int = 1) -> EnsembleResult:
    """Run `realizations` trajectories and reduce in fixed index order.

    The reduction stacks records sorted by trajectory index, so means and
    standard errors are bit-identical for any worker count.
    """
    config.validate()
    indices = range(config.realizations)
    if workers <= 1:
        records = [run_trajectory(config, k) for k in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, config.realizations // (4 * workers))
            records = list(pool.map(_worker, [(config, k) for k in indices],
                                    chunksize=chunk))
    records.sort(key=lambda rec: rec.trajectory_index)

    ent_mean, ent_se = _mean_stderr(np.stack([r.entropy_series for r in records]))
    result = EnsembleResult(config, config.realizations, ent_mean, ent_se)
    for sub in config.subsystems:
        m, se = _mean_stderr(np.stack([r.subsystem_series[sub] for r in records]))
        result.subsystem_mean[sub] = m
        result.subsystem_stderr[sub] = se
    if config.mi_partition is not None:
        m, se = _mean_stderr(np.stack([r.mutual_info_series for r in records]))
        result.mi_mean, result.mi_stderr = m, se
    return result


def replace(config: CircuitConfig, **kwargs) -> CircuitConfig:
    return dataclasses.replace(config, **kwargs)
