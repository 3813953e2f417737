"""Oracle-equivalence checks: stabilizer tableau vs dense density matrix.

Both simulators step through the same synchronized trajectory: gates are
shared, and every recorded measurement outcome from the tableau is
injected into the dense state.  Entropies must then agree exactly (to
floating-point tolerance) at every layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import clifford
from .dense import DenseState
from .engine import brickwork_pairs, trajectory_rng
from .stabilizer import RandomOutcomes, StabilizerState

TOLERANCE_BITS = 1e-9


@dataclass
class SyncReport:
    cases: int = 0
    comparisons: int = 0
    max_error_bits: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_error_bits < TOLERANCE_BITS


def synchronized_trajectory(n: int, depth: int, p_m: float, p_f: float,
                            initial: str, seed: int,
                            report: SyncReport) -> None:
    """Run one synchronized trajectory and fold entropy errors into report.

    Follows the engine's layer recipe directly (gates, then measurement
    and forget strata) so odd sizes can be exercised too.
    """
    rng = trajectory_rng(seed, 0)
    outcomes = RandomOutcomes(rng)
    if initial == "maximally_mixed":
        stab = StabilizerState.maximally_mixed(n)
        ref = DenseState.maximally_mixed(n)
    else:
        stab = StabilizerState.pure_zero(n)
        ref = DenseState.pure_zero(n)
    half = tuple(range(n // 2))
    rest = tuple(range(n // 2, n))

    def compare():
        errs = [abs(stab.entropy() - ref.exact_entropy())]
        for s in range(n):
            errs.append(abs(stab.subsystem_entropy([s]) - ref.exact_entropy([s])))
        errs.append(abs(stab.subsystem_entropy(half) - ref.exact_entropy(half)))
        errs.append(abs(stab.mutual_information(half, rest)
                        - ref.mutual_information(half, rest)))
        report.comparisons += len(errs)
        report.max_error_bits = max(report.max_error_bits, max(errs))

    compare()
    for t in range(depth):
        pairs = brickwork_pairs(n, t)
        cls_idx, signs = clifford.sample_indices(rng, len(pairs))
        for (i, j), c, s in zip(pairs, cls_idx, signs):
            gate = clifford.CliffordGate2(sym_index=int(c), sign_mask=int(s))
            stab.apply_clifford2(gate, i, j)
            ref.apply_gate(gate, i, j)
        for site in np.nonzero(rng.random(n) < p_m)[0]:
            outcome = stab.measure_z(int(site), outcomes)
            ref.measure_z(int(site), outcome)
        for site in np.nonzero(rng.random(n) < p_f)[0]:
            stab.forget_z(int(site))
            ref.forget_z(int(site))
        compare()
    report.cases += 1


def run_selftest(trajectories: int = 120, max_depth: int = 8,
                 verbose_print=None) -> SyncReport:
    """Spread trajectories across sizes 2..5 and rate combinations."""
    report = SyncReport()
    rates = [0.0, 0.3, 1.0]
    combos = [(n, pm, pf, init)
              for n in (2, 3, 4, 5)
              for pm in rates for pf in rates
              for init in ("pure_zero", "maximally_mixed")]
    seed = 0
    while report.cases < trajectories:
        n, pm, pf, init = combos[report.cases % len(combos)]
        depth = 3 + (seed % max_depth)
        synchronized_trajectory(n, depth, pm, pf, init, seed, report)
        seed += 1
        if verbose_print and report.cases % 24 == 0:
            verbose_print(
                f"  {report.cases}/{trajectories} trajectories, "
                f"max error {report.max_error_bits:.2e} bits")
    return report
