"""Mixed-state stabilizer tableau with measurement and forgetting.

A state on n qubits is a rank-r <= n stabilizer group stored as bit
matrices x, z of shape (r, n) (one row per generator) plus a phase
exponent per row (mod 4, always even for valid states).  Entropy is
n - r bits.  No destabilizers are tracked; group membership uses GF(2)
elimination.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from . import gf2
from .pauli import PauliString, product_phase

# i-power picked up when multiplying single-site letters P*Q, indexed by
# k = x + 2z (I=0, X=1, Z=2, Y=3); cyclic products give +1, anticyclic -1.
_TSIGN = np.zeros((4, 4), dtype=np.int8)
for _a, _b, _v in [(1, 3, 1), (1, 2, -1), (3, 2, 1), (3, 1, -1), (2, 1, 1), (2, 3, -1)]:
    _TSIGN[_a, _b] = _v


class OutcomeSource:
    """Supplies measurement outcomes (+1/-1) on demand."""

    def next_outcome(self) -> int:
        raise NotImplementedError


class RandomOutcomes(OutcomeSource):
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def next_outcome(self) -> int:
        return 1 - 2 * int(self.rng.integers(2))


class ScriptedOutcomes(OutcomeSource):
    """Replays a fixed outcome list; raises when exhausted."""

    def __init__(self, outcomes: Sequence[int]):
        if any(o not in (1, -1) for o in outcomes):
            raise ValueError("outcomes must be +1 or -1")
        self._outcomes = list(outcomes)
        self._pos = 0

    def next_outcome(self) -> int:
        if self._pos >= len(self._outcomes):
            raise RuntimeError("scripted outcome source exhausted")
        o = self._outcomes[self._pos]
        self._pos += 1
        return o


class StabilizerState:
    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, phase: np.ndarray):
        self.n = n
        self.x = x          # (r, n) uint8
        self.z = z          # (r, n) uint8
        self.phase = phase  # (r,) uint8, i-power exponents
        # memoized GF(2) echelon form of the rows as packed ints, used by
        # the Z-membership test; observable behavior is cache-independent
        self._echelon = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def pure_zero(cls, n: int) -> "StabilizerState":
        """|0...0> stabilized by +Z_0 ... +Z_{n-1}."""
        if n < 1:
            raise ValueError(f"qubit count must be >= 1, got {n}")
        return cls(n, np.zeros((n, n), dtype=np.uint8), np.eye(n, dtype=np.uint8),
                   np.zeros(n, dtype=np.uint8))

    @classmethod
    def maximally_mixed(cls, n: int) -> "StabilizerState":
        if n < 1:
            raise ValueError(f"qubit count must be >= 1, got {n}")
        return cls(n, np.zeros((0, n), dtype=np.uint8), np.zeros((0, n), dtype=np.uint8),
                   np.zeros(0, dtype=np.uint8))

    @classmethod
    def from_generators(cls, n: int, gens: Iterable[PauliString]) -> "StabilizerState":
        gens = list(gens)
        x = np.zeros((len(gens), n), dtype=np.uint8)
        z = np.zeros((len(gens), n), dtype=np.uint8)
        ph = np.zeros(len(gens), dtype=np.uint8)
        for r, g in enumerate(gens):
            if g.n != n:
                raise ValueError("generator size mismatch")
            for s in range(n):
                x[r, s] = g.x_bit(s)
                z[r, s] = g.z_bit(s)
            ph[r] = g.phase_exp
        state = cls(n, x, z, ph)
        state.validate()
        return state

    # -- bookkeeping -------------------------------------------------------

    @property
    def rank(self) -> int:
        return self.x.shape[0]

    def entropy(self) -> float:
        """Von Neumann entropy of the full state in bits: n - r."""
        return float(self.n - self.rank)

    def copy(self) -> "StabilizerState":
        return StabilizerState(self.n, self.x.copy(), self.z.copy(), self.phase.copy())

    def generators(self) -> list[PauliString]:
        out = []
        for r in range(self.rank):
            xb = int.from_bytes(np.packbits(self.x[r], bitorder="little").tobytes(), "little")
            zb = int.from_bytes(np.packbits(self.z[r], bitorder="little").tobytes(), "little")
            out.append(PauliString(self.n, xb, zb, int(self.phase[r])))
        return out

    def validate(self) -> None:
        """Raise ValueError if any tableau invariant is broken.

        -I can never be in the group once the rows are Hermitian and
        GF(2)-independent, so only commutation, independence and phase
        parity need checking.
        """
        if np.any(self.phase % 2):
            raise ValueError("non-Hermitian generator (odd phase exponent)")
        r = self.rank
        if r > self.n:
            raise ValueError("more generators than qubits")
        if r:
            xi = self.x.astype(np.int64)
            zi = self.z.astype(np.int64)
            comm = (xi @ zi.T + zi @ xi.T) % 2
            if np.any(comm):
                raise ValueError("generators do not pairwise commute")
            if gf2.rank(self._rows_matrix()) != r:
                raise ValueError("generators are GF(2)-dependent")

    def _rows_matrix(self) -> np.ndarray:
        return np.concatenate([self.x, self.z], axis=1)

    def _multiply_rows(self, idx: np.ndarray, pivot: int) -> None:
        """row_g <- row_g * row_pivot for every g in idx, exact phases."""
        self._echelon = None
        if len(idx) == 0:
            return
        kr = self.x[idx] + 2 * self.z[idx]
        kp = self.x[pivot] + 2 * self.z[pivot]
        delta = _TSIGN[kr, kp[None, :]].sum(axis=1)
        self.phase[idx] = ((self.phase[idx].astype(np.int64)
                            + int(self.phase[pivot]) + delta) % 4).astype(np.uint8)
        self.x[idx] ^= self.x[pivot]
        self.z[idx] ^= self.z[pivot]

    def _delete_row(self, r: int) -> None:
        self._echelon = None
        self.x = np.delete(self.x, r, axis=0)
        self.z = np.delete(self.z, r, axis=0)
        self.phase = np.delete(self.phase, r)

    def _check_site(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"site {i} out of range for {self.n} qubits")

    # -- dynamics ----------------------------------------------------------

    def apply_clifford2(self, gate, i: int, j: int) -> None:
        """Conjugate every generator by a two-qubit Clifford on sites (i, j)."""
        self._check_site(i)
        self._check_site(j)
        if i == j:
            raise ValueError("gate sites must differ")
        if self.rank == 0:
            return
        self._echelon = None
        bits, dphase = gate.tables()
        xi, zi = self.x[:, i], self.z[:, i]
        xj, zj = self.x[:, j], self.z[:, j]
        k = xi + (zi << 1) + (xj << 2) + (zj << 3)
        nb = bits[k]
        self.phase = (self.phase + dphase[k]) & 3
        self.x[:, i] = nb & 1
        self.z[:, i] = (nb >> 1) & 1
        self.x[:, j] = (nb >> 2) & 1
        self.z[:, j] = (nb >> 3) & 1

    def _rows_as_ints(self) -> list:
        """Rows as packed-int (x_bits, z_bits, phase_exp) triples."""
        if self.rank == 0:
            return []
        xb = np.packbits(self.x, axis=1, bitorder="little")
        zb = np.packbits(self.z, axis=1, bitorder="little")
        return [
            (int.from_bytes(xb[r].tobytes(), "little"),
             int.from_bytes(zb[r].tobytes(), "little"),
             int(self.phase[r]))
            for r in range(self.rank)
        ]

    def _echelon_insert(self, pivots: dict, key: int, comb: int) -> None:
        while key:
            low = key & -key
            hit = pivots.get(low)
            if hit is None:
                pivots[low] = (key, comb)
                return
            key ^= hit[0]
            comb ^= hit[1]

    def _build_echelon(self) -> None:
        rows = self._rows_as_ints()
        pivots: dict = {}
        for idx, (x, z, _) in enumerate(rows):
            self._echelon_insert(pivots, (x << self.n) | z, 1 << idx)
        self._echelon = (pivots, rows)

    def _z_membership(self, i: int):
        """If +/-Z_i is in the group, return its sign (+1/-1); else None."""
        if self._echelon is None:
            self._build_echelon()
        pivots, rows = self._echelon
        key = 1 << i  # target Z_i: zero x-part, z-part e_i
        comb = 0
        while key:
            hit = pivots.get(key & -key)
            if hit is None:
                return None
            key ^= hit[0]
            comb ^= hit[1]
        # product of the chosen rows; they all commute, so order is free
        ax = az = ph = 0
        while comb:
            idx = (comb & -comb).bit_length() - 1
            comb &= comb - 1
            x, z, e = rows[idx]
            ph += e + product_phase(ax, az, x, z)
            ax ^= x
            az ^= z
        ph %= 4
        assert (ax, az) == (0, 1 << i) and ph in (0, 2)
        return 1 if ph == 0 else -1

    def measure_z(self, i: int, outcome_source: OutcomeSource) -> int:
        """Projective Z measurement on site i with a recorded outcome.

        Case (a): +/-Z_i already in the group -> deterministic outcome.
        Case (b): Z_i anticommutes with some generator -> random outcome,
        rank unchanged.  Case (c): Z_i commutes with all generators but is
        not in the group -> random outcome, rank +1 (purification step).
        """
        self._check_site(i)
        anti = np.nonzero(self.x[:, i])[0]
        if anti.size:
            pivot = int(anti[0])
            self._multiply_rows(anti[1:], pivot)
            outcome = outcome_source.next_outcome()
            self.x[pivot] = 0
            self.z[pivot] = 0
            self.z[pivot, i] = 1
            self.phase[pivot] = 0 if outcome == 1 else 2
            return outcome
        sign = self._z_membership(i)
        if sign is not None:
            return sign
        outcome = outcome_source.next_outcome()
        xrow = np.zeros((1, self.n), dtype=np.uint8)
        zrow = np.zeros((1, self.n), dtype=np.uint8)
        zrow[0, i] = 1
        self.x = np.concatenate([self.x, xrow], axis=0)
        self.z = np.concatenate([self.z, zrow], axis=0)
        self.phase = np.append(self.phase, np.uint8(0 if outcome == 1 else 2))
        if self._echelon is not None:
            # keep the membership cache live: append the new pure-Z row
            pivots, rows = self._echelon
            rows.append((0, 1 << i, int(self.phase[-1])))
            self._echelon_insert(pivots, 1 << i, 1 << (len(rows) - 1))
        return outcome

    def forget_z(self, i: int) -> None:
        """Complete dephasing on site i: rho -> (rho + Z_i rho Z_i) / 2.

        Deterministic: if Z_i commutes with every generator the state is
        unchanged, otherwise the rank drops by exactly one.
        """
        self._check_site(i)
        anti = np.nonzero(self.x[:, i])[0]
        if anti.size == 0:
            return
        pivot = int(anti[0])
        self._multiply_rows(anti[1:], pivot)
        self._delete_row(pivot)

    # -- observables -------------------------------------------------------

    def subsystem_entropy(self, sites) -> float:
        """Entropy of the reduced state on `sites`, in bits."""
        sites = sorted(set(int(s) for s in sites))
        for s in sites:
            self._check_site(s)
        if not sites:
            return 0.0
        comp = [s for s in range(self.n) if s not in set(sites)]
        r = self.rank
        if r == 0:
            return float(len(sites))
        restricted = np.concatenate([self.x[:, comp], self.z[:, comp]], axis=1)
        return float(len(sites) - (r - gf2.rank(restricted)))

    def mutual_information(self, a, b) -> float:
        """I(A,B) = S_A + S_B - S_{A union B}, in bits."""
        a, b = set(a), set(b)
        if a & b:
            raise ValueError("subsystems must be disjoint")
        return (self.subsystem_entropy(a) + self.subsystem_entropy(b)
                - self.subsystem_entropy(a | b))

    # -- canonical form ----------------------------------------------------

    def canonical_generators(self) -> list[PauliString]:
        """Unique sign-correct RREF basis (x columns first, then z)."""
        work = self.copy()
        r = 0
        for col in range(2 * work.n):
            colvec = work.x[:, col] if col < work.n else work.z[:, col - work.n]
            nz = np.nonzero(colvec[r:])[0]
            if nz.size == 0:
                continue
            p = r + int(nz[0])
            if p != r:
                work.x[[r, p]] = work.x[[p, r]]
                work.z[[r, p]] = work.z[[p, r]]
                work.phase[[r, p]] = work.phase[[p, r]]
            elim = np.nonzero(colvec)[0]
            elim = elim[elim != r]
            work._multiply_rows(elim, r)
            r += 1
            if r == work.rank:
                break
        return work.generators()

    def dump(self) -> str:
        """Deterministic text rendering of the group for golden tests."""
        return "\n".join(str(g) for g in self.canonical_generators())


def new_pure_zero(n: int) -> StabilizerState:
    return StabilizerState.pure_zero(n)


def new_maximally_mixed(n: int) -> StabilizerState:
    return StabilizerState.maximally_mixed(n)
