"""Exact density-matrix simulator for up to 6 qubits.

Ground-truth oracle for the stabilizer tableau: gate conjugation,
projective Z measurement with injected outcomes, complete dephasing,
and exact (subsystem) von Neumann entropies.  Qubit 0 is the most
significant bit of the computational-basis index, matching the
left-to-right text rendering of Pauli strings.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .pauli import PauliString

MAX_QUBITS = 6

_I2 = np.eye(2, dtype=complex)
_SIGMA = {
    (0, 0): _I2,
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
}


class InconsistentOutcomeError(RuntimeError):
    """An injected measurement outcome has (near-)zero probability."""


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a signed Pauli string (n <= MAX_QUBITS)."""
    if p.n > MAX_QUBITS:
        raise ValueError(f"dense matrices limited to {MAX_QUBITS} qubits")
    m = np.array([[1.0 + 0j]])
    for s in range(p.n):
        m = np.kron(m, _SIGMA[(p.x_bit(s), p.z_bit(s))])
    return (1j ** p.phase_exp) * m


def _expand_two_qubit(u: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """Embed a 4x4 operator acting on qubits (i, j) into 2^n dimensions."""
    rest = [q for q in range(n) if q not in (i, j)]
    full = np.kron(u, np.eye(1 << (n - 2)))
    # full acts on qubit order (i, j, rest...); permute into 0..n-1
    order = [i, j] + rest
    perm = [order.index(q) for q in range(n)]
    t = full.reshape([2] * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(1 << n, 1 << n)


class DenseState:
    def __init__(self, n: int, rho: Optional[np.ndarray] = None):
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"dense oracle supports 1..{MAX_QUBITS} qubits, got {n}")
        self.n = n
        d = 1 << n
        if rho is None:
            rho = np.zeros((d, d), dtype=complex)
            rho[0, 0] = 1.0
        self.rho = np.asarray(rho, dtype=complex)

    @classmethod
    def pure_zero(cls, n: int) -> "DenseState":
        return cls(n)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DenseState":
        d = 1 << n
        return cls(n, np.eye(d, dtype=complex) / d)

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.rho.copy())

    def validate(self) -> None:
        if not np.allclose(self.rho, self.rho.conj().T, atol=1e-12):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(self.rho) - 1.0) > 1e-12:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(self.rho).min() < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")

    # -- channels ----------------------------------------------------------

    def apply_gate(self, gate, i: int, j: int) -> None:
        """Conjugate by a two-qubit Clifford on sites (i, j)."""
        from .clifford import gate_unitary
        u = _expand_two_qubit(gate_unitary(gate), i, j, self.n)
        self.rho = u @ self.rho @ u.conj().T

    def measure_z(self, i: int, outcome: int) -> None:
        """Project onto the injected Z outcome (+1/-1) and renormalize."""
        if outcome not in (1, -1):
            raise ValueError("outcome must be +1 or -1")
        z = pauli_matrix(PauliString(self.n, 0, 1 << i))
        proj = (np.eye(1 << self.n) + outcome * z) / 2
        prp = proj @ self.rho @ proj
        p = np.trace(prp).real
        if p < 1e-12:
            raise InconsistentOutcomeError(
                f"outcome {outcome:+d} on site {i} has probability {p:.3e}"
            )
        self.rho = prp / p

    def outcome_probability(self, i: int, outcome: int) -> float:
        z = pauli_matrix(PauliString(self.n, 0, 1 << i))
        proj = (np.eye(1 << self.n) + outcome * z) / 2
        return np.trace(proj @ self.rho @ proj).real

    def forget_z(self, i: int) -> None:
        """Complete dephasing: rho -> (rho + Z_i rho Z_i) / 2."""
        z = pauli_matrix(PauliString(self.n, 0, 1 << i))
        self.rho = (self.rho + z @ self.rho @ z) / 2

    # -- observables -------------------------------------------------------

    def partial_trace(self, keep: Iterable[int]) -> np.ndarray:
        keep = sorted(set(int(s) for s in keep))
        drop = [q for q in range(self.n) if q not in keep]
        t = self.rho.reshape([2] * (2 * self.n))
        for q in sorted(drop, reverse=True):
            t = np.trace(t, axis1=q, axis2=q + t.ndim // 2)
        d = 1 << len(keep)
        return t.reshape(d, d)

    def exact_entropy(self, sites=None) -> float:
        """Von Neumann entropy in bits of the full state or a subsystem."""
        if sites is None:
            m = self.rho
        else:
            sites = sorted(set(int(s) for s in sites))
            if not sites:
                return 0.0
            for s in sites:
                if not 0 <= s < self.n:
                    raise IndexError(f"site {s} out of range")
            m = self.partial_trace(sites)
        lam = np.linalg.eigvalsh(m)
        lam = lam[lam > 1e-12]
        return float(-(lam * np.log2(lam)).sum())

    def mutual_information(self, a, b) -> float:
        a, b = set(a), set(b)
        if a & b:
            raise ValueError("subsystems must be disjoint")
        return (self.exact_entropy(a) + self.exact_entropy(b)
                - self.exact_entropy(a | b))
