"""Two-qubit Clifford gates: uniform sampling, validation, lookup tables.

A two-qubit Clifford (mod global phase) is identified by a 4x4 binary
symplectic matrix (720 of them) plus 4 sign bits for the images of
X1, Z1, X2, Z2 -- 11520 gates in total.  For fast tableau conjugation
each symplectic class gets a 16-entry table mapping the local bit
pattern (x_i, z_i, x_j, z_j) of a generator to its conjugated bits and
i-power phase increment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .pauli import PauliString, identity, multiply, symplectic_inner

SYMPLECTIC_COUNT = 720
GATE_COUNT = 11520  # 720 symplectic classes x 16 sign patterns

# symplectic form for bit vectors ordered (x1, z1, x2, z2)
_J = np.array([[0, 1, 0, 0],
               [1, 0, 0, 0],
               [0, 0, 0, 1],
               [0, 0, 1, 0]], dtype=np.uint8)

# popcount of a 4-bit value
POP4 = np.array([bin(k).count("1") for k in range(16)], dtype=np.uint8)

_classes: Optional[np.ndarray] = None   # (720, 4, 4) uint8, rows = images
_class_bits: Optional[np.ndarray] = None   # (720, 16) uint8
_class_phase: Optional[np.ndarray] = None  # (720, 16) uint8


def symplectic_classes() -> np.ndarray:
    """All 720 symplectic 4x4 GF(2) matrices, in a fixed canonical order."""
    global _classes
    if _classes is None:
        codes = np.arange(1 << 16, dtype=np.uint32)
        bits = ((codes[:, None] >> np.arange(16)) & 1).astype(np.uint8)
        mats = bits.reshape(-1, 4, 4)
        prod = np.einsum("nij,jk,nlk->nil", mats, _J, mats) % 2
        keep = np.all(prod == _J, axis=(1, 2))
        _classes = mats[keep]
        assert _classes.shape[0] == SYMPLECTIC_COUNT
    return _classes


def _row_to_pauli(row: np.ndarray, phase_exp: int = 0) -> PauliString:
    x1, z1, x2, z2 = (int(b) for b in row)
    return PauliString(2, x1 | (x2 << 1), z1 | (z2 << 1), phase_exp)


def _table_from_images(images) -> tuple[np.ndarray, np.ndarray]:
    """16-entry conjugation table for local bit patterns k = x1|z1<<1|x2<<2|z2<<3."""
    bits = np.zeros(16, dtype=np.uint8)
    phase = np.zeros(16, dtype=np.uint8)
    for k in range(16):
        e = [(k >> m) & 1 for m in range(4)]
        prod = identity(2)
        for exp, img in zip(e, images):
            if exp:
                prod = multiply(prod, img)
        # sigma^(x,z) = i^(x z) X^x Z^z on each of the two gate sites
        pref = (e[0] & e[1]) + (e[2] & e[3])
        ph = (pref + prod.phase_exp) % 4
        if ph % 2:
            raise ValueError("images do not define a Clifford (non-Hermitian image)")
        bits[k] = (prod.x_bit(0) | (prod.z_bit(0) << 1)
                   | (prod.x_bit(1) << 2) | (prod.z_bit(1) << 3))
        phase[k] = ph
    return bits, phase


def class_tables() -> tuple[np.ndarray, np.ndarray]:
    """Conjugation tables for all 720 classes with positive signs."""
    global _class_bits, _class_phase
    if _class_bits is None:
        mats = symplectic_classes()
        bits = np.zeros((SYMPLECTIC_COUNT, 16), dtype=np.uint8)
        phase = np.zeros((SYMPLECTIC_COUNT, 16), dtype=np.uint8)
        for c in range(SYMPLECTIC_COUNT):
            images = [_row_to_pauli(mats[c][i]) for i in range(4)]
            bits[c], phase[c] = _table_from_images(images)
        _class_bits, _class_phase = bits, phase
    return _class_bits, _class_phase


def save_gate_table(path) -> None:
    """Write the enumerated class tables to an npz cache file."""
    bits, phase = class_tables()
    np.savez(path, classes=symplectic_classes(), bits=bits, phase=phase)


def load_gate_table(path) -> None:
    """Load a cache written by save_gate_table.  Behavior-neutral."""
    global _classes, _class_bits, _class_phase
    data = np.load(path)
    classes, bits, phase = data["classes"], data["bits"], data["phase"]
    if classes.shape != (SYMPLECTIC_COUNT, 4, 4) or bits.shape != (SYMPLECTIC_COUNT, 16):
        raise ValueError("gate table cache has unexpected layout")
    _classes = classes.astype(np.uint8)
    _class_bits = bits.astype(np.uint8)
    _class_phase = phase.astype(np.uint8)


@dataclass
class CliffordGate2:
    """A two-qubit Clifford element, mod global phase.

    Either sampled from the enumerated table (sym_index, sign_mask) or
    built directly from the four signed images of X1, Z1, X2, Z2.
    """

    sym_index: Optional[int] = None
    sign_mask: int = 0
    _images: Optional[tuple] = None
    _tables: Optional[tuple] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_images(cls, images) -> "CliffordGate2":
        images = tuple(images)
        if len(images) != 4 or any(p.n != 2 for p in images):
            raise ValueError("expected four 2-qubit Pauli images")
        return cls(_images=images)

    @property
    def images(self) -> tuple:
        if self._images is None:
            mats = symplectic_classes()
            self._images = tuple(
                _row_to_pauli(mats[self.sym_index][i], 2 * ((self.sign_mask >> i) & 1))
                for i in range(4)
            )
        return self._images

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(bits16, phase16) conjugation table including sign contributions."""
        if self._tables is None:
            if self.sym_index is not None:
                bits, phase = class_tables()
                eff = (phase[self.sym_index]
                       + 2 * POP4[self.sign_mask & np.arange(16)]) % 4
                self._tables = (bits[self.sym_index], eff.astype(np.uint8))
            else:
                self._tables = _table_from_images(self._images)
        return self._tables

    def apply_to_pauli(self, p: PauliString) -> PauliString:
        """Conjugate a 2-qubit Pauli: U p U^dagger."""
        if p.n != 2:
            raise ValueError("expected a 2-qubit Pauli")
        bits, phase = self.tables()
        k = (p.x_bit(0) | (p.z_bit(0) << 1) | (p.x_bit(1) << 2) | (p.z_bit(1) << 3))
        b = int(bits[k])
        return PauliString(2, (b & 1) | (((b >> 2) & 1) << 1),
                           ((b >> 1) & 1) | (((b >> 3) & 1) << 1),
                           (p.phase_exp + int(phase[k])) % 4)


def identity_gate() -> CliffordGate2:
    from .pauli import from_label
    return CliffordGate2.from_images(
        [from_label("+XI"), from_label("+ZI"), from_label("+IX"), from_label("+IZ")]
    )


def validate(gate: CliffordGate2) -> bool:
    """Check the Clifford invariants of the four images."""
    try:
        imgs = gate.images
    except Exception:
        return False
    if len(imgs) != 4 or any(p.n != 2 for p in imgs):
        return False
    if any(p.phase_exp % 2 for p in imgs):
        return False
    # commutation relations must match (X1, Z1, X2, Z2)
    want = {(0, 1): 1, (2, 3): 1, (0, 2): 0, (0, 3): 0, (1, 2): 0, (1, 3): 0}
    for (a, b), v in want.items():
        if symplectic_inner(imgs[a], imgs[b]) != v:
            return False
    rows = np.array(
        [[p.x_bit(0), p.z_bit(0), p.x_bit(1), p.z_bit(1)] for p in imgs],
        dtype=np.uint8,
    )
    from . import gf2
    return gf2.rank(rows) == 4


def sample_uniform(rng: np.random.Generator) -> CliffordGate2:
    """Uniform draw over the 11520 two-qubit Cliffords (mod phase)."""
    return CliffordGate2(sym_index=int(rng.integers(SYMPLECTIC_COUNT)),
                         sign_mask=int(rng.integers(16)))


def sample_indices(rng: np.random.Generator, size: int):
    """Bulk draw of (sym_index, sign_mask) arrays; same distribution as
    sample_uniform, used on the hot path and for uniformity tests."""
    return (rng.integers(SYMPLECTIC_COUNT, size=size),
            rng.integers(16, size=size))


def all_gates():
    """Iterate over every gate in the enumerated table."""
    for c in range(SYMPLECTIC_COUNT):
        for s in range(16):
            yield CliffordGate2(sym_index=c, sign_mask=s)


_unitary_cache: dict = {}

_I2 = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_BASIS_2Q = [np.kron(_X, _I2), np.kron(_Z, _I2), np.kron(_I2, _X), np.kron(_I2, _Z)]


def gate_unitary(gate: CliffordGate2) -> np.ndarray:
    """A 4x4 unitary realizing the gate (global phase arbitrary).

    Solved from the image constraints Q U = U P via the nullspace of the
    stacked commutant equations; used only by the dense test oracle.
    """
    key = (gate.sym_index, gate.sign_mask) if gate.sym_index is not None else None
    if key is not None and key in _unitary_cache:
        return _unitary_cache[key]
    from .dense import pauli_matrix
    eye = np.eye(4)
    blocks = []
    for p_mat, img in zip(_BASIS_2Q, gate.images):
        q_mat = pauli_matrix(img)
        blocks.append(np.kron(q_mat, eye) - np.kron(eye, p_mat.T))
    stacked = np.concatenate(blocks, axis=0)
    _, s, vh = np.linalg.svd(stacked)
    if s[-1] > 1e-8:
        raise ValueError("images are not consistent with any unitary")
    u = vh[-1].conj().reshape(4, 4)
    # nullspace vector is proportional to a unitary: U U^dag = c I
    c = (u @ u.conj().T)[0, 0]
    u = u / np.sqrt(c)
    if key is not None:
        _unitary_cache[key] = u
    return u
