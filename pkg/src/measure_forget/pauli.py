"""Signed Pauli strings in binary-symplectic form.

A PauliString stores an n-qubit Pauli operator as two bit vectors packed
into Python ints (bit s = qubit s) plus a phase exponent mod 4, so that
the operator is

    i^phase_exp * sigma_0 (x) sigma_1 (x) ... (x) sigma_{n-1}

where the letter on site s is selected by the bit pair (x_s, z_s):
(0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z.  Hermitian operators have an even
phase exponent; stabilizer-group elements always do.
"""

from __future__ import annotations

from dataclasses import dataclass

_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit signed Pauli operator."""

    n: int
    x_bits: int
    z_bits: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"qubit count must be >= 1, got {self.n}")
        mask = (1 << self.n) - 1
        if self.x_bits & ~mask or self.z_bits & ~mask:
            raise ValueError("bit vector has support outside the qubit range")
        if not 0 <= self.phase_exp < 4:
            object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    @property
    def is_identity_bits(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def x_bit(self, site: int) -> int:
        return (self.x_bits >> site) & 1

    def z_bit(self, site: int) -> int:
        return (self.z_bits >> site) & 1

    def __str__(self) -> str:
        letters = "".join(
            _LETTER[(self.x_bit(s), self.z_bit(s))] for s in range(self.n)
        )
        return _PHASE_PREFIX[self.phase_exp] + letters


def identity(n: int) -> PauliString:
    return PauliString(n, 0, 0, 0)


def single_site(n: int, site: int, letter: str, phase_exp: int = 0) -> PauliString:
    """One Pauli letter on `site`, identity elsewhere."""
    if not 0 <= site < n:
        raise IndexError(f"site {site} out of range for {n} qubits")
    x, z = _BITS[letter]
    return PauliString(n, x << site, z << site, phase_exp)


def from_label(label: str) -> PauliString:
    """Parse e.g. '+XIZY', '-IZZI', '-iY'.  Left letter is qubit 0."""
    body = label
    phase = 0
    for prefix, ph in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2)):
        if label.startswith(prefix):
            phase, body = ph, label[len(prefix):]
            break
    x = z = 0
    for s, ch in enumerate(body):
        if ch not in _BITS:
            raise ValueError(f"bad Pauli letter {ch!r} in {label!r}")
        xb, zb = _BITS[ch]
        x |= xb << s
        z |= zb << s
    return PauliString(len(body), x, z, phase)


def symplectic_inner(p: PauliString, q: PauliString) -> int:
    """0 if p and q commute, 1 if they anticommute."""
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n}")
    return (((p.x_bits & q.z_bits) ^ (p.z_bits & q.x_bits)).bit_count()) & 1


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """i-power picked up by the letter-wise product, mod 4.

    Per-site rule: equal letters or an identity contribute no phase;
    cyclic products (XY, YZ, ZX) contribute +i, anticyclic -i.
    """
    # sites where the per-site product carries i (cyclic) / -i (anticyclic)
    pos = (x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2)
    neg = (x1 & ~z1 & ~x2 & z2) | (x1 & z1 & x2 & ~z2) | (~x1 & z1 & x2 & z2)
    mask = x1 | z1  # pos/neg sites always lie inside the first operand's support
    return ((pos & mask).bit_count() - (neg & mask).bit_count()) % 4


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Operator product p*q with exact i-power phase tracking."""
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n}")
    phase = (p.phase_exp + q.phase_exp
             + product_phase(p.x_bits, p.z_bits, q.x_bits, q.z_bits)) % 4
    return PauliString(p.n, p.x_bits ^ q.x_bits, p.z_bits ^ q.z_bits, phase)
