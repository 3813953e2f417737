"""GF(2) linear algebra on numpy 0/1 bit matrices (dtype uint8)."""

from __future__ import annotations

import numpy as np


def rank(m: np.ndarray) -> int:
    """Rank of a 0/1 matrix over GF(2) via Gaussian elimination."""
    if m.size == 0:
        return 0
    m = np.array(m, dtype=np.uint8, copy=True)
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        elim = np.nonzero(m[:, c])[0]
        elim = elim[elim != r]
        if elim.size:
            m[elim] ^= m[r]
        r += 1
        if r == rows:
            break
    return r


def solve_in_rowspan(m: np.ndarray, v: np.ndarray):
    """Express v as a GF(2) combination of the rows of m.

    Returns a boolean array c with c @ m == v (mod 2), or None when v is
    not in the rowspan.  For empty m, returns an empty combination iff v
    is the zero vector.
    """
    v = np.asarray(v, dtype=np.uint8)
    if m.size == 0 or m.shape[0] == 0:
        return np.zeros(m.shape[0] if m.ndim == 2 else 0, dtype=bool) if not v.any() else None
    rows, cols = m.shape
    # augment with identity to record which original rows combine
    aug = np.concatenate([np.array(m, dtype=np.uint8, copy=True),
                          np.eye(rows, dtype=np.uint8)], axis=1)
    r = 0
    pivots = []
    for c in range(cols):
        nz = np.nonzero(aug[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        elim = np.nonzero(aug[:, c])[0]
        elim = elim[elim != r]
        if elim.size:
            aug[elim] ^= aug[r]
        pivots.append((r, c))
        r += 1
        if r == rows:
            break
    vv = v.copy()
    comb = np.zeros(rows, dtype=np.uint8)
    for row_i, col in pivots:
        if vv[col]:
            vv ^= aug[row_i, :cols]
            comb ^= aug[row_i, cols:]
    if vv.any():
        return None
    return comb.astype(bool)
