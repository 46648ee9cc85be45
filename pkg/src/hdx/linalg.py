"""Dense linear algebra over prime fields Z_p and small enumeration helpers."""

from __future__ import annotations

from typing import Iterator

import numpy as np


def rref_mod_p(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``M`` over ``Z_p``; returns (nonzero rows, pivots)."""
    A = np.array(M, dtype=np.int64) % p
    rows, cols = A.shape if A.ndim == 2 else (0, 0)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r] = (A[r] * inv) % p
        others = np.flatnonzero(A[:, c])
        others = others[others != r]
        if others.size:
            A[others] = (A[others] - A[others, c][:, None] * A[r][None, :]) % p
        pivots.append(c)
        r += 1
    return A[:r].copy(), pivots


def nullspace_mod_p(M: np.ndarray, p: int, n_cols: int | None = None) -> np.ndarray:
    """Basis (as rows) of ``{x : M x = 0 mod p}``."""
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[1] if M.ndim == 2 and M.size else (n_cols or 0)
    if M.size == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = rref_mod_p(M, p)
    free = [c for c in range(n) if c not in set(piv)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for i, fcol in enumerate(free):
        basis[i, fcol] = 1
        for r, pc in enumerate(piv):
            basis[i, pc] = (-R[r, fcol]) % p
    return basis


def row_space_basis(M: np.ndarray, p: int) -> np.ndarray:
    R, _ = rref_mod_p(M, p)
    return R


def coset_key_map(basis_rref: np.ndarray, pivots: list[int], n: int, p: int) -> tuple[np.ndarray, list[int]]:
    """Linear map sending ``x`` to the non-pivot part of ``x`` reduced by ``basis``.

    Two vectors have the same key iff they differ by an element of the span of
    ``basis_rref``.  Returns the ``n x (n - r)`` matrix ``K`` (key = x @ K mod p)
    and the list of non-pivot columns.
    """
    free = [c for c in range(n) if c not in set(pivots)]
    K = np.zeros((n, len(free)), dtype=np.int64)
    for j, c in enumerate(free):
        K[c, j] = 1
    for r, pc in enumerate(pivots):
        # x <- x - x[pc] * row_r ; contributes -row_r[free] to the key
        K[pc, :] = (-basis_rref[r, free]) % p
    return K, free


def digits(indices: np.ndarray, base: int, width: int) -> np.ndarray:
    """Base-``base`` digits (most significant first) of each index."""
    indices = np.asarray(indices, dtype=np.int64)
    out = np.empty((indices.size, width), dtype=np.int64)
    x = indices.copy()
    for j in range(width - 1, -1, -1):
        out[:, j] = x % base
        x //= base
    return out


def iter_assignments(base: int, width: int, chunk: int = 1 << 16) -> Iterator[np.ndarray]:
    """All ``base**width`` vectors in lexicographic order, in chunks."""
    total = base**width
    for start in range(0, total, chunk):
        yield digits(np.arange(start, min(total, start + chunk)), base, width)
