"""Pure numpy versions of the hot enumeration loops.

Semantics match the compiled versions exactly, including tie-breaking, so
either backend can be selected at import time.
"""

from __future__ import annotations

import numpy as np

from .linalg import iter_assignments

CHUNK = 1 << 15


def key_codes(keys: np.ndarray, p: int) -> np.ndarray:
    """Integer code of each key row (base-``p`` digits, most significant first)."""
    m = keys.shape[1]
    if m == 0:
        return np.zeros(keys.shape[0], dtype=np.int64)
    weights = p ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return keys @ weights


def coset_min_weight(K: np.ndarray, mass: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """For every coset key: minimum mass of a vector with that key and the
    lexicographically smallest vector attaining it.

    ``K`` is the ``n x m`` key matrix (key = x @ K mod p).  Returns
    ``(minmass[p**m], argmin[p**m, n])``.
    """
    n, m = K.shape
    n_keys = p**m
    best = np.full(n_keys, np.iinfo(np.int64).max, dtype=np.int64)
    arg = np.zeros((n_keys, n), dtype=np.int64)
    mass = np.asarray(mass, dtype=np.int64)
    for block in iter_assignments(p, n, CHUNK):
        codes = key_codes((block @ K) % p, p)
        w = (block != 0).astype(np.int64) @ mass
        # first occurrence of the per-key minimum inside the block
        order = np.lexsort((np.arange(block.shape[0]), w, codes))
        c_sorted = codes[order]
        first = np.ones(order.size, dtype=bool)
        first[1:] = c_sorted[1:] != c_sorted[:-1]
        sel = order[first]
        c = codes[sel]
        better = w[sel] < best[c]
        best[c[better]] = w[sel][better]
        arg[c[better]] = block[sel][better]
    return best, arg


def star_search(
    table: np.ndarray,
    inverse: np.ndarray,
    src: np.ndarray,
    fixed: np.ndarray,
    expo: np.ndarray,
    umass: np.ndarray,
    m: int,
) -> tuple[int, np.ndarray]:
    """Minimise the mass of non-identity products over all assignments.

    Each affected face ``u`` evaluates the product of ``L`` factors in order;
    factor ``l`` is ``a[src[u, l]]`` (an assigned value) when ``src >= 0``,
    else the constant ``fixed[u, l]``, raised to ``expo[u, l]`` in ``{+1, -1}``.
    Assignments ``a`` range over ``{0..q-1}^m`` in lexicographic order; the
    first minimiser is returned.
    """
    q = table.shape[0]
    n_u, L = src.shape
    best_mass, best = None, np.zeros(m, dtype=np.int64)
    umass = np.asarray(umass, dtype=np.int64)
    for block in iter_assignments(q, m, CHUNK):
        acc = np.zeros((block.shape[0], n_u), dtype=np.int64)
        for l in range(L):
            s = src[:, l]
            term = np.where(s[None, :] >= 0, block[:, np.maximum(s, 0)], fixed[None, :, l])
            term = np.where(expo[None, :, l] < 0, inverse[term], term)
            acc = table[acc, term]
        w = (acc != 0).astype(np.int64) @ umass
        i = int(np.argmin(w))
        if best_mass is None or w[i] < best_mass:
            best_mass, best = int(w[i]), block[i].copy()
    return best_mass, best
