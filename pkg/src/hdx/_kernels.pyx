# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration loops (see ``_kernels_py`` for the reference versions)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef inline int _ctz(uint64_t x) nogil:
    cdef int c = 0
    while (x & 1) == 0:
        x >>= 1
        c += 1
    return c


def coset_min_weight(K, mass, int p):
    """Same contract as ``_kernels_py.coset_min_weight``.

    ``p = 2`` runs a Gray-code walk with XOR key updates; other primes fall
    back to a mixed-radix odometer.
    """
    K = np.ascontiguousarray(K, dtype=np.int64)
    cdef int n = K.shape[0]
    cdef int m = K.shape[1]
    cdef int64_t n_keys = 1
    for _ in range(m):
        n_keys *= p
    best_np = np.full(n_keys, np.iinfo(np.int64).max, dtype=np.int64)
    mass_np = np.ascontiguousarray(mass, dtype=np.int64)
    cdef int64_t[:] best = best_np
    cdef const int64_t[:] w = mass_np
    cdef const int64_t[:, :] Kv = K
    if p == 2 and n <= 62:
        return _gray_f2(Kv, w, best, best_np, n, m, n_keys)
    return _odometer(Kv, w, best, best_np, n, m, n_keys, p)


cdef object _gray_f2(const int64_t[:, :] Kv, const int64_t[:] w, int64_t[:] best, object best_np,
                     int n, int m, int64_t n_keys):
    # vector x is packed with face i at bit (n-1-i) so integer order is lexicographic
    rows_np = np.zeros(n, dtype=np.uint64)
    argc_np = np.zeros(n_keys, dtype=np.uint64)
    cdef uint64_t[:] rows = rows_np
    cdef uint64_t[:] argc = argc_np
    cdef int i, j, bit, face
    cdef uint64_t r
    for i in range(n):
        r = 0
        for j in range(m):
            if Kv[i, j] & 1:
                r |= (<uint64_t>1) << (m - 1 - j)
        rows[i] = r
    cdef uint64_t x = 0, key = 0, step, total = (<uint64_t>1) << n
    cdef int64_t cur = 0
    with nogil:
        best[0] = 0
        argc[0] = 0
        for step in range(1, total):
            bit = _ctz(step)
            face = n - 1 - bit
            x ^= (<uint64_t>1) << bit
            key ^= rows[face]
            if (x >> bit) & 1:
                cur += w[face]
            else:
                cur -= w[face]
            if cur < best[key] or (cur == best[key] and x < argc[key]):
                best[key] = cur
                argc[key] = x
    arg = np.zeros((n_keys, n), dtype=np.int64)
    for i in range(n):
        arg[:, i] = (argc_np >> np.uint64(n - 1 - i)) & np.uint64(1)
    return best_np, arg


cdef object _odometer(const int64_t[:, :] Kv, const int64_t[:] w, int64_t[:] best, object best_np,
                      int n, int m, int64_t n_keys, int p):
    arg_np = np.zeros((n_keys, n), dtype=np.int64)
    cdef int64_t[:, :] arg = arg_np
    x_np = np.zeros(n, dtype=np.int64)
    key_np = np.zeros(m, dtype=np.int64)
    pw_np = np.zeros(m, dtype=np.int64)
    cdef int64_t[:] x = x_np
    cdef int64_t[:] key = key_np
    cdef int64_t[:] pw = pw_np
    cdef int i, j, pos
    cdef int64_t code, cur = 0, acc = 1
    for j in range(m - 1, -1, -1):
        pw[j] = acc
        acc *= p
    best[0] = 0
    with nogil:
        while True:
            # advance the odometer (last face fastest)
            pos = n - 1
            while pos >= 0 and x[pos] == p - 1:
                x[pos] = 0
                cur -= w[pos]
                for j in range(m):
                    key[j] = (key[j] - (p - 1) * Kv[pos, j]) % p
                    if key[j] < 0:
                        key[j] += p
                pos -= 1
            if pos < 0:
                break
            if x[pos] == 0:
                cur += w[pos]
            x[pos] += 1
            for j in range(m):
                key[j] = (key[j] + Kv[pos, j]) % p
            code = 0
            for j in range(m):
                code += key[j] * pw[j]
            # lexicographic enumeration: the first minimiser per key wins
            if cur < best[code]:
                best[code] = cur
                for i in range(n):
                    arg[code, i] = x[i]
    return best_np, arg_np


def star_search(table, inverse, src, fixed, expo, umass, int m):
    """Same contract as ``_kernels_py.star_search``."""
    cdef const int64_t[:, :] T = np.ascontiguousarray(table, dtype=np.int64)
    cdef const int64_t[:] inv = np.ascontiguousarray(inverse, dtype=np.int64)
    cdef const int64_t[:, :] S = np.ascontiguousarray(src, dtype=np.int64)
    cdef const int64_t[:, :] Fx = np.ascontiguousarray(fixed, dtype=np.int64)
    cdef const int64_t[:, :] E = np.ascontiguousarray(expo, dtype=np.int64)
    cdef const int64_t[:] um = np.ascontiguousarray(umass, dtype=np.int64)
    cdef int q = T.shape[0]
    cdef int n_u = S.shape[0]
    cdef int L = S.shape[1]
    a_np = np.zeros(m, dtype=np.int64)
    best_np = np.zeros(m, dtype=np.int64)
    cdef int64_t[:] a = a_np
    cdef int64_t[:] best = best_np
    cdef int64_t best_mass = -1, tot, acc, term
    cdef int u, l, s, pos, i
    with nogil:
        while True:
            tot = 0
            for u in range(n_u):
                acc = 0
                for l in range(L):
                    s = S[u, l]
                    term = a[s] if s >= 0 else Fx[u, l]
                    if E[u, l] < 0:
                        term = inv[term]
                    acc = T[acc, term]
                if acc != 0:
                    tot += um[u]
            if best_mass < 0 or tot < best_mass:
                best_mass = tot
                for i in range(m):
                    best[i] = a[i]
            pos = m - 1
            while pos >= 0 and a[pos] == q - 1:
                a[pos] = 0
                pos -= 1
            if pos < 0:
                break
            a[pos] += 1
    return int(best_mass), best_np
