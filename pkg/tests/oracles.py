"""Slow, direct reimplementations used to cross-check the package.

Nothing here imports the package's algorithms: faces are plain tuples,
group elements are handled through the multiplication table only, and
every search is a Python loop over itertools products.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import comb


def closure(tops):
    """All faces (sorted tuples) of the complex generated by ``tops``, by size."""
    out = {}
    for t in tops:
        t = tuple(sorted(t))
        for r in range(len(t) + 1):
            for s in combinations(t, r):
                out.setdefault(r, set()).add(s)
    return {r: sorted(v) for r, v in out.items()}


def face_probs(tops, weights=None):
    """``Pr_k(s)``: choose a top face by weight, then a uniform subset of size ``k+1``."""
    tops = [tuple(sorted(t)) for t in tops]
    if weights is None:
        weights = [Fraction(1, len(tops))] * len(tops)
    d1 = len(tops[0])
    probs = {}
    for r in range(d1 + 1):
        for t, w in zip(tops, weights):
            for s in combinations(t, r):
                probs[s] = probs.get(s, Fraction(0)) + w / comb(d1, r)
    return probs


def sign_of(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class Table:
    """A finite group given by its Cayley table (identity is element 0)."""

    def __init__(self, table):
        self.t = [list(map(int, row)) for row in table]
        self.n = len(self.t)
        self.inv = [next(b for b in range(self.n) if self.t[a][b] == 0) for a in range(self.n)]

    def mul(self, a, b):
        return self.t[a][b]

    def prod(self, xs):
        acc = 0
        for x in xs:
            acc = self.t[acc][x]
        return acc


def evaluate(values: dict, face, T: Table):
    """Oriented value of an abelian (or level-0/1) cochain stored on sorted faces."""
    key = tuple(sorted(face))
    v = values[key]
    return v if sign_of(face) == 1 else T.inv[v]


def coboundary_abelian(values: dict, faces_up, T: Table):
    out = {}
    for t in faces_up:
        acc = 0
        for i in range(len(t)):
            x = values[t[:i] + t[i + 1:]]
            acc = T.mul(acc, x if i % 2 == 0 else T.inv[x])
        out[t] = acc
    return out


def coboundary_nonabelian(values: dict, faces_up, T: Table, level: int):
    out = {}
    for t in faces_up:
        if level == -1:
            out[t] = values[()]
        elif level == 0:
            u, v = t
            out[t] = T.mul(values[(u,)], T.inv[values[(v,)]])
        else:
            a, b, c = t
            out[t] = T.prod([values[(a, b)], values[(b, c)], T.inv[values[(a, c)]]])
    return out


def coboundary(values, faces_up, T: Table, level: int, abelian: bool):
    if level == -1:
        return {t: values[()] for t in faces_up}
    if abelian:
        return coboundary_abelian(values, faces_up, T)
    return coboundary_nonabelian(values, faces_up, T, level)


def mismatch(a: dict, b: dict, probs: dict):
    return sum((probs[s] for s in a if a[s] != b[s]), Fraction(0))


def all_cochains(faces, n):
    for vals in product(range(n), repeat=len(faces)):
        yield dict(zip(faces, vals))


def coboundary_space(faces_by_size, k, T: Table, abelian: bool):
    """Distinct coboundaries ``dg`` for ``g`` in ``C^{k-1}``."""
    below = faces_by_size[k]
    seen = {}
    for g in all_cochains(below, T.n):
        d = coboundary(g, faces_by_size[k + 1], T, k - 1, abelian)
        seen[tuple(d[s] for s in faces_by_size[k + 1])] = d
    return list(seen.values())


def h_coboundary(tops, k, table, abelian=True, weights=None):
    """``min over f not in B^k of wt(df) / dist(f, B^k)``; 0 with nontrivial cohomology; None if C^k = B^k."""
    T = Table(table)
    fb = closure(tops)
    probs = face_probs(tops, weights)
    B = coboundary_space(fb, k, T, abelian)
    best = None
    for f in all_cochains(fb[k + 1], T.n):
        dist = min(mismatch(f, b, probs) for b in B)
        if dist == 0:
            continue
        df = coboundary(f, fb[k + 2], T, k, abelian)
        w = sum((probs[s] for s in df if df[s] != 0), Fraction(0))
        if w == 0:
            return Fraction(0)
        r = w / dist
        if best is None or r < best:
            best = r
    return best


def nearest_coboundary_distance(f: dict, tops, k, table, abelian=True):
    T = Table(table)
    fb = closure(tops)
    probs = face_probs(tops)
    return min(mismatch(f, b, probs) for b in coboundary_space(fb, k, T, abelian))


def free_reduce(word):
    """Cancel ``x y x`` to ``x`` repeatedly (backtracks on vertex walks), naive fixpoint loop."""
    w = list(word)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 2):
            if w[i] == w[i + 2]:
                del w[i + 1:i + 3]
                changed = True
                break
    return tuple(w)
