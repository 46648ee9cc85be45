"""Finite coefficient groups backed by multiplication tables.

Elements are the indices ``0..n-1`` with the identity at index 0.  Cyclic
groups use the natural labelling (element ``i`` is the residue ``i``), so
table arithmetic and modular arithmetic agree.
"""

from __future__ import annotations

import re
from itertools import permutations
from math import gcd

import numpy as np


class GroupError(ValueError):
    """Raised for invalid group tables or unknown group names."""


class FiniteGroup:
    """A finite group given by its Cayley table.

    ``table[a, b]`` is the index of ``a * b``.  The axioms are verified at
    construction.
    """

    def __init__(self, name: str, table, labels=None, check: bool = True) -> None:
        table = np.asarray(table, dtype=np.int64)
        n = table.shape[0]
        if table.shape != (n, n) or n == 0:
            raise GroupError("Cayley table must be square and nonempty")
        self.name = name
        self.table = table
        self.table.setflags(write=False)
        self.order = n
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if check:
            self._check()
        inv = np.empty(n, dtype=np.int64)
        for a in range(n):
            inv[a] = int(np.flatnonzero(table[a] == 0)[0])
        self.inverse = inv
        self.inverse.setflags(write=False)
        self.is_abelian = bool(np.array_equal(table, table.T))
        self._cyclic_modulus = None

    def _check(self) -> None:
        t, n = self.table, self.order
        if t.min() < 0 or t.max() >= n:
            raise GroupError("table entries out of range")
        ar = np.arange(n)
        if not (np.array_equal(t[0], ar) and np.array_equal(t[:, 0], ar)):
            raise GroupError("index 0 must be the identity")
        for row in t:
            if len(set(row.tolist())) != n:
                raise GroupError("table is not a Latin square")
        # associativity: t[t[a,b],c] == t[a,t[b,c]]
        lhs = t[t, :]  # lhs[a, b, c] = t[t[a,b], c]
        rhs = t[:, t]  # rhs[a, b, c] = t[a, t[b,c]]
        if not np.array_equal(lhs, rhs):
            raise GroupError("table is not associative")

    # element-wise helpers (accept ints or integer arrays)
    def mul(self, a, b):
        return self.table[a, b]

    def inv(self, a):
        return self.inverse[a]

    def power(self, a, sign: int):
        """``a`` if ``sign`` is +1, else ``a^{-1}``."""
        return a if sign > 0 else self.inverse[a]

    def product(self, elements) -> int:
        acc = 0
        for e in elements:
            acc = int(self.table[acc, e])
        return acc

    @property
    def identity(self) -> int:
        return 0

    @property
    def cyclic_modulus(self) -> int | None:
        """``m`` when this group is ``Z_m`` with the natural labelling."""
        return self._cyclic_modulus

    @property
    def prime_field(self) -> int | None:
        m = self._cyclic_modulus
        if m is not None and m > 1 and all(m % p for p in range(2, int(m**0.5) + 1)):
            return m
        return None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteGroup) and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.name, self.order))

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


def cyclic(m: int) -> FiniteGroup:
    """The cyclic group ``Z_m``."""
    if not 1 <= m <= 64:
        raise GroupError("cyclic groups are supported for 1 <= m <= 64")
    ar = np.arange(m)
    G = FiniteGroup(f"Z{m}", (ar[:, None] + ar[None, :]) % m, check=False)
    G._cyclic_modulus = m
    return G


def symmetric(n: int) -> FiniteGroup:
    """The symmetric group ``S_n`` (``n <= 5``); composition ``(a*b)(i) = a(b(i))``."""
    if not 1 <= n <= 5:
        raise GroupError("symmetric groups are supported for n <= 5")
    perms = sorted(permutations(range(n)))
    pos = {p: i for i, p in enumerate(perms)}
    table = [[pos[tuple(a[b[i]] for i in range(n))] for b in perms] for a in perms]
    return FiniteGroup(f"S{n}", table, labels=perms)


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """``G x H`` with element ``(g, h)`` at index ``g * |H| + h``."""
    nG, nH = G.order, H.order
    a = np.arange(nG * nH)
    g, h = a // nH, a % nH
    table = G.table[g[:, None], g[None, :]] * nH + H.table[h[:, None], h[None, :]]
    labels = [(G.labels[x], H.labels[y]) for x, y in zip(g, h)]
    return FiniteGroup(f"{G.name}x{H.name}", table, labels=labels, check=False)


_NAME = re.compile(r"^(Z|S)(\d+)$")


def group_from_name(name: str) -> FiniteGroup:
    """Parse names such as ``Z2``, ``Z5``, ``S3`` or ``Z2xZ2xS3``."""
    parts = name.replace("×", "x").split("x")
    groups = []
    for part in parts:
        m = _NAME.match(part.strip())
        if not m:
            raise GroupError(f"unknown group {name!r}")
        kind, size = m.group(1), int(m.group(2))
        groups.append(cyclic(size) if kind == "Z" else symmetric(size))
    G = groups[0]
    for H in groups[1:]:
        G = direct_product(G, H)
    if len(groups) > 1:
        G.name = "x".join(g.name for g in groups)
    return G


def is_cyclic_prime(G: FiniteGroup) -> bool:
    return G.prime_field is not None


def element_order(G: FiniteGroup, a: int) -> int:
    k, x = 1, a
    while x != 0:
        x = int(G.table[x, a])
        k += 1
    return k


def exponent(G: FiniteGroup) -> int:
    e = 1
    for a in range(G.order):
        o = element_order(G, a)
        e = e * o // gcd(e, o)
    return e
