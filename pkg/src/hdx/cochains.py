"""Asymmetric cochains with coefficients in a finite group.

A k-cochain stores one group element per canonical k-face.  On an oriented
face ``pi(s)`` it evaluates to ``f(s)`` or ``f(s)^{-1}`` according to the sign
of ``pi``.

Coboundaries.  For abelian groups the alternating sum
``df(t) = sum_i (-1)^i f(t_i)`` is used at every level.  For non-abelian
groups the levels -1, 0, 1 use

    d h(v)    = h(())
    d h(vu)   = h(v) h(u)^{-1}
    d h(vuw)  = h(vu) h(uw) h(wv)

On abelian groups the level-0 product formula is the negative of the
alternating sum; both have the same image and kernel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .complex import SimplicialComplex, canonical
from .groups import FiniteGroup, group_from_name
from .linalg import iter_assignments, nullspace_mod_p, rref_mod_p

DEFAULT_ENUMERATION_BUDGET = 1 << 20


class BudgetExceeded(RuntimeError):
    """The requested enumeration is larger than the configured budget."""


class CochainError(ValueError):
    """Mismatched or invalid cochain data."""


class Space(str, Enum):
    """Which subset of ``C^k`` to work with."""

    ALL = "C"
    COBOUNDARIES = "B"
    COCYCLES = "Z"


@dataclass(frozen=True, eq=False)
class Cochain:
    complex: SimplicialComplex
    level: int
    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.int64).reshape(-1)
        if vals.size != self.complex.n_faces(self.level):
            raise CochainError(
                f"expected {self.complex.n_faces(self.level)} values at level {self.level}, got {vals.size}"
            )
        if vals.size and (vals.min() < 0 or vals.max() >= self.group.order):
            raise CochainError("values must be element indices of the group")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, face: Sequence[int]) -> int:
        """Value on an oriented face (any vertex order)."""
        key, sign = canonical(face)
        if len(key) != self.level + 1:
            raise CochainError(f"face {tuple(face)} has the wrong size for level {self.level}")
        return int(self.group.power(self.values[self.complex.index(key)], sign))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        return (
            self.complex is other.complex
            and self.level == other.level
            and self.group == other.group
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.level, self.values.tobytes()))

    def with_values(self, values) -> "Cochain":
        return Cochain(self.complex, self.level, self.group, values)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values != 0)

    def to_json(self) -> dict:
        return {"level": self.level, "group": self.group.name, "values": [int(v) for v in self.values]}


def cochain_from_json(X: SimplicialComplex, data: dict | str) -> Cochain:
    if isinstance(data, str):
        data = json.loads(data)
    return Cochain(X, int(data["level"]), group_from_name(data["group"]), data["values"])


def zero_cochain(X: SimplicialComplex, k: int, G: FiniteGroup) -> Cochain:
    return Cochain(X, k, G, np.zeros(X.n_faces(k), dtype=np.int64))


def random_cochain(X: SimplicialComplex, k: int, G: FiniteGroup, rng: np.random.Generator) -> Cochain:
    return Cochain(X, k, G, rng.integers(0, G.order, size=X.n_faces(k)))


def _check_coboundary_level(X: SimplicialComplex, G: FiniteGroup, k: int) -> None:
    if k < -1 or k + 1 > X.dimension:
        raise CochainError(f"no coboundary from level {k} in a {X.dimension}-dimensional complex")
    if not G.is_abelian and k >= 2:
        raise CochainError("non-abelian coboundaries are defined only up to level 1")


def coboundary_values(X: SimplicialComplex, G: FiniteGroup, k: int, values: np.ndarray) -> np.ndarray:
    """Vectorized coboundary: ``values`` has shape ``(..., |X(k)|)``."""
    _check_coboundary_level(X, G, k)
    values = np.asarray(values, dtype=np.int64)
    n_up = X.n_faces(k + 1)
    if k == -1:
        return np.broadcast_to(values[..., :1], values.shape[:-1] + (n_up,)).copy()
    B = X.boundary_indices(k + 1)
    T, inv = G.table, G.inverse
    if G.is_abelian:
        acc = values[..., B[:, 0]]
        for i in range(1, k + 2):
            term = values[..., B[:, i]]
            acc = T[acc, inv[term] if i % 2 else term]
        return acc
    if k == 0:
        return T[values[..., B[:, 1]], inv[values[..., B[:, 0]]]]
    # k == 1: h(vu) h(uw) h(vw)^{-1}, with t_0 = uw, t_1 = vw, t_2 = vu
    return T[T[values[..., B[:, 2]], values[..., B[:, 0]]], inv[values[..., B[:, 1]]]]


def coboundary(f: Cochain) -> Cochain:
    """The coboundary ``df`` at level ``k + 1``."""
    return Cochain(f.complex, f.level + 1, f.group, coboundary_values(f.complex, f.group, f.level, f.values))


def weight_mass(X: SimplicialComplex, k: int, values: np.ndarray) -> np.ndarray:
    """Integer mass (numerator over ``X.denominator(k)``) of non-identity entries."""
    mass = X.mass(k)
    nz = np.asarray(values) != 0
    return nz.astype(mass.dtype) @ mass


def weight(f: Cochain) -> Fraction:
    """``Pr_k[f(t) != e]``."""
    return Fraction(int(weight_mass(f.complex, f.level, f.values)), f.complex.denominator(f.level))


def _check_compatible(f: Cochain, g: Cochain) -> None:
    if f.complex is not g.complex or f.level != g.level or f.group != g.group:
        raise CochainError("cochains live on different complexes, levels or groups")


def distance(f: Cochain, g: Cochain) -> Fraction:
    """``Pr_k[f(t) != g(t)]``."""
    _check_compatible(f, g)
    X, k = f.complex, f.level
    mass = X.mass(k)
    m = (f.values != g.values).astype(mass.dtype) @ mass
    return Fraction(int(m), X.denominator(k))


# ----------------------------------------------------------------- spaces
def coboundary_matrix_mod_p(X: SimplicialComplex, k: int, p: int) -> np.ndarray:
    """Matrix of the abelian coboundary ``C^k -> C^{k+1}`` over ``Z_p``."""
    n_up, n = X.n_faces(k + 1), X.n_faces(k)
    M = np.zeros((n_up, n), dtype=np.int64)
    if k == -1:
        M[:, 0] = 1
        return M
    B = X.boundary_indices(k + 1)
    rows = np.arange(n_up)
    for i in range(k + 2):
        M[rows, B[:, i]] += 1 if i % 2 == 0 else -1
    return M % p


def space_basis_mod_p(X: SimplicialComplex, k: int, p: int, tag: Space) -> np.ndarray:
    """RREF basis (rows) of ``B^k``, ``Z^k`` or ``C^k`` over ``Z_p``."""
    n = X.n_faces(k)
    if tag == Space.ALL:
        return np.eye(n, dtype=np.int64)
    if tag == Space.COBOUNDARIES:
        if k == -1:
            return np.zeros((0, 1), dtype=np.int64)
        D = coboundary_matrix_mod_p(X, k - 1, p)
        return rref_mod_p(D.T, p)[0]
    if k == X.dimension:
        return np.eye(n, dtype=np.int64)
    D = coboundary_matrix_mod_p(X, k, p)
    Z = nullspace_mod_p(D, p, n)
    return rref_mod_p(Z, p)[0] if Z.size else np.zeros((0, n), dtype=np.int64)


def _space_size_generic(X: SimplicialComplex, k: int, G: FiniteGroup, tag: Space) -> int:
    if tag == Space.COBOUNDARIES:
        return G.order ** X.n_faces(k - 1) if k >= 0 else 1
    return G.order ** X.n_faces(k)


def space_elements(
    X: SimplicialComplex, k: int, G: FiniteGroup, tag: Space, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> np.ndarray:
    """All elements of the space as rows, without duplicates, in lexicographic order."""
    tag = Space(tag)
    p = G.prime_field
    if p is not None:
        basis = space_basis_mod_p(X, k, p, tag)
        r = basis.shape[0]
        if p**r > budget:
            raise BudgetExceeded(f"space has {p}^{r} elements, budget {budget}")
        if r == 0:
            return np.zeros((1, X.n_faces(k)), dtype=np.int64)
        rows = np.concatenate([(c @ basis) % p for c in iter_assignments(p, r)])
        return np.unique(rows, axis=0)
    size = _space_size_generic(X, k, G, tag)
    if size > budget:
        raise BudgetExceeded(f"enumeration of {size} cochains exceeds budget {budget}")
    if tag == Space.COBOUNDARIES:
        if k == -1:
            return np.zeros((1, 1), dtype=np.int64)
        parts = [coboundary_values(X, G, k - 1, g) for g in iter_assignments(G.order, X.n_faces(k - 1))]
        return np.unique(np.concatenate(parts), axis=0)
    parts = []
    for c in iter_assignments(G.order, X.n_faces(k)):
        if tag == Space.COCYCLES and k < X.dimension:
            c = c[np.all(coboundary_values(X, G, k, c) == 0, axis=1)]
        parts.append(c)
    return np.concatenate(parts)


def enumerate_space(
    X: SimplicialComplex, k: int, G: FiniteGroup, tag: Space | str, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> Iterator[Cochain]:
    """Stream the cochains of ``C^k``, ``B^k`` or ``Z^k``."""
    for row in space_elements(X, k, G, Space(tag), budget):
        yield Cochain(X, k, G, row)


@dataclass(frozen=True)
class DistanceResult:
    value: Fraction
    witness: Cochain
    method: str
    exact: bool = True


def nearest_row(target: np.ndarray, rows: np.ndarray, mass: np.ndarray, chunk: int = 1 << 14) -> tuple[int, int]:
    """Index of the row minimising the mismatch mass to ``target`` and that mass.

    Ties go to the lexicographically smallest row.
    """
    best_mass, best_rows = None, []
    for start in range(0, rows.shape[0], chunk):
        block = rows[start:start + chunk]
        m = (block != target).astype(mass.dtype) @ mass
        lo = m.min()
        if best_mass is None or lo < best_mass:
            best_mass, best_rows = lo, list(start + np.flatnonzero(m == lo))
        elif lo == best_mass:
            best_rows.extend(start + np.flatnonzero(m == lo))
    cand = rows[best_rows]
    order = np.lexsort(cand.T[::-1])
    return int(best_rows[order[0]]), int(best_mass)


def distance_to_space(
    f: Cochain,
    tag: Space | str,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    method: str = "auto",
) -> DistanceResult:
    """Exact ``dist(f, B^k)`` or ``dist(f, Z^k)`` with a minimising witness.

    ``method`` is ``"exhaustive"``, ``"milp"`` or ``"auto"`` (exhaustive when
    the space fits in ``budget``, otherwise the integer program).
    """
    tag = Space(tag)
    X, k, G = f.complex, f.level, f.group
    if method in ("auto", "exhaustive"):
        try:
            rows = space_elements(X, k, G, tag, budget)
        except BudgetExceeded:
            if method == "exhaustive":
                raise
        else:
            i, m = nearest_row(f.values, rows, X.mass(k))
            return DistanceResult(Fraction(m, X.denominator(k)), f.with_values(rows[i]), "exhaustive")
    from .milp import nearest_in_space_milp

    return nearest_in_space_milp(f, tag)
