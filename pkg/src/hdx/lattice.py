"""Geometric lattices, subspace lattices over small fields and their order complexes.

Order complexes are exposed in two forms: an ordinary ``SimplicialComplex``
for small lattices, and a ``LatticeComplexView`` that answers adjacency
queries from the lattice order without enumerating top faces.  The view is
what the cone builders use, so they also run on links of large buildings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .complex import SimplicialComplex

DEFAULT_ELEMENT_BUDGET = 20_000
DEFAULT_VECTOR_BUDGET = 1 << 16


class LatticeError(ValueError):
    """Malformed lattice input or a failed lattice axiom."""


# ------------------------------------------------------------------ fields
class FiniteField:
    """Arithmetic tables for ``F_q`` with ``q`` in ``{2, 3, 4, 5}``.

    ``F_4`` is ``F_2[x]/(x^2 + x + 1)`` with ``x`` stored as 2.
    """

    def __init__(self, q: int) -> None:
        if q not in (2, 3, 4, 5):
            raise LatticeError(f"unsupported field size {q}")
        self.q = q
        if q == 4:
            add = np.array([[a ^ b for b in range(4)] for a in range(4)], dtype=np.int64)

            def pmul(a, b):
                r = 0
                for i in range(2):
                    if (b >> i) & 1:
                        r ^= a << i
                if r & 4:
                    r ^= 0b111
                return r

            mul = np.array([[pmul(a, b) for b in range(4)] for a in range(4)], dtype=np.int64)
        else:
            r = np.arange(q)
            add = (r[:, None] + r[None, :]) % q
            mul = (r[:, None] * r[None, :]) % q
        self.add = add
        self.mul = mul
        self.neg = np.array([int(np.flatnonzero(add[a] == 0)[0]) for a in range(q)], dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.flatnonzero(mul[a] == 1)[0])
        self.inv = inv


@lru_cache(maxsize=None)
def field(q: int) -> FiniteField:
    return FiniteField(q)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def rref(rows: Sequence[Sequence[int]], F: FiniteField, n: int) -> tuple[tuple[int, ...], ...]:
    """Canonical reduced row echelon form (zero rows dropped)."""
    A = [list(int(x) for x in r) for r in rows]
    out: list[list[int]] = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = F.inv[A[r][c]]
        A[r] = [int(F.mul[inv, x]) for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                m = F.neg[A[i][c]]
                A[i] = [int(F.add[a, F.mul[m, b]]) for a, b in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    out = [tuple(row) for row in A[:r]]
    return tuple(out)


def _span_codes(rows: tuple, F: FiniteField, n: int) -> np.ndarray:
    """Integer codes (base ``q``, first coordinate most significant) of all span vectors."""
    q = F.q
    k = len(rows)
    weights = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    if k == 0:
        return np.zeros(1, dtype=np.int64)
    R = np.array(rows, dtype=np.int64)
    coeffs = np.array(list(product(range(q), repeat=k)), dtype=np.int64)
    vec = np.zeros((coeffs.shape[0], n), dtype=np.int64)
    for i in range(k):
        vec = F.add[vec, F.mul[coeffs[:, i][:, None], R[i][None, :]]]
    return vec @ weights


# ---------------------------------------------------------------- lattices
class GeometricLattice:
    """A finite graded lattice given by its order relation.

    ``leq[x, y]`` is true when ``x <= y``.  Joins and meets are derived from
    the order.  ``homogeneous`` records (without checking) that the
    automorphism group is transitive on maximal chains.
    """

    def __init__(self, rank: Sequence[int], leq: np.ndarray, labels: Sequence | None = None, homogeneous: bool = False) -> None:
        self.rank = np.asarray(rank, dtype=np.int64)
        self.leq = np.asarray(leq, dtype=bool)
        m = self.rank.size
        if self.leq.shape != (m, m):
            raise LatticeError("order matrix shape does not match the element count")
        self.labels = list(labels) if labels is not None else list(range(m))
        self.homogeneous = homogeneous
        bottoms = np.flatnonzero(self.leq.all(axis=1))
        tops = np.flatnonzero(self.leq.all(axis=0))
        if bottoms.size != 1 or tops.size != 1:
            raise LatticeError("a lattice needs a unique bottom and top")
        self.bottom, self.top = int(bottoms[0]), int(tops[0])
        if self.rank[self.bottom] != 0:
            raise LatticeError("the bottom element must have rank 0")
        self._join: dict = {}
        self._meet: dict = {}

    @property
    def n_elements(self) -> int:
        return int(self.rank.size)

    @property
    def height(self) -> int:
        return int(self.rank[self.top])

    @property
    def atoms(self) -> list[int]:
        return [int(x) for x in np.flatnonzero(self.rank == 1)]

    def elements_of_rank(self, r: int) -> list[int]:
        return [int(x) for x in np.flatnonzero(self.rank == r)]

    def join(self, x: int, y: int) -> int:
        key = (min(x, y), max(x, y))
        if key not in self._join:
            ub = np.flatnonzero(self.leq[x] & self.leq[y])
            least = ub[np.all(self.leq[np.ix_(ub, ub)], axis=1)]
            if least.size != 1:
                raise LatticeError(f"no unique join of {x} and {y}")
            self._join[key] = int(least[0])
        return self._join[key]

    def meet(self, x: int, y: int) -> int:
        key = (min(x, y), max(x, y))
        if key not in self._meet:
            lb = np.flatnonzero(self.leq[:, x] & self.leq[:, y])
            great = lb[np.all(self.leq[np.ix_(lb, lb)], axis=0)]
            if great.size != 1:
                raise LatticeError(f"no unique meet of {x} and {y}")
            self._meet[key] = int(great[0])
        return self._meet[key]

    def join_all(self, xs) -> int:
        out = self.bottom
        for x in xs:
            out = self.join(out, int(x))
        return out

    def check_axioms(self) -> None:
        """Exhaustively check the partial order, grading, semimodularity and atomicity."""
        L = self.leq
        m = self.n_elements
        if not np.all(np.diag(L)):
            raise LatticeError("order is not reflexive")
        if np.any(L & L.T & ~np.eye(m, dtype=bool)):
            raise LatticeError("order is not antisymmetric")
        if np.any((L.astype(np.int64) @ L.astype(np.int64) > 0) & ~L):
            raise LatticeError("order is not transitive")
        # grading: covers raise the rank by exactly one
        strict = L & ~np.eye(m, dtype=bool)
        for x in range(m):
            above = np.flatnonzero(strict[x])
            for y in above:
                between = strict[x] & strict[:, y]
                if not between.any() and self.rank[y] != self.rank[x] + 1:
                    raise LatticeError(f"cover {x} < {y} does not increase rank by one")
        atoms = self.atoms
        for x, y in combinations(range(m), 2):
            j, mt = self.join(x, y), self.meet(x, y)
            if self.rank[x] + self.rank[y] < self.rank[j] + self.rank[mt]:
                raise LatticeError(f"semimodularity fails at ({x}, {y})")
        for x in range(m):
            below = [a for a in atoms if L[a, x]]
            if self.join_all(below) != x:
                raise LatticeError(f"element {x} is not a join of atoms")

    def to_json(self) -> dict:
        return {
            "elements": self.n_elements,
            "rank": [int(r) for r in self.rank],
            "leq": [[int(j) for j in np.flatnonzero(row)] for row in self.leq],
            "atoms": self.atoms,
            "homogeneous": self.homogeneous,
        }


def lattice_from_json(data: dict) -> GeometricLattice:
    tag = data.get("join")
    if isinstance(tag, str) and tag.startswith("subspace:"):
        q, n = (int(x) for x in tag.split(":", 1)[1].split(","))
        return subspace_lattice(n, q)
    m = int(data["elements"])
    leq = np.zeros((m, m), dtype=bool)
    for i, row in enumerate(data["leq"]):
        leq[i, row] = True
    return GeometricLattice(data["rank"], leq, homogeneous=bool(data.get("homogeneous", False)))


class SubspaceLattice(GeometricLattice):
    """All subspaces of ``F_q^n``; element labels are canonical RREF row tuples."""

    def __init__(self, n: int, q: int, budget: int = DEFAULT_ELEMENT_BUDGET, vector_budget: int = DEFAULT_VECTOR_BUDGET):
        if n < 1:
            raise LatticeError("ambient dimension must be positive")
        F = field(q)
        total = sum(gaussian_binomial(n, k, q) for k in range(n + 1))
        if total > budget:
            raise LatticeError(f"{total} subspaces exceed the element budget {budget}")
        if q**n > vector_budget:
            raise LatticeError(f"{q}^{n} vectors exceed the vector budget {vector_budget}")
        self.n, self.q, self.field = n, q, F
        spaces: list[tuple] = []
        for k in range(n + 1):
            for pivots in combinations(range(n), k):
                free = [(r, c) for r in range(k) for c in range(pivots[r] + 1, n) if c not in pivots]
                for vals in product(range(q), repeat=len(free)):
                    rows = [[0] * n for _ in range(k)]
                    for r, p in enumerate(pivots):
                        rows[r][p] = 1
                    for (r, c), v in zip(free, vals):
                        rows[r][c] = v
                    spaces.append(tuple(tuple(row) for row in rows))
        self.index_of = {s: i for i, s in enumerate(spaces)}
        nbits = q**n
        sets = []
        for s in spaces:
            mask = np.zeros(nbits, dtype=bool)
            mask[_span_codes(s, F, n)] = True
            sets.append(mask)
        S = np.array(sets)
        # x <= y iff span(x) has no vector outside span(y)
        leq = (S.astype(np.int64) @ (~S).T.astype(np.int64)) == 0
        self._sets = S
        super().__init__([len(s) for s in spaces], leq, labels=spaces, homogeneous=True)

    def space(self, x: int) -> tuple:
        return self.labels[x]

    def join(self, x: int, y: int) -> int:
        key = (min(x, y), max(x, y))
        if key not in self._join:
            self._join[key] = self.index_of[rref(self.labels[x] + self.labels[y], self.field, self.n)]
        return self._join[key]

    def meet(self, x: int, y: int) -> int:
        key = (min(x, y), max(x, y))
        if key not in self._meet:
            both = self._sets[x] & self._sets[y]
            cand = np.flatnonzero(self.rank == int(round(math.log(int(both.sum()), self.q))))
            hit = [int(c) for c in cand if np.array_equal(self._sets[c], both)]
            self._meet[key] = hit[0]
        return self._meet[key]


def subspace_lattice(n: int, q: int = 2, budget: int = DEFAULT_ELEMENT_BUDGET) -> SubspaceLattice:
    return SubspaceLattice(n, q, budget)


def boolean_lattice(n: int) -> GeometricLattice:
    """Subsets of ``range(n)`` ordered by inclusion (labels are bitmasks)."""
    m = 1 << n
    idx = np.arange(m)
    leq = (idx[:, None] & ~idx[None, :]) == 0
    rank = [bin(x).count("1") for x in range(m)]
    return GeometricLattice(rank, leq, labels=list(range(m)), homogeneous=True)


# ------------------------------------------------------- order complexes
class LatticeComplexView:
    """Order complex of a ranked poset restricted to a set of colors.

    Vertices are numbered ``0..n-1``; ``leq`` is the order between them and
    faces are chains with distinct colors.  Only adjacency queries are
    answered, so no face list is ever materialised unless ``complex`` is
    called.
    """

    def __init__(self, color: Sequence[int], leq: np.ndarray, labels: Sequence | None = None, homogeneous: bool = False):
        self.color = np.asarray(color, dtype=np.int64)
        self.leq = np.asarray(leq, dtype=bool)
        self.n_vertices = int(self.color.size)
        self.labels = list(labels) if labels is not None else list(range(self.n_vertices))
        self.colors = tuple(sorted({int(c) for c in self.color}))
        self.by_color = {c: np.flatnonzero(self.color == c) for c in self.colors}
        self.comparable = self.leq | self.leq.T
        self.homogeneous = homogeneous

    def is_face(self, face: Sequence[int]) -> bool:
        face = list(face)
        cols = [int(self.color[v]) for v in face]
        if len(set(cols)) != len(cols) or len(set(face)) != len(face):
            return False
        return all(self.comparable[a, b] for a, b in combinations(face, 2))

    def find_comparable(self, S: Sequence[int], c: int) -> int | None:
        """Smallest vertex of color ``c`` comparable to all of ``S`` (or ``None``)."""
        cand = self.by_color.get(c)
        if cand is None:
            return None
        ok = np.ones(cand.size, dtype=bool)
        for x in S:
            cx = int(self.color[x])
            if cx == c:
                ok &= cand == x
            elif cx < c:
                ok &= self.leq[x, cand]
            else:
                ok &= self.leq[cand, x]
        hit = cand[ok]
        return int(hit[0]) if hit.size else None

    def neighbors(self, v: int) -> np.ndarray:
        nb = self.comparable[v].copy()
        nb[v] = False
        return np.flatnonzero(nb)

    def faces(self, level: int):
        """All faces of size ``level + 1`` as sorted tuples, in increasing order."""
        if level < 0:
            yield ()
            return
        def extend(chain, start_color_pos):
            if len(chain) == level + 1:
                yield tuple(sorted(chain))
                return
            for ci in range(start_color_pos, len(self.colors)):
                c = self.colors[ci]
                for v in self.by_color[c]:
                    v = int(v)
                    if all(self.comparable[v, u] for u in chain):
                        yield from extend(chain + [v], ci + 1)

        yield from sorted(extend([], 0))

    def complex(self, budget: int = 2_000_000) -> SimplicialComplex:
        """The full order complex as a ``SimplicialComplex`` with matching vertex ids."""
        tops = list(self.faces(len(self.colors) - 1))
        if not tops:
            raise LatticeError("no chain meets every color")
        return SimplicialComplex(
            tops, colors=[int(c) for c in self.color], vertex_count=self.n_vertices, labels=self.labels, face_budget=budget
        )


def lattice_view(L: GeometricLattice, colors: Sequence[int] | None = None) -> LatticeComplexView:
    """View of the order complex of the proper part of ``L`` on the given ranks."""
    ranks = set(range(1, L.height)) if colors is None else {int(c) for c in colors}
    if not ranks or min(ranks) < 1 or max(ranks) >= L.height:
        raise LatticeError("colors must be ranks of proper elements")
    elems = [x for x in range(L.n_elements) if int(L.rank[x]) in ranks]
    sub = L.leq[np.ix_(elems, elems)]
    return LatticeComplexView(L.rank[elems], sub, labels=elems, homogeneous=L.homogeneous)


def order_complex(L: GeometricLattice, colors: Sequence[int] | None = None) -> SimplicialComplex:
    """Order complex of the proper part, uniform on maximal chains, colored by rank.

    Vertex ``i`` is the ``i``-th proper element in index order; its label
    is the lattice element index.
    """
    # grading check: every maximal chain of the proper part meets every rank
    for x in range(L.n_elements):
        if x in (L.bottom, L.top):
            continue
        if not 0 < L.rank[x] < L.height:
            raise LatticeError("non-graded input")
    return lattice_view(L, colors).complex()


# ----------------------------------------------- links of F_2 buildings
def _f2_rref(rows: Sequence[int]) -> tuple[int, ...]:
    """Reduced echelon basis of F_2 row bitmasks; pivots are leading bits."""
    basis: list[int] = []
    for r in rows:
        for b in basis:
            if r & (1 << (b.bit_length() - 1)):
                r ^= b
        if r:
            lead = 1 << (r.bit_length() - 1)
            basis = [b ^ r if b & lead else b for b in basis]
            basis.append(r)
            basis.sort(reverse=True)
    return tuple(basis)


def _f2_subspaces(coords: Sequence[int], k: int) -> list[tuple[int, ...]]:
    """All ``k``-dimensional subspaces of the span of the given unit vectors."""
    coords = sorted(coords, reverse=True)  # bit positions, most significant first
    m = len(coords)
    out = []
    for pivots in combinations(range(m), k):
        free = [(r, c) for r in range(k) for c in range(pivots[r] + 1, m) if c not in pivots]
        for vals in product((0, 1), repeat=len(free)):
            rows = [1 << coords[p] for p in pivots]
            for (r, c), v in zip(free, vals):
                if v:
                    rows[r] |= 1 << coords[c]
            out.append(tuple(rows))
    return out


def _f2_annihilator(rows: Sequence[int], n: int) -> list[int]:
    """Basis of the dual space ``{a : <a, r> = 0 for all rows}``."""
    M = np.array([[(r >> (n - 1 - j)) & 1 for j in range(n)] for r in rows], dtype=np.int64).reshape(len(rows), n)
    from .linalg import nullspace_mod_p

    N = nullspace_mod_p(M, 2, n) if len(rows) else np.eye(n, dtype=np.int64)
    return [int("".join(str(int(b)) for b in row), 2) for row in N]


def building_flag_link(n: int, flag: Sequence[int], colors: Sequence[int]) -> LatticeComplexView:
    """Link of a standard flag in the ``SL_n(F_2)`` building, restricted to ``colors``.

    The flag is ``W_a = span(e_1, ..., e_a)`` for ``a`` in ``flag``.  Vertices
    are subspaces of dimension in ``colors`` that are comparable with every
    flag member; the color of a vertex is its dimension.
    """
    flag = sorted(int(a) for a in flag)
    colors = sorted(int(c) for c in colors)
    if set(flag) & set(colors):
        raise LatticeError("link colors must avoid the flag dimensions")
    if not flag or min(flag) < 1 or max(flag) >= n or min(colors) < 1 or max(colors) >= n:
        raise LatticeError("flag and colors must be proper dimensions")
    bounds = [0] + flag + [n]
    # coordinate e_i is bit n-i
    spaces, dims = [], []
    for c in colors:
        lo = max(b for b in bounds if b < c)
        hi = min(b for b in bounds if b > c)
        base = 0
        for i in range(1, lo + 1):
            base |= 1 << (n - i)
        free = [n - i for i in range(lo + 1, hi + 1)]
        base_rows = [1 << (n - i) for i in range(1, lo + 1)]
        for U in _f2_subspaces(free, c - lo):
            spaces.append(_f2_rref(base_rows + list(U)))
            dims.append(c)
    N = len(spaces)
    basis = np.zeros((N, n), dtype=np.uint64)
    ann = np.zeros((N, n), dtype=np.uint64)
    for i, s in enumerate(spaces):
        basis[i, : len(s)] = s
        a = _f2_annihilator(s, n)
        ann[i, : len(a)] = a
    leq = np.zeros((N, N), dtype=bool)
    for x in range(N):
        # x <= y iff every basis vector of x is orthogonal to the annihilator of y
        par = np.bitwise_count(ann[:, :, None] & basis[x][None, None, :]) & 1
        leq[x] = ~par.any(axis=(1, 2))
    dims = np.array(dims)
    leq &= (dims[:, None] <= dims[None, :])
    return LatticeComplexView(dims, leq, labels=spaces, homogeneous=True)


# ------------------------------------------------------------ suitability
@dataclass(frozen=True)
class SuitabilityConstants:
    """Color counts ``c_i``, vertex-support bounds ``n_i`` and radius bounds ``D_i``."""

    k: int
    c: tuple[int, ...]
    n: tuple[int, ...]
    D: tuple[int, ...]

    @classmethod
    def for_level(cls, k: int) -> "SuitabilityConstants":
        if k < 0:
            raise ValueError("k must be non-negative")
        c, n, D = [2], [4], [3]
        for i in range(1, k + 1):
            c.append(c[-1] + i + 2)
            n.append(2 * (i + 2) - (i + 1) ** 2 + (i + 1) * n[-1])
            D.append((i + 2) * (i + 1) * (D[-1] + 1))
        return cls(k, tuple(c), tuple(n), tuple(D))


def is_k_suitable(F: Sequence[int], k: int, consts: SuitabilityConstants | None = None, star_step: bool = False) -> bool:
    """Whether the color set ``F`` is ``k``-suitable.

    With ``star_step`` the inequalities are also required for ``m = j + 3``,
    which covers the color of the star vertex as well as the shifting colors.
    """
    consts = consts or SuitabilityConstants.for_level(k)
    F = sorted(int(x) for x in F)
    if len(F) < consts.c[k]:
        raise ValueError(f"need at least {consts.c[k]} colors, got {len(F)}")
    if len(set(F)) != len(F):
        return False
    i = [None] + F  # 1-based
    if i[2] < 2 * i[1]:
        return False
    for j in range(k):
        cj = consts.c[j]
        for m in range(1, j + 3 + (1 if star_step else 0)):
            if cj + m >= len(i):
                return False
            if i[cj + m] < consts.n[j] * i[cj] + sum(i[cj + mm] for mm in range(1, m)):
                return False
    return True


def sample_suitable_colors(d: int, k: int, seed: int = 0, star_step: bool = False) -> tuple[int, ...] | None:
    """A random ``k``-suitable set of ``c_k`` colors from ``1..d``, or ``None``.

    Colors are drawn from geometric strips when every strip holds an
    integer; otherwise suitable sets are enumerated (when few) and one is
    drawn uniformly.
    """
    consts = SuitabilityConstants.for_level(k)
    ck = consts.c[k]
    if d < ck:
        return None
    rng = np.random.default_rng(seed)
    B = (k + 3) * consts.n[k]
    strips = []
    for j in range(1, ck + 1):
        lo = d / (2 * B) ** (ck + 1 - j)
        hi = 2 * d / (2 * B) ** (ck + 1 - j)
        ints = [x for x in range(max(1, math.ceil(lo)), min(d, math.ceil(hi) - 1) + 1) if lo <= x < hi]
        strips.append(ints)
    if all(strips):
        F = tuple(int(rng.choice(s)) for s in strips)
        if is_k_suitable(F, k, consts, star_step):
            return F
    if math.comb(d, ck) > 200_000:
        return None
    good = [F for F in combinations(range(1, d + 1), ck) if is_k_suitable(F, k, consts, star_step)]
    if not good:
        return None
    return tuple(good[int(rng.integers(len(good)))])


def triple_colors(d: int) -> tuple[int, int, int] | None:
    """Colors ``i0 < i1 < i2`` with ``2 i0 <= i1`` and ``3 i1 <= i2`` if ``d`` allows, else ``(1, 2, 3)``."""
    for i0 in range(1, d + 1):
        for i1 in range(2 * i0, d + 1):
            if 3 * i1 <= d:
                return (i0, i1, 3 * i1)
    return (1, 2, 3) if d >= 3 else None


# ----------------------------------------------------- spectral check
def verify_lattice_link_expansion(L: GeometricLattice, i: int, j: int, tolerance: float = 1e-9):
    """Second eigenvalue of the bipartite comparability graph between ranks ``i`` and ``j``."""
    from .expansion import LinkSpectrum, SpectralCertificate, graph_spectrum

    if j < 2 * i:
        raise LatticeError("the bipartite bound needs j >= 2i")
    if not 1 <= i < j < L.height:
        raise LatticeError("ranks must be proper and distinct")
    A = L.elements_of_rank(i)
    B = L.elements_of_rank(j)
    sub = L.leq[np.ix_(A, B)]
    a, b = np.nonzero(sub)
    edges = np.stack([a, b + len(A)], axis=1)
    lam2, lmin, conn = graph_spectrum(len(A) + len(B), edges, np.ones(len(edges)))
    spec = LinkSpectrum(face=(i, j), lambda2=lam2, lambda_min=lmin, connected=conn, vertices=len(A) + len(B))
    return SpectralCertificate(links=[spec], value=lam2, target=1 / math.sqrt(2), tolerance=tolerance)
