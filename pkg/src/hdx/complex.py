"""Pure weighted simplicial complexes.

A complex is given by its maximal faces (all of the same size) and a
probability distribution on them.  Every lower level ``X(k)`` carries the
induced distribution

    Pr_k(t) = (1 / C(d+1, k+1)) * sum_{s in X(d), s > t} Pr_d(s),

which is stored exactly as integer numerators over a per-level common
denominator.  Faces are canonical sorted tuples of vertex ids; the empty face
``()`` is the unique face of level -1.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb, lcm
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

DEFAULT_FACE_BUDGET = 2_000_000
WEIGHT_TOLERANCE = 1e-12

Face = tuple


class ComplexError(ValueError):
    """Raised for malformed complexes and invalid face queries."""


def permutation_sign(seq: Sequence) -> int:
    """Sign of the permutation sorting ``seq`` (entries must be distinct)."""
    seq = list(seq)
    sign = 1
    seen = [False] * len(seq)
    order = sorted(range(len(seq)), key=seq.__getitem__)
    for i in range(len(seq)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def canonical(face: Iterable[int]) -> tuple[Face, int]:
    """Return the sorted face and the sign of the sorting permutation."""
    face = tuple(face)
    if len(set(face)) != len(face):
        raise ComplexError(f"repeated vertex in {face}")
    return tuple(sorted(face)), permutation_sign(face)


def _to_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, (int, np.integer)):
        return Fraction(int(w))
    if isinstance(w, str):
        return Fraction(w)
    return Fraction(float(w))


class SimplicialComplex:
    """An immutable pure simplicial complex with induced face probabilities.

    Parameters
    ----------
    maximal_faces:
        Iterable of vertex collections, all of the same size ``d + 1``.
    weights:
        Optional positive weights parallel to ``maximal_faces``.  Unless
        ``normalize`` is set they must sum to one within ``1e-12``.
    colors:
        Optional color label per vertex (sequence indexed by vertex id, or a
        mapping).  Every maximal face must see ``d + 1`` distinct colors and
        exactly ``d + 1`` labels may occur overall.
    vertex_count:
        Number of vertices; defaults to ``max id + 1``.  Every vertex must
        lie in some maximal face.
    labels:
        Optional hashable label per vertex (e.g. lattice elements, or the
        vertex ids of a parent complex).
    """

    def __init__(
        self,
        maximal_faces: Iterable[Iterable[int]],
        weights: Sequence | None = None,
        colors: Sequence[int] | Mapping[int, int] | None = None,
        vertex_count: int | None = None,
        labels: Sequence[Hashable] | None = None,
        normalize: bool = False,
        face_budget: int = DEFAULT_FACE_BUDGET,
    ) -> None:
        tops = [tuple(sorted(int(v) for v in f)) for f in maximal_faces]
        if not tops:
            raise ComplexError("a complex needs at least one maximal face")
        size = len(tops[0])
        if size == 0:
            raise ComplexError("maximal faces must be nonempty")
        for f in tops:
            if len(f) != size:
                raise ComplexError("non-pure input: maximal faces have different sizes")
            if len(set(f)) != size:
                raise ComplexError(f"repeated vertex in maximal face {f}")
            if f[0] < 0:
                raise ComplexError("vertex ids must be non-negative")
        self.dimension = size - 1
        d = self.dimension

        # merge duplicate maximal faces, accumulating their weight
        if weights is None:
            raw = [Fraction(1)] * len(tops)
            normalize = True
        else:
            if len(weights) != len(tops):
                raise ComplexError("weights must be parallel to maximal_faces")
            raw = [_to_fraction(w) for w in weights]
            if any(w <= 0 for w in raw):
                raise ComplexError("weights must be positive")
        merged: dict[Face, Fraction] = {}
        for f, w in zip(tops, raw):
            merged[f] = merged.get(f, Fraction(0)) + w
        total = sum(merged.values())
        if not normalize and abs(float(total) - 1.0) > WEIGHT_TOLERANCE:
            raise ComplexError(f"weights sum to {float(total)!r}, not 1")
        top_faces = sorted(merged)
        top_w = [merged[f] / total for f in top_faces]
        scale = lcm(*(w.denominator for w in top_w))
        top_mass = [int(w * scale) for w in top_w]

        n = max(f[-1] for f in top_faces) + 1
        if vertex_count is not None:
            if vertex_count < n:
                raise ComplexError("vertex_count smaller than the largest vertex id")
            n = int(vertex_count)
        self.vertex_count = n

        # enumerate all faces with their accumulated top mass
        levels: list[dict[Face, int]] = [dict() for _ in range(d + 1)]
        count = 0
        for f, m in zip(top_faces, top_mass):
            for k in range(d + 1):
                level = levels[k]
                for sub in combinations(f, k + 1):
                    if sub in level:
                        level[sub] += m
                    else:
                        level[sub] = m
                        count += 1
            if count > face_budget:
                raise ComplexError(f"face budget {face_budget} exceeded")
        if len(levels[0]) != n:
            raise ComplexError("non-pure input: some vertex lies in no maximal face")

        self._faces: list[tuple[Face, ...]] = [((),)]
        self._index: list[dict[Face, int]] = [{(): 0}]
        big = scale * comb(d + 1, (d + 1) // 2) >= 2**62
        self._mass: list[np.ndarray] = [np.array([scale], dtype=object if big else np.int64)]
        self._denominator: list[int] = [scale]
        for k in range(d + 1):
            faces = tuple(sorted(levels[k]))
            self._faces.append(faces)
            self._index.append({f: i for i, f in enumerate(faces)})
            self._mass.append(
                np.array([levels[k][f] for f in faces], dtype=object if big else np.int64)
            )
            self._denominator.append(scale * comb(d + 1, k + 1))
        self._prob = [
            np.asarray(m, dtype=np.float64) / float(den)
            for m, den in zip(self._mass, self._denominator)
        ]

        self.colors: tuple[int, ...] | None = None
        if colors is not None:
            if isinstance(colors, Mapping):
                col = tuple(int(colors[v]) for v in range(n))
            else:
                if len(colors) != n:
                    raise ComplexError("colors must be given for every vertex")
                col = tuple(int(c) for c in colors)
            palette = set(col)
            if len(palette) != d + 1:
                raise ComplexError("improper coloring: palette size differs from d+1")
            for f in top_faces:
                if len({col[v] for v in f}) != d + 1:
                    raise ComplexError(f"improper coloring on maximal face {f}")
            self.colors = col
        self.labels: tuple | None = tuple(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != n:
            raise ComplexError("labels must be given for every vertex")
        self._cache: dict = {}

    # ------------------------------------------------------------------ faces
    def _level(self, k: int) -> int:
        if not -1 <= k <= self.dimension:
            raise ComplexError(f"level {k} out of range [-1, {self.dimension}]")
        return k + 1

    def faces(self, k: int) -> tuple[Face, ...]:
        """Canonical faces of level ``k`` in face-index order."""
        return self._faces[self._level(k)]

    def n_faces(self, k: int) -> int:
        return len(self._faces[self._level(k)])

    def index(self, face: Iterable[int]) -> int:
        """Face index of a face given in any vertex order."""
        key = tuple(sorted(face))
        try:
            return self._index[len(key)][key]
        except (KeyError, IndexError):
            raise ComplexError(f"{key} is not a face") from None

    def is_face(self, face: Iterable[int]) -> bool:
        key = tuple(sorted(face))
        return len(key) <= self.dimension + 1 and key in self._index[len(key)]

    @property
    def top_faces(self) -> tuple[Face, ...]:
        return self._faces[-1]

    def total_faces(self) -> int:
        return sum(len(f) for f in self._faces[1:])

    # ----------------------------------------------------------- probability
    def mass(self, k: int) -> np.ndarray:
        """Integer numerators of ``Pr_k`` (see :meth:`denominator`)."""
        return self._mass[self._level(k)]

    def denominator(self, k: int) -> int:
        return self._denominator[self._level(k)]

    def prob(self, k: int) -> np.ndarray:
        """Float projection of ``Pr_k`` in face-index order."""
        return self._prob[self._level(k)]

    def pr(self, face: Iterable[int]) -> Fraction:
        """Exact probability of a face under the distribution of its level."""
        key = tuple(sorted(face))
        k = len(key) - 1
        return Fraction(int(self.mass(k)[self.index(key)]), self.denominator(k))

    def top_weights(self) -> list[Fraction]:
        d = self.dimension
        return [Fraction(int(m), self.denominator(d)) for m in self.mass(d)]

    def is_uniform(self, k: int) -> bool:
        m = self.mass(k)
        return bool(np.all(m == m[0]))

    # ------------------------------------------------------------- incidence
    def boundary_indices(self, k: int) -> np.ndarray:
        """Array ``B`` of shape ``(|X(k)|, k+1)``: ``B[t, i]`` indexes ``t_i``.

        ``t_i`` is ``t`` with its ``i``-th vertex removed; it is again
        canonical, so no sign is involved.
        """
        key = ("bnd", k)
        if key not in self._cache:
            if k < 0:
                raise ComplexError("level -1 has no boundary")
            lower = self._index[k]
            arr = np.empty((self.n_faces(k), k + 1), dtype=np.int64)
            for t_idx, t in enumerate(self.faces(k)):
                for i in range(k + 1):
                    arr[t_idx, i] = lower[t[:i] + t[i + 1:]]
            arr.setflags(write=False)
            self._cache[key] = arr
        return self._cache[key]

    def cofaces(self, k: int) -> list[np.ndarray]:
        """For each k-face, the indices of the (k+1)-faces containing it."""
        key = ("cof", k)
        if key not in self._cache:
            out: list[list[int]] = [[] for _ in range(self.n_faces(k))]
            if k < self.dimension:
                for t_idx, row in enumerate(self.boundary_indices(k + 1)):
                    for s_idx in row:
                        out[s_idx].append(t_idx)
            self._cache[key] = [np.array(c, dtype=np.int64) for c in out]
        return self._cache[key]

    def containing(self, r: Iterable[int], k: int) -> list[int]:
        """Indices of the k-faces containing the face ``r``."""
        r = tuple(sorted(r))
        if not self.is_face(r):
            raise ComplexError(f"{r} is not a face")
        j = len(r) - 1
        if k < j:
            return []
        if j == -1:
            return list(range(self.n_faces(k)))
        cur = [self.index(r)]
        for level in range(j, k):
            cof = self.cofaces(level)
            nxt = set()
            for c in cur:
                nxt.update(int(x) for x in cof[c])
            cur = sorted(nxt)
        return cur

    def color_of(self, v: int) -> int:
        if self.colors is None:
            raise ComplexError("complex is not colored")
        return self.colors[v]

    def palette(self) -> tuple[int, ...]:
        if self.colors is None:
            raise ComplexError("complex is not colored")
        return tuple(sorted(set(self.colors)))

    # ------------------------------------------------------------ comparison
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.vertex_count == other.vertex_count
            and self.top_faces == other.top_faces
            and self.top_weights() == other.top_weights()
            and self.colors == other.colors
        )

    def __hash__(self) -> int:
        return hash((self.dimension, self.vertex_count, self.top_faces))

    def __repr__(self) -> str:
        counts = ", ".join(str(self.n_faces(k)) for k in range(self.dimension + 1))
        return f"SimplicialComplex(d={self.dimension}, faces=[{counts}])"


def build_complex(
    maximal_faces: Iterable[Iterable[int]],
    weights: Sequence | Mapping | None = None,
    colors: Sequence[int] | Mapping[int, int] | None = None,
    **kwargs,
) -> SimplicialComplex:
    """Build a complex; ``weights`` may be a list or a map from faces."""
    tops = [tuple(f) for f in maximal_faces]
    if isinstance(weights, Mapping):
        weights = [weights[f] if f in weights else weights[tuple(sorted(f))] for f in tops]
    return SimplicialComplex(tops, weights=weights, colors=colors, **kwargs)


def complete_complex(n: int, d: int, **kwargs) -> SimplicialComplex:
    """All ``(d+1)``-subsets of ``range(n)`` with uniform weights."""
    if d < 0 or d + 1 > n:
        raise ComplexError(f"cannot build a {d}-dimensional complete complex on {n} vertices")
    return SimplicialComplex(combinations(range(n), d + 1), vertex_count=n, **kwargs)


def _relabel(
    X: SimplicialComplex,
    tops: list[Face],
    masses: list[int],
    colors_fn=None,
) -> SimplicialComplex:
    verts = sorted({v for f in tops for v in f})
    new_id = {v: i for i, v in enumerate(verts)}
    new_tops = [tuple(new_id[v] for v in f) for f in tops]
    colors = [X.colors[v] for v in verts] if X.colors is not None else None
    if colors_fn is not None:
        colors = colors_fn(verts)
    base_labels = X.labels if X.labels is not None else tuple(range(X.vertex_count))
    labels = [base_labels[v] for v in verts]
    Y = SimplicialComplex(new_tops, weights=masses, colors=colors, labels=labels, normalize=True)
    Y.parent_vertices = tuple(verts)
    return Y


def link(X: SimplicialComplex, s: Iterable[int]) -> SimplicialComplex:
    """The link ``X_s = {t \\ s : s <= t in X}`` with induced weights.

    Vertices are relabeled ``0..m-1`` in increasing order of their ids in
    ``X``; ``parent_vertices`` records the map back.  The link of the empty
    face is ``X`` itself.
    """
    s = tuple(sorted(s))
    if not X.is_face(s):
        raise ComplexError(f"{s} is not a face")
    if len(s) == 0:
        return X
    if len(s) == X.dimension + 1:
        raise ComplexError("the link of a maximal face is empty")
    d = X.dimension
    sset = set(s)
    idx = X.containing(s, d)
    tops, masses = [], []
    mass = X.mass(d)
    for i in idx:
        t = X.faces(d)[i]
        tops.append(tuple(v for v in t if v not in sset))
        masses.append(int(mass[i]))
    return _relabel(X, tops, masses)


def color_restriction(X: SimplicialComplex, F: Iterable[int]) -> SimplicialComplex:
    """The subcomplex ``X^F`` of faces whose colors lie in ``F``.

    Its top faces are the faces of ``X`` colored exactly by ``F``, weighted by
    ``Pr^F(s) = sum of Pr_d(t) over maximal t containing s``.  Color labels
    are kept.
    """
    if X.colors is None:
        raise ComplexError("color restriction needs a partite (colored) complex")
    F = set(int(c) for c in F)
    palette = set(X.palette())
    if not F or not F <= palette:
        raise ComplexError(f"color set {sorted(F)} is not a nonempty subset of {sorted(palette)}")
    if F == palette:
        return X
    d = X.dimension
    acc: dict[Face, int] = {}
    for t, m in zip(X.top_faces, X.mass(d)):
        s = tuple(v for v in t if X.colors[v] in F)
        acc[s] = acc.get(s, 0) + int(m)
    tops = sorted(acc)
    return _relabel(X, tops, [acc[t] for t in tops])


def star(X: SimplicialComplex, r: Iterable[int], k: int) -> list[tuple[Face, Fraction]]:
    """All k-faces containing ``r`` together with their ``Pr_k`` mass."""
    r = tuple(sorted(r))
    if not X.is_face(r):
        raise ComplexError(f"{r} is not a face")
    if not len(r) - 1 <= k <= X.dimension:
        raise ComplexError(f"level {k} out of range for a face of size {len(r)}")
    den = X.denominator(k)
    mass = X.mass(k)
    return [(X.faces(k)[i], Fraction(int(mass[i]), den)) for i in X.containing(r, k)]


def skeleton_graph(X: SimplicialComplex) -> tuple[int, np.ndarray, np.ndarray]:
    """Vertex count, edge array ``(m, 2)`` and edge probabilities of the 1-skeleton."""
    if X.dimension < 1:
        return X.vertex_count, np.zeros((0, 2), dtype=np.int64), np.zeros(0)
    edges = np.array(X.faces(1), dtype=np.int64).reshape(-1, 2)
    return X.vertex_count, edges, X.prob(1)
