"""Non-abelian cones: base paths plus loop contractions by triangle rewrites.

Loops are vertex tuples starting and ending at the apex.  Two rewrites act
on them: a backtrack ``(u, v, u) <-> (u)`` and a triangle rewrite
``(u, v) <-> (u, w, v)`` for a triangle ``{u, v, w}``.  A contraction of an
edge ``uw`` is a sequence of loops from ``P_u + (u, w) + reversed(P_w)``
where consecutive loops differ by one triangle rewrite up to backtracks,
and the last loop reduces to the bare apex by backtracks alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .lattice import LatticeComplexView

Loop = tuple


class LoopError(ValueError):
    """A rewrite that does not apply to the given loop."""


def bt_reduce(loop: Sequence[int]) -> Loop:
    """Remove backtracks ``(u, v, u) -> (u)`` until none is left (free reduction)."""
    stack: list[int] = []
    for v in loop:
        stack.append(int(v))
        while len(stack) >= 3 and stack[-1] == stack[-3]:
            stack.pop()
            stack.pop()
    return tuple(stack)


def tr_step(loop: Sequence[int], position: int, w: int, geometry=None) -> Loop:
    """Replace the step ``(u, v)`` at ``position`` by ``(u, w, v)``."""
    loop = tuple(loop)
    if not 0 <= position < len(loop) - 1:
        raise LoopError("position outside the loop")
    u, v = loop[position], loop[position + 1]
    if geometry is not None and not geometry.is_face((u, v, w)):
        raise LoopError(f"{(u, v, w)} is not a triangle")
    return loop[: position + 1] + (w,) + loop[position + 1:]


def tr_remove(loop: Sequence[int], position: int, geometry=None) -> Loop:
    """Replace ``(u, w, v)`` starting at ``position`` by ``(u, v)``."""
    loop = tuple(loop)
    if not 0 <= position < len(loop) - 2:
        raise LoopError("position outside the loop")
    u, w, v = loop[position: position + 3]
    if geometry is not None and not geometry.is_face((u, v, w)):
        raise LoopError(f"{(u, w, v)} is not a triangle")
    return loop[: position + 1] + loop[position + 2:]


def _single_tr_images(loop: Loop, geometry, vertices) -> set[Loop]:
    """Reductions of every loop one triangle rewrite away from ``loop``."""
    out = set()
    for p in range(len(loop) - 1):
        u, v = loop[p], loop[p + 1]
        for w in vertices:
            if w != u and w != v and geometry.is_face((u, v, w)):
                out.add(bt_reduce(loop[: p + 1] + (w,) + loop[p + 1:]))
    for p in range(len(loop) - 2):
        u, w, v = loop[p: p + 3]
        if u != v and geometry.is_face((u, v, w)):
            out.add(bt_reduce(loop[: p + 1] + loop[p + 2:]))
    return out


def one_step_related(a: Sequence[int], b: Sequence[int], geometry) -> bool:
    """Whether ``b`` is one triangle rewrite from ``a`` up to backtracks.

    The rewrite is searched on ``a`` as given and on its reduction, in both
    directions; candidate third vertices are the common neighbours.
    """
    a, b = tuple(a), tuple(b)
    ra, rb = bt_reduce(a), bt_reduce(b)
    for src, target in ((a, rb), (ra, rb), (b, ra), (rb, ra)):
        verts = _common_candidates(src, geometry)
        if target in _single_tr_images(src, geometry, verts):
            return True
    return False


def _common_candidates(loop: Loop, geometry) -> list[int]:
    if isinstance(geometry, LatticeComplexView):
        cand = set()
        for v in set(loop):
            cand.update(int(x) for x in geometry.neighbors(v))
        return sorted(cand)
    return list(range(geometry.X.vertex_count))


@dataclass
class NonAbelianCone:
    apex: int
    paths: dict[int, Loop]
    contractions: dict[tuple[int, int], list[Loop]] = field(default_factory=dict)

    def initial_loop(self, u: int, w: int) -> Loop:
        return self.paths[u] + self.paths[w][::-1]

    @property
    def diameter(self) -> int:
        return max((len(t) - 1 for t in self.contractions.values()), default=0)

    def to_json(self) -> dict:
        return {
            "apex": self.apex,
            "paths": {str(u): list(p) for u, p in sorted(self.paths.items())},
            "contractions": {f"{u},{w}": [list(l) for l in T] for (u, w), T in sorted(self.contractions.items())},
        }


def nonabelian_cone_from_json(data: dict) -> NonAbelianCone:
    return NonAbelianCone(
        int(data["apex"]),
        {int(u): tuple(p) for u, p in data["paths"].items()},
        {tuple(int(x) for x in k.split(",")): [tuple(l) for l in T] for k, T in data["contractions"].items()},
    )


@dataclass
class NonAbelianConeReport:
    valid: bool
    diameter: int
    violations: list[tuple]

    def to_json(self) -> dict:
        return {"valid": self.valid, "diameter": self.diameter, "violations": [[list(e), i, why] for e, i, why in self.violations]}


def _is_walk(walk: Loop, geometry) -> bool:
    return all(a != b and geometry.is_face((a, b)) for a, b in zip(walk, walk[1:]))


def verify_nonabelian_cone(cone: NonAbelianCone, geometry) -> NonAbelianConeReport:
    """Check paths, every contraction step and the final backtrack reduction."""
    from .cones import _geometry

    geo = _geometry(geometry)
    bad: list[tuple] = []
    for (u,) in geo.faces(0):
        p = cone.paths.get(u)
        if p is None or p[0] != cone.apex or p[-1] != u or not _is_walk(p, geo):
            bad.append(((u,), -1, "missing or invalid path"))
    if cone.paths.get(cone.apex) != (cone.apex,):
        bad.append(((cone.apex,), -1, "apex path must be trivial"))
    for e in geo.faces(1):
        e = tuple(e)
        T = cone.contractions.get(e)
        if T is None:
            bad.append((e, -1, "missing contraction"))
            continue
        u, w = e
        if u not in cone.paths or w not in cone.paths:
            continue
        if tuple(T[0]) != cone.initial_loop(u, w):
            bad.append((e, 0, "first loop is not P_u (u, w) P_w^-1"))
        for i, l in enumerate(T):
            if l[0] != cone.apex or l[-1] != cone.apex or not _is_walk(tuple(l), geo):
                bad.append((e, i, "not a closed walk at the apex"))
        for i in range(len(T) - 1):
            if not one_step_related(T[i], T[i + 1], geo):
                bad.append((e, i + 1, "not one triangle rewrite from the previous loop"))
        if bt_reduce(T[-1]) != (cone.apex,):
            bad.append((e, len(T) - 1, "last loop does not reduce to the apex"))
    return NonAbelianConeReport(not bad, cone.diameter, bad)


def build_nonabelian_cone(view: LatticeComplexView, colors: Sequence[int] | None = None) -> NonAbelianCone:
    """Cone on a three-colored lattice order complex with colors ``i0 < i1 < i2``.

    Paths go ``v0 -> v1 -> u`` for ``u`` of color ``i0`` (``v1`` of color
    ``i1`` above both) and through the path of some color-``i0`` vertex
    comparable to ``u`` otherwise.  A loop
    is contracted by first removing its color-``i2`` vertices with at most
    three triangle rewrites, then coning it off to a color-``i2`` vertex
    above all remaining vertices, one rewrite per edge.
    """
    i0, i1, i2 = sorted(colors if colors is not None else view.colors)
    col = view.color
    v0 = int(view.by_color[i0][0])
    paths: dict[int, Loop] = {v0: (v0,)}
    for u in view.by_color[i0]:
        u = int(u)
        if u != v0:
            v1 = view.find_comparable([v0, u], i1)
            if v1 is None:
                raise RuntimeError(f"no color-{i1} vertex comparable to {v0} and {u}")
            paths[u] = (v0, v1, u)
    for c in (i1, i2):
        for u in view.by_color[c]:
            u = int(u)
            v2 = v0 if view.comparable[v0, u] else view.find_comparable([u], i0)
            paths[u] = paths[v2] + (u,)
    cone = NonAbelianCone(v0, paths)
    for e in view.faces(1):
        u, w = e
        cone.contractions[(u, w)] = _contract(cone.initial_loop(u, w), view, (i0, i1, i2))
    return cone


def _contract(P0: Loop, view: LatticeComplexView, colors) -> list[Loop]:
    i0, i1, i2 = colors
    col = view.color
    steps = [P0]
    cur = P0
    while True:
        L = bt_reduce(cur)
        pos = next((p for p in range(1, len(L) - 1) if col[L[p]] == i2), None)
        if pos is None:
            break
        a, u, b = L[pos - 1], L[pos], L[pos + 1]
        if view.comparable[a, b] and col[a] != col[b]:
            cur = tr_remove(L, pos - 1, view)
            steps.append(cur)
        elif col[a] == i0 and col[b] == i0:
            u2 = view.find_comparable([a, b, u], i1)
            if u2 is None:
                raise RuntimeError(f"no vertex of color {i1} between {a}, {b} and {u}")
            mid = tr_step(L, pos - 1, u2, view)
            steps.append(mid)
            cur = tr_remove(mid, pos, view)
            steps.append(cur)
        elif col[b] == i1 and pos + 2 < len(L) and view.is_face((u, b, L[pos + 2])):
            cur = tr_remove(L, pos, view)
            steps.append(cur)
        elif col[a] == i1 and pos >= 2 and view.is_face((L[pos - 2], a, u)):
            cur = tr_remove(L, pos - 2, view)
            steps.append(cur)
        else:
            raise RuntimeError(f"cannot remove the color-{i2} vertex {u} from {L}")
    L = bt_reduce(cur)
    if len(L) == 1:
        return steps
    y = view.find_comparable(sorted(set(L)), i2)
    if y is None:
        raise RuntimeError(f"no color-{i2} vertex above the loop {L}")
    cur = tr_step(L, 0, y, view)
    steps.append(cur)
    # cur = (L0, y, L1, L2, ...): drop L1, L2, ... one triangle at a time
    while len(cur) > 3:
        cur = tr_remove(cur, 1, view)
        steps.append(cur)
    return steps


def nonabelian_cone_bound(diameter: int, k_top: int) -> Fraction:
    """``1 / (C(k_top + 1, 3) * diameter)`` for a complex transitive on top faces."""
    if diameter < 1 or k_top < 2:
        raise ValueError("need diameter >= 1 and a complex of dimension >= 2")
    return Fraction(1, math.comb(k_top + 1, 3) * diameter)
