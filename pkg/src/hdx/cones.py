"""Integer chains and cones on order complexes of geometric lattices.

A cone assigns to every face ``s`` a chain ``psi(s)`` one level up with
``boundary(psi(s)) = s - sum_i (-1)^i psi(s_i)``; its radius is the largest
support of any ``psi(s)``.  ``build_cone`` constructs cones level by level
from an apex, shortest paths through two low colors, and then a shifting
step followed by a star step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .complex import SimplicialComplex, canonical
from .lattice import LatticeComplexView, SuitabilityConstants, is_k_suitable


class ChainError(ValueError):
    """Invalid chain operation (e.g. appending a vertex outside a link)."""


class ConeConstructionError(RuntimeError):
    """A vertex required by the construction does not exist."""


# ------------------------------------------------------------------ chains
class IntegerChain:
    """A formal integer combination of oriented faces of one size.

    Terms are stored on sorted faces; an oriented face enters with the sign
    of its sorting permutation.  Zero coefficients are dropped.
    """

    __slots__ = ("level", "terms")

    def __init__(self, level: int, terms: Mapping[tuple, int] | Iterable[tuple[Sequence[int], int]] | None = None):
        self.level = level
        self.terms: dict[tuple, int] = {}
        if terms is None:
            return
        items = terms.items() if isinstance(terms, Mapping) else terms
        for face, c in items:
            self._add_term(face, int(c))

    def _add_term(self, face, c: int) -> None:
        if c == 0:
            return
        key, sign = canonical(face)
        if len(key) != self.level + 1:
            raise ChainError(f"face {tuple(face)} does not have size {self.level + 1}")
        v = self.terms.get(key, 0) + sign * c
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    @classmethod
    def face(cls, face: Sequence[int]) -> "IntegerChain":
        return cls(len(face) - 1, [(tuple(face), 1)])

    def copy(self) -> "IntegerChain":
        out = IntegerChain(self.level)
        out.terms = dict(self.terms)
        return out

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntegerChain):
            return NotImplemented
        return self.level == other.level and self.terms == other.terms

    def __add__(self, other: "IntegerChain") -> "IntegerChain":
        if other.level != self.level:
            raise ChainError("levels differ")
        out = self.copy()
        for f, c in other.terms.items():
            out._add_term(f, c)
        return out

    def __neg__(self) -> "IntegerChain":
        out = IntegerChain(self.level)
        out.terms = {f: -c for f, c in self.terms.items()}
        return out

    def __sub__(self, other: "IntegerChain") -> "IntegerChain":
        return self + (-other)

    def scale(self, a: int) -> "IntegerChain":
        out = IntegerChain(self.level)
        if a:
            out.terms = {f: a * c for f, c in self.terms.items()}
        return out

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*{f}" for f, c in sorted(self.terms.items()))
        return f"IntegerChain({self.level}: {body or '0'})"

    @property
    def support(self) -> list[tuple]:
        return sorted(self.terms)

    def vertex_support(self) -> set[int]:
        return {v for f in self.terms for v in f}

    def to_json(self) -> list[dict]:
        return [{"face": list(f), "coeff": c} for f, c in sorted(self.terms.items())]


def boundary(c: IntegerChain) -> IntegerChain:
    """``sum_t a_t sum_i (-1)^i t_i``; a 0-chain maps to a multiple of the empty face."""
    if c.level < 0:
        raise ChainError("the empty chain has no boundary")
    out = IntegerChain(c.level - 1)
    for f, a in c.terms.items():
        for i in range(len(f)):
            out._add_term(f[:i] + f[i + 1:], a if i % 2 == 0 else -a)
    return out


def restrict_to_vertex(c: IntegerChain, w: int) -> IntegerChain:
    """Terms whose face contains ``w``."""
    out = IntegerChain(c.level)
    out.terms = {f: a for f, a in c.terms.items() if w in f}
    return out


def append_vertex(c: IntegerChain, w: int, geometry=None) -> IntegerChain:
    """``sum a_t (w o t)``; every face must lie in the link of ``w``."""
    out = IntegerChain(c.level + 1)
    for f, a in c.terms.items():
        if w in f:
            raise ChainError(f"{w} already lies in {f}")
        if geometry is not None and not geometry.is_face(f + (w,)):
            raise ChainError(f"{f} is not in the link of {w}")
        out._add_term((w,) + f, a)
    return out


# ---------------------------------------------------------------- geometry
class ComplexGeometry:
    """Adapter giving a ``SimplicialComplex`` the face queries used by cones."""

    def __init__(self, X: SimplicialComplex):
        self.X = X
        self.color = X.colors

    def is_face(self, face) -> bool:
        return self.X.is_face(tuple(sorted(face)))

    def faces(self, level: int):
        return iter(self.X.faces(level))


def _geometry(G):
    if isinstance(G, SimplicialComplex):
        return ComplexGeometry(G)
    return G


# ------------------------------------------------------------------- cones
@dataclass
class Cone:
    """``psi[j][s]`` for sorted ``j``-faces ``s`` (``j = -1..level``)."""

    level: int
    psi: dict[int, dict[tuple, IntegerChain]]
    colors: tuple[int, ...] | None = None
    shift_trace: dict[tuple, list[int]] = field(default_factory=dict)

    @property
    def apex(self) -> int:
        (v,) = next(iter(self.psi[-1][()].terms))
        return v

    def __call__(self, s: Sequence[int]) -> IntegerChain:
        key, sign = canonical(s)
        c = self.psi[len(key) - 1].get(key)
        if c is None:
            return IntegerChain(len(key))
        return c if sign == 1 else -c

    @property
    def radius(self) -> int:
        return max((len(c.terms) for lvl in self.psi.values() for c in lvl.values()), default=0)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "psi": {",".join(map(str, s)): c.to_json() for j in sorted(self.psi) for s, c in sorted(self.psi[j].items())},
        }


def cone_from_json(data: dict) -> Cone:
    psi: dict[int, dict[tuple, IntegerChain]] = {j: {} for j in range(-1, int(data["level"]) + 1)}
    for key, terms in data["psi"].items():
        s = tuple(int(x) for x in key.split(",")) if key else ()
        psi[len(s) - 1][s] = IntegerChain(len(s), [(tuple(t["face"]), int(t["coeff"])) for t in terms])
    return Cone(int(data["level"]), psi)


def cone_residue(cone: Cone, s: Sequence[int]) -> IntegerChain:
    """``s - sum_i (-1)^i psi(s_i)``, the chain ``psi(s)`` must fill."""
    s = tuple(s)
    out = IntegerChain.face(s)
    for i in range(len(s)):
        sub = cone(s[:i] + s[i + 1:])
        out = out - sub if i % 2 == 0 else out + sub
    return out


@dataclass
class ConeReport:
    valid: bool
    radius: int
    violations: list[tuple]
    max_vertex_support: dict[int, int]
    max_new_color: dict[int, int | None]
    vertex_bound_ok: bool | None = None
    color_bound_ok: bool | None = None

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "radius": self.radius,
            "violations": [[lvl, list(s), why] for lvl, s, why in self.violations],
            "max_vertex_support": {str(k): v for k, v in self.max_vertex_support.items()},
            "max_new_color": {str(k): v for k, v in self.max_new_color.items()},
            "vertex_bound_ok": self.vertex_bound_ok,
            "color_bound_ok": self.color_bound_ok,
        }


def verify_cone(cone: Cone, geometry, consts: SuitabilityConstants | None = None, colors: Sequence[int] | None = None) -> ConeReport:
    """Check the cone identity at every face up to ``cone.level``.

    Also reports the radius and, per level, the largest vertex support and
    the largest color of a vertex of ``psi(s)`` outside ``s``.  With
    ``consts`` and ``colors`` these are compared with ``n_j`` and the color
    ``i_{c_j}``.
    """
    geo = _geometry(geometry)
    violations: list[tuple] = []
    vs_max: dict[int, int] = {}
    col_max: dict[int, int | None] = {}
    apex_chain = cone.psi.get(-1, {}).get(())
    if apex_chain is None or sum(apex_chain.terms.values()) != 1 or boundary(apex_chain) != IntegerChain.face(()):
        violations.append((-1, (), "apex chain must be a single vertex"))
    for j in range(0, cone.level + 1):
        vs_max[j], col_max[j] = 0, None
        for s in geo.faces(j):
            s = tuple(s)
            psi_s = cone(s)
            if psi_s.level != j + 1:
                violations.append((j, s, "wrong level"))
                continue
            bad = [t for t in psi_s.terms if not geo.is_face(t)]
            if bad:
                violations.append((j, s, f"face {bad[0]} not in the complex"))
            if boundary(psi_s) != cone_residue(cone, s):
                violations.append((j, s, "boundary identity fails"))
            vs = psi_s.vertex_support()
            vs_max[j] = max(vs_max[j], len(vs))
            extra = [int(geo.color[v]) for v in vs - set(s)] if geo.color is not None else []
            if extra:
                col_max[j] = max(col_max[j] or 0, max(extra))
    vb = cb = None
    if consts is not None:
        vb = all(vs_max[j] <= consts.n[j] for j in vs_max)
        if colors is not None:
            F = sorted(colors)
            cb = all(col_max[j] is None or col_max[j] <= F[consts.c[j] - 1] for j in col_max)
    return ConeReport(not violations, cone.radius, violations, vs_max, col_max, vb, cb)


def build_cone(
    view: LatticeComplexView,
    k: int,
    consts: SuitabilityConstants | None = None,
    colors: Sequence[int] | None = None,
    check_suitable: bool = True,
) -> Cone:
    """A ``k``-cone on the order-complex view ``view`` whose colors are ``k``-suitable.

    Every choice among valid vertices takes the smallest vertex id.
    """
    consts = consts or SuitabilityConstants.for_level(k)
    F = sorted(colors if colors is not None else view.colors)
    if k > len(F) - 2:
        raise ValueError("a k-cone needs at least k + 2 colors")
    if len(F) < consts.c[k]:
        raise ValueError(f"a {k}-cone needs {consts.c[k]} colors")
    if check_suitable and not is_k_suitable(F, k, consts):
        raise ValueError(f"colors {F} are not {k}-suitable")
    i1, i2 = F[0], F[1]
    col = view.color
    v0 = int(view.by_color[i1][0])
    psi: dict[int, dict[tuple, IntegerChain]] = {-1: {(): IntegerChain.face((v0,))}, 0: {}}
    for (u,) in view.faces(0):
        if u == v0:
            psi[0][(u,)] = IntegerChain(1)
        elif view.comparable[v0, u]:
            psi[0][(u,)] = IntegerChain.face((v0, u))
        elif col[u] == i1:
            w = view.find_comparable([v0, u], i2)
            if w is None:
                raise ConeConstructionError(f"no common neighbour of {v0} and {u} in color {i2}")
            psi[0][(u,)] = IntegerChain(1, [((v0, w), 1), ((w, u), 1)])
        else:
            w1 = view.find_comparable([u], i1)
            w2 = view.find_comparable([v0, w1], i2) if w1 is not None else None
            if w2 is None:
                raise ConeConstructionError(f"no path of length 3 from {v0} to {u}")
            psi[0][(u,)] = IntegerChain(1, [((v0, w2), 1), ((w2, w1), 1), ((w1, u), 1)])
    cone = Cone(0, psi, tuple(F))
    for ell in range(0, k):
        nxt: dict[tuple, IntegerChain] = {}
        cone.psi[ell + 1] = nxt
        low = F[consts.c[ell] - 1]
        star_color = F[consts.c[ell + 1] - 1]
        for s in view.faces(ell + 1):
            s = tuple(s)
            R = cone_residue(cone, s)
            sizes = [len(R.terms)]
            high = sorted((v for v in s if col[v] > low), key=lambda v: col[v])
            T_total = IntegerChain(ell + 2)
            for j, v in enumerate(high):
                target = F[consts.c[ell] + j]
                if col[v] == target:
                    continue
                Rv = restrict_to_vertex(R, v)
                if not Rv:
                    continue
                vp = view.find_comparable(sorted(Rv.vertex_support()), target)
                if vp is None:
                    raise ConeConstructionError(f"no shifting vertex of color {target} for {s}")
                T = append_vertex(Rv, vp, view)
                R = R - boundary(T)
                if v in R.vertex_support():
                    raise ConeConstructionError(f"shifting did not remove {v} at {s}")
                T_total = T_total + T
                sizes.append(len(R.terms))
            if R:
                u = view.find_comparable(sorted(R.vertex_support()), star_color)
                if u is None:
                    raise ConeConstructionError(f"no star vertex of color {star_color} for {s}")
                nxt[s] = T_total + append_vertex(R, u, view)
            else:
                nxt[s] = T_total
            cone.shift_trace[s] = sizes
        cone.level = ell + 1
    return cone


def cone_to_bound(radius: int, k_top: int, level: int, homogeneous: bool = True) -> Fraction:
    """Coboundary expansion lower bound ``1 / (radius * C(k_top + 1, level + 1))`` from a cone."""
    if not homogeneous:
        raise ValueError("the cone bound needs a complex with a transitive symmetry group")
    if radius < 1 or not 0 <= level <= k_top:
        raise ValueError("need radius >= 1 and 0 <= level <= k_top")
    return Fraction(1, radius * math.comb(k_top + 1, level + 1))
