"""Assemble a global cochain from locally expanding color restrictions.

Given a level-``k`` cochain ``f`` on a partite complex and a color set ``F``
of size ``k + 2``, :func:`decode` builds a level ``k - 1`` cochain ``g`` in
``k + 1`` steps.  Step 1 solves a nearest-coboundary problem on ``X^F``.
Step ``i`` handles faces with ``i - 1`` vertices colored outside ``F``: for
every such ``s`` the values already fixed turn ``f`` into a local target
``h_s`` on the link ``X_s^F``, and a nearest coboundary there fills in
``g(r + s)``.  The final step picks a weighted plurality constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .cochains import (
    DEFAULT_ENUMERATION_BUDGET,
    BudgetExceeded,
    Cochain,
    coboundary,
    coboundary_values,
)
from .complex import ComplexError, SimplicialComplex, canonical, color_restriction, link
from .expansion import h_exhaustive
from .groups import FiniteGroup
from .linalg import iter_assignments


class HypothesisViolation(RuntimeError):
    """No candidate color set satisfies the averaged error bound."""


# ------------------------------------------------------------ certificates
@dataclass(frozen=True)
class LocalCertificate:
    """A lower bound ``beta`` on the local coboundary constants of ``X^F``."""

    F: tuple[int, ...]
    beta: Fraction | None
    exact: bool
    source: str
    details: tuple = ()

    @property
    def certified(self) -> bool:
        return self.exact and self.beta is not None and self.beta > 0

    def to_json(self) -> dict:
        return {
            "F": list(self.F),
            "beta": None if self.beta is None else float(self.beta),
            "beta_exact": None if self.beta is None else str(self.beta),
            "exact": self.exact,
            "source": self.source,
            "details": [list(d) for d in self.details],
        }


def _restricted_link(X: SimplicialComplex, s: tuple[int, ...], F: Sequence[int]) -> tuple[SimplicialComplex, tuple[int, ...]]:
    """``X_s^F`` together with the map from its vertices to vertices of ``X``."""
    L = link(X, s) if s else X
    to_x = getattr(L, "parent_vertices", tuple(range(X.vertex_count))) if s else tuple(range(X.vertex_count))
    Z = color_restriction(L, F)
    if Z is not L:
        to_x = tuple(to_x[v] for v in Z.parent_vertices)
    return Z, tuple(to_x)


def outside_faces(X: SimplicialComplex, F: Iterable[int], size: int) -> list[tuple[int, ...]]:
    """Faces with ``size`` vertices, all colored outside ``F`` (sorted by vertex id)."""
    F = set(F)
    if size == 0:
        return [()]
    return [t for t in X.faces(size - 1) if not any(X.colors[v] in F for v in t)]


def certify_color_set(
    X: SimplicialComplex,
    F: Iterable[int],
    k: int,
    G: FiniteGroup,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> LocalCertificate:
    """Exhaustive local coboundary constants of ``X^F`` and of its links.

    ``beta`` is the minimum of ``h^k(X^F)`` and ``h^{k-|s|}(X_s^F)`` over faces
    ``s`` colored outside ``F`` with ``|s| <= k + 1``.  Level ``-1`` constants
    equal 1.  Any nontrivial cohomology gives ``beta = 0``; a budget overrun
    gives an uncertified result.
    """
    F = tuple(sorted(int(c) for c in F))
    values: list[tuple] = []
    best: Fraction | None = None
    for size in range(0, k + 2):
        level = k - size
        if level < 0:
            continue
        for s in outside_faces(X, F, size):
            Z, _ = _restricted_link(X, s, F)
            try:
                rep = h_exhaustive(Z, level, G, "coboundary", budget)
            except BudgetExceeded:
                return LocalCertificate(F, None, False, "exhaustive", tuple(values))
            v = Fraction(0) if rep.nontrivial_cohomology else rep.value
            values.append((list(s), level, None if v is None else str(v)))
            if v is not None and (best is None or v < best):
                best = v
    beta = Fraction(1) if best is None else min(best, Fraction(1))
    return LocalCertificate(F, beta, True, "exhaustive", tuple(values))


# --------------------------------------------------------- color selection
@dataclass(frozen=True)
class GoodColorSet:
    F: tuple[int, ...]
    eps_Fj: tuple[Fraction, ...]
    certificate: LocalCertificate
    p: Fraction
    eps: Fraction

    @property
    def beta(self) -> Fraction:
        return self.certificate.beta

    def to_json(self) -> dict:
        return {
            "F": list(self.F),
            "eps_Fj": [float(e) for e in self.eps_Fj],
            "beta": float(self.beta),
            "p": float(self.p),
            "eps": float(self.eps),
            "certificate": self.certificate.to_json(),
        }


def conditional_error_rates(X: SimplicialComplex, df: Cochain, F: Iterable[int]) -> tuple[Fraction, ...]:
    """``Pr[df(t) != 0 | |col(t) & F| = j]`` over ``t`` in ``X(k+1)``, for ``j = 1..|F|``.

    A value is 0 when no face has ``j`` colors in ``F``.
    """
    F = set(F)
    level = df.level
    faces = X.faces(level)
    mass = X.mass(level)
    hits = np.fromiter((sum(X.colors[v] in F for v in t) for t in faces), dtype=np.int64, count=len(faces))
    bad = df.values != 0
    out = []
    for j in range(1, len(F) + 1):
        sel = hits == j
        tot = int(mass[sel].sum())
        out.append(Fraction(int(mass[sel & bad].sum()), tot) if tot else Fraction(0))
    return tuple(out)


def select_good_F(
    X: SimplicialComplex,
    f: Cochain,
    candidates: Sequence[LocalCertificate],
    p: Fraction | float | None = None,
) -> GoodColorSet:
    """A certified color set whose conditional rates satisfy the averaged bound.

    Certified candidates are tried in order of increasing ``sum_j eps_{F,j}``
    (ties by ``F``); the first with every ``eps_{F,j} <= (k+2) eps / p`` wins.
    ``p`` defaults to the certified fraction of the candidates.
    """
    if not candidates:
        raise HypothesisViolation("no candidate color sets")
    certified = [c for c in candidates if c.certified]
    frac = Fraction(len(certified), len(candidates))
    p = frac if p is None else Fraction(p).limit_denominator(10**9) if isinstance(p, float) else Fraction(p)
    if not certified or frac < p:
        raise HypothesisViolation(f"only {frac} of the candidates are certified, need {p}")
    k = f.level
    df = coboundary(f)
    eps = Fraction(int(X.mass(k + 1)[df.values != 0].sum()), X.denominator(k + 1))
    limit = (k + 2) * eps / p
    scored = []
    for c in certified:
        if len(c.F) != k + 2:
            raise ValueError(f"color sets must have size {k + 2}, got {c.F}")
        rates = conditional_error_rates(X, df, c.F)
        scored.append((sum(rates), c.F, rates, c))
    scored.sort(key=lambda t: (t[0], t[1]))
    for _, F, rates, c in scored:
        if all(r <= limit for r in rates):
            return GoodColorSet(F, rates, c, p, eps)
    raise HypothesisViolation(f"no certified color set has all conditional rates <= {float(limit):.6g}")


# ---------------------------------------------------------------- decoding
def stratum_bound(i: int, k: int, beta, p, eps) -> float:
    """Bound on the mismatch rate among ``k``-faces with ``i`` vertices colored outside ``F``."""
    b, p, e = float(beta), float(p), float(eps)
    if i <= k:
        return (k + 2) * math.factorial(i) * b ** -(i + 1) / p * e * sum(1 / math.factorial(j) for j in range(i + 1))
    return math.factorial(k + 2) * b ** -(k + 1) / p * e * sum(1 / math.factorial(j) for j in range(k + 2))


def overall_bound(k: int, beta, p, eps) -> float:
    return math.e * math.factorial(k + 2) / (float(p) * float(beta) ** (k + 1)) * float(eps)


@dataclass
class LocalSolve:
    """One nearest-coboundary problem solved during decoding."""

    s: tuple[int, ...]
    level: int
    h: np.ndarray
    g0: np.ndarray
    complex: SimplicialComplex
    to_x: tuple[int, ...]
    exact: bool


@dataclass
class DecodeReport:
    F: tuple[int, ...]
    eps_Fj: tuple[Fraction, ...]
    beta: Fraction
    p: Fraction
    eps: Fraction
    dist_i: list[Fraction]
    bound_i: list[float]
    overall: Fraction
    bound: float
    verified: bool
    disjunction_failures: int = 0
    solves: list[LocalSolve] = field(default_factory=list, repr=False)
    tolerance: float = 1e-9

    @property
    def passed(self) -> bool:
        ok = float(self.overall) <= self.bound + self.tolerance
        return ok and all(float(d) <= b + self.tolerance for d, b in zip(self.dist_i, self.bound_i))

    def to_json(self) -> dict:
        return {
            "F": list(self.F),
            "eps_Fj": [float(e) for e in self.eps_Fj],
            "beta": float(self.beta),
            "p": float(self.p),
            "eps": float(self.eps),
            "dist_i": [float(d) for d in self.dist_i],
            "bound_i": list(self.bound_i),
            "overall": float(self.overall),
            "bound": self.bound,
            "verified": self.verified,
            "passed": self.passed,
            "disjunction_failures": self.disjunction_failures,
        }


class _Partial:
    """A level ``k - 1`` cochain on ``X`` filled in face by face."""

    def __init__(self, X: SimplicialComplex, level: int, G: FiniteGroup):
        self.X, self.level, self.G = X, level, G
        self.values = np.zeros(X.n_faces(level), dtype=np.int64)
        self.known = np.zeros(X.n_faces(level), dtype=bool)

    def __call__(self, face: Sequence[int]) -> int:
        key, sign = canonical(face)
        i = self.X.index(key)
        if not self.known[i]:
            raise RuntimeError(f"g is not yet defined on {key}")
        return int(self.G.power(self.values[i], sign))

    def set(self, face: Sequence[int], value: int) -> None:
        key, sign = canonical(face)
        i = self.X.index(key)
        self.values[i] = self.G.power(int(value), sign)
        self.known[i] = True


def _minimize(h: Cochain, budget: int, seed: int) -> tuple[np.ndarray, bool]:
    """A preimage ``g0`` minimising ``dist(h, dg0)``; ties go to the smallest ``g0``."""
    Z, m, G = h.complex, h.level, h.group
    mass = Z.mass(m)
    if m == 0:
        # constants: weighted plurality
        tot = np.zeros(G.order, dtype=object)
        for v, w in zip(h.values, mass):
            tot[int(v)] += int(w)
        return np.array([int(np.argmax(tot))], dtype=np.int64), True
    n = Z.n_faces(m - 1)
    if G.order**n <= budget:
        best, best_row = None, None
        for block in iter_assignments(G.order, n, chunk=1 << 12):
            up = coboundary_values(Z, G, m - 1, block)
            d = (up != h.values).astype(mass.dtype) @ mass
            j = int(np.argmin(d))
            if best is None or d[j] < best:
                best, best_row = d[j], block[j].copy()
        return best_row, True
    from .milp import UnsupportedModel, nearest_coboundary_preimage

    try:
        g, optimal = nearest_coboundary_preimage(h)
        return g.values.copy(), optimal
    except UnsupportedModel:
        return _descent(h, seed), False


def _descent(h: Cochain, seed: int, rounds: int = 50) -> np.ndarray:
    """Coordinate descent from a random start; used when no exact method applies."""
    Z, m, G = h.complex, h.level, h.group
    mass = Z.mass(m)
    rng = np.random.default_rng(seed)
    g = rng.integers(0, G.order, Z.n_faces(m - 1))

    def cost(x):
        return int((coboundary_values(Z, G, m - 1, x) != h.values).astype(mass.dtype) @ mass)

    cur = cost(g)
    for _ in range(rounds):
        improved = False
        for i in range(g.size):
            old = g[i]
            for a in range(G.order):
                if a == old:
                    continue
                g[i] = a
                c = cost(g)
                if c < cur:
                    cur, old, improved = c, a, True
            g[i] = old
        if not improved:
            break
    return g


def decode(
    X: SimplicialComplex,
    f: Cochain,
    F: GoodColorSet,
    beta=None,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    seed: int = 0,
    keep_solves: bool = False,
    tolerance: float = 1e-9,
) -> tuple[Cochain, DecodeReport]:
    """Build ``g`` at level ``k - 1`` with ``dg`` close to ``f``.

    ``beta`` defaults to the certified constant carried by ``F``.  The report
    compares the measured per-stratum distances with their bounds; it is
    ``verified`` when every local minimisation was exact and ``beta`` is
    certified.
    """
    if X.colors is None:
        raise ComplexError("decoding needs a partite complex")
    G, k = f.group, f.level
    if k < 1:
        raise ValueError("decoding needs a cochain of level >= 1")
    if not G.is_abelian and k > 1:
        raise ValueError("non-abelian decoding is defined only for k = 1")
    beta = F.beta if beta is None else Fraction(beta)
    Fs = F.F
    g = _Partial(X, k - 1, G)
    exact = True
    solves: list[LocalSolve] = []
    failures = 0
    for step in range(1, k + 2):
        for s in outside_faces(X, Fs, step - 1):
            try:
                Z, to_x = _restricted_link(X, s, Fs)
            except ComplexError:
                continue
            m = k - step + 1
            h = np.empty(Z.n_faces(m), dtype=np.int64)
            for idx, a in enumerate(Z.faces(m)):
                h[idx] = _local_target(f, g, tuple(to_x[v] for v in a), s)
            h_c = Cochain(Z, m, G, h)
            g0, ok = _minimize(h_c, budget, seed)
            exact &= ok
            for idx, r in enumerate(Z.faces(m - 1)):
                g.set(tuple(to_x[v] for v in r) + s, g0[idx])
            if G.is_abelian and step >= 2 and m + 1 <= Z.dimension:
                failures += _check_disjunction(X, f, g, Z, to_x, s, h_c)
            if keep_solves:
                solves.append(LocalSolve(s, m, h, g0, Z, to_x, ok))
    gc = Cochain(X, k - 1, G, g.values)
    report = _measure(X, f, gc, F, beta, exact, tolerance)
    report.disjunction_failures = failures
    report.solves = solves
    return gc, report


def _local_target(f: Cochain, g: _Partial, a: tuple[int, ...], s: tuple[int, ...]) -> int:
    """``h_s(a)``: ``f(a + s)`` with the contributions of already fixed values removed."""
    G = f.group
    if not s:
        return f(a)
    if not G.is_abelian:
        # k = 1, a = (u,), s = (v,): h_v(u) = f(vu) g(u)
        return G.mul(f(s + a), g(a))
    acc = f(a + s)
    sign = -1 if len(a) % 2 else 1
    for l in range(len(s)):
        term = g(a + s[:l] + s[l + 1:])
        acc = G.mul(acc, G.power(term, -sign if l % 2 == 0 else sign))
    return int(acc)


def _check_disjunction(X, f, g, Z, to_x, s, h_c) -> int:
    """Count ``r`` with ``dh_s(r) != 0`` where neither a sub-face mismatch nor ``df(r + s) != 0`` occurs."""
    G = f.group
    dh = coboundary_values(Z, G, h_c.level, h_c.values)
    bad = 0
    for idx in np.flatnonzero(dh != 0):
        r = tuple(to_x[v] for v in Z.faces(h_c.level + 1)[idx])
        t = r + s
        if _df(f, t) != 0:
            continue
        if any(f(r + s[:l] + s[l + 1:]) != _dg(g, r + s[:l] + s[l + 1:]) for l in range(len(s))):
            continue
        bad += 1
    return bad


def _df(f: Cochain, t: tuple[int, ...]) -> int:
    acc = 0
    for j in range(len(t)):
        acc = f.group.mul(acc, f.group.power(f(t[:j] + t[j + 1:]), -1 if j % 2 else 1))
    return acc


def _dg(g: _Partial, t: tuple[int, ...]) -> int:
    acc = 0
    for j in range(len(t)):
        acc = g.G.mul(acc, g.G.power(g(t[:j] + t[j + 1:]), -1 if j % 2 else 1))
    return acc


def strata(X: SimplicialComplex, k: int, F: Iterable[int]) -> np.ndarray:
    """Number of vertices colored outside ``F`` for every ``k``-face."""
    F = set(F)
    return np.fromiter((sum(X.colors[v] not in F for v in t) for t in X.faces(k)), dtype=np.int64, count=X.n_faces(k))


def _measure(X, f, g, F: GoodColorSet, beta, exact, tolerance) -> DecodeReport:
    k = f.level
    dg = coboundary(g)
    mism = dg.values != f.values
    mass = X.mass(k)
    st = strata(X, k, F.F)
    dist_i, bound_i = [], []
    for i in range(k + 2):
        sel = st == i
        tot = int(mass[sel].sum())
        dist_i.append(Fraction(int(mass[sel & mism].sum()), tot) if tot else Fraction(0))
        bound_i.append(stratum_bound(i, k, beta, F.p, F.eps))
    overall = Fraction(int(mass[mism].sum()), X.denominator(k))
    verified = bool(exact and F.certificate.certified)
    return DecodeReport(
        F.F, F.eps_Fj, beta, F.p, F.eps, dist_i, bound_i, overall, overall_bound(k, beta, F.p, F.eps), verified,
        tolerance=tolerance,
    )
