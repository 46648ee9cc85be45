"""Local correction of cochains, local minimality and averaging operators.

``correct`` repeatedly replaces ``f`` on the star of a face ``r`` (all
``k``-faces containing ``r``) by an optimal assignment whenever that removes
at least an ``eta * Pr(star)`` mass of nonzero coboundary values.  Faces are
scanned by increasing level, then face index, and the scan restarts after
every change.  Star assignments are searched exhaustively when there are at
most ``budget`` of them; otherwise a seeded hill climb is used and the run is
marked non-exhaustive.

``is_locally_minimal`` checks the restriction-based definition directly on
links and shares no code path with ``correct`` apart from the enumeration
kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy import sparse

from . import kernels
from .cochains import DEFAULT_ENUMERATION_BUDGET, BudgetExceeded, Cochain, coboundary, coboundary_values
from .complex import SimplicialComplex, permutation_sign

FIX_BUDGET = 1 << 20


def _fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# --------------------------------------------------------------- correction
@dataclass(frozen=True)
class CorrectionStep:
    face: tuple
    level: int
    assignment: tuple
    delta_wt: Fraction
    star_mass: Fraction


@dataclass
class CorrectionTrace:
    initial: Cochain
    eta: Fraction
    steps: list[CorrectionStep] = field(default_factory=list)
    final: Cochain | None = None
    exhaustive: bool = True

    @property
    def iterations(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "eta": float(self.eta),
            "steps": [
                {"face": list(s.face), "level": s.level, "delta_wt": float(s.delta_wt), "assignment": list(s.assignment)}
                for s in self.steps
            ],
            "iterations": self.iterations,
            "exhaustive": self.exhaustive,
        }

    def replay(self) -> Cochain:
        """Re-apply the recorded fixes to ``initial`` and check each step's contract."""
        f = self.initial
        X, k = f.complex, f.level
        prev = _delta_weight(f)
        for step in self.steps:
            vals = f.values.copy()
            vals[X.containing(step.face, k)] = step.assignment
            f = f.with_values(vals)
            cur = _delta_weight(f)
            if prev - cur != step.delta_wt or step.delta_wt < self.eta * step.star_mass or cur >= prev:
                raise AssertionError(f"trace step at {step.face} does not replay")
            prev = cur
        return f


def _delta_weight(f: Cochain) -> Fraction:
    X, k = f.complex, f.level
    vals = coboundary_values(X, f.group, k, f.values)
    return Fraction(int((vals != 0).astype(X.mass(k + 1).dtype) @ X.mass(k + 1)), X.denominator(k + 1))


def _delta_factors(X: SimplicialComplex, G, k: int) -> list[tuple[int, int]]:
    """Coboundary at level ``k`` as an ordered product of ``(boundary slot, exponent)``."""
    if G.is_abelian:
        return [(i, 1 if i % 2 == 0 else -1) for i in range(k + 2)]
    if k == 0:
        return [(1, 1), (0, -1)]
    if k == 1:
        return [(2, 1), (0, 1), (1, -1)]
    raise ValueError("non-abelian coboundary only up to level 1")


@dataclass
class _StarProblem:
    positions: np.ndarray  # k-face indices of the star
    affected: np.ndarray  # (k+1)-face indices touching the star
    src: np.ndarray
    fixed_faces: np.ndarray
    expo: np.ndarray
    umass: np.ndarray
    star_mass: int


def _star_problem(X: SimplicialComplex, G, k: int, r: tuple) -> _StarProblem:
    positions = np.array(X.containing(r, k), dtype=np.int64)
    pos_of = {int(p): i for i, p in enumerate(positions)}
    cof = X.cofaces(k)
    affected = np.array(sorted({int(u) for p in positions for u in cof[p]}), dtype=np.int64)
    B = X.boundary_indices(k + 1)
    factors = _delta_factors(X, G, k)
    L = len(factors)
    src = np.full((affected.size, L), -1, dtype=np.int64)
    fixed = np.zeros((affected.size, L), dtype=np.int64)
    expo = np.zeros((affected.size, L), dtype=np.int64)
    for a, u in enumerate(affected):
        for l, (slot, e) in enumerate(factors):
            face = int(B[u, slot])
            expo[a, l] = e
            if face in pos_of:
                src[a, l] = pos_of[face]
            else:
                fixed[a, l] = face
    umass = X.mass(k + 1)[affected].astype(np.int64)
    return _StarProblem(positions, affected, src, fixed, expo, umass, int(sum(int(x) for x in X.mass(k)[positions])))


def _evaluate(G, prob: _StarProblem, fixed_vals: np.ndarray, assignment: np.ndarray) -> int:
    acc = np.zeros(prob.affected.size, dtype=np.int64)
    for l in range(prob.src.shape[1]):
        s = prob.src[:, l]
        term = np.where(s >= 0, assignment[np.maximum(s, 0)], fixed_vals[:, l])
        term = np.where(prob.expo[:, l] < 0, G.inverse[term], term)
        acc = G.table[acc, term]
    return int((acc != 0).astype(np.int64) @ prob.umass)


def _hill_climb(G, prob, fixed_vals, start, rng, restarts: int = 8):
    m, q = start.size, G.order
    best_a, best_m = start.copy(), _evaluate(G, prob, fixed_vals, start)
    for attempt in range(restarts + 1):
        a = start.copy() if attempt == 0 else rng.integers(0, q, size=m)
        cur = _evaluate(G, prob, fixed_vals, a)
        improved = True
        while improved:
            improved = False
            for i in range(m):
                keep = a[i]
                for v in range(q):
                    if v == keep:
                        continue
                    a[i] = v
                    w = _evaluate(G, prob, fixed_vals, a)
                    if w < cur:
                        cur, keep, improved = w, v, True
                a[i] = keep
        if cur < best_m or (cur == best_m and tuple(a) < tuple(best_a)):
            best_a, best_m = a.copy(), cur
    return best_m, best_a


def correct(
    f: Cochain,
    eta,
    budget: int = FIX_BUDGET,
    seed: int = 0,
    max_iterations: int | None = None,
) -> tuple[Cochain, CorrectionTrace]:
    """Run the local correction loop on ``f`` with parameter ``eta`` in ``(0, 1]``."""
    eta = _fraction(eta)
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    X, k, G = f.complex, f.level, f.group
    if k > X.dimension - 1:
        raise ValueError("correction needs k <= d-1")
    if not G.is_abelian and k > 1:
        raise ValueError("non-abelian correction is defined only for k <= 1")
    rng = np.random.default_rng(seed)
    trace = CorrectionTrace(initial=f, eta=eta)
    den_k, den_up = X.denominator(k), X.denominator(k + 1)
    problems: dict[tuple, _StarProblem] = {}
    vals = f.values.copy()
    up = coboundary_values(X, G, k, vals)
    while max_iterations is None or trace.iterations < max_iterations:
        applied = False
        for level in range(0, k + 1):
            for r in X.faces(level):
                if r not in problems:
                    problems[r] = _star_problem(X, G, k, r)
                prob = problems[r]
                if prob.affected.size == 0:
                    continue
                cur = int((up[prob.affected] != 0).astype(np.int64) @ prob.umass)
                if cur == 0:
                    continue
                fixed_vals = vals[prob.fixed_faces]
                m = prob.positions.size
                if G.order**m <= budget:
                    best_m, best_a = kernels.star_search(G.table, G.inverse, prob.src, fixed_vals, prob.expo, prob.umass, m)
                else:
                    trace.exhaustive = False
                    best_m, best_a = _hill_climb(G, prob, fixed_vals, vals[prob.positions].copy(), rng)
                gain = cur - best_m
                # gain / den_up >= eta * star_mass / den_k
                if gain > 0 and Fraction(gain * den_k) >= eta * prob.star_mass * den_up:
                    vals[prob.positions] = best_a
                    up[prob.affected] = coboundary_values(X, G, k, vals)[prob.affected]
                    trace.steps.append(
                        CorrectionStep(
                            tuple(r),
                            level,
                            tuple(int(x) for x in best_a),
                            Fraction(gain, den_up),
                            Fraction(prob.star_mass, den_k),
                        )
                    )
                    applied = True
                    break
            if applied:
                break
        if not applied:
            break
    trace.final = f.with_values(vals)
    return trace.final, trace


# --------------------------------------------------------- local minimality
@dataclass(frozen=True)
class Violation:
    face: tuple
    level: int
    assignment: tuple
    improvement: Fraction


def _oriented_values(g: Cochain, coboundary_of: Cochain | None):
    """Value of ``g`` on an ordered face; a non-abelian ``g = delta f`` is evaluated from ``f``."""
    G = g.group
    if coboundary_of is None:
        return lambda t, face: int(G.power(g.values[t], permutation_sign(face)))
    f = coboundary_of

    def value(t, face):
        a, b, c = face
        return int(G.table[G.table[f((a, b)), f((b, c))], f((c, a))])

    return value


def _link_problems(g: Cochain, coboundary_of: Cochain | None = None):
    """Yield ``(r, level, src, fixed, expo, umass, m)`` for every local-minimality test."""
    X, kk, G = g.complex, g.level, g.group
    vals = g.values
    value = _oriented_values(g, coboundary_of)
    mass = X.mass(kk)
    faces_top = X.faces(kk)
    if G.is_abelian:
        for level in range(0, kk):
            for r in X.faces(level):
                rset = set(r)
                targets = X.containing(r, kk)
                if level == kk - 1:
                    dom_index = {(): 0}
                else:
                    dom_index = {
                        tuple(v for v in X.faces(kk - 1)[i] if v not in rset): n
                        for n, i in enumerate(X.containing(r, kk - 1))
                    }
                L = 1 + (kk - level)
                src = np.full((len(targets), L), -1, dtype=np.int64)
                fixed = np.zeros((len(targets), L), dtype=np.int64)
                expo = np.ones((len(targets), L), dtype=np.int64)
                for a, t in enumerate(targets):
                    x = tuple(v for v in faces_top[t] if v not in rset)
                    fixed[a, 0] = vals[t]
                    expo[a, 0] = permutation_sign(tuple(r) + x)
                    if len(x) == 1:
                        src[a, 1] = 0
                    else:
                        for i in range(len(x)):
                            src[a, 1 + i] = dom_index[x[:i] + x[i + 1:]]
                            expo[a, 1 + i] = 1 if i % 2 == 0 else -1
                yield tuple(r), level, src, fixed, expo, mass[targets].astype(np.int64), len(dom_index)
        return
    if kk == 1:
        for (v,) in X.faces(0):
            targets = X.containing((v,), 1)
            src = np.full((len(targets), 2), -1, dtype=np.int64)
            fixed = np.zeros((len(targets), 2), dtype=np.int64)
            expo = np.ones((len(targets), 2), dtype=np.int64)
            for a, t in enumerate(targets):
                (u,) = (x for x in faces_top[t] if x != v)
                src[a, 0] = 0
                fixed[a, 1] = vals[t]
                expo[a, 1] = permutation_sign((v, u))
            yield (v,), 0, src, fixed, expo, mass[targets].astype(np.int64), 1
        return
    if kk != 2:
        raise ValueError("non-abelian local minimality is defined for levels 1 and 2")
    for r in X.faces(1):
        targets = X.containing(r, 2)
        for orient in (r, r[::-1]):
            src = np.full((len(targets), 2), -1, dtype=np.int64)
            fixed = np.zeros((len(targets), 2), dtype=np.int64)
            expo = np.ones((len(targets), 2), dtype=np.int64)
            for a, t in enumerate(targets):
                (w,) = (x for x in faces_top[t] if x not in r)
                src[a, 0] = 0
                fixed[a, 1] = value(t, orient + (w,))
            yield orient, 1, src, fixed, expo, mass[targets].astype(np.int64), 1
    for (v,) in X.faces(0):
        targets = X.containing((v,), 2)
        nbrs = sorted({x for t in targets for x in faces_top[t] if x != v})
        pos = {u: i for i, u in enumerate(nbrs)}
        src = np.full((len(targets), 3), -1, dtype=np.int64)
        fixed = np.zeros((len(targets), 3), dtype=np.int64)
        expo = np.ones((len(targets), 3), dtype=np.int64)
        for a, t in enumerate(targets):
            u, w = (x for x in faces_top[t] if x != v)
            # h(u)^{-1} g_v(uw) h(w)
            src[a, 0], expo[a, 0] = pos[u], -1
            fixed[a, 1] = value(t, (v, u, w))
            src[a, 2] = pos[w]
        yield (v,), 0, src, fixed, expo, mass[targets].astype(np.int64), len(nbrs)


def is_locally_minimal(
    g: Cochain, eta, budget: int = DEFAULT_ENUMERATION_BUDGET, coboundary_of: Cochain | None = None
) -> tuple[bool, Violation | None]:
    """``eta``-local minimality of ``g``; returns the first violation found.

    A violation is a face ``r`` and a local change (a coboundary shift on
    the link of ``r``, or the non-abelian analogues) lowering the weight of
    the restriction of ``g`` to ``r`` by more than ``eta``.  For a
    non-abelian level-2 ``g`` the values on reordered triangles depend on
    the level-1 cochain it came from; pass it as ``coboundary_of``.
    """
    eta = _fraction(eta)
    G = g.group
    for r, level, src, fixed, expo, umass, m in _link_problems(g, coboundary_of):
        total = int(umass.sum())
        if total == 0:
            continue
        if G.order**m > budget:
            raise BudgetExceeded(f"local search at {r} needs {G.order}^{m} assignments")
        acc = np.zeros(src.shape[0], dtype=np.int64)
        for l in range(src.shape[1]):
            if np.all(src[:, l] < 0) and np.all(fixed[:, l] == 0):
                continue
            term = np.where(src[:, l] >= 0, 0, fixed[:, l])
            term = np.where(expo[:, l] < 0, G.inverse[term], term)
            acc = G.table[acc, term]
        cur = int((acc != 0).astype(np.int64) @ umass)
        best, assignment = kernels.star_search(G.table, G.inverse, src, fixed, expo, umass, m)
        improvement = Fraction(cur - best, total)
        if improvement > eta:
            return False, Violation(r, level, tuple(int(x) for x in assignment), improvement)
    return True, None


# ------------------------------------------------------ averaging operators
@dataclass(frozen=True)
class RealFunction:
    """A real function on ``X(level)`` with the ``Pr_level``-weighted inner product."""

    complex: SimplicialComplex
    level: int
    values: np.ndarray

    def inner(self, other: "RealFunction") -> float:
        if other.level != self.level:
            raise ValueError("levels differ")
        return float(np.sum(self.complex.prob(self.level) * self.values * other.values))

    def norm2(self) -> float:
        return self.inner(self)


def down_matrix(X: SimplicialComplex, k: int) -> sparse.csr_matrix:
    """``D_k``: ``X(k) -> X(k-1)``, ``Df(s) = E_{t > s} f(t)``."""
    key = ("D", k)
    if key not in X._cache:
        pk, pl = X.prob(k), X.prob(k - 1)
        if k == 0:
            rows = np.zeros(X.n_faces(0), dtype=np.int64)
            cols = np.arange(X.n_faces(0))
            data = pk / pl[0]
        else:
            B = X.boundary_indices(k)
            rows = B.reshape(-1)
            cols = np.repeat(np.arange(X.n_faces(k)), k + 1)
            data = pk[cols] / ((k + 1) * pl[rows])
        X._cache[key] = sparse.csr_matrix((data, (rows, cols)), shape=(X.n_faces(k - 1), X.n_faces(k)))
    return X._cache[key]


def up_matrix(X: SimplicialComplex, k: int) -> sparse.csr_matrix:
    """``U_k``: ``X(k) -> X(k+1)``, ``Uf(t) = E_{s < t} f(s)``."""
    key = ("U", k)
    if key not in X._cache:
        n_up = X.n_faces(k + 1)
        if k == -1:
            M = sparse.csr_matrix(np.ones((n_up, 1)))
        else:
            B = X.boundary_indices(k + 1)
            rows = np.repeat(np.arange(n_up), k + 2)
            M = sparse.csr_matrix(
                (np.full(rows.size, 1.0 / (k + 2)), (rows, B.reshape(-1))), shape=(n_up, X.n_faces(k))
            )
        X._cache[key] = M
    return X._cache[key]


def n_matrix(X: SimplicialComplex, k: int, j: int) -> sparse.csr_matrix:
    """``N_{k->j}``: pick ``t > r`` in ``X(k+1)``, then a ``k``-face of ``t`` missing a vertex of ``r``."""
    if not 0 <= j <= k < X.dimension:
        raise ValueError("need 0 <= j <= k < d")
    key = ("N", k, j)
    if key not in X._cache:
        pt, pj = X.prob(k + 1), X.prob(j)
        norm = math.comb(k + 2, j + 1)
        rows, cols, data = [], [], []
        for ti, t in enumerate(X.faces(k + 1)):
            for r in combinations(t, j + 1):
                ri = X.index(r)
                w = pt[ti] / (norm * pj[ri] * (j + 1))
                for v in r:
                    s = tuple(x for x in t if x != v)
                    rows.append(ri)
                    cols.append(X.index(s))
                    data.append(w)
        X._cache[key] = sparse.csr_matrix((data, (rows, cols)), shape=(X.n_faces(j), X.n_faces(k)))
    return X._cache[key]


def down(f: RealFunction, times: int = 1) -> RealFunction:
    vals, level = np.asarray(f.values, dtype=np.float64), f.level
    for _ in range(times):
        vals = down_matrix(f.complex, level) @ vals
        level -= 1
    return RealFunction(f.complex, level, vals)


def up(f: RealFunction, times: int = 1) -> RealFunction:
    vals, level = np.asarray(f.values, dtype=np.float64), f.level
    for _ in range(times):
        vals = up_matrix(f.complex, level) @ vals
        level += 1
    return RealFunction(f.complex, level, vals)


def n_walk(f: RealFunction, j: int) -> RealFunction:
    return RealFunction(f.complex, j, n_matrix(f.complex, f.level, j) @ np.asarray(f.values, dtype=np.float64))


def _power(mats) -> sparse.csr_matrix:
    out = None
    for M in mats:
        out = M if out is None else M @ out
    return out


def walk_comparison_operators(X: SimplicialComplex, k: int, j: int):
    """``(U^{k-j} N_{k->j}, U^{k-j+1} D^{k-j+1})`` as operators on ``X(k)``."""
    N = n_matrix(X, k, j)
    lhs = _power([up_matrix(X, l) for l in range(j, k)])
    lhs = N if lhs is None else lhs @ N
    D = _power([down_matrix(X, l) for l in range(k, j - 1, -1)])
    U = _power([up_matrix(X, l) for l in range(j - 1, k)])
    return lhs, U @ D


@dataclass
class OperatorCheck:
    k: int
    j: int
    lam: float
    trials: int
    violations: int
    max_excess: float
    spectral_excess: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.spectral_excess <= self.tolerance


def verify_walk_inequality(
    X: SimplicialComplex, k: int, j: int, trials: int = 1000, seed: int = 0, lam: float | None = None, tolerance: float = 1e-9
) -> OperatorCheck:
    """Check ``<f, U^{k-j} N f> <= <f, U^{k-j+1} D^{k-j+1} f> + lam <f, f>``.

    ``lam`` defaults to the one-sided local spectral bound of ``X`` clipped
    at zero.  Besides random trials, the largest eigenvalue of the
    symmetrised difference is compared with ``lam``.
    """
    if lam is None:
        from .expansion import spectral_certificate

        lam = spectral_certificate(X).value
    lam = max(float(lam), 0.0)
    A, B = walk_comparison_operators(X, k, j)
    pi = X.prob(k)
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((trials, X.n_faces(k)))
    M = (A - B).toarray()
    lhs_minus_rhs = np.einsum("ti,i,ti->t", F, pi, (M @ F.T).T)
    excess = lhs_minus_rhs - lam * np.einsum("ti,i,ti->t", F, pi, F)
    # symmetric form of <f, M f>_pi relative to <f, f>_pi
    s = np.sqrt(pi)
    S = (s[:, None] * M / s[None, :])
    S = (S + S.T) / 2
    top = float(np.linalg.eigvalsh(S)[-1])
    return OperatorCheck(k, j, lam, trials, int(np.sum(excess > tolerance)), float(excess.max(initial=-np.inf)), top - lam, tolerance)


# ------------------------------------------------- link weight inequality
@dataclass
class LinkWeightReport:
    level: int
    rows: list[tuple]  # (face, j, lhs, rhs)
    eta: Fraction
    tolerance: float = 1e-12

    @property
    def passed(self) -> bool:
        return all(lhs >= rhs - self.tolerance for _, _, lhs, rhs in self.rows)

    @property
    def worst_slack(self) -> float:
        return min((lhs - rhs for _, _, lhs, rhs in self.rows), default=math.inf)


class PreconditionError(ValueError):
    """A verifier was called on input that does not meet its hypotheses."""


def link_coboundary_constant(X: SimplicialComplex, r: tuple, level: int, G, budget: int = DEFAULT_ENUMERATION_BUDGET) -> Fraction:
    """Exact ``h^level`` of the link of ``r`` (0 when its cohomology is nontrivial)."""
    from .complex import link
    from .expansion import h_exhaustive

    rep = h_exhaustive(link(X, r), level, G, "coboundary", budget)
    return Fraction(0) if rep.value is None else rep.value if not rep.nontrivial_cohomology else Fraction(0)


def verify_link_weight_inequality(
    g: Cochain,
    eta,
    beta=None,
    faces: list[tuple] | None = None,
    coboundary_of: Cochain | None = None,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> LinkWeightReport:
    """Pointwise check of ``N h(r) >= beta/(j+1) (D^{k-j} h(r) - eta)`` with ``h = 1[g != 0]``.

    ``beta`` is a number (used for every link), a mapping ``face -> beta`` or
    ``None`` to compute each link constant exactly.  ``g`` must be an
    ``eta``-locally minimal cocycle; for non-abelian level-2 input pass the
    level-1 cochain it is the coboundary of as ``coboundary_of``.
    """
    eta = _fraction(eta)
    X, kk, G = g.complex, g.level, g.group
    if coboundary_of is not None:
        if coboundary(coboundary_of) != g:
            raise PreconditionError("g is not the coboundary of the given cochain")
    elif kk < X.dimension and not (not G.is_abelian and kk == 2):
        if np.any(coboundary_values(X, G, kk, g.values) != 0):
            raise PreconditionError("g is not a cocycle")
    elif not G.is_abelian and kk == 2:
        raise PreconditionError("non-abelian level-2 input needs coboundary_of")
    ok, _ = is_locally_minimal(g, eta, budget, coboundary_of if not G.is_abelian else None)
    if not ok:
        raise PreconditionError("g is not eta-locally minimal")
    h = RealFunction(X, kk, (g.values != 0).astype(np.float64))
    rows = []
    for j in range(0, kk):
        if kk >= X.dimension:
            break
        Nh = n_walk(h, j).values
        Dh = down(h, kk - j).values
        for r in faces if faces is not None else X.faces(j):
            if len(r) != j + 1:
                continue
            if beta is None:
                b = link_coboundary_constant(X, r, kk - j - 1, G, budget)
            elif isinstance(beta, dict):
                b = beta[tuple(r)]
            else:
                b = beta
            i = X.index(r)
            rows.append((tuple(r), j, float(Nh[i]), float(b) / (j + 1) * (float(Dh[i]) - float(eta))))
    return LinkWeightReport(kk, rows, eta)
