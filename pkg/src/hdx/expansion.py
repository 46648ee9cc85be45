"""Expansion constants, spectral certificates and closed-form bounds.

``h_exhaustive`` computes

    h^k = min_{f outside S} wt(df) / dist(f, S),   S = B^k or Z^k,

exactly.  For prime cyclic groups the whole of ``C^k`` is scanned once and
every vector is sorted into its coset of ``S`` through a linear key map;
``wt(df)`` is constant on cosets and ``dist(f, S)`` is the minimum weight in
the coset of ``f``.  Other groups are brute forced against an explicit list
of the elements of ``S``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .cochains import (
    DEFAULT_ENUMERATION_BUDGET,
    BudgetExceeded,
    Cochain,
    DistanceResult,
    Space,
    coboundary_values,
    distance,
    distance_to_space,
    space_basis_mod_p,
    space_elements,
    weight,
    weight_mass,
)
from .complex import SimplicialComplex
from .groups import FiniteGroup, cyclic
from .linalg import coset_key_map, iter_assignments, rref_mod_p

SPECTRAL_TOLERANCE = 1e-9


@dataclass
class ExpansionReport:
    level: int
    group: str
    mode: str
    value: Fraction | None
    witness: Cochain | None
    method: str
    budget_used: int
    exact: bool = True
    nontrivial_cohomology: bool = False
    cosystolic_value: Fraction | None = None
    min_nontrivial_cocycle_weight: Fraction | None = None
    seed: int | None = None

    def to_json(self) -> dict:
        def num(x):
            return None if x is None else float(x)

        out = {
            "kind": "expansion",
            "params": {"level": self.level, "group": self.group, "mode": self.mode},
            "value": num(self.value),
            "value_exact": None if self.value is None else str(self.value),
            "method": self.method,
            "exact": self.exact,
            "budget_used": self.budget_used,
            "nontrivial_cohomology": self.nontrivial_cohomology,
            "seed": self.seed,
        }
        if self.cosystolic_value is not None:
            out["cosystolic_value"] = num(self.cosystolic_value)
        if self.min_nontrivial_cocycle_weight is not None:
            out["min_nontrivial_cocycle_weight"] = num(self.min_nontrivial_cocycle_weight)
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def _check_level(X: SimplicialComplex, k: int, G: FiniteGroup) -> None:
    if not 0 <= k <= X.dimension - 1:
        raise ValueError(f"expansion at level {k} needs 0 <= k <= d-1 = {X.dimension - 1}")
    if not G.is_abelian and k > 1:
        raise ValueError("non-abelian expansion is defined only for k <= 1")


# ------------------------------------------------------------ prime fields
def coset_scan(X: SimplicialComplex, k: int, p: int, tag: Space, budget: int):
    """Minimum weight and a minimising vector in every coset of ``C^k / S``.

    Returns ``(K, minmass, argmin_rows)`` where ``K`` is the key matrix and
    rows of ``argmin_rows`` are indexed by key code (base-``p`` digits of the
    key, most significant first).
    """
    n = X.n_faces(k)
    if p**n > budget:
        raise BudgetExceeded(f"coset scan needs {p}^{n} cochains, budget {budget}")
    basis = space_basis_mod_p(X, k, p, tag)
    if basis.shape[0]:
        R, piv = rref_mod_p(basis, p)
    else:
        R, piv = np.zeros((0, n), dtype=np.int64), []
    K, free = coset_key_map(R, piv, n, p)
    minmass, argmin = kernels.coset_min_weight(K, X.mass(k).astype(np.int64), p)
    return K, minmass, argmin


def _ratio_scan(X, k, p, tag, budget):
    """Return (best ratio, witness row, systole-like min over delta==0 keys)."""
    _, minmass, argmin = coset_scan(X, k, p, tag, budget)
    G = cyclic(p)
    den_k, den_up = X.denominator(k), X.denominator(k + 1)
    best, best_row, cocycle_min = None, None, None
    n_keys = minmass.shape[0]
    for start in range(0, n_keys, 1 << 15):
        stop = min(n_keys, start + (1 << 15))
        rows = argmin[start:stop]
        up = weight_mass(X, k + 1, coboundary_values(X, G, k, rows)) if rows.size else np.zeros(0)
        mm = minmass[start:stop]
        for j in range(stop - start):
            key = start + j
            if key == 0:
                continue
            if up[j] == 0:
                c = Fraction(int(mm[j]), den_k)
                if cocycle_min is None or c < cocycle_min:
                    cocycle_min = c
                continue
            r = Fraction(int(up[j]) * den_k, den_up * int(mm[j]))
            if best is None or r < best or (r == best and tuple(rows[j]) < tuple(best_row)):
                best, best_row = r, rows[j].copy()
    return best, best_row, cocycle_min


def _h_prime(X, k, G, mode, budget):
    p = G.prime_field
    n = X.n_faces(k)
    tag = Space.COBOUNDARIES if mode == "coboundary" else Space.COCYCLES
    best, row, cocycle_min = _ratio_scan(X, k, p, tag, budget)
    report = ExpansionReport(k, G.name, mode, None, None, "exhaustive", p**n)
    if mode == "coboundary" and cocycle_min is not None:
        # some cocycle is not a coboundary: the coboundary constant is 0
        report.nontrivial_cohomology = True
        report.min_nontrivial_cocycle_weight = cocycle_min
        cbest, crow, _ = _ratio_scan(X, k, p, Space.COCYCLES, budget)
        report.cosystolic_value = cbest
        report.value = Fraction(0)
        report.budget_used *= 2
        return report
    report.value = best
    report.witness = None if row is None else Cochain(X, k, G, row)
    if mode == "coboundary":
        report.cosystolic_value = best
    return report


# ------------------------------------------------------------ generic path
def _h_generic(X, k, G, mode, budget):
    tag = Space.COBOUNDARIES if mode == "coboundary" else Space.COCYCLES
    n = X.n_faces(k)
    total = G.order**n
    space = space_elements(X, k, G, tag, budget)
    if total * max(1, space.shape[0]) > budget * 64:
        raise BudgetExceeded(f"brute force over {total} cochains x {space.shape[0]} targets exceeds budget")
    mass, mass_up = X.mass(k), X.mass(k + 1)
    den_k, den_up = X.denominator(k), X.denominator(k + 1)
    best, best_row = None, None
    cohomology = False
    cocycle_min = None
    for block in iter_assignments(G.order, n, chunk=1 << 12):
        up = weight_mass(X, k + 1, coboundary_values(X, G, k, block))
        d = np.full(block.shape[0], np.iinfo(np.int64).max, dtype=object if mass.dtype == object else np.int64)
        for s in space:
            d = np.minimum(d, (block != s).astype(mass.dtype) @ mass)
        for j in range(block.shape[0]):
            if d[j] == 0:
                continue
            if up[j] == 0:
                cohomology = True
                c = Fraction(int(d[j]), den_k)
                if cocycle_min is None or c < cocycle_min:
                    cocycle_min = c
                continue
            r = Fraction(int(up[j]) * den_k, den_up * int(d[j]))
            if best is None or r < best:
                best, best_row = r, block[j].copy()
    report = ExpansionReport(k, G.name, mode, best, None, "exhaustive", total)
    if best_row is not None:
        report.witness = Cochain(X, k, G, best_row)
    if cohomology:
        report.nontrivial_cohomology = True
        report.min_nontrivial_cocycle_weight = cocycle_min
        report.cosystolic_value = _h_generic(X, k, G, "cosystolic", budget).value
        report.value = Fraction(0)
        report.witness = None
    elif mode == "coboundary":
        report.cosystolic_value = best
    return report


def h_exhaustive(
    X: SimplicialComplex,
    k: int,
    G: FiniteGroup,
    mode: str = "coboundary",
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> ExpansionReport:
    """Exact coboundary or cosystolic constant at level ``k``.

    In coboundary mode a nonzero cohomology group forces the value 0; the
    report then carries the cosystolic constant separately and flags it.
    ``value`` is ``None`` when every cochain lies in the target space.
    """
    if mode not in ("coboundary", "cosystolic"):
        raise ValueError("mode must be 'coboundary' or 'cosystolic'")
    _check_level(X, k, G)
    if G.prime_field is not None:
        return _h_prime(X, k, G, mode, budget)
    return _h_generic(X, k, G, mode, budget)


# --------------------------------------------------------- randomized search
def h_randomized(
    X: SimplicialComplex,
    k: int,
    G: FiniteGroup,
    trials: int,
    local_search_steps: int = 200,
    seed: int = 0,
    mode: str = "coboundary",
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    time_limit: float | None = None,
) -> ExpansionReport:
    """Upper bound on ``h^k`` from seeded local search.

    Each trial anneals single-face changes on the surrogate score
    ``wt(df) / wt(f)`` (a lower bound on the true ratio) starting from a
    random small-support cochain, then evaluates the true ratio of the result
    with an exact distance.  Only exactly evaluated ratios are reported, so
    the value is a genuine upper bound whenever ``exact`` is set.

    With ``time_limit`` the distance may be an unproven incumbent, which
    overestimates it; each recorded ratio is then a lower bound on the true
    ratio of its cochain and ``exact`` is cleared.
    """
    _check_level(X, k, G)
    tag = Space.COBOUNDARIES if mode == "coboundary" else Space.COCYCLES
    rng = np.random.default_rng(seed)
    report = ExpansionReport(k, G.name, mode, None, None, "randomized", 0, exact=True, seed=seed)
    if trials <= 0:
        return report
    n = X.n_faces(k)
    mass = X.mass(k).astype(np.float64)
    den_up = X.denominator(k + 1)
    top = 1 + int(rng.integers(0, max(1, n // 8)))
    for _ in range(trials):
        vals = np.zeros(n, dtype=np.int64)
        support = rng.choice(n, size=min(n, top), replace=False)
        vals[support] = rng.integers(1, G.order, size=support.size)
        score = _surrogate(X, k, G, vals, mass)
        if score == 0:
            score = math.inf
        temp = 0.5
        for step in range(local_search_steps):
            cand = vals.copy()
            t = int(rng.integers(0, n))
            cand[t] = int(rng.integers(0, G.order))
            if not cand.any():
                continue
            s = _surrogate(X, k, G, cand, mass)
            if s == 0:
                # cocycles have ratio 0/0 against the target space: never settle on one
                continue
            if s <= score or rng.random() < math.exp(-(s - score) / max(temp, 1e-9)):
                vals, score = cand, s
            temp *= 0.98
        f = Cochain(X, k, G, vals)
        res = distance_to_space(f, tag, budget=budget) if time_limit is None else _dist_with_limit(f, tag, budget, time_limit)
        report.budget_used += 1
        if res.value == 0:
            continue
        up = int(weight_mass(X, k + 1, coboundary_values(X, G, k, vals)))
        r = Fraction(up, den_up) / res.value
        if report.value is None or r < report.value:
            report.value, report.witness = r, f
        report.exact = report.exact and res.exact
    return report


def _dist_with_limit(f, tag, budget, time_limit):
    try:
        return distance_to_space(f, tag, budget=budget, method="exhaustive")
    except BudgetExceeded:
        from .milp import nearest_in_space_milp

        try:
            return nearest_in_space_milp(f, tag, time_limit=time_limit)
        except RuntimeError:
            # no incumbent within the limit: the zero element bounds the distance
            zero = f.with_values(np.zeros_like(f.values))
            return DistanceResult(distance(f, zero), zero, "trivial", exact=False)


def _surrogate(X, k, G, vals, mass) -> float:
    w = float(((vals != 0).astype(np.float64)) @ mass)
    if w == 0:
        return math.inf
    up = coboundary_values(X, G, k, vals)
    wu = float(((up != 0).astype(np.float64)) @ X.mass(k + 1).astype(np.float64))
    return (wu / X.denominator(k + 1)) / (w / X.denominator(k))


# ----------------------------------------------------------------- spectral
@dataclass
class LinkSpectrum:
    face: tuple
    lambda2: float
    lambda_min: float
    connected: bool
    vertices: int


@dataclass
class SpectralCertificate:
    links: list[LinkSpectrum]
    value: float
    target: float | None
    tolerance: float = SPECTRAL_TOLERANCE

    @property
    def passed(self) -> bool | None:
        if self.target is None:
            return None
        return self.value <= self.target + self.tolerance

    @property
    def two_sided(self) -> float:
        return max(max(l.lambda2, -l.lambda_min) for l in self.links) if self.links else 0.0

    def to_json(self) -> dict:
        return {
            "kind": "spectral",
            "params": {"target": self.target, "tolerance": self.tolerance},
            "value": self.value,
            "passed": self.passed,
            "links": [
                {"face": list(l.face), "lambda2": l.lambda2, "lambda_min": l.lambda_min, "connected": l.connected}
                for l in self.links
            ],
        }


def graph_spectrum(n: int, edges: np.ndarray, w: np.ndarray) -> tuple[float, float, bool]:
    """``(lambda_2, lambda_min, connected)`` of the weighted random-walk operator."""
    if n <= 1:
        return 0.0, 0.0, True
    W = np.zeros((n, n))
    np.add.at(W, (edges[:, 0], edges[:, 1]), w)
    np.add.at(W, (edges[:, 1], edges[:, 0]), w)
    deg = W.sum(axis=1)
    if np.any(deg <= 0):
        return 1.0, -1.0, False
    connected = _is_connected(n, edges)
    inv = 1.0 / np.sqrt(deg)
    S = W * inv[:, None] * inv[None, :]
    ev = np.linalg.eigvalsh(S)
    lam2 = 1.0 if not connected else float(ev[-2])
    return lam2, float(ev[0]), connected


def _is_connected(n: int, edges: np.ndarray) -> bool:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    A = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    return connected_components(A, directed=False)[0] == 1


def link_graph(X: SimplicialComplex, s: tuple) -> tuple[int, np.ndarray, np.ndarray, list[int]]:
    """1-skeleton of the link of ``s`` with edge weights proportional to ``Pr(s + e)``."""
    j = len(s) - 1
    idx = X.containing(s, j + 2)
    faces = X.faces(j + 2)
    mass = X.mass(j + 2)
    sset = set(s)
    verts: dict[int, int] = {}
    edges, w = [], []
    for i in idx:
        u, v = (x for x in faces[i] if x not in sset)
        a = verts.setdefault(u, len(verts))
        b = verts.setdefault(v, len(verts))
        edges.append((a, b))
        w.append(float(mass[i]))
    w = np.array(w)
    return len(verts), np.array(edges, dtype=np.int64).reshape(-1, 2), w / w.sum(), list(verts)


def spectral_certificate(
    X: SimplicialComplex, lambda_target: float | None = None, tolerance: float = SPECTRAL_TOLERANCE
) -> SpectralCertificate:
    """Second eigenvalue of every link 1-skeleton at levels ``-1 .. d-2``."""
    links = []
    for j in range(-1, X.dimension - 1):
        for s in X.faces(j):
            n, edges, w, _ = link_graph(X, s)
            lam2, lam_min, conn = graph_spectrum(n, edges, w)
            links.append(LinkSpectrum(tuple(s), lam2, lam_min, conn, n))
    value = max((l.lambda2 for l in links), default=0.0)
    return SpectralCertificate(links, value, lambda_target, tolerance)


def edge_expansion(n: int, edges: np.ndarray, w: np.ndarray, pi: np.ndarray | None = None) -> float:
    """Exact edge expansion ``min Pr(E(S, V-S)) / Pr(S)`` over ``0 < Pr(S) <= 1/2`` (small graphs)."""
    if n > 22:
        raise BudgetExceeded("edge expansion is computed by brute force for n <= 22")
    w = np.asarray(w, dtype=np.float64)
    w = w / w.sum()
    if pi is None:
        pi = np.zeros(n)
        np.add.at(pi, edges[:, 0], w / 2)
        np.add.at(pi, edges[:, 1], w / 2)
    best = math.inf
    for mask in range(1, 1 << n):
        inS = np.array([(mask >> v) & 1 for v in range(n)], dtype=bool)
        ps = pi[inS].sum()
        if ps <= 0 or ps > 0.5 + 1e-15:
            continue
        cut = w[inS[edges[:, 0]] != inS[edges[:, 1]]].sum()
        best = min(best, cut / ps)
    return best


# ------------------------------------------------------------ bound formulas
def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    return None


def _product(betas, k: int):
    if isinstance(betas, (int, float, Fraction)):
        betas = [betas] * (k + 1)
    fr = [_as_fraction(b) for b in betas]
    if all(b is not None for b in fr):
        out = Fraction(1)
        for b in fr:
            out *= b
        return out
    return math.prod(float(b) for b in betas)


def _minus_e_lambda(main, lam):
    lam_f = _as_fraction(lam)
    if lam_f == 0 and isinstance(main, Fraction):
        return main
    return float(main) - math.e * float(lam)


def local_to_global_bound(betas: Sequence | float, lam: float, k: int):
    """``prod beta / ((k+2)! * 4) - e * lambda``; exact when ``lambda = 0``.

    ``betas`` is either the list ``beta_0 .. beta_k`` or one value used for
    every level.  Negative values are returned unchanged.
    """
    main = _product(betas, k)
    main = main / (math.factorial(k + 2) * 4)
    return _minus_e_lambda(main, lam)


def heavy_cosystole_bound(betas: Sequence | float, lam: float, k: int):
    """``prod beta / (k+1)! - e * lambda``."""
    main = _product(betas, k) / math.factorial(k + 1)
    return _minus_e_lambda(main, lam)


def overlap_constant(beta, nu, eps, k: int):
    """``nu beta^{k+1} / (2 (k+1)!) - eps k^2 beta^{-(2k+1)}``."""
    b, n_, e_ = _as_fraction(beta), _as_fraction(nu), _as_fraction(eps)
    if None not in (b, n_, e_):
        return n_ * b ** (k + 1) / (2 * math.factorial(k + 1)) - e_ * k * k * b ** (-(2 * k + 1))
    beta, nu, eps = float(beta), float(nu), float(eps)
    return nu * beta ** (k + 1) / (2 * math.factorial(k + 1)) - eps * k * k * beta ** (-(2 * k + 1))


def default_eta(beta, k: int):
    """``beta^{k+1} / (4 (k+2)!)``, the correction parameter used by the local-to-global bound."""
    return _product(beta, k) / (4 * math.factorial(k + 2))


# ------------------------------------------------ random upper-bound sampler
@dataclass
class UpperBoundReport:
    level: int
    trials: int
    seed: int
    epsilon: float
    guarantee_applies: bool
    target: float
    best_ratio: Fraction | None
    best_witness: Cochain | None
    achieved: bool
    exact_distances: bool
    far_frequency: float
    far_bound: float
    heavy_frequency: float
    heavy_bound: float
    notes: list[str] = field(default_factory=list)

    def frequencies_consistent(self, sigmas: float = 3.0) -> bool:
        ok = True
        for freq, bound in ((self.far_frequency, self.far_bound), (self.heavy_frequency, self.heavy_bound)):
            b = min(1.0, bound)
            ok &= freq <= b + sigmas * math.sqrt(max(b * (1 - b), 1e-300) / max(1, self.trials))
        return bool(ok)

    def to_json(self) -> dict:
        return {
            "kind": "upper_bound",
            "params": {"level": self.level, "trials": self.trials, "epsilon": self.epsilon},
            "value": None if self.best_ratio is None else float(self.best_ratio),
            "target": self.target,
            "achieved": self.achieved,
            "guarantee_applies": self.guarantee_applies,
            "exact_distances": self.exact_distances,
            "far_frequency": self.far_frequency,
            "far_bound": self.far_bound,
            "heavy_frequency": self.heavy_frequency,
            "heavy_bound": self.heavy_bound,
            "method": "sampling",
            "seed": self.seed,
            "notes": self.notes,
        }


def upper_bound_epsilon(X: SimplicialComplex, k: int) -> float:
    """``max(sqrt(8|X(k-1)|/|X(k)|), sqrt(9/|X(k+1)|))``; ``inf`` without (k+1)-faces."""
    if k + 1 > X.dimension or X.n_faces(k + 1) == 0:
        return math.inf
    return max(math.sqrt(8 * X.n_faces(k - 1) / X.n_faces(k)), math.sqrt(9 / X.n_faces(k + 1)))


def random_upper_bound_experiment(
    X: SimplicialComplex,
    k: int,
    trials: int,
    seed: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    stop_when_achieved: bool = False,
) -> UpperBoundReport:
    """Sample uniform ``f`` in ``C^k(X, F_2)`` and record ``wt(df) / dist(f, Z^k)``.

    Also records how often the two bad events of the probabilistic argument
    occur: ``dist(f, Z^k) < 1/2 - eps`` (bounded by a union/Chernoff bound)
    and ``|wt(df) - 1/2| >= eps`` (bounded by Chebyshev via pairwise
    independence).
    """
    G = cyclic(2)
    eps = upper_bound_epsilon(X, k)
    applies = eps <= 0.5 and all(X.is_uniform(j) for j in range(k - 1, k + 2))
    notes = []
    if not math.isfinite(eps):
        notes.append("no (k+1)-faces: precondition fails")
    elif eps > 0.5:
        notes.append("epsilon exceeds 1/2: no guarantee claimed")
    target = 1 + 8 * eps
    rng = np.random.default_rng(seed)
    n = X.n_faces(k)
    best, best_f = None, None
    far = heavy = done = 0
    exact = True
    for _ in range(trials):
        vals = rng.integers(0, 2, size=n)
        f = Cochain(X, k, G, vals)
        res = distance_to_space(f, Space.COCYCLES, budget=budget)
        exact &= res.exact
        wd = weight(Cochain(X, k + 1, G, coboundary_values(X, G, k, vals)))
        done += 1
        if math.isfinite(eps):
            if float(res.value) < 0.5 - eps:
                far += 1
            if abs(float(wd) - 0.5) >= eps:
                heavy += 1
        if res.value > 0:
            r = wd / res.value
            if best is None or r < best:
                best, best_f = r, f
        if stop_when_achieved and best is not None and float(best) <= target:
            break
    if math.isfinite(eps):
        far_bound = math.exp(X.n_faces(k - 1) * math.log(2) - eps * eps / (1 + eps) * n)
        heavy_bound = 1 / (4 * X.n_faces(k + 1) * eps * eps)
    else:
        far_bound = heavy_bound = math.inf
    return UpperBoundReport(
        level=k,
        trials=done,
        seed=seed,
        epsilon=eps,
        guarantee_applies=applies,
        target=target,
        best_ratio=best,
        best_witness=best_f,
        achieved=best is not None and float(best) <= target,
        exact_distances=exact,
        far_frequency=far / max(1, done),
        far_bound=far_bound,
        heavy_frequency=heavy / max(1, done),
        heavy_bound=heavy_bound,
        notes=notes,
    )
