"""Exact nearest-coboundary / nearest-cocycle search by mixed integer programming.

Used when the target space is too large to enumerate.  Two models:

* cyclic ``Z_m`` at any level: congruences are linearised with integer
  slack variables, ``f_t - (dg)_t = m z_t + r_t`` with ``0 <= r_t <= (m-1) y_t``;
* any group at level 1 against ``B^1``: one-hot vertex assignments with
  per-edge agreement indicators.

Objectives use the integer face masses, so an optimal solution with zero
relative gap is an exact minimiser.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix

from .cochains import Cochain, DistanceResult, Space, coboundary, distance
from .complex import SimplicialComplex


class UnsupportedModel(RuntimeError):
    """No exact integer model is available for this group/level/space."""


def _objective(mass: np.ndarray) -> np.ndarray:
    m = [int(x) for x in mass]
    g = 0
    for x in m:
        g = gcd(g, x)
    return np.array([x // g for x in m], dtype=np.float64)


def _components(X: SimplicialComplex) -> list[int]:
    """One representative vertex per connected component of the 1-skeleton."""
    parent = list(range(X.vertex_count))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if X.dimension >= 1:
        for u, v in X.faces(1):
            parent[find(u)] = find(v)
    return sorted({find(v) for v in range(X.vertex_count)})


def _solve(c, A, lo, hi, integrality, lb, ub, time_limit):
    options = {"mip_rel_gap": 0.0, "presolve": True}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    cons = LinearConstraint(A.tocsr(), lo, hi)
    res = milp(c, constraints=cons, integrality=integrality, bounds=Bounds(lb, ub), options=options)
    if res.x is None:
        raise RuntimeError(f"integer program failed: {res.message}")
    return np.rint(res.x).astype(np.int64), res.status == 0


def _cyclic_coboundary_model(f: Cochain, time_limit):
    X, k, m = f.complex, f.level, f.group.cyclic_modulus
    n_g, n_t = X.n_faces(k - 1), X.n_faces(k)
    # variables: g (n_g) | z (n_t) | r (n_t) | y (n_t)
    G0, Z0, R0, Y0 = 0, n_g, n_g + n_t, n_g + 2 * n_t
    nv = n_g + 3 * n_t
    rows, cols, vals = [], [], []
    if k == 0:
        bnd = np.zeros((n_t, 1), dtype=np.int64)
    else:
        bnd = X.boundary_indices(k)
    for t in range(n_t):
        for i in range(k + 1):
            rows.append(t)
            cols.append(G0 + int(bnd[t, i]))
            vals.append(1 if i % 2 == 0 else -1)
        rows += [t, t]
        cols += [Z0 + t, R0 + t]
        vals += [m, 1]
    eq = coo_matrix((vals, (rows, cols)), shape=(n_t, nv))
    # r_t - (m-1) y_t <= 0
    ineq = coo_matrix(
        (np.r_[np.ones(n_t), -(m - 1) * np.ones(n_t)], (np.r_[np.arange(n_t), np.arange(n_t)], np.r_[R0 + np.arange(n_t), Y0 + np.arange(n_t)])),
        shape=(n_t, nv),
    )
    from scipy.sparse import vstack

    A = vstack([eq, ineq])
    f_vals = f.values.astype(np.float64)
    lo = np.r_[f_vals, -np.inf * np.ones(n_t)]
    hi = np.r_[f_vals, np.zeros(n_t)]
    lb = np.r_[np.zeros(n_g), -(k + 3) * np.ones(n_t), np.zeros(n_t), np.zeros(n_t)]
    ub = np.r_[(m - 1) * np.ones(n_g), (k + 3) * np.ones(n_t), (m - 1) * np.ones(n_t), np.ones(n_t)]
    if k == 1:
        for v in _components(X):
            ub[G0 + v] = 0
    c = np.zeros(nv)
    c[Y0:] = _objective(X.mass(k))
    x, optimal = _solve(c, A, lo, hi, np.ones(nv), lb, ub, time_limit)
    return Cochain(X, k - 1, f.group, x[G0:G0 + n_g] % m), optimal


def _cyclic_cocycle_model(f: Cochain, time_limit):
    X, k, m = f.complex, f.level, f.group.cyclic_modulus
    n_t = X.n_faces(k)
    if k == X.dimension:
        return f, True
    n_u = X.n_faces(k + 1)
    # variables: x (n_t) | w (n_u) | y (n_t)
    X0, W0, Y0 = 0, n_t, n_t + n_u
    nv = 2 * n_t + n_u
    bnd = X.boundary_indices(k + 1)
    rows, cols, vals = [], [], []
    for u in range(n_u):
        for i in range(k + 2):
            rows.append(u)
            cols.append(X0 + int(bnd[u, i]))
            vals.append(1 if i % 2 == 0 else -1)
        rows.append(u)
        cols.append(W0 + u)
        vals.append(-m)
    r0 = n_u
    for t in range(n_t):
        # x_t - (m-1) y_t <= f_t  and  -x_t - (m-1) y_t <= -f_t
        rows += [r0 + 2 * t, r0 + 2 * t, r0 + 2 * t + 1, r0 + 2 * t + 1]
        cols += [X0 + t, Y0 + t, X0 + t, Y0 + t]
        vals += [1, -(m - 1), -1, -(m - 1)]
    A = coo_matrix((vals, (rows, cols)), shape=(n_u + 2 * n_t, nv))
    fv = f.values.astype(np.float64)
    lo = np.r_[np.zeros(n_u), -np.inf * np.ones(2 * n_t)]
    hi = np.r_[np.zeros(n_u), np.ravel(np.column_stack([fv, -fv]))]
    lb = np.r_[np.zeros(n_t), -(k + 3) * np.ones(n_u), np.zeros(n_t)]
    ub = np.r_[(m - 1) * np.ones(n_t), (k + 3) * np.ones(n_u), np.ones(n_t)]
    c = np.zeros(nv)
    c[Y0:] = _objective(X.mass(k))
    x, optimal = _solve(c, A, lo, hi, np.ones(nv), lb, ub, time_limit)
    return Cochain(X, k, f.group, x[X0:X0 + n_t] % m), optimal


def _assignment_model(f: Cochain, time_limit):
    X, G = f.complex, f.group
    n, q = X.vertex_count, G.order
    edges = X.faces(1)
    n_e = len(edges)
    # variables: x[v, a] (n*q) | z[e, b] (n_e*q)
    nv = n * q + n_e * q

    def xv(v, a):
        return v * q + a

    def ze(e, b):
        return n * q + e * q + b

    rows, cols, vals = [], [], []
    lo, hi = [], []
    r = 0
    for v in range(n):
        for a in range(q):
            rows.append(r)
            cols.append(xv(v, a))
            vals.append(1)
        lo.append(1)
        hi.append(1)
        r += 1
    T, inv = G.table, G.inverse
    for e, (u, v) in enumerate(edges):
        fe = int(f.values[e])
        for b in range(q):
            # value at u forced by value b at v for the edge to agree with f
            a = int(T[fe, b]) if not G.is_abelian else int(T[b, inv[fe]])
            rows += [r, r]
            cols += [ze(e, b), xv(v, b)]
            vals += [1, -1]
            lo.append(-np.inf)
            hi.append(0)
            r += 1
            rows += [r, r]
            cols += [ze(e, b), xv(u, a)]
            vals += [1, -1]
            lo.append(-np.inf)
            hi.append(0)
            r += 1
    A = coo_matrix((vals, (rows, cols)), shape=(r, nv))
    lb = np.zeros(nv)
    ub = np.ones(nv)
    for v in _components(X):
        for a in range(1, q):
            ub[xv(v, a)] = 0
    w = _objective(X.mass(1))
    c = np.zeros(nv)
    for e in range(n_e):
        c[ze(e, 0):ze(e, 0) + q] = -w[e]
    x, optimal = _solve(c, A, np.array(lo), np.array(hi), np.ones(nv), lb, ub, time_limit)
    g_vals = x[: n * q].reshape(n, q).argmax(axis=1)
    return Cochain(X, 0, G, g_vals), optimal


def nearest_in_space_milp(f: Cochain, tag: Space | str, time_limit: float | None = None) -> DistanceResult:
    """Exact nearest element of ``B^k`` or ``Z^k`` via an integer program."""
    tag = Space(tag)
    G, k = f.group, f.level
    if tag == Space.ALL:
        return DistanceResult(Fraction(0), f, "trivial")
    if G.cyclic_modulus is not None:
        if tag == Space.COBOUNDARIES:
            if k == -1:
                w = f.with_values(np.zeros(1, dtype=np.int64))
                return DistanceResult(distance(f, w), w, "trivial")
            g, optimal = _cyclic_coboundary_model(f, time_limit)
            witness = coboundary(g)
        else:
            witness, optimal = _cyclic_cocycle_model(f, time_limit)
    elif tag == Space.COBOUNDARIES and k == 1:
        g, optimal = _assignment_model(f, time_limit)
        witness = coboundary(g)
    else:
        raise UnsupportedModel(f"no integer model for {G.name} at level {k} against {tag.value}^{k}")
    return DistanceResult(distance(f, witness), witness, "milp", exact=optimal)


def nearest_coboundary_preimage(f: Cochain, time_limit: float | None = None) -> tuple[Cochain, bool]:
    """A level ``k-1`` cochain ``g`` minimising ``dist(f, dg)`` and whether it is proven optimal."""
    G, k = f.group, f.level
    if k < 0:
        raise ValueError("level -1 cochains have no preimage level")
    if G.cyclic_modulus is not None:
        return _cyclic_coboundary_model(f, time_limit)
    if k == 1:
        return _assignment_model(f, time_limit)
    raise UnsupportedModel(f"no integer model for {G.name} coboundaries at level {k}")
