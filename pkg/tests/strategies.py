"""Hypothesis strategies for small complexes and cochains."""

from itertools import combinations

import numpy as np
from hypothesis import strategies as st

from hdx.complex import SimplicialComplex
from hdx.groups import cyclic, direct_product, symmetric

ABELIAN = {
    "Z2": cyclic(2),
    "Z3": cyclic(3),
    "Z4": cyclic(4),
    "Z2xZ2": direct_product(cyclic(2), cyclic(2)),
}
S3 = symmetric(3)


@st.composite
def pure_complexes(draw, min_dim=1, max_dim=3, max_vertices=7, max_tops=8):
    d = draw(st.integers(min_dim, max_dim))
    n = draw(st.integers(d + 1, max(d + 1, max_vertices)))
    pool = list(combinations(range(n), d + 1))
    idx = draw(st.lists(st.integers(0, len(pool) - 1), min_size=1, max_size=max_tops, unique=True))
    used = sorted({v for i in idx for v in pool[i]})
    relabel = {v: j for j, v in enumerate(used)}
    tops = [tuple(relabel[v] for v in pool[i]) for i in idx]
    weights = draw(st.lists(st.integers(1, 5), min_size=len(tops), max_size=len(tops)))
    return SimplicialComplex(tops, weights=weights, normalize=True)


@st.composite
def cochains_on(draw, X, k, order):
    n = X.n_faces(k)
    vals = draw(st.lists(st.integers(0, order - 1), min_size=n, max_size=n))
    return np.array(vals, dtype=np.int64)
