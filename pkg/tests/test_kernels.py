import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hdx import _kernels_py, kernels
from hdx.cochains import Space, space_basis_mod_p
from hdx.correction import _star_problem
from hdx.groups import cyclic, symmetric
from hdx.linalg import coset_key_map, rref_mod_p
from strategies import pure_complexes

_kernels = pytest.importorskip("hdx._kernels", reason="compiled extension not built")


def _coset_args(X, k, p):
    basis = space_basis_mod_p(X, k, p, Space.COBOUNDARIES)
    R, piv = rref_mod_p(basis, p) if basis.shape[0] else (np.zeros((0, X.n_faces(k)), dtype=np.int64), [])
    K, _ = coset_key_map(R, piv, X.n_faces(k), p)
    return K, X.mass(k).astype(np.int64), p


def _same(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


@given(pure_complexes(min_dim=2, max_dim=2, max_vertices=6), st.sampled_from([2, 3]), st.integers(0, 1))
def test_coset_kernels_agree(X, p, k):
    args = _coset_args(X, k, p)
    assert _same(_kernels.coset_min_weight(*args), _kernels_py.coset_min_weight(*args))


@given(pure_complexes(min_dim=2, max_dim=3, max_vertices=7), st.sampled_from(["Z2", "Z3", "S3"]), st.integers(0, 10**6))
def test_star_kernels_agree(X, name, seed):
    G = {"Z2": cyclic(2), "Z3": cyclic(3), "S3": symmetric(3)}[name]
    k = 1
    rng = np.random.default_rng(seed)
    r = X.faces(k - 1)[rng.integers(X.n_faces(k - 1))]
    prob = _star_problem(X, G, k, r)
    m = len(prob.positions)
    if G.order**m > 10**5:
        return
    vals = rng.integers(0, G.order, size=X.n_faces(k)).astype(np.int64)
    args = (G.table, G.inverse, prob.src, vals[prob.fixed_faces], prob.expo, prob.umass, m)
    assert _same(_kernels.star_search(*args), _kernels_py.star_search(*args))


def test_backend_selection():
    assert kernels.BACKEND == ("python" if os.environ.get("HDX_PURE_PYTHON", "") not in ("", "0") else "cython")
    code = "from hdx import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, HDX_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_pure_backend_gives_same_expansion():
    code = (
        "from hdx.complex import complete_complex; from hdx.expansion import h_exhaustive;"
        "from hdx.groups import cyclic; print(h_exhaustive(complete_complex(5, 2), 1, cyclic(2)).value)"
    )
    env = dict(os.environ, HDX_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "5/3"
