"""Compare the compiled and numpy enumeration kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Both backends must return identical results; timings are best-of-repeat.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from hdx import _kernels_py
from hdx.cochains import Space, space_basis_mod_p
from hdx.complex import complete_complex
from hdx.correction import _star_problem
from hdx.groups import cyclic, symmetric
from hdx.lattice import order_complex, subspace_lattice
from hdx.linalg import coset_key_map, rref_mod_p

try:
    from hdx import _kernels
except ImportError:  # extension not built
    _kernels = None


def coset_case(X, k, p):
    basis = space_basis_mod_p(X, k, p, Space.COBOUNDARIES)
    R, piv = rref_mod_p(basis, p) if basis.shape[0] else (np.zeros((0, X.n_faces(k)), dtype=np.int64), [])
    K, _ = coset_key_map(R, piv, X.n_faces(k), p)
    return (K, X.mass(k).astype(np.int64), p)


def star_case(X, k, G, seed=0):
    r = X.faces(k - 1)[0]
    prob = _star_problem(X, G, k, r)
    rng = np.random.default_rng(seed)
    vals = rng.integers(0, G.order, size=X.n_faces(k)).astype(np.int64)
    fixed = vals[prob.fixed_faces]
    return (G.table, G.inverse, prob.src, fixed, prob.expo, prob.umass, len(prob.positions))


def cases():
    sl3 = order_complex(subspace_lattice(3, 2), [1, 2])
    yield "coset Z2 K6 level1", "coset_min_weight", coset_case(complete_complex(6, 2), 1, 2)
    yield "coset Z2 SL3 level0", "coset_min_weight", coset_case(sl3, 0, 2)
    yield "coset Z3 K5 level1", "coset_min_weight", coset_case(complete_complex(5, 2), 1, 3)
    yield "star Z2 K16 level1", "star_search", star_case(complete_complex(16, 2), 1, cyclic(2))
    yield "star S3 K8 level1", "star_search", star_case(complete_complex(8, 2), 1, symmetric(3))
    yield "star Z3 K11 level2", "star_search", star_case(complete_complex(11, 3), 2, cyclic(3))


def best_time(fn, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    rows = []
    print(f"{'case':24s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s} agree")
    for name, kernel, inp in cases():
        tp, op = best_time(getattr(_kernels_py, kernel), inp, args.repeat)
        if _kernels is not None:
            tc, oc = best_time(getattr(_kernels, kernel), inp, args.repeat)
            agree = same(op, oc)
        else:
            tc, agree = float("nan"), None
        rows.append({"case": name, "python": tp, "cython": tc, "speedup": tp / tc if tc == tc else None, "agree": agree})
        print(f"{name:24s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f} {agree}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)
    return 0 if all(r["agree"] is not False for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
