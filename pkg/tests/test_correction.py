from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hdx.cochains import Cochain, coboundary, distance, random_cochain, weight
from hdx.complex import SimplicialComplex, complete_complex
from hdx.correction import (
    PreconditionError,
    RealFunction,
    correct,
    down,
    down_matrix,
    is_locally_minimal,
    n_walk,
    up,
    up_matrix,
    verify_link_weight_inequality,
    verify_walk_inequality,
)
from hdx.groups import cyclic, symmetric
from hdx.lattice import order_complex, subspace_lattice
from strategies import pure_complexes

S3 = symmetric(3)
ANNULUS = [(0, 1, 3), (1, 3, 4), (1, 2, 4), (2, 4, 5), (0, 2, 5), (0, 3, 5)]


def _brute_locally_minimal(g: Cochain, eta) -> bool:
    """Level-1 abelian oracle: at each vertex v, no constant shift of u -> g(v, u) saves more than eta of the link mass."""
    X, G = g.complex, g.group
    for (v,) in X.faces(0):
        star = [e for e in X.faces(1) if v in e]
        mass = {e: X.pr(e) for e in star}
        total = sum(mass.values())
        oriented = {e: g(((v, e[1]) if e[0] == v else (v, e[0]))) for e in star}
        cur = sum(mass[e] for e in star if oriented[e] != 0)
        for c in range(G.order):
            new = sum(mass[e] for e in star if (oriented[e] + c) % G.order != 0)
            if (cur - new) / total > eta:
                return False
    return True


@pytest.mark.parametrize("G", [cyclic(2), cyclic(3), S3], ids=lambda G: G.name)
@pytest.mark.parametrize("k", [0, 1])
def test_correction_contracts_and_halts(G, k):
    X = complete_complex(6, 2)
    rng = np.random.default_rng(11)
    for _ in range(3):
        f = random_cochain(X, k, G, rng)
        eta = Fraction(1, 20)
        ft, trace = correct(f, eta)
        assert trace.exhaustive
        assert eta * distance(f, ft) <= weight(coboundary(f))
        assert weight(coboundary(ft)) <= weight(coboundary(f))
        trace.replay()
        ok, viol = is_locally_minimal(coboundary(ft), eta, coboundary_of=ft if not G.is_abelian else None)
        assert ok, viol


@given(pure_complexes(min_dim=2, max_dim=2, max_vertices=7), st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_correction_property(X, seed, p):
    G = cyclic(p)
    f = random_cochain(X, 1 if X.dimension >= 2 else 0, G, np.random.default_rng(seed))
    eta = Fraction(1, 10)
    ft, trace = correct(f, eta, seed=seed)
    # every fix lowers wt(df) by at least eta times the fixed star mass, so the sum telescopes
    assert eta * distance(f, ft) <= weight(coboundary(f))
    assert all(s.delta_wt > 0 for s in trace.steps)
    ok, _ = is_locally_minimal(coboundary(ft), eta)
    assert ok


def test_correction_rejects_bad_eta():
    X = complete_complex(4, 2)
    f = random_cochain(X, 1, cyclic(2), np.random.default_rng(0))
    with pytest.raises(ValueError):
        correct(f, 0)
    with pytest.raises(ValueError):
        correct(f, Fraction(3, 2))


def test_local_minimality_matches_vertex_oracle():
    X = complete_complex(5, 2)
    rng = np.random.default_rng(4)
    G = cyclic(3)
    for _ in range(10):
        f = random_cochain(X, 0, G, rng)
        g = coboundary(f).with_values((coboundary(f).values + rng.integers(0, 3, X.n_faces(1)) * (rng.random(X.n_faces(1)) < 0.3)) % 3)
        # a level-1 cochain on a graph-like view: compare local minimality on vertex stars
        ok, _ = is_locally_minimal(g, Fraction(1, 10))
        assert ok == _brute_locally_minimal(g, Fraction(1, 10))


def test_trace_json_roundtrip_fields():
    X = complete_complex(5, 2)
    f = random_cochain(X, 1, cyclic(2), np.random.default_rng(1))
    _, trace = correct(f, Fraction(1, 10))
    data = trace.to_json()
    assert data["eta"] == "1/10" or float(data["eta"]) == 0.1
    assert len(data["steps"]) == trace.iterations


# ------------------------------------------------------------ walks
def test_up_down_are_averaging_operators():
    X = complete_complex(5, 2)
    for k in (0, 1):
        D = down_matrix(X, k + 1)
        U = up_matrix(X, k)
        assert np.allclose(D.sum(axis=1), 1)
        assert np.allclose(U.sum(axis=1), 1)
    f = RealFunction(X, 1, np.arange(X.n_faces(1), dtype=float))
    # <U f, g> = <f, D g> for the stationary inner products
    g = RealFunction(X, 2, np.random.default_rng(0).standard_normal(X.n_faces(2)))
    assert up(f).inner(g) == pytest.approx(f.inner(down(g)))


def test_constant_functions_are_fixed():
    X = complete_complex(6, 3)
    one = RealFunction(X, 2, np.ones(X.n_faces(2)))
    assert np.allclose(up(one).values, 1)
    assert np.allclose(down(one).values, 1)
    assert np.allclose(n_walk(one, 1).values, 1)


@pytest.mark.parametrize("k,j", [(1, 0), (2, 0), (2, 1)])
def test_walk_inequality_on_complete_complex(k, j):
    rep = verify_walk_inequality(complete_complex(6, 3), k, j, trials=200)
    assert rep.passed


def test_walk_inequality_on_building():
    X = order_complex(subspace_lattice(3, 2), [1, 2])
    rep = verify_walk_inequality(X, 0, 0, trials=1000)
    assert rep.passed and rep.violations == 0


def test_walk_form_exceeds_lambda_on_sl4_building():
    # U N is not self-adjoint here: its eigenvalues stay below lambda but its
    # symmetric part reaches 0.48106 against lambda = sqrt(2)/3 (dense oracle, frozen)
    X = order_complex(subspace_lattice(4, 2), [1, 2, 3])
    rep = verify_walk_inequality(X, 1, 0, trials=200)
    assert rep.violations == 0
    assert rep.lam == pytest.approx(np.sqrt(2) / 3)
    assert rep.spectral_excess == pytest.approx(0.4810631079544115 - np.sqrt(2) / 3, abs=1e-9)
    assert not rep.passed


# ------------------------------------------------ link weight inequality
@pytest.mark.parametrize("seed", range(3))
def test_link_weight_inequality_on_corrected_cochains(seed):
    eta = Fraction(1, 10)
    rng = np.random.default_rng(seed)
    X = SimplicialComplex(ANNULUS)
    ft, _ = correct(random_cochain(X, 0, cyclic(2), rng), eta)
    assert verify_link_weight_inequality(coboundary(ft), eta).passed
    Y = complete_complex(6, 3)
    ft, _ = correct(random_cochain(Y, 1, cyclic(3), rng), eta)
    rep = verify_link_weight_inequality(coboundary(ft), eta)
    assert rep.passed and rep.rows


def test_link_weight_inequality_nonabelian():
    eta = Fraction(1, 10)
    X = complete_complex(5, 3)
    ft, _ = correct(random_cochain(X, 1, S3, np.random.default_rng(7)), eta)
    assert verify_link_weight_inequality(coboundary(ft), eta, coboundary_of=ft).passed


def test_link_weight_inequality_rejects_non_minimal():
    X = complete_complex(5, 2)
    G = cyclic(2)
    f = Cochain(X, 1, G, np.ones(X.n_faces(1), dtype=np.int64))
    g = coboundary(f)
    if not is_locally_minimal(g, Fraction(1, 100))[0]:
        with pytest.raises(PreconditionError):
            verify_link_weight_inequality(g, Fraction(1, 100))
    bad = Cochain(X, 1, G, np.eye(1, X.n_faces(1), dtype=np.int64)[0])
    with pytest.raises(PreconditionError):
        verify_link_weight_inequality(bad, Fraction(1, 10))


def test_n_walk_matches_sampling():
    X = complete_complex(6, 3)
    rng = np.random.default_rng(3)
    f = RealFunction(X, 1, rng.standard_normal(X.n_faces(1)))
    Nf = n_walk(f, 0).values
    r = (2,)
    ups = [t for t in X.faces(2) if 2 in t]
    samples = []
    for _ in range(4000):
        t = ups[rng.integers(len(ups))]
        opp = [e for e in combinations(t, 2) if 2 not in e]
        samples.append(f.values[X.index(opp[rng.integers(len(opp))])])
    samples = np.array(samples)
    assert abs(samples.mean() - Nf[X.index(r)]) <= 3 * samples.std() / np.sqrt(len(samples))


def test_local_minimality_examples():
    X = complete_complex(5, 2)
    G = cyclic(2)
    assert is_locally_minimal(Cochain(X, 1, G, np.zeros(X.n_faces(1), dtype=np.int64)), Fraction(1, 10))[0]
    # every edge at vertex 0 set: the constant shift at 0 clears the whole star
    star = np.array([1 if 0 in e else 0 for e in X.faces(1)])
    ok, viol = is_locally_minimal(Cochain(X, 1, G, star), Fraction(1, 10))
    assert not ok and viol.face == (0,) and viol.improvement == 1
    assert is_locally_minimal(Cochain(X, 1, G, star), 1)[0]
