import math
from fractions import Fraction

import numpy as np
import pytest

import oracles as O
from hdx.complex import SimplicialComplex, complete_complex
from hdx.expansion import (
    default_eta,
    edge_expansion,
    graph_spectrum,
    h_exhaustive,
    h_randomized,
    heavy_cosystole_bound,
    local_to_global_bound,
    overlap_constant,
    random_upper_bound_experiment,
    spectral_certificate,
    upper_bound_epsilon,
)
from hdx.groups import cyclic, symmetric
from hdx.lattice import order_complex, subspace_lattice

# six triangles around a hole: a cylinder with H^1(Z_2) = Z_2
ANNULUS = [(0, 1, 3), (1, 3, 4), (1, 2, 4), (2, 4, 5), (0, 2, 5), (0, 3, 5)]


@pytest.fixture(scope="module")
def sl3():
    return order_complex(subspace_lattice(3, 2), [1, 2])


def test_h0_building_matches_oracle(sl3):
    # oracle value 2/3 computed by tests/oracles.h_coboundary and frozen
    assert h_exhaustive(sl3, 0, cyclic(2)).value == Fraction(2, 3)


@pytest.mark.parametrize(
    "n,k,group,value",
    [
        (4, 0, "Z3", Fraction(4, 3)),
        (4, 1, "Z3", Fraction(9, 4)),
        (4, 0, "S3", Fraction(4, 3)),
        (4, 1, "S3", Fraction(2)),
        (5, 1, "Z2", Fraction(5, 3)),
    ],
)
def test_h_on_complete_complexes_frozen_from_oracle(n, k, group, value):
    G = cyclic(3) if group == "Z3" else symmetric(3) if group == "S3" else cyclic(2)
    assert h_exhaustive(complete_complex(n, 2), k, G).value == value


@pytest.mark.parametrize("k,name", [(0, "Z2"), (1, "Z2"), (0, "S3"), (1, "Z3")])
def test_h_matches_live_oracle_on_small_complex(k, name):
    tops = [(0, 1, 2), (1, 2, 3), (2, 3, 4)]
    X = SimplicialComplex(tops)
    G = cyclic(2) if name == "Z2" else cyclic(3) if name == "Z3" else symmetric(3)
    want = O.h_coboundary(tops, k, G.table, G.is_abelian)
    got = h_exhaustive(X, k, G)
    assert got.value == want


def test_nontrivial_cohomology_is_flagged():
    X = SimplicialComplex(ANNULUS)
    rep = h_exhaustive(X, 1, cyclic(2))
    assert rep.nontrivial_cohomology and rep.value == 0
    assert rep.min_nontrivial_cocycle_weight > 0
    assert O.h_coboundary(ANNULUS, 1, cyclic(2).table) == 0
    cos = h_exhaustive(X, 1, cyclic(2), mode="cosystolic")
    assert cos.value == rep.cosystolic_value and cos.value > 0


def test_randomized_is_an_upper_bound():
    X = complete_complex(5, 2)
    exact = h_exhaustive(X, 1, cyclic(2)).value
    rnd = h_randomized(X, 1, cyclic(2), trials=20, seed=3)
    assert rnd.exact and rnd.value >= exact
    again = h_randomized(X, 1, cyclic(2), trials=20, seed=3)
    assert again.value == rnd.value


def test_bound_formulas_exact():
    assert local_to_global_bound(1, 0, 1) == Fraction(1, 24)
    assert heavy_cosystole_bound(1, 0, 1) == Fraction(1, 2)
    assert overlap_constant(1, 1, 0, 1) == Fraction(1, 4)
    assert default_eta(1, 1) == Fraction(1, 24)
    assert local_to_global_bound([1, Fraction(1, 2)], 0, 1) == Fraction(1, 48)
    assert local_to_global_bound(1, 0.01, 1) == pytest.approx(1 / 24 - math.e * 0.01)


def test_graph_spectrum_complete_graph():
    n = 5
    edges = np.array([(i, j) for i in range(n) for j in range(i + 1, n)])
    lam2, lmin, conn = graph_spectrum(n, edges, np.ones(len(edges)))
    assert conn
    assert lam2 == pytest.approx(-1 / (n - 1))
    assert lmin == pytest.approx(-1 / (n - 1))


def test_heawood_graph_spectrum(sl3):
    cert = spectral_certificate(sl3, lambda_target=0.5)
    assert cert.value == pytest.approx(math.sqrt(2) / 3)
    assert cert.passed


def test_edge_expansion_of_path():
    edges = np.array([(0, 1), (1, 2), (2, 3)])
    h = edge_expansion(4, edges, np.ones(3))
    # the middle cut: a third of the edge mass against half the vertex mass
    assert h == pytest.approx(2 / 3)


def test_upper_bound_experiment_small():
    X = complete_complex(7, 2)
    rep = random_upper_bound_experiment(X, 1, trials=30, seed=1)
    assert rep.trials == 30
    assert rep.best_ratio is not None and rep.best_ratio > 0
    assert rep.epsilon == pytest.approx(upper_bound_epsilon(X, 1))
    assert rep.frequencies_consistent()
