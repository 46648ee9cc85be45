from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from hdx.cochains import (
    BudgetExceeded,
    Cochain,
    CochainError,
    Space,
    coboundary,
    coboundary_values,
    cochain_from_json,
    distance,
    distance_to_space,
    enumerate_space,
    random_cochain,
    weight,
    zero_cochain,
)
from hdx.complex import complete_complex
from hdx.groups import GroupError, cyclic, element_order, exponent, group_from_name, symmetric
from strategies import ABELIAN, S3, pure_complexes


# ------------------------------------------------------------------ groups
@pytest.mark.parametrize("G", [cyclic(2), cyclic(3), cyclic(4), ABELIAN["Z2xZ2"], symmetric(3)], ids=lambda G: G.name)
def test_group_axioms(G):
    n = G.order
    T = G.table
    assert all(T[0, a] == a and T[a, 0] == a for a in range(n))
    for a, b, c in product(range(n), repeat=3):
        assert T[T[a, b], c] == T[a, T[b, c]]
    assert all(T[a, G.inverse[a]] == 0 for a in range(n))


def test_group_names_and_orders():
    assert group_from_name("Z5").order == 5
    assert group_from_name("S3").order == 6
    assert not symmetric(3).is_abelian
    assert exponent(symmetric(3)) == 6
    assert element_order(cyclic(4), 2) == 2
    with pytest.raises(GroupError):
        group_from_name("Q8")


# --------------------------------------------------------- delta squared
@given(pure_complexes(min_dim=2), st.sampled_from(sorted(ABELIAN)), st.data())
def test_delta_squared_is_zero_abelian(X, name, data):
    G = ABELIAN[name]
    for k in range(-1, X.dimension - 1):
        vals = data.draw(st.lists(st.integers(0, G.order - 1), min_size=X.n_faces(k), max_size=X.n_faces(k)))
        dd = coboundary_values(X, G, k + 1, coboundary_values(X, G, k, np.array(vals)))
        assert np.all(dd == 0)


@given(pure_complexes(min_dim=2), st.data())
def test_delta_squared_is_identity_nonabelian(X, data):
    for k in (-1, 0):
        vals = data.draw(st.lists(st.integers(0, 5), min_size=X.n_faces(k), max_size=X.n_faces(k)))
        dd = coboundary_values(X, S3, k + 1, coboundary_values(X, S3, k, np.array(vals)))
        assert np.all(dd == 0)


@given(pure_complexes(min_dim=2, max_vertices=6), st.sampled_from(["Z3", "Z2xZ2"]), st.data())
def test_coboundary_matches_oracle(X, name, data):
    G = ABELIAN[name]
    T = O.Table(G.table)
    for k in range(0, X.dimension):
        vals = data.draw(st.lists(st.integers(0, G.order - 1), min_size=X.n_faces(k), max_size=X.n_faces(k)))
        want = O.coboundary_abelian(dict(zip(X.faces(k), vals)), X.faces(k + 1), T)
        got = coboundary_values(X, G, k, np.array(vals))
        assert [want[t] for t in X.faces(k + 1)] == list(got)


@given(pure_complexes(min_dim=2, max_vertices=6), st.data())
def test_nonabelian_coboundary_matches_oracle(X, data):
    T = O.Table(S3.table)
    for k in (0, 1):
        vals = data.draw(st.lists(st.integers(0, 5), min_size=X.n_faces(k), max_size=X.n_faces(k)))
        want = O.coboundary_nonabelian(dict(zip(X.faces(k), vals)), X.faces(k + 1), T, k)
        got = coboundary_values(X, S3, k, np.array(vals))
        assert [want[t] for t in X.faces(k + 1)] == list(got)


def test_oriented_evaluation():
    X = complete_complex(3, 2)
    G = cyclic(3)
    f = Cochain(X, 1, G, [1, 2, 0])
    assert f((0, 1)) == 1 and f((1, 0)) == 2
    h = Cochain(X, 1, S3, [1, 3, 0])
    assert S3.mul(h((0, 1)), h((1, 0))) == 0


def test_cochain_validation_and_json():
    X = complete_complex(3, 1)
    with pytest.raises(CochainError):
        Cochain(X, 1, cyclic(2), [0, 1])
    with pytest.raises(CochainError):
        Cochain(X, 1, cyclic(2), [0, 1, 2])
    f = Cochain(X, 1, cyclic(2), [0, 1, 1])
    assert cochain_from_json(X, f.to_json()) == f
    with pytest.raises(ValueError):
        f.values[0] = 1


def test_non_abelian_level_two_coboundary_rejected():
    X = complete_complex(5, 3)
    with pytest.raises(CochainError):
        coboundary(zero_cochain(X, 2, S3))


# --------------------------------------------------------------- distances
def test_weight_and_distance():
    X = complete_complex(4, 1)
    f = Cochain(X, 1, cyclic(2), [1, 0, 0, 0, 0, 1])
    assert weight(f) == Fraction(1, 3)
    assert distance(f, zero_cochain(X, 1, cyclic(2))) == Fraction(1, 3)


@pytest.mark.parametrize("name", ["Z2", "Z3", "S3"])
def test_distance_to_coboundaries_matches_oracle(name):
    X = complete_complex(4, 2)
    G = group_from_name(name)
    rng = np.random.default_rng(5)
    for _ in range(5):
        f = random_cochain(X, 1, G, rng)
        got = distance_to_space(f, Space.COBOUNDARIES)
        want = O.nearest_coboundary_distance(dict(zip(X.faces(1), f.values)), X.top_faces, 1, G.table, G.is_abelian)
        assert got.value == want
        assert distance(f, got.witness) == got.value


def test_milp_agrees_with_enumeration():
    X = complete_complex(5, 2)
    rng = np.random.default_rng(0)
    for G in (cyclic(2), cyclic(3), S3):
        for _ in range(3):
            f = random_cochain(X, 1, G, rng)
            ex = distance_to_space(f, Space.COBOUNDARIES, method="exhaustive")
            mi = distance_to_space(f, Space.COBOUNDARIES, budget=1, method="auto")
            assert mi.method == "milp" and mi.exact
            assert ex.value == mi.value


def test_cocycle_distance_milp():
    X = complete_complex(5, 2)
    rng = np.random.default_rng(2)
    for _ in range(3):
        f = random_cochain(X, 1, cyclic(2), rng)
        ex = distance_to_space(f, Space.COCYCLES, method="exhaustive")
        mi = distance_to_space(f, Space.COCYCLES, method="milp")
        assert ex.value == mi.value


def test_enumeration_budget():
    X = complete_complex(6, 2)
    with pytest.raises(BudgetExceeded):
        list(enumerate_space(X, 1, S3, Space.ALL, budget=100))
    assert len(list(enumerate_space(complete_complex(4, 2), 1, cyclic(2), Space.COBOUNDARIES))) == 8
