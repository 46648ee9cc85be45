from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given

import oracles as O
from hdx.complex import (
    ComplexError,
    SimplicialComplex,
    build_complex,
    canonical,
    color_restriction,
    complete_complex,
    link,
    permutation_sign,
    star,
)
from strategies import pure_complexes


def test_complete_complex_counts():
    X = complete_complex(5, 2)
    assert [X.n_faces(k) for k in range(-1, 3)] == [1, 5, 10, 10]
    assert X.is_uniform(2)


def test_permutation_sign_and_canonical():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((2, 0, 1)) == 1
    assert canonical((3, 1, 2)) == ((1, 2, 3), 1)
    assert canonical((1, 3, 2)) == ((1, 2, 3), -1)


def test_rejects_non_pure_and_repeated_vertices():
    with pytest.raises(ComplexError):
        SimplicialComplex([(0, 1), (0, 1, 2)])
    with pytest.raises(ComplexError):
        SimplicialComplex([(0, 0, 1)])


def test_weights_must_sum_to_one_unless_normalized():
    with pytest.raises(ComplexError):
        SimplicialComplex([(0, 1), (1, 2)], weights=[1, 1])
    X = SimplicialComplex([(0, 1), (1, 2)], weights=[1, 3], normalize=True)
    assert X.pr((1, 2)) == Fraction(3, 4)


def test_duplicate_tops_merge():
    X = build_complex([(0, 1), (1, 0), (1, 2)], weights=[1, 1, 2], normalize=True)
    assert X.n_faces(1) == 2
    assert X.pr((0, 1)) == Fraction(1, 2)


@given(pure_complexes())
def test_face_probabilities_match_oracle(X):
    d = X.dimension
    w = [Fraction(int(m), X.denominator(d)) for m in X.mass(d)]
    probs = O.face_probs(X.top_faces, w)
    for k in range(-1, d + 1):
        for s in X.faces(k):
            assert X.pr(s) == probs[s]
        assert sum(X.pr(s) for s in X.faces(k)) == 1


@given(pure_complexes())
def test_faces_match_closure(X):
    fb = O.closure(X.top_faces)
    for k in range(-1, X.dimension + 1):
        assert list(X.faces(k)) == fb[k + 1]


@given(pure_complexes(min_dim=2))
def test_link_is_conditional_distribution(X):
    s = X.faces(0)[0]
    L = link(X, s)
    parent = L.parent_vertices

    def lift(t):
        return tuple(sorted(set(parent[v] for v in t) | set(s)))

    for k in range(-1, L.dimension + 1):
        total = sum(X.pr(lift(u)) for u in L.faces(k))
        for t in L.faces(k):
            assert L.pr(t) == X.pr(lift(t)) / total


def test_link_of_empty_face_is_complex():
    X = complete_complex(4, 2)
    assert link(X, ()) is X
    with pytest.raises(ComplexError):
        link(X, (0, 1, 2))


def test_color_restriction_on_partite_complex():
    tops = [(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)]
    X = SimplicialComplex(tops, colors=[0, 0, 1, 1, 2, 2])
    Y = color_restriction(X, [0, 2])
    assert Y.n_faces(1) == 4
    assert set(Y.palette()) == {0, 2}
    assert all(Y.pr(e) == Fraction(1, 4) for e in Y.faces(1))
    with pytest.raises(ComplexError):
        color_restriction(complete_complex(4, 2), [0])


def test_colors_must_be_proper():
    with pytest.raises(ComplexError):
        SimplicialComplex([(0, 1, 2)], colors=[0, 0, 1])


def test_star_masses():
    X = complete_complex(4, 2)
    st = star(X, (0,), 1)
    assert sorted(f for f, _ in st) == [(0, 1), (0, 2), (0, 3)]
    assert sum(p for _, p in st) == Fraction(1, 2)


def test_containing_and_cofaces_agree():
    X = complete_complex(5, 2)
    cof = X.cofaces(1)
    for i, e in enumerate(X.faces(1)):
        ups = [X.faces(2)[j] for j in cof[i]]
        assert all(set(e) <= set(t) for t in ups)
        assert len(ups) == 3
    assert sorted(X.containing((0,), 2)) == sorted(X.index(t) for t in combinations(range(5), 3) if 0 in t)


def test_boundary_indices_drop_one_vertex():
    X = complete_complex(4, 3)
    B = X.boundary_indices(2)
    for t, row in zip(X.faces(2), B):
        assert [X.faces(1)[j] for j in row] == [t[:i] + t[i + 1:] for i in range(3)]
    assert np.all(B >= 0)
