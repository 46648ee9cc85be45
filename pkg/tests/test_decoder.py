from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from hdx.cochains import Cochain, Space, coboundary, distance, distance_to_space, random_cochain
from hdx.complex import SimplicialComplex
from hdx.decoder import (
    HypothesisViolation,
    LocalCertificate,
    certify_color_set,
    conditional_error_rates,
    decode,
    outside_faces,
    overall_bound,
    select_good_F,
    strata,
    stratum_bound,
)
from hdx.decoder import _minimize
from hdx.groups import cyclic, symmetric

S3 = symmetric(3)


def partite(parts=4, size=2):
    tops = list(product(*[range(c * size, (c + 1) * size) for c in range(parts)]))
    colors = [v // size for v in range(parts * size)]
    return SimplicialComplex(tops, colors=colors)


@pytest.fixture(scope="module")
def X():
    return partite()


def _flip(f, frac, rng):
    vals = f.values.copy()
    hit = rng.random(vals.size) < frac
    vals[hit] = (vals[hit] + rng.integers(1, f.group.order, hit.sum())) % f.group.order
    return f.with_values(vals)


def test_certificate_on_partite_complex(X):
    cert = certify_color_set(X, (0, 1, 2), 1, cyclic(2))
    assert cert.certified and 0 < cert.beta <= 1
    # X^F and the links of the two color-3 vertices are all K_{2,2,2}
    assert len(cert.details) == 3
    assert len({d[2] for d in cert.details}) == 1


def test_uncertified_when_over_budget(X):
    cert = certify_color_set(X, (0, 1, 2), 1, S3, budget=10)
    assert not cert.certified and cert.beta is None


def test_conditional_rates_match_recount(X):
    rng = np.random.default_rng(0)
    f = random_cochain(X, 1, cyclic(2), rng)
    df = coboundary(f)
    F = (0, 1, 3)
    rates = conditional_error_rates(X, df, F)
    for j in (1, 2, 3):
        faces = [t for t in X.faces(2) if sum(X.colors[v] in F for v in t) == j]
        tot = sum(X.pr(t) for t in faces)
        bad = sum(X.pr(t) for t in faces if df(t) != 0)
        assert rates[j - 1] == (bad / tot if tot else 0)


def test_outside_faces_and_strata(X):
    assert outside_faces(X, (0, 1, 2), 0) == [()]
    assert outside_faces(X, (0, 1, 2), 1) == [(6,), (7,)]
    assert outside_faces(X, (0, 1, 2), 2) == []
    st = strata(X, 1, (0, 1, 2))
    assert sorted(set(st.tolist())) == [0, 1]


@pytest.mark.parametrize("G", [cyclic(2), cyclic(3)], ids=lambda G: G.name)
def test_exact_coboundary_decodes_exactly(X, G):
    rng = np.random.default_rng(1)
    g0 = random_cochain(X, 0, G, rng)
    f = coboundary(g0)
    good = select_good_F(X, f, [certify_color_set(X, (0, 1, 2), 1, G)])
    g, rep = decode(X, f, good)
    assert coboundary(g) == f
    assert all(d == 0 for d in rep.dist_i) and rep.overall == 0
    assert rep.verified and rep.passed


def test_exact_coboundary_level_two():
    Y = partite(5, 2)
    G = cyclic(2)
    f = coboundary(random_cochain(Y, 1, G, np.random.default_rng(2)))
    cert = LocalCertificate((0, 1, 2, 3), Fraction(1, 2), True, "given")
    g, rep = decode(Y, f, select_good_F(Y, f, [cert]))
    assert coboundary(g) == f and rep.overall == 0


def test_nonabelian_exact_coboundary(X):
    f = coboundary(random_cochain(X, 0, S3, np.random.default_rng(3)))
    cert = LocalCertificate((0, 1, 2), Fraction(1, 3), True, "given")
    g, rep = decode(X, f, select_good_F(X, f, [cert]))
    assert coboundary(g) == f and rep.overall == 0


@pytest.mark.parametrize("G", [cyclic(2), S3], ids=lambda G: G.name)
def test_plurality_step_matches_exhaustive_constant(X, G):
    rng = np.random.default_rng(4)
    for _ in range(10):
        h = random_cochain(X, 0, G, rng)
        (gamma,), exact = _minimize(h, 10**6, 0)
        costs = [distance(h, h.with_values(np.full(h.values.size, c))) for c in range(G.order)]
        assert exact and costs[gamma] == min(costs)
        assert gamma == costs.index(min(costs))


@pytest.mark.parametrize("seed", range(4))
def test_noisy_decoding_within_bounds(X, seed):
    G = cyclic(3)
    rng = np.random.default_rng(seed)
    f = _flip(coboundary(random_cochain(X, 0, G, rng)), 0.05, rng)
    good = select_good_F(X, f, [certify_color_set(X, (0, 1, 2), 1, G)])
    g, rep = decode(X, f, good, keep_solves=True)
    assert rep.passed and rep.verified
    assert rep.disjunction_failures == 0
    assert float(rep.overall) <= overall_bound(1, rep.beta, rep.p, rep.eps)
    # every local problem was solved to optimality
    for sol in rep.solves:
        if sol.level >= 1:
            h = Cochain(sol.complex, sol.level, G, sol.h)
            best = distance_to_space(h, Space.COBOUNDARIES).value
            got = distance(h, coboundary(Cochain(sol.complex, sol.level - 1, G, sol.g0)))
            assert got == best


def test_stratum_bounds():
    # i = 0: (k+2) beta^-1 eps / p
    assert stratum_bound(0, 1, 1, 1, 0.01) == pytest.approx(0.03)
    # i = 1 <= k: 3 * 1! * beta^-2 * eps * (1 + 1)
    assert stratum_bound(1, 1, 0.5, 1, 0.01) == pytest.approx(3 * 4 * 0.01 * 2)
    # top stratum: (k+2)! beta^-(k+1) eps / p * (1 + 1 + 1/2)
    assert stratum_bound(2, 1, 0.5, 1, 0.01) == pytest.approx(6 * 4 * 0.01 * 2.5)
    assert overall_bound(1, Fraction(1, 9), 1, 0.01) == pytest.approx(np.e * 6 * 81 * 0.01)


def test_select_good_F_failures(X):
    G = cyclic(2)
    f = random_cochain(X, 1, G, np.random.default_rng(5))
    with pytest.raises(HypothesisViolation):
        select_good_F(X, f, [])
    bad = LocalCertificate((0, 1, 2), None, False, "exhaustive")
    with pytest.raises(HypothesisViolation):
        select_good_F(X, f, [bad])
    good = LocalCertificate((0, 1, 3), Fraction(1, 2), True, "given")
    with pytest.raises(HypothesisViolation):
        select_good_F(X, f, [good, bad], p=1)
    assert select_good_F(X, f, [good, bad]).p == Fraction(1, 2)
    with pytest.raises(ValueError):
        select_good_F(X, f, [LocalCertificate((0, 1), Fraction(1), True, "given")])


def test_select_good_F_rejects_concentrated_errors():
    # with five colors and F = {0, 1, 2}, an edge between the two outside colors
    # only meets triangles with one F color, which carry 3/10 of the mass
    Y = partite(5, 2)
    G = cyclic(2)
    f = Cochain(Y, 1, G, np.array([1 if e == (6, 8) else 0 for e in Y.faces(1)]))
    rates = conditional_error_rates(Y, coboundary(f), (0, 1, 2))
    eps = sum(Y.pr(t) for t in Y.faces(2) if coboundary(f)(t) != 0)
    assert rates[0] == eps / Fraction(3, 10) > 3 * eps
    cert = LocalCertificate((0, 1, 2), Fraction(1, 2), True, "given")
    with pytest.raises(HypothesisViolation):
        select_good_F(Y, f, [cert])
    # a color set splitting the edge sees the errors spread over two strata
    other = LocalCertificate((0, 1, 3), Fraction(1, 2), True, "given")
    assert select_good_F(Y, f, [cert, other]).F == (0, 1, 3)


def test_decode_rejects_bad_input(X):
    f0 = random_cochain(X, 0, cyclic(2), np.random.default_rng(0))
    cert = LocalCertificate((0, 1, 2), Fraction(1, 2), True, "given")
    f1 = coboundary(f0)
    good = select_good_F(X, f1, [cert])
    with pytest.raises(ValueError):
        decode(X, f0, good)
    plain = SimplicialComplex(X.top_faces)
    from hdx.complex import ComplexError

    with pytest.raises(ComplexError):
        decode(plain, Cochain(plain, 1, cyclic(2), f1.values), good)


def test_report_json_fields(X):
    f = coboundary(random_cochain(X, 0, cyclic(2), np.random.default_rng(6)))
    _, rep = decode(X, f, select_good_F(X, f, [certify_color_set(X, (0, 1, 2), 1, cyclic(2))]))
    data = rep.to_json()
    assert set(data) == {
        "F", "eps_Fj", "beta", "p", "eps", "dist_i", "bound_i", "overall", "bound", "verified", "passed",
        "disjunction_failures",
    }
    assert len(data["dist_i"]) == 3
