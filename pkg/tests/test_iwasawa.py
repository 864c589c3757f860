import random
from math import comb
from fractions import Fraction

import pytest

from mixchar.coeffrings import INF, Automorphism, LaurentFp, O1, Qp, SemilinearAction
from mixchar.iwasawa import (
    GroupPresentation,
    IwasawaElem,
    PresentationError,
    check_action_relations,
    commute_scalar,
    normal_form,
    parse_word,
)
from mixchar.valuations import multi_indices, weight


def _fr(elem):
    return {k: b.to_fraction() for k, b in elem.terms.items()}


def test_abelian_normal_form():
    G = GroupPresentation.abelian(Qp(2), 2)
    assert _fr(normal_form(G, "g1 g2", 6, 4)) == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}


def test_power_of_generator():
    G = GroupPresentation.abelian(Qp(2), 1)
    z = normal_form(G, "g1^2", 6, 3) - G.one(6, 3)
    assert _fr(z) == {(1,): 2, (2,): 1}


@pytest.mark.parametrize("p", [2, 3])
def test_example_group_commutator_expansion(p):
    e = 1 + p * p
    D = e + 1
    G = GroupPresentation.example_group(Qp(p))
    z = G.c((0, 1), 8, D) * G.c((1, 0), 8, D)
    expected = {(1, 0): -1}
    for k in range(1, e + 1):
        expected[(k, 0)] = expected.get((k, 0), 0) + comb(e, k)
        expected[(k, 1)] = comb(e, k)
    expected = {k: v for k, v in expected.items() if v and weight(k) <= D}
    got = {k: v for k, v in _fr(z).items() if weight(k) <= D}
    assert got == expected


def test_word_form_agrees_with_c_product():
    G = GroupPresentation.example_group(Qp(2))
    a = normal_form(G, "c2 c1", 8, 5)
    b = normal_form(G, [("c", 1, 1), ("c", 0, 1)], 8, 5)
    assert a == b
    assert parse_word("g2 g1^-1 c1^2", G) == [("g", 1, 1), ("g", 0, "-1"), ("c", 0, 2)]


def test_non_uniform_relation_rejected():
    with pytest.raises(PresentationError):
        GroupPresentation.example_group(Qp(2), exponent="p")
    with pytest.raises(PresentationError):
        GroupPresentation.example_group(Qp(3), exponent=4)


def test_untwisted_abelian_monomials():
    G = GroupPresentation.abelian(Qp(3), 2)
    assert _fr(G.c((1, 0), 6, 4) * G.c((0, 1), 6, 4)) == {(1, 1): 1}


def _twisted_rank1(p=2, gamma=3):
    L = LaurentFp(p)
    return L, GroupPresentation.abelian(L, 1, SemilinearAction(L, (Automorphism.cyclotomic(L, gamma),)))


def test_twisted_commutation():
    L, G = _twisted_rank1()
    T = L.monomial(1, 8)
    z = G.c((1,), 8, 8) * G.scalar(T, 8, 8)
    assert z.coefficient((1,)) == L.laurent({1: 1, 2: 1, 3: 1}, 8)
    assert z.coefficient((0,)) == L.laurent({2: 1, 3: 1}, 8)


def test_commute_scalar_examples():
    R = Qp(3)
    G = GroupPresentation.abelian(R, 2)
    a = R.from_int(7, 6)
    assert commute_scalar(G, (2, 1), a, 6, 6) == {(2, 1): a}
    L, H = _twisted_rank1()
    T = L.monomial(1, 8)
    sigma = H.action.maps[0]
    one = commute_scalar(H, (1,), T, 8, 8)
    assert one[(1,)] == sigma(T) and one[(0,)] == sigma(T) - T
    two = commute_scalar(H, (2,), T, 8, 8)
    assert two[(2,)] == sigma(sigma(T))
    direct = normal_form(H, [("c", 0, 2), ("s", T)], 8, 8)
    assert IwasawaElem(H, two, 8, 8) == direct
    assert all(b.val() >= 1 for b in two.values())


def test_commute_scalar_valuation_bound_exhaustive():
    for p, gamma in ((2, 5), (3, 4)):
        L = LaurentFp(p)
        act = SemilinearAction(L, (Automorphism.cyclotomic(L, gamma), Automorphism.cyclotomic(L, 1 + p)))
        G = GroupPresentation.abelian(L, 2, act)
        for n in multi_indices(2, 6):
            for k in range(0, 4):
                a = L.monomial(k, 10)
                for b in commute_scalar(G, n, a, 10, 8).values():
                    assert b.val() >= a.val()


def test_action_relations_consistent():
    L, G = _twisted_rank1()
    assert check_action_relations(G, [L.monomial(1, 8)])


def _random_elem(G, N, D, rng, terms=4):
    out = {}
    idx = list(multi_indices(G.d, min(D, 3)))
    ring = G.ring
    for _ in range(terms):
        n = rng.choice(idx)
        if ring.kind == "Qp":
            b = ring.from_int(rng.randrange(ring.p ** N), N)
        elif ring.kind == "LaurentFp":
            b = ring.laurent({k: rng.randrange(ring.p) for k in range(N)}, N)
        else:
            b = ring.laurent({k: rng.randrange(ring.p ** 4) * ring.p ** max(0, -k) for k in range(-1, N)}, N)
        out[n] = b
    return IwasawaElem(G, out, N, D)


def _presentations():
    yield GroupPresentation.abelian(Qp(2), 1)
    yield GroupPresentation.abelian(Qp(3), 2)
    yield GroupPresentation.abelian(O1(2), 3)
    yield GroupPresentation.example_group(Qp(2))
    yield GroupPresentation.example_group(Qp(3))
    yield _twisted_rank1()[1]


@pytest.mark.parametrize("G", list(_presentations()), ids=lambda g: f"{g.ring}-d{g.d}")
def test_associativity(G):
    rng = random.Random(11)
    N, D = 6, 6
    for _ in range(100):
        x, y, z = (_random_elem(G, N, D, rng, 3) for _ in range(3))
        assert (x * y) * z == x * (y * z)


def test_graded_commutativity():
    G = GroupPresentation.example_group(Qp(2))
    N, D = 12, 10
    for n in multi_indices(2, 4):
        for m in multi_indices(2, 4):
            x, y = G.c(n, N, D), G.c(m, N, D)
            comm = x * y - y * x
            assert comm.filtration_degree() > weight(n) + weight(m)


def test_untwisted_abelian_is_commutative_power_series():
    rng = random.Random(2)
    G = GroupPresentation.abelian(Qp(5), 2)
    N, D = 5, 6
    for _ in range(20):
        x, y = _random_elem(G, N, D, rng), _random_elem(G, N, D, rng)
        ref = {}
        for a, b in x.terms.items():
            for c, d in y.terms.items():
                k = (a[0] + c[0], a[1] + c[1])
                ref[k] = ref.get(k, 0) + b.to_fraction() * d.to_fraction()
        got = _fr(x * y)
        mod = 5**N
        want = {k: v % mod for k, v in ref.items() if v % mod and weight(k) <= D}
        assert {k: v % mod for k, v in got.items() if weight(k) <= D} == want


def test_product_precision_is_sound():
    rng = random.Random(4)
    for G in _presentations():
        for _ in range(10):
            hx, hy = _random_elem(G, 8, 6, rng), _random_elem(G, 8, 6, rng)
            lo = hx.truncate(6, 6) * hy.truncate(6, 6)
            hi = hx * hy
            assert hi.truncate(lo.N, lo.D).to_json() == lo.to_json()


def test_min_val_of_empty_is_inf():
    assert GroupPresentation.abelian(Qp(2), 1).zero(4, 4).min_val() == INF


def test_product_with_poles_keeps_claimed_digits():
    # both factors carry 2^-2 poles; the c^(0,2) c^(1,1) structure constant
    # 40 must survive to the product even though 40 = 0 mod 2^N at N = 2
    R = Qp(2)
    G = GroupPresentation.example_group(R)
    F = Fraction
    x = IwasawaElem(G, {(0, 2): R.from_fraction(F(11, 4), 2), (1, 2): R.from_fraction(F(1, 4), 1),
                        (1, 0): R.from_fraction(F(5, 2), 2)}, 2, 3)
    y = IwasawaElem(G, {(0, 1): R.one(2), (1, 1): R.from_fraction(F(3, 4), 2), (0, 0): R.one(2)}, 2, 3)
    exact = IwasawaElem(G, {k: R.from_fraction(b.to_fraction(), 40) for k, b in x.terms.items()}, 40, 3) * \
        IwasawaElem(G, {k: R.from_fraction(b.to_fraction(), 40) for k, b in y.terms.items()}, 40, 3)
    z = x * y
    for k, b in z.terms.items():
        assert exact.coefficient(k).truncate(b.cap).to_str() == b.to_str()
