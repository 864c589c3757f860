import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixchar.coeffrings import (
    INF,
    ActionError,
    Automorphism,
    DescriptorMismatch,
    LaurentFp,
    O1,
    O1Elem,
    Qp,
    RingDescriptor,
    SemilinearAction,
    apply_action,
    check_automorphism,
    check_local_analyticity,
    slope_at_least,
)

N = 8


def test_o1_add_and_val():
    R = O1(2)
    x = R.monomial(1, N) + R.from_int(2, N)
    assert x.coeffs() == {0: 2, 1: 1}
    assert x.val() == 1


def test_qp_and_laurent_add():
    assert (Qp(2).one(N) + Qp(2).one(N)).val() == 1
    L = LaurentFp(2)
    assert (L.monomial(-1, N) + L.monomial(-1, N)).is_zero()


def test_o1_defining_relation():
    R = O1(3)
    p_over_x = O1Elem.make(3, {-1: 3}, N)
    assert p_over_x * R.monomial(1, N) == R.from_int(3, N)
    sq = p_over_x * p_over_x
    assert sq.coeffs() == {-2: 9}
    assert sq.val() == 0
    assert p_over_x.val() == 0
    assert R.from_int(3, N).val() == 1


def test_frobenius_in_char_p():
    L = LaurentFp(2)
    one_t = L.laurent({0: 1, 1: 1}, N)
    assert one_t * one_t == L.laurent({0: 1, 2: 1}, N)
    assert L.monomial(3, N).val() == 3


def test_zero_reports_cap():
    z = Qp(3).zero(5)
    assert z.val() == INF and z.val_bound() == 5


def test_descriptor_mismatch():
    with pytest.raises(DescriptorMismatch):
        Qp(2).one(N) + Qp(3).one(N)


def test_general_olambda_rejected():
    with pytest.raises(ValueError, match="slope-1"):
        RingDescriptor("OLambda", 2)


@pytest.mark.parametrize(
    "ring,m,n,expected",
    [(Qp(2), 1, 1, True), (Qp(2), 2, 1, False), (LaurentFp(2), 10, 1, True), (O1(2), 1, 1, True)],
)
def test_slope(ring, m, n, expected):
    assert slope_at_least(ring, m, n) is expected


def test_cyclotomic_action_values():
    L = LaurentFp(2)
    g = Automorphism.cyclotomic(L, 3)
    T = L.monomial(1, N)
    assert g(T) == L.laurent({1: 1, 2: 1, 3: 1}, N)
    diff = g(T) - T
    assert diff == L.laurent({2: 1, 3: 1}, N)
    assert diff.val() >= 2


def test_trivial_action_is_identity():
    R = O1(2)
    act = SemilinearAction.trivial(R, 2)
    x = R.laurent({-1: 2, 3: 5}, N)
    assert apply_action(act, 1, "1/3", x) is x


def test_apply_action_matches_composition():
    L = LaurentFp(3)
    act = SemilinearAction(L, (Automorphism.cyclotomic(L, 4),))
    x = L.laurent({1: 1, 2: 2}, N)
    twice = act.sigma(0, act.sigma(0, x))
    assert apply_action(act, 0, 2, x) == twice


def test_local_analyticity_reports():
    L = LaurentFp(2)
    ok = check_local_analyticity(SemilinearAction(L, (Automorphism.cyclotomic(L, 3),)), 8)
    assert ok.passed
    shift = Automorphism.from_image(L, L.laurent({0: 1, 1: 1}, N))
    bad = check_local_analyticity(SemilinearAction(L, (shift,)), 8)
    assert not bad.passed and bad.first_violation[:2] == (0, 0)


def test_cyclotomic_rejected_on_qp_and_bad_gamma():
    with pytest.raises(ActionError):
        Automorphism.cyclotomic(Qp(2), 3)
    with pytest.raises(ActionError):
        Automorphism.cyclotomic(LaurentFp(3), 2)


def test_o1_action_multiplicative():
    R = O1(2)
    act = SemilinearAction(R, (Automorphism.cyclotomic(R, 5),))
    xs = [R.laurent({-1: 2, 0: 1}, N), R.laurent({1: 1, 2: 3}, N), R.from_int(6, N)]
    assert check_automorphism(act, [(a, b) for a in xs for b in xs])


def test_o1_residual_ring_not_killed():
    R = O1(3)
    for j in range(N):
        pj = O1Elem.make(3, {-j: 3**j}, N)
        assert pj.val() == 0


def test_reduce_mod_p_lands_in_laurent():
    R = O1(2)
    x = R.laurent({0: 3, 1: 2, 2: 1}, N)
    red = x.reduce_mod_p()
    assert red == LaurentFp(2, "X").laurent({0: 1, 2: 1}, N)


def _rand(ring, cap, rng):
    p = ring.p
    if ring.kind == "Qp":
        return ring.from_int(rng.randrange(1, p**cap), cap).shift(rng.randrange(-2, 3))
    if ring.kind == "LaurentFp":
        return ring.laurent({k: rng.randrange(p) for k in range(-2, cap)}, cap)
    return ring.laurent({k: rng.randrange(p**6) * p ** max(0, -k) for k in range(-2, cap)}, cap)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["Qp", "LaurentFp", "O1"]), st.integers(0, 10**6))
def test_valuation_axioms_and_precision_soundness(kind, seed):
    rng = random.Random(seed)
    ring = {"Qp": Qp(3), "LaurentFp": LaurentFp(3), "O1": O1(3)}[kind]
    hi = [_rand(ring, N + 2, rng) for _ in range(2)]
    lo = [x.truncate(N) for x in hi]
    s, t = lo[0] + lo[1], lo[0] * lo[1]
    assert s.val() >= min(lo[0].val(), lo[1].val()) or s.val() >= s.cap
    if not t.is_zero():
        assert t.val() >= lo[0].val() + lo[1].val()
    assert (hi[0] + hi[1]).truncate(s.cap).to_str() == s.to_str()
    assert (hi[0] * hi[1]).truncate(t.cap).to_str() == t.to_str()
    assert (hi[0] * hi[1]).cap >= t.cap
