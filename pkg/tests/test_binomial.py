import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixchar.binomial import (
    BinSeries,
    ConventionError,
    InvariantViolation,
    amice_basis_change,
    classify_analyticity,
    det_mod,
    int_structure_constants,
    lambda_character,
    lambda_series,
    mahler_transform,
    mul_binseries,
    multi_structure_constants,
)
from mixchar.coeffrings import O1, LaurentFp, Qp
from mixchar.valuations import v_lower, v_upper, val_p

from oracles import closed_form_structure_constant


def test_structure_constant_examples():
    assert int_structure_constants(1, 1) == {1: 1, 2: 2}
    assert int_structure_constants(1, 2) == {2: 2, 3: 3}
    assert int_structure_constants(0, 5) == {5: 1}


def test_structure_constants_match_closed_form():
    for n in range(25):
        for m in range(25):
            table = int_structure_constants(n, m)
            for k in range(n + m + 2):
                assert table.get(k, 0) == closed_form_structure_constant(n, m, k)


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("h", [0, 1, 2])
def test_closure_certificate(p, h):
    for n in range(41):
        for m in range(41):
            for k, a in int_structure_constants(n, m).items():
                assert val_p(p, a) >= v_upper(p, h, (k,)) - v_upper(p, h, (n,)) - v_upper(p, h, (m,))


def test_multi_structure_constants_disjoint_variables():
    assert multi_structure_constants((1, 0), (0, 1)) == {(1, 1): 1}


def _series(ring, coeffs, conv="Bin", h=0, D=8, d=1):
    return BinSeries(ring, d, {n: ring.from_int(c, 10) if isinstance(c, int) else c
                               for n, c in coeffs.items()}, conv, h, D)


def test_mul_binseries_examples():
    R = Qp(3)
    one = _series(R, {(0,): 1})
    x = _series(R, {(1,): 1, (3,): 5})
    assert mul_binseries(one, x).coeffs == x.coeffs
    sq = mul_binseries(_series(R, {(1,): 1}), _series(R, {(1,): 1}))
    assert {n: b.to_fraction() for n, b in sq.coeffs.items()} == {(1,): 1, (2,): 2}
    xy = mul_binseries(_series(R, {(1, 0): 1}, d=2), _series(R, {(0, 1): 1}, d=2))
    assert list(xy.coeffs) == [(1, 1)]


def test_convention_checks():
    R = Qp(2)
    with pytest.raises(ConventionError):
        mul_binseries(_series(R, {(0,): 1}), _series(R, {(0,): 1}, "hBinUpper", 1))
    bad = BinSeries(R, 1, {(4,): R.from_int(1, 10)}, "hBinUpper", 0, 8)
    with pytest.raises(InvariantViolation):
        bad.check()


def test_hbinlower_product_has_one_pole():
    p, h = 2, 1
    R = Qp(p)
    D = 12
    a = BinSeries(R, 1, {(n,): R.monomial(v_lower(p, h, (n,)), 20) for n in range(D + 1)},
                  "hBinLower", h, D)
    prod = mul_binseries(a, a)
    assert prod.pole == 1
    worst = min(b.val() - v_lower(p, h, n) for n, b in prod.coeffs.items())
    assert worst >= -1


def test_mahler_of_squares_and_roundtrip():
    R = Qp(5)
    values = [R.from_int(x * x, 8) for x in range(7)]
    s = mahler_transform(values)
    assert {n[0]: b.to_fraction() for n, b in s.coeffs.items()} == {1: 1, 2: 2}
    for x, v in enumerate(values):
        assert s.evaluate((x,)) == v
    const = mahler_transform([R.from_int(4, 8)] * 5)
    assert list(const.coeffs) == [(0,)]


def test_amice_h0_unitriangular():
    rows, cols = amice_basis_change(3, 0, 6, 5)
    assert cols == [(0, j) for j in range(7)]
    for n, row in enumerate(rows):
        assert all(row[j] == 0 for j in range(n + 1, 7))
        assert row[n] % 3 != 0


def test_amice_constant_and_determinant():
    rows, cols = amice_basis_change(2, 1, 8, 6)
    assert [rows[0][c] for c, (i, j) in enumerate(cols) if j == 0] == [1, 1]
    assert det_mod(rows, 2) == 1


def test_lambda_examples():
    R = Qp(3)
    t = R.from_int(3, 8)
    assert lambda_character(R, t, 1, 8) == R.one(8) + t
    assert lambda_character(R, t, 2, 8) == (R.one(8) + t) * (R.one(8) + t)
    O = O1(2)
    X = O.monomial(1, 8)
    inv = lambda_character(O, X, -1, 8)
    assert inv.coeffs() == {k: (-1) ** k % 2 ** (8 - k) for k in range(8)}
    assert (inv * (O.one(8) + X)).truncate(8) == O.one(8)
    with pytest.raises(ValueError):
        lambda_character(R, R.one(8), 2, 8)


def test_lambda_series_is_mahler_of_character():
    L = LaurentFp(3)
    T = L.monomial(1, 8)
    values = [lambda_character(L, T, x, 8) for x in range(9)]
    s = mahler_transform(values)
    for n in range(9):
        assert s.coefficient((n,), 8) == lambda_series(L, T, 8, 8).coefficient((n,), 8)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["Qp", "LaurentFp", "O1"]), st.integers(0, 10**6))
def test_character_property(kind, seed):
    rng = random.Random(seed)
    ring = {"Qp": Qp(2), "LaurentFp": LaurentFp(3), "O1": O1(3)}[kind]
    N = rng.randrange(1, 9)
    t = ring.uniformizer(N)
    x, y = rng.randrange(-100, 100), rng.randrange(-100, 100)
    lhs = lambda_character(ring, t, x + y, N)
    rhs = lambda_character(ring, t, x, N) * lambda_character(ring, t, y, N)
    assert lhs.same_at(rhs, N)


def test_mod_p_compatibility():
    for p in (2, 3):
        O, L = O1(p, "X"), LaurentFp(p, "X")
        for x in (-1, 5, "1/3" if p == 2 else "1/2", 17):
            a = lambda_character(O, O.monomial(1, 8), x, 8).reduce_mod_p()
            b = lambda_character(L, L.monomial(1, 8), x, 8)
            assert a == b


def test_classify_examples():
    O = O1(3)
    lam = lambda_series(O, O.monomial(1, 20), 20, 12)
    rep = classify_analyticity(lam, 0, 4)
    assert rep.is_h_lower
    assert rep.summary().startswith("h=0 analytic, margin curve")
    zero = BinSeries(O, 1, {}, "Bin", 0, 12)
    assert all(classify_analyticity(zero, h).is_h_lower for h in range(3))
    L = LaurentFp(2)
    ones = BinSeries(L, 1, {(n,): L.one(8) for n in range(13)}, "Bin", 0, 12)
    assert not any(classify_analyticity(ones, h).is_h_lower for h in range(3))


def test_classify_boundary_case_p2():
    # margins n - floor(n/(p-1)) vanish identically at p = 2, h = 0
    O = O1(2)
    rep = classify_analyticity(lambda_series(O, O.monomial(1, 20), 20, 12), 0)
    assert [m for _, m in rep.margins_lower] == [0] * 5
    assert not rep.is_h_lower
    assert classify_analyticity(lambda_series(O, O.monomial(1, 20), 20, 12), 1).is_h_lower
