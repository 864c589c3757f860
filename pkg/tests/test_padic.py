from fractions import Fraction

import pytest

from mixchar.padic import InsufficientPrecision, PadicInt, frac_mod


def test_parse_forms():
    assert PadicInt.parse("1+p^2", 3).value == 10
    assert PadicInt.parse("-1/3", 2).value == Fraction(-1, 3)
    x = PadicInt.parse("7 mod 2^10", 2)
    assert x.prec == 10 and x.residue(2, 10) == 7


def test_parse_rejects_non_integral_and_garbage():
    with pytest.raises(ValueError):
        PadicInt.parse("1/2", 2)
    with pytest.raises(ValueError):
        PadicInt.parse("__import__('os')", 2)


def test_binomial_of_exact_and_truncated_exponents():
    assert PadicInt.parse(5, 2).binomial(2, 2, 5) == 10
    x = PadicInt.parse("-1/3 mod 2^10", 2)
    exact = PadicInt.parse("-1/3", 2)
    for k in range(6):
        assert x.binomial(k, 2, 4) == exact.binomial(k, 2, 4)


def test_insufficient_precision_raises():
    x = PadicInt.parse("5 mod 2^3", 2)
    with pytest.raises(InsufficientPrecision):
        x.residue(2, 4)


def test_frac_mod():
    assert frac_mod(Fraction(1, 3), 2, 4) * 3 % 16 == 1
