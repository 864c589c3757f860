from hypothesis import given
from hypothesis import strategies as st

from mixchar.valuations import (
    check_profile,
    digit_sum,
    multi_indices,
    u_h,
    v_lower,
    v_upper,
    val_p,
    val_p_factorial,
    weight,
)

import pytest


@pytest.mark.parametrize("p,n,expected", [(3, 9, 4), (2, 0, 0), (2, 4, 3)])
def test_val_p_factorial_examples(p, n, expected):
    assert val_p_factorial(p, n) == expected


@pytest.mark.parametrize(
    "p,h,n,expected", [(2, 0, (4,), 3), (2, 1, (1, 1), 0), (3, 0, (9, 3), 5)]
)
def test_v_upper_examples(p, h, n, expected):
    assert v_upper(p, h, n) == expected


@pytest.mark.parametrize("p,h,n,expected", [(2, 1, (3, 1), 2), (3, 0, (1,), 0), (2, 0, (5,), 5)])
def test_v_lower_examples(p, h, n, expected):
    assert v_lower(p, h, n) == expected


@pytest.mark.parametrize("p,h,n,expected", [(2, 1, 4, 2), (2, 1, 1, 0), (3, 1, 12, 2)])
def test_u_h_examples(p, h, n, expected):
    assert u_h(p, h, n) == expected


@given(st.sampled_from([2, 3, 5, 7]), st.integers(0, 5000))
def test_legendre_matches_digit_sum_formula(p, n):
    assert val_p_factorial(p, n) * (p - 1) == n - digit_sum(p, n)


@given(st.sampled_from([2, 3, 5]), st.integers(0, 3), st.lists(st.integers(0, 300), min_size=1, max_size=3))
def test_v_lower_is_u_of_weight(p, h, n):
    assert v_lower(p, h, n) == u_h(p, h, weight(n))
    assert v_upper(p, h, n) <= v_lower(p, h, n)


def test_val_p_of_zero_is_infinite():
    assert val_p(3, 0) == float("inf")
    assert val_p(3, -18) == 2


def test_multi_indices_graded_and_complete():
    idx = list(multi_indices(2, 3))
    assert idx[0] == (0, 0)
    assert [weight(n) for n in idx] == sorted(weight(n) for n in idx)
    assert len(idx) == len(set(idx)) == 10


def test_check_profile_rejects_bad_input():
    with pytest.raises(ValueError):
        check_profile(4, 0)
    with pytest.raises(ValueError):
        check_profile(3, -1)
