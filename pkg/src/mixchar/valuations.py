"""Integer valuation functions on multi-indices.

Everything here is exact and works on arbitrary-size Python ints.
"""

from __future__ import annotations

from typing import Sequence

from mixchar.kernels import val_p_factorial as _vpf

MultiIndex = tuple


def weight(n: Sequence[int]) -> int:
    return sum(n)


def digit_sum(p: int, n: int) -> int:
    """Sum of the base-``p`` digits of ``n``."""
    s = 0
    while n:
        n, r = divmod(n, p)
        s += r
    return s


def val_p(p: int, x: int) -> float | int:
    """p-adic valuation of an integer; ``inf`` for zero."""
    if x == 0:
        return float("inf")
    x = abs(x)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def val_p_factorial(p: int, n: int) -> int:
    """val_p(n!) by Legendre's formula."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _vpf(p, n)


def v_upper(p: int, h: int, n: Sequence[int]) -> int:
    """sum_i val_p(floor(n_i / p^h)!)."""
    q = p**h
    return sum(_vpf(p, ni // q) for ni in n)


def u_h(p: int, h: int, n: int) -> int:
    """floor(n / (p^h (p-1)))."""
    return n // (p**h * (p - 1))


def v_lower(p: int, h: int, n: Sequence[int]) -> int:
    """floor(|n| / (p^h (p-1)))."""
    return u_h(p, h, weight(n))


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def check_profile(p: int, h: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if h < 0:
        raise ValueError("h must be nonnegative")


def multi_indices(d: int, max_weight: int, min_weight: int = 0):
    """All n in Z_{>=0}^d with min_weight <= |n| <= max_weight, graded-lex order."""
    for w in range(min_weight, max_weight + 1):
        yield from _compositions(d, w)


def _compositions(d: int, w: int):
    if d == 1:
        yield (w,)
        return
    for first in range(w, -1, -1):
        for rest in _compositions(d - 1, w - first):
            yield (first,) + rest
