"""Independent reference computations used by the tests.

Nothing here calls the rewriting engine: the example group is handled through
its explicit group law, and structure constants through closed forms.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial


def example_group_law(e: int):
    """(a, b) * (c, d) for g1^a g2^b in the group g2 g1 g2^-1 = g1^e (exact for b >= 0)."""

    def mul(x, y):
        a, b = x
        c, d = y
        return (a + e**b * c, b + d)

    return mul


def example_bch_coefficient(p: int, n, m, k, exponent: int | None = None) -> int:
    """Coefficient of c^k in c^n c^m for g2 g1 g2^-1 = g1^(1+p^2), by inclusion-exclusion.

    c^n = sum_{j <= n} (-1)^{|n-j|} binom(n, j) g1^j1 g2^j2, and
    g1^a g2^b = sum_k binom(a, k1) binom(b, k2) c^k.
    """
    e = 1 + p * p if exponent is None else exponent
    mul = example_group_law(e)
    total = 0
    for j1 in range(n[0] + 1):
        for j2 in range(n[1] + 1):
            sj = (-1) ** (n[0] - j1 + n[1] - j2) * comb(n[0], j1) * comb(n[1], j2)
            for i1 in range(m[0] + 1):
                for i2 in range(m[1] + 1):
                    si = (-1) ** (m[0] - i1 + m[1] - i2) * comb(m[0], i1) * comb(m[1], i2)
                    a, b = mul((j1, j2), (i1, i2))
                    total += sj * si * comb(a, k[0]) * comb(b, k[1])
    return total


def closed_form_structure_constant(n: int, m: int, k: int) -> int:
    """binom(T,n) binom(T,m) = sum_k k!/((k-n)!(k-m)!(n+m-k)!) binom(T,k)."""
    if k < max(n, m) or k > n + m:
        return 0
    return factorial(k) // (factorial(k - n) * factorial(k - m) * factorial(n + m - k))


def laurent_mod_p_power(coeffs: dict, k: int, p: int, N: int) -> dict:
    """(sum c_i T^i)^k over F_p, truncated below T^N, by schoolbook multiplication."""
    out = {0: 1}
    for _ in range(k):
        nxt: dict = {}
        for i, a in out.items():
            for j, b in coeffs.items():
                if i + j < N:
                    nxt[i + j] = (nxt.get(i + j, 0) + a * b) % p
        out = {i: c for i, c in nxt.items() if c}
    return out


def padic_digits(q: Fraction, p: int, N: int) -> int:
    return q.numerator * pow(q.denominator, -1, p**N) % p**N
