"""Exhaustive checks of the elementary valuation inequalities.

v_upper is a sum of one-variable terms, so its extremes over all n with
|n| = w in dimension d are max-plus / min-plus convolutions of the
one-variable profile.  That makes "all n with |n| <= W" checks exact
without enumerating every multi-index.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from mixchar.valuations import u_h, v_lower, val_p_factorial


@dataclass
class LemmaResult:
    name: str
    checked: int
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "failures": [list(map(str, f)) for f in self.failures[:5]],
        }


def _profile(p: int, h: int, W: int) -> np.ndarray:
    q = p**h
    return np.array([val_p_factorial(p, m // q) for m in range(W + 1)], dtype=np.int64)


def _conv(f: np.ndarray, g: np.ndarray, op) -> np.ndarray:
    W = len(f) - 1
    out = np.empty(W + 1, dtype=np.int64)
    for w in range(W + 1):
        out[w] = op(f[: w + 1] + g[w::-1])
    return out


def extreme_v_upper(p: int, h: int, d: int, W: int, op=np.max) -> np.ndarray:
    """op over |n| = w (n in Z_{>=0}^d) of v_upper(h, n), for w = 0..W."""
    f = _profile(p, h, W)
    out = f
    for _ in range(d - 1):
        out = _conv(out, f, op)
    return out


def check_sandwich(p: int, h: int, h2: int, d: int, W: int) -> LemmaResult:
    """v_upper(h,n) <= v_lower(h,n) + 1 for |n| <= W, and the c' tail check.

    The second part: min over |n| <= W of v_upper(h,n) - v_lower(h2,n) is
    attained in the first quarter of the range.
    """
    w = np.arange(W + 1)
    low = w // (p**h * (p - 1))
    top = extreme_v_upper(p, h, d, W, np.max)
    bad = np.nonzero(top > low + 1)[0]
    failures = [("sandwich", p, h, d, int(x)) for x in bad[:5]]
    if h2 > h:
        bot = extreme_v_upper(p, h, d, W, np.min)
        gap = bot - w // (p**h2 * (p - 1))
        at = int(np.argmin(gap))
        if at > W // 4:
            failures.append(("tail", p, h, h2, d, at, int(gap[at])))
    return LemmaResult(f"sandwich p={p} h={h} h'={h2} d={d}", W + 1, failures)


def check_lipschitz(p: int, h: int, W: int) -> LemmaResult:
    """v_h(n)+v_h(m)-v_h(k) <= |n|+|m|-|k| whenever |k| <= |n|+|m|.

    Both sides depend on the weights only, so looping over weights
    a = |n|, b = |m|, c = |k| covers every multi-index in every dimension.
    """
    q = p**h * (p - 1)
    failures = []
    checked = 0
    for a in range(W + 1):
        for b in range(W + 1):
            c = np.arange(a + b + 1)
            lhs = a // q + b // q - c // q
            rhs = a + b - c
            checked += len(c)
            bad = np.nonzero(lhs > rhs)[0]
            failures.extend(("lipschitz", p, h, a, b, int(x)) for x in bad[:2])
    return LemmaResult(f"lipschitz p={p} h={h}", checked, failures)


def check_u_steps(p: int, h: int, n_max: int) -> LemmaResult:
    """u_h(n-p) >= u_h(n)-1 (n >= p), and u_h never rises on consecutive steps."""
    if h < 1:
        raise ValueError("the step lemma is stated for h >= 1")
    failures = []
    u = [u_h(p, h, n) for n in range(n_max + 1)]
    for n in range(1, n_max + 1):
        if n >= p and u[n - p] < u[n] - 1:
            failures.append(("drop", p, h, n))
        if u[n] != u[n - 1]:
            ok = n >= 2 and u[n] == u[n - 1] + 1 and u[n - 1] == u[n - 2]
            if not ok:
                failures.append(("step", p, h, n))
    return LemmaResult(f"u_h steps p={p} h={h}", n_max, failures)


def check_floor(b_max: int, a_extra: int, n_max: int) -> LemmaResult:
    """floor((n+t)/a) <= floor(n/b) for b >= t, a >= 2b, 0 <= n <= n_max.

    The left side is nondecreasing in t, so t = b is the worst real case;
    t = b - 1/2 and t = 0 are checked as well.
    """
    n = np.arange(n_max + 1)
    failures = []
    checked = 0
    for b in range(1, b_max + 1):
        for a in range(2 * b, 2 * b + a_extra + 1):
            for t in (Fraction(b), Fraction(2 * b - 1, 2), Fraction(0)):
                # floor((n + t)/a) with t = tn/td
                lhs = (n * t.denominator + t.numerator) // (a * t.denominator)
                bad = np.nonzero(lhs > n // b)[0]
                checked += len(n)
                failures.extend(("floor", a, b, str(t), int(x)) for x in bad[:2])
    return LemmaResult("floor lemma", checked, failures)


def check_legendre(p: int, n_max: int) -> LemmaResult:
    failures = []
    count = 0
    for n in range(n_max + 1):
        if n:
            m = n
            while m % p == 0:
                m //= p
                count += 1
        if val_p_factorial(p, n) != count:
            failures.append(("legendre", p, n))
    return LemmaResult(f"legendre p={p}", n_max + 1, failures)


def check_v_lower_is_u(p: int, h: int, W: int) -> LemmaResult:
    failures = [(p, h, w) for w in range(W + 1) if v_lower(p, h, (w,)) != u_h(p, h, w)]
    return LemmaResult(f"v_lower = u_h p={p} h={h}", W + 1, failures)
