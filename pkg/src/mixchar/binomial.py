"""Functions on Z_p^d written in the binomial basis binom(T, n).

The conventions tag which valuation profile a series is normalised
against:

* ``Bin``        val(b_n) >= 0
* ``hBinUpper``  val(b_n) >= v_upper(h, n)
* ``hBinLower``  val(b_n) >= v_lower(h, n)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from mixchar.coeffrings import INF, BElem, RingDescriptor
from mixchar.kernels import forward_differences
from mixchar.padic import PadicInt
from mixchar.valuations import v_lower, v_upper, weight

CONVENTIONS = ("Bin", "hBinUpper", "hBinLower")


class ConventionError(ValueError):
    pass


class InvariantViolation(ArithmeticError):
    """A certified valuation bound failed; this signals a bug, not bad input."""


@lru_cache(maxsize=None)
def int_structure_constants(n: int, m: int) -> dict:
    """a_k with binom(T,n) binom(T,m) = sum_k a_k binom(T,k), k in [max(n,m), n+m]."""
    if n < 0 or m < 0:
        raise ValueError("indices must be nonnegative")
    values = [comb(t, n) * comb(t, m) for t in range(n + m + 1)]
    diffs = forward_differences(values)
    return {k: diffs[k] for k in range(max(n, m), n + m + 1) if diffs[k]}


def multi_structure_constants(n: tuple, m: tuple) -> dict:
    """Coordinatewise product of the 1-dim tables."""
    out = {(): 1}
    for ni, mi in zip(n, m):
        table = int_structure_constants(ni, mi)
        out = {k + (j,): a * b for k, a in out.items() for j, b in table.items()}
    return out


def _bound(convention: str, p: int, h: int, n: tuple) -> int:
    if convention == "Bin":
        return 0
    if convention == "hBinUpper":
        return v_upper(p, h, n)
    return v_lower(p, h, n)


@dataclass(frozen=True)
class BinSeries:
    ring: RingDescriptor
    d: int
    coeffs: dict
    convention: str = "Bin"
    h: int = 0
    D: int = 16
    pole: int = 0  # allowed shortfall against the convention's bound

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ConventionError(f"unknown convention {self.convention!r}")
        clean = {}
        for n, b in self.coeffs.items():
            n = tuple(n)
            if len(n) != self.d or min(n) < 0:
                raise ValueError(f"bad multi-index {n}")
            if weight(n) > self.D:
                continue
            if b.ring != self.ring:
                raise ValueError("coefficient from a different ring")
            if not b.is_zero():
                clean[n] = b
        object.__setattr__(self, "coeffs", clean)

    def bound(self, n: tuple) -> int:
        return _bound(self.convention, self.ring.p, self.h, n) - self.pole

    def violations(self) -> list:
        return [n for n, b in self.coeffs.items() if b.val() < self.bound(n)]

    def check(self) -> "BinSeries":
        bad = self.violations()
        if bad:
            raise InvariantViolation(
                f"{self.convention}(h={self.h}) bound fails at {sorted(bad)[:5]}"
            )
        return self

    def coefficient(self, n: tuple, cap: int | None = None) -> BElem:
        b = self.coeffs.get(tuple(n))
        if b is None:
            return self.ring.zero(cap if cap is not None else 0)
        return b

    def evaluate(self, x: tuple) -> BElem:
        """sum_n b_n binom(x, n) at a point of Z_{>=0}^d."""
        cap = min((b.cap for b in self.coeffs.values()), default=0)
        out = self.ring.zero(cap)
        for n, b in self.coeffs.items():
            c = 1
            for xi, ni in zip(x, n):
                c *= comb(xi, ni)
            if c:
                out = out + self.ring.from_int(c, b.cap) * b
        return out

    def to_json(self) -> dict:
        return {
            "ring": str(self.ring),
            "d": self.d,
            "convention": self.convention,
            "h": self.h,
            "D": self.D,
            "pole": self.pole,
            "coefficients": {
                ",".join(map(str, n)): self.coeffs[n].to_str() for n in sorted(self.coeffs)
            },
        }


def mul_binseries(x: BinSeries, y: BinSeries) -> BinSeries:
    """Product in the binomial basis, truncated to |k| <= D."""
    if x.ring != y.ring or x.d != y.d:
        raise ConventionError("series over different rings or dimensions")
    if x.convention != y.convention or x.h != y.h:
        raise ConventionError("series use different conventions")
    x.check()
    y.check()
    ring = x.ring
    D = min(x.D, y.D)
    acc: dict = {}
    for n, b in x.coeffs.items():
        for m, c in y.coeffs.items():
            bc = b * c
            for k, a in multi_structure_constants(n, m).items():
                if weight(k) > D:
                    continue
                term = ring.from_int(a, bc.cap) * bc
                acc[k] = acc[k] + term if k in acc else term
    pole = x.pole + y.pole + (1 if x.convention == "hBinLower" else 0)
    out = BinSeries(ring, x.d, acc, x.convention, x.h, D, pole)
    return out.check()


def mahler_transform(values: list) -> BinSeries:
    """Mahler coefficients a_n = (Delta^n f)(0) from f(0), ..., f(D)."""
    if not values:
        raise ValueError("need at least one value")
    ring = values[0].ring
    diffs = forward_differences(list(values))
    return BinSeries(ring, 1, {(n,): a for n, a in enumerate(diffs)}, "Bin", 0, len(values) - 1)


@dataclass
class AnalyticityReport:
    h: int
    window: tuple
    margins_upper: list = field(default_factory=list)
    margins_lower: list = field(default_factory=list)
    is_h_upper: bool = False
    is_h_lower: bool = False

    def as_dict(self) -> dict:
        def enc(ms):
            return [[w, "inf" if m == INF else m] for w, m in ms]

        return {
            "h": self.h,
            "window": list(self.window),
            "is_h_upper": self.is_h_upper,
            "is_h_lower": self.is_h_lower,
            "margins_upper": enc(self.margins_upper),
            "margins_lower": enc(self.margins_lower),
        }

    def summary(self) -> str:
        verdict = "analytic" if self.is_h_lower else "not analytic"
        curve = ", ".join("inf" if m == INF else str(m) for _, m in self.margins_lower)
        return f"h={self.h} {verdict}, margin curve {curve}"


def _margin_verdict(margins: list, all_margins: list) -> bool:
    if any(m < 0 for _, m in all_margins):
        return False
    window = [m for _, m in margins]
    return all(m > 0 for m in window) and all(a <= b for a, b in zip(window, window[1:]))


def classify_analyticity(s: BinSeries, h: int, window: int = 4) -> AnalyticityReport:
    """Windowed-margin test of h-analyticity over the top weights [D-w, D].

    The margin at weight t is min over |n| = t of val(b_n) - v(h, n); a
    series counts as h-analytic when every margin is >= 0 and the margins in
    the window are positive and nondecreasing.
    """
    p = s.ring.p
    lo = max(0, s.D - window)
    by_weight: dict = {t: [] for t in range(s.D + 1)}
    for n, b in s.coeffs.items():
        by_weight[weight(n)].append((n, b.val()))
    allu, alll = [], []
    for t in range(s.D + 1):
        entries = by_weight[t]
        mu = min((v - v_upper(p, h, n) for n, v in entries), default=INF)
        ml = min((v - v_lower(p, h, n) for n, v in entries), default=INF)
        allu.append((t, mu))
        alll.append((t, ml))
    rep = AnalyticityReport(h, (lo, s.D))
    rep.margins_upper = [(t, m) for t, m in allu if t >= lo]
    rep.margins_lower = [(t, m) for t, m in alll if t >= lo]
    rep.is_h_upper = _margin_verdict(rep.margins_upper, allu)
    rep.is_h_lower = _margin_verdict(rep.margins_lower, alll)
    return rep


def _poly_binom_shift(p: int, h: int, i: int, n: int) -> list:
    """Coefficients in y of binom(p^h y - i, n), as Fractions."""
    poly = [Fraction(1)]
    q = p**h
    for r in range(n):
        # multiply by (q y - i - r) / (r + 1)
        c0 = Fraction(-i - r, r + 1)
        c1 = Fraction(q, r + 1)
        nxt = [Fraction(0)] * (len(poly) + 1)
        for j, a in enumerate(poly):
            nxt[j] += a * c0
            nxt[j + 1] += a * c1
        poly = nxt
    return poly


def amice_basis_change(p: int, h: int, D: int, M: int):
    """Matrix of {p^v_upper(h,n) binom(T,n)} in the disc bases ((T+i)/p^h)^j.

    Rows are n = 0..K-1 with K = p^h * floor((D+1)/p^h); columns are pairs
    (i, j) with i in [0, p^h) the integer lift of the residue disc and
    j < K / p^h.  Entries are reduced mod p^M.
    """
    q = p**h
    if q > D:
        raise ValueError(f"need D >= p^h = {q}")
    J = (D + 1) // q
    K = q * J
    cols = [(i, j) for j in range(J) for i in range(q)]
    mod = p**M
    rows = []
    for n in range(K):
        scale = p ** v_upper(p, h, (n,))
        entries = []
        polys = {i: _poly_binom_shift(p, h, i, n) for i in range(q)}
        for i, j in cols:
            poly = polys[i]
            c = poly[j] * scale if j < len(poly) else Fraction(0)
            if c.denominator % p == 0:
                raise ArithmeticError(f"non-integral Amice entry at n={n}, disc {i}, j={j}")
            entries.append(c.numerator * pow(c.denominator, -1, mod) % mod)
        rows.append(entries)
    return rows, cols


def det_mod(matrix: list, p: int) -> int:
    """Determinant over F_p by Gaussian elimination."""
    a = [[x % p for x in row] for row in matrix]
    n = len(a)
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c] % p
        inv = pow(a[c][c], -1, p)
        for r in range(c + 1, n):
            f = a[r][c] * inv % p
            if f:
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
    return det % p


def lambda_character(ring: RingDescriptor, t: BElem, x, N: int) -> BElem:
    """sum_{n < N} binom(x, n) t^n, known mod varpi^N."""
    if t.val() < 1:
        raise ValueError("lambda character needs val(t) >= 1")
    x = PadicInt.parse(x, ring.p)
    out = ring.one(N)
    power = ring.one(N)
    for n in range(1, N):
        power = (power * t).truncate(N)
        if power.is_zero():
            break
        c = x.binomial(n, ring.p, max(N - power.val(), 0))
        out = out + ring.from_int(c, N) * power
    return out.truncate(N)


def lambda_series(ring: RingDescriptor, t: BElem, N: int, D: int) -> BinSeries:
    """The Mahler expansion of lambda_t: coefficient t^n on binom(x, n)."""
    coeffs = {}
    power = ring.one(N)
    for n in range(D + 1):
        coeffs[(n,)] = power
        power = (power * t).truncate(N)
    return BinSeries(ring, 1, coeffs, "Bin", 0, D)
