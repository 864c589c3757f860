"""Truncated h-analytic distribution algebras in the c^n basis.

A distribution  sum_n b_n c^n  lies in the unit ball of D_{h-an} when
val(b_n) >= -v_lower(h, n).  Elements are stored exactly like Iwasawa
elements (the coefficient b_n itself); the pole condition is checked, not
encoded, so both algebras share one multiplication routine.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from mixchar.binomial import InvariantViolation, _margin_verdict
from mixchar.coeffrings import INF, Automorphism, BElem, SemilinearAction
from mixchar.iwasawa import (
    GroupPresentation,
    IwasawaElem,
    PresentationError,
    _cap,
    left_products,
)
from mixchar.padic import PadicInt
from mixchar.valuations import multi_indices, v_lower, v_upper, weight


def _fmt_val(v) -> str:
    return "inf" if v == INF else str(v)


class DistElem:
    """An element of the truncated D_{h-an}(G_0, B+)' unit ball (up to poles)."""

    __slots__ = ("elem", "h")

    def __init__(self, elem: IwasawaElem, h: int, check: bool = True):
        if h < 0:
            raise ValueError("h must be nonnegative")
        self.elem = elem
        self.h = h
        if check:
            self.check()

    @classmethod
    def from_unit_ball(cls, pres: GroupPresentation, h: int, coords: dict, N: int, D: int):
        """sum_n a_n varpi^(-v_h(n)) c^n with a_n in B+."""
        p = pres.ring.p
        terms = {}
        for n, a in coords.items():
            n = tuple(n)
            if a.val() < 0:
                raise ValueError(f"unit-ball coordinate at {n} is not integral")
            terms[n] = a.shift(-v_lower(p, h, n))
        return cls(IwasawaElem(pres, terms, N, D), h)

    @property
    def pres(self) -> GroupPresentation:
        return self.elem.pres

    @property
    def terms(self) -> dict:
        return self.elem.terms

    @property
    def error_ideal(self) -> tuple:
        """(N, D): the result is known modulo varpi^N A + F^{>= N + D}."""
        return self.elem.N, self.elem.D

    def margins(self, upper: bool = False) -> dict:
        p = self.pres.ring.p
        prof = v_upper if upper else v_lower
        return {k: b.val() + prof(p, self.h, k) for k, b in self.elem.visible().items()}

    def violations(self, upper: bool = False) -> list:
        return sorted(k for k, m in self.margins(upper).items() if m < 0)

    def check(self) -> "DistElem":
        bad = self.violations()
        if bad:
            raise InvariantViolation(f"D_(h={self.h})-an membership fails at {bad[:5]}")
        return self

    def in_upper(self) -> bool:
        """Membership in the upper-convention ball (sandwich test)."""
        return not self.violations(upper=True)

    def to_unit_ball(self) -> dict:
        p = self.pres.ring.p
        return {
            k: b.shift(v_lower(p, self.h, k)) for k, b in self.elem.visible().items()
        }

    def _same(self, other):
        if not isinstance(other, DistElem) or other.h != self.h:
            raise PresentationError("distributions with different h")

    def __add__(self, other):
        self._same(other)
        return DistElem(self.elem + other.elem, self.h)

    def __neg__(self):
        return DistElem(-self.elem, self.h, check=False)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return mul_dist(self, other)

    def __eq__(self, other):
        if not isinstance(other, DistElem):
            return NotImplemented
        return self.h == other.h and self.elem == other.elem

    __hash__ = None  # type: ignore[assignment]

    def to_json(self) -> dict:
        out = self.elem.to_json()
        out["h"] = self.h
        return out

    def __repr__(self):
        return f"DistElem(h={self.h}, {self.elem!r})"


def mul_dist(x: DistElem, y: DistElem) -> DistElem:
    x._same(y)
    z = x.elem * y.elem
    out = DistElem(z, x.h, check=False)
    bad = out.violations()
    if bad:
        raise InvariantViolation(
            f"product left the D_(h={x.h})-an unit ball at {bad[:5]}; arithmetic bug"
        )
    return out


# ---------------------------------------------------------------------------
# structure constants


@dataclass
class BCHTable:
    """a_{n,m,k} = coefficient of c^k in c^n * c^m, for |n|, |m|, |k| <= D."""

    pres: GroupPresentation
    h: int
    D: int
    N: int
    entries: dict = field(default_factory=dict)

    def F(self, k) -> dict:
        """F_k as the finite map (n, m) -> a_{n,m,k}."""
        k = tuple(k)
        return {(n, m): a for (n, m, kk), a in self.entries.items() if kk == k}

    def bound(self, n, m, k):
        if weight(k) > weight(n) + weight(m):
            return None
        p = self.pres.ring.p
        return v_lower(p, self.h, n) + v_lower(p, self.h, m) - v_lower(p, self.h, k)

    def rows(self) -> list:
        """(k, n, m, coefficient, val, bound, margin), sorted deterministically."""
        out = []
        key = lambda e: (weight(e[2]), e[2], weight(e[0]), e[0], weight(e[1]), e[1])  # noqa: E731
        for n, m, k in sorted(self.entries, key=key):
            a = self.entries[(n, m, k)]
            b = self.bound(n, m, k)
            v = a.val()
            margin = None if b is None else v - b
            out.append((k, n, m, a, v, b, margin))
        return out

    def failures(self) -> list:
        return [r for r in self.rows() if r[6] is not None and r[6] < 0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "n", "m", "coefficient", "val", "bound", "margin"])
        for k, n, m, a, v, b, margin in self.rows():
            w.writerow([
                ",".join(map(str, k)),
                ",".join(map(str, n)),
                ",".join(map(str, m)),
                a.to_str(),
                _fmt_val(v),
                "" if b is None else b,
                "" if margin is None else _fmt_val(margin),
            ])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "group": self.pres.to_json(),
            "ring": str(self.pres.ring),
            "h": self.h,
            "N": self.N,
            "D": self.D,
            "entries": [
                {
                    "k": list(k), "n": list(n), "m": list(m),
                    "coefficient": a.to_str(),
                    "val": _fmt_val(v),
                    "bound": b,
                    "margin": None if margin is None else _fmt_val(margin),
                }
                for k, n, m, a, v, b, margin in self.rows()
            ],
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def default_precision(pres: GroupPresentation, h: int, D: int) -> int:
    """Enough digits to decide every certificate: bounds never exceed 2 v_h(D)."""
    return 2 * v_lower(pres.ring.p, h, (D,)) + 2


def _column(pres, m, ns, N, D):
    one = pres.ring.one(N)
    prods = left_products(pres, {m: one}, ns, N, D)
    out = {}
    for n in ns:
        for k, a in prods[n].items():
            if weight(k) <= D:
                out[(n, m, k)] = a
    return out


def bch_table(pres: GroupPresentation, h: int, D: int, N: int | None = None,
              threads: int = 1) -> BCHTable:
    if N is None:
        N = default_precision(pres, h, D)
    ns = list(multi_indices(pres.d, D))
    entries: dict = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            cols = list(ex.map(lambda m: _column(pres, m, ns, N, D), ns))
    else:
        cols = [_column(pres, m, ns, N, D) for m in ns]
    for col in cols:
        entries.update(col)
    return BCHTable(pres, h, D, N, entries)


def twisted_certificates(pres: GroupPresentation, h: int, D: int, scalars,
                         N: int | None = None, n_max: int | None = None) -> list:
    """Failures of val(coeff of c^k in c^n (b c^m)) >= val(b) + bound(n, m, k).

    This is the certificate with scalars threaded through the twisting
    action; an empty list means every entry passed.  Products are formed
    modulo F^(>D); with ``n_max`` only |n|, |m| <= n_max are swept, so
    D = 2 * n_max sees every k with |k| <= |n| + |m|.
    """
    p = pres.ring.p
    if N is None:
        N = default_precision(pres, h, D)
    ns = list(multi_indices(pres.d, D if n_max is None else n_max))
    fails = []
    for b in scalars:
        b = b.truncate(N)
        vb = b.val()
        for m in ns:
            prods = left_products(pres, {m: b}, ns, N + abs(vb), D)
            for n in ns:
                for k, a in prods[n].items():
                    if weight(k) > min(D, weight(n) + weight(m)):
                        continue
                    bound = vb + v_lower(p, h, n) + v_lower(p, h, m) - v_lower(p, h, k)
                    if a.val() < bound:
                        fails.append((b.to_str(), n, m, k, a.val(), bound))
    return fails


# ---------------------------------------------------------------------------
# change of subgroup


def _padic_pow(e: PadicInt, q: int, p: int) -> PadicInt:
    if e.prec is None:
        return PadicInt(e.value**q, None)
    return PadicInt(Fraction(pow(e.residue(p, e.prec), q, p**e.prec)), e.prec)


def _power_map(sigma: Automorphism, q: int) -> Automorphism:
    if sigma.is_trivial or q == 1:
        return sigma
    if sigma.kind == "cyclotomic":
        return Automorphism.cyclotomic(sigma.ring, _padic_pow(sigma.gamma, q, sigma.ring.p))
    raise PresentationError("subgroup of an action given by a raw image is not supported")


def power_subgroup(pres: GroupPresentation, t: int) -> GroupPresentation:
    """Presentation of <g_i^(p^t)> with the induced basis.

    Supported when every relation is a pure power g_j g_i g_j^-1 = g_i^e,
    in which case the new exponent is e^(p^t).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return pres
    p = pres.ring.p
    q = p**t
    rel = {}
    for (j, i), exps in pres.relations.items():
        for k, e in enumerate(exps):
            if k != i and not (e.is_exact_int() and e.value == 0):
                raise PresentationError("only pure-power relations are supported")
        new = [PadicInt.exact(0, p)] * j
        new[i] = _padic_pow(exps[i], q, p)
        rel[(j, i)] = tuple(new)
    act = SemilinearAction(pres.ring, tuple(_power_map(s, q) for s in pres.action.maps))
    return GroupPresentation(pres.ring, pres.d, rel, act)


def _same_shape(a: GroupPresentation, b: GroupPresentation) -> bool:
    return (
        a.ring == b.ring
        and a.to_json() == b.to_json()
        and a.action == b.action
    )


def subgroup_expansion(target: GroupPresentation, t: int, n, N: int, D: int) -> IwasawaElem:
    """c'^n = prod_i (g_i^(p^t) - 1)^(n_i) in the c^k basis of the target."""
    q = target.ring.p ** t
    out = target.one(N, D)
    for i, ni in enumerate(n):
        if ni:
            step = target.gen_power(i, q, N, D) - target.one(N, D)
            for _ in range(ni):
                out = out * step
    return out


def include_subgroup_dist(x: DistElem, target: GroupPresentation, t: int) -> DistElem:
    """Rewrite a distribution on <g_i^(p^t)> in the c^k basis of ``target``."""
    if not _same_shape(x.pres, power_subgroup(target, t)):
        raise PresentationError("source is not the p^t-power subgroup of the target")
    N, D = x.error_ideal
    if t == 0:
        return DistElem(IwasawaElem(target, x.terms, N, D), x.h)
    out = target.zero(N, D)
    for n, b in sorted(x.terms.items()):
        out = out + subgroup_expansion(target, t, n, N, D).lmul_scalar(b).truncate(N, D)
    res = DistElem(out, x.h, check=False)
    bad = res.violations()
    if bad:
        raise InvariantViolation(f"included distribution has poles beyond v_h at {bad[:5]}")
    return res


# ---------------------------------------------------------------------------
# analytic vectors in a finite free module


class ModuleError(ValueError):
    pass


def _det(matrix):
    r = len(matrix)
    total = None
    for perm in itertools.permutations(range(r)):
        inv = sum(1 for a in range(r) for b in range(a + 1, r) if perm[a] > perm[b])
        term = matrix[0][perm[0]]
        for row in range(1, r):
            term = term * matrix[row][perm[row]]
        if inv % 2:
            term = -term
        total = term if total is None else total + term
    return total


def check_module(pres: GroupPresentation, matrices) -> None:
    if len(matrices) != pres.d:
        raise ModuleError(f"need {pres.d} generator matrices")
    r = len(matrices[0])
    for i, M in enumerate(matrices):
        if len(M) != r or any(len(row) != r for row in M):
            raise ModuleError(f"matrix of g_{i + 1} is not {r}x{r}")
        if any(a.val() < 0 for row in M for a in row):
            raise ModuleError(f"matrix of g_{i + 1} is not integral")
        if r > 6:
            raise ModuleError("rank above 6 is outside the supported range")
        if _det(M).val() != 0:
            raise ModuleError(f"matrix of g_{i + 1} is not invertible at this truncation")


def apply_generator(pres: GroupPresentation, matrices, i: int, v: list) -> list:
    """g_i(v) = M_i sigma_i(v) for a column vector v."""
    M = matrices[i]
    sv = [pres.action.sigma(i, a) for a in v]
    out = []
    for row in M:
        acc = row[0] * sv[0]
        for a, b in zip(row[1:], sv[1:]):
            acc = acc + a * b
        out.append(acc)
    return out


def c_powers_on_vector(pres: GroupPresentation, matrices, v: list, D: int) -> dict:
    """{n: c^n v} for |n| <= D, with c^n = c_1^n_1 ... c_d^n_d acting on the left."""
    memo = {(0,) * pres.d: v}
    for n in multi_indices(pres.d, D):
        if n in memo:
            continue
        j = next(i for i, a in enumerate(n) if a)
        prev = list(n)
        prev[j] -= 1
        w = memo[tuple(prev)]
        gw = apply_generator(pres, matrices, j, w)
        memo[n] = [a - b for a, b in zip(gw, w)]
    return memo


@dataclass
class VectorReport:
    label: str
    margins: list
    analytic: bool

    def as_dict(self) -> dict:
        return {
            "vector": self.label,
            "analytic": self.analytic,
            "margins": [[t, _fmt_val(m)] for t, m in self.margins],
        }


@dataclass
class AnalyticVectorsReport:
    h: int
    D: int
    window: tuple
    vectors: list

    @property
    def basis(self) -> list:
        return [r.label for r in self.vectors if r.analytic]

    def as_dict(self) -> dict:
        return {
            "h": self.h,
            "D": self.D,
            "window": list(self.window),
            "analytic": self.basis,
            "vectors": [r.as_dict() for r in self.vectors],
        }


def analytic_vectors(pres: GroupPresentation, h: int, matrices, vectors=None,
                     D: int = 8, window: int = 4) -> AnalyticVectorsReport:
    """Windowed-margin test of val(c^n v) - v_lower(h, n) on given vectors.

    Without ``vectors`` the standard basis is tested.  This is a finite
    report, not a proof of h-analyticity.
    """
    check_module(pres, matrices)
    p = pres.ring.p
    r = len(matrices[0])
    if vectors is None:
        cap = min(a.cap for M in matrices for row in M for a in row)
        vectors = []
        for s in range(r):
            col = [pres.ring.one(cap) if t == s else pres.ring.zero(cap) for t in range(r)]
            vectors.append((f"e{s + 1}", col))
    else:
        vectors = [
            (lab, vec) if isinstance(vec, list) else (lab, list(vec))
            for lab, vec in (v if isinstance(v, tuple) else (f"v{i + 1}", v)
                             for i, v in enumerate(vectors))
        ]
    lo = max(0, D - window)
    reports = []
    for label, v in vectors:
        if len(v) != r:
            raise ModuleError(f"vector {label} has length {len(v)}, expected {r}")
        powers = c_powers_on_vector(pres, matrices, v, D)
        by_t = {t: INF for t in range(D + 1)}
        for n, w in powers.items():
            val = min((a.val() for a in w), default=INF)
            m = val - v_lower(p, h, n)
            t = weight(n)
            if m < by_t[t]:
                by_t[t] = m
        allm = sorted(by_t.items())
        win = [(t, m) for t, m in allm if t >= lo]
        reports.append(VectorReport(label, allm, _margin_verdict(win, allm)))
    return AnalyticVectorsReport(h, D, (lo, D), reports)
