"""Truncated (twisted) Iwasawa algebras of uniform groups in the c^n basis.

An element is  sum_n b_n c^n  with c^n = (g_1-1)^n_1 ... (g_d-1)^n_d and
scalars on the left.  Elements at precision (N, D) are known modulo the
two-sided ideal

    J(N, D) = varpi^N A + { sum b_k c^k : val(b_k) + |k| >= N + D },

so the coefficient of c^k is kept modulo varpi^min(N, N + D - |k|).  In
particular every coefficient with |k| <= D is known mod varpi^N.

Products are computed by repeated left multiplication by a single c_j:

    c_j * (b P Q) = phi_j(b P) (1 + c_j) Q - b P Q,

where P is the part of the monomial in generators before j, Q the rest, and
phi_j is conjugation by g_j (acting on scalars through the semilinear
action and on earlier generators through the presentation's relations).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from mixchar.coeffrings import (
    INF,
    BElem,
    DescriptorMismatch,
    RingDescriptor,
    SemilinearAction,
    apply_action,
)
from mixchar.padic import PadicInt
from mixchar.valuations import weight


class PresentationError(ValueError):
    pass


@dataclass(eq=False)
class GroupPresentation:
    """A uniform group g_1..g_d with polycyclic conjugation rules.

    ``relations[(j, i)]`` for i < j (0-based) is the exponent vector
    (e_0, ..., e_{j-1}) with g_j g_i g_j^-1 = g_0^e_0 ... g_{j-1}^e_{j-1}.
    Missing pairs commute.
    """

    ring: RingDescriptor
    d: int
    relations: dict = field(default_factory=dict)
    action: SemilinearAction | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise PresentationError("dimension must be >= 1")
        p = self.ring.p
        rel = {}
        for (j, i), exps in self.relations.items():
            if not 0 <= i < j < self.d:
                raise PresentationError(f"relation ({j}, {i}) needs 0 <= i < j < d")
            exps = tuple(PadicInt.parse(e, p) for e in exps)
            if len(exps) != j:
                raise PresentationError(
                    f"relation ({j}, {i}) must give {j} exponents (generators before {j})"
                )
            for k, e in enumerate(exps):
                want = 1 if k == i else 0
                if (e.residue(p, 2) - want) % p**2:
                    raise PresentationError(
                        f"relation ({j}, {i}) is not uniform: exponent of g_{k} "
                        f"must be {want} mod p^2"
                    )
            rel[(j, i)] = exps
        self.relations = rel
        if self.action is None:
            self.action = SemilinearAction.trivial(self.ring, self.d)
        if self.action.ring != self.ring or self.action.d != self.d:
            raise PresentationError("action does not match ring/dimension")

    # -- catalog ---------------------------------------------------------
    @classmethod
    def abelian(cls, ring, d, action=None):
        return cls(ring, d, {}, action)

    @classmethod
    def example_group(cls, ring, exponent="1+p^2", action=None):
        """<g_1, g_2 | g_2 g_1 g_2^-1 = g_1^exponent>."""
        return cls(ring, 2, {(1, 0): (exponent,)}, action)

    @property
    def is_abelian(self) -> bool:
        return all(self._is_trivial_rule(j, i) for (j, i) in self.relations)

    @property
    def is_twisted(self) -> bool:
        return not self.action.is_trivial

    def _is_trivial_rule(self, j, i):
        exps = self.relations[(j, i)]
        return all(
            e.is_exact_int() and e.value == (1 if k == i else 0) for k, e in enumerate(exps)
        )

    def rule(self, j: int, i: int) -> tuple:
        exps = self.relations.get((j, i))
        if exps is None:
            p = self.ring.p
            exps = tuple(PadicInt.exact(1 if k == i else 0, p) for k in range(j))
        return exps

    def to_json(self) -> dict:
        return {
            "p": self.ring.p,
            "d": self.d,
            "relations": [
                {"j": j + 1, "i": i + 1, "exponents": [str(e) for e in exps]}
                for (j, i), exps in sorted(self.relations.items())
            ],
        }

    # -- algebra element helpers ----------------------------------------
    def zero(self, N, D) -> "IwasawaElem":
        return IwasawaElem(self, {}, N, D)

    def one(self, N, D) -> "IwasawaElem":
        return IwasawaElem(self, {(0,) * self.d: self.ring.one(N)}, N, D)

    def scalar(self, b: BElem, N, D) -> "IwasawaElem":
        return IwasawaElem(self, {(0,) * self.d: b}, N, D)

    def c(self, n, N, D, coeff: BElem | None = None) -> "IwasawaElem":
        n = tuple(n)
        if coeff is None:
            coeff = self.ring.one(N)
        return IwasawaElem(self, {n: coeff}, N, D)

    def gen_power(self, i: int, e, N, D) -> "IwasawaElem":
        """g_i^e = sum_k binom(e, k) c_i^k."""
        e = PadicInt.parse(e, self.ring.p)
        terms = {}
        unit = [0] * self.d
        for k in range(N + D):
            cap = _cap(N, D, k)
            if cap <= 0:
                break
            b = e.binomial(k, self.ring.p, cap)
            if b:
                unit[i] = k
                terms[tuple(unit)] = self.ring.from_int(b, cap)
        return IwasawaElem(self, terms, N, D)

    # -- conjugation ------------------------------------------------------
    def _rule_minus_one(self, j: int, i: int, N: int, D: int) -> dict:
        """Normal form of g_j c_i g_j^-1 = (word in g_0..g_{j-1}) - 1."""
        key = ("E", j, i, N, D)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        p = self.ring.p
        exps = self.rule(j, i)
        terms = {(0,) * self.d: 1}
        for k, e in enumerate(exps):
            if e.is_exact_int() and e.value == 0:
                continue
            new = {}
            for t, a in terms.items():
                for s in range(0, N + D - weight(t)):
                    cap = _cap(N, D, weight(t) + s)
                    b = e.binomial(s, p, cap)
                    if b:
                        u = list(t)
                        u[k] = s
                        new[tuple(u)] = a * b
            terms = new
        terms[(0,) * self.d] = terms.get((0,) * self.d, 0) - 1
        out = {}
        for t, a in terms.items():
            cap = _cap(N, D, weight(t))
            if cap > 0:
                b = self.ring.from_int(a, cap)
                if not b.is_zero():
                    out[t] = b
        self._cache[key] = out
        return out

    def _phi_monomial(self, j: int, lower: tuple, N: int, D: int) -> dict:
        """phi_j(c^lower) for a monomial in generators before j."""
        key = ("phi", j, lower, N, D)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if not any(lower):
            out = {(0,) * self.d: self.ring.one(N)}
        else:
            last = max(i for i, v in enumerate(lower) if v)
            prev = list(lower)
            prev[last] -= 1
            left = self._phi_monomial(j, tuple(prev), N, D)
            right = self._rule_minus_one(j, last, N, D)
            out = _mul_dicts(self, left, right, N, D)
        self._cache[key] = out
        return out

    def left_c(self, j: int, Z: dict, N: int, D: int) -> dict:
        """c_j * Z for Z in normal form."""
        out: dict = {}
        sigma = self.action.maps[j]
        for k, b in Z.items():
            lower = k[:j] + (0,) * (self.d - j)
            upper = k[j:]
            sb = sigma(b)
            phi = self._phi_monomial(j, lower, N, D)
            bumped = (upper[0] + 1,) + upper[1:]
            for kl, a in phi.items():
                c = sb * a
                head = kl[:j]
                _acc(out, head + upper, c)
                _acc(out, head + bumped, c)
            _acc(out, k, -b)
        return _truncate_dict(out, N, D)


def _cap(N: int, D: int, w: int) -> int:
    return min(N, N + D - w)


def _acc(out: dict, k: tuple, c: BElem):
    prev = out.get(k)
    out[k] = c if prev is None else prev + c


def _truncate_dict(terms: dict, N: int, D: int) -> dict:
    out = {}
    for k, b in terms.items():
        b = b.truncate(_cap(N, D, weight(k)))
        if not b.is_zero():
            out[k] = b
    return out


def left_products(pres: GroupPresentation, y: dict, ns, N: int, D: int) -> dict:
    """{n: c^n * y} for every n in ``ns``, sharing intermediate products."""
    memo: dict = {(0,) * pres.d: y}

    def prod(n: tuple) -> dict:
        hit = memo.get(n)
        if hit is not None:
            return hit
        j = next(i for i, v in enumerate(n) if v)
        prev = list(n)
        prev[j] -= 1
        res = pres.left_c(j, prod(tuple(prev)), N, D)
        memo[n] = res
        return res

    return {n: prod(tuple(n)) for n in ns}


def _mul_dicts(pres: GroupPresentation, x: dict, y: dict, N: int, D: int) -> dict:
    """x * y for normal-form dicts, result modulo J(N, D)."""
    if not x or not y:
        return {}
    order = sorted(x, key=lambda t: (weight(t), t))
    prods = left_products(pres, y, order, N, D)
    out: dict = {}
    for n in order:
        b = x[n]
        for k, c in prods[n].items():
            _acc(out, k, b * c)
    return _truncate_dict(out, N, D)


class IwasawaElem:
    """An element of the truncated (twisted) Iwasawa algebra."""

    __slots__ = ("pres", "terms", "N", "D")

    def __init__(self, pres: GroupPresentation, terms: dict, N: int, D: int):
        self.pres = pres
        self.N = N
        self.D = D
        clean = {}
        for k, b in terms.items():
            k = tuple(k)
            if len(k) != pres.d or min(k) < 0:
                raise ValueError(f"bad multi-index {k}")
            if b.ring != pres.ring:
                raise DescriptorMismatch("coefficient ring differs from presentation ring")
            b = b.truncate(_cap(N, D, weight(k)))
            if not b.is_zero():
                clean[k] = b
        self.terms = clean

    @property
    def ring(self):
        return self.pres.ring

    def coefficient(self, k) -> BElem:
        k = tuple(k)
        b = self.terms.get(k)
        if b is None:
            return self.ring.zero(_cap(self.N, self.D, weight(k)))
        return b

    def _same(self, other):
        if not isinstance(other, IwasawaElem) or other.pres is not self.pres:
            raise PresentationError("elements over different presentations")

    def __add__(self, other):
        self._same(other)
        out = dict(self.terms)
        for k, b in other.terms.items():
            _acc(out, k, b)
        return IwasawaElem(self.pres, out, min(self.N, other.N), min(self.D, other.D))

    def __neg__(self):
        return IwasawaElem(self.pres, {k: -b for k, b in self.terms.items()}, self.N, self.D)

    def __sub__(self, other):
        return self + (-other)

    def min_val(self) -> float:
        return min((b.val() for b in self.terms.values()), default=INF)

    def filtration_degree(self) -> float:
        return min((b.val() + weight(k) for k, b in self.terms.items()), default=INF)

    def __mul__(self, other):
        if isinstance(other, BElem):
            other = self.pres.scalar(other, self.N, self.D)
        self._same(other)
        vx = min(0, self.min_val())
        vy = min(0, other.min_val())
        N = min(self.N + vy, other.N + vx)
        D = min(self.D, other.D)
        # intermediate truncations are absolute and later meet both poles,
        # so the working precision pays for vx + vy up front
        wN = max(self.N, other.N) - vx - vy
        terms = _mul_dicts(self.pres, self.terms, other.terms, wN, D)
        return IwasawaElem(self.pres, terms, N, D)

    def lmul_scalar(self, b: BElem) -> "IwasawaElem":
        N = self.N + min(0, b.val_bound())
        return IwasawaElem(self.pres, {k: b * c for k, c in self.terms.items()}, N, self.D)

    def truncate(self, N: int, D: int) -> "IwasawaElem":
        if N >= self.N and D >= self.D:
            return self
        return IwasawaElem(self.pres, self.terms, min(N, self.N), min(D, self.D))

    def __eq__(self, other):
        if not isinstance(other, IwasawaElem):
            return NotImplemented
        if other.pres is not self.pres:
            return False
        return not (self - other).terms

    __hash__ = None  # type: ignore[assignment]

    def support(self) -> list:
        return sorted(self.terms, key=lambda t: (weight(t), t))

    def visible(self) -> dict:
        """Terms with |k| <= D (the ones known to full precision N)."""
        return {k: b for k, b in self.terms.items() if weight(k) <= self.D}

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "D": self.D,
            "terms": {",".join(map(str, k)): self.terms[k].to_str() for k in self.support()},
        }

    def __repr__(self):
        parts = [f"({self.terms[k].to_str()})*c^{k}" for k in self.support()]
        return f"IwasawaElem[{self.N},{self.D}](" + " + ".join(parts) + ")"


def mul_iwasawa(x: IwasawaElem, y: IwasawaElem) -> IwasawaElem:
    return x * y


def commute_scalar(pres: GroupPresentation, n, a: BElem, N: int, D: int) -> dict:
    """The a_k with c^n * a = sum_{k <= n} a_k c^k."""
    n = tuple(n)
    y = {(0,) * pres.d: a}
    z = _mul_dicts(pres, {n: pres.ring.one(N)}, y, N, D)
    return z


_TOKEN = re.compile(r"\s*(g|c)(\d+)(?:\^\(?([^()\s]+)\)?)?")


def parse_word(text: str, pres: GroupPresentation) -> list:
    """Parse e.g. ``"g2 g1 g2^-1 c1^2"`` into normal_form items (1-based names)."""
    items = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse word at {text[pos:]!r}")
        kind, idx, exp = m.group(1), int(m.group(2)) - 1, m.group(3)
        if not 0 <= idx < pres.d:
            raise ValueError(f"generator index {idx + 1} out of range")
        if kind == "g":
            items.append(("g", idx, exp if exp is not None else 1))
        else:
            items.append(("c", idx, int(exp) if exp is not None else 1))
        pos = m.end()
    return items


def normal_form(pres: GroupPresentation, word, N: int, D: int) -> IwasawaElem:
    """Expand a formal product into the c^n basis.

    ``word`` items are ``("g", i, exponent)``, ``("c", i, power)`` or
    ``("s", belem)``; a string is parsed with :func:`parse_word`.
    """
    if isinstance(word, str):
        word = parse_word(word, pres)
    out = pres.one(N, D)
    for item in word:
        kind = item[0]
        if kind == "g":
            factor = pres.gen_power(item[1], item[2], N, D)
        elif kind == "c":
            n = [0] * pres.d
            n[item[1]] = item[2]
            factor = pres.c(n, N, D)
        elif kind == "s":
            factor = pres.scalar(item[1], N, D)
        else:
            raise ValueError(f"unknown word item {item!r}")
        out = out * factor
    return out


def check_action_relations(pres: GroupPresentation, samples) -> bool:
    """sigma_j sigma_i == sigma_word sigma_j on sample scalars for every rule."""
    act = pres.action
    for j in range(pres.d):
        for i in range(j):
            exps = pres.rule(j, i)
            for y in samples:
                lhs = act.sigma(j, act.sigma(i, y))
                rhs = act.sigma(j, y)
                for k in range(j - 1, -1, -1):
                    rhs = apply_action(act, k, exps[k], rhs)
                if lhs != rhs:
                    return False
    return True
