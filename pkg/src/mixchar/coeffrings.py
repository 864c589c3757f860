"""Truncated arithmetic in the supported Banach pairs (B, B+).

Three kinds are supported, all of slope >= 1 and residually of finite type:

``Qp``
    B = Q_p, uniformizer p.
``LaurentFp``
    B = F_p((T)), uniformizer T.
``O1``
    B = Z_p[[X]]<p/X>[1/X], uniformizer X, with val(X) = val(p) = 1.
    An element is a finite sum  sum_k a_k X^k  with a_k in Z_p and
    val = min_k (k + val_p(a_k)).

Every element carries an absolute cap: it is known modulo {val >= cap}.
Sums keep the smaller cap; products keep min(cap_x + val_y, cap_y + val_x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from mixchar.kernels import conv_trunc_mod
from mixchar.padic import PadicInt, frac_mod
from mixchar.valuations import is_prime, val_p

INF = math.inf

KINDS = ("Qp", "LaurentFp", "O1")


class DescriptorMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RingDescriptor:
    kind: str
    p: int
    var: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            if self.kind.startswith("O") or self.kind == "OLambda":
                raise ValueError(
                    "only the slope-1 pseudorigid ring O1 is supported"
                )
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if not self.var:
            object.__setattr__(
                self, "var", {"Qp": "p", "LaurentFp": "T", "O1": "X"}[self.kind]
            )

    # -- constructors -------------------------------------------------
    def zero(self, cap: int) -> "BElem":
        return self.from_int(0, cap)

    def one(self, cap: int) -> "BElem":
        return self.from_int(1, cap)

    def from_int(self, z: int, cap: int) -> "BElem":
        p = self.p
        if self.kind == "Qp":
            return QpElem.make(p, 0, z, cap)
        if self.kind == "LaurentFp":
            return LaurentElem.make(p, 0, [z % p], cap, self.var)
        return O1Elem.make(p, {0: z}, cap, self.var)

    def from_fraction(self, q, cap: int) -> "BElem":
        q = Fraction(q)
        p = self.p
        if self.kind == "Qp":
            num, den = q.numerator, q.denominator
            e = 0
            while den % p == 0:
                den //= p
                e -= 1
            if cap - e <= 0:
                return self.zero(cap)
            return QpElem.make(p, e, num * pow(den, -1, p ** (cap - e)), cap)
        if q.denominator % p == 0:
            raise ValueError(f"{q} is not p-integral; p is not invertible in {self.kind}")
        if self.kind == "LaurentFp":
            return self.from_int(frac_mod(q, p, 1), cap)
        return O1Elem.make(p, {0: frac_mod(q, p, max(cap, 1))}, cap, self.var)

    def from_padic(self, x: PadicInt, cap: int) -> "BElem":
        if cap <= 0:
            return self.zero(cap)
        if self.kind == "LaurentFp":
            return self.from_int(x.residue(self.p, 1), cap)
        return self.from_int(x.residue(self.p, cap), cap)

    def uniformizer(self, cap: int) -> "BElem":
        return self.monomial(1, cap)

    def monomial(self, k: int, cap: int) -> "BElem":
        """varpi^k (a unit times it for k < 0 in Qp is just p^k)."""
        p = self.p
        if self.kind == "Qp":
            return QpElem.make(p, k, 1, cap)
        if self.kind == "LaurentFp":
            return LaurentElem.make(p, k, [1], cap, self.var)
        return O1Elem.make(p, {k: 1}, cap, self.var)

    def laurent(self, coeffs: dict, cap: int) -> "BElem":
        """sum_k c_k varpi^k for LaurentFp / O1 (integer c_k)."""
        if self.kind == "LaurentFp":
            if not coeffs:
                return self.zero(cap)
            e = min(coeffs)
            top = max(coeffs)
            return LaurentElem.make(
                self.p, e, [coeffs.get(i, 0) % self.p for i in range(e, top + 1)],
                cap, self.var,
            )
        if self.kind == "O1":
            return O1Elem.make(self.p, dict(coeffs), cap, self.var)
        out = self.zero(cap)
        for k, c in coeffs.items():
            out = out + QpElem.make(self.p, k, c, cap)
        return out

    def val_of_p(self) -> float:
        return INF if self.kind == "LaurentFp" else 1

    def __str__(self) -> str:
        if self.kind == "Qp":
            return f"Q_{self.p}"
        if self.kind == "LaurentFp":
            return f"F_{self.p}(({self.var}))"
        return f"Z_{self.p}[[{self.var}]]<{self.p}/{self.var}>[1/{self.var}]"


def Qp(p: int) -> RingDescriptor:
    return RingDescriptor("Qp", p)


def LaurentFp(p: int, var: str = "T") -> RingDescriptor:
    return RingDescriptor("LaurentFp", p, var)


def O1(p: int, var: str = "X") -> RingDescriptor:
    return RingDescriptor("O1", p, var)


def slope_at_least(desc: RingDescriptor, m: int, n: int = 1) -> bool:
    """Whether |p| <= |varpi|^(m/n), i.e. p^n / varpi^m lies in B+."""
    if m < 1 or n < 1 or math.gcd(m, n) != 1:
        raise ValueError("slope must be m/n with m, n >= 1 coprime")
    return desc.val_of_p() * n >= m


def _digits(u: int, p: int, length: int) -> str:
    out = []
    for _ in range(length):
        u, r = divmod(u, p)
        out.append(str(r))
    return ",".join(out)


class BElem:
    """Common interface; concrete classes are immutable."""

    ring: RingDescriptor
    cap: int

    def val(self) -> float:
        raise NotImplementedError

    def val_bound(self) -> int:
        """val if nonzero at this precision, else the cap."""
        v = self.val()
        return self.cap if v == INF else v

    def is_zero(self) -> bool:
        return self.val() == INF

    def _check(self, other):
        if not isinstance(other, BElem) or other.ring != self.ring:
            raise DescriptorMismatch(f"{self.ring} vs {getattr(other, 'ring', other)}")

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, BElem):
            return NotImplemented
        if other.ring != self.ring:
            return False
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def same_at(self, other, cap: int) -> bool:
        return (self - other).truncate(cap).is_zero()

    def pow(self, k: int) -> "BElem":
        if k < 0:
            raise ValueError("negative power")
        out = self.ring.one(max(self.cap, self.cap + (k - 1) * self.val_bound()))
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __repr__(self):
        return f"BElem({self.to_str()})"


class QpElem(BElem):
    """p^e * u with u a unit modulo p^(cap - e); zero has u = 0."""

    __slots__ = ("ring", "e", "u", "cap")

    _rings: dict = {}

    @classmethod
    def make(cls, p: int, e: int, u: int, cap: int) -> "QpElem":
        self = object.__new__(cls)
        ring = cls._rings.get(p)
        if ring is None:
            ring = cls._rings[p] = RingDescriptor("Qp", p)
        self.ring = ring
        self.cap = cap
        if cap - e > 0:
            u %= p ** (cap - e)
        else:
            u = 0
        if u == 0:
            self.e, self.u = cap, 0
            return self
        while u % p == 0:
            u //= p
            e += 1
        self.e, self.u = e, u
        return self

    def val(self):
        return INF if self.u == 0 else self.e

    def truncate(self, cap: int) -> "QpElem":
        if cap >= self.cap:
            return self
        return QpElem.make(self.ring.p, self.e, self.u, cap)

    def shift(self, k: int) -> "QpElem":
        return QpElem.make(self.ring.p, self.e + k, self.u, self.cap + k)

    def __neg__(self):
        return QpElem.make(self.ring.p, self.e, -self.u, self.cap)

    def __add__(self, other):
        self._check(other)
        p = self.ring.p
        cap = min(self.cap, other.cap)
        if other.u == 0:
            return self.truncate(cap)
        if self.u == 0:
            return other.truncate(cap)
        e = min(self.e, other.e)
        u = self.u * p ** (self.e - e) + other.u * p ** (other.e - e)
        return QpElem.make(p, e, u, cap)

    def __mul__(self, other):
        self._check(other)
        cap = min(self.cap + other.val_bound(), other.cap + self.val_bound())
        return QpElem.make(self.ring.p, self.e + other.e, self.u * other.u, cap)

    def to_str(self) -> str:
        p = self.ring.p
        if self.u == 0:
            return f"0 mod {p}^{self.cap}"
        return f"{p}^{self.e} * ({_digits(self.u, p, self.cap - self.e)}) mod {p}^{self.cap}"

    def to_fraction(self) -> Fraction:
        return Fraction(self.u) * Fraction(self.ring.p) ** self.e


class LaurentElem(BElem):
    """T^e * (u_0 + u_1 T + ...) over F_p with u_0 != 0, known mod T^cap."""

    __slots__ = ("ring", "e", "u", "cap")

    _rings: dict = {}

    @classmethod
    def make(cls, p: int, e: int, u, cap: int, var: str = "T") -> "LaurentElem":
        self = object.__new__(cls)
        key = (p, var)
        ring = cls._rings.get(key)
        if ring is None:
            ring = cls._rings[key] = RingDescriptor("LaurentFp", p, var)
        self.ring = ring
        self.cap = cap
        n = cap - e
        u = [c % p for c in u[: max(n, 0)]]
        i = 0
        while i < len(u) and u[i] == 0:
            i += 1
        if i == len(u):
            self.e, self.u = cap, ()
            return self
        u = u[i:]
        e += i
        # pad so that u always holds cap - e digits
        u.extend([0] * (cap - e - len(u)))
        self.e, self.u = e, tuple(u)
        return self

    def _new(self, e, u, cap):
        return LaurentElem.make(self.ring.p, e, u, cap, self.ring.var)

    def val(self):
        return INF if not self.u else self.e

    def coeff(self, k: int) -> int:
        i = k - self.e
        if 0 <= i < len(self.u):
            return self.u[i]
        return 0

    def coeffs(self) -> dict:
        return {self.e + i: c for i, c in enumerate(self.u) if c}

    def truncate(self, cap: int):
        if cap >= self.cap:
            return self
        return self._new(self.e, list(self.u), cap)

    def shift(self, k: int):
        return self._new(self.e + k, list(self.u), self.cap + k)

    def __neg__(self):
        return self._new(self.e, [-c for c in self.u], self.cap)

    def __add__(self, other):
        self._check(other)
        cap = min(self.cap, other.cap)
        if not other.u:
            return self.truncate(cap)
        if not self.u:
            return other.truncate(cap)
        e = min(self.e, other.e)
        n = cap - e
        if n <= 0:
            return self._new(cap, [], cap)
        out = [0] * n
        for src in (self, other):
            off = src.e - e
            for i, c in enumerate(src.u[: max(n - off, 0)]):
                out[off + i] += c
        return self._new(e, out, cap)

    def __mul__(self, other):
        self._check(other)
        cap = min(self.cap + other.val_bound(), other.cap + self.val_bound())
        if not self.u or not other.u:
            return self._new(cap, [], cap)
        e = self.e + other.e
        n = cap - e
        if n <= 0:
            return self._new(cap, [], cap)
        return self._new(e, conv_trunc_mod(list(self.u), list(other.u), n, self.ring.p), cap)

    def to_str(self) -> str:
        var = self.ring.var
        if not self.u:
            return f"0 mod {var}^{self.cap}"
        return f"{var}^{self.e} * ({','.join(map(str, self.u))}) mod {var}^{self.cap}"


class O1Elem(BElem):
    """sum_k a_k X^k with a_k in Z_p known mod p^(cap - k)."""

    __slots__ = ("ring", "a", "cap", "_val")

    _rings: dict = {}

    @classmethod
    def make(cls, p: int, coeffs: dict, cap: int, var: str = "X") -> "O1Elem":
        self = object.__new__(cls)
        key = (p, var)
        ring = cls._rings.get(key)
        if ring is None:
            ring = cls._rings[key] = RingDescriptor("O1", p, var)
        self.ring = ring
        self.cap = cap
        a = {}
        for k, c in coeffs.items():
            if k >= cap:
                continue
            c %= p ** (cap - k)
            if c:
                a[k] = c
        self.a = a
        self._val = None
        return self

    def _new(self, coeffs, cap):
        return O1Elem.make(self.ring.p, coeffs, cap, self.ring.var)

    def val(self):
        if self._val is None:
            p = self.ring.p
            self._val = min((k + val_p(p, c) for k, c in self.a.items()), default=INF)
        return self._val

    def coeffs(self) -> dict:
        return dict(self.a)

    def truncate(self, cap: int):
        if cap >= self.cap:
            return self
        return self._new(self.a, cap)

    def shift(self, k: int):
        return self._new({i + k: c for i, c in self.a.items()}, self.cap + k)

    def __neg__(self):
        return self._new({k: -c for k, c in self.a.items()}, self.cap)

    def __add__(self, other):
        self._check(other)
        out = dict(self.a)
        for k, c in other.a.items():
            out[k] = out.get(k, 0) + c
        return self._new(out, min(self.cap, other.cap))

    def __mul__(self, other):
        self._check(other)
        cap = min(self.cap + other.val_bound(), other.cap + self.val_bound())
        out: dict = {}
        for i, x in self.a.items():
            for j, y in other.a.items():
                k = i + j
                if k < cap:
                    out[k] = out.get(k, 0) + x * y
        return self._new(out, cap)

    def to_str(self) -> str:
        p, var = self.ring.p, self.ring.var
        if not self.a:
            return f"0 mod {var}^{self.cap}"
        terms = []
        for k in sorted(self.a):
            c = self.a[k]
            v = val_p(p, c)
            terms.append(
                f"{var}^{k}*{p}^{v}*({_digits(c // p**v, p, self.cap - k - v)})"
            )
        return " + ".join(terms) + f" mod {var}^{self.cap}"

    def reduce_mod_p(self) -> LaurentElem:
        """Coefficientwise reduction to F_p((T)); defined on val >= 0 elements."""
        if self.val() < 0:
            raise ValueError("reduction mod p needs val >= 0")
        p = self.ring.p
        coeffs = {k: c % p for k, c in self.a.items() if k >= 0}
        lo = 0
        return LaurentElem.make(
            p, lo, [coeffs.get(i, 0) for i in range(lo, self.cap)], self.cap, self.ring.var
        )


# ---------------------------------------------------------------------------
# semilinear actions


class ActionError(ValueError):
    pass


@dataclass(frozen=True)
class Automorphism:
    """A continuous ring endomorphism of B given by the image of the uniformizer.

    kind is ``trivial``, ``cyclotomic`` (T -> (1+T)^gamma - 1) or ``image``.
    """

    ring: RingDescriptor
    kind: str = "trivial"
    gamma: PadicInt | None = None
    image: BElem | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def trivial(cls, ring):
        return cls(ring)

    @classmethod
    def cyclotomic(cls, ring, gamma):
        if ring.kind == "Qp":
            raise ActionError("Q_p carries only the trivial action")
        gamma = PadicInt.parse(gamma, ring.p)
        if gamma.residue(ring.p, 1) != 1:
            raise ActionError("cyclotomic parameter must lie in 1 + pZ_p")
        return cls(ring, "cyclotomic", gamma=gamma)

    @classmethod
    def from_image(cls, ring, image: BElem):
        if ring.kind == "Qp":
            raise ActionError("Q_p carries only the trivial action")
        if image.ring != ring:
            raise DescriptorMismatch("image lives in a different ring")
        return cls(ring, "image", image=image)

    @property
    def is_trivial(self) -> bool:
        return self.kind == "trivial"

    def is_isometric(self) -> bool:
        """Uniformizer goes to uniformizer * unit power series."""
        if self.kind != "image":
            return True
        img = self.image
        if img.val() != 1:
            return False
        if self.ring.kind == "LaurentFp":
            return True
        a = img.coeffs()
        return min(a) >= 1 and a.get(1, 0) % self.ring.p != 0

    def _unit_series(self, n: int, modexp: int) -> list:
        """First n coefficients of U = sigma(varpi)/varpi modulo p^modexp."""
        key = ("U", n, modexp)
        if key in self._cache:
            return self._cache[key]
        p = self.ring.p
        if self.kind == "cyclotomic":
            out = [self.gamma.binomial(k + 1, p, modexp) for k in range(n)]
        else:
            img = self.image
            need = n + 1 if self.ring.kind == "LaurentFp" else n + modexp
            if img.cap < need:
                raise ActionError("image of the uniformizer not known to enough precision")
            c = img.coeffs()
            out = [c.get(k + 1, 0) % p**modexp for k in range(n)]
        self._cache[key] = out
        return out

    def _series_pow(self, k: int, n: int, modexp: int) -> list:
        """U^k (k may be negative) truncated to n terms, modulo p^modexp."""
        key = ("Upow", k, n, modexp)
        if key in self._cache:
            return self._cache[key]
        m = self.ring.p**modexp
        U = self._unit_series(n, modexp)
        if k < 0:
            U = _series_inverse(U, n, m)
            k = -k
        out = [1 % m] + [0] * (n - 1)
        base = U
        while k:
            if k & 1:
                out = conv_trunc_mod(out, base, n, m)
            k >>= 1
            if k:
                base = conv_trunc_mod(base, base, n, m)
        self._cache[key] = out
        return out

    def __call__(self, x: BElem) -> BElem:
        if self.kind == "trivial":
            return x
        if x.ring != self.ring:
            raise DescriptorMismatch("action applied to an element of another ring")
        if not self.is_isometric():
            return self._apply_generic(x)
        if x.is_zero():
            return x
        p = self.ring.p
        if self.ring.kind == "LaurentFp":
            # sigma(T^e P(T)) = T^e U^e P(T U)
            e, n = x.e, x.cap - x.e
            U = self._unit_series(n, 1)
            sT = [0] + U[: n - 1]
            acc = [0] * n
            for c in reversed(x.u):
                acc = conv_trunc_mod(acc, sT, n, p)
                acc[0] = (acc[0] + c) % p
            out = conv_trunc_mod(self._series_pow(e, n, 1), acc, n, p)
            return x._new(e, out, x.cap)
        # O1: sigma(sum a_k X^k) = X^kmin U^kmin P(X U)
        kmin = min(x.a)
        n = x.cap - kmin
        m = p**n
        U = self._unit_series(n, n)
        sX = [0] + U[: n - 1]
        acc = [0] * n
        for i in range(n - 1, -1, -1):
            acc = conv_trunc_mod(acc, sX, n, m)
            acc[0] = (acc[0] + x.a.get(kmin + i, 0)) % m
        out = conv_trunc_mod(self._series_pow(kmin, n, n), acc, n, m)
        return x._new({kmin + i: c for i, c in enumerate(out)}, x.cap)

    def _apply_generic(self, x: BElem) -> BElem:
        """Substitution for non-isometric images; only on power series."""
        img = self.image
        coeffs = x.coeffs()
        if coeffs and min(coeffs) < 0:
            raise ActionError("image is not invertible on negative powers")
        cap = x.cap
        out = self.ring.zero(cap)
        power = self.ring.one(cap)
        for k in range(0, max(coeffs, default=-1) + 1):
            c = coeffs.get(k, 0)
            if c:
                out = out + self.ring.from_int(c, cap) * power
            power = power * img
        return out.truncate(cap)


def _series_inverse(U: list, n: int, m: int) -> list:
    inv0 = pow(U[0], -1, m)
    out = [inv0] + [0] * (n - 1)
    for k in range(1, n):
        s = 0
        for j in range(1, min(k, len(U) - 1) + 1):
            s += U[j] * out[k - j]
        out[k] = -s * inv0 % m
    return out


@dataclass(frozen=True)
class SemilinearAction:
    """Per-generator automorphisms of B (one per group generator)."""

    ring: RingDescriptor
    maps: tuple

    @classmethod
    def trivial(cls, ring, d: int) -> "SemilinearAction":
        return cls(ring, tuple(Automorphism(ring) for _ in range(d)))

    @property
    def d(self) -> int:
        return len(self.maps)

    @property
    def is_trivial(self) -> bool:
        return all(m.is_trivial for m in self.maps)

    def sigma(self, i: int, x: BElem) -> BElem:
        return self.maps[i](x)


def apply_action(action: SemilinearAction, i: int, x, elem: BElem) -> BElem:
    """g_i^x(elem) through sum_n binom(x, n) (g_i - 1)^n (elem)."""
    ring = elem.ring
    if ring != action.ring:
        raise DescriptorMismatch("action and element rings differ")
    sigma = action.maps[i]
    if sigma.is_trivial or elem.is_zero():
        return elem
    x = PadicInt.parse(x, ring.p)
    cap = elem.cap
    out = elem
    term = elem
    n = 0
    while True:
        n += 1
        term = sigma(term) - term
        if term.is_zero():
            break
        if n > cap - elem.val() + 1:
            raise ActionError("(g-1)^n does not converge; action not locally analytic")
        out = out + ring.from_int(x.binomial(n, ring.p, cap - term.val()), cap) * term
    return out.truncate(cap)


@dataclass
class AnalyticityReport:
    passed: bool
    checked: int
    first_violation: tuple | None = None

    def as_dict(self):
        return {
            "passed": self.passed,
            "checked": self.checked,
            "first_violation": None
            if self.first_violation is None
            else {
                "generator": self.first_violation[0],
                "n": self.first_violation[1],
                "monomial": self.first_violation[2],
            },
        }


def spanning_monomials(ring: RingDescriptor, n: int, N: int):
    """(label, element) pairs spanning varpi^n B+ modulo varpi^N."""
    if ring.kind == "Qp":
        for k in range(n, N):
            yield f"{ring.p}^{k}", ring.monomial(k, N)
    elif ring.kind == "LaurentFp":
        for k in range(n, N):
            yield f"{ring.var}^{k}", ring.monomial(k, N)
    else:
        # X^(n+a) (p/X)^b, b bounded by N at desk scale
        for a in range(n, N):
            for b in range(0, N + 1):
                yield (
                    f"{ring.var}^{a}*({ring.p}/{ring.var})^{b}",
                    O1Elem.make(ring.p, {a - b: ring.p**b}, N, ring.var),
                )


def check_local_analyticity(action: SemilinearAction, N: int) -> AnalyticityReport:
    """(g_i - 1)(varpi^n B+) within varpi^(n+1) B+ for 0 <= n < N."""
    checked = 0
    for i, sigma in enumerate(action.maps):
        if sigma.is_trivial:
            continue
        for n in range(N):
            for label, mono in spanning_monomials(action.ring, n, N):
                checked += 1
                diff = sigma(mono) - mono
                if diff.val() < n + 1 and diff.val() < N:
                    return AnalyticityReport(False, checked, (i, n, label))
    return AnalyticityReport(True, checked)


def check_automorphism(action: SemilinearAction, samples: Iterable[tuple]) -> bool:
    """Multiplicativity of each generator map on sampled pairs."""
    for sigma in action.maps:
        for x, y in samples:
            if sigma(x * y) != sigma(x) * sigma(y):
                return False
    return True
