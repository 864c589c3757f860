"""p-adic integers used as exponents, and binomial coefficients of them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mixchar.kernels import val_p_factorial


class InsufficientPrecision(ValueError):
    """An exponent is not known to enough p-adic digits for the requested cap."""


@dataclass(frozen=True)
class PadicInt:
    """A p-adic integer known modulo p^prec (``prec=None``: exact rational)."""

    value: Fraction
    prec: int | None = None

    @classmethod
    def parse(cls, s, p: int) -> "PadicInt":
        """Accepts ints, Fractions, and strings like ``"5"``, ``"-1/3"``,
        ``"1+p^2"`` or ``"7 mod 2^10"``."""
        if isinstance(s, PadicInt):
            return s
        if isinstance(s, (int, Fraction)):
            return cls.exact(s, p)
        text = str(s).strip()
        prec = None
        if " mod " in text:
            text, modulus = text.split(" mod ")
            base, _, exp = modulus.strip().partition("^")
            if int(base) != p:
                raise ValueError(f"modulus {modulus!r} is not a power of {p}")
            prec = int(exp) if exp else 1
        expr = text.replace("p", f"({p})").replace("^", "**")
        if not set(expr) <= set("0123456789+-*/() "):
            raise ValueError(f"cannot parse p-adic integer {s!r}")
        value = _eval_rational(expr)
        out = cls.exact(value, p)
        if prec is not None:
            out = PadicInt(Fraction(out.residue(p, prec)), prec)
        return out

    @classmethod
    def exact(cls, value, p: int) -> "PadicInt":
        value = Fraction(value)
        if value.denominator % p == 0:
            raise ValueError(f"{value} is not a {p}-adic integer")
        return cls(value, None)

    def residue(self, p: int, k: int) -> int:
        """Representative in [0, p^k)."""
        if k <= 0:
            return 0
        if self.prec is not None and self.prec < k:
            raise InsufficientPrecision(
                f"exponent known mod {p}^{self.prec}, need {p}^{k}"
            )
        m = p**k
        return self.value.numerator * pow(self.value.denominator, -1, m) % m

    def binomial(self, k: int, p: int, cap: int) -> int:
        """binom(self, k) reduced modulo p^cap."""
        if cap <= 0:
            return 0
        if self.prec is None:
            return frac_mod(_binom_fraction(self.value, k), p, cap)
        v = val_p_factorial(p, k)
        m = p ** (cap + v)
        a = self.residue(p, cap + v)
        num = 1
        for i in range(k):
            num = num * (a - i) % m
        unit = 1
        for i in range(2, k + 1):
            unit *= i
        unit //= p**v
        mod = p**cap
        return (num // p**v) * pow(unit, -1, mod) % mod

    def is_exact_int(self) -> bool:
        return self.prec is None and self.value.denominator == 1

    def __str__(self) -> str:
        if self.prec is None:
            return str(self.value)
        return f"{self.value} mod p^{self.prec}"


def _binom_fraction(x: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out = out * (x - i) / (i + 1)
    return out


def frac_mod(q, p: int, cap: int) -> int:
    """A p-integral rational reduced into [0, p^cap)."""
    q = Fraction(q)
    if cap <= 0:
        return 0
    m = p**cap
    if q.denominator % p == 0:
        raise ValueError(f"{q} is not {p}-integral")
    return q.numerator * pow(q.denominator, -1, m) % m


def _eval_rational(expr: str) -> Fraction:
    # tiny recursive-descent evaluator over Fractions: + - * / ** and parens
    tokens = []
    i = 0
    while i < len(expr):
        c = expr[i]
        if c.isspace():
            i += 1
        elif c.isdigit():
            j = i
            while j < len(expr) and expr[j].isdigit():
                j += 1
            tokens.append(int(expr[i:j]))
            i = j
        elif expr.startswith("**", i):
            tokens.append("**")
            i += 2
        else:
            tokens.append(c)
            i += 1
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        pos += 1
        return tokens[pos - 1]

    def expr_():
        v = term()
        while peek() in ("+", "-"):
            v = v + term() if take() == "+" else v - term()
        return v

    def term():
        v = unary()
        while peek() in ("*", "/"):
            v = v * unary() if take() == "*" else v / unary()
        return v

    def unary():
        if peek() == "-":
            take()
            return -unary()
        if peek() == "+":
            take()
            return unary()
        return power()

    def power():
        base = atom()
        if peek() == "**":
            take()
            e = unary()
            if e.denominator != 1:
                raise ValueError("non-integer exponent")
            return base ** int(e)
        return base

    def atom():
        t = take()
        if t == "(":
            v = expr_()
            if take() != ")":
                raise ValueError("unbalanced parentheses")
            return v
        if isinstance(t, int):
            return Fraction(t)
        raise ValueError(f"unexpected token {t!r}")

    value = expr_()
    if pos != len(tokens):
        raise ValueError(f"trailing input in {expr!r}")
    return value
