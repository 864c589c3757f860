"""Embedded invariant suite run by ``mixchar selftest`` at small caps."""

from __future__ import annotations

import random

from mixchar import lemmas
from mixchar.binomial import lambda_character, lambda_series, mahler_transform
from mixchar.coeffrings import O1, LaurentFp, Qp
from mixchar.complexes import kohlhaase, lazard_serre, random_chain
from mixchar.distributions import bch_table
from mixchar.iwasawa import GroupPresentation


def _valuation_lemmas() -> bool:
    checks = [lemmas.check_lipschitz(p, h, 12) for p in (2, 3) for h in (0, 1)]
    checks += [lemmas.check_u_steps(p, 1, 500) for p in (2, 3)]
    checks += [lemmas.check_sandwich(p, 0, 1, 2, 200) for p in (2, 3)]
    checks.append(lemmas.check_floor(5, 5, 300))
    checks += [lemmas.check_legendre(p, 200) for p in (2, 3)]
    return all(c.passed for c in checks)


def _character_property() -> bool:
    rng = random.Random(7)
    N = 6
    for ring in (Qp(3), LaurentFp(2), O1(2)):
        t = ring.uniformizer(N)
        for _ in range(10):
            x, y = rng.randrange(50), rng.randrange(50)
            lhs = lambda_character(ring, t, x + y, N)
            rhs = lambda_character(ring, t, x, N) * lambda_character(ring, t, y, N)
            if not lhs.same_at(rhs, N):
                return False
    return True


def _mahler_roundtrip() -> bool:
    ring = LaurentFp(3)
    N, D = 6, 8
    t = ring.uniformizer(N)
    values = [lambda_character(ring, t, x, N) for x in range(D + 1)]
    series = mahler_transform(values)
    expected = lambda_series(ring, t, N, D)
    return all(
        series.coefficient((n,), N).same_at(expected.coefficient((n,), N), N)
        for n in range(D + 1)
    )


def _bch_unit() -> bool:
    for p in (2, 3):
        table = bch_table(GroupPresentation.example_group(Qp(p)), 0, 3)
        f0 = table.F((0, 0))
        if list(f0) != [((0, 0), (0, 0))] or f0[((0, 0), (0, 0))].to_fraction() != 1:
            return False
        if table.failures():
            return False
    return True


def _homotopy_identities() -> bool:
    rng = random.Random(3)
    for ring in (Qp(2), LaurentFp(2), O1(2)):
        for d in (1, 2):
            pres = GroupPresentation.abelian(ring, d)
            for cx in (lazard_serre(pres), kohlhaase(pres, 1)):
                for degree in range(d + 1):
                    for _ in range(4):
                        dd, hom = cx.check_identities(random_chain(cx, degree, 5, 5, rng), degree)
                        if not (dd and hom):
                            return False
                if cx.homotopy_poles(6) < -cx.pole_budget:
                    return False
    return True


CHECKS = [
    ("valuation lemmas", _valuation_lemmas),
    ("lambda character property", _character_property),
    ("mahler roundtrip", _mahler_roundtrip),
    ("bch unit and certificates", _bch_unit),
    ("homotopy identities", _homotopy_identities),
]


def run_selftest(inject_fault: bool = False) -> list:
    """[(name, passed)]; ``inject_fault`` flips one check to exercise failure paths."""
    results = []
    for name, fn in CHECKS:
        try:
            ok = bool(fn())
        except Exception:  # a crashing check is a failing check
            ok = False
        results.append((name, ok))
    if inject_fault:
        results.append(("injected fault", False))
    return results
