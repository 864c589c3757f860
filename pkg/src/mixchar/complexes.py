"""Koszul-type resolutions of the trivial module and group cohomology at truncation.

For an abelian presentation (or d = 1) the Lazard-Serre complex is the
Koszul complex on x_i = c_i:

    C_j = A <e_S : |S| = j>,   d(a e_S) = sum_t (-1)^pos(t) a c_t e_{S - t},

followed by the augmentation  sum b_n c^n -> b_0.  Right multiplication by
c_t shifts the multi-index, so the differentials are exact and lose no
precision.  The B+-linear contracting homotopy sends b c^n e_S to

    b c^(n - 1_i) e_({i} + S)   if i = min{i : n_i > 0 or i in S} is not in S,
    0                           otherwise,

and s_{-1} is the unit section b -> b.  The Kohlhaase complex has the same
differentials with D_{h-an} coefficients; in the unit-ball basis
varpi^(-v_h(n)) c^n its homotopy has entries of valuation
v_h(n - 1_i) - v_h(n) >= -1.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

from mixchar.coeffrings import INF, BElem, spanning_monomials
from mixchar.distributions import ModuleError, apply_generator, check_module
from mixchar.iwasawa import GroupPresentation, IwasawaElem, PresentationError
from mixchar.valuations import multi_indices, v_lower, weight


class UnsupportedPresentation(PresentationError):
    pass


def _subsets(d: int, j: int) -> list:
    return list(itertools.combinations(range(d), j))


def _add_chain(out: dict, key, b: BElem):
    prev = out.get(key)
    b = b if prev is None else prev + b
    if b.is_zero():
        out.pop(key, None)
    else:
        out[key] = b


@dataclass(frozen=True)
class ChainComplex:
    """Koszul-type complex C_d -> ... -> C_0 -> B+ over a presentation.

    Chains in degree j are dicts {(n, S): b} meaning sum b c^n e_S with
    S a sorted tuple of size j.
    """

    pres: GroupPresentation
    kind: str = "iwasawa"  # or "distribution"
    h: int = 0
    pole_budget: int = 0

    def __post_init__(self):
        if self.kind not in ("iwasawa", "distribution"):
            raise ValueError(f"unknown coefficient algebra {self.kind!r}")
        if self.pres.d > 1 and not self.pres.is_abelian:
            raise UnsupportedPresentation(
                "nonabelian presentations with d >= 2 are not supported"
            )
        if self.pres.d > 3:
            raise UnsupportedPresentation("d <= 3 is supported")

    @property
    def d(self) -> int:
        return self.pres.d

    @property
    def ranks(self) -> list:
        """binom(d, j) for j = d .. 0, then the augmentation target."""
        return [math.comb(self.d, j) for j in range(self.d, -1, -1)] + [1]

    def basis(self, j: int) -> list:
        return _subsets(self.d, j)

    # -- maps -------------------------------------------------------------
    def boundary(self, chain: dict) -> dict:
        out: dict = {}
        for (n, S), b in chain.items():
            for pos, t in enumerate(S):
                m = list(n)
                m[t] += 1
                rest = S[:pos] + S[pos + 1:]
                _add_chain(out, (tuple(m), rest), -b if pos % 2 else b)
        return out

    def homotopy(self, chain: dict) -> dict:
        out: dict = {}
        for (n, S), b in chain.items():
            i = next((k for k in range(self.d) if n[k] > 0 or k in S), None)
            if i is None or i in S:
                continue
            m = list(n)
            m[i] -= 1
            _add_chain(out, (tuple(m), tuple(sorted(S + (i,)))), b)
        return out

    def augment(self, chain: dict):
        """epsilon on degree-0 chains: the coefficient of c^0."""
        zero = (0,) * self.d
        return chain.get((zero, ()))

    def section(self, b: BElem) -> dict:
        return {} if b is None or b.is_zero() else {((0,) * self.d, ()): b}

    def differential_matrix(self, j: int, N: int, D: int) -> list:
        """Rows e_T (|T| = j-1), columns e_S (|S| = j), entries in the algebra."""
        ring = self.pres.ring
        rows = self.basis(j - 1)
        cols = self.basis(j)
        mat = []
        for T in rows:
            row = []
            for S in cols:
                entry = self.pres.zero(N, D)
                for pos, t in enumerate(S):
                    if S[:pos] + S[pos + 1:] == T:
                        unit = [0] * self.d
                        unit[t] = 1
                        sign = ring.from_int(-1 if pos % 2 else 1, N)
                        entry = self.pres.c(unit, N, D, sign)
                row.append(entry)
            mat.append(row)
        return mat

    # -- checks -----------------------------------------------------------
    def check_identities(self, chain: dict, degree: int) -> tuple:
        """(d d x == 0, d s x + s d x == x - section(eps(x)))."""
        dd = self.boundary(self.boundary(chain)) if degree >= 1 else {}
        lhs: dict = {}
        for key, b in self.boundary(self.homotopy(chain)).items():
            _add_chain(lhs, key, b)
        if degree >= 1:
            for key, b in self.homotopy(self.boundary(chain)).items():
                _add_chain(lhs, key, b)
        else:
            for key, b in self.section(self.augment(chain)).items():
                _add_chain(lhs, key, b)
        diff = dict(lhs)
        for key, b in chain.items():
            _add_chain(diff, key, -b)
        return not dd, not diff

    def homotopy_poles(self, D: int) -> int:
        """min val of homotopy entries in unit-ball coordinates (>= -pole_budget)."""
        p = self.pres.ring.p
        worst = 0
        for j in range(self.d):
            for S in self.basis(j):
                for n in multi_indices(self.d, D):
                    i = next((k for k in range(self.d) if n[k] > 0 or k in S), None)
                    if i is None or i in S:
                        continue
                    m = list(n)
                    m[i] -= 1
                    if self.kind == "distribution":
                        v = v_lower(p, self.h, m) - v_lower(p, self.h, n)
                    else:
                        v = 0
                    worst = min(worst, v)
        return worst

    def differential_poles(self, D: int) -> int:
        """min val of differential entries in unit-ball coordinates (should be 0)."""
        if self.kind != "distribution":
            return 0
        p = self.pres.ring.p
        worst = 0
        for n in multi_indices(self.d, D):
            for t in range(self.d):
                m = list(n)
                m[t] += 1
                worst = min(worst, v_lower(p, self.h, m) - v_lower(p, self.h, n))
        return worst


def lazard_serre(pres: GroupPresentation) -> ChainComplex:
    return ChainComplex(pres, "iwasawa", 0, 0)


def kohlhaase(pres: GroupPresentation, h: int) -> ChainComplex:
    return ChainComplex(pres, "distribution", h, 1)


def random_chain(cx: ChainComplex, degree: int, N: int, D: int, rng: random.Random,
                 terms: int = 6) -> dict:
    """A random chain; in the distribution case coefficients carry the allowed poles."""
    ring = cx.pres.ring
    p = ring.p
    out: dict = {}
    idx = list(multi_indices(cx.d, D))
    subsets = cx.basis(degree)
    for _ in range(terms):
        n = rng.choice(idx)
        S = rng.choice(subsets)
        b = _random_belem(ring, N, rng)
        if cx.kind == "distribution":
            b = b.shift(-v_lower(p, cx.h, n))
        _add_chain(out, (n, S), b)
    return out


def _random_belem(ring, N: int, rng: random.Random) -> BElem:
    p = ring.p
    if ring.kind == "Qp":
        return ring.from_int(rng.randrange(p**N), N)
    if ring.kind == "LaurentFp":
        return ring.laurent({k: rng.randrange(p) for k in range(N)}, N)
    coeffs = {}
    for k in range(-2, N):
        coeffs[k] = rng.randrange(p ** max(N - k, 1)) * p ** max(0, -k)
    return ring.laurent(coeffs, N)


@dataclass
class DivisionReport:
    checked: int = 0
    max_drop: float = 0
    strict: int = 0
    first_failure: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.first_failure is None

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "max_drop": self.max_drop,
            "strict_cases": self.strict,
            "first_failure": None if self.first_failure is None else list(map(str, self.first_failure)),
        }


def _filtration(chain: dict) -> float:
    return min((b.val() + weight(n) for (n, _), b in chain.items()), default=INF)


def verify_homotopy_division(cx: ChainComplex, N: int, D: int) -> DivisionReport:
    """s maps I^f C into I^(f-1) C for spanning elements varpi^a c^n e_S, a + |n| = f <= N."""
    if cx.kind != "iwasawa":
        raise ValueError("filtration division is stated for Iwasawa coefficients")
    ring = cx.pres.ring
    rep = DivisionReport()
    for j in range(cx.d):
        for S in cx.basis(j):
            for n in multi_indices(cx.d, min(D, N)):
                for a in range(0, N - weight(n) + 1):
                    for label, mono in spanning_monomials(ring, a, a + 1):
                        mono = mono.truncate(N + 1)
                        if mono.val() != a:
                            continue
                        f_in = a + weight(n)
                        out = cx.homotopy({(n, S): mono})
                        f_out = _filtration(out)
                        rep.checked += 1
                        drop = f_in - f_out
                        if f_out == INF or drop < 1:
                            rep.strict += 1
                        elif drop > rep.max_drop:
                            rep.max_drop = drop
                        if f_out < f_in - 1 and rep.first_failure is None:
                            rep.first_failure = (n, S, label, f_in, f_out)
    return rep


def exactness_check(cx: ChainComplex, degree: int, N: int, D: int, samples: int,
                    seed: int = 0) -> bool:
    """Every sampled boundary z = d(x) satisfies z = d(s z) (no homology in degree >= 1)."""
    rng = random.Random(seed)
    for _ in range(samples):
        x = random_chain(cx, degree + 1, N, D, rng)
        z = cx.boundary(x)
        back = cx.boundary(cx.homotopy(z))
        diff = dict(back)
        for key, b in z.items():
            _add_chain(diff, key, -b)
        if diff:
            return False
    return True


# ---------------------------------------------------------------------------
# cohomology of a finite free module, truncated mod varpi^N


def _smith(M: list, rows: int, cols: int):
    """Smith form over Z: returns (U, S, V) with U M V = S diagonal."""
    A = [list(r) for r in M]
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]
    V = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(X, i, j):
        X[i], X[j] = X[j], X[i]

    def swap_cols(X, i, j):
        for r in X:
            r[i], r[j] = r[j], r[i]

    t = 0
    while t < min(rows, cols):
        piv = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j] and (piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(A, t, piv[0])
        swap_rows(U, t, piv[0])
        swap_cols(A, t, piv[1])
        swap_cols(V, t, piv[1])
        done = False
        while not done:
            done = True
            for i in range(t + 1, rows):
                q = A[i][t] // A[t][t]
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[t])]
                if A[i][t]:
                    swap_rows(A, t, i)
                    swap_rows(U, t, i)
                    done = False
            for j in range(t + 1, cols):
                q = A[t][j] // A[t][t]
                if q:
                    for r in A:
                        r[j] -= q * r[t]
                    for r in V:
                        r[j] -= q * r[t]
                if A[t][j]:
                    swap_cols(A, t, j)
                    swap_cols(V, t, j)
                    done = False
            if done:
                # divisibility: fold any row that the pivot does not divide
                bad = next(
                    (i for i in range(t + 1, rows) for j in range(t + 1, cols)
                     if A[i][j] % A[t][t]), None,
                )
                if bad is not None:
                    A[t] = [x + y for x, y in zip(A[t], A[bad])]
                    U[t] = [x + y for x, y in zip(U[t], U[bad])]
                    done = False
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return U, A, V


def _matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def _lattice_quotient(K_gens: list, L_gens: list, m: int) -> list:
    """Invariant factors of K / L for full-rank lattices L <= K in Z^m (generators as columns)."""
    if m == 0:
        return []
    U, S, _ = _smith(K_gens, m, len(K_gens[0]))
    diag = [S[i][i] for i in range(m)]
    if any(x == 0 for x in diag):
        raise ArithmeticError("kernel lattice is not full rank")
    Y = _matmul(U, L_gens)
    Y = [[x // diag[i] for x in row] for i, row in enumerate(Y)]
    _, S2, _ = _smith(Y, m, len(Y[0]))
    out = []
    for i in range(m):
        s = abs(S2[i][i]) if i < len(S2[0]) else 0
        if s == 0:
            raise ArithmeticError("image lattice is not full rank")
        if s != 1:
            out.append(s)
    return sorted(out)


@dataclass
class _Group:
    """(B+/varpi^N)^r as a product of cyclic p-groups with labelled generators."""

    ring: object
    N: int
    rank: int
    slice_K: int
    gens: list = field(default_factory=list)  # (coord, k) pairs
    orders: list = field(default_factory=list)  # exponents of p

    @classmethod
    def build(cls, ring, N, rank, K):
        g = cls(ring, N, rank, K)
        for s in range(rank):
            if ring.kind == "Qp":
                g.gens.append((s, 0))
                g.orders.append(N)
            elif ring.kind == "LaurentFp":
                for k in range(N):
                    g.gens.append((s, k))
                    g.orders.append(1)
            else:
                for k in range(-K, N):
                    g.gens.append((s, k))
                    g.orders.append(N - max(k, 0))
        return g

    def element(self, idx: int) -> list:
        s, k = self.gens[idx]
        ring = self.ring
        vec = [ring.zero(self.N) for _ in range(self.rank)]
        if ring.kind == "O1":
            vec[s] = ring.laurent({k: ring.p ** max(0, -k)}, self.N)
        else:
            vec[s] = ring.monomial(k, self.N)
        return vec

    def coords(self, vec: list) -> list:
        ring = self.ring
        p = ring.p
        out = []
        for (s, k), e in zip(self.gens, self.orders):
            b = vec[s]
            if ring.kind == "Qp":
                c = 0 if b.is_zero() else b.u * p**b.e
            elif ring.kind == "LaurentFp":
                c = b.coeff(k)
            else:
                c = b.coeffs().get(k, 0) // p ** max(0, -k)
            out.append(c % p**e)
        if ring.kind == "O1":
            for b in vec:
                low = [k for k in b.coeffs() if k < -self.slice_K]
                if low:
                    raise ModuleError(f"action leaves the residual slice k >= {-self.slice_K}")
        return out


@dataclass
class CohomologyReport:
    ring: str
    N: int
    coefficients: str
    h: int | None
    degrees: list  # dicts with degree, divisors, ranks, tail_bound
    euler_ok: bool
    analytic_ok: bool | None = None

    def as_dict(self) -> dict:
        return {
            "ring": self.ring,
            "N": self.N,
            "coefficients": self.coefficients,
            "h": self.h,
            "euler_characteristic_consistent": self.euler_ok,
            "module_h_analytic": self.analytic_ok,
            "degrees": self.degrees,
        }

    def divisors(self, i: int) -> list:
        return self.degrees[i]["divisors"]


def _cochain_map(pres, matrices, G, j):
    """Integer matrix of delta^j : V^C(d,j) -> V^C(d,j+1) on the group generators."""
    d = pres.d
    src = _subsets(d, j)
    dst = _subsets(d, j + 1)
    m = len(G.gens)
    cols = []
    for S_idx, S in enumerate(src):
        for g in range(m):
            v = G.element(g)
            zero = [G.ring.zero(G.N) for _ in v]
            images = {}
            for t in range(d):
                gv = apply_generator(pres, matrices, t, v)
                images[t] = [a - b for a, b in zip(gv, v)]
            col = []
            for T in dst:
                if not set(S) <= set(T):
                    col.extend([0] * m)
                    continue
                t = next(x for x in T if x not in S)
                pos = T.index(t)
                w = images[t] if pos % 2 == 0 else [-a for a in images[t]]
                col.extend(G.coords(w if w else zero))
            cols.append(col)
    rows = len(dst) * m
    return [[cols[c][r] for c in range(len(cols))] for r in range(rows)] if cols else []


def cohomology(pres: GroupPresentation, matrices, N: int, coefficients: str = "continuous",
               h: int = 0, slice_K: int = 2) -> CohomologyReport:
    """H^i of Hom(C_bullet, V) for V = (B+/varpi^N)^r with g_i acting by M_i sigma_i.

    Each H^i is a finite abelian p-group, reported by its invariant factors
    as exponents of p.  For O1 the residual ring is a polynomial ring and the
    computation is restricted to the slice of X-degrees k >= -slice_K.
    """
    if coefficients not in ("continuous", "h-analytic"):
        raise ValueError("coefficients must be 'continuous' or 'h-analytic'")
    cx = lazard_serre(pres) if coefficients == "continuous" else kohlhaase(pres, h)
    check_module(pres, matrices)
    ring = pres.ring
    p = ring.p
    d = cx.d
    r = len(matrices[0])
    G = _Group.build(ring, N, r, slice_K)
    m = len(G.gens)
    analytic_ok = None
    if coefficients == "h-analytic":
        from mixchar.distributions import analytic_vectors

        rep = analytic_vectors(pres, h, matrices, D=N)
        analytic_ok = len(rep.basis) == r
    deltas = [_cochain_map(pres, matrices, G, j) for j in range(d)]
    # delta delta = 0 on the group
    for j in range(d - 1):
        prod = _matmul(deltas[j + 1], deltas[j])
        orders = G.orders * math.comb(d, j + 2)
        for i, row in enumerate(prod):
            if any(x % p ** orders[i] for x in row):
                raise ModuleError("generator matrices do not define an abelian group action")
    degrees = []
    log_h = 0
    log_c = 0
    for j in range(d + 1):
        nj = math.comb(d, j)
        mj = nj * m
        R_j = [G.orders[i % m] for i in range(mj)]
        log_c += (-1) ** j * sum(R_j)
        # kernel of delta^j modulo the relations of the target
        if j < d:
            A = deltas[j]
            mt = len(A)
            R_t = [G.orders[i % m] for i in range(mt)]
            big = [row + [p**R_t[i] if k == i else 0 for k in range(mt)] for i, row in enumerate(A)]
            _, S, V = _smith(big, mt, mj + mt)
            rank = sum(1 for i in range(min(mt, mj + mt)) if S[i][i])
            K_gens = [[V[r_][c] for c in range(rank, mj + mt)] for r_ in range(mj)]
        else:
            K_gens = [[int(i == k) for k in range(mj)] for i in range(mj)]
        rel = [[p**R_j[i] if k == i else 0 for k in range(mj)] for i in range(mj)]
        if j > 0:
            B = deltas[j - 1]
            L_gens = [B[i] + rel[i] for i in range(mj)]
        else:
            L_gens = rel
        K_full = [K_gens[i] + rel[i] for i in range(mj)]
        divs = _lattice_quotient(K_full, L_gens, mj)
        exps = []
        for x in divs:
            e = 0
            while x % p == 0:
                x //= p
                e += 1
            if x != 1:
                raise ArithmeticError("non-p-power invariant factor")
            exps.append(e)
        log_h += (-1) ** j * sum(exps)
        counts: dict = {}
        for e in exps:
            counts[e] = counts.get(e, 0) + 1
        degrees.append({
            "degree": j,
            "divisors": exps,
            "ranks": {f"Z/{p}^{e}": c for e, c in sorted(counts.items())},
            "tail_bound": {"varpi_adic": N, "slice_K": slice_K if ring.kind == "O1" else None},
        })
    return CohomologyReport(str(ring), N, coefficients, h if coefficients != "continuous" else None,
                            degrees, log_h == log_c, analytic_ok)


def full_module_divisors(ring, N: int, rank: int, slice_K: int = 2) -> list:
    """Invariant-factor exponents of (B+/varpi^N)^rank itself."""
    return sorted(_Group.build(ring, N, rank, slice_K).orders)
