"""The q -> 1 classical limits, computed in mode space with q = e^h.

The shift D acts on mode m as q^(-m) = e^(-hm); q-rational coefficients are
expanded with h_expand and generators are substituted by
t[m] -> 2 delta_m0 - h^2 u[m]  or  Lambda_i[m] -> delta_m0 - h v_i[m].
Results are polynomials in u, v with h-series coefficients of recorded precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .coeffs import ExactField, HSeries, Rat, h_expand, rat, use_field
from .modering import GeneratorId, Poly, Ring, WindowConfig, poly_sum
from . import poisson
from .hierarchy_kdv import CheckFailure, KdVState, hamiltonian_res, make_ring


class LimitPoly:
    """sum_k c_k(h) * monomial_k over a classical ring; c_k are HSeries."""

    __slots__ = ("ring", "t", "prec")

    def __init__(self, ring: Ring, terms, prec):
        self.ring = ring
        self.prec = prec
        self.t = {k: c.truncate(prec) for k, c in terms.items()}
        self.t = {k: c for k, c in self.t.items() if not (c.is_zero() and c.prec >= prec)}

    @classmethod
    def const(cls, ring, c: HSeries):
        return cls(ring, {ring.BASE: c}, c.prec)

    def __add__(self, other):
        out = dict(self.t)
        for k, c in other.t.items():
            out[k] = out[k] + c if k in out else c
        return LimitPoly(self.ring, out, min(self.prec, other.prec))

    def __neg__(self):
        return LimitPoly(self.ring, {k: -c for k, c in self.t.items()}, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        base = self.ring.BASE
        out = {}
        for k1, c1 in self.t.items():
            for k2, c2 in other.t.items():
                k = k1 + k2 - base
                v = c1 * c2
                out[k] = out[k] + v if k in out else v
        return LimitPoly(self.ring, out, min(self.prec, other.prec))

    def order(self):
        """Smallest h-order with a nonzero coefficient, or None."""
        vals = [c.val for c in self.t.values() if not c.is_zero()]
        return min(vals) if vals else None

    def coefficient(self, k) -> Poly:
        """The exact h^k part as a Poly over rationals; requires precision beyond k."""
        if k >= self.prec:
            raise CheckFailure("h^%d requested beyond the recorded precision h^%d" % (k, self.prec))
        out = {}
        for key, c in self.t.items():
            if c.prec <= k:
                raise CheckFailure("coefficient known only below h^%d" % c.prec, self.ring.monomial_str(key))
            v = c.coeff(k)
            if v != 0:
                out[key] = v
        return _RatPoly(self.ring, out)


@dataclass
class _RatPoly:
    """Rational-coefficient polynomial in the classical ring (exact comparison)."""

    ring: Ring
    t: dict

    def __eq__(self, other):
        return self.ring is other.ring and self.t == other.t

    def scale(self, c):
        return _RatPoly(self.ring, {k: v * c for k, v in self.t.items() if v * c != 0})

    def __sub__(self, other):
        out = dict(self.t)
        for k, v in other.t.items():
            out[k] = out.get(k, Rat(0)) - v
        return _RatPoly(self.ring, {k: v for k, v in out.items() if v != 0})

    def is_zero(self):
        return not self.t

    def __str__(self):
        if not self.t:
            return "0"
        keys = sorted(self.t, key=self.ring.sort_key)
        return " + ".join("%s*%s" % (self.t[k], self.ring.monomial_str(k)) for k in keys)


def _rp(ring, terms):
    return _RatPoly(ring, {ring.BASE + sum(e * (ring.fac[ring.index[g]] - ring.BASE) for g, e in mono): rat(c)
                           for mono, c in terms if c != 0})


def _first_witness(p: _RatPoly):
    k = min(p.t, key=p.ring.sort_key)
    return "%s*%s" % (p.t[k], p.ring.monomial_str(k))


# ---------------------------------------------------------------------------
# substitutions
# ---------------------------------------------------------------------------

@dataclass
class LimitSubstitution:
    """Per-generator images: source family -> (target family, h-power, constant at mode 0)."""

    source: str
    target: str
    hpow: int
    const: int
    K_h: int
    _cache: dict = dc_field(default_factory=dict)

    def image(self, g: GeneratorId, exp: int, target: Ring) -> LimitPoly:
        key = (g, exp, id(target))
        v = self._cache.get(key)
        if v is not None:
            return v
        K = self.K_h
        mono = LimitPoly.const(target, HSeries(self.hpow, [Rat(-1)], K))
        gen = target.fac[target.index[GeneratorId(self.target, g.component, g.mode)]]
        mono = LimitPoly(target, {gen: mono.t[target.BASE]}, K)
        img = mono
        if g.mode == 0 and self.const:
            img = LimitPoly.const(target, HSeries.const(self.const, K)) + mono
        if exp >= 0:
            v = LimitPoly.const(target, HSeries.const(1, K))
            for _ in range(exp):
                v = v * img
        else:
            if g.mode != 0 or not self.const:
                raise ValueError("only unit generators may be inverted")
            # (c - h^p x)^-1 = c^-1 sum_k (h^p x / c)^k
            inv_c = Rat(1) / self.const
            x = LimitPoly(target, {gen: HSeries(self.hpow, [inv_c], K)}, K)
            geo = LimitPoly.const(target, HSeries.const(1, K))
            term = geo
            for _ in range(K // max(self.hpow, 1) + 1):
                term = term * x
                geo = geo + term
            geo = geo * LimitPoly.const(target, HSeries.const(inv_c, K))
            v = LimitPoly.const(target, HSeries.const(1, K))
            for _ in range(-exp):
                v = v * geo
        self._cache[key] = v
        return v


def t_substitution(K_h):
    """t[m] -> 2 delta_m0 - h^2 u[m]."""
    return LimitSubstitution("T", "U", 2, 2, K_h)


def lam_substitution(K_h):
    """Lambda_i[m] -> delta_m0 - h v_i[m]."""
    return LimitSubstitution("LAM", "V", 1, 1, K_h)


def substitute(P: Poly, subs, target: Ring, K_h: int) -> LimitPoly:
    """Image of an exact q-polynomial: coefficients via h_expand, generators via subs."""
    R = P.ring
    by_family = {s.source: s for s in subs}
    acc = LimitPoly(target, {}, K_h)
    zf = target.fac[0] - target.BASE
    for k, c in P.t.items():
        term = LimitPoly(target, {target.BASE: h_expand(c, K_h)}, K_h)
        for gi, e in R.decode(k):
            g = R.gens[gi]
            if g is None:
                term = LimitPoly(target, {kk + e * zf: v for kk, v in term.t.items()}, term.prec)
                continue
            s = by_family.get(g.family)
            if s is None:
                # kept as a classical symbol of the same name
                tk = target.fac[target.index[g]] - target.BASE
                term = LimitPoly(target, {kk + e * tk: v for kk, v in term.t.items()}, term.prec)
                continue
            term = term * s.image(g, e, target)
        acc = acc + term
    return acc


def classical_ring(families, M):
    return make_ring(families, WindowConfig(M, M, 1, 1), (), 0)


# ---------------------------------------------------------------------------
# bracket limits
# ---------------------------------------------------------------------------

VIRASORO = "virasoro"
HEISENBERG = "heisenberg"


def virasoro_table(ring, a, b):
    """{u[a], u[b]} = (a - b) u[a+b] + (a^3 / 2) delta_{a+b,0}."""
    terms = []
    if abs(a + b) <= ring.M:
        terms.append((((GeneratorId("U", 1, a + b), 1),), a - b))
    if a + b == 0:
        terms.append(((), rat(a ** 3, 2)))
    return _rp(ring, terms)


def heisenberg_table(ring, N, i, j, a, b):
    """{v_i[a], v_j[b]} = -(N-1)/N a delta (i = j), 1/N a delta (i != j)."""
    if a + b != 0:
        return _rp(ring, [])
    c = rat(-(N - 1), N) if i == j else rat(1, N)
    return _rp(ring, [((), c * a)])


def first_bracket_table(ring, a, b):
    """Leading h^1 part of {t[a], t[b]}_1: 2 a delta_{a+b,0}."""
    return _rp(ring, [((), 2 * a)] if a + b == 0 else [])


def _bracket_limit(kernels, fam, ci, cj, a, b, source: Ring, subs, target, K_h):
    P = poisson.mode_bracket(kernels, GeneratorId(fam, ci, a), GeneratorId(fam, cj, b), source)
    return substitute(P, [subs], target, K_h)


def limit_bracket(kernels, fam, ci, cj, a, b, source, subs, target, K_h, field_scale):
    """Classical bracket: coefficient of h^(2 hpow - 1) in the q-bracket of generators.

    {x[a], y[b]}_q = h^(2 hpow) {X[a], Y[b]}; multiplying by h the classical
    bracket is the h^(2 hpow - 1) coefficient.  Lower orders must vanish
    except the field-independent leading term allowed by field_scale.
    """
    L = _bracket_limit(kernels, fam, ci, cj, a, b, source, subs, target, K_h)
    order = 2 * subs.hpow - 1
    for k in range(field_scale, order):
        low = L.coefficient(k)
        if not low.is_zero():
            raise CheckFailure("bracket limit has a term below h^%d" % order, "h^%d: %s" % (k, _first_witness(low)))
    return L.coefficient(order)


def _exact():
    return use_field(ExactField())


def probe_constant(M=2, K_h=6):
    """The single global constant C with classical = C * table, fixed by {u[1], u[-1]}."""
    with _exact():
        src = make_ring({"T": 1}, WindowConfig(M, M, 8), (), 0)
        tgt = classical_ring({"U": 1}, M)
        got = limit_bracket(poisson.kdv_second(2, True), "T", 1, 1, 1, -1, src, t_substitution(K_h), tgt, K_h, 0)
        tab = virasoro_table(tgt, 1, -1)
        base = tgt.BASE
        if base not in tab.t or base not in got.t:
            raise CheckFailure("probe bracket has no central term", str(got))
        return got.t[base] / tab.t[base]


def check_virasoro(M=2, K_h=6, C=None):
    """Leading order of the second N = 2 bracket: Witt part exact, central part times C."""
    with _exact():
        C = probe_constant(M, K_h) if C is None else C
        src = make_ring({"T": 1}, WindowConfig(M, M, 8), (), 0)
        tgt = classical_ring({"U": 1}, M)
        sub = t_substitution(K_h)
        K2 = poisson.kdv_second(2, True)
        for a in range(-M, M + 1):
            for b in range(-M, M + 1):
                if abs(a + b) > M:
                    continue
                got = limit_bracket(K2, "T", 1, 1, a, b, src, sub, tgt, K_h, 0)
                want = virasoro_table(tgt, a, b)
                witt = _RatPoly(tgt, {k: v for k, v in got.t.items() if k != tgt.BASE})
                witt_want = _RatPoly(tgt, {k: v for k, v in want.t.items() if k != tgt.BASE})
                if witt != witt_want:
                    raise CheckFailure("Witt part of {u[%d], u[%d]}" % (a, b), "%s vs %s" % (witt, witt_want))
                cen = got.t.get(tgt.BASE, Rat(0))
                cen_want = want.t.get(tgt.BASE, Rat(0)) * C
                if cen != cen_want:
                    raise CheckFailure("central part of {u[%d], u[%d]}" % (a, b), "%s vs %s" % (cen, cen_want))
        return C


def check_first_bracket_limit(M=2, K_h=4):
    """{t[a], t[b]}_1 = 2 h a delta + O(h^2)."""
    with _exact():
        src = make_ring({"T": 1}, WindowConfig(M, M, 8), (), 0)
        tgt = classical_ring({"U": 1}, M)
        K1 = poisson.kdv_first(2, True)
        sub = t_substitution(K_h)
        for a in range(-M, M + 1):
            for b in range(-M, M + 1):
                L = _bracket_limit(K1, "T", 1, 1, a, b, src, sub, tgt, K_h)
                if not L.coefficient(0).is_zero():
                    raise CheckFailure("first bracket limit has an h^0 term", "a=%d, b=%d" % (a, b))
                got = L.coefficient(1)
                want = first_bracket_table(tgt, a, b)
                if got != want:
                    raise CheckFailure("leading term of {t[%d], t[%d]}_1" % (a, b), "%s vs %s" % (got, want))


def check_heisenberg(N, M=2, K_h=4, C=1):
    """Leading order of the Lambda brackets under Lambda = 1 - h v against the Heisenberg table."""
    with _exact():
        src = make_ring({"LAM": N}, WindowConfig(M, M, 8), (), 0)
        tgt = classical_ring({"V": N}, M)
        sub = lam_substitution(K_h)
        KH = poisson.heisenberg(N)
        for i in range(1, N + 1):
            for j in range(1, N + 1):
                for a in range(-M, M + 1):
                    for b in range(-M, M + 1):
                        got = limit_bracket(KH, "LAM", i, j, a, b, src, sub, tgt, K_h, 0)
                        want = heisenberg_table(tgt, N, i, j, a, b).scale(C)
                        if got != want:
                            raise CheckFailure("{v_%d[%d], v_%d[%d]}" % (i, a, j, b), "%s vs %s" % (got, want))


# ---------------------------------------------------------------------------
# hamiltonians
# ---------------------------------------------------------------------------

@dataclass
class HamiltonianLimit:
    n: int
    constant: Rat
    order: int          # h-order of the first field-dependent term, None if constant
    leading: _RatPoly   # H_n^(0), zero if constant


def limit_hamiltonian_order(n, M=2, K_h=None):
    """Expand the N = 2 hamiltonian H_n under t = 2 - h^2 u."""
    K_h = n + 3 if K_h is None else K_h
    with _exact():
        S = KdVState(2, WindowConfig(M, M, 8))
        H = hamiltonian_res(S, n)
        tgt = classical_ring({"U": 1}, H.ring.M)
        L = substitute(H, [t_substitution(K_h)], tgt, K_h)
        c0 = L.coefficient(0)
        const = c0.t.get(tgt.BASE, Rat(0))
        if any(k != tgt.BASE for k in c0.t):
            raise CheckFailure("H_%d has a field-dependent h^0 term" % n, _first_witness(c0))
        for k in range(1, K_h):
            ck = L.coefficient(k)
            if not ck.is_zero():
                if any(key == tgt.BASE for key in ck.t):
                    raise CheckFailure("H_%d has a constant term at h^%d" % (n, k), str(ck))
                return HamiltonianLimit(n, const, k, ck)
        return HamiltonianLimit(n, const, None, _RatPoly(tgt, {}))


def check_hamiltonian_orders(ns=(1, 2, 3), M=2):
    out = {}
    for n in ns:
        r = limit_hamiltonian_order(n, M)
        if n % 2 == 1:
            if r.order != n + 1:
                raise CheckFailure("H_%d: first field-dependent order" % n, "h^%s, expected h^%d" % (r.order, n + 1))
        elif r.order is not None:
            raise CheckFailure("H_%d is not constant" % n, "h^%d: %s" % (r.order, _first_witness(r.leading)))
        out[n] = r
    return out


# ---------------------------------------------------------------------------
# Toda
# ---------------------------------------------------------------------------

def toda_constraint_limit(N, M=2, K_h=3):
    """Leading order of A_i(zq) - Lambda_{i-1} Lambda_i^-1 A_i with A_i = a_i(z) (family U)."""
    with _exact():
        from .modering import series_inverse
        w = WindowConfig(M, M, 8, 2)
        R = make_ring({"LAM": N, "U": N}, w, ("LAM",), 0, 2)
        tgt = classical_ring({"U": N, "V": N}, M)
        sub = lam_substitution(K_h)
        out = {}
        for i in range(1, N + 1):
            im = (i - 2) % N + 1
            A = R.series("U", i)
            lam_prev = R.series("LAM", im)
            lam_inv = series_inverse(R.series("LAM", i), 2)
            E = A.shift(1) - lam_prev * lam_inv * A
            L = substitute(E, [sub], tgt, K_h)
            if not L.coefficient(0).is_zero():
                raise CheckFailure("Toda constraint has an h^0 term", _first_witness(L.coefficient(0)))
            out[i] = L.coefficient(1)
        return out, tgt


def classical_toda_expression(tgt, N, i, M):
    """Mode form of d a_i - (v_i - v_{i-1}) a_i, with d z^-m = -m z^-m, truncated to |m| <= M."""
    im = (i - 2) % N + 1
    terms = []
    for m in range(-M, M + 1):
        if m:
            terms.append((((GeneratorId("U", i, m), 1),), -m))
    base = _rp(tgt, terms)
    out = dict(base.t)
    for a in range(-M, M + 1):
        for b in range(-M, M + 1):
            for comp, sgn in ((i, -1), (im, 1)):
                g1, g2 = GeneratorId("V", comp, a), GeneratorId("U", i, b)
                k = tgt.BASE + (tgt.fac[tgt.index[g1]] - tgt.BASE) + (tgt.fac[tgt.index[g2]] - tgt.BASE)
                out[k] = out.get(k, Rat(0)) + sgn
    return _RatPoly(tgt, {k: v for k, v in out.items() if v != 0})


def check_toda_limit(N, M=2):
    """The leading h-order of the constraint is d a_i = (v_i - v_{i-1}) a_i, mode by mode."""
    got, tgt = toda_constraint_limit(N, M)
    for i, g in got.items():
        want = classical_toda_expression(tgt, N, i, M)
        if g != want:
            raise CheckFailure("Toda limit for a_%d" % i, str(g - want))
    return got
