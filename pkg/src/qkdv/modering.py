"""Windowed Fourier-mode rings and z-series.

A series R(z) = sum_m R[m] z^(-m) is stored as a single sparse polynomial
in the mode generators: every monomial has a total mode (the sum of the
modes of its factors), and a monomial of total mode m sits at z^(-m).  A
unit pseudo-generator ``z`` (mode -1, i.e. the variable z itself) allows
explicit powers of z.

Monomials are packed into Python ints, 16 bits per field::

    field 0      number of "outer" factors (|mode| > M_pt)
    field 1      total mode, biased by 2^15
    field 2      degree in the non-unit generators
    field 3+i    exponent of generator i (unit generators biased by 2^15)

so multiplying monomials is integer addition.  Monomials with more outer
factors than the ring allows are dropped on the fly: this computes modulo
the ideal generated by products of outer generators, which is exact for
anything that is differentiated at most that many times before the outer
generators are set to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .coeffs import field, QRat

W = 16
MASK = (1 << W) - 1
BIAS = 1 << (W - 1)
_S_MODE = W
_S_DEG = 2 * W
_S_GEN = 3 * W

FAMILY_PREFIX = {"T": "t", "LAM": "lam", "U": "u", "V": "v", "P": "p"}
PREFIX_FAMILY = {v: k for k, v in FAMILY_PREFIX.items()}


class NotTotalDifference(ArithmeticError):
    """Raised when a series has a nonzero 0th Fourier coefficient."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class GeneratorId(NamedTuple):
    family: str
    component: int
    mode: int

    def __str__(self):
        return "%s%d[%d]" % (FAMILY_PREFIX[self.family], self.component, self.mode)


@dataclass(frozen=True)
class WindowConfig:
    """Truncation policy.

    M_pt    generators with |mode| > M_pt vanish at the evaluation point
    M_expr  largest mode carried while functionals are built (>= M_pt)
    K       depth in D^-1 kept by operator arithmetic
    degcap  degree cap used by series inversion
    """

    M_pt: int
    M_expr: int = 0
    K: int = 8
    degcap: int = 3

    def __post_init__(self):
        if self.M_pt < 0:
            raise ValueError("M_pt must be >= 0")
        if self.M_expr == 0:
            object.__setattr__(self, "M_expr", self.M_pt)
        if self.M_expr < self.M_pt:
            raise ValueError("M_expr must be >= M_pt")
        if self.K < 1 or self.degcap < 1:
            raise ValueError("K and degcap must be >= 1")

    def inflated(self, degree):
        """Same window with M_expr raised to cover densities of the given degree."""
        return WindowConfig(self.M_pt, max(self.M_expr, max(degree, 1) * self.M_pt), self.K, self.degcap)


class Ring:
    """Polynomial ring in the windowed mode generators of some families.

    families  mapping family -> number of components
    units     families whose mode-0 generators are invertible
    outer     maximal number of outer factors kept in a monomial
    degcap    if set, products drop monomials above this degree
    """

    def __init__(self, families, window: WindowConfig, units=(), outer=0, degcap=None):
        self.families = dict(families)
        self.window = window
        self.units = frozenset(units)
        self.outer = outer
        self.degcap = degcap
        M = window.M_expr if outer > 0 else window.M_pt
        self.M = M
        gens = [None]  # index 0 is the variable z
        unit_flags = [True]
        for fam in sorted(self.families, key=lambda f: list(FAMILY_PREFIX).index(f)):
            for comp in range(1, self.families[fam] + 1):
                if fam in self.units:
                    gens.append(GeneratorId(fam, comp, 0))
                    unit_flags.append(True)
        for fam in sorted(self.families, key=lambda f: list(FAMILY_PREFIX).index(f)):
            for comp in range(1, self.families[fam] + 1):
                for m in range(-M, M + 1):
                    if fam in self.units and m == 0:
                        continue
                    gens.append(GeneratorId(fam, comp, m))
                    unit_flags.append(False)
        self.gens = gens
        self.is_unit = unit_flags
        self.index = {g: i for i, g in enumerate(gens) if g is not None}
        base = BIAS << _S_MODE
        for i, u in enumerate(unit_flags):
            if u:
                base += BIAS << (_S_GEN + W * i)
        self.BASE = base
        facs = []
        for i, g in enumerate(gens):
            if g is None:
                mode, deg, out = -1, 0, 0
            else:
                mode = g.mode
                deg = 0 if unit_flags[i] else 1
                out = 1 if abs(g.mode) > window.M_pt else 0
            facs.append(base + (1 << (_S_GEN + W * i)) + (mode << _S_MODE) + (deg << _S_DEG) + out)
        self.fac = facs
        self._dcache = {}
        self._series = {}

    # -- identity ------------------------------------------------------------
    def signature(self):
        return (tuple(sorted(self.families.items())), self.window, tuple(sorted(self.units)), self.outer, self.degcap)

    def __eq__(self, other):
        return isinstance(other, Ring) and self.signature() == other.signature()

    def __hash__(self):
        return hash(self.signature())

    def with_outer(self, outer):
        return Ring(self.families, self.window, self.units, outer, self.degcap)

    # -- element constructors ----------------------------------------------------
    def zero(self):
        return Poly(self, {})

    def one(self):
        return Poly(self, {self.BASE: field().one})

    def const(self, c):
        c = field().coerce(c)
        return Poly(self, {self.BASE: c} if c else {})

    def gen(self, family, component, mode, exp=1):
        g = GeneratorId(family, component, mode)
        if abs(mode) > self.M:
            return self.zero()
        i = self.index[g]
        if exp < 0 and not self.is_unit[i]:
            raise ValueError("negative power of non-unit generator %s" % (g,))
        return Poly(self, {self.BASE + exp * (self.fac[i] - self.BASE): field().one})

    def has(self, family, component, mode):
        return GeneratorId(family, component, mode) in self.index

    def zpow(self, k):
        """The series z^k."""
        return Poly(self, {self.BASE + k * (self.fac[0] - self.BASE): field().one})

    def series(self, family, component):
        """sum_m g[m] z^(-m) over the generators present in the ring."""
        key = (family, component, field().name)
        s = self._series.get(key)
        if s is None:
            one = field().one
            s = Poly(self, {self.fac[self.index[GeneratorId(family, component, m)]]: one
                            for m in range(-self.M, self.M + 1)})
            self._series[key] = s
        return s

    # -- monomial helpers -----------------------------------------------------
    @staticmethod
    def mode_of(k):
        return ((k >> _S_MODE) & MASK) - BIAS

    @staticmethod
    def deg_of(k):
        return (k >> _S_DEG) & MASK

    @staticmethod
    def outer_of(k):
        return k & MASK

    def exponent(self, k, i):
        e = (k >> (_S_GEN + W * i)) & MASK
        return e - BIAS if self.is_unit[i] else e

    def decode(self, k):
        """Tuple of (generator index, exponent) for the nonzero exponents of k."""
        d = self._dcache.get(k)
        if d is None:
            out = []
            x = k >> _S_GEN
            i = 0
            isu = self.is_unit
            while x:
                e = x & MASK
                if isu[i]:
                    e -= BIAS
                if e:
                    out.append((i, e))
                x >>= W
                i += 1
            d = tuple(out)
            self._dcache[k] = d
        return d

    def encode(self, factors):
        k = self.BASE
        for i, e in factors:
            k += e * (self.fac[i] - self.BASE)
        return k

    def monomial_str(self, k):
        parts = []
        for i, e in self.decode(k):
            g = self.gens[i]
            name = "z" if g is None else str(g)
            parts.append(name if e == 1 else "%s^%d" % (name, e))
        return "*".join(parts) if parts else "1"

    def sort_key(self, k):
        d = self.decode(k)
        return (self.deg_of(k), len(d), tuple((i, -e) for i, e in d))


def _coef_str(c):
    if isinstance(c, QRat):
        if c.is_poly() and c.num.degree() <= 0:
            return str(c.num.coeffs()[0]) if c.num else "0"
        return "(%s)" % c
    return str(c)


class Poly:
    """Sparse polynomial in the generators of a Ring; also a z-series."""

    __slots__ = ("ring", "t")

    def __init__(self, ring: Ring, terms):
        self.ring = ring
        self.t = terms

    # -- basic protocol -------------------------------------------------------
    def is_zero(self):
        return not self.t

    def __bool__(self):
        return bool(self.t)

    def __len__(self):
        return len(self.t)

    def copy(self):
        return Poly(self.ring, dict(self.t))

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.t == other.t
        if other == 0:
            return not self.t
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.t.items()))

    def _lift(self, other):
        if isinstance(other, Poly):
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._lift(other)
        if not other.t:
            return self
        if not self.t:
            return other
        r = dict(self.t)
        for k, c in other.t.items():
            v = r.get(k)
            if v is None:
                r[k] = c
            else:
                v = v + c
                if v:
                    r[k] = v
                else:
                    del r[k]
        return Poly(self.ring, r)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {k: -c for k, c in self.t.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if not other.t:
            return self
        r = dict(self.t)
        for k, c in other.t.items():
            v = r.get(k)
            if v is None:
                r[k] = -c
            else:
                v = v - c
                if v:
                    r[k] = v
                else:
                    del r[k]
        return Poly(self.ring, r)

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c):
        c = field().coerce(c)
        if not c:
            return Poly(self.ring, {})
        return Poly(self.ring, {k: v * c for k, v in self.t.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        return poly_mul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n):
        out = self.ring.one()
        for _ in range(n):
            out = out * self
        return out

    # -- structure ---------------------------------------------------------
    def modes(self):
        return sorted({Ring.mode_of(k) for k in self.t})

    def mode_part(self, m):
        """Monomials sitting at z^(-m) (kept as they are)."""
        mo = Ring.mode_of
        return Poly(self.ring, {k: c for k, c in self.t.items() if mo(k) == m})

    def fourier(self, m=0):
        """The m-th Fourier coefficient as a polynomial: explicit z factors removed."""
        R = self.ring
        zf = R.fac[0] - R.BASE
        mo = Ring.mode_of
        out = {}
        for k, c in self.t.items():
            if mo(k) == m:
                e = R.exponent(k, 0)
                out[k - e * zf] = c
        return Poly(R, out)

    def integral(self):
        return self.fourier(0)

    def restrict(self, outer=0):
        """Drop monomials with more than ``outer`` outer factors."""
        return Poly(self.ring, {k: c for k, c in self.t.items() if (k & MASK) <= outer})

    def truncate_deg(self, d):
        return Poly(self.ring, {k: c for k, c in self.t.items() if ((k >> _S_DEG) & MASK) <= d})

    def deg_part(self, d):
        return Poly(self.ring, {k: c for k, c in self.t.items() if ((k >> _S_DEG) & MASK) == d})

    def max_deg(self):
        return max((((k >> _S_DEG) & MASK) for k in self.t), default=-1)

    def terms(self):
        return self.t.items()

    def coefficient(self, factors):
        return self.t.get(self.ring.encode(factors), field().zero)

    def to(self, ring):
        """Re-embed into a ring with the same generator layout but other limits."""
        if ring.gens != self.ring.gens:
            raise ValueError("incompatible generator layouts")
        return Poly(ring, self.t)

    # -- shift, multiplication by generators -------------------------------
    def shift(self, j):
        """f(z) -> f(z q^j): mode m picks up q^(-j m)."""
        if j == 0 or not self.t:
            return self
        F = field()
        mo = Ring.mode_of
        out = {}
        if F.exact:
            for k, c in self.t.items():
                m = mo(k)
                out[k] = c.times_qpow(-j * m) if m else c
        else:
            qp = F.qpow
            for k, c in self.t.items():
                m = mo(k)
                out[k] = c * qp(-j * m) if m else c
        return Poly(self.ring, out)

    def mul_monomial(self, key, c=None):
        R = self.ring
        d = key - R.BASE
        if c is None:
            return Poly(R, {k + d: v for k, v in self.t.items() if ((k + d) & MASK) <= R.outer})
        return Poly(R, {k + d: v * c for k, v in self.t.items() if ((k + d) & MASK) <= R.outer})

    def grad(self, gi):
        """Partial derivative with respect to generator index gi."""
        R = self.ring
        d = R.fac[gi] - R.BASE
        sh = _S_GEN + W * gi
        unit = R.is_unit[gi]
        out = {}
        for k, c in self.t.items():
            e = (k >> sh) & MASK
            if unit:
                e -= BIAS
            if e:
                out[k - d] = c * e
        return Poly(R, out)

    def grads(self):
        """All nonzero partial derivatives, as {generator index: Poly}."""
        R = self.ring
        base = R.BASE
        fac = R.fac
        dec = R.decode
        acc = {}
        for k, c in self.t.items():
            for i, e in dec(k):
                if i == 0:
                    continue
                t = acc.get(i)
                if t is None:
                    t = acc[i] = {}
                kk = k - fac[i] + base
                v = c * e
                old = t.get(kk)
                if old is None:
                    t[kk] = v
                else:
                    v = old + v
                    if v:
                        t[kk] = v
                    else:
                        del t[kk]
        return {i: Poly(R, t) for i, t in acc.items() if t}

    def variables(self):
        s = set()
        for k in self.t:
            for i, _ in self.ring.decode(k):
                s.add(i)
        s.discard(0)
        return s

    # -- printing -----------------------------------------------------------
    def sorted_terms(self):
        R = self.ring
        return sorted(self.t.items(), key=lambda kc: R.sort_key(kc[0]))

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return "Poly(%s)" % format_poly(self)


def format_poly(p: Poly) -> str:
    if not p.t:
        return "0"
    R = p.ring
    out = []
    for k, c in p.sorted_terms():
        mono = R.monomial_str(k)
        neg = False
        cs = _coef_str(c)
        if not cs.startswith("(") and cs.startswith("-"):
            neg = True
            cs = cs[1:]
        if mono == "1":
            body = cs
        elif cs == "1":
            body = mono
        else:
            body = "%s*%s" % (cs, mono)
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def poly_mul(a: Poly, b: Poly) -> Poly:
    R = a.ring
    if not a.t or not b.t:
        return Poly(R, {})
    if len(a.t) > len(b.t):
        a, b = b, a
    base = R.BASE
    lim = R.outer
    cap = R.degcap
    ga = {}
    for k, c in a.t.items():
        ga.setdefault(k & MASK, []).append((k - base, c))
    gb = {}
    for k, c in b.t.items():
        gb.setdefault(k & MASK, []).append((k, c))
    r = {}
    get = r.get
    for oa, la in ga.items():
        for ob, lb in gb.items():
            if oa + ob > lim:
                continue
            if cap is None:
                for k1, c1 in la:
                    for k2, c2 in lb:
                        k = k1 + k2
                        v = get(k)
                        if v is None:
                            r[k] = c1 * c2
                        else:
                            r[k] = v + c1 * c2
            else:
                for k1, c1 in la:
                    for k2, c2 in lb:
                        k = k1 + k2
                        if ((k >> _S_DEG) & MASK) > cap:
                            continue
                        v = get(k)
                        if v is None:
                            r[k] = c1 * c2
                        else:
                            r[k] = v + c1 * c2
    return Poly(R, {k: v for k, v in r.items() if v})


def poly_sum(ring, polys):
    r = {}
    for p in polys:
        for k, c in p.t.items():
            v = r.get(k)
            r[k] = c if v is None else v + c
    return Poly(ring, {k: v for k, v in r.items() if v})


# ---------------------------------------------------------------------------
# operations on series
# ---------------------------------------------------------------------------

def q_shift(f: Poly, j: int) -> Poly:
    return f.shift(j)


def series_mul(f: Poly, g: Poly) -> Poly:
    return f * g


def cyclic_sum_invert(R: Poly, N: int) -> Poly:
    """Solve (1 + D + ... + D^(N-1)) f = R mode by mode."""
    F = field()
    mo = Ring.mode_of
    return Poly(R.ring, {k: c * F.cyclic_divisor_inv(N, mo(k)) for k, c in R.t.items()})


def total_difference_witness(R: Poly) -> Poly:
    """g with (1 - D) g = R; raises NotTotalDifference if R[0] != 0."""
    F = field()
    mo = Ring.mode_of
    out = {}
    for k, c in R.t.items():
        m = mo(k)
        if m == 0:
            raise NotTotalDifference("nonzero 0th Fourier coefficient", witness=R.ring.monomial_str(k))
        out[k] = c * _td_inv(F, m)
    return Poly(R.ring, out)


def _td_inv(F, m):
    cache = F.__dict__.setdefault("_tdc", {})
    v = cache.get(m)
    if v is None:
        v = 1 / (F.one - F.qpow(-m))
        cache[m] = v
    return v


def one_minus_D(g: Poly) -> Poly:
    return g - g.shift(1)


def series_inverse(f: Poly, degcap=None) -> Poly:
    """Degree-capped inverse of c(1 + r), c a unit monomial, r of positive degree."""
    R = f.ring
    cap = R.window.degcap if degcap is None else degcap
    lead = f.deg_part(0)
    if len(lead.t) != 1:
        raise ZeroDivisionError("degree-0 part of the series is not a single unit monomial")
    (k0, c0), = lead.t.items()
    for i, e in R.decode(k0):
        if not R.is_unit[i]:
            raise ZeroDivisionError("constant part %s is not a unit" % R.monomial_str(k0))
    inv_key = 2 * R.BASE - k0
    inv_c = 1 / c0
    r = (f - lead).mul_monomial(inv_key, inv_c)
    capped = Ring(R.families, R.window, R.units, R.outer, cap)
    r = r.to(capped)
    term = capped.one()
    acc = capped.one()
    for _ in range(cap):
        term = -(term * r)
        if not term.t:
            break
        acc = acc + term
    return acc.to(R).mul_monomial(inv_key, inv_c).truncate_deg(cap)


def gradient(F: Poly, g: GeneratorId) -> Poly:
    i = F.ring.index.get(g)
    if i is None:
        return F.ring.zero()
    return F.grad(i)


_TRANSFER = {}


def transfer(P: Poly, ring: Ring, drop_missing=False) -> Poly:
    """Re-express P in another ring, matching generators by identity."""
    src = P.ring
    if src is ring:
        return P
    key = (id(src), id(ring))
    ent = _TRANSFER.get(key)
    if ent is None or ent[0] is not src or ent[1] is not ring:
        imap = {}
        for i, g in enumerate(src.gens):
            if g is None:
                imap[i] = 0
            else:
                j = ring.index.get(g)
                if j is not None:
                    imap[i] = j
        ent = (src, ring, imap)
        _TRANSFER[key] = ent
    imap = ent[2]
    out = {}
    for k, c in P.t.items():
        fac = []
        ok = True
        for i, e in src.decode(k):
            j = imap.get(i)
            if j is None:
                if drop_missing:
                    ok = False
                    break
                raise ValueError("generator %s is not in the target ring" % (src.gens[i],))
            fac.append((j, e))
        if not ok:
            continue
        kk = ring.encode(fac)
        if (kk & MASK) > ring.outer:
            continue
        v = out.get(kk)
        out[kk] = c if v is None else v + c
    return Poly(ring, {k: v for k, v in out.items() if v})
