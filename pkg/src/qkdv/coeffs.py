"""Exact scalar arithmetic: rationals, polynomials and rational functions in q,
truncated h-series, and the global coefficient field.

Two backends provide ``Rat`` and ``QPoly``:

* ``flint`` (default) uses python-flint's ``fmpq`` / ``fmpq_poly``.
* ``python`` uses :class:`fractions.Fraction` and the pure-Python
  :class:`PyQPoly` below.

The backend is picked once at import time from the ``QKDV_BACKEND``
environment variable.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache

BACKEND = os.environ.get("QKDV_BACKEND", "flint").strip().lower()


class PoleError(ZeroDivisionError):
    """A rational function was evaluated at a zero of its denominator."""


# ---------------------------------------------------------------------------
# pure-Python univariate polynomials over Fraction
# ---------------------------------------------------------------------------

def _trim(cs):
    n = len(cs)
    while n and not cs[n - 1]:
        n -= 1
    return tuple(cs[:n])


class PyQPoly:
    """Dense polynomial with Fraction coefficients, lowest degree first."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        if isinstance(coeffs, PyQPoly):
            self.c = coeffs.c
            return
        if isinstance(coeffs, (int, Fraction)):
            coeffs = (coeffs,)
        self.c = _trim([Fraction(x) for x in coeffs])

    @classmethod
    def _raw(cls, cs):
        p = cls.__new__(cls)
        p.c = _trim(cs)
        return p

    def degree(self):
        return len(self.c) - 1

    def coeffs(self):
        return list(self.c)

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        if not isinstance(other, PyQPoly):
            other = PyQPoly(other)
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __neg__(self):
        return PyQPoly._raw([-x for x in self.c])

    def __add__(self, other):
        if not isinstance(other, PyQPoly):
            other = PyQPoly(other)
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] += x
        return PyQPoly._raw(out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, PyQPoly):
            other = PyQPoly(other)
        return self + (-other)

    def __rsub__(self, other):
        return PyQPoly(other) - self

    def __mul__(self, other):
        if not isinstance(other, PyQPoly):
            s = Fraction(other)
            return PyQPoly._raw([x * s for x in self.c])
        a, b = self.c, other.c
        if not a or not b:
            return PyQPoly._raw(())
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return PyQPoly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        s = Fraction(other)
        return PyQPoly._raw([x / s for x in self.c])

    def __divmod__(self, other):
        if not other.c:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        db = len(other.c) - 1
        lb = other.c[-1]
        if len(r) - 1 < db:
            return PyQPoly._raw(()), PyQPoly._raw(r)
        qt = [Fraction(0)] * (len(r) - db)
        for k in range(len(r) - 1, db - 1, -1):
            c = r[k]
            if c:
                f = c / lb
                qt[k - db] = f
                for j, y in enumerate(other.c):
                    r[k - db + j] -= f * y
        return PyQPoly._raw(qt), PyQPoly._raw(r[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def gcd(self, other):
        a, b = self, other
        while b:
            a, b = b, a % b
        if not a:
            return a
        return a / a.c[-1]

    def __call__(self, x):
        acc = Fraction(0)
        for c in reversed(self.c):
            acc = acc * x + c
        return acc

    def __repr__(self):
        return "PyQPoly(%r)" % (list(self.c),)


if BACKEND == "python":
    Rat = Fraction
    QPoly = PyQPoly
elif BACKEND == "flint":
    from flint import fmpq as Rat, fmpq_poly as QPoly
else:  # pragma: no cover - configuration error
    raise ImportError("unknown QKDV_BACKEND %r (expected 'flint' or 'python')" % BACKEND)


def rat(n, d=1) -> "Rat":
    """Rational number n/d in the active backend."""
    if isinstance(n, str):
        f = Fraction(n) / Fraction(d)
        return Rat(f.numerator, f.denominator)
    if isinstance(n, Fraction):
        f = n / Fraction(d)
        return Rat(f.numerator, f.denominator)
    return Rat(n, d)


def to_fraction(r) -> Fraction:
    if isinstance(r, Fraction):
        return r
    return Fraction(int(r.p), int(r.q))


def _poly_key(p):
    return tuple(p.coeffs())


_ONE_POLY = QPoly([1])
_ZERO_POLY = QPoly([])


# ---------------------------------------------------------------------------
# rational functions in q
# ---------------------------------------------------------------------------
#
# Internally a QRat is  n / (q^s * prod_f f^e)  with the denominator kept as
# a product over a registry of monic factors (cyclotomic polynomials first,
# anything else registered on demand).  Sums then only need cofactor
# multiplications and q-shifts are exponent changes; no gcd is computed until
# the canonical form (reduced, monic denominator) is requested.

_FACTORS = []        # id -> monic QPoly
_FACTOR_ID = {}      # coefficient tuple -> id
_CYCLO_ID = {}       # d -> id of the d-th cyclotomic polynomial
_FACTORISE = {}      # coefficient tuple -> (lc, s, factors)
_COFACTOR = {}       # factors tuple -> expanded product
_XPOW = {}


def _xpow(k):
    p = _XPOW.get(k)
    if p is None:
        p = QPoly([0] * k + [1])
        _XPOW[k] = p
    return p


def _register(p):
    key = _poly_key(p)
    i = _FACTOR_ID.get(key)
    if i is None:
        i = len(_FACTORS)
        _FACTORS.append(p)
        _FACTOR_ID[key] = i
    return i


def _cyclotomic(d):
    i = _CYCLO_ID.get(d)
    if i is None:
        p = QPoly([-1] + [0] * (d - 1) + [1])
        for e in range(1, d):
            if d % e == 0:
                p = p // _FACTORS[_cyclotomic(e)]
        i = _register(p)
        _CYCLO_ID[d] = i
    return i


@lru_cache(maxsize=None)
def _totient(d):
    n, out, p = d, d, 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            out -= out // p
        p += 1
    if n > 1:
        out -= out // n
    return out


def _factorise(p):
    """p = lc * q^s * prod f^e with registered monic factors."""
    key = _poly_key(p)
    r = _FACTORISE.get(key)
    if r is not None:
        return r
    cs = p.coeffs()
    s = 0
    while cs[s] == 0:
        s += 1
    if s:
        p = QPoly(cs[s:])
    lc = p.coeffs()[-1]
    if lc != 1:
        p = p / lc
    facs = {}
    deg = p.degree()
    d = 1
    while deg > 0 and d <= 6 * deg + 6:
        if _totient(d) <= deg:
            fid = _cyclotomic(d)
            c = _FACTORS[fid]
            while deg >= c.degree():
                qt, rm = divmod(p, c)
                if rm:
                    break
                p = qt
                deg = p.degree()
                facs[fid] = facs.get(fid, 0) + 1
        d += 1
    if deg > 0:
        fid = _register(p)
        facs[fid] = facs.get(fid, 0) + 1
    r = (lc, s, tuple(sorted(facs.items())))
    _FACTORISE[key] = r
    return r


def _expand(facs):
    p = _COFACTOR.get(facs)
    if p is None:
        p = _ONE_POLY
        for fid, e in facs:
            f = _FACTORS[fid]
            for _ in range(e):
                p = p * f
        _COFACTOR[facs] = p
    return p


def _merge_max(fa, fb):
    if fa == fb:
        return fa, (), ()
    da, db = dict(fa), dict(fb)
    ca, cb = [], []
    out = []
    for fid in sorted(set(da) | set(db)):
        ea, eb = da.get(fid, 0), db.get(fid, 0)
        m = ea if ea > eb else eb
        out.append((fid, m))
        if m > ea:
            ca.append((fid, m - ea))
        if m > eb:
            cb.append((fid, m - eb))
    return tuple(out), tuple(ca), tuple(cb)


def _merge_add(fa, fb):
    if not fa:
        return fb
    if not fb:
        return fa
    d = dict(fa)
    for fid, e in fb:
        d[fid] = d.get(fid, 0) + e
    return tuple(sorted(d.items()))


def _canon(num, den):
    if not den:
        raise ZeroDivisionError("rational function with zero denominator")
    if not num:
        return _ZERO_POLY, _ONE_POLY
    if den.degree() > 0:
        g = num.gcd(den)
        if g.degree() > 0:
            num = num // g
            den = den // g
    lc = den.coeffs()[-1]
    if lc != 1:
        num = num / lc
        den = den / lc
    return num, den


class QRat:
    """Rational function in one variable q with exact rational coefficients.

    ``num`` / ``den`` give the canonical form: coprime, monic denominator.
    Equality compares values.
    """

    __slots__ = ("n", "f", "s", "_c", "_h")

    def __init__(self, num, den=None):
        if not isinstance(num, QPoly):
            num = QPoly(list(num)) if isinstance(num, (list, tuple)) else QPoly([num])
        if den is not None and not isinstance(den, QPoly):
            den = QPoly(list(den)) if isinstance(den, (list, tuple)) else QPoly([den])
        self._c = None
        self._h = None
        if den is None or (den.degree() == 0 and den.coeffs()[0] == 1):
            self.n, self.f, self.s = num, (), 0
            return
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not num:
            self.n, self.f, self.s = _ZERO_POLY, (), 0
            return
        lc, s, facs = _factorise(den)
        self.n = num / lc if lc != 1 else num
        self.f, self.s = facs, s

    @classmethod
    def _make(cls, n, f, s):
        r = cls.__new__(cls)
        if not n:
            f, s = (), 0
        r.n, r.f, r.s, r._c, r._h = n, f, s, None, None
        return r

    @staticmethod
    def const(c):
        return _coerce(rat(c) if isinstance(c, (int, Fraction, str)) else c)

    @staticmethod
    def qpow(k):
        return _qpow_rat(k)

    # -- canonical form --------------------------------------------------------
    def canonical(self):
        c = self._c
        if c is None:
            n = self.n
            den = _expand(self.f)
            if self.s > 0:
                den = den * _xpow(self.s)
            elif self.s < 0:
                n = n * _xpow(-self.s)
            c = _canon(n, den)
            self._c = c
        return c

    @property
    def num(self):
        return self.canonical()[0]

    @property
    def den(self):
        return self.canonical()[1]

    def is_poly(self):
        return self.canonical()[1].degree() == 0

    def __bool__(self):
        return bool(self.n)

    def __eq__(self, other):
        if not isinstance(other, QRat):
            if isinstance(other, (int, Fraction)) or type(other) is Rat:
                other = _coerce(other)
            else:
                return NotImplemented
        if self.f == other.f and self.s == other.s:
            return self.n == other.n
        return not (self - other).n

    def __hash__(self):
        if self._h is None:
            n, d = self.canonical()
            self._h = hash((_poly_key(n), _poly_key(d)))
        return self._h

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self):
        return QRat._make(-self.n, self.f, self.s)

    def __add__(self, other):
        if not isinstance(other, QRat):
            other = _coerce(other)
        if not other.n:
            return self
        if not self.n:
            return other
        na, nb = self.n, other.n
        sa, sb = self.s, other.s
        if sa != sb:
            if sa > sb:
                nb = nb * _xpow(sa - sb)
                s = sa
            else:
                na = na * _xpow(sb - sa)
                s = sb
        else:
            s = sa
        if self.f == other.f:
            f = self.f
        else:
            f, ca, cb = _merge_max(self.f, other.f)
            if ca:
                na = na * _expand(ca)
            if cb:
                nb = nb * _expand(cb)
        return QRat._make(na + nb, f, s)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, QRat):
            other = _coerce(other)
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, QRat):
            if isinstance(other, (int, Fraction)) or type(other) is Rat:
                if other == 0:
                    return _ZERO
                if isinstance(other, Fraction) and BACKEND == "flint":
                    other = Rat(other.numerator, other.denominator)
                return QRat._make(self.n * other, self.f, self.s)
            return NotImplemented
        if not self.n or not other.n:
            return _ZERO
        return QRat._make(self.n * other.n, _merge_add(self.f, other.f), self.s + other.s)

    __rmul__ = __mul__

    def times_qpow(self, k):
        return QRat._make(self.n, self.f, self.s - k)

    def inverse(self):
        if not self.n:
            raise ZeroDivisionError("division by the zero rational function")
        lc, s2, facs = _factorise(self.n)
        num = _expand(self.f)
        if lc != 1:
            num = num / lc
        return QRat._make(num, facs, s2 - self.s)

    def __truediv__(self, other):
        if not isinstance(other, QRat):
            other = _coerce(other)
            if other.f == () and other.s == 0 and other.n.degree() == 0:
                return QRat._make(self.n / other.n.coeffs()[0], self.f, self.s)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = _ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def subs_qpow(self, m):
        """Substitute the variable x -> q^m (m may be negative)."""
        num, den = self.canonical()
        if m == 0:
            if den(1) == 0:
                raise PoleError("rational function has a pole at x = 1")
            return _coerce(num(1) / den(1))
        nc, dc = num.coeffs(), den.coeffs()
        if m > 0:
            return QRat(_spread(nc, m), _spread(dc, m))
        top = max(len(nc), len(dc)) - 1
        return QRat(_spread_rev(nc, -m, top), _spread_rev(dc, -m, top))

    def evaluate(self, q0):
        dv = q0 ** self.s if self.s else Rat(1)
        for fid, e in self.f:
            dv *= _FACTORS[fid](q0) ** e
        if dv == 0:
            num, den = self.canonical()
            d = den(q0)
            if d == 0:
                raise PoleError("pole of %s at q=%s" % (self, q0))
            return num(q0) / d
        return self.n(q0) / dv

    def __repr__(self):
        return "QRat(%s)" % self

    def __str__(self):
        return format_qrat(self)


def _spread(cs, m):
    if not cs:
        return QPoly([])
    out = [0] * (m * (len(cs) - 1) + 1)
    for k, c in enumerate(cs):
        out[k * m] = c
    return QPoly(out)


def _spread_rev(cs, m, top):
    if not cs:
        return QPoly([])
    out = [0] * (m * top + 1)
    for k, c in enumerate(cs):
        out[m * (top - k)] = c
    return QPoly(out)


_ZERO = QRat._make(_ZERO_POLY, (), 0)
_ONE = QRat._make(_ONE_POLY, (), 0)


def _coerce(x):
    if isinstance(x, QRat):
        return x
    if isinstance(x, (int, Fraction)) or type(x) is Rat:
        if x == 0:
            return _ZERO
        if isinstance(x, Fraction) and BACKEND == "flint":
            x = Rat(x.numerator, x.denominator)
        return QRat._make(QPoly([x]), (), 0)
    raise TypeError("cannot coerce %r to QRat" % (x,))


@lru_cache(maxsize=None)
def _qpow_rat(k):
    return QRat._make(_ONE_POLY, (), -k)


X = QRat._make(QPoly([0, 1]), (), 0)


def qrat_arith(a: QRat, b: QRat, op: str) -> QRat:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError("unknown op %r" % op)


def qrat_eval(a: QRat, q0) -> "Rat":
    return a.evaluate(q0 if type(q0) is Rat else rat(q0))


def _fmt_rat(c):
    return str(c)


def format_qpoly(p, var="q"):
    terms = []
    for k, c in enumerate(p.coeffs()):
        if c == 0:
            continue
        neg = c < 0
        a = -c if neg else c
        if k == 0:
            body = _fmt_rat(a)
        else:
            mono = var if k == 1 else "%s^%d" % (var, k)
            body = mono if a == 1 else "%s*%s" % (_fmt_rat(a), mono)
        terms.append(("-" if neg else "+", body))
    if not terms:
        return "0"
    out = ("-" + terms[0][1]) if terms[0][0] == "-" else terms[0][1]
    for s, b in terms[1:]:
        out += " %s %s" % (s, b)
    return out


def format_qrat(a: QRat, var="q"):
    n = format_qpoly(a.num, var)
    if a.den.degree() == 0:
        return n
    d = format_qpoly(a.den, var)
    if " " in n:
        n = "(%s)" % n
    if " " in d or "*" in d:
        d = "(%s)" % d
    return "%s/%s" % (n, d)


# ---------------------------------------------------------------------------
# truncated Laurent series in h
# ---------------------------------------------------------------------------

H_CAPACITY = 256


class HSeries:
    """sum_i coeffs[i] h^(val+i) + O(h^prec).  ``prec`` is absolute."""

    __slots__ = ("val", "coeffs", "prec")

    def __init__(self, val, coeffs, prec):
        coeffs = list(coeffs)[: max(prec - val, 0)]
        i = 0
        while i < len(coeffs) and coeffs[i] == 0:
            i += 1
        coeffs = coeffs[i:]
        val += i
        if not coeffs:
            val = prec
        self.val, self.coeffs, self.prec = val, coeffs, prec

    @classmethod
    def const(cls, c, prec):
        return cls(0, [rat(c) if not type(c) is Rat else c], prec)

    def coeff(self, k):
        if k >= self.prec:
            raise ValueError("h^%d is beyond the recorded precision %d" % (k, self.prec))
        i = k - self.val
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Rat(0)

    def is_zero(self):
        return not self.coeffs

    def leading(self):
        if not self.coeffs:
            return None
        return self.val, self.coeffs[0]

    def __add__(self, other):
        if not isinstance(other, HSeries):
            other = HSeries.const(other, self.prec)
        prec = min(self.prec, other.prec)
        v = min(self.val, other.val)
        out = [Rat(0)] * max(prec - v, 0)
        for s in (self, other):
            for i, c in enumerate(s.coeffs):
                k = s.val + i - v
                if k < len(out):
                    out[k] += c
        return HSeries(v, out, prec)

    __radd__ = __add__

    def __neg__(self):
        return HSeries(self.val, [-c for c in self.coeffs], self.prec)

    def __sub__(self, other):
        if not isinstance(other, HSeries):
            other = HSeries.const(other, self.prec)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, HSeries):
            c = other if type(other) is Rat else rat(other)
            return HSeries(self.val, [x * c for x in self.coeffs], self.prec)
        prec = min(self.prec + other.val, other.prec + self.val)
        v = self.val + other.val
        n = max(prec - v, 0)
        out = [Rat(0)] * n
        for i, a in enumerate(self.coeffs):
            if i >= n:
                break
            for j, b in enumerate(other.coeffs):
                if i + j >= n:
                    break
                out[i + j] += a * b
        return HSeries(v, out, prec)

    __rmul__ = __mul__

    def inverse(self):
        if not self.coeffs:
            raise ZeroDivisionError("inverse of an h-series with no known nonzero term")
        rel = self.prec - self.val
        a = self.coeffs + [Rat(0)] * max(rel - len(self.coeffs), 0)
        inv = [Rat(0)] * rel
        inv[0] = 1 / a[0]
        for k in range(1, rel):
            s = Rat(0)
            for j in range(1, k + 1):
                s += a[j] * inv[k - j]
            inv[k] = -s * inv[0]
        return HSeries(-self.val, inv, -self.val + rel)

    def __truediv__(self, other):
        if not isinstance(other, HSeries):
            return self * (1 / (other if type(other) is Rat else rat(other)))
        return self * other.inverse()

    def truncate(self, prec):
        return HSeries(self.val, self.coeffs, min(prec, self.prec))

    def __eq__(self, other):
        if not isinstance(other, HSeries):
            return NotImplemented
        return (self.val, self.coeffs, self.prec) == (other.val, other.coeffs, other.prec)

    def __repr__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c != 0:
                parts.append("%s*h^%d" % (c, self.val + i))
        parts.append("O(h^%d)" % self.prec)
        return " + ".join(parts)


@lru_cache(maxsize=4096)
def _inv_factorial(n):
    f = 1
    for k in range(2, n + 1):
        f *= k
    return Rat(1, f)


def _exp_expand(p, nterms):
    """Coefficients of p(e^h) for h^0..h^(nterms-1)."""
    cs = [(k, c) for k, c in enumerate(p.coeffs()) if c != 0]
    out = []
    for n in range(nterms):
        s = Rat(0)
        for k, c in cs:
            s += c * Rat(k) ** n
        out.append(s * _inv_factorial(n))
    return out


def _order_at_one(p):
    cs = [(k, c) for k, c in enumerate(p.coeffs()) if c != 0]
    for n in range(len(p.coeffs()) + 1):
        s = Rat(0)
        for k, c in cs:
            s += c * Rat(k) ** n
        if s != 0:
            return n
    raise ZeroDivisionError("zero polynomial has no order at q=1")


def h_expand(a: QRat, K_h: int) -> HSeries:
    """Laurent expansion of a(e^h) at h=0, known modulo h^K_h."""
    if K_h < 1:
        raise ValueError("K_h must be >= 1")
    if not a.num:
        return HSeries(K_h, [], K_h)
    vn = _order_at_one(a.num)
    vd = _order_at_one(a.den)
    v = vn - vd
    rel = K_h - v
    if rel <= 0:
        return HSeries(K_h, [], K_h)
    if max(vn, vd) + rel > H_CAPACITY:
        raise ValueError("requested h-order %d exceeds expansion capacity %d" % (K_h, H_CAPACITY))
    ns = HSeries(vn, _exp_expand(a.num, vn + rel)[vn:], vn + rel)
    ds = HSeries(vd, _exp_expand(a.den, vd + rel)[vd:], vd + rel)
    return (ns / ds).truncate(K_h)


# ---------------------------------------------------------------------------
# the global coefficient field
# ---------------------------------------------------------------------------

def default_q0():
    return rat(os.environ.get("QKDV_Q0", "3/2"))


class ExactField:
    """Coefficients are exact rational functions of q."""

    exact = True
    name = "exact"

    def __init__(self):
        self.zero = _ZERO
        self.one = _ONE
        self._kcache = {}
        self._cyc = {}

    def const(self, n, d=1):
        c = rat(n, d)
        return _coerce(c)

    def coerce(self, c):
        if isinstance(c, QRat):
            return c
        if isinstance(c, (int, Fraction)) or type(c) is Rat:
            return _coerce(c)
        raise TypeError("cannot coerce %r" % (c,))

    def qpow(self, k):
        return _qpow_rat(k)

    def kernel(self, phi: QRat, m: int):
        """phi(x) at x = q^m."""
        key = (phi, m)
        v = self._kcache.get(key)
        if v is None:
            v = phi.subs_qpow(m)
            self._kcache[key] = v
        return v

    def from_qrat(self, a: QRat):
        return a

    def cyclic_divisor_inv(self, N, m):
        key = (N, m)
        v = self._cyc.get(key)
        if v is None:
            s = _ZERO
            for j in range(N):
                s = s + _qpow_rat(-j * m)
            v = s.inverse()
            self._cyc[key] = v
        return v

    def describe(self):
        return {"mode": "exact"}


class NumericField:
    """Coefficients are rationals: q is specialised to a fixed q0."""

    exact = False
    name = "numeric"

    def __init__(self, q0=None):
        self.q0 = default_q0() if q0 is None else rat(q0)
        self.zero = Rat(0)
        self.one = Rat(1)
        self._kcache = {}
        self._cyc = {}
        self._qp = {}

    def const(self, n, d=1):
        return rat(n, d)

    def coerce(self, c):
        if isinstance(c, QRat):
            return c.evaluate(self.q0)
        if type(c) is Rat:
            return c
        return rat(c)

    def qpow(self, k):
        v = self._qp.get(k)
        if v is None:
            v = self.q0 ** k
            self._qp[k] = v
        return v

    def kernel(self, phi: QRat, m: int):
        key = (phi, m)
        v = self._kcache.get(key)
        if v is None:
            x = self.qpow(m)
            d = phi.den(x)
            if d == 0:
                # removable singularity at a special point: reduce exactly first
                v = phi.subs_qpow(m).evaluate(self.q0)
            else:
                v = phi.num(x) / d
            self._kcache[key] = v
        return v

    def from_qrat(self, a: QRat):
        return a.evaluate(self.q0)

    def cyclic_divisor_inv(self, N, m):
        key = (N, m)
        v = self._cyc.get(key)
        if v is None:
            s = Rat(0)
            for j in range(N):
                s += self.qpow(-j * m)
            if s == 0:
                raise PoleError("cyclic sum vanishes at q0=%s, mode %d" % (self.q0, m))
            v = 1 / s
            self._cyc[key] = v
        return v

    def describe(self):
        return {"mode": "numeric", "q0": str(self.q0)}


_FIELD = [ExactField()]


def field():
    """The active coefficient field."""
    return _FIELD[-1]


@contextmanager
def use_field(f):
    _FIELD.append(f)
    try:
        yield f
    finally:
        _FIELD.pop()


def make_field(mode="exact", q0=None):
    if mode == "exact":
        return ExactField()
    if mode == "numeric":
        return NumericField(q0)
    raise ValueError("unknown coefficient mode %r" % mode)
