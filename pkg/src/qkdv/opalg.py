"""Pseudo-difference operators sum_n R_n(z) D^n with D f(z) = f(zq) D.

Coefficients are duck-typed: anything with ``+ - *``, unary minus,
``shift(j)`` (f(z) -> f(zq^j)) and ``is_zero()``.  In practice these are
:class:`~qkdv.modering.Poly` series or Toda extension elements.

Every operator records ``valid``: the lowest D-exponent whose coefficient is
known exactly (``None`` for a finite, exactly known operator).  Results of
arithmetic carry the depth that is guaranteed by their inputs.
"""

from __future__ import annotations

from .modering import cyclic_sum_invert

NEG_INF = float("-inf")


def _v(x):
    return NEG_INF if x is None else x


def _unv(x):
    return None if x == NEG_INF else int(x)


class PseudoDiffOp:
    __slots__ = ("c", "valid", "zero")

    def __init__(self, coeffs, zero, valid=None):
        self.zero = zero
        self.valid = valid
        lo = _v(valid)
        self.c = {n: f for n, f in coeffs.items() if n >= lo and not f.is_zero()}

    # -- constructors -------------------------------------------------------
    @classmethod
    def D(cls, zero, k=1, one=None):
        one = zero + 1 if one is None else one
        return cls({k: one}, zero)

    @classmethod
    def scalar(cls, f, zero):
        return cls({0: f}, zero)

    # -- structure ---------------------------------------------------------
    @property
    def top(self):
        return max(self.c) if self.c else None

    def coeff(self, n):
        if self.valid is not None and n < self.valid:
            raise ValueError("D^%d is below the guaranteed depth %d" % (n, self.valid))
        return self.c.get(n, self.zero)

    def exponents(self):
        return sorted(self.c, reverse=True)

    def is_zero(self):
        return not self.c

    def truncate(self, K):
        """Keep exponents >= -K."""
        return PseudoDiffOp(self.c, self.zero, int(max(_v(self.valid), -K)))

    def with_valid(self, valid):
        return PseudoDiffOp(self.c, self.zero, _unv(max(_v(self.valid), _v(valid))))

    # -- arithmetic -------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, PseudoDiffOp):
            other = PseudoDiffOp.scalar(self.zero + other, self.zero)
        valid = _unv(max(_v(self.valid), _v(other.valid)))
        out = dict(self.c)
        for n, f in other.c.items():
            out[n] = out[n] + f if n in out else f
        return PseudoDiffOp(out, self.zero, valid)

    __radd__ = __add__

    def __neg__(self):
        return PseudoDiffOp({n: -f for n, f in self.c.items()}, self.zero, self.valid)

    def __sub__(self, other):
        if not isinstance(other, PseudoDiffOp):
            other = PseudoDiffOp.scalar(self.zero + other, self.zero)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PseudoDiffOp):
            return op_mul(self, other)
        return PseudoDiffOp({n: f * other for n, f in self.c.items()}, self.zero, self.valid)

    def lmul(self, f):
        """f(z) * self (coefficient on the left, no shift)."""
        return PseudoDiffOp({n: f * g for n, g in self.c.items()}, self.zero, self.valid)

    def __pow__(self, n):
        return op_pow(self, n)

    def shift_coeffs(self, j):
        return PseudoDiffOp({n: f.shift(j) for n, f in self.c.items()}, self.zero, self.valid)

    def map_coeffs(self, fn):
        return PseudoDiffOp({n: fn(f) for n, f in self.c.items()}, fn(self.zero), self.valid)

    def __eq__(self, other):
        if not isinstance(other, PseudoDiffOp):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self):
        return "PseudoDiffOp(%s; valid=%s)" % (", ".join("D^%d: %s" % (n, self.c[n]) for n in self.exponents()), self.valid)


def op_mul(A: PseudoDiffOp, B: PseudoDiffOp, floor=None) -> PseudoDiffOp:
    """A*B, computed for exponents >= max(guaranteed depth, floor)."""
    if not A.c or not B.c:
        return PseudoDiffOp({}, A.zero, _unv(max(_v(A.valid), _v(B.valid)) if (A.valid is not None or B.valid is not None) else NEG_INF))
    ta, tb = A.top, B.top
    lo = max(_v(A.valid) + tb, _v(B.valid) + ta)
    if floor is not None:
        lo = max(lo, floor)
    out = {}
    shifted = {}
    for i, a in A.c.items():
        for j, b in B.c.items():
            e = i + j
            if e < lo:
                continue
            key = (j, i)
            sb = shifted.get(key)
            if sb is None:
                sb = b.shift(i)
                shifted[key] = sb
            t = a * sb
            out[e] = out[e] + t if e in out else t
    return PseudoDiffOp(out, A.zero, _unv(lo))


def op_pow(A: PseudoDiffOp, n: int, floor=None) -> PseudoDiffOp:
    if n < 0:
        raise ValueError("negative power: use op_inverse")
    out = PseudoDiffOp.D(A.zero, 0)
    for _ in range(n):
        out = op_mul(out, A, floor)
    return out


def op_parts(A: PseudoDiffOp):
    """(A_+, A_-, Res A)."""
    if A.valid is not None and A.valid > 0:
        raise ValueError("operator not known down to D^0")
    plus = PseudoDiffOp({n: f for n, f in A.c.items() if n >= 0}, A.zero)
    minus = PseudoDiffOp({n: f for n, f in A.c.items() if n < 0}, A.zero, A.valid)
    return plus, minus, A.c.get(0, A.zero)


def op_plus(A):
    return op_parts(A)[0]


def op_minus(A):
    return op_parts(A)[1]


def res(A):
    return op_parts(A)[2]


def commutator(A, B, floor=None):
    return op_mul(A, B, floor) - op_mul(B, A, floor)


def nth_root(L: PseudoDiffOp, N: int, K: int, want_powers=False):
    """Unique P = D + p_0 + p_1 D^-1 + ... + p_K D^-K with P^N = L.

    One coefficient per step; each step is a single cyclic-sum inversion.
    With ``want_powers`` also returns the list [P^1, ..., P^N] (same depth).
    """
    if L.top != N or not (L.c[N] - 1).is_zero():
        raise ValueError("nth_root needs a leading term D^N with unit coefficient")
    zero = L.zero
    one = zero + 1
    # pw[j][e]: coefficient of D^e in P^j, filled from the top down
    pw = {j: {j: one} for j in range(1, N + 1)}
    pw[1][1] = one
    for k in range(0, K + 1):
        c = {1: zero}
        for j in range(2, N + 1):
            e = j - 1 - k
            acc = c[j - 1].shift(1)
            for i in range(0, -k, -1):
                pi = pw[1].get(i)
                if pi is None or pi.is_zero():
                    continue
                prev = pw[j - 1].get(e - i)
                if prev is None or prev.is_zero():
                    continue
                acc = acc + pi * prev.shift(i)
            c[j] = acc
        target = L.coeff(N - 1 - k) if (L.valid is None or N - 1 - k >= L.valid) else None
        if target is None:
            raise ValueError("L not known deep enough for depth %d" % K)
        pk = cyclic_sum_invert(target - c[N], N) if N > 1 else target - c[N]
        pw[1][-k] = pk
        run = pk
        tot = pk
        for j in range(2, N + 1):
            run = run.shift(1)
            tot = tot + run
            pw[j][j - 1 - k] = c[j] + tot
    P = PseudoDiffOp(pw[1], zero, -K)
    if want_powers:
        return P, [PseudoDiffOp(pw[j], zero, j - 1 - K) for j in range(1, N + 1)]
    return P


def op_inverse(A: PseudoDiffOp, K: int) -> PseudoDiffOp:
    """A^-1 down to D^-K, for A with leading coefficient 1."""
    n = A.top
    if n is None or not (A.c[n] - 1).is_zero():
        raise ValueError("op_inverse needs leading coefficient 1")
    zero = A.zero
    valid = -K
    if A.valid is not None:
        valid = max(valid, A.valid - 2 * n)
    kmax = -n - valid
    b = {}
    for k in range(0, kmax + 1):
        acc = (zero + 1) if k == 0 else zero
        for i, a in A.c.items():
            if i >= n:
                continue
            kk = k + i - n
            if kk < 0 or kk not in b:
                continue
            acc = acc - a * b[kk].shift(i)
        b[k] = acc.shift(-n)
    return PseudoDiffOp({-n - k: f for k, f in b.items()}, zero, valid)


def expand_in_root(P: PseudoDiffOp, K: int):
    """Coefficients f_0..f_K with D = P + sum_i f_i P^-i to depth K."""
    zero = P.zero
    Pinv = op_inverse(P, K)
    E = PseudoDiffOp.D(zero, 1) - P
    E = E.with_valid(-K)
    fs = []
    power = PseudoDiffOp.D(zero, 0)
    for i in range(0, K + 1):
        if i > 0:
            power = op_mul(power, Pinv, -K)
        f = E.coeff(-i)
        fs.append(f)
        if not f.is_zero():
            E = E - power.lmul(f)
    return fs


# ---------------------------------------------------------------------------
# small dense matrices of operators
# ---------------------------------------------------------------------------

class MatrixOp:
    __slots__ = ("n", "e", "zero")

    def __init__(self, entries, zero):
        self.e = [list(r) for r in entries]
        self.n = len(self.e)
        self.zero = zero
        if any(len(r) != self.n for r in self.e):
            raise ValueError("matrix of operators must be square")

    def entry(self, i, j):
        x = self.e[i][j]
        return PseudoDiffOp({}, self.zero) if x is None else x

    def __add__(self, other):
        _same(self, other)
        return MatrixOp([[_add(self.e[i][j], other.e[i][j]) for j in range(self.n)] for i in range(self.n)], self.zero)

    def __sub__(self, other):
        _same(self, other)
        return MatrixOp([[_add(self.e[i][j], None if other.e[i][j] is None else -other.e[i][j])
                          for j in range(self.n)] for i in range(self.n)], self.zero)

    def __mul__(self, other):
        return mat_mul(self, other)

    def is_zero(self):
        return all(x is None or x.is_zero() for r in self.e for x in r)


def _same(A, B):
    if A.n != B.n:
        raise ValueError("matrix size mismatch")


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def mat_mul(A: MatrixOp, B: MatrixOp, floor=None) -> MatrixOp:
    _same(A, B)
    n = A.n
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            a = A.e[i][k]
            if a is None or a.is_zero():
                continue
            for j in range(n):
                b = B.e[k][j]
                if b is None or b.is_zero():
                    continue
                out[i][j] = _add(out[i][j], op_mul(a, b, floor))
    return MatrixOp(out, A.zero)


def mat_commutator(A: MatrixOp, B: MatrixOp, floor=None) -> MatrixOp:
    return mat_mul(A, B, floor) - mat_mul(B, A, floor)
