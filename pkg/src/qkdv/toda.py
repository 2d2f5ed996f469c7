"""q-deformed affine and finite Toda equations.

Elements of the Q-extension are finite sums  sum_e c_e(z) Q(z)^e  with
c_e in the Lambda-ring (Lambda_i[0] formal units, degree cap) and
Q(z)^e = prod_i Q_i(z)^e_i.  Shifts are normalized with Q_i(zq) = Lambda_i(z) Q_i(z),
so only base-point symbols Q_i(z) ever appear.  On the reduced space
(Lambda_1...Lambda_N = 1) also Q_1...Q_N = 1 and grades have N-1 entries.
"""

from __future__ import annotations

from .coeffs import QRat, X as XVAR, field
from .modering import (
    MASK, NotTotalDifference, Poly, Ring, WindowConfig, poly_sum, series_inverse, transfer,
)
from .opalg import PseudoDiffOp, op_inverse, op_mul
from . import poisson
from .hierarchy_kdv import CheckFailure, make_ring, require_equal, require_zero


class TodaContext:
    """Ring, Lambda series and the shift factors for one (N, window, reduced, degcap)."""

    def __init__(self, N, window: WindowConfig, reduced=False, degcap=None):
        if N < 2:
            raise ValueError("N must be >= 2")
        self.N = N
        self.window = window
        self.reduced = reduced
        self.degcap = window.degcap if degcap is None else degcap
        self.nq = N - 1 if reduced else N
        self.ring = make_ring({"LAM": self.nq}, window, ("LAM",), 0, self.degcap)
        self._lam = {}
        self._inv = {}
        self._F = {}
        self._Fe = {}

    # -- Lambda series -------------------------------------------------------
    def idx(self, i):
        return (i - 1) % self.N + 1

    def lam(self, i) -> Poly:
        i = self.idx(i)
        v = self._lam.get(i)
        if v is None:
            R = self.ring
            if self.reduced and i == self.N:
                prod = R.one()
                for k in range(1, self.N):
                    prod = prod * R.series("LAM", k)
                v = series_inverse(prod, self.degcap)
            else:
                v = R.series("LAM", i)
            self._lam[i] = v
        return v

    def lam_inv(self, i) -> Poly:
        i = self.idx(i)
        v = self._inv.get(i)
        if v is None:
            v = series_inverse(self.lam(i), self.degcap)
            self._inv[i] = v
        return v

    # -- grades ----------------------------------------------------------------
    def grade(self, i, p=1):
        """Grade vector of Q_i^p."""
        i = self.idx(i)
        if self.reduced and i == self.N:
            return tuple([-p] * self.nq)
        return tuple(p if k == i else 0 for k in range(1, self.nq + 1))

    def shift_factor(self, i, j) -> Poly:
        """F with Q_i(z q^j) = F(z) Q_i(z), for a base symbol i <= nq."""
        key = (i, j)
        v = self._F.get(key)
        if v is None:
            R = self.ring
            v = R.one()
            if j > 0:
                for k in range(j):
                    v = v * self.lam(i).shift(k)
            elif j < 0:
                for k in range(j, 0):
                    v = v * self.lam_inv(i).shift(k)
            self._F[key] = v
        return v

    def grade_factor(self, e, j) -> Poly:
        key = (e, j)
        v = self._Fe.get(key)
        if v is None:
            v = self.ring.one()
            for i, ei in enumerate(e, start=1):
                if ei:
                    f = self.shift_factor(i, j if ei > 0 else -j)
                    # Q_i^-1 (z q^j) = F_i(j)^-1 Q_i^-1 and F_i(j)^-1 = F_i(-j)(z q^j)
                    if ei < 0:
                        f = f.shift(j)
                    for _ in range(abs(ei)):
                        v = v * f
            self._Fe[key] = v
        return v

    # -- elements -------------------------------------------------------------
    def zero(self):
        return QExt(self, {})

    def one(self):
        return QExt(self, {self.zero_grade: self.ring.one()})

    @property
    def zero_grade(self):
        return tuple([0] * self.nq)

    def scalar(self, p: Poly):
        return QExt(self, {self.zero_grade: p} if p.t else {})

    def Q(self, i, p=1):
        return QExt(self, {self.grade(i, p): self.ring.one()})

    def A(self, i):
        """A_i = Q_{i-1} Q_i^-1."""
        return self.Q(i - 1) * self.Q(i, -1)

    def S(self, i):
        """S_i(z) = Q_i(z) Q_{i+1}(zq)^-1."""
        return self.Q(i) * self.Q(i + 1, -1).shift(1)


class QExt:
    """sum_e c_e Q^e; the coefficient interface used by the operator algebra."""

    __slots__ = ("ctx", "c")

    def __init__(self, ctx: TodaContext, comps):
        self.ctx = ctx
        self.c = {e: p for e, p in comps.items() if p.t}

    def _lift(self, other):
        if isinstance(other, QExt):
            return other
        if isinstance(other, Poly):
            return self.ctx.scalar(other)
        return self.ctx.scalar(self.ctx.ring.const(other))

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.c)
        for e, p in other.c.items():
            out[e] = out[e] + p if e in out else p
        return QExt(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return QExt(self.ctx, {e: -p for e, p in self.c.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Poly):
            return QExt(self.ctx, {e: p * other for e, p in self.c.items()})
        if not isinstance(other, QExt):
            return QExt(self.ctx, {e: p.scale(other) for e, p in self.c.items()})
        out = {}
        for e, p in self.c.items():
            for f, r in other.c.items():
                g = tuple(a + b for a, b in zip(e, f))
                v = p * r
                out[g] = out[g] + v if g in out else v
        return QExt(self.ctx, out)

    def __rmul__(self, other):
        if isinstance(other, Poly):
            return self * other
        return self * other

    def shift(self, j):
        if j == 0:
            return self
        ctx = self.ctx
        return QExt(ctx, {e: p.shift(j) * ctx.grade_factor(e, j) for e, p in self.c.items()})

    def is_zero(self):
        return not self.c

    def grades(self):
        return sorted(self.c)

    def part(self, e) -> Poly:
        return self.c.get(e, self.ctx.ring.zero())

    def truncate_deg(self, d):
        return QExt(self.ctx, {e: p.truncate_deg(d) for e, p in self.c.items()})

    def __eq__(self, other):
        if not isinstance(other, QExt):
            return NotImplemented
        return (self - other).is_zero()

    def __str__(self):
        if not self.c:
            return "0"
        parts = []
        for e in self.grades():
            mono = "*".join(("Q%d" % i if k == 1 else "Q%d^%d" % (i, k))
                            for i, k in enumerate(e, start=1) if k) or "1"
            parts.append("(%s)*%s" % (self.c[e], mono))
        return " + ".join(parts)


def require_qext_equal(a: QExt, b: QExt, what):
    d = a - b
    for e in d.grades():
        p = d.c[e]
        k, c = min(p.t.items(), key=lambda kc: p.ring.sort_key(kc[0]))
        raise CheckFailure("%s: differ in grade %s" % (what, e), "%s*%s" % (c, p.ring.monomial_str(k)))


# ---------------------------------------------------------------------------
# kernels: S-brackets certified from the Q-brackets
# ---------------------------------------------------------------------------

def kappa(N):
    """kappa[k][i] with {Lambda_k(z), S_i(w)} = kappa_ki delta(w/z) Lambda_k(z) S_i(w).

    Derived from the Q-kernels: with {Lambda_k(z), Q_j(w)} = sum_m (w/z)^m Psi_kj(q^m) Lambda_k Q_j
    the bracket with S_i = Q_i(w) Q_{i+1}(wq)^-1 has kernel Psi_ki(x) - x Psi_k,i+1(x);
    it is certified to be a constant.
    """
    KQ = poisson.q_kernels(N)
    out = {}
    for k in range(1, N + 1):
        for i in range(1, N + 1):
            j = i % N + 1
            a = KQ.given(poisson.Factor("LAM", k), poisson.Factor("Q", i)).terms[0].phi
            b = KQ.given(poisson.Factor("LAM", k), poisson.Factor("Q", j)).terms[0].phi
            kap = a - XVAR * b
            num, den = kap.canonical()
            if num.degree() > 0 or den.degree() > 0:
                raise CheckFailure("S-bracket kernel is not local", "k=%d, i=%d: %s" % (k, i, kap))
            c = kap.num.coeffs()[0] if num else 0
            out[(k, i)] = int(c)
    return out


def expected_kappa(N, k, i):
    if k == i:
        return -1
    if (k - 2) % N + 1 == i:
        return 1
    return 0


def check_q_kernel_consistency(N):
    """Bracketing Q_j(wq) = Lambda_j(w) Q_j(w) reproduces the Lambda-Lambda kernels."""
    KQ = poisson.q_kernels(N)
    KH = poisson.heisenberg(N)
    for k in range(1, N + 1):
        for j in range(1, N + 1):
            psi = KQ.given(poisson.Factor("LAM", k), poisson.Factor("Q", j)).terms[0].phi
            phi = KH.get(poisson.Factor("LAM", k), poisson.Factor("LAM", j)).terms[0].phi
            if psi * (XVAR - 1) != phi:
                raise CheckFailure("Q-kernel inconsistent with the Lambda bracket", "k=%d, j=%d" % (k, j))


# ---------------------------------------------------------------------------
# the equation
# ---------------------------------------------------------------------------

def toda_rhs(ctx: TodaContext):
    """{i: A_i - A_{i+1}(zq)} for i = 1..N."""
    return {i: ctx.A(i) - ctx.A(i + 1).shift(1) for i in range(1, ctx.N + 1)}


def screening_flow(ctx: TodaContext, screenings):
    """{i: sum_{j in screenings} kappa_ij Lambda_i S_j}."""
    kap = kappa(ctx.N)
    out = {}
    for i in range(1, ctx.N + 1):
        acc = ctx.zero()
        for j in screenings:
            c = kap[(i, j)]
            if c:
                acc = acc + (ctx.scalar(ctx.lam(i)) * ctx.S(j)) * c
        out[i] = acc
    return out


def check_qdiff(ctx: TodaContext):
    """A_i(zq) = Lambda_{i-1} Lambda_i^-1 A_i and S_i(zq) = Lambda_i Lambda_{i+1}(zq)^-1 S_i."""
    for i in range(1, ctx.N + 1):
        lhs = ctx.A(i).shift(1)
        rhs = ctx.A(i) * (ctx.lam(i - 1) * ctx.lam_inv(i))
        require_qext_equal(lhs, rhs, "A_%d(zq)" % i)
        lhs = ctx.S(i).shift(1)
        rhs = ctx.S(i) * (ctx.lam(i) * ctx.lam_inv(i + 1).shift(1))
        require_qext_equal(lhs, rhs, "S_%d(zq)" % i)


def check_hamiltonian_form(ctx: TodaContext):
    """d_t Lambda_i = {Lambda_i, sum_j int S_j} equals A_i - A_{i+1}(zq)."""
    rhs = toda_rhs(ctx)
    fl = screening_flow(ctx, range(1, ctx.N + 1))
    for i in rhs:
        require_qext_equal(fl[i], rhs[i], "hamiltonian form, Lambda_%d" % i)
    return rhs


def check_product_constraint(ctx: TodaContext, flow):
    """sum_i (prod_{k != i} Lambda_k) d Lambda_i = 0."""
    acc = ctx.zero()
    for i in range(1, ctx.N + 1):
        p = ctx.ring.one()
        for k in range(1, ctx.N + 1):
            if k != i:
                p = p * ctx.lam(k)
        acc = acc + flow[i] * p
    require_qext_equal(acc, ctx.zero(), "d(Lambda_1 ... Lambda_N)")


def lax_check(ctx: TodaContext, K: int):
    """A_i - (D - Lambda_i) A_{i+1} (D - Lambda_{i+1})^-1 is the scalar A_i - A_{i+1}(zq)."""
    zero = ctx.zero()
    rhs = toda_rhs(ctx)
    for i in range(1, ctx.N + 1):
        f = PseudoDiffOp({1: ctx.one(), 0: -ctx.scalar(ctx.lam(i))}, zero)
        g = PseudoDiffOp({1: ctx.one(), 0: -ctx.scalar(ctx.lam(i + 1))}, zero)
        ginv = op_inverse(g, K)
        X = op_mul(op_mul(f, PseudoDiffOp({0: ctx.A(i + 1)}, zero)), ginv)
        Y = PseudoDiffOp({0: ctx.A(i)}, zero) - X
        for e, c in Y.c.items():
            if e == 0:
                require_qext_equal(c, rhs[i], "D^0 coefficient, i=%d" % i)
            else:
                require_qext_equal(c, zero, "D^%d coefficient, i=%d" % (e, i))


# ---------------------------------------------------------------------------
# integrals in the Q-extension
# ---------------------------------------------------------------------------

def twisted_difference(ctx: TodaContext, g: QExt) -> QExt:
    return g - g.shift(1)


def solve_twisted_difference(ctx: TodaContext, R: QExt) -> QExt:
    """g with g - g(zq) = R, up to the degree cap; raises NotTotalDifference if none.

    Per grade e: c - c(zq) u (1 + rho) = r with u (1 + rho) the shift factor of
    Q^e, u a unit monomial.  Degree by degree, c - u c(zq) = r' is solved along
    the u-chains of monomials: c_k = r_k + q^(-m) c_(k-1), finite iff the
    last value vanishes.
    """
    R = R.truncate_deg(ctx.degcap)
    out = {}
    for e in R.grades():
        out[e] = _solve_grade(ctx, e, R.c[e])
    g = QExt(ctx, out)
    require_qext_equal(twisted_difference(ctx, g).truncate_deg(ctx.degcap), R, "twisted difference witness")
    return g


def _solve_grade(ctx, e, r: Poly) -> Poly:
    ring = ctx.ring
    F = field()
    fac = ctx.grade_factor(e, 1)
    lead = fac.deg_part(0)
    if len(lead.t) != 1:
        raise CheckFailure("shift factor without a unit leading monomial", str(lead))
    (ukey, uc), = lead.t.items()
    du = ukey - ring.BASE
    c = ring.zero()
    for d in range(0, ctx.degcap + 1):
        cur = c - c.shift(1) * fac
        res_d = (r - cur).deg_part(d)
        if not res_d.t:
            continue
        c = c + _solve_chain(ring, F, res_d, du, uc, e)
    return c


def _solve_chain(ring, F, r: Poly, du, uc, e):
    """Solve c - uc * u * c(zq) = r with c supported on the u-chains of r."""
    mo = Ring.mode_of
    if du == 0:
        out = {}
        for k, v in r.t.items():
            m = mo(k)
            lam = uc * F.qpow(-m)
            den = F.one - lam
            if not den:
                raise NotTotalDifference("grade %s: nonzero 0th Fourier coefficient" % (e,), ring.monomial_str(k))
            out[k] = v / den
        return Poly(ring, out)
    # position along the chain from the exponent of the first unit moved by u
    i0 = None
    eps = 0
    for i, ex in ring.decode(ring.BASE + du):
        if ring.is_unit[i]:
            i0, eps = i, ex
            break
    if i0 is None:
        raise CheckFailure("unit factor without unit generators", str(du))
    chains = {}
    for k, v in r.t.items():
        p = ring.exponent(k, i0)
        pos = (p - p % abs(eps)) // eps
        cid = k - pos * du
        chains.setdefault(cid, {})[pos] = v
    out = {}
    for cid, members in chains.items():
        lo, hi = min(members), max(members)
        m = mo(cid)
        lam = uc * F.qpow(-m)
        prev = F.zero
        for pos in range(lo, hi + 1):
            val = members.get(pos, F.zero) + lam * prev
            if pos == hi:
                if val:
                    raise NotTotalDifference("grade %s: not a twisted total difference" % (e,),
                                             ring.monomial_str(cid + hi * du))
            elif val:
                out[cid + pos * du] = val
            prev = val
    return Poly(ring, out)


def functional_gradients(ctx: TodaContext, H: Poly):
    """{k: G_k(z)} with G_k = sum_a dH/dLambda_k[a] (mode -a), at the point."""
    out = {}
    R = H.ring
    for i, g in H.grads().items():
        gen = R.gens[i]
        g0 = transfer(g.restrict(0), ctx.ring, drop_missing=True)
        k = gen.component
        out[k] = out[k] + g0 if k in out else g0
    return out


def bracket_with_screening(ctx: TodaContext, H: Poly, j: int) -> QExt:
    """The density of {H, int S_j}: sum_k G_k kappa_kj Lambda_k S_j."""
    kap = kappa(ctx.N)
    G = functional_gradients(ctx, H)
    acc = ctx.zero()
    for k, g in G.items():
        c = kap[(k, j)]
        if c:
            acc = acc + ctx.S(j) * (g * ctx.lam(k)) * c
    return acc


def check_conservation(ctx: TodaContext, H: Poly, screenings=None):
    """{H, int S_j} = 0 for each j separately; returns the witnesses."""
    screenings = range(1, ctx.N + 1) if screenings is None else screenings
    out = {}
    for j in screenings:
        R = bracket_with_screening(ctx, H, j)
        out[j] = solve_twisted_difference(ctx, R)
    return out


def screening_derivation_on_miura(ctx: TodaContext, j: int):
    """delta_j(L_1) with delta_j(D - Lambda_k) = -kappa_kj Lambda_k S_j."""
    kap = kappa(ctx.N)
    zero = ctx.zero()
    facs = [PseudoDiffOp({1: ctx.one(), 0: -ctx.scalar(ctx.lam(k))}, zero) for k in range(1, ctx.N + 1)]
    acc = PseudoDiffOp({}, zero)
    for k in range(1, ctx.N + 1):
        c = kap[(k, j)]
        if not c:
            continue
        d = PseudoDiffOp({0: (ctx.scalar(ctx.lam(k)) * ctx.S(j)) * (-c)}, zero)
        term = None
        for idx, f in enumerate(facs, start=1):
            x = d if idx == k else f
            term = x if term is None else op_mul(term, x)
        acc = acc + term
    return acc


def check_screening(ctx: TodaContext, screenings=None):
    """Coefficients of L_1 are annihilated by delta_j, j = 1..N-1."""
    screenings = range(1, ctx.N) if screenings is None else screenings
    for j in screenings:
        dL = screening_derivation_on_miura(ctx, j)
        for e, c in dL.c.items():
            require_qext_equal(c.truncate_deg(ctx.degcap), ctx.zero(), "delta_%d L_1 at D^%d" % (j, e))


# ---------------------------------------------------------------------------
# N = 2 sine-Gordon
# ---------------------------------------------------------------------------

def sine_gordon(ctx: TodaContext):
    """Returns (rhs, displayed rhs, density, displayed density) for N = 2, reduced."""
    if ctx.N != 2 or not ctx.reduced:
        raise ValueError("sine-Gordon needs the reduced N = 2 context")
    Q = ctx.Q(1)
    Qi = ctx.Q(1, -1)
    shown_rhs = Qi * Qi - (Q * Q).shift(1)
    shown_H = Q * Q.shift(1) + Qi * Qi.shift(1)
    return toda_rhs(ctx)[1], shown_rhs, ctx.S(1) + ctx.S(2), shown_H


def check_sine_gordon(ctx: TodaContext):
    rhs, shown_rhs, dens, shown_H = sine_gordon(ctx)
    require_qext_equal(rhs, shown_rhs, "sine-Gordon equation")
    require_qext_equal(dens, shown_H, "sine-Gordon hamiltonian density")
    fl = screening_flow(ctx, (1, 2))
    require_qext_equal(fl[1], rhs, "sine-Gordon hamiltonian form")


def mkdv_hamiltonian_for(ctx: TodaContext, n: int) -> Poly:
    """bold H_n in a ring wide enough for exact gradients at the degree cap."""
    from .miura_mkdv import MKdVState, mkdv_hamiltonian
    w = WindowConfig(ctx.window.M_pt, ctx.window.M_expr, ctx.window.K, ctx.degcap)
    S = MKdVState(ctx.N, w, ctx.reduced)
    return mkdv_hamiltonian(S, n, S.ring(outer=1, degree=max(n, ctx.degcap), extra_cap=1))
