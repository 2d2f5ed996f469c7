"""Two-point brackets as data, mode brackets, and the Leibniz engine.

A kernel for the pair (g_i, g_j) describes {g_i(z), g_j(w)} as a list of

* smooth terms   sum_m phi(q^m) (w/z)^m X(z) Y(w)
* delta terms    c * delta(w q^r / z) Y(w) X(z),   delta(x) = sum_m x^m

where X, Y are series factors (a generator family, or the unit).  Reading
off the coefficient of z^-a w^-b gives, for both kinds,

    {g_i[a], g_j[b]} = sum_m c(m) X[a-m] Y[b+m],

with c(m) = phi(q^m) or c q^(r m).  For functionals the same shape gives

    {F, G} = sum_m c(m) A_m B_m,
    A_m = sum_a dF/dg_i[a] X[a-m],   B_m = sum_b dG/dg_j[b] Y[b+m],

which is what :func:`bracket` evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .coeffs import QRat, X as XVAR, field
from .modering import GeneratorId, Poly, Ring, poly_sum


class Factor(NamedTuple):
    family: str
    component: int


@dataclass(frozen=True)
class SmoothTerm:
    phi: QRat                      # rational function of x = q^m
    zfac: Optional[Factor]
    wfac: Optional[Factor]

    def coeff(self, F, m):
        return F.kernel(self.phi, m)

    def swapped(self):
        # phi(q^m)(w/z)^m X(z)Y(w) with z<->w, negated: -phi(q^-m)(w/z)^m Y(z)X(w)
        return SmoothTerm(-_reflect(self.phi), self.wfac, self.zfac)


@dataclass(frozen=True)
class DeltaTerm:
    r: int                         # delta(w q^r / z)
    c: QRat
    wfac: Optional[Factor]
    zfac: Optional[Factor]

    def coeff(self, F, m):
        return F.coerce(self.c) * F.qpow(self.r * m)

    def swapped(self):
        return DeltaTerm(-self.r, -self.c, self.zfac, self.wfac)


def _reflect(phi: QRat) -> QRat:
    """phi(1/x) as a rational function of x."""
    num, den = phi.canonical()
    nc, dc = num.coeffs(), den.coeffs()
    top = max(len(nc), len(dc)) - 1
    from .coeffs import QPoly
    n = QPoly([0] * (top - len(nc) + 1) + list(reversed(nc)))
    d = QPoly([0] * (top - len(dc) + 1) + list(reversed(dc)))
    return QRat(n, d)


@dataclass(frozen=True)
class BracketKernel:
    left: Factor
    right: Factor
    terms: tuple

    def swapped(self):
        return BracketKernel(self.right, self.left, tuple(t.swapped() for t in self.terms))

    def scaled(self, lam):
        lam = QRat.const(lam) if not isinstance(lam, QRat) else lam
        out = []
        for t in self.terms:
            if isinstance(t, SmoothTerm):
                out.append(SmoothTerm(t.phi * lam, t.zfac, t.wfac))
            else:
                out.append(DeltaTerm(t.r, t.c * lam, t.wfac, t.zfac))
        return BracketKernel(self.left, self.right, tuple(out))


class KernelSet:
    """A table of kernels; missing orders are derived by antisymmetry."""

    def __init__(self, name, kernels=(), closed=True):
        self.name = name
        self.table = {}
        for k in kernels:
            self.table[(k.left, k.right)] = k
        self._derived = {}

    def pairs(self):
        return list(self.table)

    def get(self, left, right):
        k = self.table.get((left, right))
        if k is not None:
            return k
        k = self._derived.get((left, right))
        if k is None:
            src = self.table.get((right, left))
            if src is None:
                return None
            k = src.swapped()
            self._derived[(left, right)] = k
        return k

    def given(self, left, right):
        return self.table.get((left, right))

    def combine(self, other, lam_self=1, lam_other=1, name=None):
        keys = set(self.table) | set(other.table)
        for (l, r) in list(other.table):
            if (r, l) in self.table and (l, r) not in self.table:
                keys.discard((l, r))
        out = []
        for key in sorted(keys):
            terms = []
            for ks, lam in ((self, lam_self), (other, lam_other)):
                k = ks.get(*key)
                if k is not None and lam != 0:
                    terms.extend(k.scaled(lam).terms)
            out.append(BracketKernel(key[0], key[1], tuple(terms)))
        return KernelSet(name or "%s+%s" % (self.name, other.name), out)

    def __repr__(self):
        return "KernelSet(%s, %d pairs)" % (self.name, len(self.table))


# ---------------------------------------------------------------------------
# the kernel tables
# ---------------------------------------------------------------------------

_ONE = QRat.const(1)
_MONE = QRat.const(-1)


def _kdv_factor(k, N, reduced):
    """t_k with t_0 = 1 (and t_N = 1 when reduced); 'zero' outside 0..N."""
    if k == 0 or (reduced and k == N):
        return None
    if k < 0 or k > N:
        return "zero"
    return Factor("T", k)


def _delta(r, c, wk, zk, N, reduced):
    wf = _kdv_factor(wk, N, reduced)
    zf = _kdv_factor(zk, N, reduced)
    if wf == "zero" or zf == "zero":
        return None
    return DeltaTerm(r, c, wf, zf)


def kdv_first(N, reduced=False, literal=False):
    """The first bracket on t_1..t_N (t_1..t_{N-1} when reduced).

    The displayed two-delta formula is the derivative of the second bracket
    along t_N -> t_N + e.  The bracket for which the hierarchy is hamiltonian
    and the linear-functional formula holds is the derivative along
    L -> L + e, which is (-1)^N times that; it is the default.
    ``literal=True`` gives the displayed form.
    """
    top = N - 1 if reduced else N
    sgn = 1 if literal or N % 2 == 0 else -1
    one, mone = (_ONE, _MONE) if sgn == 1 else (_MONE, _ONE)
    out = []
    for i in range(1, top + 1):
        for j in range(1, top + 1):
            terms = []
            if i != N and j != N and i + j >= N:
                for t in (_delta(N - j, one, i + j - N, N, N, reduced),
                          _delta(-(N - i), mone, N, i + j - N, N, reduced)):
                    if t is not None:
                        terms.append(t)
            out.append(BracketKernel(Factor("T", i), Factor("T", j), tuple(terms)))
    return KernelSet("kdv1" + ("-literal" if literal and sgn == -1 else ""), out)


def kdv_second(N, reduced=False):
    """The second bracket, given for i <= j; i > j follows by antisymmetry."""
    top = N - 1 if reduced else N
    x = XVAR
    out = []
    for i in range(1, top + 1):
        for j in range(i, top + 1):
            phi = (1 - x ** i) * (1 - x ** (N - j)) / (1 - x ** N)
            terms = []
            if phi:
                terms.append(SmoothTerm(phi, Factor("T", i), Factor("T", j)))
            for r in range(1, min(i, N - j) + 1):
                for t in (_delta(r, _ONE, i - r, j + r, N, reduced),
                          _delta(-(j - i + r), _MONE, j + r, i - r, N, reduced)):
                    if t is not None:
                        terms.append(t)
            out.append(BracketKernel(Factor("T", i), Factor("T", j), tuple(terms)))
    return KernelSet("kdv2", out)


def heisenberg(N):
    """Bracket on Lambda_1..Lambda_N, given for i <= j."""
    x = XVAR
    out = []
    for i in range(1, N + 1):
        fi = Factor("LAM", i)
        out.append(BracketKernel(fi, fi, (SmoothTerm((1 - x) * (1 - x ** (N - 1)) / (1 - x ** N), fi, fi),)))
        for j in range(i + 1, N + 1):
            fj = Factor("LAM", j)
            phi = -(x ** (N + i - j - 1)) * (1 - x) ** 2 / (1 - x ** N)
            out.append(BracketKernel(fi, fj, (SmoothTerm(phi, fi, fj),)))
    return KernelSet("heis", out)


def q_kernels(N):
    """{Lambda_i(z), Q_j(w)} = sum_m psi_ij(q^m) (w/z)^m Lambda_i(z) Q_j(w), one-sided."""
    x = XVAR
    out = []
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if i == j:
                psi = -(1 - x ** (N - 1)) / (1 - x ** N)
            elif i < j:
                psi = x ** (N + i - j - 1) * (1 - x) / (1 - x ** N)
            else:
                psi = x ** (i - j - 1) * (1 - x) / (1 - x ** N)
            out.append(BracketKernel(Factor("LAM", i), Factor("Q", j),
                                     (SmoothTerm(psi, Factor("LAM", i), Factor("Q", j)),)))
    return KernelSet("Q", out)


# ---------------------------------------------------------------------------
# mode brackets
# ---------------------------------------------------------------------------

def _factor_mode(ring, fac, k, outer_ok=True):
    """The generator fac[k] as a Poly (unit factor: delta_{k,0})."""
    if fac is None:
        return ring.one() if k == 0 else None
    g = GeneratorId(fac.family, fac.component, k)
    i = ring.index.get(g)
    if i is None:
        return None
    return Poly(ring, {ring.fac[i]: field().one})


def kernel_to_mode_bracket(K: BracketKernel, a: int, b: int, ring: Ring) -> Poly:
    """{g_i[a], g_j[b]} as a polynomial in the ring's generators."""
    F = field()
    M = ring.M
    acc = []
    for t in K.terms:
        X, Y = t.zfac, t.wfac
        if X is None:
            ms = [a]
        elif Y is None:
            ms = [-b]
        else:
            ms = range(max(a - M, -b - M), min(a + M, -b + M) + 1)
        for m in ms:
            xa = _factor_mode(ring, X, a - m)
            yb = _factor_mode(ring, Y, b + m)
            if xa is None or yb is None:
                continue
            c = t.coeff(F, m)
            if c:
                acc.append((xa * yb).scale(c))
    return poly_sum(ring, acc)


def mode_bracket(kernels: KernelSet, gi: GeneratorId, gj: GeneratorId, ring: Ring) -> Poly:
    K = kernels.get(Factor(gi.family, gi.component), Factor(gj.family, gj.component))
    if K is None:
        raise KeyError("no kernel for the pair %s, %s" % (gi, gj))
    return kernel_to_mode_bracket(K, gi.mode, gj.mode, ring)


# ---------------------------------------------------------------------------
# Leibniz engine
# ---------------------------------------------------------------------------

def _grouped_grads(P: Poly, keep_outer):
    """{(family, comp): {mode: dP/dg}} with gradients restricted to keep_outer."""
    R = P.ring
    out = {}
    for i, g in P.grads().items():
        gen = R.gens[i]
        if keep_outer is not None:
            g = g.restrict(keep_outer)
            if not g.t:
                continue
        out.setdefault(Factor(gen.family, gen.component), {})[gen.mode] = g
    return out


def _correlate(ring, grads, fac, sign, keep_outer):
    """m -> sum_a grads[a] * fac[a - sign*m]  (sign=+1: X[a-m]; sign=-1: Y[b+m])."""
    out = {}
    base = ring.BASE
    one = field().one
    for a, g in grads.items():
        if fac is None:
            m = a * sign
            out.setdefault(m, []).append(g)
            continue
        for k in range(-ring.M, ring.M + 1):
            gi = ring.index.get(GeneratorId(fac.family, fac.component, k))
            if gi is None:
                continue
            kk = ring.fac[gi]
            if keep_outer is not None and (kk & 0xFFFF) > keep_outer:
                continue
            m = (a - k) * sign
            out.setdefault(m, []).append(g.mul_monomial(kk))
    return {m: poly_sum(ring, ps) for m, ps in out.items()}


def bracket(F: Poly, G: Poly, kernels: KernelSet, keep_outer=0) -> Poly:
    """{F, G} via the Leibniz rule; monomials with more than keep_outer outer factors dropped."""
    R = F.ring
    Fc = field()
    gF = _grouped_grads(F, keep_outer)
    gG = _grouped_grads(G, keep_outer)
    acc = []
    for fl, dF in gF.items():
        for fr, dG in gG.items():
            K = kernels.get(fl, fr)
            if K is None:
                continue
            for t in K.terms:
                A = _correlate(R, dF, t.zfac, +1, keep_outer)
                B = _correlate(R, dG, t.wfac, -1, keep_outer)
                for m, am in A.items():
                    bm = B.get(m)
                    if bm is None or not bm.t or not am.t:
                        continue
                    c = t.coeff(Fc, m)
                    if c:
                        acc.append((am * bm).scale(c))
    out = poly_sum(R, acc)
    return out.restrict(keep_outer) if keep_outer is not None else out


def field_bracket(fac: Factor, H: Poly, kernels: KernelSet, keep_outer=0) -> Poly:
    """The series {g(z), H}: coefficient of z^-a is {g[a], H}."""
    R = H.ring
    Fc = field()
    gH = _grouped_grads(H, keep_outer)
    acc = []
    for fr, dH in gH.items():
        K = kernels.get(fac, fr)
        if K is None:
            continue
        for t in K.terms:
            B = _correlate(R, dH, t.wfac, -1, keep_outer)
            if t.zfac is None:
                X = R.one()
            else:
                X = R.series(t.zfac.family, t.zfac.component)
                if keep_outer is not None:
                    X = X.restrict(keep_outer)
            for m, bm in B.items():
                if not bm.t:
                    continue
                c = t.coeff(Fc, m)
                if c:
                    acc.append((bm * X).scale(c))
    out = poly_sum(R, acc)
    return out.restrict(keep_outer) if keep_outer is not None else out


def bracket_pairwise(F: Poly, G: Poly, kernels: KernelSet, keep_outer=0) -> Poly:
    """Same as :func:`bracket` but summing dF/dg dG/dg' {g, g'} over generator pairs.

    Slower; kept as an independent route for cross-checks.
    """
    R = F.ring
    gF = F.grads()
    gG = G.grads()
    acc = []
    cache = {}
    for i, dF in gF.items():
        dF = dF.restrict(keep_outer)
        if not dF.t:
            continue
        for j, dG in gG.items():
            dG = dG.restrict(keep_outer)
            if not dG.t:
                continue
            key = (i, j)
            mb = cache.get(key)
            if mb is None:
                mb = mode_bracket(kernels, R.gens[i], R.gens[j], R).restrict(keep_outer)
                cache[key] = mb
            if mb.t:
                acc.append(dF * dG * mb)
    return poly_sum(R, acc).restrict(keep_outer)


def jacobiator(F: Poly, G: Poly, H: Poly, kernels: KernelSet) -> Poly:
    """{{F,G},H} + {{G,H},F} + {{H,F},G} at the point.

    The inner brackets are kept to first order in the outer generators,
    which is what the outer bracket differentiates; the ring must keep
    monomials with two outer factors.
    """
    if F.ring.outer < 2:
        raise ValueError("Jacobi needs a ring keeping two outer factors")
    FG = bracket(F, G, kernels, keep_outer=1)
    GH = bracket(G, H, kernels, keep_outer=1)
    HF = bracket(H, F, kernels, keep_outer=1)
    return bracket(FG, H, kernels, 0) + bracket(GH, F, kernels, 0) + bracket(HF, G, kernels, 0)


def linear_functional_bracket(X, Y, L, N, kernels_first: KernelSet):
    """(int Res L[X,Y], {l_X, l_Y}_1) for X, Y = sum_{i=1}^{N-1} x_i D^-i.

    l_X(L) = int Res(L X).  Both values are returned so callers can compare.
    """
    from .opalg import commutator, op_mul, res

    for A in (X, Y):
        if any(n >= 0 or n < -(N - 1) for n in A.c):
            raise ValueError("X and Y must be supported on D^-1..D^-(N-1)")
    lhs = res(op_mul(L, commutator(X, Y))).integral()
    lX = res(op_mul(L, X)).integral()
    lY = res(op_mul(L, Y)).integral()
    rhs = bracket(lX, lY, kernels_first, keep_outer=0)
    return lhs, rhs


def random_functional(ring: Ring, factors, rng, max_degree=2, span=1):
    """A random q-local functional of degree <= max_degree (at most 2).

    Linear part a * g[0]; quadratic part sum_m c(m) g[m] g'[-m] with
    c(m) = sum_{|k| <= span} a_k q^(k m), a_k small random integers
    (sum_{0 <= k <= span} a_k (q^(km) + q^(-km)) when both factors agree).
    """
    if max_degree > 2:
        raise ValueError("only degree <= 2 random functionals are provided")
    F = field()
    acc = [ring.const(rng.randint(-3, 3))]
    for f in factors:
        acc.append(ring.gen(f.family, f.component, 0).scale(rng.randint(-3, 3)))
    if max_degree >= 2:
        for x, f in enumerate(factors):
            for g in factors[x:]:
                # on the diagonal only the part even in m survives: use q^(km) + q^(-km)
                ks = range(0, span + 1) if g == f else range(-span, span + 1)
                a = [rng.randint(-3, 3) for _ in ks]
                for m in range(-ring.M, ring.M + 1):
                    c = F.zero
                    for k, ak in zip(ks, a):
                        if ak:
                            c = c + F.qpow(k * m) * ak
                            if g == f:
                                c = c + F.qpow(-k * m) * ak
                    if c:
                        acc.append((ring.gen(f.family, f.component, m)
                                    * ring.gen(g.family, g.component, -m)).scale(c))
    return poly_sum(ring, acc)
