"""The q-KdV hierarchy: Lax flows, both hamiltonian constructions, q-KP and checks.

L = D^N - t_1(z) D^(N-1) + t_2(z) D^(N-2) - ... + (-1)^N t_N(z), with t_N = 1
on the reduced space.  Flows are derivations on generators, stored as
{(family, component): series at the point}.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coeffs import QRat, field
from .modering import (
    GeneratorId, Poly, Ring, WindowConfig, cyclic_sum_invert, one_minus_D,
    poly_sum, total_difference_witness, transfer,
)
from .opalg import (
    PseudoDiffOp, commutator, expand_in_root, nth_root, op_mul, op_parts, res,
)
from . import poisson


class CheckFailure(AssertionError):
    """A verification identity failed; ``witness`` names an offending monomial."""

    def __init__(self, msg, witness=None):
        super().__init__(msg if witness is None else "%s (witness: %s)" % (msg, witness))
        self.witness = witness


def first_difference(a: Poly, b: Poly):
    """None if a == b, else a printable monomial where they differ."""
    d = a - transfer(b, a.ring) if b.ring is not a.ring else a - b
    if not d.t:
        return None
    k, c = min(d.t.items(), key=lambda kc: d.ring.sort_key(kc[0]))
    return "%s*%s" % (c, d.ring.monomial_str(k))


def require_equal(a: Poly, b: Poly, what):
    w = first_difference(a, b)
    if w is not None:
        raise CheckFailure("%s: sides differ" % what, w)


def require_zero(a: Poly, what):
    if a.t:
        k, c = min(a.t.items(), key=lambda kc: a.ring.sort_key(kc[0]))
        raise CheckFailure("%s: nonzero" % what, "%s*%s" % (c, a.ring.monomial_str(k)))


# ---------------------------------------------------------------------------
# state, rings, operators
# ---------------------------------------------------------------------------

_RINGS = {}


def make_ring(families, window, units=(), outer=0, degcap=None):
    key = (tuple(sorted(families.items())), window, tuple(sorted(units)), outer, degcap)
    r = _RINGS.get(key)
    if r is None:
        r = Ring(families, window, units, outer, degcap)
        _RINGS[key] = r
    return r


@dataclass
class KdVState:
    N: int
    window: WindowConfig
    reduced: bool = True

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")

    @property
    def ncomp(self):
        return self.N - 1 if self.reduced else self.N

    def ring(self, outer=0, degree=1):
        w = self.window.inflated(degree) if outer else self.window
        return make_ring({"T": self.ncomp}, w, (), outer)

    def t(self, ring, i):
        """t_i(z) as a series (t_0 = 1, t_N = 1 when reduced, 0 outside 0..N)."""
        if i == 0 or (self.reduced and i == self.N):
            return ring.one()
        if i < 0 or i > self.N:
            return ring.zero()
        return ring.series("T", i)

    def L(self, ring) -> PseudoDiffOp:
        c = {}
        for i in range(0, self.N + 1):
            ti = self.t(ring, i)
            c[self.N - i] = ti if i % 2 == 0 else -ti
        return PseudoDiffOp(c, ring.zero())


def operator_root_power(L: PseudoDiffOp, N: int, n: int, depth=0):
    """P^n with P = L^(1/N), known down to D^-depth."""
    K = max(n + depth, 1)
    P, pw = nth_root(L, N, K, want_powers=True)
    if n <= N:
        return pw[n - 1] if n >= 1 else PseudoDiffOp.D(L.zero, 0)
    out = pw[N - 1]
    k = N
    while k + N <= n:
        k += N
        out = op_mul(out, pw[N - 1], -depth - (n - k))
    if k < n:
        out = op_mul(out, pw[n - k - 1], -depth)
    return out


def root_power(S: KdVState, ring, n, depth=0):
    return operator_root_power(S.L(ring), S.N, n, depth)


def lax_flow_operator(L: PseudoDiffOp, N: int, n: int, check=True):
    """[L, (L^(n/N))_+], cross-checked against -[L, (L^(n/N))_-]."""
    Pn = operator_root_power(L, N, n, depth=N if check else 0)
    plus, minus, _ = op_parts(Pn)
    dL = commutator(L, plus)
    if check:
        alt = -commutator(L, minus, floor=0)
        for e in set(dL.c) | set(alt.c):
            if e < 0:
                continue
            require_equal(dL.coeff(e), alt.coeff(e), "[L,P^n_+] = -[L,P^n_-] at D^%d" % e)
        for e, c in dL.c.items():
            if e >= N or (e < 0 and c.t):
                raise CheckFailure("flow not supported on D^0..D^(N-1)", "D^%d" % e)
    return dL


def read_flow(S: KdVState, dL: PseudoDiffOp):
    """{('T', i): series} from an operator supported on D^0..D^(N-1)."""
    out = {}
    for i in range(1, S.ncomp + 1):
        c = dL.coeff(S.N - i)
        out[("T", i)] = c if i % 2 == 0 else -c
    return out


def qkdv_flow(S: KdVState, n: int, ring=None, check=True):
    """d/dtau_n t_i = coefficient of [L, (L^(n/N))_+], for each component."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ring = ring or S.ring()
    dL = lax_flow_operator(S.L(ring), S.N, n, check)
    if check and S.reduced:
        require_zero(dL.coeff(0), "d t_N")
    return read_flow(S, dL)


def qkdv1_formula(S: KdVState, ring=None):
    """The first flow written out with b, (1 + D + ... + D^(N-1)) b = -t_1."""
    ring = ring or S.ring()
    N = S.N
    b = cyclic_sum_invert(-S.t(ring, 1), N)
    out = {}
    for i in range(1, S.ncomp + 1):
        ti = S.t(ring, i)
        t1 = S.t(ring, i + 1)
        out[("T", i)] = ti * (b.shift(N - i) - b) + t1.shift(1) - t1
    return out


def flow_mode(flow, g: GeneratorId) -> Poly:
    return flow[(g.family, g.component)].mode_part(g.mode)


def res_density(S: KdVState, n: int, ring) -> Poly:
    return res(root_power(S, ring, n))


def hamiltonian_res(S: KdVState, n: int, ring=None) -> Poly:
    """H_n = (N/n) int Res L^(n/N), built over the inflated window."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ring = ring or S.ring(outer=1, degree=n)
    return res_density(S, n, ring).integral().scale(field().const(S.N, n))


def _log_coeffs(us, n, ring):
    """Coefficients of -log(1 + sum_k us[k] s^k) up to s^n (us[0] unused)."""
    # -log(1+u) = sum_j (-1)^j u^j / j
    out = [ring.zero() for _ in range(n + 1)]
    power = [ring.one()] + [ring.zero()] * n
    for j in range(1, n + 1):
        nxt = [ring.zero()] * (n + 1)
        for a in range(n + 1):
            if not power[a].t:
                continue
            for k in range(1, n + 1 - a):
                if us[k].t:
                    nxt[a + k] = nxt[a + k] + power[a] * us[k]
        power = nxt
        c = field().const((-1) ** j, j)
        for a in range(n + 1):
            if power[a].t:
                out[a] = out[a] + power[a].scale(c)
    return out


@dataclass
class CwfResult:
    n: int
    h: Poly
    res_part: Poly
    witness: Poly


def hamiltonian_cwf(S: KdVState, n: int, ring=None) -> CwfResult:
    """h_n from D = P + sum_i f_i P^-i and the witness g_n with (1-D) g_n = h_n - (1/n) Res P^n.

    Generating series: sum_{n>0} h_n s^n = -log(1 + sum_{i>=0} f_i s^(i+1)).
    """
    ring = ring or S.ring()
    L = S.L(ring)
    P = nth_root(L, S.N, n + 1)
    fs = expand_in_root(P, n)
    us = [ring.zero()] + [fs[i - 1] for i in range(1, n + 1)]
    h = _log_coeffs(us, n, ring)[n]
    rp = res_density(S, n, ring).scale(field().const(1, n))
    R = h - rp
    g = total_difference_witness(R)
    require_equal(one_minus_D(g), R, "(1-D) g_%d" % n)
    return CwfResult(n, h, rp, g)


# ---------------------------------------------------------------------------
# derivations and brackets
# ---------------------------------------------------------------------------

def apply_derivation(E: Poly, flow, target: Ring) -> Poly:
    """sum_g dE/dg * flow(g), evaluated at the point, in the target ring."""
    acc = []
    R = E.ring
    for i, g in E.grads().items():
        gen = R.gens[i]
        s = flow.get((gen.family, gen.component))
        if s is None:
            continue
        v = s.mode_part(gen.mode)
        if not v.t:
            continue
        g0 = g.restrict(0)
        if not g0.t:
            continue
        acc.append(transfer(g0, target) * transfer(v, target))
    return poly_sum(target, acc)


def kernels(S: KdVState, which):
    if which == 1:
        return poisson.kdv_first(S.N, S.reduced)
    if which == 2:
        return poisson.kdv_second(S.N, S.reduced)
    raise ValueError("bracket must be 1 or 2")


def hamiltonian_flow(S: KdVState, H: Poly, which, target=None):
    """{t_i(z), H}_which for each component, at the point."""
    K = kernels(S, which)
    target = target or S.ring()
    return {("T", i): transfer(poisson.field_bracket(poisson.Factor("T", i), H, K), target)
            for i in range(1, S.ncomp + 1)}


def check_heredity(S: KdVState, n: int):
    """d_tau_n L = {L, H_{n+N}}_1 = {L, H_n}_2 on every component."""
    pt = S.ring()
    lax = qkdv_flow(S, n, pt)
    H2 = hamiltonian_res(S, n)
    H1 = hamiltonian_res(S, n + S.N)
    f2 = hamiltonian_flow(S, H2, 2, pt)
    f1 = hamiltonian_flow(S, H1, 1, pt)
    for key in lax:
        require_equal(f2[key], lax[key], "{t_%d, H_%d}_2 vs Lax flow" % (key[1], n))
        require_equal(f1[key], lax[key], "{t_%d, H_%d}_1 vs Lax flow" % (key[1], n + S.N))
    return lax


def check_flow_commutation(S: KdVState, n: int, m: int):
    """[d_n, d_m] t_i = 0 on all windowed generators."""
    pt = S.ring()
    deg = max(n, m) + 1
    big = S.ring(outer=1, degree=deg)
    fn, fm = qkdv_flow(S, n, pt), qkdv_flow(S, m, pt)
    Fn, Fm = qkdv_flow(S, n, big, check=False), qkdv_flow(S, m, big, check=False)
    for key in fn:
        d = apply_derivation(Fn[key], fm, pt) - apply_derivation(Fm[key], fn, pt)
        require_zero(d, "[d_%d, d_%d] t_%d" % (n, m, key[1]))


def check_conservation(S: KdVState, m: int, n: int):
    """d_m Res L^(n/N) = (1-D) g with g exhibited; returns g."""
    pt = S.ring()
    big = S.ring(outer=1, degree=max(n, m) + 1)
    fm = qkdv_flow(S, m, pt)
    dens = res_density(S, n, big)
    R = apply_derivation(dens, fm, pt)
    g = total_difference_witness(R)
    require_equal(one_minus_D(g), R, "(1-D) g for d_%d Res L^(%d/N)" % (m, n))
    return g


def check_hamiltonians_commute(S: KdVState, n: int, m: int):
    Hn = hamiltonian_res(S, n, S.ring(outer=1, degree=n + m))
    Hm = hamiltonian_res(S, m, Hn.ring)
    for which in (1, 2):
        require_zero(poisson.bracket(Hn, Hm, kernels(S, which)), "{H_%d, H_%d}_%d" % (n, m, which))


# ---------------------------------------------------------------------------
# N = 2 closed forms
# ---------------------------------------------------------------------------

def _qr(k):
    return QRat.qpow(k)


def _c(x: QRat):
    return field().coerce(x)


def n2_h3_formula(ring) -> Poly:
    """-(1/2) t[0] + (1/3) sum_{i+j+k=0} t_i t_j t_k / ((1+q^i)(1+q^j)(1+q^k))."""
    M = ring.M
    acc = [ring.gen("T", 1, 0).scale(field().const(-1, 2))]
    third = QRat.const(1) / 3
    for i in range(-M, M + 1):
        for j in range(-M, M + 1):
            k = -i - j
            if abs(k) > M:
                continue
            c = third / ((1 + _qr(i)) * (1 + _qr(j)) * (1 + _qr(k)))
            acc.append((ring.gen("T", 1, i) * ring.gen("T", 1, j) * ring.gen("T", 1, k)).scale(_c(c)))
    return poly_sum(ring, acc)


def n2_tau1_formula(ring) -> Poly:
    """-sum_{i,j} (1-q^(i+j)) / ((1+q^i)(1+q^j)) t_i t_j z^(-i-j)."""
    M = ring.M
    acc = []
    for i in range(-M, M + 1):
        for j in range(-M, M + 1):
            c = -(1 - _qr(i + j)) / ((1 + _qr(i)) * (1 + _qr(j)))
            acc.append((ring.gen("T", 1, i) * ring.gen("T", 1, j)).scale(_c(c)))
    return poly_sum(ring, acc)


def n2_tau3_formula(ring) -> Poly:
    """The displayed closed form of the third flow at N = 2."""
    M = ring.M
    acc = [n2_tau1_formula(ring).scale(field().const(3, 2))]
    gens = [ring.gen("T", 1, i) for i in range(-M, M + 1)]
    for i in range(-M, M + 1):
        for j in range(-M, M + 1):
            if (1 + _qr(-i - j)) == 0:
                continue
            base = (1 + _qr(i)) * (1 + _qr(j)) * (1 + _qr(-i - j))
            tij = gens[i + M] * gens[j + M]
            for k in range(-M, M + 1):
                c = (1 - _qr(i + j + k)) / (base * (1 + _qr(i + j + k)))
                tijk = tij * gens[k + M]
                for l in range(-M, M + 1):
                    acc.append((tijk * gens[l + M]).scale(_c(c)))
    return poly_sum(ring, acc)


def j2(ring) -> Poly:
    """J_2 = sum_{0<i<=M} i q^i / (1 - q^(2i)) t_i t_-i."""
    acc = []
    for i in range(1, ring.M + 1):
        c = QRat.const(i) * _qr(i) / (1 - _qr(2 * i))
        acc.append((ring.gen("T", 1, i) * ring.gen("T", 1, -i)).scale(_c(c)))
    return poly_sum(ring, acc)


# ---------------------------------------------------------------------------
# q-KP
# ---------------------------------------------------------------------------

def qkp_ring(C: int, window: WindowConfig, outer=0, degree=1):
    """Generators p_c[m]: p_c is the coefficient of D^(1-c) (c = 1 is the D^0 term)."""
    w = window.inflated(degree) if outer else window
    return make_ring({"P": C}, w, (), outer)


def qkp_operator(ring, C: int, K: int) -> PseudoDiffOp:
    c = {1: ring.one()}
    for k in range(1, C + 1):
        c[1 - k] = ring.series("P", k)
    return PseudoDiffOp(c, ring.zero(), -K)


def qkp_flow(P: PseudoDiffOp, n: int) -> PseudoDiffOp:
    """[P, (P^n)_+], known to the depth of P."""
    if n < 1:
        raise ValueError("n must be >= 1")
    Pn = PseudoDiffOp.D(P.zero, 0)
    for _ in range(n):
        Pn = op_mul(Pn, P)
    plus, _, _ = op_parts(Pn)
    return commutator(P, plus)


def qkp_flow_on_generators(P: PseudoDiffOp, n: int, C: int):
    dP = qkp_flow(P, n)
    return {("P", k): dP.coeff(1 - k) for k in range(1, C + 1)}


def induced_flow_from_root(S: KdVState, n: int, ring=None):
    """d L = sum_j P^j (dP) P^(N-1-j) with dP = [P, (P^n)_+], P = L^(1/N)."""
    ring = ring or S.ring()
    K = n + S.N + 1
    P, pw = nth_root(S.L(ring), S.N, K, want_powers=True)
    dP = qkp_flow(P, n)
    one = PseudoDiffOp.D(ring.zero(), 0)
    acc = None
    for j in range(S.N):
        left = one if j == 0 else pw[j - 1]
        right = one if S.N - 1 - j == 0 else pw[S.N - 2 - j]
        term = op_mul(op_mul(left, dP), right)
        acc = term if acc is None else acc + term
    return read_flow(S, acc)
