"""Verification suites: named checks, each tied to the identity it certifies.

A check is a callable that raises CheckFailure (or NotTotalDifference) with
a witness monomial when its identity fails and otherwise returns an optional
detail string.  Suites are lists of checks built from a RunConfig.
"""

from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

from .coeffs import make_field, rat, use_field
from .modering import GeneratorId, NotTotalDifference, WindowConfig, poly_sum
from .opalg import PseudoDiffOp, op_pow, nth_root
from . import hierarchy_kdv as hk
from . import miura_mkdv as mk
from . import poisson
from . import toda as td
from . import limits as lm
from .grammar import serialize_poly
from .hierarchy_kdv import CheckFailure, KdVState, make_ring, require_equal, require_zero

SUITES = ("kdv", "poisson", "mkdv", "toda", "limits")


def default_degcap():
    return int(os.environ.get("QKDV_DEGCAP", "3"))


@dataclass
class RunConfig:
    N: int = 2
    M_pt: int = 2
    M_expr: int = 0
    K: int = 8
    degcap: int = dc_field(default_factory=default_degcap)
    mode: str = "exact"
    q0: Optional[str] = None
    seed: int = 0
    timing: bool = True

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if self.M_pt < 1:
            raise ValueError("the window must be >= 1")
        if self.K < 1 or self.degcap < 1:
            raise ValueError("K and degcap must be >= 1")
        if self.mode not in ("exact", "numeric"):
            raise ValueError("mode must be exact or numeric")
        if self.M_expr and self.M_expr < self.M_pt:
            raise ValueError("M_expr must be >= the window")

    def window(self, M_pt=None):
        M = self.M_pt if M_pt is None else M_pt
        return WindowConfig(M, max(self.M_expr, M), self.K, self.degcap)

    def field(self):
        return make_field(self.mode, self.q0)

    def describe(self):
        d = {"N": self.N, "M_pt": self.M_pt, "M_expr": self.M_expr or "auto", "K": self.K,
             "degcap": self.degcap, "seed": self.seed}
        d.update(self.field().describe())
        return d


@dataclass
class Check:
    name: str
    anchor: str
    run: Callable[[], Optional[str]]


@dataclass
class CheckResult:
    name: str
    anchor: str
    status: str
    witness: Optional[str]
    ms: int
    detail: Optional[str] = None

    def as_json(self, timing=True):
        d = {"name": self.name, "anchor": self.anchor, "status": self.status}
        if self.witness is not None:
            d["witness"] = self.witness
        d["ms"] = self.ms if timing else 0
        return d


def run_check(c: Check) -> CheckResult:
    t0 = time.perf_counter()
    witness = detail = None
    try:
        detail = c.run()
        status = "pass"
    except (CheckFailure, NotTotalDifference) as e:
        status = "fail"
        witness = getattr(e, "witness", None) or str(e)
        detail = str(e)
    except (ArithmeticError, ValueError, KeyError) as e:
        status = "error"
        witness = "%s: %s" % (type(e).__name__, e)
        detail = witness
    ms = int(round((time.perf_counter() - t0) * 1000))
    return CheckResult(c.name, c.anchor, status, witness, ms, detail)


def run_suite(checks, cfg: RunConfig):
    with use_field(cfg.field()):
        return [run_check(c) for c in checks]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def random_series(ring, M, rng):
    """A series with random rational modes |m| <= M (a point of phase space)."""
    out = ring.zero()
    for m in range(-M, M + 1):
        out = out + ring.zpow(-m).scale(rat(rng.randint(-5, 5), rng.randint(1, 4)))
    return out


def random_L(N, M, rng):
    R = make_ring({}, WindowConfig(M), (), 0)
    c = {N: R.one()}
    for i in range(1, N + 1):
        s = random_series(R, M, rng)
        c[N - i] = s if i % 2 == 0 else -s
    return PseudoDiffOp(c, R.zero())


def check_root_identity(N, M, K, seed):
    L = random_L(N, M, random.Random(seed))
    P = nth_root(L, N, K)
    d = op_pow(P, N) - L
    for e, c in d.c.items():
        require_zero(c, "P^%d - L at D^%d" % (N, e))
    return "valid down to D^%d" % op_pow(P, N).valid


def _random_X(ring, N, rng):
    """X = sum_{i=1}^{N-1} x_i(z) D^-i with fixed random coefficient series x_i."""
    M = ring.window.M_pt
    c = {}
    for i in range(1, N):
        acc = ring.zero()
        for k in range(-M, M + 1):
            acc = acc + ring.zpow(k).scale(rat(rng.randint(-3, 3), rng.randint(1, 3)))
        c[-i] = acc
    return PseudoDiffOp(c, ring.zero())


def check_linear_functional(N, cfg, seed):
    S = KdVState(N, cfg.window(), reduced=True)
    R = S.ring(outer=1, degree=2)
    rng = random.Random(seed)
    X = _random_X(R, N, rng)
    Y = _random_X(R, N, rng)
    lhs, rhs = poisson.linear_functional_bracket(X, Y, S.L(R), N, hk.kernels(S, 1))
    require_equal(lhs.restrict(0), rhs, "int Res(L[X,Y]) vs {l_X, l_Y}_1")


def check_bracket_axioms(N, which, cfg, seed):
    M = cfg.M_pt
    R = make_ring({"T": N - 1}, WindowConfig(M, max(cfg.M_expr, 3 * M), cfg.K), (), 2)
    facs = [poisson.Factor("T", i) for i in range(1, N)]
    k1, k2 = poisson.kdv_first(N, True), poisson.kdv_second(N, True)
    K = {1: k1, 2: k2, 12: k1.combine(k2)}[which]
    rng = random.Random(seed)
    F, G, H = [poisson.random_functional(R, facs, rng) for _ in range(3)]
    FG = poisson.bracket(F, G, K)
    require_zero(FG + poisson.bracket(G, F, K), "{F,G} + {G,F}")
    require_zero(poisson.jacobiator(F, G, H, K), "Jacobi sum")
    if which != 1 and not FG.t:
        raise CheckFailure("vacuous test: {F,G} vanishes for the drawn functionals", "seed %d" % seed)
    return "%d terms in {F,G}" % len(FG.t)


def check_bracket_routes(N, cfg, seed):
    S = KdVState(N, cfg.window())
    R = S.ring(outer=1, degree=2)
    facs = [poisson.Factor("T", i) for i in range(1, N)]
    rng = random.Random(seed)
    F, G = poisson.random_functional(R, facs, rng), poisson.random_functional(R, facs, rng)
    for which in (1, 2):
        K = hk.kernels(S, which)
        require_equal(poisson.bracket(F, G, K), poisson.bracket_pairwise(F, G, K),
                      "mode-sum and pairwise brackets, {,}_%d" % which)


def check_first_bracket_modes(N, cfg):
    """Mode brackets of the first structure are antisymmetric and at most linear."""
    S = KdVState(N, cfg.window())
    R = S.ring()
    K = hk.kernels(S, 1)
    M = cfg.M_pt
    for i in range(1, N):
        for j in range(1, N):
            for a in range(-M, M + 1):
                for b in range(-M, M + 1):
                    ga, gb = GeneratorId("T", i, a), GeneratorId("T", j, b)
                    v = poisson.mode_bracket(K, ga, gb, R)
                    require_zero(v + poisson.mode_bracket(K, gb, ga, R), "{%s, %s}_1 + {%s, %s}_1" % (ga, gb, gb, ga))
                    if v.t and v.max_deg() > 1:
                        raise CheckFailure("first bracket is not linear", "{%s, %s}_1" % (ga, gb))
    if N == 2:
        from .coeffs import field
        F = field()
        for a in range(-M, M + 1):
            for b in range(-M, M + 1):
                v = poisson.mode_bracket(K, GeneratorId("T", 1, a), GeneratorId("T", 1, b), R)
                want = R.const(F.qpow(a) - F.qpow(-a)) if a + b == 0 else R.zero()
                require_equal(v, want, "{t[%d], t[%d]}_1" % (a, b))


def _flow_equal(a, b, what):
    for key in a:
        require_equal(a[key], b[key], "%s, %s%d" % (what, key[0].lower(), key[1]))


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def kdv_checks(cfg: RunConfig):
    N = cfg.N
    W = cfg.window()
    S = KdVState(N, W)
    out = []
    add = lambda n, a, f: out.append(Check(n, a, f))

    add("root.power", "P = L^(1/N) satisfies P^N = L",
        lambda: check_root_identity(N, cfg.M_pt, cfg.K, cfg.seed))
    add("flow.first", "first flow in closed form with b, (1+D+...+D^(N-1)) b = -t_1",
        lambda: _flow_equal(hk.qkdv_flow(S, 1), hk.qkdv1_formula(S), "Lax vs closed form"))
    add("flow.tN_frozen", "flows preserve t_N",
        lambda: require_zero(hk.qkdv_flow(KdVState(N, W, reduced=False), 1)[("T", N)], "d t_N"))
    add("flow.qkp_induced", "the q-KP flow of P = L^(1/N) induces the Lax flow",
        lambda: _flow_equal(hk.induced_flow_from_root(S, 1), hk.qkdv_flow(S, 1), "induced vs Lax"))
    for n in (1, N + 1 if N == 2 else N - 1):
        add("heredity.n%d" % n, "Lax flow n = {L, H_(n+N)}_1 = {L, H_n}_2",
            lambda n=n: hk.check_heredity(S, n) and None)
    m2 = N + 1
    add("flows.commute.1_%d" % m2, "Lax flows commute",
        lambda: hk.check_flow_commutation(S, 1, m2))
    for m, n in ((1, 1), (1, m2)):
        add("conservation.m%d_n%d" % (m, n), "d_m Res L^(n/N) is a total difference (1-D) g",
            lambda m=m, n=n: "g has %d terms" % len(hk.check_conservation(S, m, n).t))
    add("hamiltonians.commute.1_%d" % m2, "{H_n, H_m}_1 = {H_n, H_m}_2 = 0",
        lambda: hk.check_hamiltonians_commute(S, 1, m2))
    for n in range(1, 4 if N == 2 else 3):
        add("cwf.h%d" % n, "h_n from D = P + sum f_i P^-i equals (1/n) Res L^(n/N) up to (1-D) g",
            lambda n=n: "g has %d terms" % len(hk.hamiltonian_cwf(S, n).witness.t))
    if N == 2:
        out.extend(kdv_n2_checks(cfg))
    return out


def kdv_n2_checks(cfg: RunConfig):
    S = KdVState(2, cfg.window())
    out = []
    add = lambda n, a, f: out.append(Check(n, a, f))

    def h1():
        H = hk.hamiltonian_res(S, 1)
        require_equal(H, -H.ring.gen("T", 1, 0), "H_1 vs -t[0]")

    def h3():
        H = hk.hamiltonian_res(S, 3)
        require_equal(H, hk.n2_h3_formula(H.ring), "H_3 vs triple sum")

    def tau1():
        pt = S.ring()
        require_equal(hk.qkdv_flow(S, 1)[("T", 1)], hk.n2_tau1_formula(pt), "d_1 t vs mode formula")

    def tau3():
        pt = S.ring()
        require_equal(hk.qkdv_flow(S, 3)[("T", 1)], hk.n2_tau3_formula(pt), "d_3 t vs mode formula")

    def j2():
        R = S.ring(outer=1, degree=4)
        J = hk.j2(R)
        for n in (1, 3):
            H = hk.hamiltonian_res(S, n, R)
            for w in (1, 2):
                require_zero(poisson.bracket(J, H, hk.kernels(S, w)), "{J_2, H_%d}_%d" % (n, w))

    add("n2.H1", "H_1 = -t[0]", h1)
    add("n2.H3", "H_3 = -(1/2) t[0] + (1/3) sum t_i t_j t_k / prod (1+q^.)", h3)
    add("n2.tau1", "first flow in mode form", tau1)
    add("n2.tau3", "third flow in mode form", tau3)
    add("n2.J2", "J_2 commutes with H_1 and H_3 under both brackets", j2)
    return out


def poisson_checks(cfg: RunConfig):
    N = cfg.N
    out = []
    add = lambda n, a, f: out.append(Check(n, a, f))
    add("kernel.first_modes", "first bracket: antisymmetric, linear; q^a - q^-a at N = 2",
        lambda: check_first_bracket_modes(N, cfg))
    add("engine.routes", "mode-sum and pairwise Leibniz expansions agree",
        lambda: check_bracket_routes(N, cfg, cfg.seed))
    for which, label in ((1, "first"), (2, "second"), (12, "sum")):
        add("axioms.%s" % label, "antisymmetry and Jacobi identity, %s bracket" % label,
            lambda which=which: check_bracket_axioms(N, which, cfg, cfg.seed))
    add("linear_functionals", "{l_X, l_Y}_1 = int Res(L[X,Y])",
        lambda: check_linear_functional(N, cfg, cfg.seed + 1))
    return out


def mkdv_checks(cfg: RunConfig):
    N = cfg.N
    W = cfg.window()
    S = MK = mk.MKdVState(N, W)
    SR = mk.MKdVState(N, W, reduced=True)
    W1 = cfg.window(1)
    S1 = mk.MKdVState(N, W1)
    out = []
    add = lambda n, a, f: out.append(Check(n, a, f))
    add("lax_pair", "[tL, tP] = 0 and tL^N = diag(L_i)",
        lambda: mk.build_lax_pair(S1, S1.ring(), min(cfg.K, 4)) and None)
    for i in range(1, N + 1):
        add("induced_flow.L%d" % i, "the mKdV flow induces the KdV flow on L_%d" % i,
            lambda i=i: mk.check_induced_flow(S, 1, i))
    add("product_conserved", "d (Lambda_1 ... Lambda_N) = 0", lambda: mk.check_product_conserved(S, 1))
    add("hamiltonian_form", "mKdV flow = {Lambda_i, bold H_n}", lambda: mk.check_hamiltonian_form(S, 1))
    add("pullback", "mu^* H_n = bold H_n", lambda: "bold H_1 = %s" % serialize_poly(mk.check_pullback_hamiltonian(S, 1)))
    n2 = 3 if N == 2 else 2
    add("pullback.H%d" % n2, "mu^* H_n = bold H_n",
        lambda: "bold H_%d = %s" % (n2, serialize_poly(mk.check_pullback_hamiltonian(S, n2))))
    M = cfg.M_pt
    pairs = [(GeneratorId("T", a, m), GeneratorId("T", b, -m + d))
             for a in range(1, N + 1) for b in range(a, N + 1) for m in (0, 1) for d in (0, 1)]
    add("bracket_homomorphism", "mu is a Poisson map to the second bracket",
        lambda: mk.check_bracket_homomorphism(S, pairs))
    add("flows_commute", "mKdV flows commute",
        lambda: mk.check_flow_commutation(S1, 1, N + 1 if N == 2 else 2))
    add("reduced.restriction", "flows restrict to Lambda_1 ... Lambda_N = 1",
        lambda: mk.check_reduced_restriction(SR, 1))
    add("reduced.product", "d (Lambda_1 ... Lambda_N) = 0 on the reduced space",
        lambda: mk.check_product_conserved(SR, 1))
    return out


def toda_checks(cfg: RunConfig):
    N = cfg.N
    W = cfg.window()
    ctx = td.TodaContext(N, W, reduced=False, degcap=cfg.degcap)
    red = td.TodaContext(N, W, reduced=True, degcap=cfg.degcap)
    cap = " (exact up to degree %d in the Lambda-inverses)" % cfg.degcap
    out = []
    add = lambda n, a, f: out.append(Check(n, a, f))

    def kappa():
        k = td.kappa(N)
        for (a, b), v in k.items():
            if v != td.expected_kappa(N, a, b):
                raise CheckFailure("S-bracket coefficient", "k=%d, i=%d: %d" % (a, b, v))
        td.check_q_kernel_consistency(N)

    add("s_brackets", "{Lambda_k, S_i} = -delta_ki + delta_(k,i+1) times Lambda_k S_i", kappa)
    add("qdiff", "A_i(zq) = Lambda_(i-1) Lambda_i^-1 A_i and the S_i shift law" + cap,
        lambda: td.check_qdiff(ctx))
    add("hamiltonian_form", "d Lambda_i = A_i - A_(i+1)(zq) = {Lambda_i, sum int S_j}" + cap,
        lambda: td.check_hamiltonian_form(ctx) and None)
    add("lax", "A_i - (D-Lambda_i) A_(i+1) (D-Lambda_(i+1))^-1 = A_i - A_(i+1)(zq)" + cap,
        lambda: td.lax_check(ctx, min(cfg.K, 4)))
    for c, label in ((ctx, "affine"), (red, "reduced")):
        H = lambda c=c: td.mkdv_hamiltonian_for(c, 1)
        add("conservation.%s.H1" % label, "{bold H_1, int S_j} = 0 for each j" + cap,
            lambda c=c, H=H: "witnesses in %d grades" % len(td.check_conservation(c, H())))
    add("screening", "coefficients of L_1 lie in the kernel of int S_j, j < N" + cap,
        lambda: td.check_screening(ctx))
    add("finite", "finite Toda flow preserves Lambda_1 ... Lambda_N" + cap,
        lambda: td.check_product_constraint(ctx, td.screening_flow(ctx, range(1, N))))
    if N == 2:
        add("sine_gordon", "d Lambda = Q^-2 - Q(zq)^2 with density Q Q(zq) + Q^-1 Q(zq)^-1" + cap,
            lambda: td.check_sine_gordon(red))
    return out


def limits_checks(cfg: RunConfig):
    N = cfg.N
    out = []
    state = {}
    add = lambda n, a, f: out.append(Check(n, a, f))

    def probe():
        state["C"] = lm.probe_constant()
        return "C = %s" % state["C"]

    add("probe", "global normalization from {u[1], u[-1]}", probe)
    add("virasoro", "second N=2 bracket -> Virasoro: Witt part exact, central part times C",
        lambda: lm.check_virasoro(C=state.get("C")) and None)
    add("first_bracket", "first N=2 bracket -> 2 h a delta", lm.check_first_bracket_limit)
    add("heisenberg", "Lambda brackets -> Heisenberg bracket of v times C",
        lambda: lm.check_heisenberg(N, C=state.get("C", 1)))

    def hams():
        r = lm.check_hamiltonian_orders((1, 2, 3))
        return "; ".join("H_%d: %s" % (n, "constant" if v.order is None else "h^%d" % v.order)
                         for n, v in r.items())

    add("hamiltonian_orders", "H_n = const + h^(n+1) H_n^(0), H_2 constant", hams)
    add("toda", "d a_i = (v_i - v_(i-1)) a_i at leading order", lambda: lm.check_toda_limit(N) and None)
    return out


BUILDERS = {"kdv": kdv_checks, "poisson": poisson_checks, "mkdv": mkdv_checks,
            "toda": toda_checks, "limits": limits_checks}


def build(suite: str, cfg: RunConfig):
    if suite == "all":
        out = []
        for s in SUITES:
            out.extend(Check("%s.%s" % (s, c.name), c.anchor, c.run) for c in BUILDERS[s](cfg))
        return out
    if suite not in BUILDERS:
        raise ValueError("unknown suite %r" % suite)
    return [Check("%s.%s" % (suite, c.name), c.anchor, c.run) for c in BUILDERS[suite](cfg)]
