"""q-Miura transformations, the cyclic matrix Lax pair and the q-mKdV hierarchy.

Lambda_i(z) are series in the family LAM, indices taken mod N.  On the
reduced space Lambda_1...Lambda_N = 1 the last one is eliminated as the
degree-capped inverse of the others (Lambda_i[0] become formal units).
"""

from __future__ import annotations

from dataclasses import dataclass

from .coeffs import field
from .modering import (
    GeneratorId, Poly, WindowConfig, poly_sum, series_inverse, transfer,
)
from .opalg import MatrixOp, PseudoDiffOp, mat_mul, nth_root, op_mul, op_parts, res
from . import poisson
from .hierarchy_kdv import (
    CheckFailure, KdVState, apply_derivation, hamiltonian_res, lax_flow_operator,
    make_ring, operator_root_power, read_flow, require_equal, require_zero,
)


@dataclass
class MKdVState:
    N: int
    window: WindowConfig
    reduced: bool = False

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        self._inv = {}

    @property
    def degcap(self):
        return self.window.degcap

    @property
    def ncomp(self):
        return self.N - 1 if self.reduced else self.N

    def ring(self, outer=0, degree=1, extra_cap=0):
        w = self.window.inflated(degree) if outer else self.window
        if self.reduced:
            return make_ring({"LAM": self.N - 1}, w, ("LAM",), outer, self.degcap + extra_cap)
        return make_ring({"LAM": self.N}, w, (), outer)

    def lam(self, ring, i) -> Poly:
        i = (i - 1) % self.N + 1
        if self.reduced and i == self.N:
            key = id(ring)
            v = self._inv.get(key)
            if v is None or v[0] is not ring:
                prod = ring.one()
                for k in range(1, self.N):
                    prod = prod * ring.series("LAM", k)
                v = (ring, series_inverse(prod, ring.degcap))
                self._inv[key] = v
            return v[1]
        return ring.series("LAM", i)

    def factor(self, ring, i) -> PseudoDiffOp:
        """D - Lambda_i."""
        return PseudoDiffOp({1: ring.one(), 0: -self.lam(ring, i)}, ring.zero())

    def kdv_state(self):
        return KdVState(self.N, self.window, reduced=False)


def miura(S: MKdVState, ring, i: int) -> PseudoDiffOp:
    """L_i = (D - Lambda_i)(D - Lambda_{i+1}) ... (D - Lambda_{N+i-1})."""
    out = S.factor(ring, i)
    for k in range(i + 1, i + S.N):
        out = op_mul(out, S.factor(ring, k))
    return out


def t_images(S: MKdVState, ring, i=1):
    """{('T', j): (-1)^j * coefficient of D^(N-j) in L_i}, j = 1..N."""
    L = miura(S, ring, i)
    return {("T", j): (L.coeff(S.N - j) if j % 2 == 0 else -L.coeff(S.N - j)) for j in range(1, S.N + 1)}


@dataclass
class LaxPair:
    tL: MatrixOp
    tP: MatrixOp
    roots: list


def lax_matrix(S: MKdVState, ring) -> MatrixOp:
    N = S.N
    e = [[None] * N for _ in range(N)]
    for i in range(N):
        e[i][(i + 1) % N] = S.factor(ring, i + 1)
    return MatrixOp(e, ring.zero())


def build_lax_pair(S: MKdVState, ring, K: int, check=True) -> LaxPair:
    """tP = diag(P_i), P_i = L_i^(1/N); certifies [tL, tP] = 0 and tL^N = diag(L_i)."""
    N = S.N
    Ls = [miura(S, ring, i) for i in range(1, N + 1)]
    roots = [nth_root(L, N, K) for L in Ls]
    tL = lax_matrix(S, ring)
    e = [[None] * N for _ in range(N)]
    for i in range(N):
        e[i][i] = roots[i]
    tP = MatrixOp(e, ring.zero())
    if check:
        for i in range(N):
            f = S.factor(ring, i + 1)
            d = op_mul(f, roots[(i + 1) % N]) - op_mul(roots[i], f)
            for n, c in d.c.items():
                require_zero(c, "[tL, tP] entry (%d,%d) at D^%d" % (i + 1, (i + 1) % N + 1, n))
        power = tL
        for _ in range(N - 1):
            power = mat_mul(power, tL)
        for i in range(N):
            for j in range(N):
                x = power.entry(i, j)
                target = Ls[i] if i == j else PseudoDiffOp({}, ring.zero())
                dx = x - target
                for n, c in dx.c.items():
                    require_zero(c, "tL^N entry (%d,%d) at D^%d" % (i + 1, j + 1, n))
    return LaxPair(tL, tP, roots)


def qmkdv_flow(S: MKdVState, n: int, ring=None, check=True):
    """d Lambda_i from d tL = [tL, (tP^n)_+], read off the cyclic superdiagonal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ring = ring or S.ring()
    N = S.N
    powers = [operator_root_power(miura(S, ring, i), N, n, depth=1) for i in range(1, N + 1)]
    parts = [op_parts(p) for p in powers]
    out = {}
    for i in range(1, N + 1):
        f = S.factor(ring, i)
        B_i, B_next = parts[i - 1][0], parts[i % N][0]
        X = op_mul(f, B_next) - op_mul(B_i, f)
        if check:
            for e, c in X.c.items():
                if e != 0:
                    require_zero(c, "superdiagonal entry %d at D^%d" % (i, e))
            M_i, M_next = parts[i - 1][1], parts[i % N][1]
            Y = op_mul(f, M_next, 0) - op_mul(M_i, f, 0)
            require_equal(X.coeff(0), -Y.coeff(0), "both commutator forms, entry %d" % i)
        out[("LAM", i)] = -X.coeff(0)
    return out


def mkdv_hamiltonian(S: MKdVState, n: int, ring=None) -> Poly:
    """bold H_n = (1/n) sum_i int Res P_i^n."""
    ring = ring or S.ring(outer=1, degree=n)
    acc = [res(operator_root_power(miura(S, ring, i), S.N, n)) for i in range(1, S.N + 1)]
    return poly_sum(ring, acc).integral().scale(field().const(1, n))


def pullback(P: Poly, images, target) -> Poly:
    """Substitute t_j[k] -> mode k of images[('T', j)] in a polynomial in the t generators."""
    R = P.ring
    cache = {}
    acc = []
    for k, c in P.t.items():
        term = target.one().scale(c)
        for gi, e in R.decode(k):
            g = R.gens[gi]
            if g is None:
                raise ValueError("explicit z powers cannot be pulled back")
            v = cache.get(g)
            if v is None:
                v = transfer(images[(g.family, g.component)].mode_part(g.mode), target)
                cache[g] = v
            for _ in range(e):
                term = term * v
            if not term.t:
                break
        if term.t:
            acc.append(term)
    return poly_sum(target, acc)


def _image_ring(S: MKdVState):
    """t-ring covering all modes the images can carry at the point."""
    return make_ring({"T": S.N}, WindowConfig(S.N * S.window.M_pt, 0, S.window.K, S.window.degcap), (), 0)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def check_induced_flow(S: MKdVState, n: int, i: int = 1):
    """The mKdV flow induces the KdV flow on each L_i."""
    pt = S.ring()
    big = S.ring(outer=1, degree=S.N + 1, extra_cap=1)
    fl = qmkdv_flow(S, n, pt)
    imgs = t_images(S, big, i)
    dL = lax_flow_operator(miura(S, pt, i), S.N, n, check=False)
    direct = read_flow(S.kdv_state(), dL)
    for key, img in imgs.items():
        lhs = apply_derivation(img, fl, pt)
        require_equal(lhs, direct[key], "induced flow on t_%d of L_%d" % (key[1], i))


def check_product_conserved(S: MKdVState, n: int):
    pt = S.ring()
    big = S.ring(outer=1, degree=S.N + 1, extra_cap=1)
    fl = qmkdv_flow(S, n, pt)
    prod = big.one()
    for i in range(1, S.N + 1):
        prod = prod * S.lam(big, i)
    d = apply_derivation(prod, fl, pt)
    if S.reduced:
        d = d.truncate_deg(S.degcap)
    require_zero(d, "d_%d (Lambda_1 ... Lambda_N)" % n)


def check_hamiltonian_form(S: MKdVState, n: int):
    """d_n Lambda_i = {Lambda_i(z), bold H_n}."""
    pt = S.ring()
    fl = qmkdv_flow(S, n, pt)
    H = mkdv_hamiltonian(S, n)
    K = poisson.heisenberg(S.N)
    for i in range(1, S.ncomp + 1):
        b = transfer(poisson.field_bracket(poisson.Factor("LAM", i), H, K), pt)
        require_equal(b, fl[("LAM", i)], "{Lambda_%d, H_%d}" % (i, n))


def check_flow_commutation(S: MKdVState, n: int, m: int):
    pt = S.ring()
    big = S.ring(outer=1, degree=max(n, m) + 1, extra_cap=1)
    fn, fm = qmkdv_flow(S, n, pt), qmkdv_flow(S, m, pt)
    Fn, Fm = qmkdv_flow(S, n, big, check=False), qmkdv_flow(S, m, big, check=False)
    for key in fn:
        d = apply_derivation(Fn[key], fm, pt) - apply_derivation(Fm[key], fn, pt)
        require_zero(d, "[d_%d, d_%d] Lambda_%d" % (n, m, key[1]))


def check_pullback_hamiltonian(S: MKdVState, n: int):
    """mu_1^* H_n = bold H_n; returns bold H_n."""
    pt = S.ring()
    tr = _image_ring(S)
    KS = S.kdv_state()
    H = hamiltonian_res(KS, n, tr)
    imgs = t_images(S, pt, 1)
    bold = mkdv_hamiltonian(S, n, pt)
    require_equal(pullback(H, imgs, pt), bold, "mu^* H_%d vs bold H_%d" % (n, n))
    return bold


def check_bracket_homomorphism(S: MKdVState, pairs):
    """{mu^* t_a[m], mu^* t_b[k]} = mu^* {t_a[m], t_b[k]}_2 for the given generator pairs."""
    if S.reduced:
        raise ValueError("the homomorphism check runs on the unreduced space")
    pt = S.ring()
    big = S.ring(outer=1, degree=S.N + 1, extra_cap=1)
    tr = _image_ring(S)
    imgs_big = t_images(S, big, 1)
    imgs_pt = t_images(S, pt, 1)
    K2 = poisson.kdv_second(S.N, reduced=False)
    KH = poisson.heisenberg(S.N)
    for (ga, gb) in pairs:
        F = imgs_big[(ga.family, ga.component)].mode_part(ga.mode)
        G = imgs_big[(gb.family, gb.component)].mode_part(gb.mode)
        lhs = transfer(poisson.bracket(F, G, KH), pt)
        rhs = pullback(poisson.mode_bracket(K2, ga, gb, tr), imgs_pt, pt)
        require_equal(lhs, rhs, "bracket of images of %s, %s" % (ga, gb))


def check_reduced_restriction(S: MKdVState, n: int):
    """On Lambda_1...Lambda_N = 1 the chain-rule flow of the eliminated Lambda_N matches its own flow."""
    if not S.reduced:
        raise ValueError("needs a reduced state")
    pt = S.ring()
    big = S.ring(outer=1, degree=S.N + 1, extra_cap=1)
    fl = qmkdv_flow(S, n, pt)
    lamN = S.lam(big, S.N)
    lhs = apply_derivation(lamN, fl, pt).truncate_deg(S.degcap)
    require_equal(lhs, fl[("LAM", S.N)].truncate_deg(S.degcap), "flow of the eliminated Lambda_N")
