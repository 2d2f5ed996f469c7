import random

import pytest

from qkdv import poisson
from qkdv.coeffs import QRat, X
from qkdv.hierarchy_kdv import KdVState, hamiltonian_res, kernels, make_ring
from qkdv.modering import GeneratorId, WindowConfig
from qkdv.opalg import PseudoDiffOp
from qkdv.suites import RunConfig, check_bracket_axioms, check_linear_functional

q = X
one = QRat.const(1)
T1 = poisson.Factor("T", 1)


@pytest.fixture(scope="module")
def R():
    return make_ring({"T": 1}, WindowConfig(2, 2, 8), (), 0)


def t(R, m):
    return R.gen("T", 1, m)


def mb(K, a, b, R, i=1, j=1):
    return poisson.mode_bracket(K, GeneratorId("T", i, a), GeneratorId("T", j, b), R)


def test_first_bracket_modes_n2(R):
    K1 = poisson.kdv_first(2, True)
    for a in range(-2, 3):
        for b in range(-2, 3):
            want = R.const(q ** a - QRat.qpow(-a)) if a + b == 0 else R.zero()
            assert mb(K1, a, b, R) == want


def test_second_bracket_modes_n2(R):
    K2 = poisson.kdv_second(2, True)
    for a in range(-2, 3):
        for b in range(-2, 3):
            want = R.zero()
            for m in range(-4, 5):
                want = want + (t(R, a - m) * t(R, b + m)).scale((one - q ** m) / (one + q ** m))
            if a + b == 0:
                want = want + R.const(q ** a - QRat.qpow(-a))
            assert mb(K2, a, b, R) == want


def test_zero_mode_self_bracket(R):
    for K in (poisson.kdv_first(2, True), poisson.kdv_second(2, True)):
        assert mb(K, 0, 0, R).is_zero()


@pytest.fixture(scope="module")
def n2():
    S = KdVState(2, WindowConfig(2, 2, 8))
    Rb = S.ring(outer=1, degree=2)
    return S, Rb, hamiltonian_res(S, 1, Rb)


def test_h1_self_bracket(n2):
    S, Rb, H1 = n2
    for w in (1, 2):
        assert poisson.bracket(H1, H1, kernels(S, w)).is_zero()


def test_field_bracket_with_h1(n2):
    S, Rb, H1 = n2
    fb = poisson.field_bracket(T1, H1, kernels(S, 2))
    for m in range(-2, 3):
        want = Rb.zero()
        sym = Rb.zero()
        for i in range(-2, 3):
            j = m - i
            if abs(j) <= 2:
                tt = Rb.gen("T", 1, i) * Rb.gen("T", 1, j)
                want = want - tt.scale((one - q ** j) / (one + q ** j))
                sym = sym - tt.scale((one - q ** (i + j)) / ((one + q ** i) * (one + q ** j)))
        assert fb.mode_part(m) == want
        assert fb.mode_part(m) == sym


def test_h1_central_for_first_bracket(n2):
    S, Rb, H1 = n2
    assert poisson.field_bracket(T1, H1, kernels(S, 1)).is_zero()


def _functionals(N, seed, M=2):
    R = make_ring({"T": N - 1}, WindowConfig(M, 3 * M, 8), (), 2)
    facs = [poisson.Factor("T", i) for i in range(1, N)]
    rng = random.Random(seed)
    return R, facs, [poisson.random_functional(R, facs, rng) for _ in range(3)]


def test_jacobiator_equal_arguments():
    R, facs, (F, G, H) = _functionals(2, 1)
    K = poisson.kdv_second(2, True)
    assert poisson.jacobiator(F, F, G, K).is_zero()


@pytest.mark.parametrize("which", [1, 2, 12])
def test_axioms_n2(which):
    check_bracket_axioms(2, which, RunConfig(N=2), 3)


def test_broken_kernel_fails_antisymmetry():
    R, facs, (F, G, H) = _functionals(2, 0)
    KS = poisson.KernelSet("broken", [poisson.BracketKernel(T1, T1, (poisson.SmoothTerm(one - q, T1, T1),))])
    assert not (poisson.bracket(F, G, KS) + poisson.bracket(G, F, KS)).is_zero()


def test_broken_kernel_fails_jacobi():
    R, facs, (F, G, H) = _functionals(2, 1)
    terms = (poisson.SmoothTerm(q, None, T1), poisson.SmoothTerm(-poisson._reflect(q), T1, None))
    KS = poisson.KernelSet("broken", [poisson.BracketKernel(T1, T1, terms)])
    assert (poisson.bracket(F, G, KS) + poisson.bracket(G, F, KS)).is_zero()
    assert not poisson.jacobiator(F, G, H, KS).is_zero()


def test_pairwise_route_matches(n2):
    S, Rb, _ = n2
    rng = random.Random(7)
    F, G = (poisson.random_functional(Rb, [T1], rng) for _ in range(2))
    for w in (1, 2):
        assert poisson.bracket(F, G, kernels(S, w)) == poisson.bracket_pairwise(F, G, kernels(S, w))


def _lf_setup(N):
    S = KdVState(N, WindowConfig(2, 2, 8), reduced=True)
    Rb = S.ring(outer=1, degree=2)
    return S, Rb


def test_linear_functional_trivial_cases():
    S, Rb = _lf_setup(2)
    X_ = PseudoDiffOp({-1: Rb.zpow(1)}, Rb.zero())
    lhs, rhs = poisson.linear_functional_bracket(X_, X_, S.L(Rb), 2, kernels(S, 1))
    assert lhs.is_zero() and rhs.is_zero()
    Z = PseudoDiffOp({}, Rb.zero())
    lhs, rhs = poisson.linear_functional_bracket(Z, X_, S.L(Rb), 2, kernels(S, 1))
    assert lhs.is_zero() and rhs.is_zero()
    with pytest.raises(ValueError):
        poisson.linear_functional_bracket(PseudoDiffOp({0: Rb.one()}, Rb.zero()), X_, S.L(Rb), 2, kernels(S, 1))


def test_linear_functional_n2_monomials():
    S, Rb = _lf_setup(2)
    for a, b in ((1, -1), (2, 0), (1, 1)):
        X_ = PseudoDiffOp({-1: Rb.zpow(a)}, Rb.zero())
        Y_ = PseudoDiffOp({-1: Rb.zpow(b)}, Rb.zero())
        lhs, rhs = poisson.linear_functional_bracket(X_, Y_, S.L(Rb), 2, kernels(S, 1))
        assert lhs.restrict(0) == rhs


@pytest.mark.parametrize("N", [2, 3])
def test_linear_functional_random(N):
    check_linear_functional(N, RunConfig(N=N), 1)


def test_displayed_first_bracket_sign_at_n3():
    S, Rb = _lf_setup(3)
    rng = random.Random(1)
    from qkdv.suites import _random_X
    X_, Y_ = _random_X(Rb, 3, rng), _random_X(Rb, 3, rng)
    lhs, rhs = poisson.linear_functional_bracket(X_, Y_, S.L(Rb), 3, poisson.kdv_first(3, True, literal=True))
    assert not rhs.is_zero()
    assert lhs.restrict(0) == -rhs


def test_random_functional_degree_guard(R):
    with pytest.raises(ValueError):
        poisson.random_functional(R, [T1], random.Random(0), max_degree=3)
