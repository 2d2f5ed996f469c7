import random

import pytest

from qkdv.modering import Ring, WindowConfig, cyclic_sum_invert, q_shift
from qkdv.opalg import (MatrixOp, PseudoDiffOp, commutator, expand_in_root, mat_commutator, mat_mul, nth_root,
                        op_inverse, op_mul, op_parts, op_pow, res)
from qkdv.suites import random_L, random_series


@pytest.fixture
def R():
    return Ring({"LAM": 2, "T": 1}, WindowConfig(1, 1, 6), ())


def Dop(ring, k=1):
    return PseudoDiffOp.D(ring.zero(), k, ring.one())


def mult(f):
    return PseudoDiffOp.scalar(f, f.ring.zero())


def random_op(ring, rng, top=1, depth=2):
    c = {}
    for e in range(-depth, top + 1):
        c[e] = random_series(ring, 1, rng)
    return PseudoDiffOp(c, ring.zero())


def test_defining_relation(R):
    t = R.series("T", 1)
    assert op_mul(Dop(R), mult(t)) == PseudoDiffOp({1: q_shift(t, 1)}, R.zero())


def test_two_factor_product(R):
    l1, l2 = R.series("LAM", 1), R.series("LAM", 2)
    A = Dop(R) - mult(l1)
    B = Dop(R) - mult(l2)
    want = PseudoDiffOp({2: R.one(), 1: -(q_shift(l2, 1) + l1), 0: l1 * l2}, R.zero())
    assert op_mul(A, B) == want


def test_associativity():
    rng = random.Random(1)
    R = Ring({}, WindowConfig(1), ())
    A, B, C = (random_op(R, rng) for _ in range(3))
    lhs = op_mul(A, op_mul(B, C))
    rhs = op_mul(op_mul(A, B), C)
    assert lhs == rhs
    D1 = Dop(R, -1)
    lhs = op_mul(D1, op_mul(A, D1)).truncate(3)
    rhs = op_mul(op_mul(D1, A), D1).truncate(3)
    assert lhs == rhs


def test_parts(R):
    t = lambda m: R.gen("T", 1, m)
    A = PseudoDiffOp({1: R.one(), 0: t(0), -1: t(1) * R.zpow(-1)}, R.zero())
    plus, minus, r = op_parts(A)
    assert plus == PseudoDiffOp({1: R.one(), 0: t(0)}, R.zero())
    assert minus == PseudoDiffOp({-1: t(1) * R.zpow(-1)}, R.zero())
    assert r == t(0)
    for n in (-2, -1, 1, 3):
        assert res(Dop(R, n)).is_zero()


def test_trace_property():
    rng = random.Random(2)
    R = Ring({}, WindowConfig(1), ())
    for _ in range(3):
        A, B = random_op(R, rng), random_op(R, rng)
        d = res(op_mul(A, B)) - res(op_mul(B, A))
        assert d.fourier(0) == 0


def test_root_of_pure_power():
    R = Ring({}, WindowConfig(1), ())
    for N in (1, 2, 3):
        P = nth_root(Dop(R, N), N, 4)
        assert P.c == {1: R.one()}


def test_n2_root_constant_term():
    R = Ring({"T": 1}, WindowConfig(1), ())
    t = R.series("T", 1)
    L = PseudoDiffOp({2: R.one(), 1: -t, 0: R.one()}, R.zero())
    P = nth_root(L, 2, 3)
    b = cyclic_sum_invert(-t, 2)
    assert P.coeff(0) == b
    assert b + q_shift(b, 1) == -t


@pytest.mark.parametrize("N", [2, 3, 4])
def test_root_multiply_back(N):
    L = random_L(N, 1, random.Random(N))
    P = nth_root(L, N, 6)
    PN = op_pow(P, N)
    assert (PN - L).is_zero()
    assert PN.valid == N - 1 - 6


def test_root_rejects_non_monic():
    R = Ring({}, WindowConfig(1), ())
    with pytest.raises(ValueError):
        nth_root(PseudoDiffOp({2: R.const(2)}, R.zero()), 2, 3)


def test_inverse(R):
    assert op_inverse(Dop(R), 4).c == {-1: R.one()}
    lam = R.series("LAM", 1)
    A = Dop(R) - mult(lam)
    inv = op_inverse(A, 4)
    assert inv.coeff(-2) == q_shift(lam, -1)
    prod = op_mul(A, inv)
    assert prod == PseudoDiffOp({0: R.one()}, R.zero(), prod.valid)
    back = op_inverse(inv, 3)
    assert back.with_valid(-3) == A.with_valid(-3)


def test_expand_in_root():
    R = Ring({"T": 1}, WindowConfig(1), ())
    assert all(f.is_zero() for f in expand_in_root(Dop(R), 4))
    t = R.series("T", 1)
    L = PseudoDiffOp({2: R.one(), 1: -t, 0: R.one()}, R.zero())
    P = nth_root(L, 2, 6)
    fs = expand_in_root(P, 4)
    assert fs[0] == -P.coeff(0)


@pytest.mark.parametrize("N", [2, 3])
def test_expand_in_root_reconstructs_D(N):
    K = 4
    L = random_L(N, 1, random.Random(10 + N))
    P = nth_root(L, N, K + 2)
    fs = expand_in_root(P, K)
    Pinv = op_inverse(P, K)
    acc = P
    power = PseudoDiffOp.D(P.zero, 0)
    for i, f in enumerate(fs):
        if i:
            power = op_mul(power, Pinv, -K)
        acc = acc + power.lmul(f)
    d = (acc - PseudoDiffOp.D(P.zero, 1)).with_valid(-K)
    assert d.is_zero()


def test_matrix_commutators():
    rng = random.Random(4)
    R = Ring({}, WindowConfig(1), ())
    A = MatrixOp([[random_op(R, rng, 1, 0), None], [Dop(R), random_op(R, rng, 0, 0)]], R.zero())
    assert mat_commutator(A, A).is_zero()
    A3 = mat_mul(mat_mul(A, A), A)
    assert mat_commutator(A, A3).is_zero()
    B = MatrixOp([[Dop(R), None], [None, None]], R.zero())
    assert not mat_commutator(A, B).is_zero()


def test_commutator_with_multiplication(R):
    t = R.series("T", 1)
    c = commutator(Dop(R), mult(t))
    assert c == PseudoDiffOp({1: q_shift(t, 1) - t}, R.zero())
    assert op_mul(Dop(R, 2), Dop(R, -2)) == Dop(R, 0)
