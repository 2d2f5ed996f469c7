import random

import pytest

from qkdv.coeffs import NumericField, QRat, X, rat, use_field
from qkdv.grammar import ParseError, parse_generator, parse_operator, parse_poly, serialize_operator, serialize_poly
from qkdv.hierarchy_kdv import KdVState, make_ring, qkdv_flow
from qkdv.modering import GeneratorId, WindowConfig, q_shift
from qkdv.opalg import PseudoDiffOp, nth_root

W = WindowConfig(2, 2, 6)


@pytest.fixture(scope="module")
def R():
    return make_ring({"T": 2}, W, (), 0)


def test_generator():
    assert parse_generator("t1[-3]") == GeneratorId("T", 1, -3)
    assert parse_generator(" lam2[0] ") == GeneratorId("LAM", 2, 0)
    for bad in ("t[1]", "x1[0]", "t1", "t1[a]"):
        with pytest.raises(ParseError):
            parse_generator(bad)


def test_serialize_product(R):
    p = R.gen("T", 1, 0) * R.gen("T", 1, 1)
    assert serialize_poly(p) == "t1[0]*t1[1]"
    assert parse_poly("t1[0]*t1[1]", R) == p
    assert parse_poly("t1[0] t1[1]", R) == p


def test_operator_product_twists(R):
    t = R.series("T", 1)
    assert parse_operator("D t1(z)", R) == PseudoDiffOp({1: q_shift(t, 1)}, R.zero())


def test_q_and_division(R):
    p = parse_poly("(1 - q^2)/2 * t1[1] + q^-1 t2[0]", R)
    want = R.gen("T", 1, 1).scale((1 - X ** 2) / 2) + R.gen("T", 2, 0).scale(QRat.qpow(-1))
    assert p == want


def test_errors(R):
    for text in ("t1[5]", "t3[0]", "t1[0] / t1[1]", "t1[0]^-1", "(t1[0]", "t1", "w", "1 / 0", "t1(w)"):
        with pytest.raises(ParseError):
            parse_operator(text, R)
    with pytest.raises(ParseError):
        parse_poly("D", R)


def test_unit_inverse():
    U = make_ring({"LAM": 1}, W, ("LAM",), 0)
    assert parse_poly("lam1[0]^-2", U) == U.gen("LAM", 1, 0, -2)


def random_operator(R, rng):
    c = {}
    for e in range(rng.randint(0, 2), -rng.randint(0, 2) - 1, -1):
        acc = R.zero()
        for _ in range(rng.randint(1, 3)):
            term = R.const(rat(rng.randint(-4, 4), rng.randint(1, 3)) * (X ** rng.randint(0, 2)))
            for _ in range(rng.randint(0, 2)):
                term = term * R.gen("T", rng.randint(1, 2), rng.randint(-2, 2))
            acc = acc + term
        c[e] = acc
    return PseudoDiffOp(c, R.zero())


@pytest.mark.parametrize("seed", range(8))
def test_roundtrip_random(R, seed):
    op = random_operator(R, random.Random(seed))
    assert parse_operator(serialize_operator(op), R) == op


def test_roundtrip_computed(R):
    S = KdVState(3, W)
    pt = S.ring()
    for v in qkdv_flow(S, 1).values():
        assert parse_poly(serialize_poly(v), pt) == v
    P = nth_root(S.L(pt), 3, 3)
    back = parse_operator(serialize_operator(P), pt)
    assert back == PseudoDiffOp(P.c, pt.zero())


def test_roundtrip_numeric(R):
    with use_field(NumericField()):
        op = random_operator(R, random.Random(99))
        assert parse_operator(serialize_operator(op), R) == op


def test_series_names(R):
    L = KdVState(2, W).L(make_ring({"T": 1}, W, (), 0))
    text = serialize_operator(L)
    assert text == "D^2 - t1(z) D + 1"
