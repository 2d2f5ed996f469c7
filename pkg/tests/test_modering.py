import random

import pytest

from qkdv.coeffs import QRat, X, rat
from qkdv.modering import (GeneratorId, NotTotalDifference, Ring, WindowConfig, cyclic_sum_invert, gradient,
                           one_minus_D, q_shift, series_inverse, series_mul, total_difference_witness, transfer)

q = X
one = QRat.const(1)


@pytest.fixture
def R():
    return Ring({"T": 1}, WindowConfig(1))


@pytest.fixture
def U():
    return Ring({"LAM": 1}, WindowConfig(1, 1, 8, 2), ("LAM",))


def random_poly(ring, rng, nterms=4):
    gens = [g for g in ring.gens if g is not None and g.family == "T"]
    acc = ring.zero()
    for _ in range(nterms):
        term = ring.const(rat(rng.randint(-4, 4), rng.randint(1, 3)))
        for _ in range(rng.randint(0, 2)):
            g = rng.choice(gens)
            term = term * ring.gen(*g)
        acc = acc + term
    return acc


def test_shift_single_mode(R):
    f = R.gen("T", 1, 1)
    assert q_shift(f, 1) == f.scale(QRat.qpow(-1))
    assert q_shift(f, 0) == f


def test_shift_inverse(R):
    s = R.series("T", 1)
    assert q_shift(q_shift(s, 1), -1) == s
    assert q_shift(s, 1) == (R.gen("T", 1, -1).scale(q) + R.gen("T", 1, 0)
                             + R.gen("T", 1, 1).scale(QRat.qpow(-1)))


def test_series_mul_convolution(R):
    s = R.series("T", 1)
    p = series_mul(s, s).mode_part(0)
    t = lambda m: R.gen("T", 1, m)
    assert p == t(-1) * t(1) + t(0) * t(0) + t(1) * t(-1)
    assert series_mul(s, R.one()) == s


def test_shift_is_a_ring_homomorphism():
    rng = random.Random(3)
    R = Ring({"T": 2}, WindowConfig(1))
    for _ in range(5):
        f, g = random_poly(R, rng), random_poly(R, rng)
        assert q_shift(f, 1) * q_shift(g, 1) == q_shift(f * g, 1)


def test_cyclic_invert_n2(R):
    s = R.series("T", 1)
    f = cyclic_sum_invert(-s, 2)
    for m in (-1, 0, 1):
        want = -one / (one + QRat.qpow(-m))
        assert f.mode_part(m) == R.gen("T", 1, m).scale(want)
    assert f + q_shift(f, 1) == -s


def test_cyclic_invert_constant(R):
    for N in (2, 3, 5):
        assert cyclic_sum_invert(R.const(7), N) == R.const(rat(7, N))


def test_cyclic_invert_n3_zpow(R):
    f = cyclic_sum_invert(R.zpow(-1), 3)
    assert f == R.zpow(-1).scale(one / (one + QRat.qpow(-1) + QRat.qpow(-2)))
    assert f + q_shift(f, 1) + q_shift(f, 2) == R.zpow(-1)


def test_total_difference(R):
    r = R.zpow(-1).scale(one - QRat.qpow(-1))
    assert total_difference_witness(r) == R.zpow(-1)
    g = R.gen("T", 1, 1)
    assert total_difference_witness(g - q_shift(g, 1)) == g


def test_total_difference_obstruction(R):
    with pytest.raises(NotTotalDifference) as e:
        total_difference_witness(R.gen("T", 1, 0))
    assert "t1[0]" in e.value.witness


def test_total_difference_roundtrip(R):
    rng = random.Random(5)
    for _ in range(5):
        P = random_poly(R, rng)
        R0 = P - P.mode_part(0)
        assert one_minus_D(total_difference_witness(R0)) == R0


def test_series_inverse(U):
    lam0 = U.gen("LAM", 1, 0)
    assert series_inverse(lam0) == U.gen("LAM", 1, 0, -1)
    f = U.one() - U.gen("LAM", 1, 1) * U.zpow(-1)
    l1 = U.gen("LAM", 1, 1)
    want = U.one() + l1 * U.zpow(-1) + l1 * l1 * U.zpow(-2)
    assert series_inverse(f, 2) == want


def test_series_inverse_multiply_back(U):
    s = U.series("LAM", 1)
    inv = series_inverse(s, 2)
    assert (s * inv).truncate_deg(2) == U.one()


def test_series_inverse_needs_unit(R):
    with pytest.raises(ZeroDivisionError):
        series_inverse(R.series("T", 1))


def test_gradient(R, U):
    t = lambda m: R.gen("T", 1, m)
    assert gradient(t(1) * t(-1), GeneratorId("T", 1, 1)) == t(-1)
    assert gradient(t(0) ** 3, GeneratorId("T", 1, 0)) == t(0) * t(0).scale(3)
    g = GeneratorId("LAM", 1, 0)
    assert gradient(U.gen("LAM", 1, 0, -2), g) == U.gen("LAM", 1, 0, -3).scale(-2)


def test_negative_power_of_non_unit(R):
    with pytest.raises(ValueError):
        R.gen("T", 1, 0, -1)


def test_window_truncation():
    R = Ring({"T": 1}, WindowConfig(1))
    assert R.gen("T", 1, 2).is_zero()
    with pytest.raises(ValueError):
        WindowConfig(2, 1)


def test_transfer_roundtrip():
    small = Ring({"T": 1}, WindowConfig(1))
    big = Ring({"T": 2}, WindowConfig(2))
    s = small.series("T", 1) * small.series("T", 1)
    assert transfer(transfer(s, big), small) == s
    with pytest.raises(ValueError):
        transfer(big.series("T", 2), small)
