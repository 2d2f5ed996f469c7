import pytest

from qkdv import limits as lm
from qkdv import poisson
from qkdv.coeffs import HSeries, NumericField, Rat, rat, use_field
from qkdv.hierarchy_kdv import CheckFailure, make_ring
from qkdv.modering import GeneratorId, WindowConfig


@pytest.fixture(scope="module")
def C():
    return lm.probe_constant()


def test_probe_constant(C):
    assert C == 1


def test_virasoro(C):
    assert lm.check_virasoro(C=C) == C


def test_virasoro_wrong_constant_fails():
    with pytest.raises(CheckFailure):
        lm.check_virasoro(C=rat(2))


def test_first_bracket_limit():
    lm.check_first_bracket_limit()


@pytest.mark.parametrize("N", [2, 3])
def test_heisenberg(N, C):
    lm.check_heisenberg(N, C=C)


def test_heisenberg_table_shape():
    tgt = lm.classical_ring({"V": 3}, 1)
    assert lm.heisenberg_table(tgt, 3, 1, 1, 1, -1).t == {tgt.BASE: rat(-2, 3)}
    assert lm.heisenberg_table(tgt, 3, 1, 2, 1, -1).t == {tgt.BASE: rat(1, 3)}
    assert lm.heisenberg_table(tgt, 3, 1, 2, 1, 0).is_zero()


def test_leading_order_of_second_bracket():
    src = make_ring({"T": 1}, WindowConfig(2, 2, 8), (), 0)
    tgt = lm.classical_ring({"U": 1}, 2)
    got = lm.limit_bracket(poisson.kdv_second(2, True), "T", 1, 1, 2, -1, src, lm.t_substitution(6), tgt, 6, 0)
    assert got == lm.virasoro_table(tgt, 2, -1)


def test_h1_substitution():
    r = lm.limit_hamiltonian_order(1)
    assert r.constant == -2
    assert r.order == 2
    tgt = r.leading.ring
    assert r.leading.t == {tgt.fac[tgt.index[GeneratorId("U", 1, 0)]]: Rat(1)}


def test_hamiltonian_orders():
    out = lm.check_hamiltonian_orders((1, 2, 3))
    assert out[2].order is None
    assert out[3].order == 4 and not out[3].leading.is_zero()


@pytest.mark.parametrize("N", [2, 3])
def test_toda_limit(N):
    got = lm.check_toda_limit(N)
    assert set(got) == set(range(1, N + 1))


def test_toda_limit_constant_fields():
    # at v = 0 the leading equation is d a_i = 0: the v-free part is sum_m -m u_i[m]
    got, tgt = lm.toda_constraint_limit(2)
    for i, p in got.items():
        free = {k: c for k, c in p.t.items()
                if all(tgt.gens[g] is None or tgt.gens[g].family != "V" for g, _ in tgt.decode(k))}
        want = {tgt.fac[tgt.index[GeneratorId("U", i, m)]]: Rat(-m) for m in range(-2, 3) if m}
        assert free == want


def test_limits_are_exact_in_numeric_mode(C):
    with use_field(NumericField()):
        assert lm.probe_constant() == C
        lm.check_first_bracket_limit()


def test_precision_guard():
    tgt = lm.classical_ring({"U": 1}, 1)
    p = lm.LimitPoly.const(tgt, HSeries.const(1, 2))
    with pytest.raises(CheckFailure):
        p.coefficient(2)


def test_inverse_substitution():
    sub = lm.lam_substitution(4)
    tgt = lm.classical_ring({"V": 1}, 1)
    g = GeneratorId("LAM", 1, 0)
    prod = sub.image(g, 1, tgt) * sub.image(g, -1, tgt)
    assert prod.coefficient(0).t == {tgt.BASE: Rat(1)}
    for k in range(1, 4):
        assert prod.coefficient(k).is_zero()
    with pytest.raises(ValueError):
        sub.image(GeneratorId("LAM", 1, 1), -1, tgt)
