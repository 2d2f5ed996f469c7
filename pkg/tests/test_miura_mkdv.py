import pytest

from qkdv import hierarchy_kdv as hk
from qkdv import miura_mkdv as mk
from qkdv import poisson
from qkdv.modering import GeneratorId, WindowConfig, transfer
from qkdv.opalg import MatrixOp, mat_commutator, mat_mul

W1 = WindowConfig(1, 1, 4)
W2 = WindowConfig(2, 2, 8)


def no_constant(p):
    return p.ring.BASE not in p.t


def test_free_point_gives_pure_power():
    S = mk.MKdVState(3, W1)
    R = S.ring()
    L = mk.miura(S, R, 1)
    assert L.c[3] == R.one()
    assert all(no_constant(c) for e, c in L.c.items() if e != 3)
    pair = mk.build_lax_pair(S, R, 3)
    for P in pair.roots:
        assert all(no_constant(c) for e, c in P.c.items() if e != 1)
    H = mk.mkdv_hamiltonian(S, 1)
    assert no_constant(H)


def test_n2_images():
    S = mk.MKdVState(2, W2)
    R = S.ring()
    l1, l2 = R.series("LAM", 1), R.series("LAM", 2)
    imgs = mk.t_images(S, R, 1)
    assert imgs[("T", 1)] == l2.shift(1) + l1
    assert imgs[("T", 2)] == l1 * l2


def test_reduced_n2_lands_on_tN_equal_one():
    S = mk.MKdVState(2, W1, reduced=True)
    R = S.ring()
    img = mk.t_images(S, R, 1)[("T", 2)]
    assert img.truncate_deg(S.degcap) == R.one()


@pytest.mark.parametrize("N", [2, 3])
def test_lax_pair(N):
    S = mk.MKdVState(N, W1)
    R = S.ring()
    pair = mk.build_lax_pair(S, R, 4)
    tLN = pair.tL
    for _ in range(N - 1):
        tLN = mat_mul(tLN, pair.tL)
    for i in range(N):
        assert tLN.entry(i, i) == mk.miura(S, R, i + 1)


def test_lax_commutator_entries():
    S = mk.MKdVState(2, W1)
    R = S.ring()
    pair = mk.build_lax_pair(S, R, 4)
    d = mat_commutator(pair.tL, pair.tP)
    for i in range(2):
        for j in range(2):
            x = d.entry(i, j)
            assert all(c.is_zero() for c in x.c.values())


def test_wrong_root_breaks_commutation():
    S = mk.MKdVState(2, W1)
    R = S.ring()
    pair = mk.build_lax_pair(S, R, 4)
    swapped = MatrixOp([[pair.roots[1], None], [None, pair.roots[0]]], R.zero())
    assert not mat_commutator(pair.tL, swapped).is_zero()


@pytest.mark.parametrize("N,n", [(2, 2), (3, 3)])
def test_divisible_flows_vanish(N, n):
    S = mk.MKdVState(N, W1)
    assert all(v.is_zero() for v in mk.qmkdv_flow(S, n).values())


@pytest.mark.parametrize("N", [2, 3])
def test_product_conserved(N):
    mk.check_product_conserved(mk.MKdVState(N, W1), 1)


def test_induced_flow_matches_kdv():
    S = mk.MKdVState(2, W1)
    for i in (1, 2):
        mk.check_induced_flow(S, 1, i)


def test_induced_flow_n2_is_tau1():
    S = mk.MKdVState(2, W1)
    pt = S.ring()
    big = S.ring(outer=1, degree=3)
    fl = mk.qmkdv_flow(S, 1, pt)
    img = mk.t_images(S, big, 1)[("T", 1)]
    lhs = hk.apply_derivation(img, fl, pt)
    # d tau_1 t = t (b(zq) - b(z)) evaluated on the image
    kdv = hk.KdVState(2, WindowConfig(2, 2, 4), reduced=False)
    rhs = mk.pullback(hk.qkdv_flow(kdv, 1)[("T", 1)], mk.t_images(S, pt, 1), pt)
    assert lhs == rhs


def test_hamiltonian_form():
    mk.check_hamiltonian_form(mk.MKdVState(2, W1), 1)


@pytest.mark.parametrize("N", [2, 3])
def test_pullback(N):
    mk.check_pullback_hamiltonian(mk.MKdVState(N, W1), 1)


def test_bold_hamiltonians_commute():
    S = mk.MKdVState(2, W1)
    R = S.ring(outer=1, degree=4)
    H1, H3 = mk.mkdv_hamiltonian(S, 1, R), mk.mkdv_hamiltonian(S, 3, R)
    assert not H3.is_zero()
    assert poisson.bracket(H1, H3, poisson.heisenberg(2)).is_zero()


def test_homomorphism():
    S = mk.MKdVState(2, W1)
    g = [GeneratorId("T", 1, 0), GeneratorId("T", 1, 1), GeneratorId("T", 2, -1)]
    mk.check_bracket_homomorphism(S, [(g[0], g[0]), (g[1], g[2]), (g[1], GeneratorId("T", 1, -1))])


def test_homomorphism_fails_for_first_bracket():
    S = mk.MKdVState(2, W1)
    pt = S.ring()
    big = S.ring(outer=1, degree=3, extra_cap=1)
    tr = mk._image_ring(S)
    a, b = GeneratorId("T", 1, 1), GeneratorId("T", 1, -1)
    F = mk.t_images(S, big, 1)[("T", 1)].mode_part(1)
    G = mk.t_images(S, big, 1)[("T", 1)].mode_part(-1)
    lhs = transfer(poisson.bracket(F, G, poisson.heisenberg(2)), pt)
    rhs = mk.pullback(poisson.mode_bracket(poisson.kdv_first(2), a, b, tr), mk.t_images(S, pt, 1), pt)
    assert lhs != rhs


def test_reduced_n3_keeps_product():
    S = mk.MKdVState(3, W1, reduced=True)
    mk.check_product_conserved(S, 1)
    mk.check_reduced_restriction(S, 1)


def test_flows_commute():
    mk.check_flow_commutation(mk.MKdVState(2, W1), 1, 3)


def test_state_guards():
    with pytest.raises(ValueError):
        mk.MKdVState(1, W1)
    with pytest.raises(ValueError):
        mk.check_bracket_homomorphism(mk.MKdVState(2, W1, reduced=True), [])
    with pytest.raises(ValueError):
        mk.check_reduced_restriction(mk.MKdVState(2, W1), 1)
