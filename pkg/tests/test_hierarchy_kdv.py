import pytest

from qkdv import hierarchy_kdv as hk
from qkdv import poisson
from qkdv.coeffs import QRat, X
from qkdv.hierarchy_kdv import CheckFailure, KdVState
from qkdv.modering import NotTotalDifference, WindowConfig, cyclic_sum_invert, poly_sum, total_difference_witness, transfer
from qkdv.opalg import PseudoDiffOp

W2 = WindowConfig(2, 2, 8)
W1 = WindowConfig(1, 1, 8)


def flows_equal(a, b):
    return set(a) == set(b) and all(a[k] == b[k] for k in a)


@pytest.mark.parametrize("N", [2, 3])
def test_flow_n_equal_N_vanishes(N):
    S = KdVState(N, W1)
    assert all(v.is_zero() for v in hk.qkdv_flow(S, N).values())


def test_n2_first_flow_closed_form():
    S = KdVState(2, W2)
    R = S.ring()
    t = S.t(R, 1)
    b = cyclic_sum_invert(-t, 2)
    assert hk.qkdv_flow(S, 1)[("T", 1)] == t * (b.shift(1) - b)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_first_flow_formula(N):
    S = KdVState(N, W1)
    assert flows_equal(hk.qkdv_flow(S, 1), hk.qkdv1_formula(S))


def test_unreduced_flow_keeps_tN():
    S = KdVState(3, W1, reduced=False)
    assert hk.qkdv_flow(S, 1)[("T", 3)].is_zero()


@pytest.mark.parametrize("N", [2, 3, 4])
def test_h1(N):
    S = KdVState(N, W1)
    H = hk.hamiltonian_res(S, 1)
    assert H == -H.ring.gen("T", 1, 0)


@pytest.mark.parametrize("N", [2, 3])
def test_hN_is_constant(N):
    S = KdVState(N, W1)
    H = hk.hamiltonian_res(S, N)
    assert set(H.t) <= {H.ring.BASE}


def test_only_zero_mode_is_fixed():
    S = KdVState(2, WindowConfig(0, 0, 8))
    assert hk.qkdv_flow(S, 1)[("T", 1)].is_zero()


def test_h3_formula_small_window():
    S = KdVState(2, W2)
    H = hk.hamiltonian_res(S, 3)
    assert H == hk.n2_h3_formula(H.ring)


def test_tau1_formula():
    S = KdVState(2, W2)
    assert hk.qkdv_flow(S, 1)[("T", 1)] == hk.n2_tau1_formula(S.ring())


def test_tau3_formula_window1():
    S = KdVState(2, W1)
    assert hk.qkdv_flow(S, 3)[("T", 1)] == hk.n2_tau3_formula(S.ring())


@pytest.mark.parametrize("N,n", [(2, 1), (3, 1)])
def test_heredity(N, n):
    hk.check_heredity(KdVState(N, W1), n)


def test_displayed_first_bracket_breaks_heredity_at_n3():
    S = KdVState(3, W1)
    pt = S.ring()
    lax = hk.qkdv_flow(S, 1, pt)
    H = hk.hamiltonian_res(S, 4)
    K = poisson.kdv_first(3, True, literal=True)
    lit = {("T", i): transfer(poisson.field_bracket(poisson.Factor("T", i), H, K), pt) for i in (1, 2)}
    assert any(not lax[k].is_zero() for k in lax)
    assert all(lit[k] == -lax[k] for k in lax)


def test_flows_commute():
    hk.check_flow_commutation(KdVState(2, W1), 1, 3)


def test_hamiltonians_commute():
    hk.check_hamiltonians_commute(KdVState(2, W1), 1, 3)


@pytest.mark.parametrize("N,m,n", [(2, 1, 1), (2, 1, 3), (3, 1, 2)])
def test_conservation_witness(N, m, n):
    S = KdVState(N, W1)
    g = hk.check_conservation(S, m, n)
    assert not g.is_zero()


def test_non_conserved_density_has_obstruction():
    S = KdVState(2, W1)
    pt = S.ring()
    big = S.ring(outer=1, degree=3)
    f1 = hk.qkdv_flow(S, 1, pt)
    t = big.series("T", 1)
    dens = (t * t * t).scale(QRat.const(1) / (1 + X))
    dens = dens + (t * t.shift(2) * t).scale(X)
    R = hk.apply_derivation(dens, f1, pt)
    with pytest.raises(NotTotalDifference):
        total_difference_witness(R)


def test_cwf_free_point_vanishes():
    S = KdVState(2, W1, reduced=False)
    for n in (1, 2, 3):
        r = hk.hamiltonian_cwf(S, n)
        assert r.h.ring.BASE not in r.h.t


def test_cwf_n1_matches_b0():
    S = KdVState(2, W2)
    r = hk.hamiltonian_cwf(S, 1)
    R = S.ring()
    b = cyclic_sum_invert(-S.t(R, 1), 2)
    assert r.h.integral() == b.integral()
    assert r.res_part.integral() == b.integral()


@pytest.mark.parametrize("N", [2, 3])
def test_cwf_witness(N):
    S = KdVState(N, W1)
    for n in (1, 2, 3):
        r = hk.hamiltonian_cwf(S, n)
        assert r.witness.shift(0) - r.witness.shift(1) == r.h - r.res_part


def test_qkp_flow_of_D_vanishes():
    R = hk.qkp_ring(1, W1)
    P = PseudoDiffOp.D(R.zero(), 1, R.one())
    assert hk.qkp_flow(P, 1).is_zero()


def test_qkp_induced_flow():
    S = KdVState(2, W1)
    assert flows_equal(hk.induced_flow_from_root(S, 1), hk.qkdv_flow(S, 1))


def test_qkp_flows_commute_on_first_coefficient():
    C, K = 5, 6
    pt = hk.qkp_ring(C, W1)
    big = hk.qkp_ring(C, W1, outer=1, degree=3)
    f = {n: hk.qkp_flow_on_generators(hk.qkp_operator(pt, C, K), n, C) for n in (1, 2)}
    F = {n: hk.qkp_flow_on_generators(hk.qkp_operator(big, C, K), n, C) for n in (1, 2)}
    key = ("P", 1)
    d = hk.apply_derivation(F[1][key], f[2], pt) - hk.apply_derivation(F[2][key], f[1], pt)
    assert not F[2][key].is_zero()
    assert d.is_zero()


def test_j2_commutes():
    S = KdVState(2, W2)
    R = S.ring(outer=1, degree=4)
    J = hk.j2(R)
    for n in (1, 3):
        H = hk.hamiltonian_res(S, n, R)
        for w in (1, 2):
            assert poisson.bracket(J, H, hk.kernels(S, w)).is_zero()


def test_perturbed_j2_does_not_commute():
    S = KdVState(2, W2)
    R = S.ring(outer=1, degree=4)
    bad = poly_sum(R, [(R.gen("T", 1, i) * R.gen("T", 1, -i)).scale(QRat.const(i) / (1 - X ** (2 * i)))
                       for i in (1, 2)])
    H = hk.hamiltonian_res(S, 3, R)
    assert not poisson.bracket(bad, H, hk.kernels(S, 2)).is_zero()


def test_check_failure_carries_witness():
    S = KdVState(2, W1)
    R = S.ring()
    with pytest.raises(CheckFailure) as e:
        hk.require_equal(R.gen("T", 1, 1), R.zero(), "probe")
    assert "t1[1]" in str(e.value.witness)


def test_bad_inputs():
    with pytest.raises(ValueError):
        KdVState(1, W1)
    with pytest.raises(ValueError):
        hk.qkdv_flow(KdVState(2, W1), 0)
