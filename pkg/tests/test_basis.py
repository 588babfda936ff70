import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xdglag.basis import (LaguerreBasis, gauss_legendre_rule, laguerre_eval,
                          laguerre_radau_rule, laguerre_table,
                          legendre_edge_tables, legendre_eval, legendre_table)


def test_legendre_values():
    assert legendre_eval(0, 0.3) == pytest.approx(1.0)
    assert legendre_eval(1, 1.0) == pytest.approx(np.sqrt(3.0))
    # three-term recurrence oracle at j=2, xi=0.5
    assert legendre_eval(2, 0.5) == pytest.approx(np.sqrt(5) * (3 * 0.25 - 1) / 2)


def test_legendre_rejects_out_of_interval():
    with pytest.raises(ValueError):
        legendre_eval(2, 1.5)
    with pytest.raises(ValueError):
        legendre_eval(-1, 0.0)


def test_legendre_derivative_matches_finite_differences():
    xi = np.linspace(-0.95, 0.95, 11)
    h = 1e-6
    for j in range(6):
        fd = (legendre_eval(j, xi + h) - legendre_eval(j, xi - h)) / (2 * h)
        np.testing.assert_allclose(legendre_eval(j, xi, deriv=True), fd,
                                   rtol=1e-8, atol=1e-7)


def test_legendre_edge_tables():
    phl, phr, dpl, dpr = legendre_edge_tables(2)
    np.testing.assert_allclose(phl, [1.0, -np.sqrt(3), np.sqrt(5)])
    np.testing.assert_allclose(phr, [1.0, np.sqrt(3), np.sqrt(5)])
    # L_1' = 1 on the reference interval
    assert dpr[1] == pytest.approx(np.sqrt(3))
    np.testing.assert_allclose(dpl[:2], [0.0, np.sqrt(3)])
    # endpoint derivatives agree with direct evaluation
    for j in range(3):
        assert dpr[j] == pytest.approx(legendre_eval(j, 1.0, deriv=True))
        assert dpl[j] == pytest.approx(legendre_eval(j, -1.0, deriv=True))


def test_element_orthogonality():
    # int phi_j phi_j' over [-1,1] = 2 delta_jj' by the (p+1)-point rule
    p = 3
    rule = gauss_legendre_rule(p + 1)
    V = legendre_table(p, rule.nodes)
    G = (V * rule.weights) @ V.T
    np.testing.assert_allclose(G, 2.0 * np.eye(p + 1), atol=1e-13)


def test_laguerre_boundary_identities():
    for i in (0, 1, 7, 23, 64):
        for beta in (0.05, 1.0, 4.0, 17.5):
            assert laguerre_eval(i, beta, 0.0) == pytest.approx(1.0, abs=1e-14)
            want = -beta * (0.5 + i)
            got = laguerre_eval(i, beta, 0.0, deriv=True)
            assert got == pytest.approx(want, rel=1e-12)


def test_laguerre_point_value():
    assert laguerre_eval(1, 2.0, 1.0) == pytest.approx((1 - 2) * np.exp(-1.0))
    assert laguerre_eval(2, 5.0, 0.0, deriv=True) == pytest.approx(-12.5)
    assert laguerre_eval(7, 4.0, 0.0) == pytest.approx(1.0)


def test_laguerre_rejects_negative_argument():
    with pytest.raises(ValueError):
        laguerre_eval(1, 2.0, -0.1)
    with pytest.raises(ValueError):
        laguerre_eval(1, -2.0, 0.1)


def test_laguerre_decay():
    vals = laguerre_eval(5, 1.0, np.array([50.0, 80.0, 120.0]))
    assert np.all(np.abs(vals) < 1e-6)
    assert np.abs(vals[2]) < np.abs(vals[0])


def test_gauss_legendre_basics():
    r1 = gauss_legendre_rule(1)
    np.testing.assert_allclose(r1.nodes, [0.0])
    np.testing.assert_allclose(r1.weights, [2.0])
    r2 = gauss_legendre_rule(2)
    np.testing.assert_allclose(np.sort(r2.nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)])
    np.testing.assert_allclose(r2.weights, [1.0, 1.0])
    r3 = gauss_legendre_rule(3)
    assert np.sum(r3.weights * r3.nodes**4) == pytest.approx(2.0 / 5.0)
    with pytest.raises(ValueError):
        gauss_legendre_rule(0)


def test_radau_rule_matches_reference_table():
    # last node and first spacing at beta=1, M=50
    r = laguerre_radau_rule(50, 1.0)
    assert r.n == 51
    assert r.nodes[0] == 0.0
    assert r.nodes[-1] == pytest.approx(182.62, abs=5e-3)
    assert r.nodes[1] == pytest.approx(7.20e-2, rel=1e-3)
    # nodes scale exactly as 1/beta
    r2 = laguerre_radau_rule(50, 2.0)
    np.testing.assert_allclose(r2.nodes, r.nodes / 2.0, rtol=1e-14)
    with pytest.raises(ValueError):
        laguerre_radau_rule(0, 1.0)


@pytest.mark.parametrize("M,beta", [(1, 1.0), (4, 0.3), (12, 2.0), (50, 7.0)])
def test_radau_exactness(M, beta):
    # exact for poly(deg <= 2M) * exp(-beta z): check the monomial moments
    # int z^k e^{-beta z} dz = k! / beta^{k+1}
    r = laguerre_radau_rule(M, beta)
    fact = 1.0
    for k in range(2 * M + 1):
        if k > 0:
            fact *= k
        approx = np.sum(r.weights * r.nodes**k * np.exp(-beta * r.nodes))
        assert approx == pytest.approx(fact / beta ** (k + 1), rel=1e-12)


@given(beta=st.floats(0.05, 30.0), M=st.integers(1, 40))
@settings(max_examples=25, deadline=None)
def test_laguerre_orthonormality(beta, M):
    rule = laguerre_radau_rule(M, beta)
    T = laguerre_table(M, beta, rule.nodes)
    G = (T * rule.weights) @ T.T
    np.testing.assert_allclose(G, np.eye(M + 1) / beta, atol=1e-12 / beta)


def test_laguerre_basis_wrapper():
    lb = LaguerreBasis(M=6, beta=3.0)
    np.testing.assert_allclose(lb.edge_derivatives(),
                               [-3.0 * (0.5 + i) for i in range(7)])
    assert lb.rule.n == 7
    z = np.linspace(0.0, 4.0, 9)
    np.testing.assert_allclose(lb.table(z)[4], laguerre_eval(4, 3.0, z))
