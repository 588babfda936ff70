"""Orthogonal bases and quadrature rules for the strip discretization.

Two families of basis functions are used: normalized Legendre polynomials
sqrt(2j+1)*L_j on the reference interval [-1, 1] for the bounded elements,
and scaled Laguerre functions L_i(beta*zeta)*exp(-beta*zeta/2) on [0, inf)
for the semi-infinite direction.  The Laguerre family satisfies

    int_0^inf  Lhat_i Lhat_k dzeta = delta_ik / beta,
    Lhat_i(0) = 1,      Lhat_i'(0) = -beta*(1/2 + i),
    Lhat_i(zeta) -> 0   as zeta -> inf,

which is exactly what the interface coupling relies on.  All semi-infinite
integrals of products of basis functions (and derivatives) are evaluated
exactly by a Gauss-Laguerre-Radau rule with the endpoint node at zero.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_genlaguerre

__all__ = [
    "QuadratureRule",
    "LegendreBasis",
    "LaguerreBasis",
    "legendre_eval",
    "legendre_table",
    "legendre_edge_tables",
    "laguerre_eval",
    "laguerre_table",
    "gauss_legendre_rule",
    "laguerre_radau_rule",
]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a 1D quadrature rule.

    ``kind`` is 'gauss-legendre' (on [-1, 1], weights sum to 2) or
    'laguerre-radau' (on [0, inf), weights premultiplied by exp(+node) and
    scaled by 1/beta so that sum(w_k * f(z_k)) approximates the plain
    integral of f over [0, inf)).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size


def _legendre_pair(n: int, x: np.ndarray):
    """Values of the standard Legendre polynomials L_n and L_{n-1} at x."""
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    for k in range(n):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return p, p_prev


def legendre_eval(j: int, xi, deriv: bool = False):
    """Normalized Legendre basis value sqrt(2j+1)*L_j(xi), or its derivative.

    xi must lie in the reference interval [-1, 1].
    """
    if j < 0:
        raise ValueError("mode index must be nonnegative")
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < -1.0 - 1e-14) or np.any(xi > 1.0 + 1e-14):
        raise ValueError("evaluation point outside reference interval [-1, 1]")
    scale = np.sqrt(2 * j + 1)
    p, p_prev = _legendre_pair(j, xi)
    if not deriv:
        return scale * p
    if j == 0:
        return np.zeros_like(xi)
    # derivative via (x^2-1) L_j' = j (x L_j - L_{j-1}); endpoint values by
    # the closed form L_j'(+-1) = (+-1)^{j-1} j(j+1)/2
    out = np.empty_like(xi)
    interior = np.abs(xi) < 1.0 - 1e-12
    xin = xi[interior]
    pin, pprevin = p[interior], p_prev[interior]
    out[interior] = j * (xin * pin - pprevin) / (xin**2 - 1.0)
    edge = 0.5 * j * (j + 1)
    out[~interior] = np.where(xi[~interior] > 0, edge, (-1.0) ** (j - 1) * edge)
    return scale * out


def legendre_table(p: int, xi) -> np.ndarray:
    """Table of normalized Legendre values, shape (p+1, len(xi))."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty((p + 1, xi.size))
    p_prev = np.zeros_like(xi)
    pk = np.ones_like(xi)
    for k in range(p + 1):
        out[k] = np.sqrt(2 * k + 1) * pk
        pk, p_prev = ((2 * k + 1) * xi * pk - k * p_prev) / (k + 1), pk
    return out


def legendre_dtable(p: int, xi) -> np.ndarray:
    """Reference-interval derivatives of the normalized Legendre basis."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty((p + 1, xi.size))
    for k in range(p + 1):
        out[k] = legendre_eval(k, xi, deriv=True)
    return out


def legendre_edge_tables(p: int):
    """Reference endpoint traces (phiL, phiR, dphiL, dphiR), each length p+1.

    Values are on [-1, 1]; physical derivatives need the caller's chain-rule
    factor 2/Delta.
    """
    j = np.arange(p + 1)
    scale = np.sqrt(2 * j + 1)
    phi_r = scale.copy()
    phi_l = scale * (-1.0) ** j
    dedge = 0.5 * j * (j + 1)
    dphi_r = scale * dedge
    dphi_l = scale * dedge * (-1.0) ** (j + 1)
    return phi_l, phi_r, dphi_l, dphi_r


def _scaled_laguerre_all(m: int, u: np.ndarray, alpha: int = 0) -> np.ndarray:
    """Table of L_i^(alpha)(u) * exp(-u/2) for i = 0..m, shape (m+1, len(u)).

    The exp(-u/2) damping keeps the recurrence stable out to the last
    Radau node (u ~ 4M) where the bare polynomials overflow.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty((m + 1, u.size))
    damp = np.exp(-0.5 * u)
    out[0] = damp
    if m >= 1:
        out[1] = (1.0 + alpha - u) * damp
    for i in range(1, m):
        out[i + 1] = ((2 * i + 1 + alpha - u) * out[i] - (i + alpha) * out[i - 1]) / (i + 1)
    return out


def laguerre_eval(i: int, beta: float, zeta, deriv: bool = False):
    """Scaled Laguerre function L_i(beta*zeta)exp(-beta*zeta/2) or d/dzeta."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if i < 0:
        raise ValueError("mode index must be nonnegative")
    zeta = np.asarray(zeta, dtype=float)
    if np.any(zeta < 0):
        raise ValueError("zeta must be nonnegative")
    u = np.atleast_1d(beta * zeta)
    vals = _scaled_laguerre_all(i, u)
    if not deriv:
        res = vals[i]
    else:
        # d/dzeta [L_i(u) e^{-u/2}] = beta * (-L_{i-1}^{(1)}(u) - L_i(u)/2) e^{-u/2}
        res = -0.5 * beta * vals[i]
        if i >= 1:
            gen1 = _scaled_laguerre_all(i - 1, u, alpha=1)
            res = res - beta * gen1[i - 1]
    return res.reshape(np.shape(zeta)) if np.ndim(zeta) else res[0]


def laguerre_table(m: int, beta: float, zeta) -> np.ndarray:
    """Values of the scaled Laguerre family at zeta, shape (m+1, len(zeta))."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    return _scaled_laguerre_all(m, beta * zeta)


def laguerre_dtable(m: int, beta: float, zeta) -> np.ndarray:
    """d/dzeta of the scaled Laguerre family at zeta, shape (m+1, len(zeta))."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    u = beta * zeta
    vals = _scaled_laguerre_all(m, u)
    out = -0.5 * beta * vals
    if m >= 1:
        gen1 = _scaled_laguerre_all(m - 1, u, alpha=1)
        out[1:] -= beta * gen1
    return out


def gauss_legendre_rule(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1] (exact for degree 2n-1)."""
    if n < 1:
        raise ValueError("point count must be at least 1")
    nodes, weights = leggauss(n)
    return QuadratureRule(nodes, weights, "gauss-legendre")


def _polish_radau_nodes(m: int, t: np.ndarray) -> np.ndarray:
    """Newton-polish the interior Radau nodes (zeros of L_m^(1)).

    Works on the exponentially damped functions so residuals stay O(1);
    tolerance 1e-14 on the damped polynomial residual.
    """
    for _ in range(12):
        g1 = _scaled_laguerre_all(m, t, alpha=1)
        f = g1[m]
        # d/dt [L_m^(1) e^{-t/2}] = (-L_{m-1}^(2) - L_m^(1)/2) e^{-t/2}
        g2 = _scaled_laguerre_all(m - 1, t, alpha=2)
        df = -g2[m - 1] - 0.5 * f
        step = f / df
        t = t - step
        if np.max(np.abs(f)) < 1e-14 and np.max(np.abs(step) / t) < 1e-15:
            break
    return t


def laguerre_radau_rule(M: int, beta: float) -> QuadratureRule:
    """Gauss-Laguerre-Radau rule with M+1 nodes on [0, inf), node at 0.

    Nodes are t_k/beta with t_0 = 0 and t_1..t_M the zeros of the
    generalized Laguerre polynomial L_M^(1).  Weights carry the exp(+t_k)
    modification and the 1/beta scaling, so sum(w_k f(z_k)) equals
    int_0^inf f dzeta exactly whenever f = (poly of degree <= 2M) * e^{-beta*zeta}.
    """
    if M < 1:
        raise ValueError("M must be at least 1 (M=0 has no interior structure)")
    if beta <= 0:
        raise ValueError("beta must be positive")
    t_int, _ = roots_genlaguerre(M, 1)
    t = np.concatenate([[0.0], _polish_radau_nodes(M, t_int)])
    # w_k = e^{t_k} / ((M+1) L_M(t_k)^2); evaluate through the damped family
    lm = _scaled_laguerre_all(M, t)[M]
    weights = 1.0 / (beta * (M + 1) * lm**2)
    return QuadratureRule(t / beta, weights, "laguerre-radau")


@dataclass(frozen=True)
class LegendreBasis:
    """Normalized Legendre basis of degree p on the reference interval."""

    p: int

    def eval(self, j, xi, deriv=False):
        return legendre_eval(j, xi, deriv)

    def table(self, xi, deriv=False):
        return legendre_dtable(self.p, xi) if deriv else legendre_table(self.p, xi)

    def edge_tables(self):
        return legendre_edge_tables(self.p)


@dataclass(frozen=True)
class LaguerreBasis:
    """Scaled Laguerre basis with modes 0..M and scaling parameter beta."""

    M: int
    beta: float
    rule: QuadratureRule = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rule", laguerre_radau_rule(self.M, self.beta))

    def eval(self, i, zeta, deriv=False):
        return laguerre_eval(i, self.beta, zeta, deriv)

    def table(self, zeta, deriv=False):
        if deriv:
            return laguerre_dtable(self.M, self.beta, zeta)
        return laguerre_table(self.M, self.beta, zeta)

    def edge_derivatives(self) -> np.ndarray:
        """d/dzeta at the interface: -beta*(1/2 + i) for every mode."""
        return -self.beta * (0.5 + np.arange(self.M + 1))
