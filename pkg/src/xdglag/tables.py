"""Precomputed basis/quadrature tables shared by assembly and flux evaluation.

Everything here is immutable after construction.  Volume quadrature uses
2p+2 Gauss points per bounded direction (enough for quadratic fluxes, error
norms and data projection) and the M+1-point Radau rule in the Laguerre
direction; exact reference matrices for the bilinear terms are computed
with p+1 points, which integrates them exactly.
"""

import numpy as np

from .basis import (
    gauss_legendre_rule,
    laguerre_dtable,
    laguerre_table,
    legendre_dtable,
    legendre_edge_tables,
    legendre_table,
)

__all__ = ["Workspace"]


def _exact_ref_matrices(p):
    """Reference integrals S = int phi' phi' and C = int phi phi' on [-1,1]."""
    rule = gauss_legendre_rule(p + 1)
    V = legendre_table(p, rule.nodes)
    D = legendre_dtable(p, rule.nodes)
    S = (D * rule.weights) @ D.T
    C = (V * rule.weights) @ D.T  # C[j, j'] = int phi_j phi_j' dxi
    return S, C


class Workspace:
    """Evaluation tables for one (mesh, dofmap) pair."""

    def __init__(self, mesh, dofmap):
        self.mesh = mesh
        self.dofmap = dofmap
        p_x, p_z = dofmap.p_x, dofmap.p_z
        self.px1, self.pz1 = p_x + 1, p_z + 1

        self.xq = gauss_legendre_rule(2 * p_x + 2)
        self.zq = gauss_legendre_rule(2 * p_z + 2)
        self.PX = legendre_table(p_x, self.xq.nodes)
        self.DPX = legendre_dtable(p_x, self.xq.nodes)
        self.PZ = legendre_table(p_z, self.zq.nodes)
        self.DPZ = legendre_dtable(p_z, self.zq.nodes)

        self.Sx, self.Cx = _exact_ref_matrices(p_x)
        self.Sz, self.Cz = _exact_ref_matrices(p_z)

        self.phiLx, self.phiRx, self.dphiLx, self.dphiRx = legendre_edge_tables(p_x)
        self.phiLz, self.phiRz, self.dphiLz, self.dphiRz = legendre_edge_tables(p_z)

        # physical coordinates of the volume quadrature points
        xb = mesh.x_breaks
        self.x_pts = xb[:-1, None] + 0.5 * mesh.dx * (self.xq.nodes + 1.0)  # (N_x, nxq)
        zb = mesh.z_breaks
        if mesh.N_z > 0:
            self.z_pts = zb[:-1, None] + 0.5 * mesh.dz[:, None] * (self.zq.nodes + 1.0)
        else:
            self.z_pts = np.zeros((0, self.zq.n))

        # combined modal -> nodal maps for bounded elements,
        # local mode (i, j) against point (k, l), flattened
        nq = self.xq.n * self.zq.n
        self.Bval = np.einsum("jk,il->ijkl", self.PX, self.PZ).reshape(-1, nq)
        self.Bdx = np.einsum("jk,il->ijkl", self.DPX, self.PZ).reshape(-1, nq)
        self.Bdz = np.einsum("jk,il->ijkl", self.PX, self.DPZ).reshape(-1, nq)
        self.wvol = np.outer(self.xq.weights, self.zq.weights).ravel()  # (nq,)

        if mesh.has_laguerre:
            from .basis import laguerre_radau_rule

            M, beta = mesh.M, mesh.beta
            self.lag_rule = laguerre_radau_rule(M, beta)
            zeta = self.lag_rule.nodes
            self.LZ = laguerre_table(M, beta, zeta)          # (M+1, M+1)
            self.DLZ = laguerre_dtable(M, beta, zeta)        # d/dzeta, physical
            self.lag_trace_val = np.ones(M + 1)
            self.lag_trace_dval = -beta * (0.5 + np.arange(M + 1))
            self.SL = (self.DLZ * self.lag_rule.weights) @ self.DLZ.T
            self.CL = (self.LZ * self.lag_rule.weights) @ self.DLZ.T  # int Lhat_i Lhat_i' d/dz
            self.lag_z_pts = mesh.L_z + zeta                  # (M+1,)
            nql = self.xq.n * zeta.size
            self.BLval = np.einsum("jk,il->ijkl", self.PX, self.LZ).reshape(-1, nql)
            self.BLdx = np.einsum("jk,il->ijkl", self.DPX, self.LZ).reshape(-1, nql)
            self.BLdz = np.einsum("jk,il->ijkl", self.PX, self.DLZ).reshape(-1, nql)
            self.wlag = np.outer(self.xq.weights, self.lag_rule.weights).ravel()
