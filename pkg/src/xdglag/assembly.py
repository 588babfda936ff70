"""Assembly of the algebraic operators M, A, G, F and the right-hand side.

The semi-discrete problem reads  M dq/dt + A q + F(q) + G q = f,  with a
diagonal mass matrix (dx*dz on bounded rows, dx/beta on Laguerre rows), the
NIPG diffusion operator A built from local edge matrices plus the volume
stiffness, a reaction operator G, and (for linear models) an advection
matrix F assembled from the same Rusanov edge terms as the nonlinear path.

Local edge blocks are indexed [trial, test]; the scatter places them at
(row=test dof, col=trial dof).  Triplets are accumulated in coordinate form
and summed, so assembly order is immaterial.
"""

from collections import namedtuple
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .basis import legendre_edge_tables
from .mesh import DofMap, EdgeSet, StripMesh
from .tables import Workspace

__all__ = [
    "SystemMatrices",
    "LocalEdgeMatrices",
    "local_edge_matrices",
    "assemble_mass",
    "assemble_diffusion",
    "assemble_reaction",
    "assemble_linear_advection",
    "advection_dirichlet_lift",
    "assemble_rhs",
    "assemble_system",
    "dump_matrix_coo",
]

LocalEdgeMatrices = namedtuple("LocalEdgeMatrices", ["m11", "m12", "m21", "m22"])


@dataclass
class SystemMatrices:
    """Time-independent operators of the algebraic form (one variable)."""

    mass: np.ndarray                       # diagonal entries
    diffusion: sp.csr_matrix
    reaction: sp.csr_matrix
    linear_advection: Optional[sp.csr_matrix]
    eps: float
    sigma: float


class _Triplets:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add(self, rows, cols, vals):
        rows, cols, vals = np.broadcast_arrays(rows, cols, vals)
        self.rows.append(rows.ravel())
        self.cols.append(cols.ravel())
        self.vals.append(np.ascontiguousarray(vals.ravel(), dtype=float))

    def to_csr(self, n):
        if not self.rows:
            return sp.csr_matrix((n, n))
        r = np.concatenate(self.rows)
        c = np.concatenate(self.cols)
        v = np.concatenate(self.vals)
        return sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()


def _outer(u, v):
    return np.multiply.outer(np.asarray(u, float), np.asarray(v, float))


def _edge_blocks(val_a, dval_a, val_b, dval_b, mu, eps, sigma, measure):
    """Two-sided interior-edge blocks, normal oriented a -> b."""
    half = 0.5 * mu * measure
    m11 = -half * _outer(dval_a, val_a) + eps * half * _outer(val_a, dval_a) \
        + sigma * _outer(val_a, val_a)
    m12 = half * _outer(dval_a, val_b) + eps * half * _outer(val_a, dval_b) \
        - sigma * _outer(val_a, val_b)
    m21 = -half * _outer(dval_b, val_a) - eps * half * _outer(val_b, dval_a) \
        - sigma * _outer(val_b, val_a)
    m22 = half * _outer(dval_b, val_b) - eps * half * _outer(val_b, dval_b) \
        + sigma * _outer(val_b, val_b)
    return LocalEdgeMatrices(m11, m12, m21, m22)


def _dirichlet_block(val, dval, mu, eps, sigma, measure, s):
    """One-sided block on a Dirichlet edge; s = outward direction sign."""
    return (-mu * s * measure * _outer(dval, val)
            + eps * mu * s * measure * _outer(val, dval)
            + sigma * _outer(val, val))


def local_edge_matrices(kind, mu, eps, sigma, *, dx=None, dz=None,
                        dz_a=None, dz_b=None, beta=None,
                        p_x=None, p_z=None, M=None) -> LocalEdgeMatrices:
    """Dense local blocks for one edge of the given kind.

    'vertical' and 'laguerre-vertical' act on the x-traces (blocks of size
    (p_x+1)^2, the latter with the edge measure 1/beta in place of dz);
    'horizontal' acts on the z-traces with per-side element heights dz_a
    (below) and dz_b (above); 'coupling' pairs the z-traces of the last
    bounded row with the Laguerre interface values (1, -beta*(1/2+i)).
    """
    if kind in ("vertical", "laguerre-vertical"):
        phl, phr, dpl, dpr = legendre_edge_tables(p_x)
        dval = 2.0 / dx
        measure = dz if kind == "vertical" else 1.0 / beta
        return _edge_blocks(phr, dpr * dval, phl, dpl * dval,
                            mu, eps, sigma, measure)
    if kind == "horizontal":
        phl, phr, dpl, dpr = legendre_edge_tables(p_z)
        return _edge_blocks(phr, dpr * (2.0 / dz_a), phl, dpl * (2.0 / dz_b),
                            mu, eps, sigma, dx)
    if kind == "coupling":
        phl, phr, dpl, dpr = legendre_edge_tables(p_z)
        ones = np.ones(M + 1)
        dlag = -beta * (0.5 + np.arange(M + 1))
        return _edge_blocks(phr, dpr * (2.0 / dz_a), ones, dlag,
                            mu, eps, sigma, dx)
    raise ValueError(f"unknown edge kind {kind!r}")


def assemble_mass(mesh: StripMesh, dofmap: DofMap) -> np.ndarray:
    """Diagonal mass entries: dx*dz per bounded row, dx/beta in the layer."""
    px1, pz1 = dofmap.p_x + 1, dofmap.p_z + 1
    parts = []
    if mesh.N_z > 0:
        parts.append(np.repeat(mesh.dx * mesh.dz, mesh.N_x * px1 * pz1))
    if mesh.has_laguerre:
        parts.append(np.full(dofmap.n_unbnd, mesh.dx / mesh.beta))
    return np.concatenate(parts) if parts else np.zeros(0)


# scatter helpers -----------------------------------------------------------

def _scatter_x_blocks(tr, dm, mz, mxa, mxb, blocks, laguerre=False):
    """Blocks over x-trace modes (j), diagonal in the other direction."""
    px1 = dm.p_x + 1
    nother = dm.mesh.M + 1 if laguerre else dm.p_z + 1
    j = np.arange(px1)
    i = np.arange(nother)
    jt = j[None, None, :, None]     # trial
    jT = j[None, None, None, :]     # test
    ii = i[None, :, None, None]
    pairs = ((mxa, mxa, blocks.m11), (mxa, mxb, blocks.m12),
             (mxb, mxa, blocks.m21), (mxb, mxb, blocks.m22))
    for mt, mT, blk in pairs:
        mt = np.asarray(mt)[:, None, None, None]
        mT = np.asarray(mT)[:, None, None, None]
        if laguerre:
            rows = dm.index_laguerre(mT, ii, jT)
            cols = dm.index_laguerre(mt, ii, jt)
        else:
            rows = dm.index_bounded(mT, mz, jT, ii)
            cols = dm.index_bounded(mt, mz, jt, ii)
        tr.add(rows, cols, blk[None, None, :, :])


def _scatter_z_blocks(tr, dm, mx, mza, mzb, blocks):
    """Blocks over z-trace modes (i), diagonal in j (horizontal edges)."""
    px1, pz1 = dm.p_x + 1, dm.p_z + 1
    j = np.arange(px1)[None, :, None, None]
    i = np.arange(pz1)
    it = i[None, None, :, None]
    iT = i[None, None, None, :]
    mx = np.asarray(mx)[:, None, None, None]
    pairs = ((mza, mza, blocks.m11), (mza, mzb, blocks.m12),
             (mzb, mza, blocks.m21), (mzb, mzb, blocks.m22))
    for mt, mT, blk in pairs:
        rows = dm.index_bounded(mx, mT, j, iT)
        cols = dm.index_bounded(mx, mt, j, it)
        tr.add(rows, cols, blk[None, None, :, :])


def _scatter_coupling(tr, dm, blocks):
    """Interface blocks: bounded row N_z-1 against the Laguerre layer."""
    m = dm.mesh
    px1, pz1, M1 = dm.p_x + 1, dm.p_z + 1, m.M + 1
    mx = np.arange(m.N_x)[:, None, None, None]
    j = np.arange(px1)[None, :, None, None]
    ib = np.arange(pz1)
    il = np.arange(M1)
    nz = m.N_z - 1

    def bidx(modes, axis):
        return modes[None, None, :, None] if axis == "t" else modes[None, None, None, :]

    # trial bounded -> test bounded
    tr.add(dm.index_bounded(mx, nz, j, bidx(ib, "T")),
           dm.index_bounded(mx, nz, j, bidx(ib, "t")),
           blocks.m11[None, None, :, :])
    # trial bounded -> test laguerre
    tr.add(dm.index_laguerre(mx, bidx(il, "T"), j),
           dm.index_bounded(mx, nz, j, bidx(ib, "t")),
           blocks.m12[None, None, :, :])
    # trial laguerre -> test bounded
    tr.add(dm.index_bounded(mx, nz, j, bidx(ib, "T")),
           dm.index_laguerre(mx, bidx(il, "t"), j),
           blocks.m21[None, None, :, :])
    # trial laguerre -> test laguerre
    tr.add(dm.index_laguerre(mx, bidx(il, "T"), j),
           dm.index_laguerre(mx, bidx(il, "t"), j),
           blocks.m22[None, None, :, :])


def _scatter_one_sided_z(tr, dm, mz, block, laguerre=False):
    """One-sided z-mode block on every column (bottom/top rows)."""
    m = dm.mesh
    px1 = dm.p_x + 1
    nother = m.M + 1 if laguerre else dm.p_z + 1
    mx = np.arange(m.N_x)[:, None, None, None]
    j = np.arange(px1)[None, :, None, None]
    i = np.arange(nother)
    it = i[None, None, :, None]
    iT = i[None, None, None, :]
    if laguerre:
        rows = dm.index_laguerre(mx, iT, j)
        cols = dm.index_laguerre(mx, it, j)
    else:
        rows = dm.index_bounded(mx, mz, j, iT)
        cols = dm.index_bounded(mx, mz, j, it)
    tr.add(rows, cols, block[None, None, :, :])


def _scatter_one_sided_x(tr, dm, mx, block, laguerre=False):
    """One-sided x-mode blocks on a boundary column (left/right sides)."""
    m = dm.mesh
    px1 = dm.p_x + 1
    j = np.arange(px1)
    jt = j[None, :, None]
    jT = j[None, None, :]
    if laguerre:
        i = np.arange(m.M + 1)[:, None, None]
        rows = dm.index_laguerre(mx, i, jT)
        cols = dm.index_laguerre(mx, i, jt)
        tr.add(rows, cols, block[None, :, :])
    else:
        for mz in range(m.N_z):
            i = np.arange(dm.p_z + 1)[:, None, None]
            rows = dm.index_bounded(mx, mz, jT, i)
            cols = dm.index_bounded(mx, mz, jt, i)
            tr.add(rows, cols, block[mz][None, :, :])


def assemble_diffusion(mesh: StripMesh, edges: EdgeSet, dofmap: DofMap,
                       mu, eps: float = 1.0, sigma: float = 0.0,
                       ws: Optional[Workspace] = None) -> sp.csr_matrix:
    """NIPG diffusion operator with its bounded/Laguerre/coupling blocks."""
    mu_x, mu_z = mu
    if mu_x < 0 or mu_z < 0:
        raise ValueError("diffusivities must be nonnegative")
    bc = edges.bc
    if mesh.has_laguerre and bc.top is not None:
        raise ValueError("Dirichlet/Neumann on the top side invalid with a Laguerre layer")
    ws = ws or Workspace(mesh, dofmap)
    dm = dofmap
    px1, pz1 = dm.p_x + 1, dm.p_z + 1
    tr = _Triplets()
    dx, dz = mesh.dx, mesh.dz
    nx, nz = mesh.N_x, mesh.N_z

    # volume stiffness, bounded rows
    if nz > 0:
        mx = np.arange(nx)[:, None, None, None]
        j = np.arange(px1)
        i = np.arange(pz1)
        for mz in range(nz):
            if mu_x != 0.0:
                blk = mu_x * dz[mz] * (2.0 / dx) * ws.Sx
                rows = dm.index_bounded(mx, mz, j[None, None, None, :],
                                        i[None, :, None, None])
                cols = dm.index_bounded(mx, mz, j[None, None, :, None],
                                        i[None, :, None, None])
                tr.add(rows, cols, blk[None, None, :, :])
            if mu_z != 0.0:
                blk = mu_z * dx * (2.0 / dz[mz]) * ws.Sz
                rows = dm.index_bounded(mx, mz, j[None, :, None, None],
                                        i[None, None, None, :])
                cols = dm.index_bounded(mx, mz, j[None, :, None, None],
                                        i[None, None, :, None])
                tr.add(rows, cols, blk[None, None, :, :])

    # volume stiffness, Laguerre layer
    if mesh.has_laguerre:
        beta = mesh.beta
        mx = np.arange(nx)[:, None, None, None]
        j = np.arange(px1)
        il = np.arange(mesh.M + 1)
        if mu_x != 0.0:
            blk = mu_x * (1.0 / beta) * (2.0 / dx) * ws.Sx
            rows = dm.index_laguerre(mx, il[None, :, None, None],
                                     j[None, None, None, :])
            cols = dm.index_laguerre(mx, il[None, :, None, None],
                                     j[None, None, :, None])
            tr.add(rows, cols, blk[None, None, :, :])
        if mu_z != 0.0:
            blk = mu_z * dx * ws.SL
            rows = dm.index_laguerre(mx, il[None, None, None, :],
                                     j[None, :, None, None])
            cols = dm.index_laguerre(mx, il[None, None, :, None],
                                     j[None, :, None, None])
            tr.add(rows, cols, blk[None, None, :, :])

    # interior vertical edges (bounded rows), periodic pair included
    for mz in range(nz):
        blocks = local_edge_matrices("vertical", mu_x, eps, sigma,
                                     dx=dx, dz=dz[mz], p_x=dm.p_x)
        mxa = np.arange(nx - 1)
        mxb = mxa + 1
        if bc.periodic_x:
            mxa = np.concatenate([mxa, [nx - 1]])
            mxb = np.concatenate([mxb, [0]])
        if mxa.size:
            _scatter_x_blocks(tr, dm, mz, mxa, mxb, blocks)

    # interior horizontal edges (bounded rows)
    for mz in range(nz - 1):
        blocks = local_edge_matrices("horizontal", mu_z, eps, sigma,
                                     dx=dx, dz_a=dz[mz], dz_b=dz[mz + 1],
                                     p_z=dm.p_z)
        _scatter_z_blocks(tr, dm, np.arange(nx), mz, mz + 1, blocks)

    if mesh.has_laguerre:
        # interior vertical edges within the layer
        blocks = local_edge_matrices("laguerre-vertical", mu_x, eps, sigma,
                                     dx=dx, beta=mesh.beta, p_x=dm.p_x)
        mxa = np.arange(nx - 1)
        mxb = mxa + 1
        if bc.periodic_x:
            mxa = np.concatenate([mxa, [nx - 1]])
            mxb = np.concatenate([mxb, [0]])
        if mxa.size:
            _scatter_x_blocks(tr, dm, None, mxa, mxb, blocks, laguerre=True)
        # coupling at the interface
        if nz > 0:
            blocks = local_edge_matrices("coupling", mu_z, eps, sigma,
                                         dx=dx, dz_a=dz[-1], beta=mesh.beta,
                                         p_z=dm.p_z, M=mesh.M)
            _scatter_coupling(tr, dm, blocks)

    # Dirichlet boundary edges
    if bc.bottom == "dirichlet":
        if nz > 0:
            phl = ws.phiLz
            dpl = ws.dphiLz * (2.0 / dz[0])
            blk = _dirichlet_block(phl, dpl, mu_z, eps, sigma, dx, s=-1.0)
            _scatter_one_sided_z(tr, dm, 0, blk)
        else:
            blk = _dirichlet_block(ws.lag_trace_val, ws.lag_trace_dval,
                                   mu_z, eps, sigma, dx, s=-1.0)
            _scatter_one_sided_z(tr, dm, None, blk, laguerre=True)
    if bc.top == "dirichlet":
        phr = ws.phiRz
        dpr = ws.dphiRz * (2.0 / dz[-1])
        blk = _dirichlet_block(phr, dpr, mu_z, eps, sigma, dx, s=+1.0)
        _scatter_one_sided_z(tr, dm, nz - 1, blk)
    if not bc.periodic_x:
        for side, mx_col, val, dref, s in (
                ("left", 0, ws.phiLx, ws.dphiLx, -1.0),
                ("right", nx - 1, ws.phiRx, ws.dphiRx, +1.0)):
            if getattr(bc, side) != "dirichlet":
                continue
            dval = dref * (2.0 / dx)
            blks = [( _dirichlet_block(val, dval, mu_x, eps, sigma, dz[mz], s))
                    for mz in range(nz)]
            if blks:
                _scatter_one_sided_x(tr, dm, mx_col, np.array(blks))
            if mesh.has_laguerre:
                blk = _dirichlet_block(val, dval, mu_x, eps, sigma,
                                       1.0 / mesh.beta, s)
                _scatter_one_sided_x(tr, dm, mx_col, blk, laguerre=True)

    return tr.to_csr(dm.n_xtd)


def assemble_reaction(mesh: StripMesh, dofmap: DofMap, gamma,
                      ws: Optional[Workspace] = None) -> sp.csr_matrix:
    """Reaction operator from gamma(x, z); constant gamma gives gamma*M."""
    dm = dofmap
    n = dm.n_xtd
    if gamma is None:
        return sp.csr_matrix((n, n))
    if np.isscalar(gamma):
        if gamma == 0.0:
            return sp.csr_matrix((n, n))
        return sp.diags(float(gamma) * assemble_mass(mesh, dm)).tocsr()
    ws = ws or Workspace(mesh, dm)
    tr = _Triplets()
    nx, nz = mesh.N_x, mesh.N_z
    px1, pz1 = dm.p_x + 1, dm.p_z + 1
    if nz > 0:
        X = np.broadcast_to(ws.x_pts[None, :, :, None],
                            (nz, nx, ws.xq.n, ws.zq.n))
        Z = np.broadcast_to(ws.z_pts[:, None, None, :],
                            (nz, nx, ws.xq.n, ws.zq.n))
        G = np.asarray(gamma(X, Z), dtype=float)
        jac = (mesh.dx / 2.0) * (mesh.dz / 2.0)
        W = G.reshape(nz, nx, -1) * ws.wvol * jac[:, None, None]
        blocks = np.einsum("ap,ezp,bp->ezab", ws.Bval, W, ws.Bval)
        base = (np.arange(nz)[:, None] * nx + np.arange(nx)[None, :]) * (px1 * pz1)
        loc = np.arange(px1 * pz1)
        rows = base[:, :, None, None] + loc[None, None, :, None]
        cols = base[:, :, None, None] + loc[None, None, None, :]
        tr.add(rows, cols, blocks)
    if mesh.has_laguerre:
        M1 = mesh.M + 1
        X = np.broadcast_to(ws.x_pts[:, :, None], (nx, ws.xq.n, M1))
        Z = np.broadcast_to(ws.lag_z_pts[None, None, :], (nx, ws.xq.n, M1))
        G = np.asarray(gamma(X, Z), dtype=float)
        W = G.reshape(nx, -1) * ws.wlag * (mesh.dx / 2.0)
        blocks = np.einsum("ap,ep,bp->eab", ws.BLval, W, ws.BLval)
        mx = np.arange(nx)[:, None, None]
        il = np.arange(M1)
        j = np.arange(px1)
        loc_i = np.repeat(il, px1)
        loc_j = np.tile(j, M1)
        gidx = dm.index_laguerre(mx, loc_i[None, :, None], loc_j[None, :, None])
        rows = np.broadcast_to(gidx, (nx, loc_i.size, loc_i.size))
        cols = np.swapaxes(rows, 1, 2)
        tr.add(rows, cols, blocks)
    return tr.to_csr(n)


def _edge_adv_blocks(u_n, val_a, val_b, measure):
    """Rusanov edge blocks for a linear flux u*q, normal a -> b."""
    nu = abs(u_n)
    e11 = 0.5 * (u_n + nu) * measure * _outer(val_a, val_a)
    e12 = -0.5 * (u_n + nu) * measure * _outer(val_a, val_b)
    e21 = 0.5 * (u_n - nu) * measure * _outer(val_b, val_a)
    e22 = -0.5 * (u_n - nu) * measure * _outer(val_b, val_b)
    return LocalEdgeMatrices(e11, e12, e21, e22)


def assemble_linear_advection(mesh: StripMesh, edges: EdgeSet, dofmap: DofMap,
                              velocity,
                              ws: Optional[Workspace] = None) -> sp.csr_matrix:
    """Advection matrix for F(q) = u q with constant velocity u = (u_x, u_z).

    Its action on any coefficient vector coincides with the nonlinear
    transport evaluation (homogeneous boundary data).
    """
    u_x, u_z = velocity
    if not (np.isscalar(u_x) and np.isscalar(u_z)):
        raise ValueError("assemble_linear_advection expects constant velocity")
    ws = ws or Workspace(mesh, dofmap)
    dm = dofmap
    bc = edges.bc
    tr = _Triplets()
    dx, dz = mesh.dx, mesh.dz
    nx, nz = mesh.N_x, mesh.N_z
    px1, pz1 = dm.p_x + 1, dm.p_z + 1
    j = np.arange(px1)

    # volume terms: -int u q . grad(phi)
    if nz > 0:
        i = np.arange(pz1)
        mx = np.arange(nx)[:, None, None, None]
        for mz in range(nz):
            if u_x != 0.0:
                blk = -u_x * dz[mz] * ws.Cx
                rows = dm.index_bounded(mx, mz, j[None, None, None, :],
                                        i[None, :, None, None])
                cols = dm.index_bounded(mx, mz, j[None, None, :, None],
                                        i[None, :, None, None])
                tr.add(rows, cols, blk[None, None, :, :])
            if u_z != 0.0:
                blk = -u_z * dx * ws.Cz
                rows = dm.index_bounded(mx, mz, j[None, :, None, None],
                                        i[None, None, None, :])
                cols = dm.index_bounded(mx, mz, j[None, :, None, None],
                                        i[None, None, :, None])
                tr.add(rows, cols, blk[None, None, :, :])
    if mesh.has_laguerre:
        il = np.arange(mesh.M + 1)
        mx = np.arange(nx)[:, None, None, None]
        if u_x != 0.0:
            blk = -u_x * (1.0 / mesh.beta) * ws.Cx
            rows = dm.index_laguerre(mx, il[None, :, None, None],
                                     j[None, None, None, :])
            cols = dm.index_laguerre(mx, il[None, :, None, None],
                                     j[None, None, :, None])
            tr.add(rows, cols, blk[None, None, :, :])
        if u_z != 0.0:
            blk = -u_z * dx * ws.CL
            rows = dm.index_laguerre(mx, il[None, None, None, :],
                                     j[None, :, None, None])
            cols = dm.index_laguerre(mx, il[None, None, :, None],
                                     j[None, :, None, None])
            tr.add(rows, cols, blk[None, None, :, :])

    # interior vertical edges
    mxa0 = np.arange(nx - 1)
    mxb0 = mxa0 + 1
    if bc.periodic_x:
        mxa0 = np.concatenate([mxa0, [nx - 1]])
        mxb0 = np.concatenate([mxb0, [0]])
    if u_x != 0.0 and mxa0.size:
        for mz in range(nz):
            blocks = _edge_adv_blocks(u_x, ws.phiRx, ws.phiLx, dz[mz])
            _scatter_x_blocks(tr, dm, mz, mxa0, mxb0, blocks)
        if mesh.has_laguerre:
            blocks = _edge_adv_blocks(u_x, ws.phiRx, ws.phiLx, 1.0 / mesh.beta)
            _scatter_x_blocks(tr, dm, None, mxa0, mxb0, blocks, laguerre=True)

    if u_z != 0.0:
        # interior horizontal edges
        for mz in range(nz - 1):
            blocks = _edge_adv_blocks(u_z, ws.phiRz, ws.phiLz, dx)
            _scatter_z_blocks(tr, dm, np.arange(nx), mz, mz + 1, blocks)
        # interface edges
        if mesh.has_laguerre and nz > 0:
            blocks = _edge_adv_blocks(u_z, ws.phiRz, ws.lag_trace_val, dx)
            _scatter_coupling(tr, dm, blocks)

    # boundary edges: Dirichlet keeps the interior-trace part of the Rusanov
    # flux (the data part is a right-hand-side lift); outflow/neumann copy
    # the interior trace.
    def one_sided_coeff(kind, u_n):
        if kind == "dirichlet":
            return 0.5 * (u_n + abs(u_n))
        return u_n  # outflow / neumann ghost copy

    if u_z != 0.0:
        cb = one_sided_coeff(bc.bottom, -u_z)
        if cb != 0.0:
            if nz > 0:
                blk = cb * dx * _outer(ws.phiLz, ws.phiLz)
                _scatter_one_sided_z(tr, dm, 0, blk)
            else:
                blk = cb * dx * _outer(ws.lag_trace_val, ws.lag_trace_val)
                _scatter_one_sided_z(tr, dm, None, blk, laguerre=True)
        if bc.top is not None:
            ct = one_sided_coeff(bc.top, u_z)
            if ct != 0.0:
                blk = ct * dx * _outer(ws.phiRz, ws.phiRz)
                _scatter_one_sided_z(tr, dm, nz - 1, blk)
    if u_x != 0.0 and not bc.periodic_x:
        for side, mx_col, val, u_n in (("left", 0, ws.phiLx, -u_x),
                                       ("right", nx - 1, ws.phiRx, u_x)):
            c = one_sided_coeff(getattr(bc, side), u_n)
            if c == 0.0:
                continue
            blks = np.array([c * dz[mz] * _outer(val, val) for mz in range(nz)])
            if nz > 0:
                _scatter_one_sided_x(tr, dm, mx_col, blks)
            if mesh.has_laguerre:
                blk = c * (1.0 / mesh.beta) * _outer(val, val)
                _scatter_one_sided_x(tr, dm, mx_col, blk, laguerre=True)

    return tr.to_csr(dm.n_xtd)


def advection_dirichlet_lift(mesh: StripMesh, edges: EdgeSet, dofmap: DofMap,
                             velocity, q_D, t: float,
                             ws: Optional[Workspace] = None) -> np.ndarray:
    """Boundary-data part of the Rusanov flux on Dirichlet edges.

    Returns the vector to add to the right-hand side f; zero for
    homogeneous data.  Only inflow portions contribute.
    """
    u_x, u_z = velocity
    ws = ws or Workspace(mesh, dofmap)
    dm = dofmap
    bc = edges.bc
    out = np.zeros(dm.n_xtd)
    if q_D is None:
        return out

    def coeff(u_n):
        return -0.5 * (u_n - abs(u_n))  # = |u_n| on inflow, 0 on outflow

    if bc.bottom == "dirichlet" and u_z != 0.0:
        c = coeff(-u_z)
        if c != 0.0:
            qd = np.asarray(q_D(ws.x_pts, np.zeros_like(ws.x_pts), t), float)
            proj = (mesh.dx / 2.0) * (qd * ws.xq.weights) @ ws.PX.T  # (N_x, px1)
            if mesh.N_z > 0:
                QB = dm.bounded_view(out)[0]
                QB[0] += c * proj[:, None, :] * ws.phiLz[None, :, None]
            else:
                QL = dm.laguerre_view(out)[0]
                QL += c * proj[None, :, :] * ws.lag_trace_val[:, None, None]
    # left/right Dirichlet inflow lifts (unused by the built-in experiments,
    # kept for completeness)
    if not bc.periodic_x and u_x != 0.0:
        for side, mx_col, val_x, u_n, xval in (
                ("left", 0, ws.phiLx, -u_x, 0.0),
                ("right", mesh.N_x - 1, ws.phiRx, u_x, mesh.L_x)):
            if getattr(bc, side) != "dirichlet":
                continue
            c = coeff(u_n)
            if c == 0.0:
                continue
            if mesh.N_z > 0:
                qd = np.asarray(q_D(np.full_like(ws.z_pts, xval), ws.z_pts, t), float)
                proj = (mesh.dz[:, None] / 2.0) * (qd * ws.zq.weights) @ ws.PZ.T
                QB = dm.bounded_view(out)[0]
                QB[:, mx_col] += c * proj[:, :, None] * val_x[None, None, :]
            if mesh.has_laguerre:
                zl = ws.lag_z_pts
                qd = np.asarray(q_D(np.full_like(zl, xval), zl, t), float)
                proj = (qd * ws.lag_rule.weights) @ ws.LZ.T  # (M+1,)
                QL = dm.laguerre_view(out)[0]
                QL[:, mx_col] += c * proj[:, None] * val_x[None, :]
    return out


def assemble_rhs(mesh: StripMesh, edges: EdgeSet, dofmap: DofMap,
                 source, q_D, q_N, t: float, mu=(0.0, 0.0),
                 eps: float = 1.0, sigma: float = 0.0,
                 ws: Optional[Workspace] = None) -> np.ndarray:
    """Source term plus diffusive Dirichlet and Neumann boundary lifts."""
    if dofmap.n_eq != 1:
        raise ValueError("assemble_rhs builds one scalar block at a time")
    mu_x, mu_z = mu
    ws = ws or Workspace(mesh, dofmap)
    dm = dofmap
    bc = edges.bc
    nx, nz = mesh.N_x, mesh.N_z
    dx, dz = mesh.dx, mesh.dz
    out = np.zeros(dm.n_xtd)
    QB = dm.bounded_view(out)[0] if nz > 0 else None
    QL = dm.laguerre_view(out)[0] if mesh.has_laguerre else None

    if source is not None:
        if nz > 0:
            X = np.broadcast_to(ws.x_pts[None, :, :, None], (nz, nx, ws.xq.n, ws.zq.n))
            Z = np.broadcast_to(ws.z_pts[:, None, None, :], (nz, nx, ws.xq.n, ws.zq.n))
            F = np.asarray(source(X, Z, t), float).reshape(nz, nx, -1)
            jac = (dx / 2.0) * (dz / 2.0)
            W = F * ws.wvol * jac[:, None, None]
            QB += (W @ ws.Bval.T).reshape(nz, nx, dm.p_z + 1, dm.p_x + 1)
        if mesh.has_laguerre:
            M1 = mesh.M + 1
            X = np.broadcast_to(ws.x_pts[:, :, None], (nx, ws.xq.n, M1))
            Z = np.broadcast_to(ws.lag_z_pts[None, None, :], (nx, ws.xq.n, M1))
            F = np.asarray(source(X, Z, t), float).reshape(nx, -1)
            W = F * ws.wlag * (dx / 2.0)
            QL += (W @ ws.BLval.T).reshape(nx, M1, dm.p_x + 1).transpose(1, 0, 2)

    def edge_proj_x(data_vals):
        """(N_x, px1) moments of boundary data against phi_j(x)."""
        return (dx / 2.0) * (data_vals * ws.xq.weights) @ ws.PX.T

    if q_D is not None:
        if bc.bottom == "dirichlet":
            qd = np.asarray(q_D(ws.x_pts, np.zeros_like(ws.x_pts), t), float)
            proj = edge_proj_x(qd)
            if nz > 0:
                tvec = (-eps * mu_z * (2.0 / dz[0]) * ws.dphiLz
                        + (sigma / dx) * ws.phiLz)
                QB[0] += proj[:, None, :] * tvec[None, :, None]
            else:
                tvec = -eps * mu_z * ws.lag_trace_dval + (sigma / dx) * ws.lag_trace_val
                QL += proj[None, :, :] * tvec[:, None, None]
        if bc.top == "dirichlet":
            qd = np.asarray(q_D(ws.x_pts, np.full_like(ws.x_pts, mesh.L_z), t), float)
            proj = edge_proj_x(qd)
            tvec = eps * mu_z * (2.0 / dz[-1]) * ws.dphiRz + (sigma / dx) * ws.phiRz
            QB[nz - 1] += proj[:, None, :] * tvec[None, :, None]
        if not bc.periodic_x:
            for side, mx_col, val_x, dval_x, s, xval in (
                    ("left", 0, ws.phiLx, ws.dphiLx, -1.0, 0.0),
                    ("right", nx - 1, ws.phiRx, ws.dphiRx, +1.0, mesh.L_x)):
                if getattr(bc, side) != "dirichlet":
                    continue
                dvx = dval_x * (2.0 / dx)
                if nz > 0:
                    qd = np.asarray(q_D(np.full_like(ws.z_pts, xval), ws.z_pts, t), float)
                    mom = (dz[:, None] / 2.0) * (qd * ws.zq.weights) @ ws.PZ.T
                    tvec = s * eps * mu_x * dvx[None, :] \
                        + (sigma / dz)[:, None] * val_x[None, :]
                    QB[:, mx_col] += mom[:, :, None] * tvec[:, None, :]
                if mesh.has_laguerre:
                    zl = ws.lag_z_pts
                    qd = np.asarray(q_D(np.full_like(zl, xval), zl, t), float)
                    mom = (qd * ws.lag_rule.weights) @ ws.LZ.T
                    tvec = s * eps * mu_x * dvx + sigma * mesh.beta * val_x
                    QL[:, mx_col] += mom[:, None] * tvec[None, :]

    if q_N is not None:
        if bc.bottom == "neumann":
            qn = np.asarray(q_N(ws.x_pts, np.zeros_like(ws.x_pts), t), float)
            proj = edge_proj_x(qn)
            if nz > 0:
                QB[0] += proj[:, None, :] * ws.phiLz[None, :, None]
            else:
                QL += proj[None, :, :] * ws.lag_trace_val[:, None, None]
        if bc.top == "neumann":
            qn = np.asarray(q_N(ws.x_pts, np.full_like(ws.x_pts, mesh.L_z), t), float)
            proj = edge_proj_x(qn)
            QB[nz - 1] += proj[:, None, :] * ws.phiRz[None, :, None]
        if not bc.periodic_x:
            for side, mx_col, val_x, xval in (
                    ("left", 0, ws.phiLx, 0.0),
                    ("right", nx - 1, ws.phiRx, mesh.L_x)):
                if getattr(bc, side) != "neumann":
                    continue
                if nz > 0:
                    qn = np.asarray(q_N(np.full_like(ws.z_pts, xval), ws.z_pts, t), float)
                    mom = (dz[:, None] / 2.0) * (qn * ws.zq.weights) @ ws.PZ.T
                    QB[:, mx_col] += mom[:, :, None] * val_x[None, None, :]
                if mesh.has_laguerre:
                    zl = ws.lag_z_pts
                    qn = np.asarray(q_N(np.full_like(zl, xval), zl, t), float)
                    mom = (qn * ws.lag_rule.weights) @ ws.LZ.T
                    QL[:, mx_col] += mom[:, None] * val_x[None, :]
    return out


def assemble_system(mesh, edges, dofmap, mu=(0.0, 0.0), gamma=None,
                    velocity=None, eps: float = 1.0, sigma: float = 0.0,
                    ws: Optional[Workspace] = None) -> SystemMatrices:
    """Convenience bundle of all time-independent operators."""
    ws = ws or Workspace(mesh, dofmap)
    mass = assemble_mass(mesh, dofmap)
    A = assemble_diffusion(mesh, edges, dofmap, mu, eps, sigma, ws)
    G = assemble_reaction(mesh, dofmap, gamma, ws)
    F = None
    if velocity is not None:
        F = assemble_linear_advection(mesh, edges, dofmap, velocity, ws)
    return SystemMatrices(mass, A, G, F, eps, sigma)


def dump_matrix_coo(mat, path):
    """Write a sparse operator as 'row col value' text lines."""
    coo = sp.coo_matrix(mat)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")
