"""Bridging functions and modal coefficient vectors.

``project_field`` computes the orthogonal projection of initial data onto
the discrete space (quadrature moments divided by the diagonal mass
entries); ``SolutionField`` wraps a coefficient vector and evaluates it at
arbitrary points of the strip, adding back any background state the model
carries.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basis import laguerre_table, legendre_table
from .mesh import DofMap, StripMesh
from .tables import Workspace

__all__ = ["project_field", "SolutionField"]

_CHUNK = 1 << 20


def project_field(mesh: StripMesh, dofmap: DofMap, func,
                  ws: Optional[Workspace] = None) -> np.ndarray:
    """Elementwise L2 projection of func(x, z) onto the modal basis.

    ``func`` returns either a scalar array or a stack of n_eq component
    arrays along the first axis.
    """
    ws = ws or Workspace(mesh, dofmap)
    dm = dofmap
    n_eq = dm.n_eq
    nx, nz = mesh.N_x, mesh.N_z
    out = np.zeros(dm.total)

    def _components(vals, shape):
        vals = np.asarray(vals, dtype=float)
        if vals.shape == shape:
            vals = vals[None]
        if vals.shape != (n_eq,) + shape:
            raise ValueError("initial data shape does not match n_eq")
        return vals

    if nz > 0:
        nq = ws.xq.n * ws.zq.n
        X = np.broadcast_to(np.repeat(ws.x_pts, ws.zq.n, axis=1)[None, :, :],
                            (nz, nx, nq))
        Z = np.broadcast_to(np.tile(ws.z_pts, (1, ws.xq.n))[:, None, :],
                            (nz, nx, nq))
        vals = _components(func(X, Z), X.shape)
        W = vals * ws.wvol * 0.25
        QB = dm.bounded_view(out)
        QB += (W.reshape(n_eq * nz * nx, nq) @ ws.Bval.T).reshape(QB.shape)
    if mesh.has_laguerre:
        M1 = mesh.M + 1
        nql = ws.xq.n * M1
        X = np.repeat(ws.x_pts, M1, axis=1)
        Z = np.broadcast_to(np.tile(ws.lag_z_pts, ws.xq.n)[None, :], X.shape)
        vals = _components(func(X, Z), X.shape)
        W = vals * ws.wlag * (0.5 * mesh.beta)
        QL = dm.laguerre_view(out)
        QL += (W.reshape(n_eq * nx, nql) @ ws.BLval.T) \
            .reshape(n_eq, nx, M1, dm.p_x + 1).transpose(0, 2, 1, 3)
    return out


@dataclass
class SolutionField:
    """A coefficient vector tied to its mesh, evaluable anywhere."""

    mesh: StripMesh
    dofmap: DofMap
    coeffs: np.ndarray
    background: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.background is not None:
            self.background = np.asarray(self.background, dtype=float)

    @property
    def n_eq(self) -> int:
        return self.dofmap.n_eq

    def eval_at_points(self, x, z) -> np.ndarray:
        """Full-state values at arbitrary points, shape (n_eq, npts)."""
        x = np.asarray(x, dtype=float).ravel()
        z = np.asarray(z, dtype=float).ravel()
        out = np.empty((self.n_eq, x.size))
        for lo in range(0, x.size, _CHUNK):
            sl = slice(lo, min(lo + _CHUNK, x.size))
            out[:, sl] = self._eval_chunk(x[sl], z[sl])
        if self.background is not None:
            out += self.background[:, None]
        return out

    def _eval_chunk(self, x, z):
        mesh, dm = self.mesh, self.dofmap
        out = np.zeros((self.n_eq, x.size))
        in_layer = np.zeros(x.size, dtype=bool)
        if mesh.has_laguerre:
            in_layer = z > mesh.L_z + 1e-13 * max(1.0, abs(mesh.L_z))
            if mesh.N_z == 0:
                in_layer = np.ones(x.size, dtype=bool)
        mx = np.clip(np.searchsorted(mesh.x_breaks, x, side="right") - 1,
                     0, mesh.N_x - 1)

        idx_b = np.flatnonzero(~in_layer)
        if idx_b.size and mesh.N_z > 0:
            zb = z[idx_b]
            mz = np.clip(np.searchsorted(mesh.z_breaks, zb, side="right") - 1,
                         0, mesh.N_z - 1)
            xi = 2.0 * (x[idx_b] - mesh.x_breaks[mx[idx_b]]) / mesh.dx - 1.0
            eta = 2.0 * (zb - mesh.z_breaks[mz]) / mesh.dz[mz] - 1.0
            PX = legendre_table(dm.p_x, np.clip(xi, -1.0, 1.0))
            PZ = legendre_table(dm.p_z, np.clip(eta, -1.0, 1.0))
            C = dm.bounded_view(self.coeffs)[:, mz, mx[idx_b]]  # (n_eq, npts, pz1, px1)
            out[:, idx_b] = np.einsum("qpij,jp,ip->qp", C, PX, PZ)

        idx_l = np.flatnonzero(in_layer)
        if idx_l.size and mesh.has_laguerre:
            zeta = z[idx_l] - mesh.L_z
            xi = 2.0 * (x[idx_l] - mesh.x_breaks[mx[idx_l]]) / mesh.dx - 1.0
            PX = legendre_table(dm.p_x, np.clip(xi, -1.0, 1.0))
            LZ = laguerre_table(mesh.M, mesh.beta, np.maximum(zeta, 0.0))
            C = dm.laguerre_view(self.coeffs)[:, :, mx[idx_l]]  # (n_eq, M+1, npts, px1)
            out[:, idx_l] = np.einsum("qipj,jp,ip->qp", C, PX, LZ)
        return out
