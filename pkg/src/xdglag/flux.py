"""Nonlinear transport: physical flux models and Rusanov edge fluxes.

The transport contribution to the semi-discrete system is

    F(q)[test] = sum_edges int qhat(q, n) phi_test - int F(q) . grad(phi_test),

with the Rusanov flux qhat = {{F(q)}}.n - (nu/2) [[q]] and nu the largest
characteristic speed of the two trace states.  Models may carry a constant
background state: coefficients then represent deviations from it (required
in the Laguerre layer, whose basis decays at infinity) while fluxes are
evaluated on the full state.
"""

import numpy as np

from .mesh import DofMap, EdgeSet, StripMesh
from .tables import Workspace

__all__ = [
    "StateError",
    "FluxModel",
    "LinearAdvectionFlux",
    "BurgersFlux",
    "ShallowWaterFlux",
    "swe_physical_flux",
    "rusanov_flux",
    "evaluate_transport",
]


class StateError(RuntimeError):
    """Raised when a trace state is invalid for the model (e.g. h <= 0)."""


class FluxModel:
    """Base class; subclasses define flux components and wave speeds."""

    n_eq = 1
    is_linear = False

    def __init__(self, background=None):
        self.background = None if background is None else np.asarray(background, float)

    def flux(self, q, direction, x, z):
        raise NotImplementedError

    def flux_deviation(self, q, direction, x, z):
        """F(q) minus the constant background flux F(q_ref).

        Subtracting the (divergence-free) background flux changes nothing
        analytically, but keeps the semi-infinite volume integrands within
        the exactness class of the Radau rule: the raw constant part would
        only decay like the test-function derivative itself.
        """
        f = self.flux(q, direction, x, z)
        if self.background is None:
            return f
        fb = self.flux(self.background.reshape(self.n_eq, *(1,) * (q.ndim - 1)),
                       direction, x, z)
        return f - fb

    def edge_speed(self, q_a, q_b, n_x, n_z, x, z):
        raise NotImplementedError

    def dirichlet_ghost(self, q_interior, value):
        """Full ghost state on a Dirichlet edge given the boundary datum."""
        raise NotImplementedError

    def check_state(self, q, where=""):
        pass

    def add_background(self, q):
        if self.background is None:
            return q
        shape = (self.n_eq,) + (1,) * (q.ndim - 1)
        return q + self.background.reshape(shape)


class LinearAdvectionFlux(FluxModel):
    """F(q) = u q with constant velocity u = (u_x, u_z)."""

    is_linear = True

    def __init__(self, u_x, u_z):
        super().__init__()
        self.u_x = float(u_x)
        self.u_z = float(u_z)

    @property
    def velocity(self):
        return (self.u_x, self.u_z)

    def flux(self, q, direction, x, z):
        return (self.u_x if direction == "x" else self.u_z) * q

    def edge_speed(self, q_a, q_b, n_x, n_z, x, z):
        return abs(self.u_x * n_x + self.u_z * n_z)

    def dirichlet_ghost(self, q_interior, value):
        return np.broadcast_to(value, q_interior.shape).astype(float)


class BurgersFlux(FluxModel):
    """F(q) = (q^2/2, q^2/2)."""

    def flux(self, q, direction, x, z):
        return 0.5 * q * q

    def edge_speed(self, q_a, q_b, n_x, n_z, x, z):
        s = n_x + n_z
        return np.maximum(np.abs(q_a[0] * s), np.abs(q_b[0] * s))

    def dirichlet_ghost(self, q_interior, value):
        return np.broadcast_to(value, q_interior.shape).astype(float)


def swe_physical_flux(q, direction, g=9.81):
    """Shallow water flux E(q) (direction 'x') or G(q) (direction 'z').

    q stacks (h, hu, hv) along the first axis; depth must be positive.
    """
    q = np.asarray(q, dtype=float)
    h, hu, hv = q[0], q[1], q[2]
    if np.any(h <= 0.0):
        raise StateError("non-positive water depth in shallow water flux")
    pressure = 0.5 * g * h * h
    if direction == "x":
        return np.stack([hu, hu * hu / h + pressure, hu * hv / h])
    return np.stack([hv, hu * hv / h, hv * hv / h + pressure])


class ShallowWaterFlux(FluxModel):
    """2D shallow water system in conserved variables (h, hu, hv).

    ``background`` holds the reference state (H, H*U, H*V); the solver
    evolves deviations from it, which decay at infinity as the Laguerre
    basis requires.
    """

    n_eq = 3

    def __init__(self, g=9.81, background=(10.0, 0.0, 0.0)):
        super().__init__(background)
        self.g = float(g)

    def flux(self, q, direction, x, z):
        return swe_physical_flux(q, direction, self.g)

    def edge_speed(self, q_a, q_b, n_x, n_z, x, z):
        def s(q):
            un = (q[1] * n_x + q[2] * n_z) / q[0]
            return np.abs(un) + np.sqrt(self.g * q[0])
        return np.maximum(s(q_a), s(q_b))

    def dirichlet_ghost(self, q_interior, value):
        """Depth datum only; momenta copy the interior trace."""
        ghost = np.array(q_interior, dtype=float, copy=True)
        ghost[0] = self.background[0] + value
        return ghost

    def check_state(self, q, where=""):
        hmin = np.min(q[0])
        if not np.isfinite(hmin) or hmin <= 0.0:
            raise StateError(f"non-positive or non-finite depth {hmin} {where}")


def rusanov_flux(q_a, q_b, model: FluxModel, normal, x=0.0, z=0.0):
    """Rusanov numerical flux for trace states q_a, q_b and normal (n_x, n_z)."""
    n_x, n_z = normal
    q_a = np.atleast_1d(np.asarray(q_a, dtype=float))
    q_b = np.atleast_1d(np.asarray(q_b, dtype=float))
    if q_a.ndim == 1 and model.n_eq == 1:
        q_a = q_a[None]
        q_b = q_b[None]
    fa = n_x * model.flux(q_a, "x", x, z) if n_x else 0.0
    fb = n_x * model.flux(q_b, "x", x, z) if n_x else 0.0
    if n_z:
        fa = fa + n_z * model.flux(q_a, "z", x, z)
        fb = fb + n_z * model.flux(q_b, "z", x, z)
    nu = model.edge_speed(q_a, q_b, n_x, n_z, x, z)
    out = 0.5 * (fa + fb) - 0.5 * nu * (q_b - q_a)
    return out[0] if model.n_eq == 1 else out


def _hat(model, qa, qb, sign, direction, x, z):
    """Vectorized Rusanov flux along one axis; sign = n component.

    Works on background-deviation fluxes; the constant shift cancels
    between the edge and volume terms element by element.  The last axis
    runs along the edge: the wave speed is maximized over it, one nu per
    edge.
    """
    fa = model.flux_deviation(qa, direction, x, z)
    fb = model.flux_deviation(qb, direction, x, z)
    n_x = sign if direction == "x" else 0.0
    n_z = sign if direction == "z" else 0.0
    nu = model.edge_speed(qa, qb, n_x, n_z, x, z)
    if np.ndim(nu) > 0:
        nu = nu.max(axis=-1, keepdims=True)
    return 0.5 * sign * (fa + fb) - 0.5 * nu * (qb - qa)


def evaluate_transport(q, mesh: StripMesh, edges: EdgeSet, dofmap: DofMap,
                       model: FluxModel, q_D=None, t: float = 0.0,
                       ws: Workspace = None) -> np.ndarray:
    """Assembled transport vector F(q) for the current coefficient state."""
    ws = ws or Workspace(mesh, dofmap)
    dm = dofmap
    bc = edges.bc
    n_eq = model.n_eq
    if dm.n_eq != n_eq:
        raise ValueError("dofmap and model disagree on the number of equations")
    nx, nz = mesh.N_x, mesh.N_z
    px1, pz1 = dm.p_x + 1, dm.p_z + 1
    dx, dz = mesh.dx, mesh.dz
    wx, wz = ws.xq.weights, ws.zq.weights

    QB = dm.bounded_view(q) if nz > 0 else None
    QL = dm.laguerre_view(q) if mesh.has_laguerre else None
    out = np.zeros_like(np.asarray(q, dtype=float))
    RB = dm.bounded_view(out) if nz > 0 else None
    RL = dm.laguerre_view(out) if mesh.has_laguerre else None

    def qd_values(xv, zv):
        if q_D is None:
            return np.zeros(np.shape(xv))
        return np.asarray(q_D(xv, zv, t), dtype=float)

    # ----- volume terms ------------------------------------------------
    if nz > 0:
        nq = ws.xq.n * ws.zq.n
        V = (QB.reshape(n_eq * nz * nx, pz1 * px1) @ ws.Bval)
        V = model.add_background(V.reshape(n_eq, nz, nx, nq))
        model.check_state(V, "in bounded volume")
        X = np.repeat(ws.x_pts, ws.zq.n, axis=1)            # (N_x, nq)
        Z = np.tile(ws.z_pts, (1, ws.xq.n))                 # (N_z, nq)
        Xb = np.broadcast_to(X[None, :, :], (nz, nx, nq))
        Zb = np.broadcast_to(Z[:, None, :], (nz, nx, nq))
        F1 = model.flux_deviation(V, "x", Xb, Zb) * ws.wvol
        F2 = model.flux_deviation(V, "z", Xb, Zb) * ws.wvol
        F1 *= (0.5 * dz)[None, :, None, None]
        F2 *= 0.5 * dx
        RB -= (F1.reshape(-1, nq) @ ws.Bdx.T).reshape(RB.shape)
        RB -= (F2.reshape(-1, nq) @ ws.Bdz.T).reshape(RB.shape)
        # pre-contract traces used by several edge groups
        TRX = QB @ ws.phiRx                                  # (n_eq, nz, nx, pz1)
        TLX = QB @ ws.phiLx
        TTZ = np.tensordot(QB, ws.phiRz, axes=([3], [0]))    # top trace
        TBZ = np.tensordot(QB, ws.phiLz, axes=([3], [0]))    # bottom trace

    if mesh.has_laguerre:
        M1 = mesh.M + 1
        nql = ws.xq.n * M1
        CL2 = QL.transpose(0, 2, 1, 3).reshape(n_eq * nx, M1 * px1)
        VL = model.add_background((CL2 @ ws.BLval).reshape(n_eq, nx, nql))
        model.check_state(VL, "in the Laguerre layer")
        XL = np.repeat(ws.x_pts, M1, axis=1)
        ZL = np.tile(ws.lag_z_pts, ws.xq.n)
        F1 = model.flux_deviation(VL, "x", XL, ZL) * ws.wlag
        F2 = model.flux_deviation(VL, "z", XL, ZL) * (ws.wlag * 0.5 * dx)
        contrib = (F1.reshape(-1, nql) @ ws.BLdx.T + F2.reshape(-1, nql) @ ws.BLdz.T)
        RL -= contrib.reshape(n_eq, nx, M1, px1).transpose(0, 2, 1, 3)
        sumQ = QL.sum(axis=1)                                # interface trace, (n_eq, nx, px1)
        TRL = np.tensordot(QL, ws.phiRx, axes=([3], [0]))    # (n_eq, M+1, nx)
        TLL = np.tensordot(QL, ws.phiLx, axes=([3], [0]))

    # ----- interior vertical edges, bounded rows ------------------------
    if nz > 0 and (nx > 1 or bc.periodic_x):
        mxa = np.arange(nx - 1)
        mxb = mxa + 1
        if bc.periodic_x:
            mxa = np.concatenate([mxa, [nx - 1]])
            mxb = np.concatenate([mxb, [0]])
        if mxa.size:
            qa = model.add_background(np.einsum("qzep,pl->qzel", TRX[:, :, mxa], ws.PZ))
            qb = model.add_background(np.einsum("qzep,pl->qzel", TLX[:, :, mxb], ws.PZ))
            xe = mesh.x_breaks[mxa + 1][None, :, None]
            ze = ws.z_pts[:, None, :]
            qhat = _hat(model, qa, qb, +1.0, "x", xe, ze)
            S = np.einsum("qzel,l,lp->qzep", qhat, wz, ws.PZ.T) * (0.5 * dz)[:, None, None]
            RB[:, :, mxa] += S[..., None] * ws.phiRx
            RB[:, :, mxb] -= S[..., None] * ws.phiLx

    # ----- interior horizontal edges, bounded rows ----------------------
    if nz > 1:
        qa = model.add_background(np.einsum("qzep,pk->qzek", TTZ[:, :-1], ws.PX))
        qb = model.add_background(np.einsum("qzep,pk->qzek", TBZ[:, 1:], ws.PX))
        xe = ws.x_pts[None, :, :]
        ze = mesh.z_breaks[1:nz][:, None, None]
        qhat = _hat(model, qa, qb, +1.0, "z", xe, ze)
        S = np.einsum("qzek,k,kp->qzep", qhat, wx, ws.PX.T) * (0.5 * dx)
        RB[:, :-1] += S[:, :, :, None, :] * ws.phiRz[None, None, None, :, None]
        RB[:, 1:] -= S[:, :, :, None, :] * ws.phiLz[None, None, None, :, None]

    # ----- interior vertical edges in the Laguerre layer ----------------
    if mesh.has_laguerre and (nx > 1 or bc.periodic_x):
        mxa = np.arange(nx - 1)
        mxb = mxa + 1
        if bc.periodic_x:
            mxa = np.concatenate([mxa, [nx - 1]])
            mxb = np.concatenate([mxb, [0]])
        if mxa.size:
            qa = model.add_background(np.einsum("qie,il->qel", TRL[:, :, mxa], ws.LZ))
            qb = model.add_background(np.einsum("qie,il->qel", TLL[:, :, mxb], ws.LZ))
            xe = mesh.x_breaks[mxa + 1][:, None]
            qhat = _hat(model, qa, qb, +1.0, "x", xe, ws.lag_z_pts)
            S = np.einsum("qel,l,li->qei", qhat, ws.lag_rule.weights, ws.LZ.T)
            RL[:, :, mxa] += S.transpose(0, 2, 1)[..., None] * ws.phiRx
            RL[:, :, mxb] -= S.transpose(0, 2, 1)[..., None] * ws.phiLx

    # ----- interface edges ----------------------------------------------
    if mesh.has_laguerre and nz > 0:
        qa = model.add_background(np.einsum("qep,pk->qek", TTZ[:, nz - 1], ws.PX))
        qb = model.add_background(np.einsum("qep,pk->qek", sumQ, ws.PX))
        qhat = _hat(model, qa, qb, +1.0, "z", ws.x_pts[None], mesh.L_z)
        S = np.einsum("qek,k,kp->qep", qhat, wx, ws.PX.T) * (0.5 * dx)
        RB[:, nz - 1] += S[:, :, None, :] * ws.phiRz[None, None, :, None]
        RL -= S[:, None, :, :]

    # ----- bottom boundary ----------------------------------------------
    if nz > 0:
        q_int = model.add_background(np.einsum("qep,pk->qek", TBZ[:, 0], ws.PX))
    else:
        q_int = model.add_background(np.einsum("qep,pk->qek", sumQ, ws.PX))
    if bc.bottom == "dirichlet":
        vals = qd_values(ws.x_pts, np.zeros_like(ws.x_pts))
        ghost = model.dirichlet_ghost(q_int, vals)
    else:
        ghost = q_int
    model.check_state(ghost, "at the bottom boundary")
    qhat = _hat(model, q_int, ghost, -1.0, "z", ws.x_pts[None], 0.0)
    S = np.einsum("qek,k,kp->qep", qhat, wx, ws.PX.T) * (0.5 * dx)
    if nz > 0:
        RB[:, 0] += S[:, :, None, :] * ws.phiLz[None, None, :, None]
    else:
        RL += S[:, None, :, :]

    # ----- top boundary (purely bounded meshes) --------------------------
    if not mesh.has_laguerre:
        q_int = model.add_background(np.einsum("qep,pk->qek", TTZ[:, nz - 1], ws.PX))
        if bc.top == "dirichlet":
            vals = qd_values(ws.x_pts, np.full_like(ws.x_pts, mesh.L_z))
            ghost = model.dirichlet_ghost(q_int, vals)
        else:
            ghost = q_int
        qhat = _hat(model, q_int, ghost, +1.0, "z", ws.x_pts[None], mesh.L_z)
        S = np.einsum("qek,k,kp->qep", qhat, wx, ws.PX.T) * (0.5 * dx)
        RB[:, nz - 1] += S[:, :, None, :] * ws.phiRz[None, None, :, None]

    # ----- left/right boundaries (non-periodic) ---------------------------
    if not bc.periodic_x:
        for side, sgn, xval in (("left", -1.0, 0.0), ("right", +1.0, mesh.L_x)):
            kind = getattr(bc, side)
            if nz > 0:
                T = (TLX if side == "left" else TRX)[:, :, 0 if side == "left" else nx - 1]
                q_int = model.add_background(np.einsum("qzp,pl->qzl", T, ws.PZ))
                if kind == "dirichlet":
                    vals = qd_values(np.full_like(ws.z_pts, xval), ws.z_pts)
                    ghost = model.dirichlet_ghost(q_int, vals)
                else:
                    ghost = q_int
                qhat = _hat(model, q_int, ghost, sgn, "x", xval, ws.z_pts[None])
                S = np.einsum("qzl,l,lp->qzp", qhat, wz, ws.PZ.T) * (0.5 * dz)[:, None]
                trace = ws.phiLx if side == "left" else ws.phiRx
                RB[:, :, 0 if side == "left" else nx - 1] += S[..., None] * trace
            if mesh.has_laguerre:
                T = (TLL if side == "left" else TRL)[:, :, 0 if side == "left" else nx - 1]
                q_int = model.add_background(np.einsum("qi,il->ql", T, ws.LZ))
                if kind == "dirichlet":
                    vals = qd_values(np.full_like(ws.lag_z_pts, xval), ws.lag_z_pts)
                    ghost = model.dirichlet_ghost(q_int, vals)
                else:
                    ghost = q_int
                qhat = _hat(model, q_int, ghost, sgn, "x", xval, ws.lag_z_pts)
                S = np.einsum("ql,l,li->qi", qhat, ws.lag_rule.weights, ws.LZ.T)
                trace = ws.phiLx if side == "left" else ws.phiRx
                RL[:, :, 0 if side == "left" else nx - 1] += S[..., None] * trace

    return out
