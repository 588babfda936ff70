"""Discrete norms, error reports, convergence rates and timing helpers.

L2 norms are tensor-product Gauss sums over the bounded elements; over the
semi-infinite layer the x-rule is tensored with the Radau rule, which is
exact for every representable basis product.  The L-infinity norm is the
maximum over the same sample points.  Cross-discretization errors evaluate
both solutions at the quadrature points of the measurement grid by direct
modal evaluation, so no interpolation operator is involved.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .fields import SolutionField
from .mesh import DofMap, StripMesh
from .tables import Workspace

__all__ = [
    "ErrorEntry",
    "ErrorReport",
    "TimingStats",
    "region_quad_points",
    "discrete_norm",
    "error_report",
    "convergence_rate",
    "courant_numbers",
    "timing_harness",
    "efficiency_gain",
]


def region_quad_points(mesh: StripMesh, dofmap: DofMap, region,
                       ws: Optional[Workspace] = None):
    """Flattened quadrature points and L2 weights of a strip region.

    ``region`` is 'bounded', 'semi-infinite', 'both', or a (z_lo, z_hi)
    window selecting bounded element rows by midpoint (z_hi = inf also
    includes the Laguerre layer when present).
    """
    ws = ws or Workspace(mesh, dofmap)
    if isinstance(region, str):
        if region == "bounded":
            window, use_layer = (0.0, mesh.L_z), False
        elif region == "semi-infinite":
            if not mesh.has_laguerre:
                raise ValueError("mesh has no semi-infinite region; pass a z-window")
            window, use_layer = (np.inf, np.inf), True
        elif region == "both":
            window, use_layer = (0.0, mesh.L_z), mesh.has_laguerre
        else:
            raise ValueError(f"unknown region {region!r}")
    else:
        z_lo, z_hi = region
        window = (z_lo, z_hi)
        use_layer = mesh.has_laguerre and np.isinf(z_hi)

    xs, zs, wgt = [], [], []
    if mesh.N_z > 0 and np.isfinite(window[0]):
        mids = 0.5 * (mesh.z_breaks[:-1] + mesh.z_breaks[1:])
        tol = 1e-12 * max(1.0, mesh.L_z)
        rows = np.flatnonzero((mids >= window[0] - tol) & (mids <= window[1] + tol))
        if rows.size:
            nq = ws.xq.n * ws.zq.n
            nx = mesh.N_x
            X = np.broadcast_to(np.repeat(ws.x_pts, ws.zq.n, axis=1)[None],
                                (rows.size, nx, nq))
            Z = np.broadcast_to(np.tile(ws.z_pts[rows], (1, ws.xq.n))[:, None, :],
                                (rows.size, nx, nq))
            jac = 0.25 * mesh.dx * mesh.dz[rows]
            W = np.broadcast_to(ws.wvol[None, None, :] * jac[:, None, None],
                                (rows.size, nx, nq))
            xs.append(X.ravel())
            zs.append(Z.ravel())
            wgt.append(W.ravel())
    if use_layer:
        M1 = mesh.M + 1
        X = np.repeat(ws.x_pts, M1, axis=1)
        Z = np.broadcast_to(np.tile(ws.lag_z_pts, ws.xq.n)[None, :], X.shape)
        W = np.broadcast_to(ws.wlag[None, :] * (0.5 * mesh.dx), X.shape)
        xs.append(X.ravel())
        zs.append(Z.ravel())
        wgt.append(W.ravel())
    if not xs:
        raise ValueError("empty measurement region")
    return np.concatenate(xs), np.concatenate(zs), np.concatenate(wgt)


def discrete_norm(evaluator, mesh: StripMesh, dofmap: DofMap, region="both",
                  kind="L2", ws: Optional[Workspace] = None) -> float:
    """Discrete L2 or Linf norm of a field over a strip region."""
    X, Z, W = region_quad_points(mesh, dofmap, region, ws)
    if isinstance(evaluator, SolutionField):
        vals = evaluator.eval_at_points(X, Z)[0]
    else:
        vals = np.asarray(evaluator(X, Z), dtype=float).ravel()
    if kind == "L2":
        return float(np.sqrt(np.sum(W * vals**2)))
    if kind == "Linf":
        return float(np.max(np.abs(vals)))
    raise ValueError("kind must be 'L2' or 'Linf'")


@dataclass(frozen=True)
class ErrorEntry:
    e2_abs: float
    einf_abs: float
    e2_rel: float
    einf_rel: float


@dataclass
class ErrorReport:
    """Absolute and relative errors per variable over one region."""

    entries: dict
    region: str
    runtime: float = 0.0
    config: dict = field(default_factory=dict)

    def __getitem__(self, name) -> ErrorEntry:
        return self.entries[name]

    @staticmethod
    def csv_header():
        return "variable,e2_abs,einf_abs,e2_rel,einf_rel"

    def csv_rows(self):
        for name, e in self.entries.items():
            yield f"{name},{e.e2_abs:.6e},{e.einf_abs:.6e},{e.e2_rel:.6e},{e.einf_rel:.6e}"

    def summary(self):
        lines = [f"region: {self.region}   runtime: {self.runtime:.3f} s"]
        for name, e in self.entries.items():
            lines.append(f"  {name}: E2_abs={e.e2_abs:.3e} Einf_abs={e.einf_abs:.3e} "
                         f"E2_rel={e.e2_rel:.3e} Einf_rel={e.einf_rel:.3e}")
        return "\n".join(lines)


def error_report(numeric: SolutionField, reference, region,
                 variables: Optional[Callable] = None, runtime: float = 0.0,
                 config: Optional[dict] = None,
                 ws: Optional[Workspace] = None) -> ErrorReport:
    """Errors of ``numeric`` against an exact function or a second solution.

    When the reference is another SolutionField, both are evaluated at the
    quadrature points of the *reference* grid restricted to the region.
    ``variables`` maps the stacked full-state values (n_eq, npts) to a dict
    of named scalar fields (default: conserved components).
    """
    if isinstance(reference, SolutionField):
        m, d = reference.mesh, reference.dofmap
        mws = ws if ws is not None and ws.mesh is m else None
        X, Z, W = region_quad_points(m, d, region, mws)
        ref_vals = reference.eval_at_points(X, Z)
    else:
        X, Z, W = region_quad_points(numeric.mesh, numeric.dofmap, region, ws)
        ref_vals = np.asarray(reference(X, Z), dtype=float)
        if ref_vals.ndim == 1:
            ref_vals = ref_vals[None]
    num_vals = numeric.eval_at_points(X, Z)

    if variables is None:
        if numeric.n_eq == 1:
            def variables(v):
                return {"q": v[0]}
        else:
            def variables(v):
                return {f"q{k+1}": v[k] for k in range(v.shape[0])}
    nvars = variables(num_vals)
    rvars = variables(ref_vals)

    entries = {}
    for name, nv in nvars.items():
        rv = rvars[name]
        diff = nv - rv
        e2 = float(np.sqrt(np.sum(W * diff**2)))
        einf = float(np.max(np.abs(diff)))
        r2 = float(np.sqrt(np.sum(W * rv**2)))
        rinf = float(np.max(np.abs(rv)))
        if r2 <= 0.0 or rinf <= 0.0:
            raise ValueError(f"reference norm vanishes for variable {name!r}; "
                             "relative errors undefined")
        entries[name] = ErrorEntry(e2, einf, e2 / r2, einf / rinf)
    return ErrorReport(entries, str(region), runtime, config or {})


def convergence_rate(errors, resolutions):
    """Pairwise rates log(E_k/E_{k+1}) / log(res_{k+1}/res_k).

    ``resolutions`` grow with refinement (element or step counts).
    """
    errors = np.asarray(errors, dtype=float)
    res = np.asarray(resolutions, dtype=float)
    if errors.size < 2 or errors.size != res.size:
        raise ValueError("need at least two (error, resolution) pairs")
    if np.any(errors <= 0.0):
        raise ValueError("errors must be positive to estimate rates")
    if np.any(np.diff(res) == 0.0):
        raise ValueError("resolutions must be distinct")
    return np.log(errors[:-1] / errors[1:]) / np.log(res[1:] / res[:-1])


def courant_numbers(u_x, u_z, dt, dx, dz, p_x, p_z=1):
    """Directional Courant numbers u*dt*p/delta.

    In the semi-infinite region pass the distance between the first two
    Laguerre nodes as dz (with p_z = 1).
    """
    return (u_x * dt * p_x / dx, u_z * dt * p_z / dz)


@dataclass(frozen=True)
class TimingStats:
    times: tuple
    result: object = None

    @property
    def min(self) -> float:
        return min(self.times)

    @property
    def median(self) -> float:
        return float(np.median(self.times))


def timing_harness(closure: Callable, repetitions: int = 1) -> TimingStats:
    """Wallclock min/median of a closure over the given repetitions."""
    if repetitions < 1:
        raise ValueError("need at least one repetition")
    times = []
    result = None
    for _ in range(repetitions):
        tic = time.perf_counter()
        result = closure()
        times.append(time.perf_counter() - tic)
    return TimingStats(tuple(times), result)


def efficiency_gain(t_reference: float, t_new: float) -> float:
    """Speedup S = t_reference / t_new (Table-5 convention)."""
    return t_reference / t_new
