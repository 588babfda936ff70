"""Strip geometry, edge classification and global unknown ordering.

The computational domain is the semi-infinite strip [0, L_x] x [0, inf),
split at z = L_z into a bounded rectangle of N_x x N_z elements (uniform in
x, arbitrary increasing breakpoints in z) and a single layer of N_x
semi-infinite elements discretized with M+1 scaled Laguerre modes.

A mesh may also be purely bounded (no Laguerre layer), which is what the
single-domain reference runs use; ``comparison_mode`` builds such a mesh
whose z-breakpoints beyond the interface coincide with the physical
Laguerre nodes.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basis import laguerre_radau_rule

__all__ = [
    "StripMesh",
    "BoundarySpec",
    "Edge",
    "EdgeSet",
    "DofMap",
    "build_mesh",
    "classify_edges",
]

_BOTTOM_KINDS = ("dirichlet", "neumann", "outflow")
_SIDE_KINDS = ("dirichlet", "neumann", "outflow", "periodic")


@dataclass(frozen=True, eq=False)
class StripMesh:
    """Geometry of the strip: bounded grid plus optional Laguerre layer."""

    L_x: float
    N_x: int
    z_breaks: np.ndarray          # length N_z+1, starts at 0, ends at L_z
    M: int = 0                    # highest Laguerre mode (layer present if beta set)
    beta: Optional[float] = None  # Laguerre scaling parameter, None = no layer
    laguerre_offsets: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        zb = np.asarray(self.z_breaks, dtype=float)
        if self.L_x <= 0 or self.N_x < 1:
            raise ValueError("L_x must be positive and N_x at least 1")
        if zb.size < 1 or zb[0] != 0.0:
            raise ValueError("z-breakpoints must start at 0")
        if np.any(np.diff(zb) <= 0):
            raise ValueError("z-breakpoints must be strictly increasing")
        object.__setattr__(self, "z_breaks", zb)
        zb.setflags(write=False)
        if self.beta is not None:
            if self.beta <= 0:
                raise ValueError("beta must be positive")
            if self.M < 1:
                raise ValueError("M must be at least 1")
            offs = laguerre_radau_rule(self.M, self.beta).nodes
        else:
            offs = np.zeros(0)
        object.__setattr__(self, "laguerre_offsets", offs)
        offs.setflags(write=False)

    @property
    def has_laguerre(self) -> bool:
        return self.beta is not None

    @property
    def N_z(self) -> int:
        return self.z_breaks.size - 1

    @property
    def L_z(self) -> float:
        return float(self.z_breaks[-1])

    @property
    def dx(self) -> float:
        return self.L_x / self.N_x

    @property
    def dz(self) -> np.ndarray:
        return np.diff(self.z_breaks)

    @property
    def x_breaks(self) -> np.ndarray:
        return np.linspace(0.0, self.L_x, self.N_x + 1)

    @property
    def laguerre_nodes(self) -> np.ndarray:
        """Physical z-coordinates of the Radau nodes, first one at L_z."""
        if not self.has_laguerre:
            raise ValueError("mesh has no Laguerre layer")
        return self.L_z + self.laguerre_offsets


def build_mesh(L_x, N_x, L_z=0.0, N_z=0, z_breaks=None, M=None, beta=None,
               comparison_mode=False) -> StripMesh:
    """Build the strip mesh from geometry and Laguerre-layer parameters.

    With ``comparison_mode`` the Laguerre layer is replaced by bounded DG
    elements whose z-breakpoints are the physical Laguerre nodes (the
    non-uniform single-domain baseline).
    """
    if z_breaks is None:
        if N_z == 0:
            if L_z != 0.0:
                raise ValueError("N_z=0 requires L_z=0")
            z_breaks = np.zeros(1)
        else:
            z_breaks = np.linspace(0.0, L_z, N_z + 1)
    else:
        z_breaks = np.asarray(z_breaks, dtype=float)
        if abs(z_breaks[-1] - L_z) > 1e-12 * max(1.0, abs(L_z)):
            raise ValueError("last z-breakpoint must equal L_z")
    if comparison_mode:
        if M is None or beta is None:
            raise ValueError("comparison mode needs M and beta")
        offsets = laguerre_radau_rule(M, beta).nodes
        z_breaks = np.concatenate([z_breaks, z_breaks[-1] + offsets[1:]])
        return StripMesh(L_x, N_x, z_breaks)
    if M is None and beta is None:
        return StripMesh(L_x, N_x, z_breaks)
    return StripMesh(L_x, N_x, z_breaks, M=M, beta=beta)


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary condition kinds for the strip sides.

    ``top`` applies only to purely bounded meshes; on a mesh with a
    Laguerre layer the decay of the basis plays that role and any top
    condition is rejected.
    """

    bottom: str = "dirichlet"
    left: str = "periodic"
    right: str = "periodic"
    top: Optional[str] = None

    def __post_init__(self):
        if self.bottom not in _BOTTOM_KINDS:
            raise ValueError(f"bottom bc must be one of {_BOTTOM_KINDS}")
        for name, kind in (("left", self.left), ("right", self.right)):
            if kind not in _SIDE_KINDS:
                raise ValueError(f"{name} bc must be one of {_SIDE_KINDS}")
        if (self.left == "periodic") != (self.right == "periodic"):
            raise ValueError("periodic bc only valid as a left/right pair")
        if self.top is not None and self.top not in _BOTTOM_KINDS:
            raise ValueError(f"top bc must be one of {_BOTTOM_KINDS}")

    @property
    def periodic_x(self) -> bool:
        return self.left == "periodic"


@dataclass(frozen=True)
class Edge:
    """One mesh edge.  Elements are ('b', m_x, m_z) or ('l', m_x) tuples."""

    orient: str                  # 'v' or 'h'
    a: tuple
    b: Optional[tuple] = None    # None on boundary edges
    side: Optional[str] = None   # 'left'/'right'/'bottom'/'top' for boundary
    measure: float = 0.0
    periodic: bool = False


@dataclass(frozen=True)
class EdgeSet:
    """Complete partition of the mesh edges, tagged per role."""

    dgdg: tuple        # interior to the bounded region (incl. periodic pairs)
    dglag: tuple       # interior to the Laguerre layer (incl. periodic pair)
    interface: tuple   # the N_x horizontal edges at z = L_z
    dirichlet: tuple
    neumann: tuple
    outflow: tuple
    bc: BoundarySpec

    @property
    def periodic(self) -> tuple:
        return tuple(e for e in self.dgdg + self.dglag if e.periodic)


def classify_edges(mesh: StripMesh, bc: BoundarySpec) -> EdgeSet:
    """Partition all edges of the mesh into the interior/boundary sets."""
    if mesh.has_laguerre and bc.top is not None:
        raise ValueError("top bc invalid on a mesh with a Laguerre layer "
                         "(decay is built into the basis)")
    if not mesh.has_laguerre and bc.top is None:
        raise ValueError("purely bounded mesh needs a top bc")

    nx, nz = mesh.N_x, mesh.N_z
    dz = mesh.dz
    dgdg, dglag, interface = [], [], []
    bnd = {"dirichlet": [], "neumann": [], "outflow": []}

    # vertical interior edges, bounded rows
    for mz in range(nz):
        for mx in range(nx - 1):
            dgdg.append(Edge("v", ("b", mx, mz), ("b", mx + 1, mz), measure=dz[mz]))
        if bc.periodic_x:
            dgdg.append(Edge("v", ("b", nx - 1, mz), ("b", 0, mz),
                             measure=dz[mz], periodic=True))
    # horizontal interior edges, bounded rows
    for mz in range(nz - 1):
        for mx in range(nx):
            dgdg.append(Edge("h", ("b", mx, mz), ("b", mx, mz + 1), measure=mesh.dx))

    if mesh.has_laguerre:
        inv_beta = 1.0 / mesh.beta
        for mx in range(nx - 1):
            dglag.append(Edge("v", ("l", mx), ("l", mx + 1), measure=inv_beta))
        if bc.periodic_x:
            dglag.append(Edge("v", ("l", nx - 1), ("l", 0),
                              measure=inv_beta, periodic=True))
        if nz >= 1:
            for mx in range(nx):
                interface.append(Edge("h", ("b", mx, nz - 1), ("l", mx),
                                      measure=mesh.dx))

    # bottom boundary: bounded row 0, or the Laguerre layer itself when N_z=0
    for mx in range(nx):
        a = ("b", mx, 0) if nz >= 1 else ("l", mx)
        bnd[bc.bottom].append(Edge("h", a, side="bottom", measure=mesh.dx))
    # top boundary of purely bounded meshes
    if not mesh.has_laguerre:
        for mx in range(nx):
            bnd[bc.top].append(Edge("h", ("b", mx, nz - 1), side="top",
                                    measure=mesh.dx))
    # left/right boundaries
    if not bc.periodic_x:
        for mz in range(nz):
            bnd[bc.left].append(Edge("v", ("b", 0, mz), side="left", measure=dz[mz]))
            bnd[bc.right].append(Edge("v", ("b", nx - 1, mz), side="right",
                                      measure=dz[mz]))
        if mesh.has_laguerre:
            inv_beta = 1.0 / mesh.beta
            bnd[bc.left].append(Edge("v", ("l", 0), side="left", measure=inv_beta))
            bnd[bc.right].append(Edge("v", ("l", nx - 1), side="right",
                                      measure=inv_beta))

    return EdgeSet(tuple(dgdg), tuple(dglag), tuple(interface),
                   tuple(bnd["dirichlet"]), tuple(bnd["neumann"]),
                   tuple(bnd["outflow"]), bc)


class DofMap:
    """Global ordering of the unknown coefficients.

    Bounded region: j fastest, then i, then m_x, then m_z.  Laguerre
    region: j fastest, then m_x, then the Laguerre level i.  For systems
    the variables are blocked contiguously (all dofs of variable 0, then
    variable 1, ...).  Element indices are 0-based.
    """

    def __init__(self, mesh: StripMesh, p_x: int, p_z: int, n_eq: int = 1):
        if p_x < 0 or p_z < 0:
            raise ValueError("polynomial degrees must be nonnegative")
        self.mesh = mesh
        self.p_x = p_x
        self.p_z = p_z
        self.n_eq = n_eq
        self.n_bnd = mesh.N_x * mesh.N_z * (p_x + 1) * (p_z + 1)
        self.n_unbnd = mesh.N_x * (p_x + 1) * (mesh.M + 1) if mesh.has_laguerre else 0
        self.n_xtd = self.n_bnd + self.n_unbnd
        self.total = self.n_xtd * n_eq

    def index_bounded(self, m_x, m_z, j, i, var=0):
        px1 = self.p_x + 1
        pz1 = self.p_z + 1
        elem = np.asarray(m_z) * self.mesh.N_x + np.asarray(m_x)
        return (np.asarray(var) * self.n_xtd
                + elem * (px1 * pz1) + np.asarray(i) * px1 + np.asarray(j))

    def index_laguerre(self, m_x, i, j, var=0):
        px1 = self.p_x + 1
        return (np.asarray(var) * self.n_xtd + self.n_bnd
                + (np.asarray(i) * self.mesh.N_x + np.asarray(m_x)) * px1
                + np.asarray(j))

    def dof_index(self, region, m_x, m_z, j, i, var=0):
        """Spec-facing indexer with range checks.

        ``region`` is 'bounded' or 'unbounded'; ``m_z`` is ignored for the
        unbounded region.
        """
        if not (0 <= var < self.n_eq and 0 <= m_x < self.mesh.N_x
                and 0 <= j <= self.p_x):
            raise IndexError("dof indices out of range")
        if region == "bounded":
            if not (0 <= m_z < self.mesh.N_z and 0 <= i <= self.p_z):
                raise IndexError("dof indices out of range")
            return int(self.index_bounded(m_x, m_z, j, i, var))
        if region == "unbounded":
            if not (self.mesh.has_laguerre and 0 <= i <= self.mesh.M):
                raise IndexError("dof indices out of range")
            return int(self.index_laguerre(m_x, i, j, var))
        raise ValueError("region must be 'bounded' or 'unbounded'")

    def unravel(self, g):
        """Inverse of dof_index, for round-trip checks."""
        if not 0 <= g < self.total:
            raise IndexError("global index out of range")
        var, rest = divmod(g, self.n_xtd)
        px1, pz1 = self.p_x + 1, self.p_z + 1
        if rest < self.n_bnd:
            elem, local = divmod(rest, px1 * pz1)
            m_z, m_x = divmod(elem, self.mesh.N_x)
            i, j = divmod(local, px1)
            return ("bounded", m_x, m_z, j, i, var)
        rest -= self.n_bnd
        block, j = divmod(rest, px1)
        i, m_x = divmod(block, self.mesh.N_x)
        return ("unbounded", m_x, None, j, i, var)

    # array views used throughout assembly and flux evaluation

    def bounded_view(self, q):
        """Bounded coefficients as (n_eq, N_z, N_x, p_z+1, p_x+1)."""
        m = self.mesh
        qv = q.reshape(self.n_eq, self.n_xtd)
        return qv[:, :self.n_bnd].reshape(
            self.n_eq, m.N_z, m.N_x, self.p_z + 1, self.p_x + 1)

    def laguerre_view(self, q):
        """Laguerre coefficients as (n_eq, M+1, N_x, p_x+1)."""
        m = self.mesh
        qv = q.reshape(self.n_eq, self.n_xtd)
        return qv[:, self.n_bnd:].reshape(
            self.n_eq, m.M + 1, m.N_x, self.p_x + 1)
