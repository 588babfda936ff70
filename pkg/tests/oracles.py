"""Brute-force weak-form assemblers used as independent oracles.

Everything here is deliberately slow and structure-free: global matrices
are built by looping over elements and edges, evaluating jump/average
combinations of individual basis functions with high-order quadrature.
No closed-form local matrices, no orthogonality shortcuts.  Only small
meshes are meant to pass through these.
"""

import numpy as np

from xdglag.basis import (gauss_legendre_rule, laguerre_eval,
                          laguerre_radau_rule, legendre_eval)

ORDER_BUMP = 6


def _elements(mesh):
    for mz in range(mesh.N_z):
        for mx in range(mesh.N_x):
            yield ("b", mx, mz)
    if mesh.has_laguerre:
        for mx in range(mesh.N_x):
            yield ("l", mx)


def elem_basis(mesh, dofmap, elem):
    """List of (global index, f, df/dx, df/dz) for the element's basis."""
    dm = dofmap
    dx = mesh.dx
    out = []
    if elem[0] == "b":
        _, mx, mz = elem
        xl = mesh.x_breaks[mx]
        zl = mesh.z_breaks[mz]
        dz = mesh.dz[mz]
        for i in range(dm.p_z + 1):
            for j in range(dm.p_x + 1):
                g = dm.index_bounded(mx, mz, j, i)

                def f(x, z, j=j, i=i):
                    xi = 2 * (np.asarray(x) - xl) / dx - 1
                    eta = 2 * (np.asarray(z) - zl) / dz - 1
                    return legendre_eval(j, xi) * legendre_eval(i, eta)

                def fx(x, z, j=j, i=i):
                    xi = 2 * (np.asarray(x) - xl) / dx - 1
                    eta = 2 * (np.asarray(z) - zl) / dz - 1
                    return (2 / dx) * legendre_eval(j, xi, deriv=True) \
                        * legendre_eval(i, eta)

                def fz(x, z, j=j, i=i):
                    xi = 2 * (np.asarray(x) - xl) / dx - 1
                    eta = 2 * (np.asarray(z) - zl) / dz - 1
                    return legendre_eval(j, xi) \
                        * (2 / dz) * legendre_eval(i, eta, deriv=True)

                out.append((int(g), f, fx, fz))
    else:
        _, mx = elem
        xl = mesh.x_breaks[mx]
        beta, Lz = mesh.beta, mesh.L_z
        for i in range(mesh.M + 1):
            for j in range(dm.p_x + 1):
                g = dm.index_laguerre(mx, i, j)

                def f(x, z, j=j, i=i):
                    xi = 2 * (np.asarray(x) - xl) / dx - 1
                    return legendre_eval(j, xi) * laguerre_eval(i, beta, np.asarray(z) - Lz)

                def fx(x, z, j=j, i=i):
                    xi = 2 * (np.asarray(x) - xl) / dx - 1
                    return (2 / dx) * legendre_eval(j, xi, deriv=True) \
                        * laguerre_eval(i, beta, np.asarray(z) - Lz)

                def fz(x, z, j=j, i=i):
                    xi = 2 * (np.asarray(x) - xl) / dx - 1
                    return legendre_eval(j, xi) \
                        * laguerre_eval(i, beta, np.asarray(z) - Lz, deriv=True)

                out.append((int(g), f, fx, fz))
    return out


def _volume_points(mesh, dofmap, elem):
    """High-order quadrature points/weights covering one element."""
    gx = gauss_legendre_rule(dofmap.p_x + ORDER_BUMP)
    if elem[0] == "b":
        _, mx, mz = elem
        gz = gauss_legendre_rule(dofmap.p_z + ORDER_BUMP)
        dz = mesh.dz[mz]
        X = mesh.x_breaks[mx] + 0.5 * mesh.dx * (gx.nodes + 1)
        Z = mesh.z_breaks[mz] + 0.5 * dz * (gz.nodes + 1)
        W = 0.25 * mesh.dx * dz * np.outer(gx.weights, gz.weights)
        return X[:, None], Z[None, :], W
    _, mx = elem
    rz = laguerre_radau_rule(mesh.M + ORDER_BUMP, mesh.beta)
    X = mesh.x_breaks[mx] + 0.5 * mesh.dx * (gx.nodes + 1)
    Z = mesh.L_z + rz.nodes
    W = 0.5 * mesh.dx * np.outer(gx.weights, rz.weights)
    return X[:, None], Z[None, :], W


def _edge_points(mesh, dofmap, edge):
    """Quadrature points/weights and fixed coordinate along one edge."""
    if edge.orient == "h":
        if edge.a[0] == "b":
            _, mx, mz = edge.a
            side_z = mesh.z_breaks[mz + 1] if edge.side in (None, "top") \
                else mesh.z_breaks[mz]
            if edge.side == "bottom":
                side_z = mesh.z_breaks[mz]
        else:
            _, mx = edge.a
            side_z = mesh.L_z
        g = gauss_legendre_rule(dofmap.p_x + ORDER_BUMP)
        X = mesh.x_breaks[mx] + 0.5 * mesh.dx * (g.nodes + 1)
        W = 0.5 * mesh.dx * g.weights
        return X, np.full_like(X, side_z), W
    # vertical edge
    if edge.a[0] == "b":
        _, mxa, mz = edge.a
        x0 = mesh.x_breaks[mxa + 1] if edge.side is None or edge.side == "right" \
            else mesh.x_breaks[mxa]
        if edge.side == "left":
            x0 = mesh.x_breaks[mxa]
        g = gauss_legendre_rule(dofmap.p_z + ORDER_BUMP)
        dz = mesh.dz[mz]
        Z = mesh.z_breaks[mz] + 0.5 * dz * (g.nodes + 1)
        W = 0.5 * dz * g.weights
        return np.full_like(Z, x0), Z, W
    _, mxa = edge.a
    x0 = mesh.x_breaks[mxa + 1] if edge.side is None or edge.side == "right" \
        else mesh.x_breaks[mxa]
    if edge.side == "left":
        x0 = mesh.x_breaks[mxa]
    r = laguerre_radau_rule(mesh.M + ORDER_BUMP, mesh.beta)
    Z = mesh.L_z + r.nodes
    return np.full_like(Z, x0), Z, r.weights


def _edge_normal(edge):
    return (0.0, 1.0) if edge.orient == "h" else (1.0, 0.0)


def _boundary_normal(edge):
    return {"left": (-1.0, 0.0), "right": (1.0, 0.0),
            "bottom": (0.0, -1.0), "top": (0.0, 1.0)}[edge.side]


def oracle_mass(mesh, dofmap):
    n = dofmap.n_xtd
    Mmat = np.zeros((n, n))
    for elem in _elements(mesh):
        funcs = elem_basis(mesh, dofmap, elem)
        X, Z, W = _volume_points(mesh, dofmap, elem)
        for ga, fa, _, _ in funcs:
            va = fa(X, Z)
            for gb, fb, _, _ in funcs:
                Mmat[ga, gb] += np.sum(W * va * fb(X, Z))
    return Mmat


def oracle_reaction(mesh, dofmap, gamma):
    n = dofmap.n_xtd
    G = np.zeros((n, n))
    for elem in _elements(mesh):
        funcs = elem_basis(mesh, dofmap, elem)
        X, Z, W = _volume_points(mesh, dofmap, elem)
        gv = gamma(X + 0 * Z, Z + 0 * X) if callable(gamma) else gamma
        for ga, fa, _, _ in funcs:
            va = fa(X, Z)
            for gb, fb, _, _ in funcs:
                G[ga, gb] += np.sum(W * gv * va * fb(X, Z))
    return G


def oracle_diffusion(mesh, edges, dofmap, mu, eps, sigma):
    """Direct quadrature of every diffusion term of the weak form."""
    mu_x, mu_z = mu
    n = dofmap.n_xtd
    A = np.zeros((n, n))
    # volume stiffness
    for elem in _elements(mesh):
        funcs = elem_basis(mesh, dofmap, elem)
        X, Z, W = _volume_points(mesh, dofmap, elem)
        for gu, _, ux, uz in funcs:
            vux, vuz = ux(X, Z), uz(X, Z)
            for gv, _, vx, vz in funcs:
                A[gv, gu] += np.sum(W * (mu_x * vux * vx(X, Z)
                                         + mu_z * vuz * vz(X, Z)))
    # interior edges (periodic pairs behave as interior)
    for edge in edges.dgdg + edges.dglag + edges.interface:
        n_x, n_z = _edge_normal(edge)
        X, Z, W = _edge_points(mesh, dofmap, edge)
        fa = elem_basis(mesh, dofmap, edge.a)
        fb = elem_basis(mesh, dofmap, edge.b)
        # on the wrapped periodic edge the b-element is evaluated at its own
        # left face, displaced by the period
        shift = 0.0
        if edge.periodic:
            shift = -mesh.L_x
        members = [(g, f, fx, fz, "a") for g, f, fx, fz in fa] \
            + [(g, f, fx, fz, "b") for g, f, fx, fz in fb]

        def traces(f, fx, fz, side):
            xx = X + (shift if side == "b" else 0.0)
            return f(xx, Z), fx(xx, Z), fz(xx, Z)

        for gu, uf, ufx, ufz, us in members:
            u, ux_, uz_ = traces(uf, ufx, ufz, us)
            dun = mu_x * ux_ * n_x + mu_z * uz_ * n_z
            u_jump_a = u if us == "a" else -u
            du_avg = 0.5 * dun
            for gv, vf, vfx, vfz, vs in members:
                v, vx_, vz_ = traces(vf, vfx, vfz, vs)
                dvn = mu_x * vx_ * n_x + mu_z * vz_ * n_z
                v_jump = v if vs == "a" else -v
                dv_avg = 0.5 * dvn
                term = np.sum(W * (-du_avg * v_jump + eps * dv_avg * u_jump_a
                                   + (sigma / edge.measure) * u_jump_a * v_jump))
                A[gv, gu] += term
    # Dirichlet edges (one-sided jumps/averages)
    for edge in edges.dirichlet:
        n_x, n_z = _boundary_normal(edge)
        X, Z, W = _edge_points(mesh, dofmap, edge)
        for gu, uf, ufx, ufz in elem_basis(mesh, dofmap, edge.a):
            u = uf(X, Z)
            dun = mu_x * ufx(X, Z) * n_x + mu_z * ufz(X, Z) * n_z
            for gv, vf, vfx, vfz in elem_basis(mesh, dofmap, edge.a):
                v = vf(X, Z)
                dvn = mu_x * vfx(X, Z) * n_x + mu_z * vfz(X, Z) * n_z
                A[gv, gu] += np.sum(W * (-dun * v + eps * dvn * u
                                         + (sigma / edge.measure) * u * v))
    return A


def oracle_linear_advection(mesh, edges, dofmap, velocity):
    """Direct quadrature of the linearized Rusanov transport terms."""
    u_x, u_z = velocity
    n = dofmap.n_xtd
    F = np.zeros((n, n))
    for elem in _elements(mesh):
        funcs = elem_basis(mesh, dofmap, elem)
        X, Z, W = _volume_points(mesh, dofmap, elem)
        for gu, uf, _, _ in funcs:
            u = uf(X, Z)
            for gv, _, vfx, vfz in funcs:
                F[gv, gu] -= np.sum(W * u * (u_x * vfx(X, Z) + u_z * vfz(X, Z)))
    for edge in edges.dgdg + edges.dglag + edges.interface:
        n_x, n_z = _edge_normal(edge)
        un = u_x * n_x + u_z * n_z
        nu = abs(un)
        X, Z, W = _edge_points(mesh, dofmap, edge)
        shift = -mesh.L_x if edge.periodic else 0.0
        fa = elem_basis(mesh, dofmap, edge.a)
        fb = elem_basis(mesh, dofmap, edge.b)
        members = [(g, f, "a") for g, f, _, _ in fa] + [(g, f, "b") for g, f, _, _ in fb]
        for gu, uf, us in members:
            u = uf(X + (shift if us == "b" else 0.0), Z)
            qhat = 0.5 * (un + nu) * u if us == "a" else 0.5 * (un - nu) * u
            for gv, vf, vs in members:
                v = vf(X + (shift if vs == "b" else 0.0), Z)
                F[gv, gu] += np.sum(W * qhat * v) * (1.0 if vs == "a" else -1.0)
    boundary = [(e, "dirichlet") for e in edges.dirichlet] \
        + [(e, "outflow") for e in edges.outflow] \
        + [(e, "neumann") for e in edges.neumann]
    for edge, kind in boundary:
        n_x, n_z = _boundary_normal(edge)
        un = u_x * n_x + u_z * n_z
        coeff = 0.5 * (un + abs(un)) if kind == "dirichlet" else un
        if coeff == 0.0:
            continue
        X, Z, W = _edge_points(mesh, dofmap, edge)
        funcs = elem_basis(mesh, dofmap, edge.a)
        for gu, uf, _, _ in funcs:
            u = uf(X, Z)
            for gv, vf, _, _ in funcs:
                F[gv, gu] += coeff * np.sum(W * u * vf(X, Z))
    return F
