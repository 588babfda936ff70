import numpy as np
import pytest

from xdglag.basis import laguerre_radau_rule
from xdglag.mesh import (BoundarySpec, DofMap, build_mesh, classify_edges)


def test_build_mesh_laguerre_nodes():
    # last Laguerre node of the shallow-water setup sits at 44.52 m
    mesh = build_mesh(L_x=10.0, N_x=50, L_z=8.0, N_z=40, M=50, beta=5.0)
    assert mesh.laguerre_nodes[-1] == pytest.approx(44.52, abs=5e-3)
    assert mesh.laguerre_nodes[0] == pytest.approx(8.0)
    assert mesh.N_z == 40 and mesh.L_z == 8.0


def test_build_mesh_standalone_configuration():
    mesh = build_mesh(L_x=1.0, N_x=10, L_z=0.0, N_z=0, M=5, beta=2.0)
    assert mesh.N_z == 0
    assert mesh.has_laguerre
    assert mesh.laguerre_nodes[0] == 0.0


def test_comparison_mode_breakpoints():
    r = laguerre_radau_rule(50, 1.0)
    mesh = build_mesh(L_x=2.0, N_x=4, L_z=1.0, N_z=5, M=50, beta=1.0,
                      comparison_mode=True)
    assert not mesh.has_laguerre
    assert mesh.N_z == 55
    np.testing.assert_allclose(mesh.z_breaks[5:], 1.0 + r.nodes, atol=1e-12)


def test_build_mesh_rejects_bad_breakpoints():
    with pytest.raises(ValueError):
        build_mesh(L_x=1.0, N_x=2, L_z=1.0, N_z=2,
                   z_breaks=np.array([0.0, 0.7, 0.5, 1.0]))
    with pytest.raises(ValueError):
        build_mesh(L_x=1.0, N_x=2, L_z=1.0, N_z=2, M=3, beta=-1.0)


def test_boundary_spec_validation():
    with pytest.raises(ValueError):
        BoundarySpec(bottom="dirichlet", left="periodic", right="dirichlet")
    with pytest.raises(ValueError):
        BoundarySpec(bottom="weird")


def test_classify_edges_small_periodic():
    # 2x1 bounded grid + Laguerre layer, periodic x, Dirichlet bottom
    mesh = build_mesh(L_x=1.0, N_x=2, L_z=0.5, N_z=1, M=3, beta=2.0)
    edges = classify_edges(mesh, BoundarySpec("dirichlet", "periodic", "periodic"))
    assert len(edges.dgdg) == 2            # one real + one periodic pair
    assert len([e for e in edges.dgdg if e.orient == "h"]) == 0
    assert len(edges.interface) == 2
    assert len(edges.dirichlet) == 2
    assert len(edges.dglag) == 2
    assert len(edges.periodic) == 2


def test_interface_count_always_nx():
    for nx in (1, 3, 5):
        mesh = build_mesh(L_x=1.0, N_x=nx, L_z=0.5, N_z=2, M=2, beta=1.0)
        edges = classify_edges(mesh, BoundarySpec("dirichlet", "periodic", "periodic"))
        assert len(edges.interface) == nx
        # no horizontal edges inside the Laguerre layer
        assert all(e.orient == "v" for e in edges.dglag)


@pytest.mark.parametrize("nx,nz", [(1, 1), (2, 3), (4, 4)])
def test_edge_partition_counts(nx, nz):
    mesh = build_mesh(L_x=1.0, N_x=nx, L_z=1.0, N_z=nz, M=2, beta=1.0)
    edges = classify_edges(mesh, BoundarySpec("dirichlet", "dirichlet", "dirichlet"))
    assert len(edges.dgdg) == (nx - 1) * nz + nx * (nz - 1)
    assert len(edges.dglag) == nx - 1
    assert len(edges.interface) == nx
    # bottom row + two sides (each nz bounded + 1 laguerre)
    assert len(edges.dirichlet) == nx + 2 * (nz + 1)
    assert len(edges.periodic) == 0


def test_top_bc_rules():
    mesh = build_mesh(L_x=1.0, N_x=2, L_z=1.0, N_z=2, M=2, beta=1.0)
    with pytest.raises(ValueError):
        classify_edges(mesh, BoundarySpec("dirichlet", "periodic", "periodic",
                                          top="dirichlet"))
    bounded = build_mesh(L_x=1.0, N_x=2, L_z=1.0, N_z=2)
    with pytest.raises(ValueError):
        classify_edges(bounded, BoundarySpec("dirichlet", "periodic", "periodic"))
    edges = classify_edges(bounded, BoundarySpec("dirichlet", "periodic", "periodic",
                                                 top="outflow"))
    assert len(edges.outflow) == 2


def test_dof_sizes_and_first_indices():
    mesh = build_mesh(L_x=1.0, N_x=2, L_z=1.0, N_z=3, M=4, beta=1.0)
    dm = DofMap(mesh, p_x=1, p_z=1)
    assert dm.n_bnd == 2 * 3 * 2 * 2 == 24
    assert dm.n_unbnd == 2 * 2 * 5
    assert dm.dof_index("bounded", 0, 0, 0, 0) == 0
    # j-fastest ordering in the Laguerre block
    assert dm.dof_index("unbounded", 0, None, dm.p_x, 0) == dm.n_bnd + dm.p_x
    # last bounded unknown
    assert dm.dof_index("bounded", 1, 2, 1, 1) == 23


def test_dof_index_bijective():
    mesh = build_mesh(L_x=1.0, N_x=3, L_z=1.0, N_z=2, M=3, beta=2.0)
    dm = DofMap(mesh, p_x=2, p_z=1, n_eq=2)
    seen = set()
    for var in range(2):
        for mz in range(2):
            for mx in range(3):
                for i in range(2):
                    for j in range(3):
                        g = dm.dof_index("bounded", mx, mz, j, i, var)
                        assert dm.unravel(g) == ("bounded", mx, mz, j, i, var)
                        seen.add(g)
        for i in range(4):
            for mx in range(3):
                for j in range(3):
                    g = dm.dof_index("unbounded", mx, None, j, i, var)
                    assert dm.unravel(g) == ("unbounded", mx, None, j, i, var)
                    seen.add(g)
    assert seen == set(range(dm.total))


def test_dof_index_rejects_out_of_range():
    mesh = build_mesh(L_x=1.0, N_x=2, L_z=1.0, N_z=2, M=2, beta=1.0)
    dm = DofMap(mesh, p_x=1, p_z=1)
    with pytest.raises(IndexError):
        dm.dof_index("bounded", 2, 0, 0, 0)
    with pytest.raises(IndexError):
        dm.dof_index("unbounded", 0, None, 0, 3)
    with pytest.raises(IndexError):
        dm.unravel(dm.total)
