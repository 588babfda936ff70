"""Extended DG solver for hyperbolic-parabolic problems on semi-infinite strips.

A Legendre-modal DG discretization on a bounded rectangle is coupled
through numerical fluxes to a scaled-Laguerre spectral discretization of
the unbounded remainder of the strip.  The package exposes the bases and
quadrature rules, mesh/dof machinery, operator assembly, Rusanov transport
evaluation, theta-method and IMEX-ARK time steppers, error diagnostics and
the preset experiment scenarios (also reachable through the ``xdg`` CLI).
"""

from .basis import (LaguerreBasis, LegendreBasis, QuadratureRule,
                    gauss_legendre_rule, laguerre_eval, laguerre_radau_rule,
                    legendre_edge_tables, legendre_eval)
from .mesh import (BoundarySpec, DofMap, Edge, EdgeSet, StripMesh,
                   build_mesh, classify_edges)
from .assembly import (SystemMatrices, assemble_diffusion,
                       assemble_linear_advection, assemble_mass,
                       assemble_reaction, assemble_rhs, assemble_system,
                       dump_matrix_coo, local_edge_matrices)
from .flux import (BurgersFlux, FluxModel, LinearAdvectionFlux,
                   ShallowWaterFlux, StateError, evaluate_transport,
                   rusanov_flux, swe_physical_flux)
from .models import (GaussianSpec, ProblemSpec, exact_gaussian_advdiff,
                     gaussian_profile, manufactured_solution, sigmoid_gamma,
                     wavetrain_bc)
from .fields import SolutionField, project_field
from .timeint import (ImexArkStepper, SolverError, ThetaStepper, TimeScheme,
                      ark2_tableaus, run_transient, step_imex_ark, step_theta)
from .diagnostics import (ErrorReport, TimingStats, convergence_rate,
                          courant_numbers, discrete_norm, efficiency_gain,
                          error_report, timing_harness)
from .tables import Workspace

__version__ = "0.1.0"
