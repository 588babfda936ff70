"""Time integration: theta-method for linear runs, 3-stage IMEX-ARK else.

The IMEX scheme is the second-order, three-stage additive Runge-Kutta pair
with gamma = 1 - 1/sqrt(2): the stiff linear part -M^{-1}(A+G)q is taken
implicitly (both implicit stages share the diagonal coefficient gamma, so
one factorization serves the whole run), the transport residual
-M^{-1}(F(q) - f) explicitly.  Both tableaux share the weights
b = (1/(2 sqrt 2), 1/(2 sqrt 2), gamma), making the implicit part stiffly
accurate.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .assembly import (advection_dirichlet_lift, assemble_rhs,
                       assemble_system)
from .fields import project_field
from .flux import evaluate_transport
from .mesh import DofMap, StripMesh, classify_edges
from .tables import Workspace

__all__ = [
    "TimeScheme",
    "ARK2_GAMMA",
    "ark2_tableaus",
    "ThetaStepper",
    "ImexArkStepper",
    "step_theta",
    "step_imex_ark",
    "run_transient",
    "SolverError",
]

ARK2_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)


def ark2_tableaus():
    """Explicit and implicit Butcher arrays (a_E, a_I, b, c)."""
    g = ARK2_GAMMA
    delta = 1.0 / (2.0 * math.sqrt(2.0))
    a32 = (3.0 + 2.0 * math.sqrt(2.0)) / 6.0
    a_e = np.array([[0.0, 0.0, 0.0],
                    [2.0 * g, 0.0, 0.0],
                    [1.0 - a32, a32, 0.0]])
    a_i = np.array([[0.0, 0.0, 0.0],
                    [g, g, 0.0],
                    [delta, delta, g]])
    b = np.array([delta, delta, g])
    c = np.array([0.0, 2.0 * g, 1.0])
    return a_e, a_i, b, c


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeScheme:
    """Time discretization descriptor; dt = T / n_steps."""

    kind: str                   # 'theta' or 'imex-ark3'
    dt: float
    n_steps: int
    theta: float = 0.5

    def __post_init__(self):
        if self.kind not in ("theta", "imex-ark3"):
            raise ValueError("scheme kind must be 'theta' or 'imex-ark3'")
        if self.dt <= 0 or self.n_steps < 1:
            raise ValueError("need positive dt and at least one step")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")


def _factorize(matrix, context):
    try:
        return splu(matrix.tocsc())
    except RuntimeError as exc:
        raise SolverError(f"sparse factorization failed ({context}): {exc}") from exc


class ThetaStepper:
    """(M + dt*theta*B) q^{n+1} = [M - dt(1-theta)B] q^n + dt*(theta f^{n+1} + (1-theta) f^n).

    The left-hand factorization is computed once and reused; B must be
    time-independent.
    """

    def __init__(self, mass: np.ndarray, B: sp.spmatrix, theta: float, dt: float):
        n = mass.size
        M = sp.diags(mass)
        self.lu = _factorize((M + dt * theta * B).tocsc(), "theta-method matrix")
        self.rhs_mat = (M - dt * (1.0 - theta) * B).tocsr()
        self.theta = theta
        self.dt = dt
        self.n = n

    def step(self, q, f_n=None, f_np1=None):
        rhs = self.rhs_mat @ q
        if f_np1 is not None:
            rhs = rhs + self.dt * self.theta * f_np1
        if f_n is not None:
            rhs = rhs + self.dt * (1.0 - self.theta) * f_n
        return self.lu.solve(rhs)


def step_theta(q, mass, B, f_n, f_np1, theta, dt):
    """One theta-method step (factorizes on the fly; drivers use ThetaStepper)."""
    return ThetaStepper(np.asarray(mass, float), B, theta, dt).step(q, f_n, f_np1)


class ImexArkStepper:
    """3-stage IMEX-ARK step for dq/dt = f_l(q) + f_nl(q, t).

    ``linear_op`` is the per-variable operator L = A + G (f_l = -M^{-1} L q,
    applied blockwise for systems); ``nonlinear`` maps (q, t) to the full
    explicit tendency f_nl(q, t).  Pass linear_op=None for a fully explicit
    right-hand side.
    """

    def __init__(self, mass: np.ndarray, linear_op: Optional[sp.spmatrix],
                 dt: float, nonlinear: Callable, n_eq: int = 1):
        self.a_e, self.a_i, self.b, self.c = ark2_tableaus()
        self.dt = dt
        self.n_eq = n_eq
        self.mass = mass
        self.nonlinear = nonlinear
        self.L = linear_op.tocsr() if linear_op is not None else None
        if self.L is not None:
            lhs = sp.diags(mass) + dt * ARK2_GAMMA * self.L
            self.lu = _factorize(lhs.tocsc(), "IMEX stage matrix")
        else:
            self.lu = None

    def _f_l(self, Q):
        if self.L is None:
            return np.zeros_like(Q)
        return -(self.L @ Q) / self.mass[:, None]

    def _solve_stage(self, rhs, stage):
        if self.L is None:
            return rhs
        try:
            return self.lu.solve(self.mass[:, None] * rhs)
        except RuntimeError as exc:
            raise SolverError(f"IMEX stage {stage} solve failed: {exc}") from exc

    def step(self, q, t):
        dt, a_e, a_i, b, c = self.dt, self.a_e, self.a_i, self.b, self.c
        n = self.mass.size
        Qn = np.asarray(q, float).reshape(self.n_eq, n).T     # (n, n_eq)

        def fnl(Qmat, time):
            flat = Qmat.T.reshape(-1)
            return self.nonlinear(flat, time).reshape(self.n_eq, n).T

        fl = [None] * 3
        fe = [None] * 3
        Q1 = Qn
        fl[0] = self._f_l(Q1)
        fe[0] = fnl(Q1, t + c[0] * dt)

        rhs = Qn + dt * (a_e[1, 0] * fe[0] + a_i[1, 0] * fl[0])
        Q2 = self._solve_stage(rhs, 2)
        fl[1] = self._f_l(Q2)
        fe[1] = fnl(Q2, t + c[1] * dt)

        rhs = Qn + dt * (a_e[2, 0] * fe[0] + a_e[2, 1] * fe[1]
                         + a_i[2, 0] * fl[0] + a_i[2, 1] * fl[1])
        Q3 = self._solve_stage(rhs, 3)
        fl[2] = self._f_l(Q3)
        fe[2] = fnl(Q3, t + c[2] * dt)

        Qout = Qn + dt * sum(b[i] * (fe[i] + fl[i]) for i in range(3))
        return Qout.T.reshape(-1)


def step_imex_ark(q, mass, linear_op, nonlinear, dt, t=0.0, n_eq=1):
    """One IMEX-ARK step (convenience wrapper around ImexArkStepper)."""
    return ImexArkStepper(np.asarray(mass, float), linear_op, dt,
                          nonlinear, n_eq).step(q, t)


def run_transient(problem, mesh: StripMesh, dofmap: DofMap, scheme: TimeScheme,
                  observers: Sequence[Callable] = (), ws: Optional[Workspace] = None,
                  q0: Optional[np.ndarray] = None):
    """Project the initial data, march n_steps, return the final coefficients.

    Observers are called as obs(step, t, q) after every step (and once with
    step 0 for the initial state).  Non-finite states abort with the step
    index.
    """
    ws = ws or Workspace(mesh, dofmap)
    edges = classify_edges(mesh, problem.bc)
    model = problem.model
    n_eq = model.n_eq
    if dofmap.n_eq != n_eq:
        raise ValueError("dofmap built for a different number of equations")

    if q0 is None:
        if problem.initial is not None:
            q = project_field(mesh, dofmap, problem.initial, ws)
        else:
            q = np.zeros(dofmap.total)
    else:
        q = np.array(q0, dtype=float, copy=True)

    sdm = dofmap if n_eq == 1 else DofMap(mesh, dofmap.p_x, dofmap.p_z, 1)
    mats = assemble_system(mesh, edges, sdm, mu=(problem.mu_x, problem.mu_z),
                           gamma=problem.gamma,
                           velocity=model.velocity if model.is_linear else None,
                           eps=problem.eps, sigma=problem.sigma, ws=ws)
    mass = mats.mass
    dt = scheme.dt

    def rhs_vector(t):
        f = assemble_rhs(mesh, edges, sdm, problem.source, problem.q_D,
                         problem.q_N, t, mu=(problem.mu_x, problem.mu_z),
                         eps=problem.eps, sigma=problem.sigma, ws=ws)
        if model.is_linear and problem.q_D is not None:
            f = f + advection_dirichlet_lift(mesh, edges, sdm, model.velocity,
                                             problem.q_D, t, ws)
        return f

    for obs in observers:
        obs(0, 0.0, q)

    if scheme.kind == "theta":
        if n_eq != 1:
            raise ValueError("theta-method driver handles scalar problems")
        if not model.is_linear:
            raise ValueError("theta-method needs a linear model")
        B = (mats.diffusion + mats.reaction + mats.linear_advection).tocsr()
        stepper = ThetaStepper(mass, B, scheme.theta, dt)
        f_n = rhs_vector(0.0)
        static_rhs = problem.source is None and problem.q_D is None \
            and problem.q_N is None
        for step in range(1, scheme.n_steps + 1):
            f_np1 = f_n if static_rhs else rhs_vector(step * dt)
            q = stepper.step(q, f_n, f_np1)
            f_n = f_np1
            if not np.all(np.isfinite(q)):
                raise SolverError(f"non-finite state after step {step}")
            for obs in observers:
                obs(step, step * dt, q)
        return q

    # IMEX path: A+G implicit, transport (minus source) explicit
    L = (mats.diffusion + mats.reaction).tocsr()
    if L.nnz == 0:
        L = None
    static_rhs = problem.source is None and (
        n_eq > 1 or (problem.q_D is None and problem.q_N is None))
    f_static = np.zeros(dofmap.n_xtd) if static_rhs else None
    inv_mass = 1.0 / mass

    def nonlinear(qflat, t):
        r = evaluate_transport(qflat, mesh, edges, dofmap, model,
                               q_D=problem.q_D, t=t, ws=ws)
        rv = r.reshape(n_eq, dofmap.n_xtd)
        if static_rhs:
            fv = f_static
        else:
            fv = rhs_vector(t)
        out = -(rv - fv) * inv_mass
        return out.reshape(-1)

    stepper = ImexArkStepper(mass, L, dt, nonlinear, n_eq)
    for step in range(1, scheme.n_steps + 1):
        q = stepper.step(q, (step - 1) * dt)
        if not np.all(np.isfinite(q)):
            raise SolverError(f"non-finite state after step {step}")
        for obs in observers:
            obs(step, step * dt, q)
    return q
