"""Inner problem: optimal control for a fixed support set.

For the quadratic law the problem

    min_u  1/2 |S(chi_A u) - y_d|^2 + sum_c area * (alpha/2 u_c^2 + beta_c chi_A)
    s.t.   ua <= u <= ub on A,  u = 0 off A

is solved by a primal-dual active set iteration.  The reduced systems on the
inactive cells are solved by conjugate gradients on ``alpha I + S*S``, each
operator application costing one state and one adjoint solve.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from . import kernels
from .errors import InfeasibleControl, InvalidArgument, NonConvergence
from .fem import DiscreteOperators, solve_adjoint, solve_state, tracking_value
from .mesh import CellSet
from .problem import ProblemSpec

log = logging.getLogger(__name__)

TOL_SUB = 1e-10
MAX_ACTIVE_SET_ITERS = 100
CG_RTOL = 1e-12


@dataclass
class SubproblemSolution:
    support: CellSet
    u: np.ndarray
    y: np.ndarray
    p: np.ndarray
    value: float
    kkt_residual: float
    iterations: int
    cg_iterations: int = 0

    def warm_start(self, law) -> np.ndarray:
        """Initial guess for a nearby set: keep ``u`` on the old set, use the
        pointwise minimizer of the old adjoint elsewhere."""
        if law.is_binary:
            return np.ones_like(self.u)
        guess = kernels.pointwise_minimizer(self.p, law.alpha, law.ua, law.ub)
        return np.where(self.support.bits, self.u, guess)


def _objective(spec, ops, A, u, y, yd) -> float:
    mesh = ops.mesh
    law = spec.law
    inside = A.bits
    beta = spec.beta_on(mesh)
    if law.is_binary:
        pointwise = np.where(inside, beta, 0.0)
    else:
        pointwise = np.where(inside, 0.5 * law.alpha * u * u + beta, 0.0)
    return tracking_value(ops, y, yd) + mesh.cell_area * float(np.sum(pointwise))


def evaluate_J(spec: ProblemSpec, ops: DiscreteOperators, A: CellSet, u) -> float:
    """Objective ``J(u, A)``; values of ``u`` off ``A`` are ignored."""
    if A.mesh.key != ops.mesh.key:
        raise InvalidArgument("set and operators live on different meshes")
    u = np.asarray(u, dtype=float)
    law = spec.law
    u = np.where(A.bits, u, 0.0)
    if not law.is_binary:
        on = u[A.bits]
        if on.size and (on.min() < law.ua - 1e-12 or on.max() > law.ub + 1e-12):
            raise InfeasibleControl("control violates the box on the support set")
    y = solve_state(ops, u)
    return _objective(spec, ops, A, u, y, spec.yd_on(ops.mesh))


def solve_binary(spec: ProblemSpec, ops: DiscreteOperators, A: CellSet) -> SubproblemSolution:
    """The binary law fixes ``u = 1`` on ``A``; no optimization is needed."""
    if not spec.law.is_binary:
        raise InvalidArgument("solve_binary needs the binary control law")
    yd = spec.yd_on(ops.mesh)
    u = A.as_float()
    y = solve_state(ops, u)
    p = solve_adjoint(ops, y, yd)
    return SubproblemSolution(A, u, y, p, _objective(spec, ops, A, u, y, yd), 0.0, 0)


class _ReducedHessian:
    """``alpha I + (S*S)`` restricted to a subset of cells."""

    def __init__(self, ops: DiscreteOperators, alpha: float, free: np.ndarray):
        self.ops = ops
        self.alpha = alpha
        self.free = free
        self.calls = 0

    def sstars(self, v_full: np.ndarray) -> np.ndarray:
        ops = self.ops
        y = ops.solve_nodal(ops.load @ v_full)
        return ops.average @ ops.solve_nodal(ops.mass @ y)

    def matvec(self, x):
        self.calls += 1
        v = np.zeros(self.ops.mesh.n_cells)
        v[self.free] = np.ravel(x)
        return self.alpha * np.ravel(x) + self.sstars(v)[self.free]


def _cg(hess: _ReducedHessian, rhs, x0, rtol):
    n = rhs.size
    op = spla.LinearOperator((n, n), matvec=hess.matvec, dtype=float)
    x, info = spla.cg(op, rhs, x0=x0, rtol=rtol, atol=0.0, maxiter=10 * n + 100)
    if info != 0:
        raise NonConvergence(f"conjugate gradients stopped with info={info}")
    return x


def solve_subproblem(
    spec: ProblemSpec,
    ops: DiscreteOperators,
    A: CellSet,
    warm_start=None,
    tol: float = TOL_SUB,
    max_iter: int = MAX_ACTIVE_SET_ITERS,
) -> SubproblemSolution:
    """Solve the inner problem for the set ``A``.

    The binary law is forwarded to :func:`solve_binary`.  ``warm_start`` is a
    cellwise guess; only its values on ``A`` are used.
    """
    if A.mesh.key != ops.mesh.key:
        raise InvalidArgument("set and operators live on different meshes")
    law = spec.law
    if law.is_binary:
        return solve_binary(spec, ops, A)

    mesh = ops.mesh
    yd = spec.yd_on(mesh)
    inside = A.bits
    alpha, ua, ub = law.alpha, law.ua, law.ub
    zero = np.zeros(mesh.n_cells)
    p0 = solve_adjoint(ops, np.zeros(mesh.n_nodes), yd)

    if not inside.any():
        return SubproblemSolution(A, zero, np.zeros(mesh.n_nodes), p0,
                                  _objective(spec, ops, A, zero, np.zeros(mesh.n_nodes), yd),
                                  0.0, 0)

    if warm_start is None:
        u = zero.copy()
        target = -p0 / alpha
    else:
        u = np.where(inside, np.clip(np.asarray(warm_start, dtype=float), ua, ub), 0.0)
        target = u
    upper = inside & (target >= ub)
    lower = inside & (target <= ua)

    cg_calls = 0
    kkt = np.inf
    y = p = None
    rtol = CG_RTOL
    for it in range(1, max_iter + 1):
        free = inside & ~upper & ~lower
        u_new = np.zeros(mesh.n_cells)
        u_new[upper] = ub
        u_new[lower] = ua
        hess = _ReducedHessian(ops, alpha, np.flatnonzero(free))
        if free.any():
            rhs = -(p0 + hess.sstars(u_new))[free]
            u_new[free] = _cg(hess, rhs, u[free], rtol)
        cg_calls += hess.calls
        u = u_new
        y = solve_state(ops, u)
        p = solve_adjoint(ops, y, yd)
        kkt = kernels.box_residual(u, p, inside, alpha, ua, ub)

        target = -p / alpha
        new_upper = inside & (target > ub)
        new_lower = inside & (target < ua)
        settled = np.array_equal(new_upper, upper) and np.array_equal(new_lower, lower)
        if kkt <= tol:
            break
        if settled:
            if rtol <= 1e-15:
                raise NonConvergence(
                    f"active sets settled but KKT residual is {kkt:.3e}", kkt, it
                )
            rtol *= 1e-2
        upper, lower = new_upper, new_lower
    else:
        raise NonConvergence(
            f"no convergence in {max_iter} active set iterations (residual {kkt:.3e})",
            kkt,
            max_iter,
        )

    value = _objective(spec, ops, A, u, y, yd)
    log.debug("subproblem: |A|=%d it=%d cg=%d kkt=%.2e J=%.10g",
              A.count, it, cg_calls, kkt, value)
    return SubproblemSolution(A, u, y, p, value, kkt, it, cg_calls)
