"""Topological derivative of the value function and derived quantities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgument
from .fem import solve_adjoint, solve_state
from .mesh import CellSet, set_distance_l1
from .subproblem import SubproblemSolution, solve_subproblem

RHO_ZERO_TOL = 1e-14


@dataclass
class TopoField:
    dj: np.ndarray
    rho: np.ndarray
    support_cells: int
    rho_l1: float
    delta_A: float
    area: float
    rho_zero_tol: float = RHO_ZERO_TOL

    @property
    def rho_inf(self) -> float:
        return float(np.max(np.abs(self.rho))) if self.rho.size else 0.0

    def support_mask(self) -> np.ndarray:
        return np.abs(self.rho) > self.rho_zero_tol

    @classmethod
    def from_rho(cls, rho, area: float, dj=None, rho_zero_tol: float = RHO_ZERO_TOL):
        """Build a field from residual densities alone (used by tests and oracles)."""
        rho = np.minimum(np.asarray(rho, dtype=float), 0.0)
        dj = rho.copy() if dj is None else np.asarray(dj, dtype=float)
        l1 = _l1(rho, area)
        return cls(dj, rho, int(np.count_nonzero(np.abs(rho) > rho_zero_tol)), l1, l1,
                   float(area), rho_zero_tol)


def _l1(rho: np.ndarray, area: float) -> float:
    # fixed-order compensated sum so the value does not depend on the backend
    return area * math.fsum(np.abs(rho).tolist())


def topological_derivative(spec, A: CellSet, sol: SubproblemSolution,
                           rho_zero_tol: float = RHO_ZERO_TOL) -> TopoField:
    """``dj = sign * (beta + hbar(p))`` with sign ``-1`` on ``A`` and ``+1`` off it."""
    mesh = A.mesh
    p = np.asarray(sol.p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise InvalidArgument("adjoint has non-finite entries")
    law = spec.law
    dj, rho = kernels.topo_derivative(p, A.bits, spec.beta_on(mesh), law.code,
                                      law.alpha, law.ua, law.ub)
    l1 = _l1(rho, mesh.cell_area)
    support = int(np.count_nonzero(np.abs(rho) > rho_zero_tol))
    return TopoField(dj, rho, support, l1, l1, mesh.cell_area, rho_zero_tol)


def error_bound(tf: TopoField) -> float:
    """Upper bound on ``J(A) - inf J``; equal to ``||rho||_L1``."""
    return tf.delta_A


def flip_oracle(spec, ops, A: CellSet, cell: int, sol: SubproblemSolution | None = None) -> float:
    """``(J(A ^ {cell}) - J(A)) / area`` from two full subproblem solves."""
    mesh = ops.mesh
    if not 0 <= cell < mesh.n_cells:
        raise InvalidArgument(f"cell {cell} out of range")
    if sol is None:
        sol = solve_subproblem(spec, ops, A)
    B = A ^ CellSet.from_indices(mesh, [cell])
    flipped = solve_subproblem(spec, ops, B, warm_start=sol.warm_start(spec.law))
    return (flipped.value - sol.value) / mesh.cell_area


def first_order_change(spec, A: CellSet, B: CellSet, sol_B: SubproblemSolution) -> float:
    """``sum_c area * (chi_A - chi_B) * (beta + hbar(p_B))``."""
    mesh = A.mesh
    law = spec.law
    h = kernels.hbar(sol_B.p, law.code, law.alpha, law.ua, law.ub)
    diff = A.as_float() - B.as_float()
    return mesh.cell_area * math.fsum((diff * (spec.beta_on(mesh) + h)).tolist())


def expansion_probe(spec, ops, A: CellSet, B: CellSet, sol_A=None, sol_B=None):
    """Remainder of the first-order expansion of ``J`` around ``B``.

    Returns ``(lhs, rhs_linear, dist)`` where ``lhs = |J(A) - J(B) - rhs_linear|``.
    """
    if sol_B is None:
        sol_B = solve_subproblem(spec, ops, B)
    if sol_A is None:
        sol_A = solve_subproblem(spec, ops, A, warm_start=sol_B.warm_start(spec.law))
    linear = first_order_change(spec, A, B, sol_B)
    lhs = abs(sol_A.value - sol_B.value - linear)
    return lhs, linear, set_distance_l1(A, B)


def stability_probe(spec, ops, A: CellSet, B: CellSet, sol_A=None, sol_B=None):
    """``(dist, ||u_A - u_B||_L2, ||p_A - p_B||_inf)`` for a pair of sets."""
    if sol_A is None:
        sol_A = solve_subproblem(spec, ops, A)
    if sol_B is None:
        sol_B = solve_subproblem(spec, ops, B, warm_start=sol_A.warm_start(spec.law))
    du = sol_A.u - sol_B.u
    return (set_distance_l1(A, B),
            math.sqrt(ops.mesh.cell_area * float(du @ du)),
            float(np.max(np.abs(sol_A.p - sol_B.p))))


__all__ = [
    "TopoField",
    "topological_derivative",
    "error_bound",
    "flip_oracle",
    "expansion_probe",
    "stability_probe",
    "first_order_change",
    "solve_state",
    "solve_adjoint",
]
