"""P1 state / P0 control discretization of the elliptic state equation.

Controls and adjoint restrictions are cellwise constant arrays of length
``mesh.n_cells``; states are nodal arrays of length ``mesh.n_nodes``.
"""
from __future__ import annotations

import enum

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import InvalidArgument, NumericalBreakdown
from .mesh import CellSet, Mesh

RESIDUAL_TOL = 1e-12


class PdeKind(str, enum.Enum):
    DIRICHLET_LAPLACE = "dirichlet_laplace"
    NEUMANN_HELMHOLTZ = "neumann_helmholtz"


class DiscreteOperators:
    """Assembled matrices plus a factorization of the state operator.

    ``system`` is the operator restricted to the free nodes (all nodes for
    the Neumann problem, interior nodes for the Dirichlet problem).  The
    state operator is self-adjoint, so the same factorization serves state
    and adjoint solves.
    """

    def __init__(self, mesh: Mesh, kind: PdeKind, stiffness, mass, system, free, load, average):
        self.mesh = mesh
        self.kind = PdeKind(kind)
        self.stiffness = stiffness
        self.mass = mass
        self.system = system
        self.free = free
        self.load = load
        self.average = average
        self._lu = _factorize(system)
        self._norm_inf = float(abs(system).sum(axis=1).max()) if system.shape[0] else 0.0

    @property
    def n_free(self) -> int:
        return self.free.size

    def solve_nodal(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``system x = rhs[free]`` and extend by zero to all nodes."""
        b = rhs[self.free]
        x = self._lu.solve(b)
        err = self._backward_error(x, b)
        if err > RESIDUAL_TOL:
            # one step of iterative refinement usually recovers the last digits
            x -= self._lu.solve(self.system @ x - b)
            err = self._backward_error(x, b)
            if err > RESIDUAL_TOL:
                raise NumericalBreakdown(f"linear solve backward error {err:.3e}")
        if not np.all(np.isfinite(x)):
            raise NumericalBreakdown("non-finite state solution")
        out = np.zeros(self.mesh.n_nodes)
        out[self.free] = x
        return out

    def _backward_error(self, x, b) -> float:
        """``|Ax - b| / (|A| |x| + |b|)`` in the infinity norm."""
        r = self.system @ x - b
        denom = self._norm_inf * np.max(np.abs(x), initial=0.0) + np.max(np.abs(b), initial=0.0)
        return float(np.max(np.abs(r), initial=0.0) / denom) if denom > 0 else 0.0


def _factorize(system):
    try:
        lu = spla.splu(
            system.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise NumericalBreakdown(f"factorization failed: {exc}") from exc
    # symmetric pivoting: an SPD matrix has a positive U diagonal
    if np.any(lu.U.diagonal() <= 0):
        raise NumericalBreakdown("state operator is not positive definite")
    return lu


def assemble(mesh: Mesh, kind: PdeKind | str) -> DiscreteOperators:
    kind = PdeKind(kind)
    rows, cols, kvals, mvals = kernels.p1_triplets(mesh.nodes, mesh.cells)
    shape = (mesh.n_nodes, mesh.n_nodes)
    stiffness = sp.csr_matrix((kvals, (rows, cols)), shape=shape)
    mass = sp.csr_matrix((mvals, (rows, cols)), shape=shape)

    if kind is PdeKind.DIRICHLET_LAPLACE:
        full = stiffness
        free = np.setdiff1d(np.arange(mesh.n_nodes), mesh.boundary_nodes())
    else:
        full = stiffness + mass
        free = np.arange(mesh.n_nodes)
    system = full[free][:, free].tocsr()
    # exact symmetry; assembly rounding is far below the 1e-12 contract
    system = ((system + system.T) * 0.5).tocsr()

    nc = mesh.n_cells
    cell_idx = np.repeat(np.arange(nc), 3)
    node_idx = mesh.cells.ravel()
    load = sp.csr_matrix(
        (np.full(3 * nc, mesh.cell_area / 3.0), (node_idx, cell_idx)),
        shape=(mesh.n_nodes, nc),
    )
    average = sp.csr_matrix(
        (np.full(3 * nc, 1.0 / 3.0), (cell_idx, node_idx)), shape=(nc, mesh.n_nodes)
    )
    return DiscreteOperators(mesh, kind, stiffness, mass, system, free, load, average)


def interpolate(mesh: Mesh, f) -> np.ndarray:
    """Nodal interpolant of ``f(x1, x2)``; scalars are broadcast."""
    if callable(f):
        vals = np.asarray(f(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=float)
        return np.broadcast_to(vals, (mesh.n_nodes,)).copy()
    return np.full(mesh.n_nodes, float(f))


def _check_cells(ops: DiscreteOperators, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (ops.mesh.n_cells,):
        raise InvalidArgument(f"expected a cellwise field of length {ops.mesh.n_cells}")
    if not np.all(np.isfinite(u)):
        raise InvalidArgument("control has non-finite entries")
    return u


def _check_nodes(ops: DiscreteOperators, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (ops.mesh.n_nodes,):
        raise InvalidArgument(f"expected a nodal field of length {ops.mesh.n_nodes}")
    return y


def solve_state(ops: DiscreteOperators, u, support: CellSet | None = None) -> np.ndarray:
    """State for the control ``chi_support * u``."""
    u = _check_cells(ops, u)
    if support is not None:
        if support.mesh.key != ops.mesh.key:
            raise InvalidArgument("support lives on a different mesh")
        u = np.where(support.bits, u, 0.0)
    return ops.solve_nodal(ops.load @ u)


def solve_adjoint(ops: DiscreteOperators, y, yd) -> np.ndarray:
    """Cell averages of the adjoint state driven by ``y - yd``."""
    d = _check_nodes(ops, y) - _check_nodes(ops, yd)
    return ops.average @ ops.solve_nodal(ops.mass @ d)


def tracking_value(ops: DiscreteOperators, y, yd) -> float:
    d = _check_nodes(ops, y) - _check_nodes(ops, yd)
    return 0.5 * float(d @ (ops.mass @ d))


def cell_inner(mesh: Mesh, u, v) -> float:
    """L2 inner product of two cellwise constant fields."""
    return mesh.cell_area * float(np.dot(u, v))
