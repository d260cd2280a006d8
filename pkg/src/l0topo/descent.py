"""Topological gradient descent with Armijo line search on the support set."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .mesh import CellSet
from .select import SelectionResult, select_d
from .subproblem import SubproblemSolution, solve_subproblem
from .topo import RHO_ZERO_TOL, TopoField, topological_derivative

log = logging.getLogger(__name__)


class StopReason(str, enum.Enum):
    DELTA_TOL = "delta_tol"
    RHO_INF = "rho_inf"
    SUPPORT_MIN = "support_min"
    LINESEARCH_FAILED = "linesearch_failed"
    MAX_ITERS = "max_iters"

    @property
    def exit_code(self) -> int:
        if self is StopReason.LINESEARCH_FAILED:
            return 2
        if self is StopReason.MAX_ITERS:
            return 3
        return 0

    @property
    def optimal(self) -> bool:
        return self.exit_code == 0


@dataclass
class DescentConfig:
    tau: float = 0.5
    sigma_armijo: float = 0.1
    delta_tol: float = 0.0
    rho_inf_tol: float = 1e-12
    support_min: int = 3
    max_iters: int = 100
    t_min: float = 1e-8
    initial_set: str | CellSet = "full"
    warm_start: bool = True
    tol_sub: float = 1e-10
    rho_zero_tol: float = RHO_ZERO_TOL

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise InvalidArgument("tau must lie in (0, 1)")
        if not 0 < self.sigma_armijo < 1:
            raise InvalidArgument("sigma_armijo must lie in (0, 1)")
        if self.delta_tol < 0:
            raise InvalidArgument("delta_tol must be nonnegative")
        if self.max_iters < 0:
            raise InvalidArgument("max_iters must be nonnegative")
        if not (isinstance(self.initial_set, CellSet) or self.initial_set in ("full", "empty")):
            raise InvalidArgument("initial_set must be 'full', 'empty' or a CellSet")

    def start_set(self, mesh) -> CellSet:
        if isinstance(self.initial_set, CellSet):
            if self.initial_set.mesh.key != mesh.key:
                raise InvalidArgument("initial set lives on a different mesh")
            return self.initial_set
        return CellSet.full(mesh) if self.initial_set == "full" else CellSet.empty(mesh)


@dataclass
class IterationRecord:
    """One outer iteration.  ``J``, ``rho_l1`` etc. describe the set ``A_k``;
    ``t``, ``mass`` and ``d_cells`` describe the step taken from it (zero when
    the iteration stopped)."""

    k: int
    J: float
    set_measure: float
    rho_l1: float
    rho_inf: float
    rho_support: int
    t: float
    ls_trials: int
    sub_iters: int
    kkt_residual: float
    mass: float = 0.0
    d_cells: int = 0
    stop_reason: StopReason | None = None

    CSV_FIELDS = ("k", "J", "set_measure", "rho_l1", "rho_support", "t",
                  "ls_trials", "sub_iters", "kkt_residual")

    def csv_row(self) -> str:
        return ",".join([
            str(self.k), repr(self.J), repr(self.set_measure), repr(self.rho_l1),
            str(self.rho_support), repr(self.t), str(self.ls_trials),
            str(self.sub_iters), repr(self.kkt_residual),
        ])


@dataclass
class DescentResult:
    final_set: CellSet
    final_solution: SubproblemSolution
    final_topo: TopoField
    history: list[IterationRecord] = field(default_factory=list)
    stop_reason: StopReason | None = None
    sets: list[CellSet] = field(default_factory=list, repr=False)

    @property
    def outer_iterations(self) -> int:
        """Number of outer passes, i.e. sets whose residual was evaluated."""
        return len(self.history)

    @property
    def accepted_steps(self) -> int:
        return len(self.history) - 1

    @property
    def J(self) -> float:
        return self.final_solution.value


def armijo_rhs(tf: TopoField, d: SelectionResult, sigma_armijo: float) -> float:
    """``sigma * sum_{c in D} area * rho_c``, the required decrease (nonpositive)."""
    if d.cells.size == 0:
        return 0.0
    return sigma_armijo * tf.area * math.fsum(tf.rho[d.cells].tolist())


def _stop_reason(tf: TopoField, cfg: DescentConfig) -> StopReason | None:
    if tf.rho_l1 <= cfg.delta_tol:
        return StopReason.DELTA_TOL
    if tf.rho_inf <= cfg.rho_inf_tol:
        return StopReason.RHO_INF
    if tf.support_cells <= cfg.support_min:
        return StopReason.SUPPORT_MIN
    return None


def run_descent(spec, ops, cfg: DescentConfig | None = None, keep_sets: bool = False) -> DescentResult:
    """Minimize the value function over support sets.

    Each outer step solves the inner problem on ``A_k``, computes the
    residual ``rho_k`` of the topological optimality condition and tries
    ``A_k ^ D_{k,t}`` for ``t = 1, tau, tau^2, ...`` until the Armijo test
    passes.  ``D_{k,t}`` is recomputed from ``rho_k`` for every trial ``t``.
    """
    cfg = cfg or DescentConfig()
    mesh = ops.mesh
    law = spec.law
    A = cfg.start_set(mesh)
    sol = solve_subproblem(spec, ops, A, tol=cfg.tol_sub)
    history: list[IterationRecord] = []
    sets = [A] if keep_sets else []
    k = 0
    while True:
        tf = topological_derivative(spec, A, sol, cfg.rho_zero_tol)
        rec = IterationRecord(
            k=k, J=sol.value, set_measure=A.measure, rho_l1=tf.rho_l1, rho_inf=tf.rho_inf,
            rho_support=tf.support_cells, t=0.0, ls_trials=0, sub_iters=sol.iterations,
            kkt_residual=sol.kkt_residual,
        )
        history.append(rec)
        log.info("k=%d J=%.10g |A|=%.6g rho_l1=%.3e support=%d",
                 k, sol.value, A.measure, tf.rho_l1, tf.support_cells)
        reason = _stop_reason(tf, cfg)
        if reason is None and k >= cfg.max_iters:
            reason = StopReason.MAX_ITERS
        if reason is not None:
            rec.stop_reason = reason
            return DescentResult(A, sol, tf, history, reason, sets)

        warm = sol.warm_start(law) if cfg.warm_start else None
        t = 1.0
        trials = 0
        tried: dict[int, tuple] = {}
        accepted = None
        while t >= cfg.t_min:
            trials += 1
            d = select_d(tf, t)
            m = d.cells.size
            # a smaller t may round to the same cell count; the trial set is identical then
            if m not in tried:
                trial_set = A ^ d.as_set(mesh)
                trial = solve_subproblem(spec, ops, trial_set, warm_start=warm, tol=cfg.tol_sub)
                rhs = armijo_rhs(tf, d, cfg.sigma_armijo)
                tried[m] = (trial_set, trial, trial.value <= sol.value + rhs)
            trial_set, trial, ok = tried[m]
            if ok:
                accepted = (d, trial_set, trial)
                break
            t *= cfg.tau
        rec.ls_trials = trials
        if accepted is None:
            rec.stop_reason = StopReason.LINESEARCH_FAILED
            return DescentResult(A, sol, tf, history, StopReason.LINESEARCH_FAILED, sets)
        d, A, sol = accepted
        rec.t = t
        rec.mass = d.mass
        rec.d_cells = d.cells.size
        if keep_sets:
            sets.append(A)
        k += 1


def minimizing_sequence_check(history, sigma_armijo: float = 0.1, delta_tol: float = 0.0) -> bool:
    """Consistency of a run with the convergence theory.

    (a) ``J`` strictly decreasing, (b) ``sum_k t_k ||rho_k||`` bounded by the
    total decrease divided by ``sigma``, where ``t_k`` is the achieved cell
    fraction ``|D_k| / |R_k|`` (the rounded budget may fall short of the
    nominal step), (c) runs that stopped on a tolerance
    end with ``||rho||_L1 <= delta_tol`` or a vanishing residual.
    """
    if not history:
        return False
    js = np.array([r.J for r in history])
    if np.any(np.diff(js) >= 0):
        return False
    steps = history[:-1]
    total = math.fsum(r.d_cells / r.rho_support * r.rho_l1 for r in steps if r.rho_support)
    if total > (js[0] - js[-1]) / sigma_armijo + 1e-9:
        return False
    last = history[-1]
    reason = last.stop_reason
    if reason in (StopReason.LINESEARCH_FAILED, StopReason.MAX_ITERS, None):
        return True
    if reason is StopReason.DELTA_TOL:
        return last.rho_l1 <= delta_tol
    # rho_inf / support_min are the discrete stand-ins for a vanishing residual
    return True
