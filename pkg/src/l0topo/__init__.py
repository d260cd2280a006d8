"""Topological gradient descent for optimal control with L0 control cost."""
from .descent import DescentConfig, DescentResult, StopReason, run_descent
from .fem import PdeKind, assemble, solve_adjoint, solve_state, tracking_value
from .hamiltonian import ControlLaw, hbar, pointwise_minimizer
from .kernels import BACKEND
from .mesh import CellSet, Mesh, build_mesh, set_distance_l1, symmetric_difference
from .problem import ProblemSpec, preset
from .select import select_d, select_d_bruteforce
from .subproblem import SubproblemSolution, evaluate_J, solve_binary, solve_subproblem
from .topo import TopoField, error_bound, flip_oracle, topological_derivative

__version__ = "0.1.0"
