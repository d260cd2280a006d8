"""Choice of the cells to flip: maximize captured residual mass under a budget.

With equal cell areas the budgeted problem is solved exactly by taking the
cells of largest ``|rho|``.  Cells cannot be split, so the budget is rounded
to ``m = max(1, round(t * |R|))`` cells and may exceed ``t |R|`` by less than
one cell.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyResidual, InvalidArgument, UnsupportedSize
from .topo import TopoField

BRUTEFORCE_MAX_CELLS = 20


@dataclass
class SelectionResult:
    cells: np.ndarray
    mass: float
    budget_used: float
    effective_t: float

    def as_set(self, mesh):
        from .mesh import CellSet

        return CellSet.from_indices(mesh, self.cells)


def budget_cells(t: float, n_support: int) -> int:
    if not 0 < t <= 1:
        raise InvalidArgument(f"t must lie in (0, 1], got {t}")
    # round half up; Python's round() would send 2.5 to 2
    return max(1, min(n_support, int(math.floor(t * n_support + 0.5))))


def _result(tf: TopoField, cells: np.ndarray, n_support: int) -> SelectionResult:
    cells = np.sort(np.asarray(cells, dtype=np.int64))
    mass = tf.area * math.fsum(np.abs(tf.rho[cells]).tolist())
    used = tf.area * cells.size
    return SelectionResult(cells, mass, used, cells.size / n_support)


def ranked_support(tf: TopoField) -> np.ndarray:
    """Support cells by decreasing ``|rho|``, ties by increasing index."""
    support = np.flatnonzero(tf.support_mask())
    order = np.argsort(-np.abs(tf.rho[support]), kind="stable")
    return support[order]


def select_d(tf: TopoField, t: float) -> SelectionResult:
    ranked = ranked_support(tf)
    if ranked.size == 0:
        raise EmptyResidual("residual vanishes; nothing to select")
    m = budget_cells(t, ranked.size)
    return _result(tf, ranked[:m], ranked.size)


def select_d_bruteforce(tf: TopoField, t: float) -> SelectionResult:
    """Exhaustive search over all subsets of the support within the budget.

    Among subsets of maximal mass the one with the lexicographically smallest
    sorted index tuple is returned.
    """
    support = np.flatnonzero(tf.support_mask())
    n = support.size
    if n == 0:
        raise EmptyResidual("residual vanishes; nothing to select")
    if n > BRUTEFORCE_MAX_CELLS:
        raise UnsupportedSize(f"{n} support cells exceed the brute-force limit")
    m = budget_cells(t, n)
    dens = np.abs(tf.rho[support])
    tol = 1e-12 * float(dens.sum())
    best, best_mass = np.empty(0, dtype=np.int64), 0.0
    for k in range(1, m + 1):
        combos = np.array(list(itertools.combinations(range(n), k)), dtype=np.int64)
        masses = dens[combos].sum(axis=1)
        # rows are in lexicographic order: argmax picks the first near-maximal one
        top = masses.max()
        if top > best_mass + tol:
            first = int(np.argmax(masses >= top - tol))
            best, best_mass = combos[first], float(masses[first])
    return _result(tf, support[best], n)
