"""Empirical checks of the sensitivity results on coarse meshes.

* ``flip``: the topological derivative against one-cell difference quotients.
* ``expansion``: order of the remainder of the first-order expansion of J.
* ``stability``: growth of ``u`` and ``p`` differences with the set distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .descent import DescentConfig, run_descent
from .errors import InvalidArgument, UnsupportedSize
from .fem import assemble
from .mesh import CellSet, build_mesh
from .subproblem import solve_subproblem
from .topo import expansion_probe, flip_oracle, stability_probe, topological_derivative

MAX_PROBE_N = 64
FLIP_LEVELS = (16, 32, 64)
BALL_SIZES = (1, 2, 4, 8, 16, 32)


@dataclass
class DiagnosticReport:
    kind: str
    columns: tuple
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    summary_values: dict = field(default_factory=dict)
    passed: bool | None = None

    def to_csv(self) -> str:
        out = [",".join(self.columns)]
        out += [",".join(repr(v) if isinstance(v, float) else str(v) for v in row)
                for row in self.rows]
        return "\n".join(out) + "\n"

    def format(self) -> str:
        lines = [f"[{self.kind}] " + " ".join(f"{k}={v}" for k, v in self.summary.items())]
        if self.passed is not None:
            lines.append(f"[{self.kind}] verdict: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def ball(mesh, center: int, k: int) -> CellSet:
    """The ``k`` cells whose barycenters are closest to that of ``center``."""
    bc = mesh.barycenters()
    d2 = np.sum((bc - bc[center]) ** 2, axis=1)
    return CellSet.from_indices(mesh, np.argsort(d2, kind="stable")[:k])


def cell_containing(mesh, x: float, y: float) -> int:
    dx, dy = mesh.lx / mesh.nx, mesh.ly / mesh.ny
    i = min(int(x / dx), mesh.nx - 1)
    j = min(int(y / dy), mesh.ny - 1)
    above = (y - j * dy) / dy > (x - i * dx) / dx
    return 2 * (j * mesh.nx + i) + int(above)


def _reference(spec, n, descent_cfg=None):
    mesh = build_mesh(*spec.domain, n)
    ops = assemble(mesh, spec.pde)
    res = run_descent(spec, ops, descent_cfg or DescentConfig())
    return mesh, ops, res


def _check_size(n):
    if n > MAX_PROBE_N:
        raise UnsupportedSize(f"probes need full solves per sample; n={n} exceeds {MAX_PROBE_N}")


def flip_diagnostics(spec, levels=FLIP_LEVELS, samples: int = 20, seed: int = 0,
                     descent_cfg=None) -> DiagnosticReport:
    """Compare ``dj`` with the one-cell quotient at the final set of a descent run.

    ``samples`` points are drawn uniformly in the domain from a generator
    seeded with ``seed``; each level probes the cells containing the same
    points.  Passes when the median absolute error strictly decreases.
    """
    for n in levels:
        _check_size(n)
    rep = DiagnosticReport("flip", ("n", "cell", "dj", "flip_oracle", "abs_error", "rel_error"))
    medians, rel_medians = [], []
    for n in levels:
        mesh, ops, res = _reference(spec, n, descent_cfg)
        A, sol = res.final_set, res.final_solution
        tf = topological_derivative(spec, A, sol)
        pts = np.random.default_rng(seed).uniform(size=(samples, 2)) * np.array(spec.domain)
        errs, rels = [], []
        for c in (cell_containing(mesh, x, y) for x, y in pts):
            q = flip_oracle(spec, ops, A, c, sol)
            err = abs(tf.dj[c] - q)
            rel = err / abs(q) if q != 0 else (0.0 if err == 0 else math.inf)
            errs.append(err)
            rels.append(rel)
            rep.rows.append((n, c, float(tf.dj[c]), float(q), float(err), float(rel)))
        medians.append(float(np.median(errs)))
        rel_medians.append(float(np.median(rels)))
    rep.summary = {
        "levels": list(levels),
        "median_abs_error": [f"{m:.3e}" for m in medians],
        "median_rel_error": [f"{m:.3e}" for m in rel_medians],
    }
    rep.summary_values = {"median_abs": medians, "median_rel": rel_medians}
    rep.passed = all(b < a for a, b in zip(medians, medians[1:])) or all(m == 0 for m in medians)
    return rep


def expansion_diagnostics(spec, n: int = 32, sizes=BALL_SIZES, seed: int = 0,
                          descent_cfg=None, center: int | None = None) -> DiagnosticReport:
    """Remainder of the expansion of J around perturbed sets ``B = A ^ ball``."""
    _check_size(n)
    mesh, ops, res = _reference(spec, n, descent_cfg)
    A, sol_A = res.final_set, res.final_solution
    if center is None:
        center = int(np.random.default_rng(seed).integers(mesh.n_cells))
    rep = DiagnosticReport("expansion", ("k", "dist", "lhs", "rhs_linear"))
    dists, lhss = [], []
    for k in sizes:
        B = A ^ ball(mesh, center, k)
        sol_B = solve_subproblem(spec, ops, B, warm_start=sol_A.warm_start(spec.law))
        lhs, lin, dist = expansion_probe(spec, ops, A, B, sol_A, sol_B)
        rep.rows.append((k, dist, lhs, lin))
        if lhs > 0:
            dists.append(dist)
            lhss.append(lhs)
    slope = loglog_slope(dists, lhss) if len(dists) >= 2 else float("nan")
    decades = math.log10(max(dists) / min(dists)) if dists else 0.0
    rep.summary = {"n": n, "center": center, "slope": f"{slope:.3f}", "decades": f"{decades:.2f}"}
    rep.summary_values = {"slope": slope, "decades": decades}
    rep.passed = bool(slope >= 1.2 and decades >= 1.5)
    return rep


def stability_diagnostics(spec, n: int = 32, pairs: int = 12, seed: int = 0,
                          descent_cfg=None) -> DiagnosticReport:
    """Differences of controls and adjoints for seeded random set perturbations.

    The fitted slopes are informational; nothing is asserted.
    """
    mesh, ops, res = _reference(spec, n, descent_cfg)
    A, sol_A = res.final_set, res.final_solution
    rng = np.random.default_rng(seed)
    rep = DiagnosticReport("stability", ("k", "dist", "u_l2", "p_inf"))
    for _ in range(pairs):
        k = int(2 ** rng.integers(0, 7))
        center = int(rng.integers(mesh.n_cells))
        B = A ^ ball(mesh, center, k)
        dist, du, dp = stability_probe(spec, ops, A, B, sol_A)
        rep.rows.append((k, dist, du, dp))
    rows = [r for r in rep.rows if r[2] > 0 and r[3] > 0]
    su = loglog_slope([r[1] for r in rows], [r[2] for r in rows]) if len(rows) > 1 else float("nan")
    sp = loglog_slope([r[1] for r in rows], [r[3] for r in rows]) if len(rows) > 1 else float("nan")
    rep.summary = {"n": n, "slope_u": f"{su:.3f}", "slope_p": f"{sp:.3f}"}
    rep.summary_values = {"slope_u": su, "slope_p": sp}
    return rep


def diagnostics_suite(kind: str, spec, **kwargs) -> DiagnosticReport:
    if kind == "flip":
        return flip_diagnostics(spec, **kwargs)
    if kind == "expansion":
        return expansion_diagnostics(spec, **kwargs)
    if kind == "stability":
        return stability_diagnostics(spec, **kwargs)
    raise InvalidArgument(f"unknown diagnostics kind {kind!r}")
