import math

import numpy as np
import pytest

from l0topo.fem import (assemble, cell_inner, interpolate, solve_adjoint, solve_state,
                        tracking_value)
from l0topo.mesh import CellSet, build_mesh


def series_center_value(terms=401):
    """Fourier series of the solution of -lap y = 1 with zero Dirichlet data, at the center."""
    total = 0.0
    for m in range(1, terms, 2):
        for n in range(1, terms, 2):
            total += (16.0 * math.sin(m * math.pi / 2) * math.sin(n * math.pi / 2)
                      / (math.pi ** 4 * m * n * (m * m + n * n)))
    return total


def test_series_oracle_value():
    assert series_center_value() == pytest.approx(0.0736713, abs=2e-7)


def test_two_by_two_interior_entry():
    ops = assemble(build_mesh(1, 1, 2), "dirichlet_laplace")
    assert ops.system.shape == (1, 1)
    assert ops.system[0, 0] == pytest.approx(4.0, abs=1e-14)


def test_stiffness_annihilates_constants():
    mesh = build_mesh(1, 1, 6)
    ops = assemble(mesh, "dirichlet_laplace")
    assert np.max(np.abs(ops.stiffness @ np.ones(mesh.n_nodes))) < 1e-12


def test_neumann_matrix_on_constants_is_mass():
    mesh = build_mesh(1, 1, 6)
    ops = assemble(mesh, "neumann_helmholtz")
    one = np.ones(mesh.n_nodes)
    assert np.allclose(ops.system @ one, ops.mass @ one, atol=1e-14)


@pytest.mark.slow
def test_unit_source_center_value():
    mesh = build_mesh(1, 1, 256)
    ops = assemble(mesh, "dirichlet_laplace")
    y = solve_state(ops, np.ones(mesh.n_cells), CellSet.full(mesh))
    assert abs(y[mesh.node_nearest(0.5, 0.5)] - series_center_value()) < 5e-4


def test_center_value_converges_monotonically():
    ref = series_center_value()
    errs = []
    for n in (8, 16, 32, 64):
        mesh = build_mesh(1, 1, n)
        y = solve_state(assemble(mesh, "dirichlet_laplace"), np.ones(mesh.n_cells))
        errs.append(abs(y[mesh.node_nearest(0.5, 0.5)] - ref))
    assert all(b < a for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("c", [1.0, -3.5, 0.25])
def test_neumann_constants_exact(c):
    mesh = build_mesh(1, 1, 16)
    ops = assemble(mesh, "neumann_helmholtz")
    y = solve_state(ops, np.full(mesh.n_cells, c), CellSet.full(mesh))
    assert np.max(np.abs(y - c)) <= 1e-12 * max(1.0, abs(c))


def test_zero_control_zero_state():
    mesh = build_mesh(1, 1, 8)
    y = solve_state(assemble(mesh, "dirichlet_laplace"), np.zeros(mesh.n_cells))
    assert not np.any(y)


def test_support_masks_control(rng):
    mesh = build_mesh(1, 1, 8)
    ops = assemble(mesh, "dirichlet_laplace")
    u = rng.standard_normal(mesh.n_cells)
    A = CellSet(mesh, rng.random(mesh.n_cells) < 0.4)
    assert np.allclose(solve_state(ops, u, A), solve_state(ops, np.where(A.bits, u, 0.0)))


@pytest.mark.parametrize("kind", ["dirichlet_laplace", "neumann_helmholtz"])
def test_linearity(kind, rng):
    mesh = build_mesh(1, 1, 12)
    ops = assemble(mesh, kind)
    u1, u2 = rng.standard_normal((2, mesh.n_cells))
    a, b = 1.7, -0.3
    lhs = solve_state(ops, a * u1 + b * u2)
    rhs = a * solve_state(ops, u1) + b * solve_state(ops, u2)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


@pytest.mark.parametrize("kind", ["dirichlet_laplace", "neumann_helmholtz"])
def test_adjoint_symmetry(kind, rng):
    mesh = build_mesh(1, 1, 8)
    ops = assemble(mesh, kind)
    zero = np.zeros(mesh.n_nodes)
    for _ in range(20):
        u, v = rng.standard_normal((2, mesh.n_cells))
        w = solve_state(ops, v)
        # <S u, S v>_M = <u, S* S v>_L2
        lhs = float(solve_state(ops, u) @ (ops.mass @ w))
        rhs = cell_inner(mesh, u, solve_adjoint(ops, w, zero))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-14)


def test_adjoint_of_unit_misfit_is_averaged_state():
    mesh = build_mesh(1, 1, 16)
    ops = assemble(mesh, "dirichlet_laplace")
    y1 = solve_state(ops, np.ones(mesh.n_cells))
    # mass @ 1 equals load @ 1, so the adjoint solve sees the same right-hand side
    p = solve_adjoint(ops, np.ones(mesh.n_nodes), np.zeros(mesh.n_nodes))
    assert np.allclose(p, ops.average @ y1, atol=1e-14)


def test_adjoint_zero_misfit():
    mesh = build_mesh(1, 1, 4)
    ops = assemble(mesh, "dirichlet_laplace")
    y = np.arange(mesh.n_nodes, dtype=float)
    assert not np.any(solve_adjoint(ops, y, y))


def test_tracking_values():
    mesh = build_mesh(1, 1, 64)
    ops = assemble(mesh, "dirichlet_laplace")
    zero = np.zeros(mesh.n_nodes)
    assert tracking_value(ops, zero, zero) == 0.0
    assert tracking_value(ops, np.ones(mesh.n_nodes), zero) == pytest.approx(0.5, rel=1e-13)
    x1 = interpolate(mesh, lambda x, y: x)
    assert abs(tracking_value(ops, x1, zero) - 1.0 / 6.0) < 1e-3
