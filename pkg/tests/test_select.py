import numpy as np
import pytest

from l0topo.errors import EmptyResidual, InvalidArgument, UnsupportedSize
from l0topo.select import budget_cells, select_d, select_d_bruteforce
from l0topo.topo import TopoField


def test_full_budget():
    tf = TopoField.from_rho([-1.0, 0.0, -0.5, -2.0], 0.25)
    d = select_d(tf, 1.0)
    assert list(d.cells) == [0, 2, 3]
    assert d.mass == pytest.approx(tf.rho_l1)


def test_four_cell_example():
    tf = TopoField.from_rho([-4.0, -3.0, -2.0, -1.0], 0.25)
    d = select_d(tf, 0.5)
    assert list(d.cells) == [0, 1]
    assert d.mass == pytest.approx(1.75)
    assert tf.rho_l1 == pytest.approx(2.5)
    assert d.mass >= 0.5 * tf.rho_l1
    assert select_d_bruteforce(tf, 0.5).mass == pytest.approx(1.75)


def test_ties_by_index():
    tf = TopoField.from_rho(np.full(10, -1.0), 0.1)
    d = select_d(tf, 0.3)
    assert list(d.cells) == [0, 1, 2]
    assert d.mass == pytest.approx(0.3 * tf.rho_l1)


def test_single_cell_and_minimum_budget():
    tf = TopoField.from_rho([0.0, -1.0, 0.0], 1.0)
    assert list(select_d_bruteforce(tf, 0.01).cells) == [1]
    tf = TopoField.from_rho(-np.arange(1.0, 11.0), 1.0)
    assert select_d(tf, 1e-6).cells.size == 1


def test_rounding_half_up():
    assert budget_cells(0.25, 10) == 3
    assert budget_cells(0.5, 5) == 3
    assert budget_cells(0.24, 10) == 2
    with pytest.raises(InvalidArgument):
        budget_cells(0.0, 4)


def test_errors():
    with pytest.raises(EmptyResidual):
        select_d(TopoField.from_rho(np.zeros(4), 1.0), 0.5)
    with pytest.raises(UnsupportedSize):
        select_d_bruteforce(TopoField.from_rho(-np.ones(25), 1.0), 0.5)


def random_field(rng, ties=False):
    n = int(rng.integers(1, 25))
    rho = np.zeros(n)
    k = int(rng.integers(1, min(n, 16) + 1))
    idx = rng.choice(n, k, replace=False)
    vals = rng.integers(1, 4, k).astype(float) if ties else rng.exponential(size=k)
    rho[idx] = -vals
    return TopoField.from_rho(rho, 1.0 / n)


def test_matches_bruteforce(rng):
    for i in range(200):
        tf = random_field(rng, ties=i % 2 == 0)
        t = float(rng.uniform(0.05, 1.0))
        fast, slow = select_d(tf, t), select_d_bruteforce(tf, t)
        assert fast.mass == pytest.approx(slow.mass, rel=1e-12)
        assert list(fast.cells) == list(slow.cells)


def test_nested(rng):
    for _ in range(50):
        tf = random_field(rng)
        t1, t2 = np.sort(rng.uniform(0.01, 1.0, 2))
        assert set(select_d(tf, t1).cells) <= set(select_d(tf, t2).cells)
