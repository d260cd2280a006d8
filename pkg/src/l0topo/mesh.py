"""Structured triangulation of a rectangle and sets of cells on it.

Grid squares are numbered row by row from the lower-left corner.  Square
``s = j*nx + i`` is split along its lower-left to upper-right diagonal into
cell ``2s`` (below the diagonal) and cell ``2s + 1`` (above it).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class Mesh:
    lx: float
    ly: float
    nx: int
    ny: int
    nodes: np.ndarray = field(repr=False)
    cells: np.ndarray = field(repr=False)
    cell_area: float
    h: float

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def measure(self) -> float:
        return self.lx * self.ly

    @property
    def key(self) -> tuple:
        return (self.lx, self.ly, self.nx, self.ny)

    def boundary_nodes(self) -> np.ndarray:
        ix = np.arange(self.n_nodes) % (self.nx + 1)
        iy = np.arange(self.n_nodes) // (self.nx + 1)
        on = (ix == 0) | (ix == self.nx) | (iy == 0) | (iy == self.ny)
        return np.flatnonzero(on)

    def barycenters(self) -> np.ndarray:
        return self.nodes[self.cells].mean(axis=1)

    def node_nearest(self, x: float, y: float) -> int:
        d = (self.nodes[:, 0] - x) ** 2 + (self.nodes[:, 1] - y) ** 2
        return int(np.argmin(d))

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.cells]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def build_mesh(lx: float, ly: float, nx: int, ny: int | None = None) -> Mesh:
    """Triangulate ``[0, lx] x [0, ly]`` with ``2*nx*ny`` congruent triangles."""
    if ny is None:
        ny = nx
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise InvalidArgument(f"cell counts must be positive integers, got nx={nx}, ny={ny}")
    if not (lx > 0 and ly > 0) or not np.isfinite(lx) or not np.isfinite(ly):
        raise InvalidArgument(f"domain sides must be positive, got {lx} x {ly}")
    nx, ny = int(nx), int(ny)
    lx, ly = float(lx), float(ly)

    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    v00 = j * (nx + 1) + i
    v10 = v00 + 1
    v01 = v00 + nx + 1
    v11 = v01 + 1
    cells = np.empty((2 * nx * ny, 3), dtype=np.int64)
    cells[0::2] = np.column_stack([v00, v10, v11])
    cells[1::2] = np.column_stack([v00, v11, v01])

    dx, dy = lx / nx, ly / ny
    return Mesh(
        lx=lx,
        ly=ly,
        nx=nx,
        ny=ny,
        nodes=nodes,
        cells=cells,
        cell_area=0.5 * dx * dy,
        h=float(np.hypot(dx, dy)),
    )


class CellSet:
    """Indicator of a union of mesh cells, with its Lebesgue measure cached.

    Instances are treated as immutable values; every operation returns a
    new set.
    """

    __slots__ = ("mesh", "bits", "_count")

    def __init__(self, mesh: Mesh, bits, _count: int | None = None):
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (mesh.n_cells,):
            raise InvalidArgument(
                f"expected {mesh.n_cells} cell flags, got shape {bits.shape}"
            )
        bits.setflags(write=False)
        self.mesh = mesh
        self.bits = bits
        self._count = int(np.count_nonzero(bits)) if _count is None else int(_count)

    @classmethod
    def empty(cls, mesh: Mesh) -> CellSet:
        return cls(mesh, np.zeros(mesh.n_cells, dtype=bool), 0)

    @classmethod
    def full(cls, mesh: Mesh) -> CellSet:
        return cls(mesh, np.ones(mesh.n_cells, dtype=bool), mesh.n_cells)

    @classmethod
    def from_indices(cls, mesh: Mesh, indices) -> CellSet:
        bits = np.zeros(mesh.n_cells, dtype=bool)
        idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices,
                         dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= mesh.n_cells):
            raise InvalidArgument("cell index out of range")
        bits[idx] = True
        return cls(mesh, bits)

    @property
    def count(self) -> int:
        return self._count

    @property
    def measure(self) -> float:
        return self.mesh.cell_area * self._count

    def recompute_measure(self) -> float:
        return self.mesh.cell_area * int(np.count_nonzero(self.bits))

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def as_float(self) -> np.ndarray:
        return self.bits.astype(float)

    def __contains__(self, cell) -> bool:
        return bool(self.bits[cell])

    def __len__(self) -> int:
        return self._count

    def __eq__(self, other) -> bool:
        if not isinstance(other, CellSet):
            return NotImplemented
        return self.mesh.key == other.mesh.key and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.mesh.key, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"CellSet({self._count}/{self.mesh.n_cells} cells, measure={self.measure:.6g})"

    def _check(self, other: CellSet) -> None:
        if not isinstance(other, CellSet):
            raise InvalidArgument(f"expected a CellSet, got {type(other).__name__}")
        if self.mesh.key != other.mesh.key:
            raise InvalidArgument("cell sets live on different meshes")

    def __xor__(self, other: CellSet) -> CellSet:
        return symmetric_difference(self, other)

    def __and__(self, other: CellSet) -> CellSet:
        self._check(other)
        return CellSet(self.mesh, self.bits & other.bits)

    def __or__(self, other: CellSet) -> CellSet:
        self._check(other)
        return CellSet(self.mesh, self.bits | other.bits)

    def __sub__(self, other: CellSet) -> CellSet:
        self._check(other)
        return CellSet(self.mesh, self.bits & ~other.bits)

    def complement(self) -> CellSet:
        return CellSet(self.mesh, ~self.bits, self.mesh.n_cells - self._count)

    def issubset(self, other: CellSet) -> bool:
        self._check(other)
        return not np.any(self.bits & ~other.bits)


def symmetric_difference(a: CellSet, b: CellSet) -> CellSet:
    a._check(b)
    common = int(np.count_nonzero(a.bits & b.bits))
    return CellSet(a.mesh, a.bits ^ b.bits, a.count + b.count - 2 * common)


def set_distance_l1(a: CellSet, b: CellSet) -> float:
    """``||chi_a - chi_b||_{L1}``, i.e. the measure of ``a ^ b``."""
    a._check(b)
    return a.mesh.cell_area * int(np.count_nonzero(a.bits ^ b.bits))
