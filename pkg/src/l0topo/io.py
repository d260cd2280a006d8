"""CSV and ASCII PGM dumps of sets, fields and iteration histories."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .mesh import CellSet, Mesh


def _square_grid(mesh: Mesh, cell_values) -> np.ndarray:
    """Per-square pairs of cell values, image row 0 at the top of the domain."""
    v = np.asarray(cell_values, dtype=float).reshape(mesh.ny, mesh.nx, 2)
    return v[::-1]


def _write_pgm(path, pixels: np.ndarray, comments=()) -> None:
    h, w = pixels.shape
    lines = ["P2"]
    lines += [f"# {c}" for c in comments]
    lines.append(f"{w} {h}")
    lines.append("255")
    lines += [" ".join(str(int(p)) for p in row) for row in pixels]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise InvalidArgument(f"{path}: not an ASCII PGM file")
    w, h, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w)


def cellset_pixels(A: CellSet) -> np.ndarray:
    """0 / 128 / 255 for squares with none / one / both triangles in the set."""
    counts = _square_grid(A.mesh, A.bits).sum(axis=2)
    return np.choose(counts.astype(int), [0, 128, 255])


def write_cellset_pgm(path, A: CellSet) -> None:
    _write_pgm(path, cellset_pixels(A), [f"cells={A.count} measure={A.measure!r}"])


def write_cellset_csv(path, A: CellSet) -> None:
    rows = np.column_stack([np.arange(A.mesh.n_cells), A.bits.astype(int)])
    np.savetxt(path, rows, fmt="%d", delimiter=",", header="cell_index,flag", comments="")


def read_cellset_csv(path, mesh: Mesh) -> CellSet:
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    if data.shape[1] != 2:
        raise InvalidArgument(f"{path}: expected columns cell_index,flag")
    bits = np.zeros(mesh.n_cells, dtype=bool)
    idx, flag = data[:, 0], data[:, 1]
    if idx.size and (idx.min() < 0 or idx.max() >= mesh.n_cells):
        raise InvalidArgument(f"{path}: cell index out of range for this mesh")
    bits[idx] = flag != 0
    return CellSet(mesh, bits)


def write_field_csv(path, values) -> None:
    values = np.asarray(values, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{v!r}\n")


def write_p0_pgm(path, mesh: Mesh, values) -> tuple[float, float]:
    """Gray raster of a cellwise field (square value = mean of its triangles).

    The linear map sends the minimum to 0 and the maximum to 255; both are
    written as header comments and to a ``.txt`` sidecar next to the image.
    """
    grid = _square_grid(mesh, values).mean(axis=2)
    lo, hi = float(np.min(values)), float(np.max(values))
    span = hi - lo
    if span > 0:
        pixels = np.rint((grid - lo) / span * 255.0).astype(int)
    else:
        pixels = np.zeros(grid.shape, dtype=int)
    _write_pgm(path, pixels, [f"min={lo!r}", f"max={hi!r}"])
    Path(str(path) + ".txt").write_text(f"min={lo!r}\nmax={hi!r}\n", encoding="utf-8")
    return lo, hi


def write_topo_csv(path, tf) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("cell,dj,rho\n")
        for i, (d, r) in enumerate(zip(tf.dj, tf.rho)):
            fh.write(f"{i},{d!r},{r!r}\n")


def write_history_csv(path, history) -> None:
    from .descent import IterationRecord

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(IterationRecord.CSV_FIELDS) + "\n")
        for rec in history:
            fh.write(rec.csv_row() + "\n")


def read_history_csv(path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    keys = lines[0].split(",")
    return [dict(zip(keys, line.split(","))) for line in lines[1:] if line]
