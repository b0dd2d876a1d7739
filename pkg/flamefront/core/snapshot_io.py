"""
Snapshot file formats.

Text grid:   header line "FLAMEGRID v1 nx=<int> ny=<int> h=<float> t=<float>",
             then one row of nx values per line (ny lines).
Binary grid: the same header line, then nx*ny little-endian float64 values.
Radial:      header line "FLAMERAD v1 n=<int> cells=<int> h=<float> t=<float>",
             then one node value per line.

Floats are written with 17 significant digits so files read back exactly.
"""
import logging
import re
from pathlib import Path
from typing import Union

import numpy as np

from core.errors import ParameterError
from core.grid import GridSpec, ScalarField
from core.radial_field import RadialField

logger = logging.getLogger(__name__)

GRID_MAGIC = "FLAMEGRID"
RADIAL_MAGIC = "FLAMERAD"
VERSION = "v1"

_GRID_HEADER = re.compile(
    r"^FLAMEGRID v1 nx=(?P<nx>\d+) ny=(?P<ny>\d+) h=(?P<h>\S+) t=(?P<t>\S+)$"
)
_RADIAL_HEADER = re.compile(
    r"^FLAMERAD v1 n=(?P<n>\d+) cells=(?P<cells>\d+) h=(?P<h>\S+) t=(?P<t>\S+)$"
)

PathLike = Union[str, Path]


def _grid_header(field: ScalarField) -> str:
    nx, ny = field.grid.shape
    return f"{GRID_MAGIC} {VERSION} nx={nx} ny={ny} h={field.grid.spacing:.17g} t={field.time:.17g}"


def _grid_from_header(match) -> tuple:
    nx, ny = int(match["nx"]), int(match["ny"])
    if nx != ny:
        raise ParameterError(f"only square grids are supported, got {nx}x{ny}")
    h = float(match["h"])
    return GridSpec(0.5 * nx * h, nx), float(match["t"])


def write_grid_text(field: ScalarField, path: PathLike) -> Path:
    """Write a Cartesian snapshot as text; row j holds u[:, j] for fixed y."""
    path = Path(path)
    with path.open("w", encoding="ascii", newline="\n") as handle:
        handle.write(_grid_header(field) + "\n")
        np.savetxt(handle, field.values.T, fmt="%.17g")
    logger.debug("Wrote %s", path)
    return path


def read_grid_text(path: PathLike) -> ScalarField:
    """
    Read a text snapshot.

    Raises:
        ParameterError: If the header or the value count is malformed
    """
    path = Path(path)
    with path.open("r", encoding="ascii") as handle:
        match = _GRID_HEADER.match(handle.readline().strip())
        if match is None:
            raise ParameterError(f"{path}: not a FLAMEGRID v1 text file")
        grid, time = _grid_from_header(match)
        values = np.loadtxt(handle, dtype=np.float64, ndmin=2)
    if values.shape != grid.shape:
        raise ParameterError(f"{path}: expected {grid.shape} values, found {values.shape}")
    return ScalarField(grid, values.T, time)


def write_grid_binary(field: ScalarField, path: PathLike) -> Path:
    """Header line followed by row-major little-endian float64 values."""
    path = Path(path)
    with path.open("wb") as handle:
        handle.write((_grid_header(field) + "\n").encode("ascii"))
        handle.write(np.ascontiguousarray(field.values.T, dtype="<f8").tobytes())
    logger.debug("Wrote %s", path)
    return path


def read_grid_binary(path: PathLike) -> ScalarField:
    path = Path(path)
    data = path.read_bytes()
    newline = data.find(b"\n")
    match = _GRID_HEADER.match(data[:newline].decode("ascii", errors="replace")) if newline >= 0 else None
    if match is None:
        raise ParameterError(f"{path}: not a FLAMEGRID v1 binary file")
    grid, time = _grid_from_header(match)
    payload = np.frombuffer(data[newline + 1:], dtype="<f8")
    if payload.size != grid.shape[0] * grid.shape[1]:
        raise ParameterError(f"{path}: expected {grid.shape[0] * grid.shape[1]} values, found {payload.size}")
    return ScalarField(grid, payload.reshape(grid.shape).T, time)


def write_radial_text(field: RadialField, path: PathLike) -> Path:
    path = Path(path)
    header = (
        f"{RADIAL_MAGIC} {VERSION} n={field.dimension} cells={field.cells} "
        f"h={field.spacing:.17g} t={field.time:.17g}"
    )
    with path.open("w", encoding="ascii", newline="\n") as handle:
        handle.write(header + "\n")
        np.savetxt(handle, field.values, fmt="%.17g")
    logger.debug("Wrote %s", path)
    return path


def read_radial_text(path: PathLike) -> RadialField:
    """
    Read a radial snapshot.

    Raises:
        ParameterError: If the header or the node count is malformed
    """
    path = Path(path)
    with path.open("r", encoding="ascii") as handle:
        match = _RADIAL_HEADER.match(handle.readline().strip())
        if match is None:
            raise ParameterError(f"{path}: not a FLAMERAD v1 file")
        values = np.loadtxt(handle, dtype=np.float64, ndmin=1)
    cells = int(match["cells"])
    if values.size != cells + 1:
        raise ParameterError(f"{path}: expected {cells + 1} nodes, found {values.size}")
    return RadialField(int(match["n"]), cells * float(match["h"]), values, float(match["t"]))


def write_snapshot(field, path: PathLike, binary: bool = False) -> Path:
    """Dispatch on the field type; radial snapshots are always text."""
    if isinstance(field, RadialField):
        return write_radial_text(field, path)
    if binary:
        return write_grid_binary(field, path)
    return write_grid_text(field, path)


def read_snapshot(path: PathLike):
    """Read any of the three formats; binary grids are recognised by the .bin suffix."""
    path = Path(path)
    if path.suffix == ".bin":
        return read_grid_binary(path)
    with path.open("rb") as handle:
        magic = handle.read(len(GRID_MAGIC))
    if magic.startswith(RADIAL_MAGIC.encode("ascii")):
        return read_radial_text(path)
    return read_grid_text(path)
