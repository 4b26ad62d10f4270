"""
Complex field files.

CFLD: magic ``CFLD0001``, little-endian u32 n_x, u32 n_y, f64 extent, then n_x * n_y interleaved f64 (Re, Im)
in row-major order. CSV: header ``x,y,re,im``, one node per line, values written with ``%.17g``.
"""
import csv
import logging
import struct
from pathlib import Path

import numpy as np

from dsii.lib.Errors import FormatError, GridError
from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid, make_grid

logger = logging.getLogger(__name__)

CFLD = "cfld"
CSV = "csv"

CFLD_MAGIC = b"CFLD0001"
CFLD_HEADER = struct.Struct("<IId")
CSV_HEADER = ["x", "y", "re", "im"]


def field_format(path: Path, default: str = CFLD):
    suffix = Path(path).suffix.lower().lstrip(".")
    return suffix if suffix in (CFLD, CSV) else default


def write_cfld(path: Path, field: ComplexField):
    grid = field.grid
    payload = np.ascontiguousarray(field.values, dtype="<c16").view("<f8")
    with open(path, "wb") as file:
        file.write(CFLD_MAGIC)
        file.write(CFLD_HEADER.pack(grid.n_per_side, grid.n_per_side, grid.extent))
        file.write(payload.tobytes())


def read_cfld(path: Path):
    """
    :raises: **FormatError** -- On a bad magic, a non-square or non power of two grid or a truncated payload (with the byte offset)
    :return: ComplexField
    """
    raw = Path(path).read_bytes()
    if raw[:len(CFLD_MAGIC)] != CFLD_MAGIC:
        raise FormatError(f"{path}: not a CFLD file", offset=0)
    start = len(CFLD_MAGIC)
    if len(raw) < start + CFLD_HEADER.size:
        raise FormatError(f"{path}: truncated header", offset=len(raw))
    n_x, n_y, extent = CFLD_HEADER.unpack_from(raw, start)
    if n_x != n_y:
        raise FormatError(f"{path}: only square grids are supported, got {n_x}x{n_y}", offset=start)
    payload_start = start + CFLD_HEADER.size
    expected = payload_start + 16 * n_x * n_y
    if len(raw) != expected:
        raise FormatError(f"{path}: payload has {len(raw) - payload_start} bytes, expected {16 * n_x * n_y}",
                          offset=min(len(raw), expected))
    try:
        grid = make_grid(extent, n_x)
    except GridError as error:
        raise FormatError(f"{path}: {error}", offset=start) from error
    values = np.frombuffer(raw, dtype="<f8", offset=payload_start).view("<c16").reshape(n_y, n_x)
    return ComplexField(grid, values.astype(complex))


def write_csv(path: Path, field: ComplexField):
    nodes = field.grid.nodes.ravel()
    values = field.values.ravel()
    with open(path, "w", newline="") as file:
        writer = csv.writer(file)
        writer.writerow(CSV_HEADER)
        for node, value in zip(nodes, values):
            writer.writerow(["%.17g" % node.real, "%.17g" % node.imag, "%.17g" % value.real, "%.17g" % value.imag])


def read_csv(path: Path):
    """
    :raises: **FormatError** -- On a bad header, unparsable numbers (with the line number) or a node set that is not a power of two square grid
    :return: ComplexField
    """
    rows = []
    with open(path, newline="") as file:
        reader = csv.reader(file)
        header = next(reader, None)
        if header is None or [entry.strip() for entry in header] != CSV_HEADER:
            raise FormatError(f"{path}: expected header {','.join(CSV_HEADER)}", line_number=1)
        for row in reader:
            if not row:
                continue
            if len(row) != 4:
                raise FormatError(f"{path}: expected 4 columns, got {len(row)}", line_number=reader.line_num)
            try:
                rows.append([float(entry) for entry in row])
            except ValueError as error:
                raise FormatError(f"{path}: {error}", line_number=reader.line_num) from error

    table = np.array(rows, dtype=float).reshape(-1, 4)
    n = int(round(np.sqrt(table.shape[0])))
    if n < 2 or n * n != table.shape[0]:
        raise FormatError(f"{path}: {table.shape[0]} nodes do not form a square grid", line_number=len(rows) + 1)
    x = np.unique(table[:, 0])
    if x.size != n:
        raise FormatError(f"{path}: x coordinates do not form a regular axis", line_number=2)
    spacing = x[1] - x[0]
    try:
        grid = make_grid(float(-x[0] + spacing / 2.0), n)
    except GridError as error:
        raise FormatError(f"{path}: {error}", line_number=2) from error

    # nodes may come in any order
    columns = np.rint((table[:, 0] - x[0]) / spacing).astype(int)
    rows_index = np.rint((table[:, 1] - x[0]) / spacing).astype(int)
    if np.any((columns < 0) | (columns >= n) | (rows_index < 0) | (rows_index >= n)):
        raise FormatError(f"{path}: y coordinates do not match the x axis", line_number=2)
    values = np.full(grid.shape, np.nan, dtype=complex)
    values[rows_index, columns] = table[:, 2] + 1j * table[:, 3]
    return ComplexField(grid, values)


def write_field(path, field: ComplexField, fmt: str | None = None):
    """
    Writes a field as CFLD or CSV (chosen by fmt, else by the file suffix)
    :return: Path written
    """
    path = Path(path)
    fmt = fmt or field_format(path)
    if fmt == CSV:
        write_csv(path, field)
    else:
        write_cfld(path, field)
    logger.debug("wrote %s (%s)", path, fmt)
    return path


def read_field(path, fmt: str | None = None):
    """
    Reads a CFLD or CSV field (chosen by fmt, else by the file suffix)
    :raises: **FileNotFoundError**, **FormatError**
    :return: ComplexField
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Field file {path} not found")
    fmt = fmt or field_format(path)
    return read_csv(path) if fmt == CSV else read_cfld(path)


def write_mask(path, mask, grid: ComplexGrid, fmt: str | None = None):
    """
    Writes a boolean mask as a field with values 1 (set) and 0
    """
    return write_field(path, ComplexField(grid, np.asarray(mask, dtype=complex)), fmt)
