"""
Scattering data directories and run manifests.

A data directory holds ``diag_11``, ``diag_12``, ``diag_21``, ``diag_22`` fields of h(k, k, t) on the k-grid
(NaN where no valid sample exists), the boundary block ``boundary.sdat`` for a non-empty disk and
``scattering.json`` with the grid, disk, amplitude and time.

SDAT: magic ``SDAT0001``, little-endian u32 n_boundary, f64 radius, f64 t, then 4 channel blocks (11, 12, 21, 22)
of n_boundary^2 interleaved f64 (Re, Im) pairs, first argument major.
"""
import json
import logging
import struct
from pathlib import Path

import numpy as np

from dsii.lib.Errors import FormatError
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid
from dsii.lib.grid.DiskSpec import DiskSpec
from dsii.lib.io.FieldFormats import CFLD, read_field, write_field

logger = logging.getLogger(__name__)

SDAT_MAGIC = b"SDAT0001"
SDAT_HEADER = struct.Struct("<Idd")
ENTRIES = ("11", "12", "21", "22")
METADATA = "scattering.json"
BOUNDARY = "boundary.sdat"
MANIFEST = "manifest.json"


def write_sdat(path, block, radius: float, t: float):
    block = np.asarray(block, dtype="<c16")
    nb = block.shape[-1]
    with open(path, "wb") as file:
        file.write(SDAT_MAGIC)
        file.write(SDAT_HEADER.pack(nb, radius, t))
        file.write(np.ascontiguousarray(block.reshape(4, nb, nb)).view("<f8").tobytes())


def read_sdat(path):
    """
    :raises: **FormatError** -- On a bad magic or a truncated payload (with the byte offset)
    :return: Tuple (block (2, 2, nb, nb), radius, t)
    """
    raw = Path(path).read_bytes()
    if raw[:len(SDAT_MAGIC)] != SDAT_MAGIC:
        raise FormatError(f"{path}: not an SDAT file", offset=0)
    start = len(SDAT_MAGIC)
    if len(raw) < start + SDAT_HEADER.size:
        raise FormatError(f"{path}: truncated header", offset=len(raw))
    nb, radius, t = SDAT_HEADER.unpack_from(raw, start)
    payload_start = start + SDAT_HEADER.size
    expected = payload_start + 4 * 16 * nb * nb
    if len(raw) != expected:
        raise FormatError(f"{path}: payload size does not match n_boundary={nb}", offset=min(len(raw), expected))
    block = np.frombuffer(raw, dtype="<f8", offset=payload_start).view("<c16").reshape(2, 2, nb, nb)
    return block.astype(complex), radius, t


def write_data(directory, data: ScatteringData, fmt: str = CFLD):
    """
    Writes scattering data into a directory (created if needed)
    :return: Path of the directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for index, entry in enumerate(ENTRIES):
        row, column = divmod(index, 2)
        values = np.where(data.diag_mask, data.diag[row, column], np.nan)
        write_field(directory / f"diag_{entry}.{fmt}", ComplexField(data.kgrid, values), fmt)
    if data.boundary_block is not None:
        write_sdat(directory / BOUNDARY, data.boundary_block, data.disk.radius, data.time)
    metadata = data.serialize()
    metadata["format"] = fmt
    (directory / METADATA).write_text(json.dumps(metadata, indent=2))
    logger.debug("wrote scattering data to %s", directory)
    return directory


def read_data(directory):
    """
    Reads a scattering data directory
    :raises: **FileNotFoundError** -- If the directory or its metadata is missing
    :raises: **FormatError** -- On malformed files or inconsistent grids
    :return: ScatteringData
    """
    directory = Path(directory)
    metadata_path = directory / METADATA
    if not metadata_path.is_file():
        raise FileNotFoundError(f"{metadata_path} not found")
    try:
        metadata = json.loads(metadata_path.read_text())
    except json.JSONDecodeError as error:
        raise FormatError(f"{metadata_path}: {error.msg}", line_number=error.lineno) from error

    fmt = metadata.get("format", CFLD)
    kgrid = ComplexGrid.deserialize(metadata["kgrid"])
    disk = DiskSpec.deserialize(metadata["disk"])
    diag = np.zeros((2, 2) + kgrid.shape, dtype=complex)
    mask = np.ones(kgrid.shape, dtype=bool)
    for index, entry in enumerate(ENTRIES):
        field = read_field(directory / f"diag_{entry}.{fmt}", fmt)
        if not field.grid.same_as(kgrid):
            raise FormatError(f"diag_{entry}: grid does not match {METADATA}")
        row, column = divmod(index, 2)
        finite = np.isfinite(field.values)
        diag[row, column] = np.where(finite, field.values, 0.0)
        mask &= finite
    mask &= np.abs(kgrid.nodes) > disk.radius

    block = None
    if metadata.get("has_boundary_block", False):
        block, radius, _ = read_sdat(directory / BOUNDARY)
        if block.shape[-1] != disk.n_boundary or radius != disk.radius:
            raise FormatError(f"{BOUNDARY}: does not match the disk in {METADATA}")
    return ScatteringData(kgrid, disk, diag, mask, block, metadata.get("amplitude", 1.0), metadata.get("time", 0.0))


def write_manifest(directory, **entries):
    """
    Writes manifest.json (fingerprint, command, verdicts and any further entries)
    """
    path = Path(directory) / MANIFEST
    path.write_text(json.dumps(entries, indent=2, default=str))
    return path


def read_manifest(directory):
    path = Path(directory) / MANIFEST
    if not path.is_file():
        raise FileNotFoundError(f"{path} not found")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as error:
        raise FormatError(f"{path}: {error.msg}", line_number=error.lineno) from error
