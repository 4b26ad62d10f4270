import numpy as np

from dsii.lib.Errors import GridError
from dsii.lib.grid.ComplexGrid import ComplexField


def compare_fields(candidate: ComplexField, reference: ComplexField):
    """
    Error metrics of a field against a reference on the same grid, over the nodes where both are finite
    :raises: **GridError** -- If the grids differ
    :return: dict with rel_l2, max_abs, reference_l2 and the number of compared nodes
    """
    if not candidate.grid.same_as(reference.grid):
        raise GridError("Fields live on different grids")
    finite = np.isfinite(candidate.values) & np.isfinite(reference.values)
    difference = candidate.values[finite] - reference.values[finite]
    reference_l2 = float(np.sqrt(np.sum(np.abs(reference.values[finite]) ** 2) * reference.grid.cell_area))
    error_l2 = float(np.sqrt(np.sum(np.abs(difference) ** 2) * reference.grid.cell_area))
    return {
        "rel_l2": error_l2 / reference_l2 if reference_l2 > 0 else error_l2,
        "max_abs": float(np.max(np.abs(difference))) if difference.size else 0.0,
        "reference_l2": reference_l2,
        "nodes": int(np.sum(finite)),
    }
