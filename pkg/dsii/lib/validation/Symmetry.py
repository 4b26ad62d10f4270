import numpy as np

from dsii.lib.forward.ScatteringData import ScatteringData


def _relations(matrix):
    if matrix.size == 0:
        return 0.0
    return float(max(np.max(np.abs(matrix[0, 0] - matrix[1, 1])), np.max(np.abs(matrix[0, 1] + matrix[1, 0]))))


def symmetry_check(subject):
    """
    Deviation from the relations [1,1] = [2,2] and [1,2] = -[2,1]
    :param subject: ScatteringData, or an array of 2x2 matrices shaped (2, 2, ...) such as a v field
    :return: float, maximal deviation
    """
    if isinstance(subject, ScatteringData):
        deviation = _relations(subject.diag[:, :, subject.diag_mask])
        if subject.boundary_block is not None:
            deviation = max(deviation, _relations(subject.boundary_block))
        return deviation
    return _relations(np.asarray(subject))
