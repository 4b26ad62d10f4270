import numpy as np

from dsii.lib.bspace.BSpace import BSpaceLayout
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.inverse.TOperator import data_scale, matmul, off_diagonal
from dsii.lib.inverse.WaveFromV import v_field


def dbar_residual(data: ScatteringData, z: complex, t: float, layout: BSpaceLayout | None = None, tol: float = 1e-10,
                  **kwargs):
    """
    Checks d v / d conj(k) = e^{i(conj(k) z + conj(z) k)/2} conj(v) Pi_o h(k, k, t) off the disk with centered
    differences on the k-grid (stencil spacing = grid spacing)

    :param data: Scattering data at time t
    :param z: Evaluation point
    :param t: Time
    :param layout: B^2 layout, built from the data when omitted
    :param tol: Solver tolerance
    :param kwargs: data_scale, boundary_sign, mode, dense_limit
    :return: Relative residual max|lhs - rhs| / max|rhs| over the nodes whose four neighbours are exterior
    """
    if layout is None:
        layout = BSpaceLayout(data.kgrid, data.disk, full_matrix=False)
    v_ext, _ = v_field(data, z, t, layout, tol, **kwargs)

    kgrid = layout.kgrid
    mask = layout.exterior_mask & data.diag_mask
    v = np.zeros((2, 2) + kgrid.shape, dtype=complex)
    v[:, :, layout.exterior_mask] = v_ext

    inner = np.zeros(kgrid.shape, dtype=bool)
    inner[1:-1, 1:-1] = mask[1:-1, 1:-1] & mask[:-2, 1:-1] & mask[2:, 1:-1] & mask[1:-1, :-2] & mask[1:-1, 2:]

    spacing = kgrid.spacing
    d_x = (np.roll(v, -1, axis=-1) - np.roll(v, 1, axis=-1)) / (2.0 * spacing)
    d_y = (np.roll(v, -1, axis=-2) - np.roll(v, 1, axis=-2)) / (2.0 * spacing)
    lhs = (d_x + 1j * d_y) / 2.0

    k = kgrid.nodes
    kappa = off_diagonal(data.diag) * data_scale(kwargs.get("data_scale", "consistent"))
    rhs = np.exp(1j * (np.conj(k) * z + np.conj(z) * k) / 2.0) * matmul(np.conj(v), kappa)

    if not np.any(inner):
        return 0.0
    peak = float(np.max(np.abs(rhs[:, :, inner])))
    difference = float(np.max(np.abs(lhs[:, :, inner] - rhs[:, :, inner])))
    return difference / peak if peak > 0 else difference
