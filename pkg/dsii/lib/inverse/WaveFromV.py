"""
The inverse-problem unknown v(z, .) = w + I at the exterior k nodes
"""
from dsii.lib.bspace.BSpace import BSpaceLayout
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.inverse.SolveW import solve_w, v_matrix
from dsii.lib.inverse.TOperator import TOperator


def v_field(data: ScatteringData, z: complex, t: float, layout: BSpaceLayout, tol: float = 1e-10, **kwargs):
    """
    v(z, .) = w + I at the exterior k nodes of the layout
    :return: Tuple (v (2, 2, N_ext), SolveReport)
    """
    operator = TOperator(data, z, t, layout, **{key: kwargs[key] for key in ("data_scale", "boundary_sign")
                                                if key in kwargs})
    w, report = solve_w(operator, tol, **{key: kwargs[key] for key in ("mode", "dense_limit") if key in kwargs})
    v_ext, _ = v_matrix(w)
    return v_ext, report
