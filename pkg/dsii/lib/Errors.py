class DsiiError(Exception):
    """
    Base class of every error raised by the dsii library
    """


class GridError(DsiiError, ValueError):
    """
    Raised when a grid or disk is constructed with unusable parameters
    """


class NoConvergence(DsiiError):
    """
    Raised when an iterative solve does not reach its tolerance (often close to an exceptional point)
    """

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class GridTooSmall(DsiiError):
    """
    Raised when a solution does not decay toward the grid boundary
    """

    def __init__(self, message: str, boundary_ratio: float):
        super().__init__(f"{message} (boundary/max={boundary_ratio:.3e})")
        self.boundary_ratio = boundary_ratio


class ExceptionalOnBoundary(DsiiError):
    """
    Raised when a boundary node of the disk is (numerically) exceptional, the disk radius must grow
    """

    def __init__(self, node: complex, sigma_min: float):
        super().__init__(f"Boundary node {node:.6g} is near-exceptional (sigma_min={sigma_min:.3e})")
        self.node = node
        self.sigma_min = sigma_min


class ContourTooSmall(DsiiError):
    """
    Raised when the integration contour does not enclose the numerical support of the potential
    """


class OverflowRisk(DsiiError):
    """
    Raised when an evolution factor would overflow double precision
    """

    def __init__(self, exponent: float):
        super().__init__(f"Evolution exponent real part {exponent:.1f} exceeds 700")
        self.exponent = exponent


class MissingBoundaryBlock(DsiiError):
    """
    Raised when a non-empty disk is used with data that has no boundary block
    """


class NearSingular(DsiiError):
    """
    Raised when I+T is numerically singular at the requested point
    """

    def __init__(self, z: complex, t: float, sigma_min: float):
        super().__init__(f"I+T is near-singular at z={z:.6g}, t={t:.6g} (sigma_min={sigma_min:.3e})")
        self.z = z
        self.t = t
        self.sigma_min = sigma_min


class BlowupDetected(DsiiError):
    """
    Raised by the split-step integrator when the amplitude cap is exceeded
    """

    def __init__(self, time: float, amplitude: float):
        super().__init__(f"max|q|={amplitude:.3e} exceeded the cap at t={time:.6g}")
        self.time = time
        self.amplitude = amplitude


class Inconclusive(DsiiError):
    """
    Raised when a blow-up scan flags cells on the boundary of its box
    """

    def __init__(self, message: str, blowup_map=None):
        super().__init__(message)
        self.blowup_map = blowup_map


class ConfigError(DsiiError):
    """
    Raised for malformed configuration, with the offending line number if known
    """

    def __init__(self, message: str, line_number: int | None = None):
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line_number = line_number


class FormatError(DsiiError):
    """
    Raised for malformed field or data files, with the offending line number (text) or byte offset (binary)
    """

    def __init__(self, message: str, line_number: int | None = None, offset: int | None = None):
        location = ""
        if line_number is not None:
            location = f"line {line_number}: "
        elif offset is not None:
            location = f"byte {offset}: "
        super().__init__(f"{location}{message}")
        self.line_number = line_number
        self.offset = offset
