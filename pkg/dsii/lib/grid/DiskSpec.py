import numpy as np

from dsii.lib.Errors import GridError

RAY_SELECTED = "ray"
FIXED_POINT = "fixed"


class DiskSpec:
    """
    Disk D = {|k| < A} centered at the origin with equispaced boundary nodes and a k0 selection policy.
    A radius of 0 describes the empty disk (no boundary term in the inverse transform)
    """

    def __init__(self, radius: float = 0.0, n_boundary: int = 64, k0_policy: str = RAY_SELECTED,
                 k0_angle: float = -np.pi / 2):
        """
        :param radius: Disk radius A (0 for the empty disk)
        :param n_boundary: Number of boundary nodes
        :param k0_policy: "ray" (k0 = -iA e^{i arg z}) or "fixed" (k0 = A e^{i k0_angle})
        :param k0_angle: Angle of the fixed k0
        """
        if radius < 0:
            raise GridError(f"Disk radius must not be negative, got {radius}")
        if n_boundary < 1:
            raise GridError(f"Disk needs at least one boundary node, got {n_boundary}")
        if k0_policy not in (RAY_SELECTED, FIXED_POINT):
            raise GridError(f"Unknown k0 policy {k0_policy!r}")

        self._radius = float(radius)
        self._n_boundary = int(n_boundary)
        self._k0_policy = k0_policy
        self._k0_angle = float(k0_angle)

    @property
    def radius(self):
        return self._radius

    @property
    def n_boundary(self):
        return self._n_boundary

    @property
    def k0_policy(self):
        return self._k0_policy

    @property
    def is_empty(self):
        return self._radius == 0.0

    @property
    def angles(self):
        return 2.0 * np.pi * np.arange(self._n_boundary) / self._n_boundary

    @property
    def nodes(self):
        """
        Boundary nodes A e^{i theta_j}
        :return: complex array of length n_boundary
        """
        return self._radius * np.exp(1j * self.angles)

    def select_k0(self, z: complex):
        """
        Chooses k0 on the boundary for the evaluation point z
        :param z: Evaluation point
        :return: complex k0 with |k0| = A
        """
        if self._k0_policy == FIXED_POINT:
            return self._radius * np.exp(1j * self._k0_angle)
        if z == 0:
            # arg z is undefined at the origin
            return -1j * self._radius
        return -1j * self._radius * np.exp(1j * np.angle(z))

    def same_circle(self, other: "DiskSpec"):
        """
        Whether other has the same radius and, for a non-empty disk, the same boundary nodes (k0 policies may differ)
        """
        if self._radius != other.radius:
            return False
        return self.is_empty or self._n_boundary == other.n_boundary

    def with_policy(self, k0_policy: str, k0_angle: float | None = None):
        return DiskSpec(self._radius, self._n_boundary, k0_policy,
                        self._k0_angle if k0_angle is None else k0_angle)

    def serialize(self):
        return {"radius": self._radius, "n_boundary": self._n_boundary,
                "k0_policy": self._k0_policy, "k0_angle": self._k0_angle}

    @staticmethod
    def deserialize(serialized_obj: dict):
        return DiskSpec(serialized_obj["radius"], serialized_obj["n_boundary"],
                        serialized_obj.get("k0_policy", RAY_SELECTED),
                        serialized_obj.get("k0_angle", -np.pi / 2))

    def __repr__(self):
        return f"<DiskSpec radius={self._radius} n_boundary={self._n_boundary} k0_policy={self._k0_policy}>"
