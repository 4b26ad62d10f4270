"""
Flat ``key = value`` run configuration with ``#`` comments
"""
import hashlib
import math
import os
from pathlib import Path

from dsii.lib.Errors import ConfigError
from dsii.lib.grid.ComplexGrid import make_grid
from dsii.lib.grid.DiskSpec import DiskSpec

THREADS_ENVIRONMENT = "DSII_THREADS"
EXPONENT_BUDGET = 300.0


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise ValueError(f"expected a positive integer, got {value}")
    return value


def _power_of_two(text):
    value = _positive_int(text)
    if value & (value - 1):
        raise ValueError(f"expected a power of two, got {value}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise ValueError(f"expected a positive number, got {value}")
    return value


def _non_negative_float(text):
    value = float(text)
    if value < 0:
        raise ValueError(f"expected a non-negative number, got {value}")
    return value


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return parse


def _boolean(text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def eval_angle(text: str):
    """
    Parses a number optionally written as a multiple of pi ("-pi/2", "0.5pi", "pi")
    """
    text = text.replace(" ", "")
    if "pi" not in text:
        return float(text)
    head, _, tail = text.partition("pi")
    factor = {"": 1.0, "-": -1.0, "+": 1.0}.get(head.rstrip("*"))
    if factor is None:
        factor = float(head.rstrip("*"))
    divisor = float(tail[1:]) if tail.startswith("/") else 1.0
    if tail and not tail.startswith("/"):
        raise ValueError(f"cannot parse angle {text!r}")
    return factor * math.pi / divisor


def _a_list(text):
    values = [float(entry) for entry in text.split(",") if entry.strip()]
    if not values or any(not 0 < value <= 1 for value in values):
        raise ValueError("amplitudes must lie in (0, 1]")
    return values


# key: (parser, default)
SCHEMA = {
    "grid.n": (_power_of_two, 64),
    "grid.extent": (_positive_float, 6.0),
    "kgrid.n": (_power_of_two, 32),
    "kgrid.extent": (_positive_float, 8.0),
    "disk.radius": (_non_negative_float, 0.0),
    "disk.n_boundary": (_positive_int, 64),
    "disk.k0_policy": (_choice("ray", "fixed"), "ray"),
    "disk.k0_angle": (eval_angle, -math.pi / 2),
    "bspace.modes": (int, -1),
    "bspace.beta_radius": (_non_negative_float, 0.0),
    "solver.tol": (_positive_float, 1e-10),
    "solver.mode": (_choice("auto", "dense", "krylov"), "auto"),
    "solver.dense_limit": (_positive_int, 4096),
    "solver.max_iter": (_positive_int, 400),
    "solver.restart": (_positive_int, 50),
    "forward.path": (_choice("doubled", "iterated"), "doubled"),
    "forward.phase": (_choice("derived", "printed"), "derived"),
    "inverse.boundary_sign": (_choice("plus", "minus"), "plus"),
    "inverse.data_scale": (_choice("consistent", "printed"), "consistent"),
    "inverse.full_matrix": (_boolean, False),
    "evolve.T_max": (_positive_float, 1.0),
    "sweep.a_list": (_a_list, [0.25, 0.5, 0.75, 1.0]),
    "scan.tau": (_non_negative_float, 0.0),
    "scan.near_singular": (_positive_float, 1e-6),
    "splitstep.cap": (_positive_float, 10.0),
    "io.format": (_choice("cfld", "csv"), "cfld"),
    "threads": (_positive_int, 1),
}


class RunConfig:
    """
    Validated run configuration
    """

    def __init__(self, values: dict | None = None):
        self._values = {key: default for key, (_, default) in SCHEMA.items()}
        self._source = {}
        if values:
            for key, value in values.items():
                self.set(key, value)
        self._check()

    @staticmethod
    def parse(text: str):
        """
        :raises: **ConfigError** -- On unknown keys, unparsable values or violated constraints (with the line number)
        :return: RunConfig
        """
        config = RunConfig()
        for line_number, line in enumerate(text.splitlines(), start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            key, separator, value = content.partition("=")
            if not separator:
                raise ConfigError(f"expected 'key = value', got {content!r}", line_number)
            config.set(key.strip(), value.strip(), line_number)
        config._check()
        return config

    @staticmethod
    def load(path):
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Config file {path} not found")
        return RunConfig.parse(path.read_text())

    def set(self, key: str, value, line_number: int | None = None):
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line_number)
        parser, _ = SCHEMA[key]
        if isinstance(value, (list, tuple)):
            value = ",".join(str(entry) for entry in value)
        try:
            value = parser(str(value))
        except ValueError as error:
            raise ConfigError(f"{key}: {error}", line_number) from error
        self._values[key] = value
        self._source[key] = line_number

    def _check(self):
        radius, t_max = self._values["disk.radius"], self._values["evolve.T_max"]
        if t_max * radius ** 2 > EXPONENT_BUDGET:
            raise ConfigError(f"evolve.T_max * disk.radius^2 = {t_max * radius ** 2:.1f} exceeds {EXPONENT_BUDGET:.0f}",
                              self._source.get("evolve.T_max") or self._source.get("disk.radius"))

    def with_overrides(self, **overrides):
        """
        Copy with CLI overrides applied (keys with dots written as underscores are accepted, None is skipped)
        """
        config = RunConfig(dict(self._values))
        for key, value in overrides.items():
            if value is None:
                continue
            config.set(key if key in SCHEMA else key.replace("_", ".", 1), value)
        config._check()
        return config

    def with_environment(self, environment=None):
        environment = os.environ if environment is None else environment
        if THREADS_ENVIRONMENT in environment:
            try:
                return self.with_overrides(threads=_positive_int(environment[THREADS_ENVIRONMENT]))
            except ValueError as error:
                raise ConfigError(f"{THREADS_ENVIRONMENT}: {error}") from error
        return self

    def __getitem__(self, key: str):
        return self._values[key]

    def canonical_text(self):
        lines = []
        for key in sorted(self._values):
            value = self._values[key]
            if isinstance(value, list):
                value = ",".join(repr(float(entry)) for entry in value)
            elif isinstance(value, float):
                value = repr(value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def fingerprint(self):
        """
        SHA-256 of the canonical sorted key = value text
        """
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()

    def grid(self):
        return make_grid(self["grid.extent"], self["grid.n"])

    def kgrid(self):
        return make_grid(self["kgrid.extent"], self["kgrid.n"])

    def disk(self):
        return DiskSpec(self["disk.radius"], self["disk.n_boundary"], self["disk.k0_policy"], self["disk.k0_angle"])

    def forward_options(self):
        return {"path": self["forward.path"], "phase": self["forward.phase"], "threads": self["threads"],
                **self.solver_options()}

    def solver_options(self):
        return {"mode": self["solver.mode"], "dense_limit": self["solver.dense_limit"],
                "restart": self["solver.restart"], "max_iter": self["solver.max_iter"]}

    def inverse_options(self):
        beta_radius = self["bspace.beta_radius"]
        return {"modes": self["bspace.modes"], "beta_radius": beta_radius if beta_radius > 0 else None,
                "full_matrix": self["inverse.full_matrix"], "data_scale": self["inverse.data_scale"],
                "boundary_sign": self["inverse.boundary_sign"], "near_singular": self["scan.near_singular"],
                "t_max": self["evolve.T_max"], "threads": self["threads"], **self.solver_options()}

    def serialize(self):
        return dict(self._values)

    def __repr__(self):
        return f"<RunConfig fingerprint={self.fingerprint()[:12]}>"
