"""Analysis configuration: defaults, TOML files, environment and CLI overrides."""

import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from qws.errors import ConfigError

HAMILTONIANS = ("adjacency", "laplacian", "signless")

TOLERANCE_FIELDS = (
    "cluster_tol",
    "support_tol",
    "fidelity_tol",
    "certificate_tol",
    "flatness_tol",
    "scan_tol",
)

# Short names accepted by ``--tolerance name=value``.
TOLERANCE_ALIASES = {
    "cluster": "cluster_tol",
    "support": "support_tol",
    "fidelity": "fidelity_tol",
    "certificate": "certificate_tol",
    "flatness": "flatness_tol",
    "scan": "scan_tol",
}

THREADS_ENV = "QWS_THREADS"


@dataclass(frozen=True)
class AnalysisConfig:
    """Tolerances and run settings shared by every analysis."""

    cluster_tol: float = 1e-8
    support_tol: float = 1e-8
    fidelity_tol: float = 1e-8
    certificate_tol: float = 1e-7
    flatness_tol: float = 1e-8
    scan_tol: float = 1e-6
    max_denominator: int = 10**6
    hamiltonian: str = "adjacency"
    t_max: float = 40.0
    samples: int = 20000
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """Raise ConfigError if any value is out of range."""
        for name in TOLERANCE_FIELDS:
            value = getattr(self, name)
            if not 0.0 < value < 1e-2:
                raise ConfigError(f"{name} must lie in (0, 1e-2), got {value!r}")
        if self.hamiltonian not in HAMILTONIANS:
            raise ConfigError(
                f"hamiltonian must be one of {', '.join(HAMILTONIANS)}, got {self.hamiltonian!r}"
            )
        if self.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max!r}")
        if self.samples < 10:
            raise ConfigError(f"samples must be at least 10, got {self.samples!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers!r}")
        if self.max_denominator < 1:
            raise ConfigError(f"max_denominator must be positive, got {self.max_denominator!r}")
        if self.seed < 0:
            raise ConfigError(f"seed must be unsigned, got {self.seed!r}")

    def with_overrides(self, overrides: Mapping[str, Any]) -> "AnalysisConfig":
        """Return a copy with the given fields replaced.

        Args:
            overrides: Field names (or tolerance aliases) mapped to new values.

        Returns:
            A validated AnalysisConfig.
        """
        known = {f.name: f.type for f in fields(self)}
        changes: Dict[str, Any] = {}
        for key, value in overrides.items():
            name = TOLERANCE_ALIASES.get(key, key)
            if name not in known:
                raise ConfigError(f"Unknown configuration key: {key}")
            changes[name] = _coerce(name, getattr(self, name), value)
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _coerce(name: str, current: Any, value: Any) -> Any:
    try:
        if isinstance(current, bool):
            return bool(value)
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value for {name}: {value!r}") from e
    return str(value)


def parse_assignments(items: Optional[Any]) -> Dict[str, str]:
    """Parse ``name=value`` strings from the command line.

    Args:
        items: Iterable of ``name=value`` strings.

    Returns:
        Dictionary of raw string values keyed by name.
    """
    result: Dict[str, str] = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"Expected name=value, got {item!r}")
        key, value = item.split("=", 1)
        result[key.strip()] = value.strip()
    return result


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> AnalysisConfig:
    """Build a configuration from defaults, a TOML file, the environment and overrides.

    Args:
        path: Optional TOML file; values are read from a ``[qws]`` table or the top level.
        overrides: Highest-precedence values (usually from CLI flags).
        environ: Environment mapping, defaults to ``os.environ``.

    Returns:
        The merged, validated configuration.
    """
    config = AnalysisConfig()
    if path is not None:
        path = Path(path)
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"Config file not found: {path}") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"Failed to parse config file {path}: {e}") from e
        table = data.get("qws", data)
        config = config.with_overrides(table)

    env = os.environ if environ is None else environ
    threads = env.get(THREADS_ENV)
    if threads:
        config = config.with_overrides({"workers": threads})

    if overrides:
        config = config.with_overrides(overrides)
    return config
