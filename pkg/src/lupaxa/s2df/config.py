"""
Configuration loading, coercion, and run manifests for the ``s2df`` tool.

This module handles:

* Reading configuration files: JSON (flat, or with an explicit ``"config"``
  block as written in run manifests) or flat ``key = value`` text.
* Type coercion of every known setting; unknown keys are rejected.
* Merging defaults < config file < command-line flags into a validated
  :class:`RunConfig`.
* Writing and comparing ``run.json`` manifests with SHA-256 output digests.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import json
from collections.abc import Callable, Iterable, Mapping
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .ablation import ExtractionSettings
from .exceptions import (
    ConfigError,
    OutputError,
)
from .losses import (
    LOSS_VARIANTS,
    WEIGHT_PRESETS,
)
from .sampler import SamplerConfig
from .trainer import TrainConfig
from .utils import (
    RUN_DEFAULTS,
    file_digest,
)
from .version import get_version

MANIFEST_NAME = "run.json"


# ---------------------------------------------------------------------------
# Coercion
# ---------------------------------------------------------------------------


def _coerce_bool(value: object) -> bool:
    """
    Convert a config value to a boolean, if possible.

    Raises
    ------
    ConfigError
        If the value cannot be reasonably interpreted as a boolean.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return bool(value)
    if isinstance(value, str):
        v = value.strip().lower()
        if v in {"1", "true", "yes", "y", "on"}:
            return True
        if v in {"0", "false", "no", "n", "off"}:
            return False
    raise ConfigError(f"Cannot coerce {value!r} to bool")


def _coerce_int_list(value: object) -> list[int]:
    if isinstance(value, str):
        text = value.strip().strip("[]()")
        return [int(part) for part in text.replace(",", " ").split()]
    if isinstance(value, Iterable):
        return [int(v) for v in value]
    return [int(value)]  # type: ignore[call-overload]


def _coerce_loss(value: object) -> str:
    return str(value).strip().lower().replace("-", "_")


def _optional(coerce: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def inner(value: Any) -> Any:
        if value is None or (isinstance(value, str) and value.strip().lower() in {"", "none", "null"}):
            return None
        return coerce(value)

    return inner


_SETTING_TYPES: dict[str, Callable[[Any], Any]] = {
    "input": _optional(str),
    "gt": _optional(str),
    "primitive": _optional(str),
    "checkpoint": _optional(str),
    "output_dir": str,
    "shape": str,
    "dim": _optional(int),
    "iterations": int,
    "lr0": float,
    "decay_factor": float,
    "decay_iters": _optional(_coerce_int_list),
    "K": float,
    "alpha": float,
    "weights": lambda v: str(v).strip().lower(),
    "loss": _coerce_loss,
    "batch_size": int,
    "sigma": float,
    "seed": int,
    "deterministic": _coerce_bool,
    "hidden": _coerce_int_list,
    "omega0": float,
    "checkpoint_every": int,
    "chunk_size": int,
    "log_every": int,
    "threads": int,
    "resolution": _optional(int),
    "iso": float,
    "tau": float,
    "n_samples": int,
}


def coerce_settings(raw: Mapping[str, Any]) -> dict[str, Any]:
    """
    Coerce raw setting values (strings, JSON scalars, lists) to their types.

    Parameters
    ----------
    raw:
        Setting names and values, e.g. from a config file.

    Returns
    -------
    dict[str, Any]
        Typed settings.

    Raises
    ------
    ConfigError
        On unknown keys or values that cannot be converted.
    """
    unknown = sorted(set(raw) - set(_SETTING_TYPES))
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")
    out: dict[str, Any] = {}
    for key, value in raw.items():
        try:
            out[key] = _SETTING_TYPES[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid value {value!r} for {key!r}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


def _parse_key_value_text(text: str, path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    data: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        key, sep, value = content.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line.strip()!r}")
        data[key.strip()] = value.strip().strip("'\"")
    return data


def load_config_file(path: Path) -> dict[str, Any]:
    """
    Load settings from a JSON or ``key = value`` configuration file.

    Supported shapes
    ----------------

    1) JSON with an explicit block (the run-manifest shape)::

        {"command": "train", "config": {"iterations": 500, ...}, ...}

    2) Flat JSON::

        {"iterations": 500, "K": 1000}

    3) Flat text::

        # comment
        iterations = 500
        hidden = 256, 256, 256

    Parameters
    ----------
    path:
        Configuration file.

    Returns
    -------
    dict[str, Any]
        Coerced settings found in the file.

    Raises
    ------
    ConfigError
        If the file cannot be read or parsed, or holds unknown keys.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Unable to read config {path}: {exc}") from exc

    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Invalid JSON in config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"JSON config {path} must be an object at the top level")
        if isinstance(data.get("config"), dict):
            data = data["config"]
    else:
        data = _parse_key_value_text(text, path)
    return coerce_settings(data)


# ---------------------------------------------------------------------------
# Resolved configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """
    Fully resolved settings of one ``s2df`` invocation.

    Field names and defaults mirror :data:`lupaxa.s2df.utils.RUN_DEFAULTS`.
    """

    input: str | None
    gt: str | None
    primitive: str | None
    checkpoint: str | None
    output_dir: str
    shape: str
    dim: int | None
    iterations: int
    lr0: float
    decay_factor: float
    decay_iters: list[int] | None
    K: float  # noqa: N815
    alpha: float
    weights: str
    loss: str
    batch_size: int
    sigma: float
    seed: int
    deterministic: bool
    hidden: list[int]
    omega0: float
    checkpoint_every: int
    chunk_size: int
    log_every: int
    threads: int
    resolution: int | None
    iso: float
    tau: float
    n_samples: int

    def __post_init__(self) -> None:
        if self.weights not in WEIGHT_PRESETS:
            raise ConfigError(f"Unknown loss-weight preset {self.weights!r}; choose from {sorted(WEIGHT_PRESETS)}")
        if self.loss not in LOSS_VARIANTS:
            raise ConfigError(f"Unknown loss variant {self.loss!r}; choose from {', '.join(LOSS_VARIANTS)}")
        if self.dim not in (None, 2, 3):
            raise ConfigError(f"dim must be 2 or 3, got {self.dim}")
        if not (self.iso > 0 and self.tau > 0):
            raise ConfigError("iso and tau must be positive")
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.resolution is not None and self.resolution < 2:
            raise ConfigError(f"resolution must be >= 2, got {self.resolution}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")
        self.train_config()

    @classmethod
    def from_settings(cls, settings: Mapping[str, Any]) -> RunConfig:
        """Build from a complete settings mapping (every field present)."""
        return cls(**{f.name: settings[f.name] for f in fields(cls)})

    def to_dict(self) -> dict[str, Any]:
        """JSON-serializable settings, as stored in ``run.json``."""
        return asdict(self)

    def sampler_config(self) -> SamplerConfig:
        """Batch settings."""
        return SamplerConfig(batch_size=self.batch_size, sigma=self.sigma, seed=self.seed)

    def train_config(self) -> TrainConfig:
        """Training settings; missing milestones are rescaled to ``iterations``."""
        return TrainConfig(
            iterations=self.iterations,
            lr0=self.lr0,
            decay_factor=self.decay_factor,
            decay_iters=None if self.decay_iters is None else tuple(self.decay_iters),
            K=self.K,
            alpha=self.alpha,
            weights=self.weights,
            loss=self.loss,
            sampler=self.sampler_config(),
            seed=self.seed,
            deterministic=self.deterministic,
            hidden=tuple(self.hidden),
            omega0=self.omega0,
            checkpoint_every=self.checkpoint_every,
            chunk_size=self.chunk_size,
            log_every=self.log_every,
        )

    def extraction_settings(self) -> ExtractionSettings:
        """Grid, iso level, and scoring settings."""
        return ExtractionSettings(resolution=self.resolution, iso=self.iso, tau=self.tau, n_samples=self.n_samples, seed=self.seed)


def resolve_run_config(config_file: Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """
    Merge defaults, an optional config file, and flag overrides.

    Parameters
    ----------
    config_file:
        Optional JSON or ``key = value`` file.
    overrides:
        Flag values; ``None`` entries mean "not given" and are skipped.

    Returns
    -------
    RunConfig
        The validated configuration.

    Raises
    ------
    ConfigError
        If any layer holds unknown keys or invalid values.
    """
    settings = dict(RUN_DEFAULTS)
    if config_file is not None:
        settings.update(load_config_file(config_file))
    if overrides:
        settings.update(coerce_settings({k: v for k, v in overrides.items() if v is not None}))
    return RunConfig.from_settings(settings)


# ---------------------------------------------------------------------------
# Run manifests
# ---------------------------------------------------------------------------


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_run_manifest(
    output_dir: Path,
    command: str,
    cfg: RunConfig,
    outputs: Iterable[Path],
    threads: int,
    flags: Mapping[str, Any] | None = None,
) -> Path:
    """
    Write ``run.json`` with the resolved config and SHA-256 digests of outputs.

    Parameters
    ----------
    output_dir:
        Directory holding the outputs; digests are keyed by relative path.
    command:
        Subcommand name.
    cfg:
        Resolved configuration.
    outputs:
        Files written by the command.
    threads:
        Effective worker-thread count.
    flags:
        Command-specific flags (e.g. ``recon`` for ``eval``), stored under
        ``"args"`` so the manifest can replay the command.

    Returns
    -------
    Path
        The manifest path.

    Raises
    ------
    OutputError
        If the manifest cannot be written.
    """
    digests = {path.relative_to(output_dir).as_posix(): file_digest(path) for path in sorted(outputs)}
    manifest = {
        "command": command,
        "version": get_version(),
        "threads": threads,
        "config": cfg.to_dict(),
        "args": {key: _jsonable(value) for key, value in (flags or {}).items()},
        "outputs": digests,
    }
    path = output_dir / MANIFEST_NAME
    try:
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"Unable to write manifest {path}: {exc}") from exc
    return path


def load_run_manifest(path: Path) -> dict[str, Any]:
    """
    Read a ``run.json`` manifest.

    Raises
    ------
    ConfigError
        If the file is unreadable or not a manifest.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Unable to read manifest {path}: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("outputs"), dict):
        raise ConfigError(f"{path} is not a run manifest")
    return data


def load_manifest_flags(path: Path, command: str) -> dict[str, Any]:
    """
    Command-specific flags recorded in a ``run.json`` written by ``command``.

    Returns an empty mapping for plain config files and for manifests of
    another command.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return {}
    if not isinstance(data, dict) or data.get("command") != command:
        return {}
    flags = data.get("args")
    if flags is None:
        return {}
    if not isinstance(flags, dict):
        raise ConfigError(f"{path}: 'args' must be an object")
    return dict(flags)


def compare_manifests(first: Mapping[str, Any], second: Mapping[str, Any]) -> list[str]:
    """Output names whose digests differ or that appear in only one manifest."""
    a, b = first.get("outputs", {}), second.get("outputs", {})
    return sorted(name for name in set(a) | set(b) if a.get(name) != b.get(name))


# EOF
