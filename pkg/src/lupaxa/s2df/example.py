"""
Example configuration and toy point clouds for the ``lupaxa.s2df`` package.

This module provides helpers for:

* Emitting a commented ``key = value`` configuration holding every setting
  and its default, as a starting point for users.
* Writing toy point clouds sampled from analytic primitives (circle, arc,
  segment, sphere, plane) for quick 2D and 3D runs.

The text produced by :func:`generate_example_config` is accepted by
:func:`lupaxa.s2df.config.load_config_file`.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
from pathlib import Path
from typing import Any

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    OutputError,
)
from .fileio import write_point_cloud
from .geometry import PointCloud
from .oracles import (
    PRIMITIVE_NAMES,
    parse_primitive,
    sample_primitive_surface,
)
from .utils import RUN_DEFAULTS

_SECTIONS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("Inputs and outputs", ("input", "gt", "primitive", "checkpoint", "output_dir", "shape", "dim")),
    ("Schedule", ("iterations", "lr0", "decay_factor", "decay_iters")),
    ("Loss", ("K", "alpha", "weights", "loss")),
    ("Sampling", ("batch_size", "sigma", "seed")),
    ("Network", ("hidden", "omega0")),
    ("Runtime", ("deterministic", "threads", "chunk_size", "checkpoint_every", "log_every")),
    ("Extraction and metrics", ("resolution", "iso", "tau", "n_samples")),
)

_NOTES = {
    "decay_iters": "none = the 10k-iteration milestones rescaled to 'iterations'",
    "weights": "open | watertight",
    "loss": "ma | eikonal_prime",
    "resolution": "none = 512 in 2D, 256 in 3D",
    "threads": "0 = torch default (or S2DF_THREADS)",
}


def build_example_config() -> dict[str, Any]:
    """
    Construct the example settings.

    Returns
    -------
    dict
        Every run setting with its default, except ``input``, which points to
        a toy cloud as produced by :func:`generate_toy_cloud`.
    """
    settings = dict(RUN_DEFAULTS)
    settings["input"] = "circle.xyz"
    settings["shape"] = "circle"
    settings["dim"] = 2
    return settings


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    return str(value)


def generate_example_config(example_file: Path | None = None) -> None:
    """
    Generate and emit an example ``key = value`` configuration.

    Parameters
    ----------
    example_file:
        If ``None``, the configuration is written to stdout. If a path is
        provided, the text is written to that file instead. Any filesystem
        errors are wrapped in :class:`OutputError`.
    """
    settings = build_example_config()
    lines = ["# s2df example configuration", "# Flags given on the command line override these values.", ""]
    for title, keys in _SECTIONS:
        lines.append(f"# {title}")
        for key in keys:
            note = f"  # {_NOTES[key]}" if key in _NOTES else ""
            lines.append(f"{key} = {_format_value(settings[key])}{note}")
        lines.append("")
    text = "\n".join(lines)

    if example_file is None:
        print(text, end="")
        return

    try:
        example_file.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"Unable to write example config to {example_file}: {exc}") from exc


def generate_toy_cloud(shape: str, n: int, seed: int, path: Path) -> PointCloud:
    """
    Sample a primitive and write the cloud (with normals where defined).

    Parameters
    ----------
    shape:
        Primitive spec, e.g. ``"circle"`` or ``"sphere:radius=0.7"``.
    n:
        Number of points.
    seed:
        Random seed.
    path:
        Output file (``.xyz``, ``.txt``, ``.pts`` or ``.ply``).

    Returns
    -------
    PointCloud
        The written cloud.
    """
    if n < 1:
        raise ConfigError(f"Toy clouds need at least one point, got {n}")
    if shape.partition(":")[0].strip().lower() not in PRIMITIVE_NAMES:
        raise ConfigError(f"Unknown toy shape {shape!r}; choose from {', '.join(PRIMITIVE_NAMES)}")
    cloud = sample_primitive_surface(parse_primitive(shape), n, seed)
    write_point_cloud(cloud, path)
    return cloud


# EOF
