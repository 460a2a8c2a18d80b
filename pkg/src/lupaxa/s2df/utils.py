"""
Utility functions and shared constants for the S²DF reconstruction library.

This module contains:

* Default S²DF constants and the flat run-configuration defaults.
* A filesystem helper for preparing output directories.
* SHA-256 file digests used by run manifests.
* Runtime (thread / determinism) and logging setup for the CLI.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import logging
import os
from pathlib import Path
from typing import Any

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import torch
from cryptography.hazmat.primitives import hashes

# ---------------------------------------------------------------------------
# Internal exceptions
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    OutputError,
)

# ---------------------------------------------------------------------------
# Shared constants
# ---------------------------------------------------------------------------

#: Scale factor of the S²DF, t(x) = K * g(x)**2.
DEFAULT_K = 1000.0

#: Sharpness of the non-manifold penalty exp(-alpha * |t|).
DEFAULT_ALPHA = 500.0

#: Learning-rate milestones of the 10k-iteration schedule.
DEFAULT_ITERATIONS = 10000
DEFAULT_DECAY_ITERS = (4500, 6000, 7000, 8000, 9000)

#: Normalized shapes fit in [-0.9, 0.9]^D.
NORMALIZED_HALF_EXTENT = 0.9

#: Evaluation grids span [-1.03, 1.03]^D (normalized domain plus 3 sigma).
GRID_HALF_EXTENT = 1.03

DEFAULT_ISO = 5e-3
DEFAULT_TAU = 0.008
DEFAULT_RESOLUTION = {2: 512, 3: 256}

#: Environment variable mirroring ``--threads``.
THREADS_ENV = "S2DF_THREADS"

RUN_DEFAULTS: dict[str, Any] = {
    "input": None,
    "gt": None,
    "primitive": None,
    "checkpoint": None,
    "output_dir": "s2df-out",
    "shape": "shape",
    "dim": None,
    "iterations": DEFAULT_ITERATIONS,
    "lr0": 3e-4,
    "decay_factor": 0.18,
    "decay_iters": None,
    "K": DEFAULT_K,
    "alpha": DEFAULT_ALPHA,
    "weights": "open",
    "loss": "ma",
    "batch_size": 15000,
    "sigma": 0.01,
    "seed": 0,
    "deterministic": True,
    "hidden": [256, 256, 256, 256, 256],
    "omega0": 30.0,
    "checkpoint_every": 1000,
    "chunk_size": 4096,
    "log_every": 100,
    "threads": 0,
    "resolution": None,
    "iso": DEFAULT_ISO,
    "tau": DEFAULT_TAU,
    "n_samples": 100000,
}


# ---------------------------------------------------------------------------
# Filesystem helpers
# ---------------------------------------------------------------------------


def prepare_output_dir(path: Path | None) -> Path | None:
    """
    Ensure that the output directory exists, if requested.

    Parameters
    ----------
    path:
        The requested output directory path, or ``None`` if no directory
        is needed.

    Returns
    -------
    Path | None
        The same path if created/verified successfully, or ``None`` if no
        output directory was requested.

    Raises
    ------
    OutputError
        If the directory cannot be created or accessed.
    """
    if path is None:
        return None
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"Unable to create output directory {path}: {exc}") from exc
    return path


def file_digest(path: Path) -> str:
    """
    Compute the SHA-256 digest of a file.

    Parameters
    ----------
    path:
        File to hash.

    Returns
    -------
    str
        Lower-case hex digest.

    Raises
    ------
    OutputError
        If the file cannot be read.
    """
    digest = hashes.Hash(hashes.SHA256())
    try:
        with path.open("rb") as handle:
            for block in iter(lambda: handle.read(1 << 20), b""):
                digest.update(block)
    except OSError as exc:
        raise OutputError(f"Unable to read {path} for hashing: {exc}") from exc
    return digest.finalize().hex()


# ---------------------------------------------------------------------------
# Runtime and logging setup
# ---------------------------------------------------------------------------


def resolve_threads(threads: int | None) -> int:
    """
    Resolve the worker-thread count from a flag value and ``S2DF_THREADS``.

    Parameters
    ----------
    threads:
        Explicit thread count, ``0`` for automatic, or ``None`` if unset.

    Returns
    -------
    int
        The requested count; ``0`` means "leave torch's default".

    Raises
    ------
    ConfigError
        If the value (or the environment variable) is negative or not an int.
    """
    if threads is None or threads == 0:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 0
        try:
            threads = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from exc
    if threads < 0:
        raise ConfigError(f"threads must be >= 0, got {threads}")
    return threads


def configure_runtime(threads: int | None, deterministic: bool) -> int:
    """
    Apply thread-count and determinism settings to torch.

    Parameters
    ----------
    threads:
        Requested worker threads (see :func:`resolve_threads`).
    deterministic:
        Whether to force deterministic torch kernels.

    Returns
    -------
    int
        The effective intra-op thread count.
    """
    count = resolve_threads(threads)
    if count > 0:
        torch.set_num_threads(count)
    torch.use_deterministic_algorithms(deterministic)
    return torch.get_num_threads()


def configure_logging(verbosity: int = 0) -> None:
    """
    Install a single stderr handler on the ``lupaxa.s2df`` logger.

    Parameters
    ----------
    verbosity:
        ``> 0`` for DEBUG, ``0`` for INFO, ``< 0`` for WARNING.
    """
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    else:
        level = logging.INFO

    root = logging.getLogger("lupaxa.s2df")
    root.setLevel(level)
    if not any(getattr(h, "_s2df_handler", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._s2df_handler = True  # type: ignore[attr-defined]
        root.addHandler(handler)


# EOF
