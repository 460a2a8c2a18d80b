"""
Per-iteration training batches.

Each iteration draws a surface batch ``P`` uniformly with replacement from the
input cloud and an off-surface batch ``Q`` by Gaussian perturbation of ``P``.
Both streams are seeded from ``(seed, iteration, stream)`` so a batch depends
only on the configuration and the iteration number.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
from dataclasses import dataclass

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import numpy.typing as npt

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    DegenerateInputError,
)
from .geometry import PointCloud

_SURFACE_STREAM = 0
_OFFSURFACE_STREAM = 1


@dataclass(frozen=True)
class SamplerConfig:
    """
    Batch size, off-surface noise scale, and seed.

    Attributes
    ----------
    batch_size:
        Points per batch (``>= 1``).
    sigma:
        Standard deviation of the off-surface perturbation (``>= 0``), in
        normalized units.
    seed:
        Base seed.
    """

    batch_size: int = 15000
    sigma: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.sigma >= 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


def _rng(cfg: SamplerConfig, iteration: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, iteration, stream])


def sample_surface_batch(cloud: PointCloud, cfg: SamplerConfig, iteration: int) -> npt.NDArray[np.float64]:
    """
    Draw ``batch_size`` points from the cloud, uniformly with replacement.

    Raises
    ------
    DegenerateInputError
        If the cloud is empty.
    """
    if len(cloud) == 0:
        raise DegenerateInputError("Cannot sample from an empty point cloud")
    index = _rng(cfg, iteration, _SURFACE_STREAM).integers(0, len(cloud), size=cfg.batch_size)
    return cloud.points[index]


def sample_offsurface_batch(surface_batch: npt.NDArray[np.float64], cfg: SamplerConfig, iteration: int) -> npt.NDArray[np.float64]:
    """
    Perturb a surface batch with ``N(0, sigma^2 I)`` noise.

    With ``sigma == 0`` the result is a copy of the input.
    """
    out = np.array(surface_batch, dtype=np.float64, copy=True)
    if cfg.sigma > 0:
        out += _rng(cfg, iteration, _OFFSURFACE_STREAM).normal(0.0, cfg.sigma, size=out.shape)
    return out


def sample_batches(cloud: PointCloud, cfg: SamplerConfig, iteration: int) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Surface and off-surface batches for one iteration."""
    surface = sample_surface_batch(cloud, cfg, iteration)
    return surface, sample_offsurface_batch(surface, cfg, iteration)


# EOF
