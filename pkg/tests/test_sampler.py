"""
Tests for the per-iteration batch sampler.

Batches must depend only on ``(seed, iteration)``, draw uniformly from the input cloud,
and perturb it by the configured noise scale.
"""

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import pytest

# ---------------------------------------------------------------------------
# Internal sampler helpers
# ---------------------------------------------------------------------------
from lupaxa.s2df.exceptions import ConfigError, DegenerateInputError  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.geometry import PointCloud  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.sampler import (  # pyright: ignore[reportMissingImports]
    SamplerConfig,
    sample_batches,
    sample_offsurface_batch,
    sample_surface_batch,
)


@pytest.fixture
def cloud() -> PointCloud:
    """Thirty random points in the unit square."""
    return PointCloud(np.random.default_rng(0).uniform(-1.0, 1.0, size=(30, 2)))


def test_batches_are_reproducible_per_iteration(cloud: PointCloud) -> None:
    """Same seed and iteration give identical batches; other iterations differ."""
    cfg = SamplerConfig(batch_size=64, sigma=0.01, seed=4)
    p1, q1 = sample_batches(cloud, cfg, 10)
    p2, q2 = sample_batches(cloud, cfg, 10)
    p3, _ = sample_batches(cloud, cfg, 11)

    np.testing.assert_array_equal(p1, p2)
    np.testing.assert_array_equal(q1, q2)
    assert not np.array_equal(p1, p3)


def test_surface_batch_draws_from_cloud(cloud: PointCloud) -> None:
    """Every surface sample is a row of the input cloud."""
    batch = sample_surface_batch(cloud, SamplerConfig(batch_size=200), 0)
    assert batch.shape == (200, 2)
    rows = {tuple(p) for p in cloud.points}
    assert all(tuple(p) in rows for p in batch)


def test_surface_batch_is_uniform_over_points() -> None:
    """Every point of a ten-point cloud is drawn about equally often."""
    cloud = PointCloud(np.stack([np.arange(10.0), np.zeros(10)], axis=1))
    batch = sample_surface_batch(cloud, SamplerConfig(batch_size=100000, seed=2), 0)

    counts = np.bincount(batch[:, 0].astype(np.int64), minlength=10)
    assert counts.sum() == 100000
    np.testing.assert_allclose(counts / 100000, 0.1, atol=0.005)


def test_offsurface_noise_scale(cloud: PointCloud) -> None:
    """Perturbations have roughly the configured standard deviation; zero sigma copies."""
    cfg = SamplerConfig(batch_size=20000, sigma=0.05, seed=1)
    surface = sample_surface_batch(cloud, cfg, 3)
    offsurface = sample_offsurface_batch(surface, cfg, 3)
    assert np.std(offsurface - surface) == pytest.approx(0.05, rel=0.05)

    still = sample_offsurface_batch(surface, SamplerConfig(batch_size=20000, sigma=0.0), 3)
    np.testing.assert_array_equal(still, surface)
    assert still is not surface


def test_sampler_validation(cloud: PointCloud) -> None:
    """Invalid settings and empty clouds are rejected."""
    with pytest.raises(ConfigError):
        SamplerConfig(batch_size=0)
    with pytest.raises(ConfigError):
        SamplerConfig(sigma=-1.0)
    with pytest.raises(DegenerateInputError):
        sample_surface_batch(PointCloud(np.zeros((0, 2))), SamplerConfig(), 0)


# EOF
