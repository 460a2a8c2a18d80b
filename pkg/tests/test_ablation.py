"""
Tests for the ablation studies and the long-running reconstruction checks.

The fast tests check how the studies enumerate their cases and how failed
cases are reported. Tests marked ``slow`` train full-size networks on toy
shapes (minutes to hours on a CPU) and are skipped unless pytest runs with
``-m slow``.
"""

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import dataclasses
import math

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import pytest
import torch

# ---------------------------------------------------------------------------
# Internal ablation helpers
# ---------------------------------------------------------------------------
from lupaxa.s2df import ablation  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.ablation import (  # pyright: ignore[reportMissingImports]
    ABLATION_COLUMNS,
    K_VALUES,
    LOSS_COMBINATIONS,
    ExtractionSettings,
    run_case,
    run_eikonal_study,
    run_k_study,
    run_loss_study,
)
from lupaxa.s2df.exceptions import NumericalError  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.extraction import default_grid, extract  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.losses import LossWeights  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.metrics import evaluate_reconstruction  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.network import forward_value  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.oracles import distance, parse_primitive, sample_primitive_surface  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.sampler import SamplerConfig  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.trainer import TrainConfig, train  # pyright: ignore[reportMissingImports]


def _circle(n: int = 1000, seed: int = 0):
    return sample_primitive_surface(parse_primitive("circle:radius=0.5"), n, seed)


def _tiny_config(**overrides: object) -> TrainConfig:
    settings: dict = {"iterations": 20, "lr0": 1e-3, "hidden": (16, 16), "sampler": SamplerConfig(batch_size=64), "log_every": 0}
    settings.update(overrides)
    return TrainConfig(**settings)


# ---------------------------------------------------------------------------
# Study enumeration
# ---------------------------------------------------------------------------


@pytest.fixture
def recorded_cases(monkeypatch) -> list[tuple[str, TrainConfig]]:
    """Replace :func:`run_case` with a recorder of ``(label, config)`` pairs."""
    calls: list[tuple[str, TrainConfig]] = []

    def record(cloud, gt, cfg, label, settings=None):
        calls.append((label, cfg))
        return label

    monkeypatch.setattr(ablation, "run_case", record)
    return calls


def test_loss_study_zeroes_unused_weights(recorded_cases) -> None:
    """Each combination keeps the preset weights of its terms and zeroes the rest."""
    run_loss_study(_circle(10), _circle(10), _tiny_config())

    assert [label for label, _ in recorded_cases] == [label for label, _ in LOSS_COMBINATIONS]
    weights = {label: cfg.loss_weights for label, cfg in recorded_cases}
    assert weights["D"].neumann == weights["D"].ma == weights["D"].nonmanifold == 0.0
    assert weights["D"].dirichlet == 1e8
    assert weights["N+MA"].ma == 8.5e-3 and weights["N+MA"].dirichlet == 0.0
    assert weights["D+N+MA+non"].nonmanifold == 1e6


def test_k_and_eikonal_studies_vary_one_setting(recorded_cases) -> None:
    """The K sweep changes only ``K``; the Eikonal′ study changes only the regularizer."""
    base = _tiny_config()
    run_k_study(_circle(10), _circle(10), base)
    run_eikonal_study(_circle(10), _circle(10), base)

    k_cases, eik_cases = recorded_cases[: len(K_VALUES)], recorded_cases[len(K_VALUES) :]
    assert [cfg.K for _, cfg in k_cases] == list(K_VALUES)
    assert [label for label, _ in k_cases] == ["K=1", "K=100", "K=500", "K=1000", "K=2000"]
    assert [cfg.loss for _, cfg in eik_cases] == ["ma", "eikonal_prime"]
    for _, cfg in recorded_cases:
        assert cfg.hidden == base.hidden
        assert cfg.loss_weights == base.loss_weights


# ---------------------------------------------------------------------------
# Single cases
# ---------------------------------------------------------------------------


def test_diverged_case_is_reported_as_failed(monkeypatch) -> None:
    """A :class:`NumericalError` during training yields a ``-`` row instead of raising."""

    def diverge(*args, **kwargs):
        raise NumericalError("Loss term 'ma' is not finite", term="ma")

    monkeypatch.setattr(ablation, "train", diverge)
    row = run_case(_circle(10), _circle(10), _tiny_config(), "D+MA")

    assert not row.extracted
    assert math.isnan(row.final_loss)
    out = row.as_row()
    assert tuple(out) == ABLATION_COLUMNS
    assert out["cd_x1e3"] == out["fscore"] == out["max_deviation"] == "-"
    assert out["extracted"] == 0


def test_short_case_produces_a_complete_row() -> None:
    """A tiny real case trains, samples the surface band, and fills every column."""
    row = run_case(_circle(200), _circle(200, seed=1), _tiny_config(), "tiny", ExtractionSettings(resolution=33, n_samples=500))

    assert row.label == "tiny"
    assert math.isfinite(row.final_loss)
    assert row.surface_mean_abs_f is not None and row.surface_mean_abs_f >= 0.0
    assert set(row.as_row()) == set(ABLATION_COLUMNS)
    if row.extracted:
        assert row.report is not None and row.max_deviation is not None


# ---------------------------------------------------------------------------
# Long reconstruction runs
# ---------------------------------------------------------------------------


def _udf_band_error(params, primitive, K: float, seed: int = 0) -> float:
    """Mean |learned - true| unsigned distance on points within 0.1 of the shape."""
    rng = np.random.default_rng(seed)
    candidates = rng.uniform(-1.0, 1.0, size=(200000, 2))
    true = distance(primitive, candidates)
    band = candidates[true < 0.1][:20000]
    with torch.no_grad():
        t = forward_value(params, band).numpy()
    learned = np.sqrt(np.maximum(t, 0.0) / K)
    return float(np.mean(np.abs(learned - true[true < 0.1][:20000])))


def _circle_run(K: float = 1000.0, **overrides: object):
    cfg = TrainConfig(iterations=5000, K=K, log_every=0, **overrides)
    params, _ = train(_circle(), cfg)
    _, contour = extract(params, default_grid(2), K)
    return params, contour


def _radius_error(contour) -> float:
    if contour.is_empty:
        return math.inf
    return float(np.max(np.abs(np.linalg.norm(contour.vertices(), axis=1) - 0.5)))


@pytest.mark.slow
def test_circle_reconstruction_and_band_accuracy() -> None:
    """A 5000-iteration circle run places the contour within 0.015 of radius 0.5."""
    params, contour = _circle_run()
    assert _radius_error(contour) <= 0.015
    assert _udf_band_error(params, parse_primitive("circle:radius=0.5"), 1000.0) < 0.01


@pytest.mark.slow
def test_open_arc_does_not_close() -> None:
    """The learned distance of an open arc stays accurate across the chord."""
    arc = parse_primitive("arc")
    params, _ = train(sample_primitive_surface(arc, 1000, 0), TrainConfig(iterations=5000, log_every=0))
    assert _udf_band_error(params, arc, 1000.0) < 0.02


@pytest.mark.slow
def test_small_k_and_missing_regularizer_fail() -> None:
    """K=1 and loss sets without the Monge-Ampère term miss the radius tolerance."""
    _, contour = _circle_run(K=1.0)
    assert _radius_error(contour) >= 0.15

    for label in ("D", "N", "D+N"):
        terms = dict(LOSS_COMBINATIONS)[label]
        _, contour = _circle_run(weights=LossWeights.only(*terms))
        assert _radius_error(contour) > 0.015, label


@pytest.mark.slow
def test_eikonal_prime_cannot_learn_the_field() -> None:
    """The first-order residual leaves ``|f|`` on the surface at least 10x larger, or fails."""
    surface = _circle(2000, seed=7).points
    cfg = TrainConfig(iterations=5000, log_every=0)
    values = {}
    for variant in ("ma", "eikonal_prime"):
        try:
            params, _ = train(_circle(), dataclasses.replace(cfg, loss=variant))
        except NumericalError:
            values[variant] = math.inf
            continue
        with torch.no_grad():
            values[variant] = float(torch.abs(forward_value(params, surface)).mean())
    assert values["eikonal_prime"] >= 10.0 * values["ma"]


def _sphere_chamfer(iterations: int) -> float:
    """CD(x1e3) of a 20k-point r=0.7 sphere run, extracted at 128^3, against 100k samples."""
    sphere = parse_primitive("sphere:radius=0.7")
    params, _ = train(sample_primitive_surface(sphere, 20000, 0), TrainConfig(iterations=iterations, log_every=0))
    _, mesh = extract(params, default_grid(3, 128), 1000.0)
    report = evaluate_reconstruction(mesh, sample_primitive_surface(sphere, 100000, 1), n_samples=100000, seed=0)
    return report.cd_l1_x1e3


@pytest.mark.slow
def test_sphere_reconstruction_scores() -> None:
    """A reduced 3000-iteration sphere run scores CD(x1e3) <= 12 against 100k samples."""
    assert _sphere_chamfer(3000) <= 12.0


@pytest.mark.slow
def test_sphere_reconstruction_full_schedule() -> None:
    """The full 10k-iteration default schedule scores CD(x1e3) <= 8 on the same sphere."""
    assert _sphere_chamfer(10000) <= 8.0


# EOF
