"""
Tests for the learning-rate schedule, the Adam update, and the training loop.

This module verifies that:

* :func:`lupaxa.s2df.trainer.lr_at` applies the step decay at its milestones,
  and default milestones rescale with the run length.
* :func:`lupaxa.s2df.trainer.adam_step` matches :class:`torch.optim.Adam`.
* :func:`lupaxa.s2df.trainer.train` reduces the loss, is reproducible, writes
  checkpoints, and saves the last good parameters on numerical failure.
* Clouds reaching past the 0.9 half extent are normalized before training.
* A slow smoke run with the default network cuts the loss tenfold in 500
  iterations.
"""

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import math
from pathlib import Path

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import pytest
import torch

# ---------------------------------------------------------------------------
# Internal training helpers
# ---------------------------------------------------------------------------
from lupaxa.s2df import trainer  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.exceptions import ConfigError, DegenerateInputError, NumericalError  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.geometry import PointCloud, normalize_cloud  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.network import ParamGradient, SirenParams, init_siren, load_checkpoint  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.sampler import SamplerConfig  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.trainer import (  # pyright: ignore[reportMissingImports]
    TrainConfig,
    adam_step,
    init_adam,
    lr_at,
    scaled_decay_iters,
    train,
)


def _circle_cloud(n: int = 200, radius: float = 0.5) -> PointCloud:
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return PointCloud(radius * np.stack([np.cos(theta), np.sin(theta)], axis=1))


def _tiny_config(**overrides: object) -> TrainConfig:
    settings: dict = {
        "iterations": 40,
        "lr0": 1e-3,
        "hidden": (32, 32),
        "sampler": SamplerConfig(batch_size=128, sigma=0.01, seed=0),
        "checkpoint_every": 20,
        "log_every": 0,
    }
    settings.update(overrides)
    return TrainConfig(**settings)


def test_lr_schedule_steps_at_milestones() -> None:
    """The rate drops by the decay factor at (not before) each milestone."""
    cfg = TrainConfig()
    assert cfg.decay_iters == (4500, 6000, 7000, 8000, 9000)
    assert lr_at(cfg, 0) == pytest.approx(3e-4)
    assert lr_at(cfg, 4499) == pytest.approx(3e-4)
    assert lr_at(cfg, 4500) == pytest.approx(3e-4 * 0.18)
    assert lr_at(cfg, 9999) == pytest.approx(3e-4 * 0.18**5)

    with pytest.raises(ConfigError):
        lr_at(cfg, 10000)


def test_default_milestones_rescale_with_run_length() -> None:
    """Short runs get proportionally placed milestones; collapsed ones are dropped."""
    assert TrainConfig(iterations=1000).decay_iters == (450, 600, 700, 800, 900)
    assert scaled_decay_iters(3) == (1, 2)
    assert TrainConfig(iterations=40).for_iterations(400).decay_iters == (180, 240, 280, 320, 360)


def test_train_config_validation() -> None:
    """Unsorted or out-of-range milestones and bad settings are rejected."""
    for kwargs in (
        {"iterations": 0},
        {"decay_iters": (10, 5)},
        {"iterations": 100, "decay_iters": (100,)},
        {"decay_factor": 0.0},
        {"loss": "eikonal"},
        {"weights": "closed"},
        {"hidden": ()},
    ):
        with pytest.raises(ConfigError):
            TrainConfig(**kwargs)


def test_adam_step_matches_torch_optim() -> None:
    """Three functional Adam steps agree with :class:`torch.optim.Adam`."""
    params = init_siren(2, [6], seed=0)
    gen = torch.Generator().manual_seed(1)
    grads = [ParamGradient(*(tuple(torch.randn(t.shape, generator=gen, dtype=torch.float64) for t in group) for group in (params.weights, params.biases))) for _ in range(3)]

    reference = [t.clone().requires_grad_(True) for t in params.tensors()]
    optim = torch.optim.Adam(reference, lr=1e-2, betas=(0.9, 0.999), eps=1e-8)
    state = init_adam(params)
    current = params
    for grad in grads:
        for ref, g in zip(reference, grad.tensors(), strict=True):
            ref.grad = g.clone()
        optim.step()
        current, state = adam_step(current, grad, state, 1e-2)

    assert state.step == 3
    for ours, ref in zip(current.tensors(), reference, strict=True):
        torch.testing.assert_close(ours, ref.detach(), rtol=1e-10, atol=1e-14)


def test_adam_step_rejects_non_finite_gradients() -> None:
    """A NaN gradient raises :class:`NumericalError` and leaves inputs untouched."""
    params = init_siren(2, [4], seed=0)
    tensors = [torch.zeros_like(t) for t in params.tensors()]
    tensors[0][0, 0] = float("nan")
    grad = ParamGradient(tuple(tensors[0::2]), tuple(tensors[1::2]))
    with pytest.raises(NumericalError):
        adam_step(params, grad, init_adam(params), 1e-3)


def test_train_reduces_loss_and_writes_checkpoints(tmp_path: Path) -> None:
    """
    A short 2D run lowers the total loss, records deterministic zero wall
    times, and writes periodic plus final checkpoints.
    """
    params, history = train(_circle_cloud(), _tiny_config(), checkpoint_dir=tmp_path)

    assert len(history) == 40
    totals = history.totals()
    assert np.all(np.isfinite(totals))
    assert totals[-1] < totals[0]
    assert all(r.wall_ms == 0.0 for r in history.records)
    assert history.transform is None

    assert (tmp_path / "ckpt_000020.s2df").is_file()
    assert (tmp_path / "ckpt_000040.s2df").is_file()
    final = load_checkpoint(tmp_path / "model.s2df")
    for a, b in zip(final.tensors(), params.tensors(), strict=True):
        assert torch.equal(a, b)


@pytest.mark.slow
def test_default_training_smoke_run_on_a_circle() -> None:
    """
    With the default network and batch, 500 iterations on a 1000-point circle
    bring the total loss below 10% of its value at iteration 10 (median of 3 seeds).
    """
    ratios = []
    for seed in range(3):
        cfg = TrainConfig(iterations=500, seed=seed, sampler=SamplerConfig(seed=seed), log_every=0, checkpoint_every=0)
        _, history = train(_circle_cloud(n=1000), cfg)
        totals = history.totals()
        ratios.append(totals[-1] / totals[9])
    assert float(np.median(ratios)) < 0.1


def test_train_is_bit_reproducible() -> None:
    """Two deterministic runs with the same seed give identical parameters and history."""
    cfg = _tiny_config(iterations=10)
    p1, h1 = train(_circle_cloud(), cfg)
    p2, h2 = train(_circle_cloud(), cfg)

    assert h1.rows() == h2.rows()
    for a, b in zip(p1.tensors(), p2.tensors(), strict=True):
        assert torch.equal(a, b)


def test_train_normalizes_out_of_range_clouds() -> None:
    """Clouds outside ``[-1, 1]^D`` are normalized and the transform is recorded."""
    _, history = train(_circle_cloud(radius=5.0), _tiny_config(iterations=2))
    assert history.transform is not None
    assert history.transform.scale == pytest.approx(5.0 / 0.9)


def test_train_normalizes_clouds_beyond_the_half_extent() -> None:
    """
    A cloud inside ``[-1, 1]^D`` but reaching past 0.9 is normalized like the
    CLI does, while an already-normalized cloud is left alone.
    """
    _, history = train(_circle_cloud(radius=0.95), _tiny_config(iterations=2))
    assert history.transform is not None
    assert history.transform.scale == pytest.approx(0.95 / 0.9)

    normalized, _ = normalize_cloud(_circle_cloud(radius=0.95))
    _, history = train(normalized, _tiny_config(iterations=2))
    assert history.transform is None


def test_train_rejects_empty_clouds() -> None:
    """An empty cloud cannot be trained on."""
    with pytest.raises(DegenerateInputError):
        train(PointCloud(np.zeros((0, 2))), _tiny_config())


def test_train_saves_last_good_on_numerical_failure(tmp_path: Path, monkeypatch) -> None:
    """
    A non-finite loss at iteration 3 raises :class:`NumericalError` carrying
    the iteration-2 parameters, which are also written to ``last_good.s2df``.
    """
    real = trainer.loss_param_gradient
    calls = {"n": 0}

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 4:
            raise NumericalError("Loss term 'ma' is not finite", term="ma")
        return real(*args, **kwargs)

    monkeypatch.setattr(trainer, "loss_param_gradient", flaky)

    with pytest.raises(NumericalError) as exc_info:
        train(_circle_cloud(), _tiny_config(iterations=10), checkpoint_dir=tmp_path)

    assert exc_info.value.term == "ma"
    last_good = exc_info.value.last_good
    assert isinstance(last_good, SirenParams)
    saved = load_checkpoint(tmp_path / "last_good.s2df")
    for a, b in zip(saved.tensors(), last_good.tensors(), strict=True):
        assert torch.equal(a, b)
    assert not (tmp_path / "model.s2df").exists()


# EOF
