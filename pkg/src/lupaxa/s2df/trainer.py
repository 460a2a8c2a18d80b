"""
Adam-driven optimization of an S²DF network on one point cloud.

This module is responsible for:

* The :class:`TrainConfig` schedule (step decay at fixed iterations).
* A functional Adam update over :class:`SirenParams`.
* The training loop, with periodic checkpoints and a per-iteration history.

Training is single-threaded at the Python level; torch's intra-op pool does
the per-point work, and chunk gradients are reduced in a fixed order so runs
with the determinism flag are bit-reproducible.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import bisect
import dataclasses
import logging
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import torch

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    DegenerateInputError,
    NumericalError,
)
from .geometry import (
    NormTransform,
    PointCloud,
    normalize_cloud,
)
from .losses import (
    LOSS_VARIANTS,
    LossBreakdown,
    LossWeights,
)
from .network import (
    ParamGradient,
    SirenParams,
    init_siren,
    loss_param_gradient,
    save_checkpoint,
)
from .sampler import (
    SamplerConfig,
    sample_batches,
)
from .utils import (
    DEFAULT_ALPHA,
    DEFAULT_DECAY_ITERS,
    DEFAULT_ITERATIONS,
    DEFAULT_K,
    NORMALIZED_HALF_EXTENT,
)

logger = logging.getLogger(__name__)

FINAL_CHECKPOINT = "model.s2df"
LAST_GOOD_CHECKPOINT = "last_good.s2df"


def scaled_decay_iters(iterations: int, reference: Sequence[int] = DEFAULT_DECAY_ITERS, reference_total: int = DEFAULT_ITERATIONS) -> tuple[int, ...]:
    """
    Rescale decay milestones proportionally to a different run length.

    Milestones that collapse onto each other, onto ``0``, or past the last
    iteration are dropped.

    Examples
    --------
    >>> scaled_decay_iters(10000)
    (4500, 6000, 7000, 8000, 9000)
    >>> scaled_decay_iters(1000)
    (450, 600, 700, 800, 900)
    """
    out: list[int] = []
    for milestone in reference:
        scaled = int(round(milestone * iterations / reference_total))
        if 0 < scaled < iterations and (not out or scaled > out[-1]):
            out.append(scaled)
    return tuple(out)


@dataclass(frozen=True)
class TrainConfig:
    """
    Optimization settings.

    Attributes
    ----------
    iterations:
        Number of Adam steps (``>= 1``).
    lr0:
        Initial learning rate.
    decay_factor:
        Multiplier applied at each milestone, in ``(0, 1]``.
    decay_iters:
        Strictly increasing milestones, each ``< iterations``. ``None`` rescales
        the default 10k-iteration milestones to ``iterations``.
    K, alpha:
        S²DF scale and non-manifold sharpness.
    weights:
        Preset name (``"open"``/``"watertight"``) or explicit weights.
    loss:
        Regularizer variant, ``"ma"`` or ``"eikonal_prime"``.
    sampler:
        Batch settings.
    seed:
        Seed for network initialization.
    deterministic:
        Whether bit-reproducibility is required (also zeroes wall times in
        the history).
    hidden, omega0:
        Network architecture.
    checkpoint_every:
        Iterations between checkpoints (``0`` disables periodic ones).
    chunk_size:
        Points per jet evaluation.
    log_every:
        Iterations between INFO progress lines (``0`` disables them).
    """

    iterations: int = DEFAULT_ITERATIONS
    lr0: float = 3e-4
    decay_factor: float = 0.18
    decay_iters: tuple[int, ...] | None = None
    K: float = DEFAULT_K  # noqa: N815
    alpha: float = DEFAULT_ALPHA
    weights: str | LossWeights = "open"
    loss: str = "ma"
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    seed: int = 0
    deterministic: bool = True
    hidden: tuple[int, ...] = (256, 256, 256, 256, 256)
    omega0: float = 30.0
    checkpoint_every: int = 1000
    chunk_size: int = 4096
    log_every: int = 100

    def __post_init__(self) -> None:
        if self.decay_iters is None:
            object.__setattr__(self, "decay_iters", scaled_decay_iters(self.iterations))
        object.__setattr__(self, "decay_iters", tuple(int(i) for i in self.decay_iters))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if not self.lr0 > 0:
            raise ConfigError(f"lr0 must be > 0, got {self.lr0}")
        if not 0 < self.decay_factor <= 1:
            raise ConfigError(f"decay_factor must be in (0, 1], got {self.decay_factor}")
        iters: tuple[int, ...] = self.decay_iters  # type: ignore[assignment]
        if any(b <= a for a, b in zip(iters, iters[1:], strict=False)):
            raise ConfigError(f"decay_iters must be strictly increasing, got {list(iters)}")
        if iters and (iters[0] < 0 or iters[-1] >= self.iterations):
            raise ConfigError(f"decay_iters must lie in [0, iterations), got {list(iters)} for {self.iterations} iterations")
        if not (self.K > 0 and self.alpha > 0):
            raise ConfigError("K and alpha must be positive")
        if self.loss not in LOSS_VARIANTS:
            raise ConfigError(f"Unknown loss variant {self.loss!r}; choose from {LOSS_VARIANTS}")
        if not self.hidden or min(self.hidden) < 1:
            raise ConfigError(f"hidden widths must be positive, got {list(self.hidden)}")
        if self.chunk_size < 1 or self.checkpoint_every < 0 or self.log_every < 0:
            raise ConfigError("chunk_size must be >= 1; checkpoint_every and log_every must be >= 0")
        self.loss_weights  # noqa: B018

    @property
    def loss_weights(self) -> LossWeights:
        """Resolved loss weights."""
        return self.weights if isinstance(self.weights, LossWeights) else LossWeights.preset(self.weights)

    def for_iterations(self, iterations: int) -> TrainConfig:
        """Copy with a different run length and proportionally rescaled milestones."""
        return dataclasses.replace(self, iterations=iterations, decay_iters=scaled_decay_iters(iterations, self.decay_iters or (), self.iterations))


def lr_at(cfg: TrainConfig, iteration: int) -> float:
    """
    Learning rate at an iteration: ``lr0 * decay_factor ** (#milestones <= iteration)``.

    Raises
    ------
    ConfigError
        If ``iteration`` is outside ``[0, iterations)``.
    """
    if not 0 <= iteration < cfg.iterations:
        raise ConfigError(f"iteration {iteration} outside [0, {cfg.iterations})")
    return cfg.lr0 * cfg.decay_factor ** bisect.bisect_right(cfg.decay_iters or (), iteration)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdamState:
    """First/second-moment accumulators congruent with the parameter list."""

    m: tuple[torch.Tensor, ...]
    v: tuple[torch.Tensor, ...]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params: SirenParams, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """Zero moments for ``params``."""
    zeros = tuple(torch.zeros_like(t) for t in params.tensors())
    return AdamState(zeros, tuple(torch.zeros_like(t) for t in zeros), 0, beta1, beta2, eps)


def adam_step(params: SirenParams, grad: ParamGradient, state: AdamState, lr: float) -> tuple[SirenParams, AdamState]:
    """
    One bias-corrected Adam update.

    Parameters
    ----------
    params:
        Current parameters.
    grad:
        Loss gradient, congruent with ``params``.
    state:
        Moments and step counter.
    lr:
        Step size.

    Returns
    -------
    (SirenParams, AdamState)
        Updated parameters and state; inputs are left untouched.

    Raises
    ------
    NumericalError
        If the gradient has a non-finite entry.
    """
    if not grad.is_finite():
        raise NumericalError("Parameter gradient is not finite", term="gradient")
    step = state.step + 1
    bc1 = 1.0 - state.beta1**step
    bc2 = 1.0 - state.beta2**step

    new_m, new_v, new_theta = [], [], []
    for theta, g, m, v in zip(params.tensors(), grad.tensors(), state.m, state.v, strict=True):
        if g.shape != theta.shape:
            raise ConfigError(f"Gradient shape {tuple(g.shape)} does not match parameter shape {tuple(theta.shape)}")
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        new_theta.append(theta - lr * (m / bc1) / (torch.sqrt(v / bc2) + state.eps))
        new_m.append(m)
        new_v.append(v)

    state = dataclasses.replace(state, m=tuple(new_m), v=tuple(new_v), step=step)
    return params.with_tensors(new_theta), state


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HistoryRecord:
    """Loss breakdown of one completed iteration."""

    iteration: int
    lr: float
    loss: LossBreakdown
    wall_ms: float

    def as_row(self) -> dict[str, Any]:
        """Row for the history CSV."""
        return {"iter": self.iteration, "lr": self.lr, **self.loss.as_dict(), "wall_ms": self.wall_ms}


@dataclass
class TrainHistory:
    """Per-iteration records and the normalization applied to the input, if any."""

    records: list[HistoryRecord] = field(default_factory=list)
    transform: NormTransform | None = None

    def __len__(self) -> int:
        return len(self.records)

    def totals(self) -> np.ndarray:
        """Weighted total loss per iteration."""
        return np.array([r.loss.total for r in self.records], dtype=np.float64)

    def rows(self) -> list[dict[str, Any]]:
        """All records as CSV rows."""
        return [r.as_row() for r in self.records]


def _needs_normalization(cloud: PointCloud) -> bool:
    # Already-normalized clouds may overshoot the half extent by rounding.
    limit = NORMALIZED_HALF_EXTENT * (1.0 + 1e-9)
    return bool(np.any(np.abs(cloud.points) > limit))


def train(
    cloud: PointCloud,
    cfg: TrainConfig,
    checkpoint_dir: Path | None = None,
    init: SirenParams | None = None,
) -> tuple[SirenParams, TrainHistory]:
    """
    Fit an S²DF network to an unoriented point cloud.

    Every iteration samples a surface and an off-surface batch, evaluates the
    loss and its parameter gradient, and applies one Adam step with the
    scheduled learning rate.

    Parameters
    ----------
    cloud:
        Input cloud. Clouds reaching outside ``[-0.9, 0.9]^D`` are normalized
        first and the transform is recorded in the returned history.
    cfg:
        Training settings.
    checkpoint_dir:
        Where to write ``ckpt_XXXXXX.s2df`` every ``checkpoint_every``
        iterations, the final ``model.s2df``, and ``last_good.s2df`` on
        numerical failure. ``None`` writes nothing.
    init:
        Optional starting parameters (default: fresh SIREN initialization).

    Returns
    -------
    (SirenParams, TrainHistory)
        Final parameters and the loss history.

    Raises
    ------
    DegenerateInputError
        If the cloud is empty or has zero extent.
    NumericalError
        If a loss term or gradient becomes non-finite; ``last_good`` holds
        the parameters of the previous iteration.
    """
    if len(cloud) == 0:
        raise DegenerateInputError("Cannot train on an empty point cloud")
    history = TrainHistory()
    if _needs_normalization(cloud):
        cloud, history.transform = normalize_cloud(cloud)
        logger.info("Normalized input cloud (scale %.6g)", history.transform.scale)

    params = init if init is not None else init_siren(cloud.dim, cfg.hidden, cfg.omega0, cfg.seed)
    if params.input_dim != cloud.dim:
        raise ConfigError(f"Network expects {params.input_dim}D points but the cloud is {cloud.dim}D")
    state = init_adam(params)
    weights = cfg.loss_weights
    logger.info(
        "Training %dD S2DF on %d points: %d iterations, %d parameters, loss=%s",
        cloud.dim,
        len(cloud),
        cfg.iterations,
        params.num_parameters(),
        cfg.loss,
    )

    for iteration in range(cfg.iterations):
        started = time.perf_counter()
        lr = lr_at(cfg, iteration)
        surface, offsurface = sample_batches(cloud, cfg.sampler, iteration)
        try:
            breakdown, grad = loss_param_gradient(params, surface, offsurface, weights, cfg.K, cfg.alpha, cfg.loss, cfg.chunk_size)
            new_params, state = adam_step(params, grad, state, lr)
        except NumericalError as exc:
            logger.error("Numerical failure at iteration %d (%s): %s", iteration, exc.term, exc)
            if checkpoint_dir is not None:
                save_checkpoint(params, checkpoint_dir / LAST_GOOD_CHECKPOINT)
            raise NumericalError(f"Iteration {iteration}: {exc}", term=exc.term, last_good=params) from exc
        params = new_params

        wall_ms = 0.0 if cfg.deterministic else (time.perf_counter() - started) * 1e3
        history.records.append(HistoryRecord(iteration, lr, breakdown, wall_ms))

        done = iteration + 1
        if cfg.log_every and (done % cfg.log_every == 0 or done == cfg.iterations):
            logger.info("iter %6d  lr %.3e  total %.6e  ma %.3e  dirichlet %.3e", done, lr, breakdown.total, breakdown.ma, breakdown.dirichlet)
        if checkpoint_dir is not None and cfg.checkpoint_every and done % cfg.checkpoint_every == 0:
            save_checkpoint(params, checkpoint_dir / f"ckpt_{done:06d}.s2df")

    if not math.isfinite(history.records[-1].loss.total):
        raise NumericalError("Final loss is not finite", term="total", last_good=params)
    if checkpoint_dir is not None:
        save_checkpoint(params, checkpoint_dir / FINAL_CHECKPOINT)
    return params, history


# EOF
