"""
Scripted ablation studies: loss combinations, the K sweep, and the Eikonal′ swap.

Each case trains a fresh network on the same cloud, extracts the offset level
set, and scores it against ground truth. Cases whose training diverges or
whose extraction is empty are kept as failed rows (metrics shown as ``-``).
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import dataclasses
import logging
from dataclasses import dataclass
from typing import Any

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import torch

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import NumericalError
from .extraction import (
    Polyline2,
    default_grid,
    extract,
)
from .geometry import PointCloud
from .losses import LossWeights
from .metrics import (
    MetricReport,
    NnIndex,
    evaluate_reconstruction,
)
from .network import forward_value
from .trainer import (
    TrainConfig,
    train,
)
from .utils import (
    DEFAULT_ISO,
    DEFAULT_TAU,
)

logger = logging.getLogger(__name__)

#: Loss-term subsets, labelled the way the result tables print them.
LOSS_COMBINATIONS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("D", ("dirichlet",)),
    ("N", ("neumann",)),
    ("D+N", ("dirichlet", "neumann")),
    ("D+MA", ("dirichlet", "ma")),
    ("N+MA", ("neumann", "ma")),
    ("D+N+MA", ("dirichlet", "neumann", "ma")),
    ("D+N+MA+non", ("dirichlet", "neumann", "ma", "nonmanifold")),
)

#: S²DF scales swept by the K study.
K_VALUES = (1.0, 100.0, 500.0, 1000.0, 2000.0)

ABLATION_COLUMNS = ("label", "K", "loss", "extracted", "cd_x1e3", "nc", "fscore", "max_deviation", "surface_mean_abs_f", "final_loss")


@dataclass(frozen=True)
class ExtractionSettings:
    """Grid, iso level, and scoring settings shared by every ablation case."""

    resolution: int | None = None
    iso: float = DEFAULT_ISO
    tau: float = DEFAULT_TAU
    n_samples: int = 100000
    seed: int = 0


@dataclass(frozen=True)
class AblationRow:
    """
    Outcome of one ablation case.

    Attributes
    ----------
    label:
        Case name, e.g. ``"D+MA"`` or ``"K=100"``.
    K, loss, weights:
        Training settings of the case.
    extracted:
        Whether training finished and the level set was non-empty.
    report:
        Metrics against ground truth, ``None`` on failure.
    max_deviation:
        Largest distance from an extracted vertex to the ground-truth samples.
    surface_mean_abs_f:
        Mean ``|f|`` of the trained network on ground-truth points.
    final_loss:
        Total loss of the last iteration (``nan`` when training diverged).
    """

    label: str
    K: float  # noqa: N815
    loss: str
    weights: LossWeights
    extracted: bool
    report: MetricReport | None
    max_deviation: float | None
    surface_mean_abs_f: float | None
    final_loss: float

    def as_row(self) -> dict[str, Any]:
        """CSV row; failed cases print ``-`` in the metric columns."""
        failed = "-"
        report = self.report
        return {
            "label": self.label,
            "K": self.K,
            "loss": self.loss,
            "extracted": int(self.extracted),
            "cd_x1e3": report.cd_l1_x1e3 if report else failed,
            "nc": (report.nc_percent if report.nc_percent is not None else failed) if report else failed,
            "fscore": report.fscore_percent if report else failed,
            "max_deviation": self.max_deviation if self.max_deviation is not None else failed,
            "surface_mean_abs_f": self.surface_mean_abs_f if self.surface_mean_abs_f is not None else failed,
            "final_loss": self.final_loss,
        }


def run_case(cloud: PointCloud, gt: PointCloud, cfg: TrainConfig, label: str, settings: ExtractionSettings | None = None) -> AblationRow:
    """
    Train, extract, and score one configuration.

    Parameters
    ----------
    cloud:
        Training cloud.
    gt:
        Ground-truth surface samples in the same frame as ``cloud``.
    cfg:
        Training settings of this case.
    label:
        Row label.
    settings:
        Extraction and scoring settings.

    Returns
    -------
    AblationRow
        Metrics, or a failed row when training diverged or nothing was
        extracted.
    """
    settings = settings or ExtractionSettings()
    failed = dict(label=label, K=cfg.K, loss=cfg.loss, weights=cfg.loss_weights, report=None, max_deviation=None)
    logger.info("Ablation case %s (K=%g, loss=%s)", label, cfg.K, cfg.loss)
    try:
        params, history = train(cloud, cfg)
    except NumericalError as exc:
        logger.warning("Case %s diverged: %s", label, exc)
        return AblationRow(extracted=False, surface_mean_abs_f=None, final_loss=float("nan"), **failed)

    if history.transform is not None:
        gt = history.transform.apply_cloud(gt)
    with torch.no_grad():
        mean_abs_f = float(torch.abs(forward_value(params, gt.points)).mean())
    final_loss = history.records[-1].loss.total

    _, shape = extract(params, default_grid(cloud.dim, settings.resolution), cfg.K, settings.iso)
    if shape.is_empty:
        return AblationRow(extracted=False, surface_mean_abs_f=mean_abs_f, final_loss=final_loss, **failed)

    vertices = shape.vertices() if isinstance(shape, Polyline2) else shape.vertices
    _, dev = NnIndex(gt.points).nearest(vertices)
    report = evaluate_reconstruction(shape, gt, settings.n_samples, settings.seed, settings.tau)
    return AblationRow(
        label=label,
        K=cfg.K,
        loss=cfg.loss,
        weights=cfg.loss_weights,
        extracted=True,
        report=report,
        max_deviation=float(np.max(dev)),
        surface_mean_abs_f=mean_abs_f,
        final_loss=final_loss,
    )


def run_loss_study(cloud: PointCloud, gt: PointCloud, cfg: TrainConfig, settings: ExtractionSettings | None = None) -> list[AblationRow]:
    """One case per entry of :data:`LOSS_COMBINATIONS`, zeroing the unused weights."""
    base = cfg.weights if isinstance(cfg.weights, str) else "open"
    return [run_case(cloud, gt, dataclasses.replace(cfg, weights=LossWeights.only(*terms, base=base)), label, settings) for label, terms in LOSS_COMBINATIONS]


def run_k_study(cloud: PointCloud, gt: PointCloud, cfg: TrainConfig, settings: ExtractionSettings | None = None, k_values: tuple[float, ...] = K_VALUES) -> list[AblationRow]:
    """One case per value of ``K``, all other settings unchanged."""
    return [run_case(cloud, gt, dataclasses.replace(cfg, K=k), f"K={k:g}", settings) for k in k_values]


def run_eikonal_study(cloud: PointCloud, gt: PointCloud, cfg: TrainConfig, settings: ExtractionSettings | None = None) -> list[AblationRow]:
    """Monge-Ampère regularizer versus the first-order Eikonal′ residual, same weights."""
    return [run_case(cloud, gt, dataclasses.replace(cfg, loss=variant), variant, settings) for variant in ("ma", "eikonal_prime")]


#: Study name to (runner, output file name).
STUDIES = {
    "losses": (run_loss_study, "ablation_losses.csv"),
    "k": (run_k_study, "ablation_k.csv"),
    "eikonal": (run_eikonal_study, "ablation_eikonal.csv"),
}


# EOF
