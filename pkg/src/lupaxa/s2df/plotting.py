"""
Figures for 2D runs: the learned unsigned distance and the training curves.

matplotlib is an optional dependency (the ``plot`` extra); it is imported on
first use with the non-interactive Agg backend.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import logging
from pathlib import Path
from typing import Any

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    OutputError,
)
from .extraction import (
    Polyline2,
    ScalarFieldGrid,
)
from .geometry import PointCloud
from .losses import TERMS
from .trainer import TrainHistory

logger = logging.getLogger(__name__)

PLOT_STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 200,
    "savefig.bbox": "tight",
}


def _pyplot() -> Any:
    try:
        import matplotlib
    except ImportError as exc:
        raise ConfigError("Plotting needs matplotlib; install the 'plot' extra (pip install lupaxa-s2df[plot])") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update(PLOT_STYLE)
    return plt


def _save(plt: Any, fig: Any, path: Path) -> None:
    try:
        fig.savefig(path)
    except OSError as exc:
        raise OutputError(f"Unable to write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)
    logger.info("Wrote %s", path)


def plot_field_2d(
    field: ScalarFieldGrid,
    path: Path,
    contours: Polyline2 | None = None,
    cloud: PointCloud | None = None,
    title: str | None = None,
) -> None:
    """
    Heat-map of a 2D unsigned-distance grid, with contours and input points.

    Parameters
    ----------
    field:
        2D grid values.
    path:
        Output image (format from the suffix, e.g. ``.png``).
    contours:
        Optional extracted iso-contours, drawn as lines.
    cloud:
        Optional input points, drawn as dots.
    title:
        Optional figure title.
    """
    if field.grid.dim != 2:
        raise ConfigError("plot_field_2d needs a 2D field")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 4.5))
    (x0, y0), (x1, y1) = field.grid.lower, field.grid.upper
    # Array axis 0 is x: transpose so x runs horizontally.
    image = ax.imshow(field.as_array().T, origin="lower", extent=(x0, x1, y0, y1), cmap="viridis")
    fig.colorbar(image, ax=ax, label="unsigned distance")
    if contours is not None:
        for component in contours.components:
            ax.plot(component[:, 0], component[:, 1], color="white", linewidth=0.8)
    if cloud is not None and len(cloud):
        ax.scatter(cloud.points[:, 0], cloud.points[:, 1], s=1.0, color="red", alpha=0.6)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    _save(plt, fig, path)


def plot_loss_history(history: TrainHistory, path: Path) -> None:
    """Log-scale curves of every loss term and the weighted total."""
    if not len(history):
        raise ConfigError("Training history is empty; nothing to plot")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    iters = np.array([r.iteration for r in history.records])
    for name in (*TERMS, "total"):
        values = np.array([getattr(r.loss, name) for r in history.records])
        if np.any(values > 0):
            ax.semilogy(iters, np.where(values > 0, values, np.nan), label=name, linewidth=0.9)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.legend()
    _save(plt, fig, path)


# EOF
