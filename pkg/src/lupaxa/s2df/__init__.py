"""
Lupaxa S²DF surface reconstruction package.

This package exposes both:

* A programmatic API for training scaled-squared distance fields on
  unoriented point clouds, extracting their offset level sets, and scoring
  reconstructions.
* A command-line interface, via :mod:`lupaxa.s2df.cli`.
* Analytic oracles for checking the field identities on simple primitives.

Most users will interact with the CLI entry point (``s2df``), but library
consumers can import :mod:`lupaxa.s2df.trainer`,
:mod:`lupaxa.s2df.extraction`, and :mod:`lupaxa.s2df.metrics` directly, or use
the shortcuts re-exported here.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Configuration (.config)
# ---------------------------------------------------------------------------
from .config import (
    RunConfig,
    resolve_run_config,
)

# ---------------------------------------------------------------------------
# Example configuration and toy clouds (.example)
# ---------------------------------------------------------------------------
from .example import (
    build_example_config,
    generate_example_config,
    generate_toy_cloud,
)

# ---------------------------------------------------------------------------
# Exceptions for callers to catch (.exceptions)
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    DegenerateInputError,
    EmptyExtractionError,
    InputError,
    NonDifferentiablePointError,
    NumericalError,
    OutputError,
    S2DFError,
    VerificationError,
)

# ---------------------------------------------------------------------------
# Extraction (.extraction)
# ---------------------------------------------------------------------------
from .extraction import (
    Polyline2,
    ScalarFieldGrid,
    extract,
    extract_iso_2d,
    extract_iso_3d,
)

# ---------------------------------------------------------------------------
# Geometry containers (.geometry)
# ---------------------------------------------------------------------------
from .geometry import (
    AxisGrid,
    NormTransform,
    PointCloud,
    TriangleMesh,
    normalize_cloud,
)

# ---------------------------------------------------------------------------
# Metrics (.metrics)
# ---------------------------------------------------------------------------
from .metrics import (
    MetricReport,
    chamfer_l1,
    evaluate_reconstruction,
    f_score,
    normal_consistency,
)

# ---------------------------------------------------------------------------
# Network and training (.network, .trainer)
# ---------------------------------------------------------------------------
from .network import (
    Jet2,
    SirenParams,
    forward_jet,
    init_siren,
    load_checkpoint,
    save_checkpoint,
)
from .trainer import (
    TrainConfig,
    TrainHistory,
    train,
)

# ---------------------------------------------------------------------------
# Version information (.version)
# ---------------------------------------------------------------------------
from .version import get_version as version

# ---------------------------------------------------------------------------
# Public re-export list
# ---------------------------------------------------------------------------
__all__ = [
    # Exceptions
    "S2DFError",
    "ConfigError",
    "InputError",
    "DegenerateInputError",
    "OutputError",
    "NumericalError",
    "NonDifferentiablePointError",
    "EmptyExtractionError",
    "VerificationError",
    # Configuration
    "RunConfig",
    "resolve_run_config",
    # Geometry
    "PointCloud",
    "TriangleMesh",
    "AxisGrid",
    "NormTransform",
    "normalize_cloud",
    # Network and training
    "SirenParams",
    "Jet2",
    "init_siren",
    "forward_jet",
    "save_checkpoint",
    "load_checkpoint",
    "TrainConfig",
    "TrainHistory",
    "train",
    # Extraction
    "ScalarFieldGrid",
    "Polyline2",
    "extract",
    "extract_iso_2d",
    "extract_iso_3d",
    # Metrics
    "MetricReport",
    "chamfer_l1",
    "normal_consistency",
    "f_score",
    "evaluate_reconstruction",
    # Example helpers
    "build_example_config",
    "generate_example_config",
    "generate_toy_cloud",
    # Version information
    "version",
]


# EOF
