"""
Custom exception types for the Lupaxa S²DF reconstruction library.

These provide a small hierarchy that callers can use to distinguish between
configuration, input, numerical, and extraction failures, or catch the common
base class for all expected errors. Each class carries the process exit code
the command-line interface maps it to.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
from typing import Any


class S2DFError(Exception):
    """
    Base exception for all S²DF library errors.

    This serves as a common ancestor for all custom exceptions in this
    package, allowing callers to catch a single type for all expected
    error conditions.
    """

    exit_code: int = 1


class ConfigError(S2DFError):
    """
    Raised when invalid configuration or mode selection is detected.

    Typical causes include:

    * Unknown keys or uncoercible values in a configuration file.
    * Unsupported loss-weight presets or loss variants.
    * Training schedules that violate their invariants.
    """

    exit_code = 2


class InputError(S2DFError):
    """
    Raised when an input file or an input geometry cannot be used.

    Typical causes include:

    * Unreadable, truncated, or malformed point-cloud, mesh, or checkpoint files.
    * Point clouds without the normals an operation requires.
    """

    exit_code = 2


class DegenerateInputError(InputError):
    """
    Raised when an input geometry has no usable extent.

    For example a point cloud whose points all coincide, or a mesh whose
    faces all have zero area.
    """


class OutputError(S2DFError):
    """
    Raised when writing output files or creating directories fails.
    """

    exit_code = 2


class NumericalError(S2DFError):
    """
    Raised when a loss term or a gradient becomes non-finite.

    Attributes
    ----------
    term:
        Name of the offending loss term (for example ``"ma"``) or
        ``"gradient"``.
    last_good:
        The last parameters known to be finite, when the failure happened
        inside a training loop; ``None`` otherwise.
    """

    exit_code = 3

    def __init__(self, message: str, term: str, last_good: Any = None) -> None:
        super().__init__(message)
        self.term = term
        self.last_good = last_good


class NonDifferentiablePointError(S2DFError):
    """
    Raised when an analytic jet is requested on a primitive's cut locus.
    """

    exit_code = 2


class EmptyExtractionError(S2DFError):
    """
    Raised when iso-surface or iso-contour extraction yields no geometry.
    """

    exit_code = 4


class VerificationError(S2DFError):
    """
    Raised when an identity or jet-consistency suite reports a violation.
    """

    exit_code = 1


# EOF
