"""
Version information for the ``lupaxa.s2df`` package.

This module provides a single source of truth for the runtime version that is
used by the library API, the run manifests, and the command-line interface.
"""

from __future__ import annotations

#: The package version, kept in sync with ``pyproject.toml``.
__version__ = "0.1.0"


def get_version() -> str:
    """
    Return the current version of the ``lupaxa.s2df`` package.

    Returns
    -------
    str
        The version string, for example ``"0.1.0"``.
    """
    return __version__


# EOF
