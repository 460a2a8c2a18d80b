"""
Training loss terms for learning an S²DF from an unoriented point cloud.

The total loss is a weighted sum of:

* the Monge-Ampère residual ``|det(H - 2K I)|`` over surface and off-surface
  samples (or, for the ablation, the first-order residual
  ``| |grad|^2 - 4K t |``);
* the Dirichlet term ``|t|`` on surface samples;
* the Neumann term ``|grad t|`` on surface samples;
* the non-manifold term ``exp(-alpha |t|)`` on off-surface samples.

Integrals are realized as Monte-Carlo means over the sampled batches. All term
functions are differentiable torch expressions over batched jets.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import math
from collections.abc import Sequence
from dataclasses import dataclass, fields
from typing import TYPE_CHECKING

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import torch

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    NumericalError,
)

if TYPE_CHECKING:
    from .network import Jet2

#: Loss term names, in reporting order.
TERMS = ("ma", "dirichlet", "neumann", "nonmanifold")

#: Regularizer variants accepted by the ``loss`` setting.
LOSS_VARIANTS = ("ma", "eikonal_prime")


@dataclass(frozen=True)
class LossWeights:
    """
    Non-negative weights of the four loss terms.

    At least one weight must be positive.
    """

    dirichlet: float
    neumann: float
    ma: float
    nonmanifold: float

    def __post_init__(self) -> None:
        values = [getattr(self, f.name) for f in fields(self)]
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ConfigError(f"Loss weights must be finite and non-negative: {self}")
        if not any(v > 0 for v in values):
            raise ConfigError("At least one loss weight must be positive")

    def of(self, term: str) -> float:
        """Weight of a term by name."""
        return float(getattr(self, term))

    @classmethod
    def preset(cls, name: str) -> LossWeights:
        """
        Look up a named preset (``"open"`` or ``"watertight"``).

        Raises
        ------
        ConfigError
            If the preset name is unknown.
        """
        try:
            return WEIGHT_PRESETS[name]
        except KeyError as exc:
            raise ConfigError(f"Unknown loss-weight preset {name!r}; choose from {sorted(WEIGHT_PRESETS)}") from exc

    @classmethod
    def only(cls, *terms: str, base: str = "open") -> LossWeights:
        """
        Keep the preset weights of ``terms`` and zero the rest.

        Used to build the loss-combination ablations.
        """
        unknown = set(terms) - set(TERMS)
        if unknown:
            raise ConfigError(f"Unknown loss terms {sorted(unknown)}")
        source = cls.preset(base)
        return cls(**{name: (source.of(name) if name in terms else 0.0) for name in TERMS})

    def scaled(self, factor: float) -> LossWeights:
        """Multiply every weight by ``factor``."""
        return LossWeights(**{name: self.of(name) * factor for name in TERMS})


#: (dirichlet, neumann, ma, nonmanifold) presets for open and watertight shapes.
WEIGHT_PRESETS: dict[str, LossWeights] = {
    "open": LossWeights(dirichlet=1e8, neumann=8e6, ma=8.5e-3, nonmanifold=1e6),
    "watertight": LossWeights(dirichlet=1e8, neumann=8e6, ma=6e-3, nonmanifold=1e6),
}


@dataclass(frozen=True)
class LossBreakdown:
    """
    Per-term batch means (before weighting) and their weighted total.

    The ``ma`` slot holds whichever regularizer was trained with.
    """

    ma: float
    dirichlet: float
    neumann: float
    nonmanifold: float
    total: float

    @classmethod
    def from_terms(cls, terms: dict[str, float], weights: LossWeights) -> LossBreakdown:
        """Assemble a breakdown, computing ``total = sum(weight * term)``."""
        total = math.fsum(weights.of(name) * terms[name] for name in TERMS)
        return cls(total=total, **{name: terms[name] for name in TERMS})

    def as_dict(self) -> dict[str, float]:
        """Terms and total as a plain dict."""
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ---------------------------------------------------------------------------
# Per-point terms
# ---------------------------------------------------------------------------


def _det(m: torch.Tensor) -> torch.Tensor:
    """Closed-form determinant of batched 2x2 or 3x3 matrices."""
    if m.shape[-1] == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if m.shape[-1] == 3:
        return (
            m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
            - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
            + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
        )
    raise ConfigError(f"Only 2D and 3D Hessians are supported, got {m.shape[-1]}D")


def ma_residual(jet: Jet2, K: float) -> torch.Tensor:  # noqa: N803
    """
    Monge-Ampère residual ``|det(H - 2K I)|`` per point.

    Parameters
    ----------
    jet:
        Batched jets.
    K:
        S²DF scale (``> 0``).

    Returns
    -------
    torch.Tensor
        ``(B,)`` residuals.
    """
    eye = torch.eye(jet.dim, dtype=jet.hess.dtype)
    return torch.abs(_det(jet.hess - 2.0 * K * eye))


def dirichlet_term(value: torch.Tensor) -> torch.Tensor:
    """Dirichlet boundary term ``|t|``."""
    return torch.abs(value)


def neumann_term(grad: torch.Tensor) -> torch.Tensor:
    """Neumann boundary term ``|grad t|`` (Euclidean norm over the last axis)."""
    return torch.linalg.vector_norm(grad, dim=-1)


def nonmanifold_term(value: torch.Tensor, alpha: float) -> torch.Tensor:
    """Off-surface penalty ``exp(-alpha |t|)``."""
    return torch.exp(-alpha * torch.abs(value))


def eikonal_prime_residual(jet: Jet2, K: float) -> torch.Tensor:  # noqa: N803
    """
    First-order residual ``| |grad t|^2 - 4K t |`` used in the ablation.

    The constant field ``t = 0`` solves it exactly, which is why it cannot
    replace the Monge-Ampère term on its own.
    """
    return torch.abs((jet.grad * jet.grad).sum(dim=-1) - 4.0 * K * jet.value)


def regularizer(jet: Jet2, K: float, variant: str) -> torch.Tensor:  # noqa: N803
    """Per-point regularizer for a loss variant (``"ma"`` or ``"eikonal_prime"``)."""
    if variant == "ma":
        return ma_residual(jet, K)
    if variant == "eikonal_prime":
        return eikonal_prime_residual(jet, K)
    raise ConfigError(f"Unknown loss variant {variant!r}; choose from {LOSS_VARIANTS}")


# ---------------------------------------------------------------------------
# Batch assembly
# ---------------------------------------------------------------------------


def chunk_term_sums(jets: Jet2, on_surface: bool, K: float, alpha: float, variant: str = "ma") -> dict[str, torch.Tensor]:  # noqa: N803
    """
    Sum each applicable term over a chunk of jets.

    Surface chunks contribute to the regularizer, Dirichlet, and Neumann sums;
    off-surface chunks to the regularizer and non-manifold sums.
    """
    sums = {"ma": regularizer(jets, K, variant).sum()}
    if on_surface:
        sums["dirichlet"] = dirichlet_term(jets.value).sum()
        sums["neumann"] = neumann_term(jets.grad).sum()
    else:
        sums["nonmanifold"] = nonmanifold_term(jets.value, alpha).sum()
    return sums


def total_loss(
    jets_p: Jet2 | Sequence[Jet2],
    jets_q: Jet2 | Sequence[Jet2] | None,
    weights: LossWeights,
    K: float,  # noqa: N803
    alpha: float,
    variant: str = "ma",
) -> LossBreakdown:
    """
    Weighted training loss over surface jets ``P`` and off-surface jets ``Q``.

    The regularizer is averaged over ``P ∪ Q``, Dirichlet and Neumann over
    ``P``, and the non-manifold term over ``Q``.

    Parameters
    ----------
    jets_p:
        Surface jets (non-empty).
    jets_q:
        Off-surface jets; required non-empty when the non-manifold weight is
        positive.
    weights:
        Term weights.
    K, alpha:
        S²DF scale and non-manifold sharpness.
    variant:
        ``"ma"`` or ``"eikonal_prime"``.

    Returns
    -------
    LossBreakdown
        Term means and the weighted total.

    Raises
    ------
    NumericalError
        If any term is non-finite.
    """
    from .network import Jet2 as _Jet2

    p = jets_p if isinstance(jets_p, _Jet2) else _Jet2.concat(list(jets_p))
    q = None if jets_q is None else (jets_q if isinstance(jets_q, _Jet2) else _Jet2.concat(list(jets_q)))
    n_p, n_q = len(p), (0 if q is None else len(q))
    if n_p == 0:
        raise ConfigError("Surface jets must be non-empty")
    if weights.nonmanifold > 0 and n_q == 0:
        raise ConfigError("Off-surface jets must be non-empty when the non-manifold weight is positive")

    sums = chunk_term_sums(p, True, K, alpha, variant)
    if q is not None and n_q:
        off = chunk_term_sums(q, False, K, alpha, variant)
        sums["ma"] = sums["ma"] + off["ma"]
        sums["nonmanifold"] = off["nonmanifold"]
    counts = {"ma": n_p + n_q, "dirichlet": n_p, "neumann": n_p, "nonmanifold": n_q}

    means: dict[str, float] = {}
    for name in TERMS:
        value = float(sums[name].detach()) / counts[name] if name in sums and counts[name] else 0.0
        if not math.isfinite(value):
            raise NumericalError(f"Loss term {name!r} is not finite", term=name)
        means[name] = value
    return LossBreakdown.from_terms(means, weights)


# EOF
