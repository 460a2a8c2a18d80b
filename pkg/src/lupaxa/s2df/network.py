"""
Sine-activated MLP with exact second-order input jets.

This module is responsible for:

* The :class:`SirenParams` container and SIREN initialization.
* Plain batched forward passes (:func:`forward_value`).
* Layerwise propagation of (value, gradient, Hessian) jets (:func:`forward_jet`).
* Exact parameter gradients of the training loss, by reverse accumulation
  through the recorded jet computation (:func:`loss_param_gradient`).
* The versioned ``S2DF1`` checkpoint format.

All arithmetic is double precision: the Monge-Ampère residual is of order
``(2K)^D`` at initialization and single precision loses it.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import logging
import math
import struct
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import numpy.typing as npt
import torch

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    InputError,
    NumericalError,
    OutputError,
)
from .losses import (
    LossBreakdown,
    LossWeights,
    chunk_term_sums,
)

logger = logging.getLogger(__name__)

DTYPE = torch.float64

#: Checkpoint magic string (format version 1).
CHECKPOINT_MAGIC = b"S2DF1"


@dataclass(frozen=True)
class SirenParams:
    """
    Weights and biases of a sine MLP ``D -> hidden... -> 1``.

    Attributes
    ----------
    weights:
        Per-layer ``(out, in)`` weight matrices.
    biases:
        Per-layer ``(out,)`` bias vectors.
    omega0:
        Frequency multiplying every sine layer's pre-activation.
    """

    weights: tuple[torch.Tensor, ...]
    biases: tuple[torch.Tensor, ...]
    omega0: float = 30.0

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases) or len(self.weights) < 2:
            raise ConfigError("A sine MLP needs matching weights/biases and at least one hidden layer")
        for i, (w, b) in enumerate(zip(self.weights, self.biases, strict=True)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ConfigError(f"Layer {i}: weight {tuple(w.shape)} and bias {tuple(b.shape)} are inconsistent")
            if i and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ConfigError(f"Layer {i} input width {w.shape[1]} does not chain with previous output {self.weights[i - 1].shape[0]}")
        if self.weights[-1].shape[0] != 1:
            raise ConfigError("The final layer must have a single output")
        if not self.omega0 > 0:
            raise ConfigError(f"omega0 must be positive, got {self.omega0}")

    @property
    def input_dim(self) -> int:
        """Input dimension ``D``."""
        return int(self.weights[0].shape[1])

    @property
    def hidden(self) -> tuple[int, ...]:
        """Hidden-layer widths."""
        return tuple(int(w.shape[0]) for w in self.weights[:-1])

    @property
    def layer_dims(self) -> tuple[int, ...]:
        """All layer widths from input to output, e.g. ``(3, 256, ..., 1)``."""
        return (self.input_dim, *(int(w.shape[0]) for w in self.weights))

    def tensors(self) -> list[torch.Tensor]:
        """Flat list ``[W0, b0, W1, b1, ...]``."""
        out: list[torch.Tensor] = []
        for w, b in zip(self.weights, self.biases, strict=True):
            out.extend((w, b))
        return out

    def with_tensors(self, tensors: Sequence[torch.Tensor]) -> SirenParams:
        """Rebuild parameters from a flat ``[W0, b0, ...]`` list."""
        return SirenParams(tuple(tensors[0::2]), tuple(tensors[1::2]), self.omega0)

    def num_parameters(self) -> int:
        """Total number of scalar parameters."""
        return sum(t.numel() for t in self.tensors())


@dataclass(frozen=True)
class Jet2:
    """
    Second-order jet of a scalar field at a batch of points.

    Attributes
    ----------
    value:
        ``(B,)`` field values.
    grad:
        ``(B, D)`` gradients.
    hess:
        ``(B, D, D)`` Hessians, stored symmetrized.
    """

    value: torch.Tensor
    grad: torch.Tensor
    hess: torch.Tensor

    def __len__(self) -> int:
        return int(self.value.shape[0])

    @property
    def dim(self) -> int:
        """Spatial dimension ``D``."""
        return int(self.grad.shape[-1])

    @classmethod
    def symmetrized(cls, value: torch.Tensor, grad: torch.Tensor, hess: torch.Tensor) -> Jet2:
        """Build a jet, storing ``(H + H^T) / 2`` so the Hessian is exactly symmetric."""
        return cls(value, grad, 0.5 * (hess + hess.transpose(-1, -2)))

    def __getitem__(self, index: slice | torch.Tensor) -> Jet2:
        return Jet2(self.value[index], self.grad[index], self.hess[index])

    @classmethod
    def concat(cls, jets: Sequence[Jet2]) -> Jet2:
        """Concatenate batches of jets."""
        return cls(
            torch.cat([j.value for j in jets]),
            torch.cat([j.grad for j in jets]),
            torch.cat([j.hess for j in jets]),
        )


@dataclass(frozen=True)
class ParamGradient:
    """Gradient of a scalar loss with respect to every weight and bias."""

    weights: tuple[torch.Tensor, ...]
    biases: tuple[torch.Tensor, ...]

    def tensors(self) -> list[torch.Tensor]:
        """Flat list ``[dW0, db0, dW1, db1, ...]`` matching :meth:`SirenParams.tensors`."""
        out: list[torch.Tensor] = []
        for w, b in zip(self.weights, self.biases, strict=True):
            out.extend((w, b))
        return out

    def is_finite(self) -> bool:
        """Whether every entry is finite."""
        return all(bool(torch.isfinite(t).all()) for t in self.tensors())


def as_points(x: npt.ArrayLike | torch.Tensor, dim: int | None = None) -> torch.Tensor:
    """
    Convert query points to a ``(B, D)`` float64 tensor.

    Parameters
    ----------
    x:
        Array-like of shape ``(B, D)`` or ``(D,)``.
    dim:
        Expected ``D``, checked when given.

    Returns
    -------
    torch.Tensor
        Double-precision points.
    """
    t = x.to(DTYPE) if isinstance(x, torch.Tensor) else torch.as_tensor(np.asarray(x, dtype=np.float64))
    if t.ndim == 1:
        t = t.unsqueeze(0)
    if dim is not None and t.shape[-1] != dim:
        raise ConfigError(f"Expected {dim}-dimensional points, got {t.shape[-1]}")
    return t


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------


def init_siren(input_dim: int, hidden: Sequence[int], omega0: float = 30.0, seed: int = 0) -> SirenParams:
    """
    Initialize a sine MLP with the SIREN scheme.

    First-layer weights are drawn from ``U(-1/input_dim, 1/input_dim)``,
    later layers from ``U(-sqrt(6/fan_in)/omega0, sqrt(6/fan_in)/omega0)``;
    biases start at zero.

    Parameters
    ----------
    input_dim:
        Spatial dimension ``D``.
    hidden:
        Hidden-layer widths, e.g. ``[256] * 5``.
    omega0:
        Sine frequency.
    seed:
        Seed of the dedicated torch generator.

    Returns
    -------
    SirenParams
        Freshly initialized parameters.
    """
    if not hidden:
        raise ConfigError("At least one hidden layer is required")
    gen = torch.Generator().manual_seed(seed)
    dims = [input_dim, *hidden, 1]
    weights: list[torch.Tensor] = []
    biases: list[torch.Tensor] = []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:], strict=True)):
        bound = 1.0 / fan_in if i == 0 else math.sqrt(6.0 / fan_in) / omega0
        w = (torch.rand((fan_out, fan_in), generator=gen, dtype=DTYPE) * 2.0 - 1.0) * bound
        weights.append(w)
        biases.append(torch.zeros(fan_out, dtype=DTYPE))
    return SirenParams(tuple(weights), tuple(biases), float(omega0))


# ---------------------------------------------------------------------------
# Forward passes
# ---------------------------------------------------------------------------


def forward_value(params: SirenParams, x: npt.ArrayLike | torch.Tensor) -> torch.Tensor:
    """
    Evaluate the network at a batch of points.

    Parameters
    ----------
    params:
        Network parameters.
    x:
        ``(B, D)`` query points.

    Returns
    -------
    torch.Tensor
        ``(B,)`` values.
    """
    u = as_points(x, params.input_dim)
    for w, b in zip(params.weights[:-1], params.biases[:-1], strict=True):
        u = torch.sin(params.omega0 * (u @ w.T + b))
    return (u @ params.weights[-1].T + params.biases[-1])[:, 0]


def forward_jet(params: SirenParams, x: npt.ArrayLike | torch.Tensor) -> Jet2:
    """
    Propagate second-order jets through the network.

    Affine layers map jets linearly. A sine activation ``u = sin(a)`` maps
    ``grad_u = cos(a) grad_a`` and
    ``hess_u = cos(a) hess_a - sin(a) grad_a grad_a^T``.
    The computation is recorded by autograd when parameters require grad.

    Parameters
    ----------
    params:
        Network parameters.
    x:
        ``(B, D)`` query points.

    Returns
    -------
    Jet2
        Value, gradient, and symmetrized Hessian at each point.
    """
    x = as_points(x, params.input_dim)
    batch, dim = x.shape
    omega = params.omega0

    # First layer: the input jet is (x, I, 0).
    w0, b0 = params.weights[0], params.biases[0]
    a = omega * (x @ w0.T + b0)
    ga = (omega * w0).unsqueeze(0).expand(batch, -1, -1)
    ha = torch.zeros((batch, a.shape[1], dim, dim), dtype=DTYPE)
    last = len(params.weights) - 1

    for layer in range(1, last + 1):
        w, b = params.weights[layer], params.biases[layer]
        s, c = torch.sin(a), torch.cos(a)
        gu = c.unsqueeze(-1) * ga
        hu = c[..., None, None] * ha - s[..., None, None] * ga.unsqueeze(-1) * ga.unsqueeze(-2)

        a = s @ w.T + b
        ga = torch.einsum("oi,bid->bod", w, gu)
        ha = torch.einsum("oi,bide->bode", w, hu)
        if layer != last:
            a, ga, ha = omega * a, omega * ga, omega * ha

    return Jet2.symmetrized(a[:, 0], ga[:, 0, :], ha[:, 0, :, :])


def iter_chunks(n: int, chunk_size: int) -> Iterator[slice]:
    """Yield consecutive slices covering ``range(n)`` in fixed order."""
    step = max(1, int(chunk_size))
    for start in range(0, n, step):
        yield slice(start, min(start + step, n))


# ---------------------------------------------------------------------------
# Parameter gradients
# ---------------------------------------------------------------------------


def loss_param_gradient(
    params: SirenParams,
    surface: npt.ArrayLike | torch.Tensor,
    offsurface: npt.ArrayLike | torch.Tensor,
    weights: LossWeights,
    K: float,  # noqa: N803
    alpha: float,
    variant: str = "ma",
    chunk_size: int = 4096,
) -> tuple[LossBreakdown, ParamGradient]:
    """
    Evaluate the total loss and its exact gradient w.r.t. every parameter.

    Jets are computed chunk by chunk with parameters that require grad, each
    chunk's weighted contribution to the batch means is differentiated by
    reverse accumulation, and chunk gradients are summed in fixed order.

    Parameters
    ----------
    params:
        Current network parameters.
    surface:
        ``(|P|, D)`` surface batch.
    offsurface:
        ``(|Q|, D)`` off-surface batch.
    weights:
        Loss weights.
    K, alpha:
        S²DF scale and non-manifold sharpness.
    variant:
        ``"ma"`` or ``"eikonal_prime"`` regularizer.
    chunk_size:
        Points per jet evaluation.

    Returns
    -------
    (LossBreakdown, ParamGradient)
        Per-term batch means, the weighted total, and its gradient.

    Raises
    ------
    NumericalError
        If any loss term is non-finite.
    """
    p = as_points(surface, params.input_dim)
    q = as_points(offsurface, params.input_dim)
    if len(p) == 0:
        raise ConfigError("The surface batch must be non-empty")
    if weights.nonmanifold > 0 and len(q) == 0:
        raise ConfigError("The off-surface batch must be non-empty when the non-manifold weight is positive")

    leaves = [t.detach().clone().requires_grad_(True) for t in params.tensors()]
    live = params.with_tensors(leaves)
    grads = [torch.zeros_like(t) for t in leaves]
    counts = {"ma": len(p) + len(q), "dirichlet": len(p), "neumann": len(p), "nonmanifold": len(q)}
    sums = dict.fromkeys(counts, 0.0)

    for points, on_surface in ((p, True), (q, False)):
        for chunk in iter_chunks(len(points), chunk_size):
            jets = forward_jet(live, points[chunk])
            terms = chunk_term_sums(jets, on_surface, K, alpha, variant)
            contribution = torch.zeros((), dtype=DTYPE)
            for name, value in terms.items():
                if not bool(torch.isfinite(value)):
                    raise NumericalError(f"Loss term {name!r} is not finite", term=name)
                sums[name] += float(value.detach())
                contribution = contribution + weights.of(name) * value / counts[name]
            for acc, g in zip(grads, torch.autograd.grad(contribution, leaves, allow_unused=True), strict=True):
                if g is not None:
                    acc += g

    means = {name: (sums[name] / counts[name] if counts[name] else 0.0) for name in counts}
    breakdown = LossBreakdown.from_terms(means, weights)
    if not math.isfinite(breakdown.total):
        raise NumericalError("Total loss is not finite", term="total")
    return breakdown, ParamGradient(tuple(grads[0::2]), tuple(grads[1::2]))


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(params: SirenParams, path: Path) -> None:
    """
    Write parameters in the ``S2DF1`` binary format.

    Layout: magic ``S2DF1``; ``<u4`` count of layer dims; ``<u4`` dims;
    ``<f8`` omega0; then per layer the row-major weights and the biases as
    little-endian float64.

    Raises
    ------
    OutputError
        If the file cannot be written.
    """
    dims = params.layer_dims
    header = CHECKPOINT_MAGIC + struct.pack(f"<I{len(dims)}Id", len(dims), *dims, params.omega0)
    payload = b"".join(t.detach().cpu().numpy().astype("<f8").tobytes(order="C") for t in params.tensors())
    try:
        path.write_bytes(header + payload)
    except OSError as exc:
        raise OutputError(f"Unable to write checkpoint {path}: {exc}") from exc


def load_checkpoint(path: Path) -> SirenParams:
    """
    Read parameters written by :func:`save_checkpoint`.

    Raises
    ------
    InputError
        If the file is missing, not an ``S2DF1`` checkpoint, truncated, or
        holds non-finite values.
    """
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise InputError(f"Unable to read checkpoint {path}: {exc}") from exc
    if not blob.startswith(CHECKPOINT_MAGIC):
        raise InputError(f"{path} is not an S2DF1 checkpoint")

    try:
        offset = len(CHECKPOINT_MAGIC)
        (n_dims,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        dims = struct.unpack_from(f"<{n_dims}I", blob, offset)
        offset += 4 * n_dims
        (omega0,) = struct.unpack_from("<d", blob, offset)
        offset += 8
    except struct.error as exc:
        raise InputError(f"Truncated checkpoint header in {path}") from exc

    tensors: list[torch.Tensor] = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:], strict=True):
        for shape in ((fan_out, fan_in), (fan_out,)):
            count = math.prod(shape)
            if offset + 8 * count > len(blob):
                raise InputError(f"Truncated checkpoint payload in {path}")
            data = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape)
            tensors.append(torch.from_numpy(data.astype(np.float64)))
            offset += 8 * count
    if offset != len(blob):
        raise InputError(f"Trailing bytes after checkpoint payload in {path}")
    if not all(bool(torch.isfinite(t).all()) for t in tensors):
        raise InputError(f"Non-finite parameters in checkpoint {path}")
    try:
        return SirenParams(tuple(tensors[0::2]), tuple(tensors[1::2]), float(omega0))
    except ConfigError as exc:
        raise InputError(f"Inconsistent layer layout in checkpoint {path}: {exc}") from exc


# EOF
