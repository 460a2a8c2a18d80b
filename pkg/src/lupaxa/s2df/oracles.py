"""
Analytic S²DF fields of primitive shapes and a finite-difference differentiator.

This module turns the differential identities of the scaled-squared distance
``t(x) = K g(x)^2`` into executable checks:

* ``|grad t|^2 = 4K t`` wherever ``t`` is differentiable;
* ``H grad t = 2K grad t`` (the Hessian has eigenvalue ``2K`` along the gradient);
* ``H n = 2K n`` on the zero-level set, ``n`` the surface normal;
* ``det(H - 2K I) = 0``, the Monge-Ampère equation used as training residual.

Closed surfaces (sphere, circle) and open ones (plane patch, segment, arc)
are both covered. Every primitive exposes the closest-point map ``p(x)`` and
its Jacobian; then ``grad t = 2K (x - p)`` and ``H = 2K (I - Dp)``.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field

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
    NonDifferentiablePointError,
)
from .geometry import PointCloud
from .losses import (
    eikonal_prime_residual,
    ma_residual,
)
from .network import (
    DTYPE,
    Jet2,
    SirenParams,
    as_points,
    forward_jet,
    forward_value,
)
from .utils import DEFAULT_K

#: Default finite-difference step, in normalized units.
DEFAULT_FD_STEP = 1e-4

ScalarField = Callable[[torch.Tensor], torch.Tensor]


def _vec(values: npt.ArrayLike) -> torch.Tensor:
    return torch.as_tensor(np.asarray(values, dtype=np.float64))


def _unit(v: torch.Tensor) -> torch.Tensor:
    return v / torch.linalg.vector_norm(v, dim=-1, keepdim=True)


def _outer(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    return a.unsqueeze(-1) * b.unsqueeze(-2)


# ---------------------------------------------------------------------------
# Primitives
# ---------------------------------------------------------------------------


class Primitive(ABC):
    """Shape with an analytic closest-point map."""

    K: float

    @property
    @abstractmethod
    def dim(self) -> int:
        """Ambient dimension."""

    @abstractmethod
    def closest(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Closest points ``p(x)`` and the Jacobians ``Dp(x)``."""

    @abstractmethod
    def differentiable(self, x: torch.Tensor, margin: float) -> torch.Tensor:
        """Mask of points at least ``margin`` away from where ``t`` stops being C²."""

    @abstractmethod
    def sample_surface(self, n: int, rng: np.random.Generator) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64] | None]:
        """Uniform surface samples and their unit normals (if defined)."""

    def distance(self, x: torch.Tensor) -> torch.Tensor:
        """Unsigned distance ``g(x)``."""
        p, _ = self.closest(x)
        return torch.linalg.vector_norm(x - p, dim=-1)

    def s2df(self, x: torch.Tensor) -> torch.Tensor:
        """Scaled-squared distance ``K g(x)^2``."""
        p, _ = self.closest(x)
        d = x - p
        return self.K * (d * d).sum(dim=-1)


@dataclass(frozen=True)
class Sphere(Primitive):
    """Sphere (3D) or circle (2D) of a given radius."""

    center: tuple[float, ...] = (0.0, 0.0, 0.0)
    radius: float = 0.5
    K: float = DEFAULT_K

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ConfigError(f"Radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def closest(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        c = _vec(self.center)
        rel = x - c
        rho = torch.linalg.vector_norm(rel, dim=-1, keepdim=True)
        n = rel / rho
        eye = torch.eye(self.dim, dtype=DTYPE)
        dp = (self.radius / rho)[..., None] * (eye - _outer(n, n))
        return c + self.radius * n, dp

    def differentiable(self, x: torch.Tensor, margin: float) -> torch.Tensor:
        return torch.linalg.vector_norm(x - _vec(self.center), dim=-1) > margin

    def sample_surface(self, n: int, rng: np.random.Generator) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64] | None]:
        directions = rng.normal(size=(n, self.dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        return np.asarray(self.center) + self.radius * directions, directions


@dataclass(frozen=True)
class Circle2D(Sphere):
    """Circle in the plane."""

    center: tuple[float, ...] = (0.0, 0.0)

    def __post_init__(self) -> None:
        super().__post_init__()
        if len(self.center) != 2:
            raise ConfigError("Circle2D needs a 2D center")


@dataclass(frozen=True)
class Plane(Primitive):
    """Infinite plane (3D) or line (2D); surface samples come from a square patch."""

    point: tuple[float, ...] = (0.0, 0.0, 0.0)
    normal: tuple[float, ...] = (0.0, 0.0, 1.0)
    K: float = DEFAULT_K
    extent: float = 0.9

    def __post_init__(self) -> None:
        if len(self.point) != len(self.normal):
            raise ConfigError("Plane point and normal must have the same dimension")
        if abs(float(np.linalg.norm(self.normal)) - 1.0) > 1e-12:
            raise ConfigError("Plane normal must have unit length")

    @property
    def dim(self) -> int:
        return len(self.point)

    def closest(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        n = _vec(self.normal)
        offset = ((x - _vec(self.point)) * n).sum(dim=-1, keepdim=True)
        dp = (torch.eye(self.dim, dtype=DTYPE) - _outer(n, n)).expand(x.shape[0], -1, -1)
        return x - offset * n, dp

    def differentiable(self, x: torch.Tensor, margin: float) -> torch.Tensor:
        return torch.ones(x.shape[0], dtype=torch.bool)

    def sample_surface(self, n: int, rng: np.random.Generator) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64] | None]:
        normal = np.asarray(self.normal, dtype=np.float64)
        # Orthonormal tangent basis: the null space of the normal.
        tangents = np.linalg.svd(normal[None, :])[2][1:]
        coeffs = rng.uniform(-self.extent, self.extent, size=(n, self.dim - 1))
        points = np.asarray(self.point) + coeffs @ tangents
        return points, np.broadcast_to(normal, (n, self.dim)).copy()


@dataclass(frozen=True)
class Segment(Primitive):
    """Line segment between two distinct points (2D or 3D)."""

    a: tuple[float, ...] = (-0.5, 0.0)
    b: tuple[float, ...] = (0.5, 0.0)
    K: float = DEFAULT_K

    def __post_init__(self) -> None:
        if len(self.a) != len(self.b):
            raise ConfigError("Segment endpoints must have the same dimension")
        if np.allclose(self.a, self.b, rtol=0.0, atol=0.0):
            raise ConfigError("Segment endpoints must differ")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.subtract(self.b, self.a)))

    def _param(self, x: torch.Tensor) -> torch.Tensor:
        a, b = _vec(self.a), _vec(self.b)
        return ((x - a) * (b - a)).sum(dim=-1) / self.length**2

    def closest(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        a, b = _vec(self.a), _vec(self.b)
        s = self._param(x)
        inside = (s > 0) & (s < 1)
        p = a + s.clamp(0.0, 1.0)[:, None] * (b - a)
        u = _unit(b - a)
        dp = torch.where(inside[:, None, None], _outer(u, u), torch.zeros((), dtype=DTYPE))
        return p, dp.expand(x.shape[0], -1, -1)

    def differentiable(self, x: torch.Tensor, margin: float) -> torch.Tensor:
        along = self._param(x) * self.length
        return (torch.abs(along) > margin) & (torch.abs(along - self.length) > margin)

    def sample_surface(self, n: int, rng: np.random.Generator) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64] | None]:
        a, b = np.asarray(self.a, dtype=np.float64), np.asarray(self.b, dtype=np.float64)
        s = rng.random(n)
        points = a + s[:, None] * (b - a)
        if self.dim != 2:
            return points, None
        u = (b - a) / self.length
        return points, np.broadcast_to(np.array([-u[1], u[0]]), (n, 2)).copy()


@dataclass(frozen=True)
class Arc2D(Primitive):
    """Circular arc from angle ``start`` counter-clockwise to ``end`` (radians)."""

    center: tuple[float, ...] = (0.0, 0.0)
    radius: float = 0.5
    start: float = 0.0
    end: float = 1.5 * math.pi
    K: float = DEFAULT_K
    _span: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ConfigError(f"Radius must be positive, got {self.radius}")
        span = self.end - self.start
        if not 0.0 < span < 2.0 * math.pi:
            raise ConfigError("Arc angle range must be non-degenerate and shorter than a full turn")
        object.__setattr__(self, "_span", span)

    @property
    def dim(self) -> int:
        return 2

    def _endpoints(self) -> tuple[torch.Tensor, torch.Tensor]:
        c = _vec(self.center)
        e0 = c + self.radius * _vec([math.cos(self.start), math.sin(self.start)])
        e1 = c + self.radius * _vec([math.cos(self.end), math.sin(self.end)])
        return e0, e1

    def _relative_angle(self, x: torch.Tensor) -> torch.Tensor:
        rel = x - _vec(self.center)
        phi = torch.atan2(rel[:, 1], rel[:, 0])
        return torch.remainder(phi - self.start, 2.0 * math.pi)

    def closest(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        circle = Sphere(self.center, self.radius, self.K)
        p_circle, dp_circle = circle.closest(x)
        e0, e1 = self._endpoints()
        near_e0 = torch.linalg.vector_norm(x - e0, dim=-1) <= torch.linalg.vector_norm(x - e1, dim=-1)
        p_end = torch.where(near_e0[:, None], e0, e1)
        on_arc = self._relative_angle(x) <= self._span
        p = torch.where(on_arc[:, None], p_circle, p_end)
        dp = torch.where(on_arc[:, None, None], dp_circle, torch.zeros((), dtype=DTYPE))
        return p, dp

    def differentiable(self, x: torch.Tensor, margin: float) -> torch.Tensor:
        rel = x - _vec(self.center)
        rho = torch.linalg.vector_norm(rel, dim=-1)
        theta = self._relative_angle(x)
        # Distance to the rays through the endpoints (normal-cone boundaries).
        ray_gap = torch.minimum(torch.minimum(theta, 2.0 * math.pi - theta), torch.abs(theta - self._span))
        e0, e1 = self._endpoints()
        bisector_gap = torch.abs(torch.linalg.vector_norm(x - e0, dim=-1) - torch.linalg.vector_norm(x - e1, dim=-1))
        outside = theta > self._span
        ok = (rho > margin) & (rho * torch.sin(torch.clamp(ray_gap, max=math.pi / 2)) > margin)
        return ok & (~outside | (bisector_gap > margin))

    def sample_surface(self, n: int, rng: np.random.Generator) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64] | None]:
        theta = rng.uniform(self.start, self.end, size=n)
        normals = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return np.asarray(self.center) + self.radius * normals, normals


# ---------------------------------------------------------------------------
# Jets
# ---------------------------------------------------------------------------


def is_differentiable(primitive: Primitive, x: npt.ArrayLike | torch.Tensor, margin: float = 1e-9) -> npt.NDArray[np.bool_]:
    """Per-point mask: ``True`` where the primitive's S²DF is twice differentiable."""
    return primitive.differentiable(as_points(x, primitive.dim), margin).numpy()


def distance(primitive: Primitive, x: npt.ArrayLike | torch.Tensor) -> npt.NDArray[np.float64]:
    """Unsigned distance from each point to the primitive."""
    return primitive.distance(as_points(x, primitive.dim)).numpy()


def analytic_jet(primitive: Primitive, x: npt.ArrayLike | torch.Tensor) -> Jet2:
    """
    Exact value, gradient, and Hessian of a primitive's S²DF.

    Parameters
    ----------
    primitive:
        The shape (its ``K`` scales the field).
    x:
        ``(B, D)`` query points.

    Returns
    -------
    Jet2
        ``t = K g^2``, ``grad t = 2K (x - p)``, ``H = 2K (I - Dp)``.

    Raises
    ------
    NonDifferentiablePointError
        If any point lies on the cut locus or on a Hessian discontinuity.
    """
    pts = as_points(x, primitive.dim)
    mask = primitive.differentiable(pts, 1e-9)
    if not bool(mask.all()):
        bad = pts[~mask][0].tolist()
        raise NonDifferentiablePointError(f"{type(primitive).__name__} S2DF is not twice differentiable at {bad}")
    p, dp = primitive.closest(pts)
    d = pts - p
    k = primitive.K
    value = k * (d * d).sum(dim=-1)
    hess = 2.0 * k * (torch.eye(primitive.dim, dtype=DTYPE) - dp)
    return Jet2.symmetrized(value, 2.0 * k * d, hess)


def finite_difference_jet(field: ScalarField, x: npt.ArrayLike | torch.Tensor, h: float = DEFAULT_FD_STEP) -> Jet2:
    """
    Central-difference jet of a batched scalar field.

    Gradients use ``(f(x + h e_i) - f(x - h e_i)) / 2h``; diagonal Hessian
    entries the three-point stencil and mixed entries the four-point stencil.

    Parameters
    ----------
    field:
        Callable mapping ``(B, D)`` points to ``(B,)`` values.
    x:
        Query points.
    h:
        Step size (``> 0``).

    Returns
    -------
    Jet2
        Symmetrized finite-difference jet.
    """
    if not h > 0:
        raise ConfigError(f"Finite-difference step must be positive, got {h}")
    pts = as_points(x)
    dim = pts.shape[1]
    eye = torch.eye(dim, dtype=DTYPE) * h
    with torch.no_grad():
        f0 = field(pts)
        grad = torch.empty((pts.shape[0], dim), dtype=DTYPE)
        hess = torch.empty((pts.shape[0], dim, dim), dtype=DTYPE)
        for i in range(dim):
            fp, fm = field(pts + eye[i]), field(pts - eye[i])
            grad[:, i] = (fp - fm) / (2.0 * h)
            hess[:, i, i] = (fp - 2.0 * f0 + fm) / (h * h)
            for j in range(i + 1, dim):
                mixed = field(pts + eye[i] + eye[j]) - field(pts + eye[i] - eye[j]) - field(pts - eye[i] + eye[j]) + field(pts - eye[i] - eye[j])
                hess[:, i, j] = hess[:, j, i] = mixed / (4.0 * h * h)
    return Jet2.symmetrized(f0, grad, hess)


# ---------------------------------------------------------------------------
# Eigenstructure checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenstructureReport:
    """
    Per-point eigen-structure of S²DF Hessians.

    Attributes
    ----------
    eigen_gap:
        ``min_i |lambda_i - 2K| / 2K``.
    eigvec_alignment:
        Norm of the projection of the unit gradient (or of the supplied
        normal, where the gradient vanishes) onto the eigenspace whose
        eigenvalues lie within ``eig_tol`` of ``2K``. Equals the absolute
        cosine when that eigenspace is one-dimensional.
    """

    eigen_gap: npt.NDArray[np.float64]
    eigvec_alignment: npt.NDArray[np.float64]


def check_eigenstructure(
    jet: Jet2,
    K: float,  # noqa: N803
    tol: float = 1e-8,
    normals: npt.ArrayLike | None = None,
    eig_tol: float = 1e-6,
) -> EigenstructureReport:
    """
    Measure how well Hessians have eigenvalue ``2K`` along the gradient.

    Parameters
    ----------
    jet:
        Jets to check.
    K:
        S²DF scale.
    tol:
        Gradient norm below which the point is treated as on the zero-level
        set and checked against ``normals`` instead.
    normals:
        Optional ``(B, D)`` unit normals for zero-level points.
    eig_tol:
        Relative tolerance selecting the ``2K`` eigenspace.

    Returns
    -------
    EigenstructureReport
        Per-point gaps and alignments. Zero-level points without a supplied
        normal get alignment ``nan``.
    """
    two_k = 2.0 * K
    eigvals, eigvecs = torch.linalg.eigh(jet.hess)
    rel = torch.abs(eigvals - two_k) / two_k
    gap = rel.min(dim=-1).values

    grad_norm = torch.linalg.vector_norm(jet.grad, dim=-1, keepdim=True)
    direction = jet.grad / torch.clamp(grad_norm, min=torch.finfo(DTYPE).tiny)
    flat = grad_norm[:, 0] <= tol
    if normals is not None:
        n = _unit(as_points(normals, jet.dim))
        direction = torch.where(flat[:, None], n, direction)

    coords = torch.einsum("bdk,bd->bk", eigvecs, direction)
    selected = (rel < eig_tol).to(DTYPE)
    alignment = torch.sqrt((selected * coords * coords).sum(dim=-1))
    if normals is None:
        alignment = torch.where(flat, torch.full_like(alignment, float("nan")), alignment)
    return EigenstructureReport(gap.numpy(), alignment.numpy())


# Operation name used by the reproduction harness.
check_theorem1 = check_eigenstructure


# ---------------------------------------------------------------------------
# Sampling helpers
# ---------------------------------------------------------------------------


def sample_primitive_surface(primitive: Primitive, n: int, seed: int) -> PointCloud:
    """
    Uniform samples on a primitive's surface, with normals where defined.

    Parameters
    ----------
    primitive:
        Shape to sample.
    n:
        Number of samples.
    seed:
        Random seed.

    Returns
    -------
    PointCloud
        Surface points (3D segment samples carry no normals).
    """
    points, normals = primitive.sample_surface(n, np.random.default_rng(seed))
    return PointCloud(points, normals)


def sample_differentiable_points(primitive: Primitive, n: int, seed: int, margin: float = 5e-2, half_extent: float = 1.0) -> npt.NDArray[np.float64]:
    """
    Uniform points in ``[-half_extent, half_extent]^D`` where the S²DF is C².

    Points closer than ``margin`` to a non-differentiable set are rejected,
    so finite-difference stencils of step ``<< margin`` stay on one side.
    """
    rng = np.random.default_rng(seed)
    kept: list[npt.NDArray[np.float64]] = []
    count = 0
    while count < n:
        candidates = rng.uniform(-half_extent, half_extent, size=(2 * n, primitive.dim))
        mask = is_differentiable(primitive, candidates, margin)
        kept.append(candidates[mask])
        count += int(mask.sum())
    return np.concatenate(kept)[:n]


# ---------------------------------------------------------------------------
# Identity suite
# ---------------------------------------------------------------------------


def relative_error(approx: torch.Tensor, exact: torch.Tensor) -> float:
    """Largest absolute deviation relative to the largest reference magnitude."""
    scale = float(torch.max(torch.abs(exact)))
    return float(torch.max(torch.abs(approx - exact))) / max(scale, 1e-300)


#: Pass thresholds of :func:`run_identity_suite`.
IDENTITY_TOLERANCES = {
    "eikonal": 1e-9,
    "hess_grad": 1e-6,
    "ma": 1e-6,
    "eigen_gap": 1e-9,
    "alignment": 1e-9,
    "fd_grad": 1e-6,
    "fd_hess": 1e-4,
}


@dataclass(frozen=True)
class IdentityReport:
    """
    Worst-case residuals of the S²DF identities on one primitive.

    ``ma`` is normalized by ``(2K)^D``; ``alignment`` is reported as the
    largest shortfall ``1 - alignment``.
    """

    primitive: str
    n_points: int
    eikonal: float
    hess_grad: float
    ma: float
    eigen_gap: float
    alignment: float
    surface_eigen_gap: float
    surface_alignment: float
    fd_grad: float
    fd_hess: float

    def failures(self) -> list[str]:
        """Names of the identities that exceed their tolerance."""
        out = [name for name, tol in IDENTITY_TOLERANCES.items() if not getattr(self, name) < tol]
        if not self.surface_eigen_gap < IDENTITY_TOLERANCES["eigen_gap"]:
            out.append("surface_eigen_gap")
        if not self.surface_alignment < IDENTITY_TOLERANCES["alignment"]:
            out.append("surface_alignment")
        return out

    @property
    def passed(self) -> bool:
        """Whether every identity holds within tolerance."""
        return not self.failures()


def run_identity_suite(primitive: Primitive, n: int = 1000, seed: int = 0, h: float = DEFAULT_FD_STEP) -> IdentityReport:
    """
    Check every S²DF identity on ``n`` random differentiable points.

    Parameters
    ----------
    primitive:
        Shape under test.
    n:
        Number of off-surface query points (and of zero-level points).
    seed:
        Random seed.
    h:
        Finite-difference step for the analytic-vs-numeric comparison.

    Returns
    -------
    IdentityReport
        Worst-case residuals; see :meth:`IdentityReport.failures`.
    """
    k = primitive.K
    x = sample_differentiable_points(primitive, n, seed)
    jet = analytic_jet(primitive, x)

    four_kt = 4.0 * k * jet.value
    eikonal = eikonal_prime_residual(jet, k) / torch.clamp(four_kt, min=1e-12)
    hg = torch.einsum("bij,bj->bi", jet.hess, jet.grad)
    hess_grad = torch.linalg.vector_norm(hg - 2.0 * k * jet.grad, dim=-1) / torch.clamp(2.0 * k * torch.linalg.vector_norm(jet.grad, dim=-1), min=1e-12)
    ma = ma_residual(jet, k) / (2.0 * k) ** primitive.dim
    report = check_eigenstructure(jet, k)

    surface = sample_primitive_surface(primitive, 4 * n, seed + 1)
    if surface.normals is not None:
        keep = is_differentiable(primitive, surface.points, 1e-6)
        pts, normals = surface.points[keep][:n], surface.normals[keep][:n]
        surface_report = check_eigenstructure(analytic_jet(primitive, pts), k, normals=normals)
        surface_gap = float(np.max(surface_report.eigen_gap))
        surface_alignment = float(np.max(1.0 - surface_report.eigvec_alignment))
    else:
        surface_gap = surface_alignment = 0.0

    fd = finite_difference_jet(primitive.s2df, x, h)

    return IdentityReport(
        primitive=type(primitive).__name__,
        n_points=len(x),
        eikonal=float(eikonal.max()),
        hess_grad=float(hess_grad.max()),
        ma=float(ma.max()),
        eigen_gap=float(np.max(report.eigen_gap)),
        alignment=float(np.max(1.0 - report.eigvec_alignment)),
        surface_eigen_gap=surface_gap,
        surface_alignment=surface_alignment,
        fd_grad=relative_error(fd.grad, jet.grad),
        fd_hess=relative_error(fd.hess, jet.hess),
    )


# ---------------------------------------------------------------------------
# Learned-field checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkCheckReport:
    """
    Jet consistency and S²DF eigen-structure of a trained network.

    The jet errors decide pass/fail; the eigen statistics describe how close
    the learned field is to an S²DF and are informational.
    """

    n_points: int
    grad_rel_err: float
    hess_rel_err: float
    median_eigen_gap: float
    median_alignment: float
    median_ma_residual: float

    @property
    def passed(self) -> bool:
        """Whether the propagated jets agree with finite differences."""
        return self.grad_rel_err < 1e-5 and self.hess_rel_err < 1e-4


def verify_network(params: SirenParams, K: float = DEFAULT_K, n: int = 100, seed: int = 0, h: float = DEFAULT_FD_STEP) -> NetworkCheckReport:  # noqa: N803
    """
    Compare a network's propagated jets with finite differences at random points.

    Parameters
    ----------
    params:
        Network to check.
    K:
        S²DF scale the network was trained with.
    n:
        Number of uniform points in ``[-1, 1]^D``.
    seed:
        Random seed.
    h:
        Finite-difference step.

    Returns
    -------
    NetworkCheckReport
        Relative jet errors and median eigen statistics.
    """
    x = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, params.input_dim))
    with torch.no_grad():
        jet = forward_jet(params, x)
    fd = finite_difference_jet(lambda pts: forward_value(params, pts), x, h)
    report = check_eigenstructure(jet, K)
    ma = ma_residual(jet, K) / (2.0 * K) ** params.input_dim
    return NetworkCheckReport(
        n_points=n,
        grad_rel_err=relative_error(fd.grad, jet.grad),
        hess_rel_err=relative_error(fd.hess, jet.hess),
        median_eigen_gap=float(np.median(report.eigen_gap)),
        median_alignment=float(np.nanmedian(report.eigvec_alignment)),
        median_ma_residual=float(torch.median(ma)),
    )


# ---------------------------------------------------------------------------
# Primitive specs
# ---------------------------------------------------------------------------

PRIMITIVE_NAMES = ("sphere", "plane", "circle", "segment", "arc")


def _parse_float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(v) for v in raw.replace("/", " ").split())


def parse_primitive(spec: str, K: float = DEFAULT_K) -> Primitive:  # noqa: N803
    """
    Build a primitive from a CLI spec such as ``"sphere:radius=0.7"``.

    Options are comma-separated; vector components are separated by ``/``,
    e.g. ``"segment:a=-0.5/0,b=0.5/0"``.

    Raises
    ------
    ConfigError
        For unknown names, options, or malformed values.
    """
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    options: dict[str, str] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"Malformed primitive option {item!r} in {spec!r}")
        options[key.strip()] = value.strip()

    vectors = {"center", "point", "normal", "a", "b"}
    scalars = {"radius", "start", "end", "extent"}
    kwargs: dict[str, object] = {"K": K}
    try:
        for key, value in options.items():
            if key in vectors:
                kwargs[key] = _parse_float_list(value)
            elif key in scalars:
                kwargs[key] = float(value)
            else:
                raise ConfigError(f"Unknown primitive option {key!r} in {spec!r}")
    except ValueError as exc:
        raise ConfigError(f"Malformed primitive spec {spec!r}: {exc}") from exc

    factories: dict[str, type[Primitive]] = {
        "sphere": Sphere,
        "circle": Circle2D,
        "plane": Plane,
        "segment": Segment,
        "arc": Arc2D,
    }
    if name not in factories:
        raise ConfigError(f"Unknown primitive {name!r}; choose from {PRIMITIVE_NAMES}")
    try:
        return factories[name](**kwargs)  # type: ignore[arg-type]
    except TypeError as exc:
        raise ConfigError(f"Invalid options for {name}: {exc}") from exc


# EOF
