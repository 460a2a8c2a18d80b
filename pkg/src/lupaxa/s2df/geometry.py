"""
Dimension-generic geometry primitives.

This module is responsible for:

* Point clouds (optionally with unit normals) in 2D and 3D.
* The bounding-box normalization transform shared by training and evaluation.
* Triangle meshes and area-uniform surface sampling.
* Regular axis-aligned grids and their lattice points.

All containers are frozen dataclasses holding read-only numpy arrays.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import math
from dataclasses import dataclass, field

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import numpy.typing as npt

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    DegenerateInputError,
    InputError,
)
from .utils import NORMALIZED_HALF_EXTENT

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

#: Tolerance on the unit length of stored normals.
NORMAL_TOLERANCE = 1e-6


def _frozen(array: npt.ArrayLike, dtype: type = np.float64) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PointCloud:
    """
    An unoriented point set, with optional per-point unit normals.

    Attributes
    ----------
    points:
        ``(N, D)`` coordinates, ``D`` in ``{2, 3}``.
    normals:
        Optional ``(N, D)`` unit normals. These are only ever used for
        evaluation, never for training.
    """

    points: FloatArray
    normals: FloatArray | None = None

    def __post_init__(self) -> None:
        points = _frozen(self.points)
        if points.ndim != 2 or points.shape[1] not in (2, 3):
            raise InputError(f"Point cloud must be an (N, 2) or (N, 3) array, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise InputError("Point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", points)

        if self.normals is not None:
            normals = _frozen(self.normals)
            if normals.shape != points.shape:
                raise InputError(f"Normals shape {normals.shape} does not match points shape {points.shape}")
            lengths = np.linalg.norm(normals, axis=1)
            if lengths.size and np.max(np.abs(lengths - 1.0)) > NORMAL_TOLERANCE:
                raise InputError("Point cloud normals must have unit length")
            object.__setattr__(self, "normals", normals)

    @property
    def dim(self) -> int:
        """Spatial dimension ``D``."""
        return int(self.points.shape[1])

    @property
    def has_normals(self) -> bool:
        """Whether per-point normals are attached."""
        return self.normals is not None

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class NormTransform:
    """
    Uniform scale-and-translate map between original and normalized units.

    ``normalized = (original - center) / scale``; ``scale`` is measured in
    original units per normalized unit.
    """

    center: FloatArray
    scale: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _frozen(self.center))
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ConfigError(f"NormTransform scale must be positive, got {self.scale}")

    def apply(self, points: npt.ArrayLike) -> FloatArray:
        """Map original coordinates to normalized coordinates."""
        return (np.asarray(points, dtype=np.float64) - self.center) / self.scale

    def invert(self, points: npt.ArrayLike) -> FloatArray:
        """Map normalized coordinates back to original coordinates."""
        return np.asarray(points, dtype=np.float64) * self.scale + self.center

    def apply_cloud(self, cloud: PointCloud) -> PointCloud:
        """Normalize a cloud; normals are unchanged by a uniform scale."""
        return PointCloud(self.apply(cloud.points), cloud.normals)

    def invert_cloud(self, cloud: PointCloud) -> PointCloud:
        """Map a normalized cloud back to original units."""
        return PointCloud(self.invert(cloud.points), cloud.normals)


@dataclass(frozen=True)
class TriangleMesh:
    """
    Indexed triangle mesh in 3D.

    Attributes
    ----------
    vertices:
        ``(V, 3)`` vertex positions.
    faces:
        ``(F, 3)`` vertex-index triples.
    """

    vertices: FloatArray
    faces: IntArray

    def __post_init__(self) -> None:
        vertices = _frozen(np.reshape(self.vertices, (-1, 3)))
        faces = _frozen(np.reshape(self.faces, (-1, 3)), dtype=np.int64)
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise InputError("Mesh face indices out of range")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)

    @classmethod
    def empty(cls) -> TriangleMesh:
        """Return a mesh with no vertices and no faces."""
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    @property
    def is_empty(self) -> bool:
        """``True`` when the mesh has no faces."""
        return len(self.faces) == 0

    def _edges(self) -> tuple[FloatArray, FloatArray, FloatArray]:
        a, b, c = (self.vertices[self.faces[:, i]] for i in range(3))
        return a, b - a, c - a

    def face_areas(self) -> FloatArray:
        """Per-face areas."""
        _, e1, e2 = self._edges()
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)

    def face_normals(self) -> FloatArray:
        """Per-face unit normals (right-hand rule); zero for degenerate faces."""
        _, e1, e2 = self._edges()
        cross = np.cross(e1, e2)
        length = np.linalg.norm(cross, axis=1, keepdims=True)
        return np.divide(cross, length, out=np.zeros_like(cross), where=length > 0)

    def cleaned(self) -> TriangleMesh:
        """Drop faces that reference the same vertex more than once."""
        f = self.faces
        keep = (f[:, 0] != f[:, 1]) & (f[:, 1] != f[:, 2]) & (f[:, 0] != f[:, 2])
        return TriangleMesh(self.vertices, f[keep])


@dataclass(frozen=True)
class AxisGrid:
    """
    Regular lattice over an axis-aligned box, both bounds included.

    Attributes
    ----------
    lower, upper:
        Box corners, ``lower < upper`` componentwise.
    resolution:
        Number of lattice points per axis (each ``>= 2``).
    """

    lower: FloatArray
    upper: FloatArray
    resolution: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        lower = _frozen(np.atleast_1d(self.lower))
        upper = _frozen(np.atleast_1d(self.upper))
        resolution = tuple(int(r) for r in np.atleast_1d(self.resolution))
        if lower.shape != upper.shape or len(resolution) != lower.shape[0]:
            raise ConfigError("AxisGrid bounds and resolution must have the same dimension")
        if not np.all(lower < upper):
            raise ConfigError("AxisGrid requires lower < upper on every axis")
        if min(resolution) < 2:
            raise ConfigError("AxisGrid resolution must be >= 2 on every axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "resolution", resolution)

    @classmethod
    def cube(cls, dim: int, half_extent: float, resolution: int) -> AxisGrid:
        """Grid over ``[-half_extent, half_extent]^dim`` with equal resolution."""
        return cls(np.full(dim, -half_extent), np.full(dim, half_extent), (resolution,) * dim)

    @property
    def dim(self) -> int:
        """Number of axes."""
        return len(self.resolution)

    @property
    def num_points(self) -> int:
        """Total number of lattice points."""
        return math.prod(self.resolution)

    @property
    def spacing(self) -> FloatArray:
        """Per-axis distance between neighbouring lattice points."""
        return (self.upper - self.lower) / (np.asarray(self.resolution) - 1)

    @property
    def cell_diagonal(self) -> float:
        """Length of one cell's diagonal."""
        return float(np.linalg.norm(self.spacing))

    def axes(self) -> list[FloatArray]:
        """Per-axis coordinate vectors."""
        return [np.linspace(lo, hi, n) for lo, hi, n in zip(self.lower, self.upper, self.resolution, strict=True)]


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def normalize_cloud(cloud: PointCloud) -> tuple[PointCloud, NormTransform]:
    """
    Center a cloud's bounding box at the origin and scale it into ``[-0.9, 0.9]^D``.

    The longest bounding-box half-extent maps to exactly 0.9.

    Parameters
    ----------
    cloud:
        Non-empty input cloud.

    Returns
    -------
    (PointCloud, NormTransform)
        The normalized cloud and the transform that produced it.

    Raises
    ------
    DegenerateInputError
        If the cloud is empty or all points coincide.
    """
    if len(cloud) == 0:
        raise DegenerateInputError("Cannot normalize an empty point cloud")
    lo = cloud.points.min(axis=0)
    hi = cloud.points.max(axis=0)
    half = float(np.max(hi - lo)) / 2.0
    if half <= 0.0:
        raise DegenerateInputError("All points coincide; the cloud has zero extent")
    transform = NormTransform(center=(lo + hi) / 2.0, scale=half / NORMALIZED_HALF_EXTENT)
    return transform.apply_cloud(cloud), transform


def sample_mesh_surface(mesh: TriangleMesh, n: int, seed: int) -> PointCloud:
    """
    Draw ``n`` area-uniform samples from a triangle mesh, with face normals.

    A face is chosen with probability proportional to its area, then a point
    is drawn with uniform barycentric coordinates inside it.

    Parameters
    ----------
    mesh:
        Mesh with at least one non-degenerate face.
    n:
        Number of samples (``0`` gives an empty cloud).
    seed:
        Random seed; identical seeds give identical samples.

    Returns
    -------
    PointCloud
        ``n`` points with the unit normal of the face each was drawn from.

    Raises
    ------
    DegenerateInputError
        If the mesh has no faces or zero total area.
    """
    if n < 0:
        raise ConfigError(f"Sample count must be >= 0, got {n}")
    areas = mesh.face_areas()
    total = float(areas.sum())
    if total <= 0.0:
        raise DegenerateInputError("Mesh has zero total area; nothing to sample")
    if n == 0:
        return PointCloud(np.zeros((0, 3)), np.zeros((0, 3)))

    rng = np.random.default_rng(seed)
    face_idx = rng.choice(len(areas), size=n, p=areas / total)
    u, v = rng.random((2, n))
    flip = u + v > 1.0
    u[flip], v[flip] = 1.0 - u[flip], 1.0 - v[flip]

    a, e1, e2 = mesh._edges()
    points = a[face_idx] + u[:, None] * e1[face_idx] + v[:, None] * e2[face_idx]
    return PointCloud(points, mesh.face_normals()[face_idx])


def grid_points(grid: AxisGrid, start: int = 0, stop: int | None = None) -> FloatArray:
    """
    Return lattice points of a grid in row-major order (last axis fastest).

    Parameters
    ----------
    grid:
        The lattice.
    start, stop:
        Optional flat-index slice, so large grids can be walked in chunks.

    Returns
    -------
    FloatArray
        ``(stop - start, D)`` coordinates.
    """
    stop = grid.num_points if stop is None else min(stop, grid.num_points)
    flat = np.arange(start, stop, dtype=np.int64)
    index = np.stack(np.unravel_index(flat, grid.resolution), axis=1)
    axes = grid.axes()
    return np.stack([axes[d][index[:, d]] for d in range(grid.dim)], axis=1)


# EOF
