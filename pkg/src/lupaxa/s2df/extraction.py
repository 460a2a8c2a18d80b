"""
Grid evaluation of a learned field and offset iso-level extraction.

The network is evaluated on a regular lattice, the S²DF is converted to an
unsigned distance ``sqrt(max(t, 0) / K)``, and the ``udf = iso`` level set is
polygonized: marching squares in 2D, marching cubes in 3D. An offset level of
an unsigned distance is a thin double cover of the zero set; that shell is
what gets scored.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import logging
from dataclasses import dataclass

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import numpy.typing as npt
import torch
from scipy.interpolate import RegularGridInterpolator
from skimage import measure

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    ConfigError,
    DegenerateInputError,
    InputError,
)
from .geometry import (
    AxisGrid,
    PointCloud,
    TriangleMesh,
    grid_points,
)
from .network import (
    SirenParams,
    forward_value,
    iter_chunks,
)
from .utils import (
    DEFAULT_ISO,
    DEFAULT_K,
    DEFAULT_RESOLUTION,
    GRID_HALF_EXTENT,
)

logger = logging.getLogger(__name__)

#: Faces smaller than this are dropped from extracted meshes.
MIN_FACE_AREA = 1e-12

#: Extracted vertices closer than this are merged.
WELD_TOLERANCE = 1e-9

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class ScalarFieldGrid:
    """
    Field samples on every lattice point of a grid.

    Attributes
    ----------
    grid:
        The lattice.
    values:
        Flat values in :func:`grid_points` order (row-major).
    """

    grid: AxisGrid
    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if values.size != self.grid.num_points:
            raise ConfigError(f"Expected {self.grid.num_points} grid values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise InputError("Grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def as_array(self) -> FloatArray:
        """Values shaped like the grid resolution (axis ``i`` is coordinate ``i``)."""
        return self.values.reshape(self.grid.resolution)


@dataclass(frozen=True)
class Polyline2:
    """Connected 2D contour components, each an ordered ``(n, 2)`` vertex array."""

    components: tuple[FloatArray, ...] = ()

    @property
    def is_empty(self) -> bool:
        """``True`` when there is no component."""
        return not self.components

    @property
    def num_vertices(self) -> int:
        """Total number of vertices over all components."""
        return sum(len(c) for c in self.components)

    def vertices(self) -> FloatArray:
        """All vertices stacked into one ``(n, 2)`` array."""
        return np.concatenate(self.components) if self.components else np.zeros((0, 2))


# ---------------------------------------------------------------------------
# Grid evaluation
# ---------------------------------------------------------------------------


def default_grid(dim: int, resolution: int | None = None) -> AxisGrid:
    """Extraction grid over ``[-1.03, 1.03]^dim``; 512 per axis in 2D, 256 in 3D by default."""
    if dim not in DEFAULT_RESOLUTION:
        raise ConfigError(f"Only 2D and 3D grids are supported, got {dim}D")
    return AxisGrid.cube(dim, GRID_HALF_EXTENT, resolution or DEFAULT_RESOLUTION[dim])


def evaluate_grid(params: SirenParams, grid: AxisGrid, chunk_size: int = 65536) -> ScalarFieldGrid:
    """
    Evaluate the network on every lattice point.

    Parameters
    ----------
    params:
        Trained network.
    grid:
        Lattice whose dimension matches the network input.
    chunk_size:
        Points per forward pass.

    Returns
    -------
    ScalarFieldGrid
        Network values in lattice order.

    Raises
    ------
    ConfigError
        If the grid and network dimensions differ.
    """
    if grid.dim != params.input_dim:
        raise ConfigError(f"Grid is {grid.dim}D but the network expects {params.input_dim}D input")
    values = np.empty(grid.num_points, dtype=np.float64)
    with torch.no_grad():
        for chunk in iter_chunks(grid.num_points, chunk_size):
            values[chunk] = forward_value(params, grid_points(grid, chunk.start, chunk.stop)).numpy()
    logger.debug("Evaluated field on %s grid (%d points)", "x".join(map(str, grid.resolution)), grid.num_points)
    return ScalarFieldGrid(grid, values)


def s2df_to_udf(field: ScalarFieldGrid, K: float) -> ScalarFieldGrid:  # noqa: N803
    """Unsigned distance ``sqrt(max(t, 0) / K)``; negative network noise clamps to 0."""
    if not K > 0:
        raise ConfigError(f"K must be positive, got {K}")
    return ScalarFieldGrid(field.grid, np.sqrt(np.maximum(field.values, 0.0) / K))


def interpolate_field(field: ScalarFieldGrid, points: npt.ArrayLike) -> FloatArray:
    """
    Multilinear interpolation of grid values at arbitrary points.

    Points outside the grid box give ``nan``.
    """
    interpolator = RegularGridInterpolator(field.grid.axes(), field.as_array(), method="linear", bounds_error=False, fill_value=np.nan)
    return interpolator(np.asarray(points, dtype=np.float64))


# ---------------------------------------------------------------------------
# Iso-level extraction
# ---------------------------------------------------------------------------


def _check_iso(field: ScalarFieldGrid, iso: float, dim: int) -> None:
    if field.grid.dim != dim:
        raise ConfigError(f"Expected a {dim}D field, got {field.grid.dim}D")
    if not iso > 0:
        raise ConfigError(f"iso must be positive, got {iso}")


def _level_present(values: FloatArray, iso: float) -> bool:
    return bool(values.min() < iso < values.max())


def extract_iso_2d(udf: ScalarFieldGrid, iso: float = DEFAULT_ISO) -> Polyline2:
    """
    Marching-squares contour of ``{udf = iso}``.

    Crossings are placed by linear interpolation along cell edges.
    Consecutive duplicate vertices are removed.

    Parameters
    ----------
    udf:
        2D unsigned-distance grid.
    iso:
        Positive offset level.

    Returns
    -------
    Polyline2
        Contour components in world coordinates; empty when the level is
        absent from the grid.
    """
    _check_iso(udf, iso, 2)
    if not _level_present(udf.values, iso):
        logger.warning("Iso level %.3g is outside the field range; nothing to extract", iso)
        return Polyline2()

    lower, spacing = udf.grid.lower, udf.grid.spacing
    components: list[FloatArray] = []
    for contour in measure.find_contours(udf.as_array(), iso):
        world = lower + contour * spacing
        keep = np.ones(len(world), dtype=bool)
        keep[1:] = np.any(world[1:] != world[:-1], axis=1)
        world = world[keep]
        if len(world) >= 2:
            components.append(world)
    logger.info("Extracted %d contour components (%d vertices)", len(components), sum(len(c) for c in components))
    return Polyline2(tuple(components))


def _weld(vertices: FloatArray, faces: npt.NDArray[np.int64], tol: float) -> tuple[FloatArray, npt.NDArray[np.int64]]:
    """Merge vertices on the same ``tol``-lattice cell, keeping first-seen order."""
    keys = np.round(vertices / tol).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return vertices[first[order]], rank[inverse.reshape(-1)][faces]


def extract_iso_3d(udf: ScalarFieldGrid, iso: float = DEFAULT_ISO) -> TriangleMesh:
    """
    Marching-cubes surface of ``{udf = iso}``.

    Faces with area below ``1e-12`` are dropped and vertices within ``1e-9``
    are welded. Around an open surface the result is a closed thin shell.

    Parameters
    ----------
    udf:
        3D unsigned-distance grid.
    iso:
        Positive offset level.

    Returns
    -------
    TriangleMesh
        Extracted mesh in world coordinates; empty when the level is absent.
    """
    _check_iso(udf, iso, 3)
    if not _level_present(udf.values, iso):
        logger.warning("Iso level %.3g is outside the field range; nothing to extract", iso)
        return TriangleMesh.empty()

    verts, faces, _, _ = measure.marching_cubes(
        udf.as_array(),
        level=iso,
        spacing=tuple(float(s) for s in udf.grid.spacing),
        method="lorensen",
        allow_degenerate=False,
    )
    mesh = TriangleMesh(verts + udf.grid.lower, faces.astype(np.int64))
    mesh = TriangleMesh(mesh.vertices, mesh.faces[mesh.face_areas() >= MIN_FACE_AREA])
    vertices, welded = _weld(mesh.vertices, mesh.faces, WELD_TOLERANCE)
    mesh = TriangleMesh(vertices, welded).cleaned()
    logger.info("Extracted mesh with %d vertices and %d faces", len(mesh.vertices), len(mesh.faces))
    return mesh


def extract(
    params: SirenParams,
    grid: AxisGrid | None = None,
    K: float = DEFAULT_K,  # noqa: N803
    iso: float = DEFAULT_ISO,
) -> tuple[ScalarFieldGrid, Polyline2 | TriangleMesh]:
    """
    Evaluate a network, convert it to an unsigned distance, and extract the offset level.

    Returns
    -------
    (ScalarFieldGrid, Polyline2 | TriangleMesh)
        The unsigned-distance grid and the contour (2D) or mesh (3D).
    """
    grid = grid if grid is not None else default_grid(params.input_dim)
    udf = s2df_to_udf(evaluate_grid(params, grid), K)
    shape = extract_iso_2d(udf, iso) if grid.dim == 2 else extract_iso_3d(udf, iso)
    return udf, shape


# ---------------------------------------------------------------------------
# Contour sampling
# ---------------------------------------------------------------------------


def sample_polylines(polylines: Polyline2, n: int, seed: int) -> PointCloud:
    """
    Length-uniform samples on contour segments, with unit segment normals.

    Raises
    ------
    DegenerateInputError
        If the contours have zero total length.
    """
    starts = [c[:-1] for c in polylines.components]
    ends = [c[1:] for c in polylines.components]
    a = np.concatenate(starts) if starts else np.zeros((0, 2))
    b = np.concatenate(ends) if ends else np.zeros((0, 2))
    edges = b - a
    lengths = np.linalg.norm(edges, axis=1)
    total = float(lengths.sum())
    if total <= 0.0:
        raise DegenerateInputError("Contours have zero total length; nothing to sample")

    rng = np.random.default_rng(seed)
    index = rng.choice(len(lengths), size=n, p=lengths / total)
    t = rng.random(n)
    points = a[index] + t[:, None] * edges[index]
    tangents = edges[index] / lengths[index, None]
    return PointCloud(points, np.stack([-tangents[:, 1], tangents[:, 0]], axis=1))


# EOF
