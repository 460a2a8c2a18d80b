"""
Tests for the geometry containers and helpers.

This module verifies that:

* :class:`lupaxa.s2df.geometry.PointCloud` validates shapes, finiteness, and
  unit normals.
* :func:`lupaxa.s2df.geometry.normalize_cloud` maps the longest half-extent to
  0.9 and its transform round-trips.
* :func:`lupaxa.s2df.geometry.sample_mesh_surface` is reproducible and lands
  on the mesh in proportion to face area.
* :class:`lupaxa.s2df.geometry.AxisGrid` and :func:`grid_points` agree on
  ordering and spacing.
"""

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import pytest

# ---------------------------------------------------------------------------
# Internal geometry helpers
# ---------------------------------------------------------------------------
from lupaxa.s2df.exceptions import ConfigError, DegenerateInputError, InputError  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.geometry import (  # pyright: ignore[reportMissingImports]
    AxisGrid,
    PointCloud,
    TriangleMesh,
    grid_points,
    normalize_cloud,
    sample_mesh_surface,
)


def _unit_square_mesh() -> TriangleMesh:
    vertices = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    faces = np.array([[0, 1, 2], [0, 2, 3]])
    return TriangleMesh(vertices, faces)


def test_point_cloud_rejects_bad_input() -> None:
    """
    A cloud must be ``(N, 2)`` or ``(N, 3)``, finite, and carry unit normals.
    """
    with pytest.raises(InputError):
        PointCloud(np.zeros((4, 4)))
    with pytest.raises(InputError):
        PointCloud(np.array([[0.0, np.nan]]))
    with pytest.raises(InputError):
        PointCloud(np.zeros((2, 2)), normals=np.array([[2.0, 0.0], [0.0, 1.0]]))

    cloud = PointCloud(np.zeros((3, 2)), normals=np.tile([0.0, 1.0], (3, 1)))
    assert cloud.dim == 2
    assert len(cloud) == 3
    assert cloud.has_normals


def test_point_cloud_arrays_are_read_only() -> None:
    """Stored arrays are copies with the write flag cleared."""
    source = np.zeros((2, 3))
    cloud = PointCloud(source)
    source[0, 0] = 5.0
    assert cloud.points[0, 0] == 0.0
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 1.0


def test_normalize_cloud_fits_and_round_trips() -> None:
    """
    The longest half-extent maps to 0.9, the box is centered, and the
    transform inverts exactly.
    """
    points = np.array([[10.0, 0.0], [14.0, 1.0], [12.0, 2.0]])
    normalized, transform = normalize_cloud(PointCloud(points))

    assert np.max(np.abs(normalized.points)) == pytest.approx(0.9)
    lo, hi = normalized.points.min(axis=0), normalized.points.max(axis=0)
    np.testing.assert_allclose((lo + hi) / 2.0, 0.0, atol=1e-15)
    np.testing.assert_allclose(transform.invert(normalized.points), points, rtol=0, atol=1e-12)


def test_normalize_cloud_rejects_degenerate_clouds() -> None:
    """Empty clouds and clouds of coincident points cannot be normalized."""
    with pytest.raises(DegenerateInputError):
        normalize_cloud(PointCloud(np.zeros((0, 3))))
    with pytest.raises(DegenerateInputError):
        normalize_cloud(PointCloud(np.ones((5, 3))))


def test_sample_mesh_surface_is_reproducible_and_on_surface() -> None:
    """
    Identical seeds give identical samples; every sample lies in the square
    and carries the ``+z`` face normal.
    """
    mesh = _unit_square_mesh()
    first = sample_mesh_surface(mesh, 500, seed=3)
    second = sample_mesh_surface(mesh, 500, seed=3)

    np.testing.assert_array_equal(first.points, second.points)
    assert np.all(first.points[:, 2] == 0.0)
    assert np.all((first.points[:, :2] >= 0.0) & (first.points[:, :2] <= 1.0))
    np.testing.assert_allclose(first.normals, np.tile([0.0, 0.0, 1.0], (500, 1)))


def test_sample_mesh_surface_is_area_proportional() -> None:
    """Two disjoint faces of area 1 and 3 receive a quarter and three quarters of the samples."""
    vertices = np.array([[0.0, 0, 0], [2.0, 0, 0], [0.0, 1, 0], [10.0, 0, 0], [13.0, 0, 0], [10.0, 2, 0]])
    mesh = TriangleMesh(vertices, np.array([[0, 1, 2], [3, 4, 5]]))
    np.testing.assert_allclose(mesh.face_areas(), [1.0, 3.0])

    samples = sample_mesh_surface(mesh, 40000, seed=9)
    assert np.mean(samples.points[:, 0] >= 10.0) == pytest.approx(0.75, abs=0.01)


def test_sample_mesh_surface_rejects_zero_area() -> None:
    """A mesh whose faces all have zero area cannot be sampled."""
    flat = TriangleMesh(np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]]), np.array([[0, 1, 2]]))
    with pytest.raises(DegenerateInputError):
        sample_mesh_surface(flat, 10, seed=0)


def test_triangle_mesh_areas_and_cleaning() -> None:
    """Face areas sum to the square's area; repeated-vertex faces are dropped."""
    mesh = _unit_square_mesh()
    assert mesh.face_areas().sum() == pytest.approx(1.0)
    assert not mesh.is_empty
    assert TriangleMesh.empty().is_empty

    dirty = TriangleMesh(mesh.vertices, np.array([[0, 1, 2], [0, 0, 3]]))
    assert len(dirty.cleaned().faces) == 1

    with pytest.raises(InputError):
        TriangleMesh(mesh.vertices, np.array([[0, 1, 9]]))


def test_axis_grid_points_are_row_major() -> None:
    """The last axis varies fastest and both bounds are included."""
    grid = AxisGrid(np.array([-1.0, 0.0]), np.array([1.0, 1.0]), (3, 2))
    points = grid_points(grid)

    assert grid.num_points == 6
    np.testing.assert_allclose(grid.spacing, [1.0, 1.0])
    np.testing.assert_allclose(points[:3], [[-1.0, 0.0], [-1.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(points[-1], [1.0, 1.0])
    np.testing.assert_allclose(grid_points(grid, 2, 4), points[2:4])


def test_axis_grid_validation() -> None:
    """Inverted bounds and single-point axes are rejected."""
    with pytest.raises(ConfigError):
        AxisGrid(np.array([1.0]), np.array([0.0]), (4,))
    with pytest.raises(ConfigError):
        AxisGrid.cube(2, 1.0, 1)


# EOF
