"""
Tests for point-cloud, mesh, CSV, and transform file handling.

This module verifies that:

* Text and PLY point clouds load with and without normals, and normals are
  renormalized; malformed files raise :class:`InputError`.
* Written clouds and meshes load back exactly.
* CSV writers use the documented columns and full-precision floats.
"""

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import csv
from pathlib import Path

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import pytest

# ---------------------------------------------------------------------------
# Internal file helpers
# ---------------------------------------------------------------------------
from lupaxa.s2df.exceptions import InputError, OutputError  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.fileio import (  # pyright: ignore[reportMissingImports]
    HISTORY_COLUMNS,
    METRIC_COLUMNS,
    ply_has_faces,
    read_contours_csv,
    read_mesh,
    read_point_cloud,
    read_transform,
    write_contours_csv,
    write_grid_csv,
    write_history_csv,
    write_mesh,
    write_metric_csv,
    write_point_cloud,
    write_transform,
)
from lupaxa.s2df.geometry import NormTransform, PointCloud, TriangleMesh  # pyright: ignore[reportMissingImports]


def _read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def test_read_text_clouds_of_every_layout(tmp_path: Path) -> None:
    """2, 3, 4, and 6 columns map to 2D/3D points with or without normals."""
    cases = {
        "a.xyz": ("0 0\n1 2\n", 2, False),
        "b.txt": ("# header\n0 0 0\n1 2 3\n", 3, False),
        "c.pts": ("0 0 0 2\n1 1 3 0\n", 2, True),
        "d.xyz": ("0 0 0 0 0 1\n1 1 1 0 2 0\n", 3, True),
    }
    for name, (text, dim, has_normals) in cases.items():
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        cloud = read_point_cloud(path)
        assert cloud.dim == dim
        assert len(cloud) == 2
        assert cloud.has_normals is has_normals
        if has_normals:
            np.testing.assert_allclose(np.linalg.norm(cloud.normals, axis=1), 1.0)


def test_read_point_cloud_rejects_bad_files(tmp_path: Path) -> None:
    """Wrong column counts, zero normals, unknown suffixes, and missing files fail."""
    bad = {"five.xyz": "0 0 0 0 0\n", "zero.xyz": "0 0 0 0 0 0\n", "text.xyz": "a b c\n", "cloud.las": "0 0 0\n"}
    for name, text in bad.items():
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        with pytest.raises(InputError):
            read_point_cloud(path)
    with pytest.raises(InputError):
        read_point_cloud(tmp_path / "missing.xyz")


@pytest.mark.parametrize("suffix", [".xyz", ".ply"])
def test_point_cloud_write_then_read_is_exact(tmp_path: Path, suffix: str) -> None:
    """Full-precision text keeps coordinates bit-exact; normals survive."""
    rng = np.random.default_rng(0)
    points = rng.normal(size=(20, 3))
    normals = rng.normal(size=(20, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    path = tmp_path / f"cloud{suffix}"

    write_point_cloud(PointCloud(points, normals), path)
    loaded = read_point_cloud(path)

    np.testing.assert_array_equal(loaded.points, points)
    np.testing.assert_allclose(loaded.normals, normals, rtol=0, atol=1e-15)


def test_read_binary_ply_cloud(tmp_path: Path) -> None:
    """Binary little-endian PLY vertices with float properties are decoded."""
    header = b"ply\nformat binary_little_endian 1.0\ncomment test\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n"
    data = np.array([[0.5, -0.25, 1.0], [2.0, 0.0, -1.0]], dtype="<f4")
    path = tmp_path / "binary.ply"
    path.write_bytes(header + data.tobytes())

    cloud = read_point_cloud(path)
    np.testing.assert_array_equal(cloud.points, data.astype(np.float64))
    assert not cloud.has_normals
    assert not ply_has_faces(path)

    path.write_bytes(header + data.tobytes()[:-4])
    with pytest.raises(InputError):
        read_point_cloud(path)


def test_read_binary_ply_cloud_with_normals(tmp_path: Path) -> None:
    """Binary big-endian vertices with double normals keep both, normals renormalized."""
    header = (
        b"ply\nformat binary_big_endian 1.0\nelement vertex 2\n"
        b"property double x\nproperty double y\nproperty double z\n"
        b"property double nx\nproperty double ny\nproperty double nz\nend_header\n"
    )
    data = np.array([[0.1, 0.2, 0.3, 0.0, 0.0, 2.0], [-1.0, 0.5, 0.25, 3.0, 4.0, 0.0]], dtype=">f8")
    path = tmp_path / "normals.ply"
    path.write_bytes(header + data.tobytes())

    cloud = read_point_cloud(path)
    np.testing.assert_array_equal(cloud.points, data[:, :3].astype(np.float64))
    np.testing.assert_allclose(cloud.normals, [[0.0, 0.0, 1.0], [0.6, 0.8, 0.0]], rtol=0, atol=1e-15)


def test_planar_ply_clouds(tmp_path: Path) -> None:
    """2D x/y PLY clouds round-trip as ASCII; binary 2D files are refused."""
    points = np.array([[0.125, -0.5], [1.0 / 3.0, 2.0], [0.0, 0.75]])
    normals = np.array([[1.0, 0.0], [0.0, -1.0], [0.6, 0.8]])
    path = tmp_path / "planar.ply"
    write_point_cloud(PointCloud(points, normals), path)

    loaded = read_point_cloud(path)
    assert loaded.dim == 2
    np.testing.assert_array_equal(loaded.points, points)
    np.testing.assert_allclose(loaded.normals, normals, rtol=0, atol=1e-15)

    binary = tmp_path / "planar_binary.ply"
    binary.write_bytes(b"ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n" + np.zeros(2, dtype="<f4").tobytes())
    with pytest.raises(InputError):
        read_point_cloud(binary)


def test_malformed_ply_headers_raise_input_error(tmp_path: Path) -> None:
    """Bad element counts, missing end_header, and non-PLY files are input errors."""
    headers = {
        "count.ply": b"ply\nformat ascii 1.0\nelement vertex many\nproperty float x\nend_header\n",
        "open.ply": b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n",
        "other.ply": b"solid cube\n",
    }
    for name, text in headers.items():
        path = tmp_path / name
        path.write_bytes(text)
        with pytest.raises(InputError):
            ply_has_faces(path)
        with pytest.raises(InputError):
            read_point_cloud(path)


def test_mesh_write_then_read(tmp_path: Path) -> None:
    """Meshes round-trip through PLY and OBJ without vertex merging."""
    vertices = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0], [0.0, 0, 1]])
    faces = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    mesh = TriangleMesh(vertices, faces)

    for suffix in (".ply", ".obj"):
        path = tmp_path / f"mesh{suffix}"
        write_mesh(mesh, path)
        loaded = read_mesh(path)
        np.testing.assert_allclose(loaded.vertices, vertices)
        np.testing.assert_array_equal(loaded.faces, faces)
    assert ply_has_faces(tmp_path / "mesh.ply")

    with pytest.raises(OutputError):
        write_mesh(mesh, tmp_path / "mesh.stl")
    with pytest.raises(InputError):
        read_mesh(tmp_path / "missing.obj")


def test_history_and_metric_csv_columns(tmp_path: Path) -> None:
    """CSV headers follow the documented column order; floats keep full precision."""
    history = tmp_path / "history.csv"
    write_history_csv([{"iter": 0, "lr": 3e-4, "ma": 0.1, "dirichlet": 1 / 3, "neumann": 0.0, "nonmanifold": 1.0, "total": 2.5, "wall_ms": 0.0}], history)
    rows = _read_csv(history)
    assert tuple(rows[0]) == HISTORY_COLUMNS
    assert float(rows[0]["dirichlet"]) == 1 / 3

    metrics = tmp_path / "metrics.csv"
    write_metric_csv([{"shape": "circle", "cd_x1e3": 1.5, "nc": None, "fscore": 99.0, "tau": 0.008, "n_samples": 10, "seed": 0}], metrics)
    rows = _read_csv(metrics)
    assert tuple(rows[0]) == METRIC_COLUMNS
    assert rows[0]["nc"] == ""
    assert rows[0]["n_samples"] == "10"


def test_contours_csv_round_trip(tmp_path: Path) -> None:
    """Components keep their order and vertices."""
    components = [np.array([[0.0, 0.0], [1.0, 0.5]]), np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])]
    path = tmp_path / "contours.csv"
    write_contours_csv(components, path)

    assert _read_csv(path)[0].keys() == {"component_id", "x", "y"}
    loaded = read_contours_csv(path)
    assert len(loaded) == 2
    for a, b in zip(loaded, components, strict=True):
        np.testing.assert_array_equal(a, b)


def test_grid_csv_layout(tmp_path: Path) -> None:
    """Grid rows are ``i,j,value`` in row-major order."""
    path = tmp_path / "grid.csv"
    write_grid_csv(np.arange(6, dtype=np.float64).reshape(2, 3), path)
    rows = _read_csv(path)
    assert list(rows[0]) == ["i", "j", "value"]
    assert [(r["i"], r["j"], float(r["value"])) for r in rows[:4]] == [("0", "0", 0.0), ("0", "1", 1.0), ("0", "2", 2.0), ("1", "0", 3.0)]


def test_transform_round_trip(tmp_path: Path) -> None:
    """Transforms are stored as JSON and load back exactly."""
    transform = NormTransform(center=np.array([1.5, -2.0, 0.25]), scale=3.75)
    path = tmp_path / "transform.json"
    write_transform(transform, path)
    loaded = read_transform(path)
    np.testing.assert_array_equal(loaded.center, transform.center)
    assert loaded.scale == transform.scale

    path.write_text("{}", encoding="utf-8")
    with pytest.raises(InputError):
        read_transform(path)


# EOF
