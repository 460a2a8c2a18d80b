"""
Reading and writing point clouds, meshes, and tabular results.

This module handles:

* Point clouds in whitespace-separated text (``.xyz``, ``.txt``, ``.pts``)
  and PLY. 3D PLY clouds (ASCII or binary) are read through :mod:`trimesh`;
  2D ``x``/``y`` clouds must be ASCII.
* Triangle meshes in OBJ and PLY, through :mod:`trimesh`.
* The CSV outputs of the command-line tool (contours, grid values, training
  history, metrics) and the JSON normalization transform.

Failures to read raise :class:`InputError`; failures to write raise
:class:`OutputError`.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import csv
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import numpy as np
import numpy.typing as npt
import trimesh

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .exceptions import (
    InputError,
    OutputError,
)
from .geometry import (
    NormTransform,
    PointCloud,
    TriangleMesh,
)

logger = logging.getLogger(__name__)

TEXT_CLOUD_SUFFIXES = (".xyz", ".txt", ".pts")
MESH_SUFFIXES = (".obj", ".ply")

HISTORY_COLUMNS = ("iter", "lr", "ma", "dirichlet", "neumann", "nonmanifold", "total", "wall_ms")
METRIC_COLUMNS = ("shape", "cd_x1e3", "nc", "fscore", "tau", "n_samples", "seed")


# ---------------------------------------------------------------------------
# Point clouds
# ---------------------------------------------------------------------------


def _cloud_from_columns(data: npt.NDArray[np.float64], path: Path) -> PointCloud:
    """Split a ``(N, C)`` table into points and optional normals."""
    columns = data.shape[1]
    layouts = {2: (2, False), 3: (3, False), 4: (2, True), 6: (3, True)}
    if columns not in layouts:
        raise InputError(f"{path}: expected 2, 3, 4 or 6 columns per point, got {columns}")
    dim, with_normals = layouts[columns]
    points = data[:, :dim]
    if not with_normals:
        return PointCloud(points)

    normals = data[:, dim : 2 * dim]
    lengths = np.linalg.norm(normals, axis=1, keepdims=True)
    if np.any(lengths == 0) or not np.all(np.isfinite(lengths)):
        raise InputError(f"{path}: zero-length or invalid normals")
    return PointCloud(points, normals / lengths)


def _ply_header(path: Path) -> tuple[str, dict[str, int], list[str]]:
    """
    Scan a PLY header.

    Returns
    -------
    (format, counts, vertex_properties)
        The format string, the declared count of every element, and the
        property names of the ``vertex`` element in file order.
    """
    fmt, current = "", ""
    counts: dict[str, int] = {}
    names: list[str] = []
    try:
        with path.open("rb") as handle:
            if handle.readline().strip() != b"ply":
                raise InputError(f"{path} is not a PLY file")
            for line in handle:
                parts = line.decode("ascii", errors="replace").split()
                if not parts:
                    continue
                if parts[0] == "end_header":
                    return fmt, counts, names
                if parts[0] == "format" and len(parts) > 1:
                    fmt = parts[1]
                elif parts[0] == "element" and len(parts) == 3:
                    current = parts[1]
                    counts[current] = int(parts[2])
                elif parts[0] == "property" and current == "vertex":
                    names.append(parts[-1])
    except OSError as exc:
        raise InputError(f"Unable to read {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"{path}: malformed PLY header ({exc})") from exc
    raise InputError(f"{path}: PLY header has no end_header")


def ply_has_faces(path: Path) -> bool:
    """Whether a PLY file declares a non-empty ``face`` element."""
    _, counts, _ = _ply_header(path)
    return counts.get("face", 0) > 0


def _read_planar_ply(path: Path, fmt: str, count: int, names: list[str]) -> PointCloud:
    # trimesh needs a z property, so x/y-only clouds are read here (ASCII only).
    if fmt != "ascii":
        raise InputError(f"{path}: 2D PLY clouds must use the ascii format")
    body = path.read_text(encoding="ascii").split("end_header", 1)[1].splitlines()[1:]
    rows = [row for row in body if row.strip()][:count]
    if len(rows) < count:
        raise InputError(f"{path}: expected {count} vertices, found {len(rows)}")
    table = np.loadtxt(rows, dtype=np.float64, ndmin=2) if count else np.zeros((0, len(names)))
    selected = ["x", "y"] + (["nx", "ny"] if {"nx", "ny"} <= set(names) else [])
    return _cloud_from_columns(table[:, [names.index(c) for c in selected]], path)


def _vertex_columns(loaded: Any) -> Any:
    """Raw per-vertex PLY properties that trimesh keeps in its metadata."""
    raw = loaded.metadata.get("_ply_raw") or {}
    return raw.get("vertex", {}).get("data", {})


def _read_ply_cloud(path: Path) -> PointCloud:
    fmt, counts, names = _ply_header(path)
    if not {"x", "y"} <= set(names):
        raise InputError(f"{path}: PLY vertices need x, y and optionally z")
    if "z" not in names:
        return _read_planar_ply(path, fmt, counts.get("vertex", 0), names)
    if counts.get("vertex", 0) == 0:
        return PointCloud(np.zeros((0, 3)))

    try:
        loaded = trimesh.load(path, file_type="ply", process=False)
    except Exception as exc:  # noqa: BLE001 - trimesh raises a wide range of parser errors
        raise InputError(f"Unable to read PLY cloud {path}: {exc}") from exc
    points = np.asarray(loaded.vertices, dtype=np.float64).reshape(-1, 3)
    if len(points) != counts.get("vertex", 0):
        raise InputError(f"{path}: expected {counts.get('vertex', 0)} vertices, read {len(points)}")
    data = _vertex_columns(loaded)
    if {"nx", "ny", "nz"} <= set(names) and len(points):
        normals = np.stack([np.asarray(data[c], dtype=np.float64).reshape(-1) for c in ("nx", "ny", "nz")], axis=1)
        return _cloud_from_columns(np.hstack([points, normals]), path)
    return PointCloud(points)


def read_point_cloud(path: Path) -> PointCloud:
    """
    Load a point cloud, with normals when the file provides them.

    Text files hold one point per line with 2, 3, 4 (2D with normals) or 6
    (3D with normals) columns. PLY files are read from their vertex element.
    Normals are renormalized to unit length.

    Parameters
    ----------
    path:
        Input file.

    Returns
    -------
    PointCloud
        The loaded cloud.

    Raises
    ------
    InputError
        If the file is missing, malformed, or of an unknown type.
    """
    suffix = path.suffix.lower()
    try:
        if suffix == ".ply":
            cloud = _read_ply_cloud(path)
        elif suffix in TEXT_CLOUD_SUFFIXES:
            cloud = _cloud_from_columns(np.loadtxt(path, dtype=np.float64, ndmin=2, comments="#"), path)
        else:
            raise InputError(f"Unsupported point-cloud file type {suffix!r} ({path})")
    except OSError as exc:
        raise InputError(f"Unable to read point cloud {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"Malformed point cloud {path}: {exc}") from exc
    logger.debug("Read %d points (%dD, normals=%s) from %s", len(cloud), cloud.dim, cloud.has_normals, path)
    return cloud


def write_point_cloud(cloud: PointCloud, path: Path) -> None:
    """
    Write a cloud as text (``.xyz``/``.txt``/``.pts``) or ASCII PLY.

    Raises
    ------
    OutputError
        If the file cannot be written.
    """
    table = cloud.points if cloud.normals is None else np.hstack([cloud.points, cloud.normals])
    try:
        if path.suffix.lower() == ".ply":
            axes = ["x", "y", "z"][: cloud.dim]
            names = axes + ([f"n{a}" for a in axes] if cloud.has_normals else [])
            header = "\n".join(
                [
                    "ply",
                    "format ascii 1.0",
                    f"element vertex {len(cloud)}",
                    *(f"property double {name}" for name in names),
                    "end_header",
                ]
            )
            np.savetxt(path, table, fmt="%.17g", header=header, comments="")
        else:
            np.savetxt(path, table, fmt="%.17g")
    except OSError as exc:
        raise OutputError(f"Unable to write point cloud {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Meshes
# ---------------------------------------------------------------------------


def read_mesh(path: Path) -> TriangleMesh:
    """
    Load a triangle mesh from OBJ or PLY without any vertex merging.

    Raises
    ------
    InputError
        If the file is missing or does not hold a triangle mesh.
    """
    if path.suffix.lower() not in MESH_SUFFIXES:
        raise InputError(f"Unsupported mesh file type {path.suffix!r} ({path})")
    if not path.is_file():
        raise InputError(f"Mesh file {path} does not exist")
    try:
        loaded = trimesh.load(path, force="mesh", process=False)
    except Exception as exc:  # noqa: BLE001 - trimesh raises a wide range of parser errors
        raise InputError(f"Unable to read mesh {path}: {exc}") from exc
    return TriangleMesh(np.asarray(loaded.vertices, dtype=np.float64), np.asarray(loaded.faces, dtype=np.int64))


def write_mesh(mesh: TriangleMesh, path: Path) -> None:
    """
    Write a mesh as OBJ or ASCII PLY.

    Raises
    ------
    OutputError
        If the suffix is unsupported or the file cannot be written.
    """
    suffix = path.suffix.lower()
    if suffix not in MESH_SUFFIXES:
        raise OutputError(f"Unsupported mesh file type {suffix!r} ({path})")
    out = trimesh.Trimesh(vertices=mesh.vertices, faces=mesh.faces, process=False)
    try:
        if suffix == ".ply":
            out.export(path, encoding="ascii")
        else:
            out.export(path)
    except OSError as exc:
        raise OutputError(f"Unable to write mesh {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def write_rows_csv(path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> None:
    """
    Write dict rows to CSV with a fixed column order.

    Raises
    ------
    OutputError
        If the file cannot be written.
    """
    try:
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow({key: _format_cell(value) for key, value in row.items()})
    except OSError as exc:
        raise OutputError(f"Unable to write {path}: {exc}") from exc


def _format_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(float(value))
    return "" if value is None else value


def write_history_csv(records: Iterable[Mapping[str, Any]], path: Path) -> None:
    """Write the per-iteration training history (``iter,lr,ma,...,wall_ms``)."""
    write_rows_csv(path, HISTORY_COLUMNS, records)


def write_metric_csv(rows: Iterable[Mapping[str, Any]], path: Path) -> None:
    """Write evaluation rows (``shape,cd_x1e3,nc,fscore,tau,n_samples,seed``)."""
    write_rows_csv(path, METRIC_COLUMNS, rows)


def write_contours_csv(components: Sequence[npt.NDArray[np.float64]], path: Path) -> None:
    """
    Write 2D polyline components as ``component_id,x,y`` rows.

    Raises
    ------
    OutputError
        If the file cannot be written.
    """
    rows = [{"component_id": cid, "x": float(x), "y": float(y)} for cid, comp in enumerate(components) for x, y in comp]
    write_rows_csv(path, ("component_id", "x", "y"), rows)


def read_contours_csv(path: Path) -> list[npt.NDArray[np.float64]]:
    """
    Read ``component_id,x,y`` rows back into per-component vertex arrays.

    Raises
    ------
    InputError
        If the file is missing or malformed.
    """
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise InputError(f"Unable to read contours {path}: {exc}") from exc
    if table.size == 0:
        return []
    if table.shape[1] != 3:
        raise InputError(f"{path}: expected component_id,x,y columns")
    ids = table[:, 0].astype(np.int64)
    return [table[ids == cid, 1:] for cid in np.unique(ids)]


def write_grid_csv(values: npt.NDArray[np.float64], path: Path) -> None:
    """
    Write a dense grid of field values as ``i,j[,k],value`` rows (row-major).

    Raises
    ------
    OutputError
        If the file cannot be written.
    """
    index = np.indices(values.shape).reshape(values.ndim, -1).T
    header = ",".join(["i", "j", "k"][: values.ndim] + ["value"])
    table = np.column_stack([index, values.reshape(-1)])
    fmt = ["%d"] * values.ndim + ["%.17g"]
    try:
        np.savetxt(path, table, fmt=fmt, delimiter=",", header=header, comments="")
    except OSError as exc:
        raise OutputError(f"Unable to write grid values {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Normalization transform
# ---------------------------------------------------------------------------


def write_transform(transform: NormTransform, path: Path) -> None:
    """Store a normalization transform as JSON (``center``, ``scale``)."""
    payload = {"center": transform.center.tolist(), "scale": transform.scale}
    try:
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"Unable to write transform {path}: {exc}") from exc


def read_transform(path: Path) -> NormTransform:
    """
    Load a transform written by :func:`write_transform`.

    Raises
    ------
    InputError
        If the file is missing or malformed.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return NormTransform(center=np.asarray(data["center"], dtype=np.float64), scale=float(data["scale"]))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"Unable to read transform {path}: {exc}") from exc


# EOF
