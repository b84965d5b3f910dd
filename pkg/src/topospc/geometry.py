"""Point clouds, pairwise Euclidean distances, and XYZ/CSV file I/O."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ParseError, ValidationError

__all__ = [
    "PointCloud",
    "DistanceMatrix",
    "check_points",
    "pairwise_distances",
    "load_pointcloud",
    "save_pointcloud",
]


def check_points(points, *, name: str = "points") -> np.ndarray:
    """Validate and return an (n, 3) float64 coordinate array.

    Accepts any array-like of shape (n, 3) with n >= 1 and all entries
    finite. Raises ValidationError otherwise.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError(f"{name} must have shape (n, 3), got {arr.shape}")
    if arr.shape[0] < 1:
        raise ValidationError(f"{name} must contain at least one point")
    if not np.isfinite(arr).all():
        bad = int(np.flatnonzero(~np.isfinite(arr).all(axis=1))[0])
        raise ValidationError(f"{name} contains a non-finite coordinate at row {bad}")
    return arr


@dataclass(frozen=True)
class PointCloud:
    """An ordered set of 3D points, optionally tagged with a label."""

    points: np.ndarray
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", check_points(self.points))
        self.points.setflags(write=False)

    def __len__(self) -> int:
        return self.points.shape[0]

    def translated(self, offset) -> "PointCloud":
        return PointCloud(self.points + np.asarray(offset, dtype=np.float64), self.label)

    def transformed(self, rotation, offset=(0.0, 0.0, 0.0)) -> "PointCloud":
        """Apply a rigid motion: x -> R x + t."""
        R = np.asarray(rotation, dtype=np.float64)
        return PointCloud(self.points @ R.T + np.asarray(offset, dtype=np.float64), self.label)


@dataclass(frozen=True)
class DistanceMatrix:
    """Full symmetric matrix of Euclidean distances, zero diagonal."""

    entries: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"distance matrix must be square, got {arr.shape}")
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "n", arr.shape[0])
        arr.setflags(write=False)

    def diameter(self) -> float:
        return float(self.entries.max())


def pairwise_distances(cloud: PointCloud | np.ndarray) -> DistanceMatrix:
    """Full Euclidean distance matrix of a point cloud."""
    pts = cloud.points if isinstance(cloud, PointCloud) else check_points(cloud)
    if pts.shape[0] == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    return DistanceMatrix(squareform(pdist(pts)))


def _parse_triple(raw: str, sep: str | None, path, lineno: int) -> tuple[float, float, float]:
    parts = raw.split(sep) if sep else raw.split()
    parts = [p for p in parts if p != ""]
    if len(parts) != 3:
        raise ParseError(path, lineno, f"expected 3 coordinates, got {len(parts)}")
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError as exc:
        raise ParseError(path, lineno, str(exc)) from None
    return x, y, z


def load_pointcloud(path, format: str | None = None, label: str | None = None) -> PointCloud:
    """Read a point cloud from an XYZ (whitespace) or CSV (comma) file.

    Lines starting with '#' are comments. A CSV header row (non-numeric
    first line) is skipped. The format is inferred from the extension
    when not given.
    """
    fmt = _resolve_format(path, format)
    sep = "," if fmt == "csv" else None
    rows: list[tuple[float, float, float]] = []
    saw_data_line = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if fmt == "csv" and not saw_data_line:
                saw_data_line = True
                try:
                    rows.append(_parse_triple(stripped, sep, path, lineno))
                except ParseError:
                    pass  # optional header row
                continue
            saw_data_line = True
            rows.append(_parse_triple(stripped, sep, path, lineno))
    if not rows:
        raise ParseError(path, 0, "file contains no points")
    if label is None:
        label = os.path.splitext(os.path.basename(str(path)))[0]
    return PointCloud(np.array(rows, dtype=np.float64), label)


def save_pointcloud(cloud: PointCloud, path, format: str | None = None) -> None:
    """Write a point cloud as XYZ or CSV; inverse of load_pointcloud."""
    fmt = _resolve_format(path, format)
    sep = "," if fmt == "csv" else " "
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "csv":
            fh.write("x,y,z\n")
        for x, y, z in cloud.points:
            fh.write(f"{float(x)!r}{sep}{float(y)!r}{sep}{float(z)!r}\n")


def _resolve_format(path, format: str | None) -> str:
    if format is not None:
        fmt = format.lower()
    else:
        ext = os.path.splitext(str(path))[1].lower()
        fmt = "csv" if ext == ".csv" else "xyz"
    if fmt not in ("xyz", "csv"):
        raise ValidationError(f"unknown point-cloud format {format!r} (use 'xyz' or 'csv')")
    return fmt
