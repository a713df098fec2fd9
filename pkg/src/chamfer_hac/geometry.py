"""Point containers and the base point-to-point metrics.

Distances are always reduced coordinate by coordinate in a fixed order
(no BLAS Gram-matrix tricks), so the value of ``d(p, q)`` is bit-identical
whether it is computed alone, as part of a row block, or inside a threaded
full matrix.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "BaseMetric",
    "Dataset",
    "point_distance",
    "point_to_cluster_distance",
    "distance_rows",
    "pairwise_distances",
    "chamfer_grid_step",
    "snap_to_grid",
]

# Scratch budget (float64 entries) for one block of distance rows.
_BLOCK_ENTRIES = 1 << 22


class BaseMetric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SQEUCLIDEAN = "sqeuclidean"

    @classmethod
    def parse(cls, value: "BaseMetric | str") -> "BaseMetric":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown metric {value!r}; expected one of "
                             f"{[m.value for m in cls]}") from None


@dataclass(frozen=True)
class Dataset:
    """Dense ``n x d`` point matrix with optional ground-truth labels.

    Points are stored as a C-contiguous float64 array; non-finite
    coordinates are rejected here once, so downstream code never checks.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    name: Optional[str] = None
    _coords: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-D array")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            bad = int(np.flatnonzero(~np.isfinite(pts).all(axis=1))[0])
            raise ValueError(f"non-finite coordinate in row {bad}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.ndim != 1 or lab.shape[0] != pts.shape[0]:
                raise ValueError(
                    f"labels must have length {pts.shape[0]}, got shape {lab.shape}")
            if lab.size and not np.issubdtype(lab.dtype, np.integer):
                if not np.all(np.equal(np.mod(lab, 1), 0)):
                    raise ValueError("labels must be integers")
            lab = lab.astype(np.int64)
            if lab.size and lab.min() < 0:
                raise ValueError("labels must be non-negative")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)
        # coordinate-major copy: column k of the points is a contiguous row
        coords = np.ascontiguousarray(pts.T)
        coords.setflags(write=False)
        object.__setattr__(self, "_coords", coords)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def k(self) -> Optional[int]:
        """Number of distinct ground-truth labels (None without labels)."""
        if self.labels is None:
            return None
        return int(np.unique(self.labels).size)

    def __len__(self):
        return self.n


def _as_dataset(data) -> Dataset:
    return data if isinstance(data, Dataset) else Dataset(np.asarray(data))


def point_distance(p: Sequence[float], q: Sequence[float],
                   metric: BaseMetric | str = BaseMetric.EUCLIDEAN) -> float:
    """Distance between two points under ``metric``.

    >>> point_distance((0, 0), (3, 4))
    5.0
    >>> point_distance((0, 0), (3, 4), "sqeuclidean")
    25.0
    """
    metric = BaseMetric.parse(metric)
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise ValueError("dimension mismatch")
    acc = 0.0
    for a, b in zip(p.tolist(), q.tolist()):
        diff = a - b
        acc += diff * diff
    if metric is BaseMetric.EUCLIDEAN:
        return math.sqrt(acc)
    return acc


def point_to_cluster_distance(p: int, cluster: Iterable[int], data,
                              metric: BaseMetric | str = BaseMetric.EUCLIDEAN) -> float:
    """``min`` over ``c`` in ``cluster`` of ``d(points[p], points[c])``."""
    ds = _as_dataset(data)
    members = np.fromiter(cluster, dtype=np.int64)
    if members.size == 0:
        raise ValueError("empty cluster")
    if members.min() < 0 or members.max() >= ds.n or not 0 <= p < ds.n:
        raise IndexError("point index out of range")
    return float(distance_rows(ds, [p], metric)[0, members].min())


def distance_rows(data, rows, metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
                  out: Optional[np.ndarray] = None,
                  grid_step: Optional[float] = None) -> np.ndarray:
    """Distances from ``points[rows]`` to every point, shape ``(len(rows), n)``.

    When ``grid_step`` is given the result is snapped to that grid (see
    :func:`snap_to_grid`).
    """
    ds = _as_dataset(data)
    metric = BaseMetric.parse(metric)
    rows = np.asarray(rows, dtype=np.int64).ravel()
    coords = ds._coords
    if out is None:
        out = np.empty((rows.size, ds.n), dtype=np.float64)
    out.fill(0.0)
    diff = np.empty_like(out)
    for k in range(ds.d):
        col = coords[k]
        np.subtract(col[rows][:, None], col[None, :], out=diff)
        np.multiply(diff, diff, out=diff)
        out += diff
    if metric is BaseMetric.EUCLIDEAN:
        np.sqrt(out, out=out)
    if grid_step is not None:
        snap_to_grid(out, grid_step)
    return out


def pairwise_distances(data, metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
                       threads: int = 1,
                       grid_step: Optional[float] = None) -> np.ndarray:
    """Full ``n x n`` distance matrix, computed in row blocks.

    Blocks are independent, so ``threads > 1`` changes wall time only;
    every entry is produced by the same arithmetic as :func:`distance_rows`.
    """
    ds = _as_dataset(data)
    n = ds.n
    result = np.empty((n, n), dtype=np.float64)
    threads = max(1, int(threads or 1))
    block = max(1, min(n, _BLOCK_ENTRIES // max(n, 1), -(-n // threads)))
    starts = list(range(0, n, block))

    def work(lo):
        hi = min(n, lo + block)
        distance_rows(ds, np.arange(lo, hi), metric, out=result[lo:hi],
                      grid_step=grid_step)

    if threads == 1 or len(starts) == 1:
        for lo in starts:
            work(lo)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    return result


def chamfer_grid_step(data, metric: BaseMetric | str = BaseMetric.EUCLIDEAN) -> float:
    """Power-of-two grid on which Chamfer sums over this dataset are exact.

    Every pairwise distance is at most ``B``, twice the largest distance to
    the centroid (squared for the squared metric). Snapping distances to
    multiples of ``2**e`` with ``n * B <= 2**(e + 50)`` makes every sum of at
    most ``n`` snapped distances an exactly representable float64, so
    Chamfer values do not depend on summation order.
    """
    ds = _as_dataset(data)
    metric = BaseMetric.parse(metric)
    centered = ds.points - ds.points.mean(axis=0)
    radius = math.sqrt(float(np.max(np.einsum("ij,ij->i", centered, centered))))
    bound = 2.0 * radius * (1.0 + 1e-6)
    if metric is BaseMetric.SQEUCLIDEAN:
        bound = bound * bound
    if not bound > 0.0:
        bound = 1.0
    exponent = math.ceil(math.log2(ds.n * bound)) - 50
    return math.ldexp(1.0, exponent)


def snap_to_grid(values: np.ndarray, step: float) -> np.ndarray:
    """Round ``values`` in place to the nearest multiple of ``step``."""
    np.multiply(values, 1.0 / step, out=values)
    np.rint(values, out=values)
    np.multiply(values, step, out=values)
    return values
