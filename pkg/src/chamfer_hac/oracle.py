"""Brute-force reference HAC.

Every round recomputes the linkage between every pair of active clusters
from their member lists and picks the best ordered pair directly. No store
and no recurrence is shared with the fast backends, so a bug in their update
logic cannot hide behind the oracle.

Selection order: smallest value, then smallest source id, then the largest
target id (the same rule the fast backends implement through neighbour
pointers).
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .chamfer import ChamferVariant
from .classical import ClassicalKind
from .dendrogram import Dendrogram, MergeRecord
from .geometry import BaseMetric, Dataset, _as_dataset, chamfer_grid_step, pairwise_distances

__all__ = ["DEFAULT_CAP", "oracle_hac", "oracle_linkage_matrix", "parse_linkage"]

DEFAULT_CAP = 512


def parse_linkage(linkage):
    """Map a linkage name to a :class:`ChamferVariant` or :class:`ClassicalKind`."""
    if isinstance(linkage, (ChamferVariant, ClassicalKind)):
        return linkage
    try:
        return ChamferVariant.parse(linkage)
    except ValueError:
        pass
    try:
        return ClassicalKind.parse(linkage)
    except ValueError:
        raise ValueError(f"unknown linkage {linkage!r}") from None


def oracle_linkage_matrix(D: np.ndarray, points: np.ndarray, clusters, linkage) -> np.ndarray:
    """``k x k`` matrix of ``L(C_i, C_j)`` for the member lists ``clusters``.

    ``D`` is the point distance matrix, grid-rounded for Chamfer variants.
    Centroid and Ward read ``points`` instead. The diagonal is ``inf``.
    """
    sizes = np.array([len(c) for c in clusters], dtype=np.float64)
    perm = np.concatenate([np.asarray(c, dtype=np.int64) for c in clusters])
    starts = np.concatenate([[0], np.cumsum(sizes[:-1])]).astype(np.int64)
    if isinstance(linkage, ChamferVariant):
        block = D[np.ix_(perm, perm)]
        to_cluster = np.minimum.reduceat(block, starts, axis=1)
        ch = np.add.reduceat(to_cluster, starts, axis=0)
        if linkage is ChamferVariant.CH:
            val = ch
        elif linkage is ChamferVariant.CHN:
            val = ch / sizes[:, None]
        elif linkage is ChamferVariant.CHS:
            val = ch + ch.T
        else:
            norm = ch / sizes[:, None]
            val = norm + norm.T
    elif linkage in (ClassicalKind.CENTROID, ClassicalKind.WARD):
        cent = np.add.reduceat(points[perm], starts, axis=0) / sizes[:, None]
        diff = cent[:, None, :] - cent[None, :, :]
        val = np.sqrt(np.sum(diff * diff, axis=2))
        if linkage is ClassicalKind.WARD:
            val = np.sqrt(2.0 * np.outer(sizes, sizes) / np.add.outer(sizes, sizes)) * val
    else:
        block = D[np.ix_(perm, perm)]
        if linkage is ClassicalKind.SINGLE:
            val = np.minimum.reduceat(np.minimum.reduceat(block, starts, axis=1),
                                      starts, axis=0)
        elif linkage is ClassicalKind.COMPLETE:
            val = np.maximum.reduceat(np.maximum.reduceat(block, starts, axis=1),
                                      starts, axis=0)
        else:
            val = np.add.reduceat(np.add.reduceat(block, starts, axis=1),
                                  starts, axis=0) / np.outer(sizes, sizes)
    val = np.array(val, dtype=np.float64)
    np.fill_diagonal(val, np.inf)
    return val


def oracle_hac(data, linkage, metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
               cap: Optional[int] = DEFAULT_CAP) -> Dendrogram:
    """Naive HAC that re-evaluates every cluster pair each round.

    Parameters
    ----------
    data : Dataset or array-like
    linkage : str, ChamferVariant or ClassicalKind
    metric : BaseMetric or str
    cap : int or None
        Largest accepted ``n``; ``None`` disables the check.
    """
    ds = _as_dataset(data)
    kind = parse_linkage(linkage)
    metric = BaseMetric.parse(metric)
    n = ds.n
    if cap is not None and n > cap:
        raise ValueError(f"oracle cap exceeded: n={n} > {cap}")
    if isinstance(kind, ClassicalKind) and kind in (ClassicalKind.CENTROID, ClassicalKind.WARD) \
            and metric is not BaseMetric.EUCLIDEAN:
        raise ValueError(f"{kind.value} linkage requires the euclidean metric")
    step = chamfer_grid_step(ds, metric) if isinstance(kind, ChamferVariant) else None
    D = pairwise_distances(ds, metric, grid_step=step)
    ids = list(range(n))
    clusters = [[p] for p in range(n)]
    merges = []
    next_id = n
    while len(ids) > 1:
        val = oracle_linkage_matrix(D, ds.points, clusters, kind)
        best = val.min()
        rows, cols = np.nonzero(val == best)
        id_arr = np.asarray(ids)
        # smallest source id, then largest target id
        order = np.lexsort((-id_arr[cols], id_arr[rows]))
        i, j = int(rows[order[0]]), int(cols[order[0]])
        ci, cj = clusters[i], clusters[j]
        key_i = (-len(ci), ids[i])
        key_j = (-len(cj), ids[j])
        left, right = (i, j) if key_i <= key_j else (j, i)
        merges.append(MergeRecord(ids[left], ids[right], float(best), len(ci) + len(cj)))
        merged = sorted(ci + cj)
        for k in sorted((i, j), reverse=True):
            del ids[k]
            del clusters[k]
        ids.append(next_id)
        clusters.append(merged)
        next_id += 1
    return Dendrogram(n, merges)
