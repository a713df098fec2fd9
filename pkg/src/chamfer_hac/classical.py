"""Classical baseline linkages: single, complete, average, centroid, Ward.

All five run in the nearest-neighbour loop with one minimum-tracking tree
per cluster (:class:`~chamfer_hac.minmap.MinTreeBank`), so neighbour
pointers stay exact for the non-reducible centroid linkage too. Merged
distances come from the Lance-Williams recurrences.

Centroid and Ward work on squared Euclidean values internally and report
square-rooted costs. The Ward cost is
``sqrt(2 |A| |B| / (|A| + |B|)) * ||mu_A - mu_B||``, the convention used by
scipy and fastcluster.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .engine import ClusterState, LinkageBackend
from .geometry import BaseMetric, Dataset, _as_dataset, distance_rows, pairwise_distances
from .minmap import MinTreeBank

__all__ = [
    "ClassicalKind",
    "LanceWilliamsCoefficients",
    "LANCE_WILLIAMS",
    "lance_williams_update",
    "classical_value",
    "ClassicalBackend",
]


class ClassicalKind(str, enum.Enum):
    SINGLE = "single"
    COMPLETE = "complete"
    AVERAGE = "average"
    CENTROID = "centroid"
    WARD = "ward"

    @classmethod
    def parse(cls, value: "ClassicalKind | str") -> "ClassicalKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown classical linkage {value!r}") from None

    @property
    def squared(self) -> bool:
        """Whether the recurrence runs on squared Euclidean values."""
        return self in (ClassicalKind.CENTROID, ClassicalKind.WARD)


@dataclass(frozen=True)
class LanceWilliamsCoefficients:
    """``d(A u B, C) = aA d(A,C) + aB d(B,C) + beta d(A,B) + gamma |d(A,C) - d(B,C)|``.

    Each coefficient is a function of the sizes ``(na, nb, nc)``.
    """

    alpha_a: Callable
    alpha_b: Callable
    beta: Callable
    gamma: Callable


LANCE_WILLIAMS = {
    ClassicalKind.SINGLE: LanceWilliamsCoefficients(
        lambda na, nb, nc: 0.5, lambda na, nb, nc: 0.5,
        lambda na, nb, nc: 0.0, lambda na, nb, nc: -0.5),
    ClassicalKind.COMPLETE: LanceWilliamsCoefficients(
        lambda na, nb, nc: 0.5, lambda na, nb, nc: 0.5,
        lambda na, nb, nc: 0.0, lambda na, nb, nc: 0.5),
    ClassicalKind.AVERAGE: LanceWilliamsCoefficients(
        lambda na, nb, nc: na / (na + nb), lambda na, nb, nc: nb / (na + nb),
        lambda na, nb, nc: 0.0, lambda na, nb, nc: 0.0),
    ClassicalKind.CENTROID: LanceWilliamsCoefficients(
        lambda na, nb, nc: na / (na + nb), lambda na, nb, nc: nb / (na + nb),
        lambda na, nb, nc: -na * nb / (na + nb) ** 2, lambda na, nb, nc: 0.0),
    ClassicalKind.WARD: LanceWilliamsCoefficients(
        lambda na, nb, nc: (na + nc) / (na + nb + nc),
        lambda na, nb, nc: (nb + nc) / (na + nb + nc),
        lambda na, nb, nc: -nc / (na + nb + nc), lambda na, nb, nc: 0.0),
}


def lance_williams_update(kind, d_ac, d_bc, d_ab, na, nb, nc):
    """Distance from ``A u B`` to ``C`` (arrays broadcast).

    Centroid and Ward expect and return squared values. Single and complete
    use an exact ``min``/``max`` instead of the equivalent coefficient form.
    """
    kind = ClassicalKind.parse(kind)
    if kind is ClassicalKind.SINGLE:
        return np.minimum(d_ac, d_bc)
    if kind is ClassicalKind.COMPLETE:
        return np.maximum(d_ac, d_bc)
    if kind is ClassicalKind.AVERAGE:
        return (na * d_ac + nb * d_bc) / (na + nb)
    if kind is ClassicalKind.CENTROID:
        tot = na + nb
        val = (na * d_ac + nb * d_bc) / tot - (na * nb) * d_ab / (tot * tot)
    else:
        val = ((na + nc) * d_ac + (nb + nc) * d_bc - nc * d_ab) / (na + nb + nc)
    return np.maximum(val, 0.0)


def _check_metric(kind: ClassicalKind, metric: BaseMetric):
    if kind.squared and metric is not BaseMetric.EUCLIDEAN:
        raise ValueError(f"{kind.value} linkage requires the euclidean metric")


def classical_value(A: Iterable[int], B: Iterable[int], kind, data=None,
                    metric: BaseMetric | str = BaseMetric.EUCLIDEAN) -> float:
    """Direct-definition linkage value between point-index sets ``A`` and ``B``.

    Examples
    --------
    >>> pts = [[0.0], [1.0], [3.0]]
    >>> classical_value([0, 1], [2], "average", pts)
    2.5
    >>> round(classical_value([0, 1], [2], "ward", pts), 5)
    2.88675
    """
    ds = _as_dataset(data)
    kind = ClassicalKind.parse(kind)
    metric = BaseMetric.parse(metric)
    _check_metric(kind, metric)
    a = np.fromiter(A, dtype=np.int64)
    b = np.fromiter(B, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise ValueError("empty cluster")
    if kind.squared:
        diff = ds.points[a].mean(axis=0) - ds.points[b].mean(axis=0)
        dist = float(np.sqrt(np.dot(diff, diff)))
        if kind is ClassicalKind.CENTROID:
            return dist
        return float(np.sqrt(2.0 * a.size * b.size / (a.size + b.size))) * dist
    block = distance_rows(ds, a, metric)[:, b]
    if kind is ClassicalKind.SINGLE:
        return float(block.min())
    if kind is ClassicalKind.COMPLETE:
        return float(block.max())
    return float(block.sum() / (a.size * b.size))


class ClassicalBackend(LinkageBackend):
    """Lance-Williams backend with per-cluster minimum tracking.

    Parameters
    ----------
    kind : ClassicalKind or str
    metric : BaseMetric or str
        Centroid and Ward accept only ``euclidean``.
    threads : int
        Workers for the initial distance matrix.
    """

    def __init__(self, kind, metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
                 threads: int = 1):
        super().__init__()
        self.kind = ClassicalKind.parse(kind)
        self.metric = BaseMetric.parse(metric)
        _check_metric(self.kind, self.metric)
        self.threads = threads
        self.name = self.kind.value

    def init(self, ds: Dataset) -> ClusterState:
        n = ds.n
        self.n = n
        base = BaseMetric.SQEUCLIDEAN if self.kind.squared else self.metric
        dist = pairwise_distances(ds, base, threads=self.threads)
        np.fill_diagonal(dist, np.inf)
        state = ClusterState.singletons(n)
        self.state = state
        self.bank = MinTreeBank(dist, state.ids)
        del dist
        self.peak_entries = int(self.bank.leaves.size) + 4 * n
        if n >= 2:
            vals, cols = self.bank.row_min()
            state.nn[:] = cols[:n]
            state.key[:] = vals[:n]
        return state

    def slot_value(self, sx: int, sy: int) -> float:
        return float(self.bank.leaves[sx, sy])

    def record_cost(self, key: float) -> float:
        return float(np.sqrt(key)) if self.kind.squared else key

    def merge(self, sa: int, sb: int, new_id: int) -> int:
        st = self.state
        n = self.n
        leaves = self.bank.leaves
        sizes = st.sizes.astype(np.float64)
        row = lance_williams_update(self.kind, leaves[sa, :n], leaves[sb, :n],
                                    leaves[sa, sb], sizes[sa], sizes[sb], sizes)
        st.ids[sa] = new_id
        st.ids[sb] = -1
        st.sizes[sa] += st.sizes[sb]
        alive = st.ids >= 0
        row = np.where(alive, row, np.inf)
        row[sa] = np.inf
        leaves[sa, :n] = row
        leaves[:n, sa] = row
        leaves[:n, sb] = np.inf
        leaves[sb, :n] = np.inf
        self.bank.tags[sa] = new_id
        self.bank.tags[sb] = -1
        self.bank.rebuild_rows([sa])
        self.bank.refresh_cols([sa, sb])
        vals, cols = self.bank.row_min()
        st.nn[:] = cols[:n]
        st.key[:] = np.where(alive, vals[:n], np.inf)
        return sa
