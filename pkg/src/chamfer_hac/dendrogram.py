"""Merge-tree output model, tree statistics, and cut sequences.

Id convention: leaves are ``0 .. n-1`` and the ``i``-th merge (0-based)
creates cluster ``n + i``.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence

import numpy as np

__all__ = [
    "MergeRecord",
    "Dendrogram",
    "NegativeCostWarning",
    "height",
    "balance_score",
    "merge_order",
    "least_available_order",
    "monotonicize",
    "iter_cuts",
    "merge_order_cuts",
    "least_available_cuts",
]


class NegativeCostWarning(UserWarning):
    """Raised (as a warning) when monotonicization sees a negative cost."""


class MergeRecord(NamedTuple):
    left: int
    right: int
    cost: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Validated, immutable list of ``n - 1`` merges over ``n`` leaves."""

    n: int
    merges: tuple

    def __init__(self, n: int, merges: Iterable = ()):
        n = int(n)
        if n < 1:
            raise ValueError("a dendrogram needs n >= 1 leaves")
        recs = tuple(MergeRecord(int(m[0]), int(m[1]), float(m[2]), int(m[3]))
                     for m in merges)
        if len(recs) != n - 1:
            raise ValueError(f"expected {n - 1} merges for n={n}, got {len(recs)}")
        sizes = np.zeros(2 * n - 1, dtype=np.int64)
        sizes[:n] = 1
        used = np.zeros(2 * n - 1, dtype=bool)
        for i, (a, b, _, size) in enumerate(recs):
            new = n + i
            for c in (a, b):
                if not 0 <= c < new:
                    raise ValueError(f"merge {i}: id {c} is not an existing cluster")
                if used[c]:
                    raise ValueError(f"merge {i}: cluster {c} was already merged")
            if a == b:
                raise ValueError(f"merge {i}: left and right are both {a}")
            used[a] = used[b] = True
            sizes[new] = sizes[a] + sizes[b]
            if size != sizes[new]:
                raise ValueError(
                    f"merge {i}: size {size} != {sizes[a]} + {sizes[b]}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "merges", recs)

    def __len__(self):
        return len(self.merges)

    def __iter__(self):
        return iter(self.merges)

    @property
    def costs(self) -> np.ndarray:
        return np.array([m.cost for m in self.merges], dtype=np.float64)

    @property
    def children(self) -> np.ndarray:
        """``(n-1, 2)`` int array of child ids."""
        out = np.array([(m.left, m.right) for m in self.merges], dtype=np.int64)
        return out.reshape(-1, 2)

    def to_linkage_matrix(self) -> np.ndarray:
        """The same tree in scipy's ``linkage`` layout (for plotting elsewhere)."""
        z = np.empty((len(self.merges), 4), dtype=np.float64)
        for i, m in enumerate(self.merges):
            z[i] = (m.left, m.right, m.cost, m.size)
        return z


def height(dg: Dendrogram) -> int:
    """Edges on the longest root-to-leaf path; a lone leaf has height 0."""
    n = dg.n
    h = [0] * (2 * n - 1)
    for i, m in enumerate(dg.merges):
        h[n + i] = 1 + max(h[m.left], h[m.right])
    return h[-1]


def balance_score(heights_by_method) -> dict:
    """Mean over datasets of ``height / geomean(heights on that dataset)``.

    ``heights_by_method`` is either one ``{method: height}`` mapping or a
    sequence of them, one per dataset. Every dataset must list the same
    methods.
    """
    tables = [heights_by_method] if isinstance(heights_by_method, Mapping) \
        else list(heights_by_method)
    if not tables:
        raise ValueError("need at least one dataset")
    methods = list(tables[0])
    if len(methods) < 2:
        raise ValueError("need at least two methods")
    totals = dict.fromkeys(methods, 0.0)
    for idx, table in enumerate(tables):
        if set(table) != set(methods):
            raise ValueError(f"dataset {idx} lists different methods")
        hs = [float(table[m]) for m in methods]
        if min(hs) < 1:
            raise ValueError(f"dataset {idx}: heights must be >= 1")
        # h / geomean = (h^k / prod)^(1/k), with the ratio formed exactly
        k = len(hs)
        prod = math.prod(Fraction(h) for h in hs)
        for m, h in zip(methods, hs):
            totals[m] += float(Fraction(h) ** k / prod) ** (1.0 / k)
    return {m: totals[m] / len(tables) for m in methods}


def merge_order(dg: Dendrogram) -> list:
    return list(range(len(dg.merges)))


def least_available_order(dg: Dendrogram, costs: Optional[Sequence[float]] = None) -> list:
    """Greedy exposure: the cheapest merge whose children are both exposed.

    Ties go to the merge created first.
    """
    n = dg.n
    costs = dg.costs if costs is None else np.asarray(costs, dtype=np.float64)
    if costs.shape != (n - 1,):
        raise ValueError(f"need {n - 1} costs, got {costs.shape}")
    parent = np.full(2 * n - 1, -1, dtype=np.int64)
    pending = np.zeros(n - 1, dtype=np.int64)
    heap = []
    for i, m in enumerate(dg.merges):
        parent[m.left] = parent[m.right] = i
        pending[i] = (m.left >= n) + (m.right >= n)
        if pending[i] == 0:
            heap.append((costs[i], i))
    heapq.heapify(heap)
    order = []
    while heap:
        _, i = heapq.heappop(heap)
        order.append(i)
        p = parent[n + i]
        if p >= 0:
            pending[p] -= 1
            if pending[p] == 0:
                heapq.heappush(heap, (costs[p], int(p)))
    return order


def monotonicize(dg: Dendrogram) -> np.ndarray:
    """Subtree sums of merge costs: ``w~(u)`` = sum of ``w`` over u's internal nodes."""
    n = dg.n
    costs = dg.costs
    if costs.size and costs.min() < 0:
        warnings.warn("negative merge costs: monotonicized costs may not increase "
                      "toward the root", NegativeCostWarning, stacklevel=2)
    out = np.empty_like(costs)
    for i, m in enumerate(dg.merges):
        acc = costs[i]
        if m.left >= n:
            acc += out[m.left - n]
        if m.right >= n:
            acc += out[m.right - n]
        out[i] = acc
    return out


def iter_cuts(dg: Dendrogram, order: Sequence[int]) -> Iterator[np.ndarray]:
    """Yield the flat clustering after each merge in ``order``.

    Each clustering is a length-``n`` array mapping a point to the id of the
    cluster that currently holds it. A fresh array is yielded each time.
    """
    n = dg.n
    labels = np.arange(n, dtype=np.int64)
    members = {i: [i] for i in range(n)}
    for i in order:
        m = dg.merges[i]
        a, b = members.pop(m.left), members.pop(m.right)
        if len(a) < len(b):
            a, b = b, a
        a.extend(b)
        labels[a] = n + i
        members[n + i] = a
        yield labels.copy()


def merge_order_cuts(dg: Dendrogram) -> Iterator[np.ndarray]:
    return iter_cuts(dg, merge_order(dg))


def least_available_cuts(dg: Dendrogram, costs: Optional[Sequence[float]] = None
                         ) -> Iterator[np.ndarray]:
    return iter_cuts(dg, least_available_order(dg, costs))
