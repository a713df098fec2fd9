"""Chamfer linkage: direct evaluation and the exact quadratic-time backend.

``Ch(A, B)`` sums, over every point of ``A``, the distance to its nearest
point of ``B``. The backend keeps two square arrays indexed by cluster slot:

* ``p2c[C, p] = d(p, C)``: point-to-cluster minima. A merge combines two
  rows with an elementwise minimum.
* ``c2c[X, Y] = Ch(X, Y)``: ordered-pair Chamfer values. The merged row is
  the sum of the two child rows; the merged column is a per-cluster sum of
  the new ``p2c`` row.

Under ``Ch`` and ``ChN``, merging can only lower values pointing into the
merged cluster, so a neighbour pointer either jumps to the new cluster or
stays put, and a merge costs O(n). The symmetric variants lose that
property and keep each row's minimum in a :class:`~chamfer_hac.minmap.MinTreeBank`.

Distances feeding the sums are rounded to a power-of-two grid fine enough
that every Chamfer sum over the dataset is exact in float64
(:func:`~chamfer_hac.geometry.chamfer_grid_step`). Values therefore do not
depend on summation order, which is what makes the store updates, the
trade-off backend and the brute-force oracle agree bit for bit.
"""

from __future__ import annotations

import enum
from typing import Iterable, Optional

import numpy as np

from .engine import ClusterState, LinkageBackend, pick_nearest
from .geometry import (BaseMetric, Dataset, _as_dataset, chamfer_grid_step,
                       distance_rows, pairwise_distances)
from .minmap import MinTreeBank

__all__ = [
    "ChamferVariant",
    "chamfer_value",
    "normalized_view",
    "ChamferBackend",
]


class ChamferVariant(str, enum.Enum):
    CH = "chamfer"
    CHN = "chamfer-n"
    CHS = "chamfer-s"
    CHNS = "chamfer-ns"

    @classmethod
    def parse(cls, value: "ChamferVariant | str") -> "ChamferVariant":
        if isinstance(value, cls):
            return value
        aliases = {"ch": cls.CH, "chn": cls.CHN, "chs": cls.CHS, "chns": cls.CHNS}
        key = str(value).lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown Chamfer variant {value!r}") from None

    @property
    def symmetric(self) -> bool:
        return self in (ChamferVariant.CHS, ChamferVariant.CHNS)

    @property
    def normalized(self) -> bool:
        return self in (ChamferVariant.CHN, ChamferVariant.CHNS)


def _members(points: Iterable[int], n: int, what: str) -> np.ndarray:
    idx = np.fromiter(points, dtype=np.int64)
    if idx.size == 0:
        raise ValueError(f"empty cluster ({what})")
    if idx.min() < 0 or idx.max() >= n:
        raise IndexError(f"point index out of range in {what}")
    return idx


def chamfer_value(A: Iterable[int], B: Iterable[int],
                  variant: ChamferVariant | str = ChamferVariant.CH,
                  data=None, metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
                  grid_step: Optional[float] = None) -> float:
    """Evaluate a Chamfer variant between point-index sets ``A`` and ``B``.

    Parameters
    ----------
    A, B : iterables of point indices
        Non-empty, disjoint subsets of the dataset.
    variant : ChamferVariant or str
    data : Dataset or array-like
    metric : BaseMetric or str
    grid_step : float, optional
        Round distances to this grid first, as the backends do.

    Examples
    --------
    >>> pts = [[0.0], [1.0], [3.0]]
    >>> chamfer_value([0, 1], [2], "chamfer", pts)
    5.0
    >>> chamfer_value([0, 1], [2], "chamfer-ns", pts)
    4.5
    """
    ds = _as_dataset(data)
    variant = ChamferVariant.parse(variant)
    a = _members(A, ds.n, "A")
    b = _members(B, ds.n, "B")
    dab = distance_rows(ds, a, metric, grid_step=grid_step)[:, b]
    ab = float(dab.min(axis=1).sum())
    if variant is ChamferVariant.CH:
        return ab
    if variant is ChamferVariant.CHN:
        return ab / a.size
    ba = float(dab.min(axis=0).sum())
    if variant is ChamferVariant.CHS:
        return ab + ba
    return ab / a.size + ba / b.size


def normalized_view(raw: float, source_size: int) -> float:
    """``ChN`` value from a raw ``Ch`` value and the source cluster size."""
    if source_size < 1:
        raise ValueError("source_size must be >= 1")
    return raw / source_size


class ChamferBackend(LinkageBackend):
    """Exact Chamfer-linkage backend for all four variants.

    Parameters
    ----------
    variant : ChamferVariant or str
    metric : BaseMetric or str
        Base point metric.
    threads : int
        Workers for the initial distance matrix; the output does not depend
        on it.
    check_invariants : bool
        Count violations of ``Ch(C, A u B) <= min(Ch(C, A), Ch(C, B))`` on
        every merge (see :attr:`monotone_violations`).
    """

    def __init__(self, variant: ChamferVariant | str = ChamferVariant.CH,
                 metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
                 threads: int = 1, check_invariants: bool = False):
        super().__init__()
        self.variant = ChamferVariant.parse(variant)
        self.metric = BaseMetric.parse(metric)
        self.threads = threads
        self.check_invariants = check_invariants
        self.name = self.variant.value
        self.monotone_violations = 0
        self.monotone_checks = 0

    def init(self, ds: Dataset) -> ClusterState:
        n = ds.n
        self.n = n
        self.grid_step = chamfer_grid_step(ds, self.metric)
        # singleton slots: d(p, {q}) = d(p, q), so p2c starts as the matrix
        self.p2c = pairwise_distances(ds, self.metric, threads=self.threads,
                                      grid_step=self.grid_step)
        self.c2c = self.p2c.copy()
        np.fill_diagonal(self.c2c, np.inf)
        self.label = np.arange(n, dtype=np.int64)
        self.dead = np.zeros(n)
        state = ClusterState.singletons(n)
        self.state = state
        self.peak_entries = 2 * n * n + 6 * n
        if n < 2:
            return state
        if self.variant.symmetric:
            s = self.c2c + self.c2c.T
            self.bank = MinTreeBank(s, state.ids)
            del s
            self.peak_entries += n * n
            vals, cols = self.bank.row_min()
            state.nn[:] = cols
            state.key[:] = vals
        else:
            # argmin on the reversed row returns the last (largest-id) minimum
            rev = np.argmin(self.c2c[:, ::-1], axis=1)
            state.nn[:] = n - 1 - rev
            self.nn_raw = self.c2c[np.arange(n), state.nn].copy()
            state.key[:] = self.nn_raw
        return state

    def slot_value(self, sx: int, sy: int) -> float:
        st = self.state
        if self.variant.symmetric:
            return float(self.bank.leaves[sx, sy])
        raw = float(self.c2c[sx, sy])
        if self.variant is ChamferVariant.CHN:
            return raw / float(st.sizes[sx])
        return raw

    def merge(self, sa: int, sb: int, new_id: int) -> int:
        st = self.state
        c2c, p2c = self.c2c, self.p2c
        n = self.n
        ids, sizes = st.ids, st.sizes

        if self.check_invariants:
            before = np.minimum(c2c[:, sa], c2c[:, sb])

        # outgoing row: Ch(A u B, C) = Ch(A, C) + Ch(B, C)
        out = c2c[sa] + c2c[sb]
        out += self.dead
        # point-to-cluster column: d(p, A u B) = min(d(p, A), d(p, B))
        row = p2c[sa]
        np.minimum(row, p2c[sb], out=row)
        self.label[self.label == sb] = sa

        ids[sa] = new_id
        ids[sb] = -1
        sizes[sa] += sizes[sb]
        self.dead[sb] = np.inf
        st.key[sb] = np.inf
        alive = ids >= 0

        # incoming column: Ch(C, A u B) = sum over p in C of d(p, A u B)
        inc = np.bincount(self.label, weights=row, minlength=n)
        inc += self.dead
        inc[sa] = np.inf
        if self.check_invariants:
            mask = alive.copy()
            mask[sa] = False
            self.monotone_checks += int(np.count_nonzero(mask))
            self.monotone_violations += int(np.count_nonzero(inc[mask] > before[mask]))

        c2c[sa] = out
        c2c[:, sa] = inc

        if self.variant.symmetric:
            self._merge_symmetric(sa, sb, out, inc, alive)
            return sa

        nn, nn_raw = st.nn, self.nn_raw
        j, best = pick_nearest(out, ids)
        # the new cluster has the largest id, so it also wins ties
        upd = alive & ((nn == sa) | (nn == sb) | (inc <= nn_raw))
        upd[sa] = False
        nn[upd] = sa
        nn_raw[upd] = inc[upd]
        nn[sa] = j
        nn_raw[sa] = best
        nn_raw[sb] = np.inf
        if self.variant is ChamferVariant.CHN:
            upd[sa] = True
            st.key[upd] = nn_raw[upd] / sizes[upd]
        else:
            st.key[upd] = nn_raw[upd]
            st.key[sa] = best
        return sa

    def _merge_symmetric(self, sa, sb, out, inc, alive):
        st = self.state
        bank = self.bank
        n = self.n
        if self.variant is ChamferVariant.CHNS:
            srow = out / float(st.sizes[sa]) + inc / st.sizes
        else:
            srow = out + inc
        srow[~alive] = np.inf
        srow[sa] = np.inf
        leaves = bank.leaves
        leaves[sa, :n] = srow
        leaves[:n, sa] = srow
        leaves[:n, sb] = np.inf
        leaves[sb, :n] = np.inf
        bank.tags[sa] = st.ids[sa]
        bank.tags[sb] = -1
        bank.rebuild_rows([sa])
        bank.refresh_cols([sa, sb])
        vals, cols = bank.row_min()
        st.nn[:] = cols[:n]
        st.key[:] = np.where(alive, vals[:n], np.inf)
