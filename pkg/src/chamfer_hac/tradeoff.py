"""Space-time trade-off backend for ``Ch`` and ``ChN``.

Only clusters holding at least ``t`` points ("large" clusters, at most
``n // t`` of them at any time) keep a stored ``p2c`` row and an outgoing
``c2c`` row. A small child of a merge has its rows rebuilt from the raw
points, which costs O(n t) because it has fewer than ``t`` points. Storage
is therefore ``2 n (n // t)`` floats plus O(n) bookkeeping.

Rebuilt values use the same grid-rounded distances as
:class:`~chamfer_hac.chamfer.ChamferBackend`, so the dendrogram is identical
to the quadratic backend for every ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chamfer import ChamferVariant
from .engine import ClusterState, LinkageBackend, pick_nearest
from .geometry import BaseMetric, Dataset, chamfer_grid_step, distance_rows

__all__ = ["TradeoffConfig", "TradeoffBackend"]


@dataclass(frozen=True)
class TradeoffConfig:
    t: int

    def validate(self, n: int) -> None:
        if not 1 <= self.t <= max(n, 1):
            raise ValueError(f"tradeoff threshold t={self.t} outside [1, {n}]")


class TradeoffBackend(LinkageBackend):
    """Chamfer backend storing rows only for clusters of size ``>= t``.

    Attributes
    ----------
    store_entries : int
        Entries held by the persistent store (rows plus O(n) bookkeeping).
    peak_scratch_entries : int
        Largest temporary buffer used while rebuilding a small cluster.
    """

    def __init__(self, variant: ChamferVariant | str = ChamferVariant.CH,
                 t: int = 1, metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
                 threads: int = 1):
        super().__init__()
        self.variant = ChamferVariant.parse(variant)
        if self.variant.symmetric:
            raise ValueError("tradeoff unsupported for symmetric variants")
        self.config = TradeoffConfig(int(t))
        self.metric = BaseMetric.parse(metric)
        self.threads = threads
        self.name = f"{self.variant.value}/t={self.config.t}"
        self.peak_scratch_entries = 0

    def init(self, ds: Dataset) -> ClusterState:
        n = ds.n
        t = self.config.t
        self.config.validate(n)
        self.ds = ds
        self.n = n
        self.step = chamfer_grid_step(ds, self.metric)
        self.chunk = max(1, n // t)
        self.capacity = n // t
        self.P = np.empty((self.capacity, n))
        self.R = np.empty((self.capacity, n))
        self.free_rows = list(range(self.capacity - 1, -1, -1))
        self.row_of = np.full(n, -1, dtype=np.int64)
        self.label = np.arange(n, dtype=np.int64)
        self.members = [[p] for p in range(n)]
        self.dead = np.zeros(n)
        state = ClusterState.singletons(n)
        self.state = state
        self.nn_raw = np.full(n, np.inf)
        # label, members, dead, nn_raw, plus the state's ids/sizes/nn/key
        self.store_entries = 2 * n * self.capacity + 7 * n
        self.peak_entries = self.store_entries
        if n < 2:
            return state
        ids = state.ids
        for lo in range(0, n, self.chunk):
            rows = np.arange(lo, min(n, lo + self.chunk))
            block = self._rows(rows)
            self._note_scratch(block.size)
            for k, p in enumerate(rows):
                if t == 1:
                    r = self._alloc(p)
                    self.P[r] = block[k]
                    self.R[r] = block[k]
                    self.R[r, p] = np.inf
                block[k, p] = np.inf
            rev = np.argmin(block[:, ::-1], axis=1)
            nbr = n - 1 - rev
            state.nn[rows] = nbr
            self.nn_raw[rows] = block[np.arange(rows.size), nbr]
        state.key[:] = self.nn_raw
        del ids
        return state

    def _rows(self, pts) -> np.ndarray:
        return distance_rows(self.ds, pts, self.metric, grid_step=self.step)

    def _note_scratch(self, entries: int) -> None:
        if entries > self.peak_scratch_entries:
            self.peak_scratch_entries = entries
            self.peak_entries = self.store_entries + entries

    def _alloc(self, slot: int) -> int:
        r = self.free_rows.pop()
        self.row_of[slot] = r
        return r

    def _release(self, slot: int) -> None:
        r = self.row_of[slot]
        if r >= 0:
            self.free_rows.append(int(r))
            self.row_of[slot] = -1

    def _rebuild(self, slot: int):
        """``(d(p, C) for all p, Ch(C, X) for all slots X)`` for a small cluster."""
        n = self.n
        pts = np.asarray(self.members[slot], dtype=np.int64)
        order = np.argsort(self.label, kind="stable")
        starts_mask = np.ones(n, dtype=bool)
        starts_mask[1:] = self.label[order][1:] != self.label[order][:-1]
        starts = np.flatnonzero(starts_mask)
        groups = self.label[order][starts]
        p2c = np.full(n, np.inf)
        out = np.zeros(n)
        for lo in range(0, pts.size, self.chunk):
            block = self._rows(pts[lo:lo + self.chunk])
            np.minimum(p2c, block.min(axis=0), out=p2c)
            mins = np.minimum.reduceat(block[:, order], starts, axis=1)
            self._note_scratch(2 * block.size)
            out[groups] += mins.sum(axis=0)
        out += self.dead
        out[slot] = np.inf
        return p2c, out

    def _fetch(self, slot: int):
        r = self.row_of[slot]
        if r >= 0:
            return self.P[r], self.R[r] + self.dead
        return self._rebuild(slot)

    def slot_value(self, sx: int, sy: int) -> float:
        r = self.row_of[sx]
        if r >= 0:
            raw = float(self.R[r, sy])
        else:
            raw = float(self._rebuild(sx)[1][sy])
        if self.variant is ChamferVariant.CHN:
            return raw / float(self.state.sizes[sx])
        return raw

    def merge(self, sa: int, sb: int, new_id: int) -> int:
        st = self.state
        n = self.n
        ids, sizes = st.ids, st.sizes
        pa, ra = self._fetch(sa)
        pb, rb = self._fetch(sb)
        out = ra + rb
        row = np.minimum(pa, pb)
        out[sa] = out[sb] = np.inf
        self._release(sa)
        self._release(sb)

        self.label[self.label == sb] = sa
        ma, mb = self.members[sa], self.members[sb]
        if len(ma) < len(mb):
            ma, mb = mb, ma
        ma.extend(mb)
        self.members[sa] = ma
        self.members[sb] = None

        ids[sa] = new_id
        ids[sb] = -1
        sizes[sa] += sizes[sb]
        self.dead[sb] = np.inf
        st.key[sb] = np.inf
        alive = ids >= 0
        out += self.dead

        inc = np.bincount(self.label, weights=row, minlength=n)
        inc += self.dead
        inc[sa] = np.inf

        large = np.flatnonzero(self.row_of >= 0)
        if large.size:
            self.R[self.row_of[large], sa] = inc[large]
        if sizes[sa] >= self.config.t and n - 1 > 0:
            r = self._alloc(sa)
            self.P[r] = row
            self.R[r] = out

        nn, nn_raw = st.nn, self.nn_raw
        upd = alive & ((nn == sa) | (nn == sb) | (inc <= nn_raw))
        upd[sa] = False
        nn[upd] = sa
        nn_raw[upd] = inc[upd]
        nn_raw[sb] = np.inf
        if np.count_nonzero(alive) > 1:
            j, best = pick_nearest(out, ids)
            nn[sa] = j
            nn_raw[sa] = best
        else:
            nn_raw[sa] = np.inf
        upd[sa] = True
        if self.variant is ChamferVariant.CHN:
            st.key[upd] = nn_raw[upd] / sizes[upd]
        else:
            st.key[upd] = nn_raw[upd]
        return sa
