"""The generic nearest-neighbour HAC loop.

Every active cluster keeps a pointer to its nearest neighbour under the
backend's linkage together with a global selection key. Each round merges
the cluster whose key is smallest with its neighbour and lets the backend
repair whatever pointers the merge invalidated.

Tie rules (all deterministic):

* per-cluster neighbour: smallest linkage value, then the largest cluster
  id, i.e. the most recently formed cluster;
* global pair: smallest key, then the smallest source cluster id.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from .dendrogram import Dendrogram, MergeRecord
from .geometry import Dataset

__all__ = [
    "ClusterState",
    "LinkageBackend",
    "NNInvariantError",
    "find_global_best",
    "run_hac",
    "pick_nearest",
]


class NNInvariantError(AssertionError):
    """A stored nearest-neighbour pointer disagrees with a full rescan."""


@dataclass
class ClusterState:
    """Slot-indexed view of the active clusters.

    A slot holds one cluster; a merge writes the new cluster into the slot of
    one child and retires the other slot (``ids[slot] == -1``).

    Attributes
    ----------
    ids : cluster id held by each slot, ``-1`` when retired.
    sizes : number of points in each slot's cluster.
    nn : slot of the nearest neighbour of each slot's cluster.
    key : global selection key ``L(X, NN(X))`` (``inf`` for retired slots).
    next_id : id the next merge will create.
    """

    ids: np.ndarray
    sizes: np.ndarray
    nn: np.ndarray
    key: np.ndarray
    next_id: int

    @classmethod
    def singletons(cls, n: int) -> "ClusterState":
        return cls(ids=np.arange(n, dtype=np.int64),
                   sizes=np.ones(n, dtype=np.int64),
                   nn=np.full(n, -1, dtype=np.int64),
                   key=np.full(n, np.inf),
                   next_id=n)

    @classmethod
    def from_table(cls, table: Mapping[int, Tuple[int, float]],
                   sizes: Optional[Mapping[int, int]] = None) -> "ClusterState":
        """Build a state from ``{cluster id: (neighbour id, value)}``.

        Handy for exercising :func:`find_global_best` directly.
        """
        ids = sorted(table)
        slot = {c: i for i, c in enumerate(ids)}
        state = cls.singletons(len(ids))
        state.ids[:] = ids
        for c, (nbr, value) in table.items():
            state.nn[slot[c]] = slot[nbr]
            state.key[slot[c]] = value
            if sizes is not None:
                state.sizes[slot[c]] = sizes[c]
        state.next_id = max(ids) + 1 if ids else 0
        return state

    @property
    def alive(self) -> np.ndarray:
        return self.ids >= 0

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.ids >= 0))

    def nn_table(self) -> dict:
        """``{cluster id: (neighbour id, key)}`` for every active cluster."""
        return {int(self.ids[s]): (int(self.ids[self.nn[s]]), float(self.key[s]))
                for s in np.flatnonzero(self.ids >= 0)}


def pick_nearest(values: np.ndarray, ids: np.ndarray) -> Tuple[int, float]:
    """Index of the minimum of ``values``; ties go to the largest ``ids`` entry."""
    best = values.min()
    hits = np.flatnonzero(values == best)
    if hits.size > 1:
        return int(hits[np.argmax(ids[hits])]), float(best)
    return int(hits[0]), float(best)


def _best_slots(state: ClusterState) -> Tuple[int, int, float]:
    key = np.where(state.ids >= 0, state.key, np.inf)
    best = key.min()
    hits = np.flatnonzero(key == best)
    if hits.size > 1:
        src = int(hits[np.argmin(state.ids[hits])])
    else:
        src = int(hits[0])
    return src, int(state.nn[src]), float(best)


def find_global_best(state: ClusterState) -> Tuple[int, int, float]:
    """``(A, B, value)`` minimizing ``L(X, NN(X))`` over active ``X``.

    Ties go to the smaller source id ``A``.
    """
    if state.n_active < 2:
        raise ValueError("nothing to merge")
    src, dst, value = _best_slots(state)
    return int(state.ids[src]), int(state.ids[dst]), value


class LinkageBackend(abc.ABC):
    """Linkage-specific storage and merge logic driven by :func:`run_hac`."""

    name: str = "backend"

    def __init__(self):
        self.state: Optional[ClusterState] = None
        self.peak_entries = 0

    @abc.abstractmethod
    def init(self, ds: Dataset) -> ClusterState:
        """Build the initial store and neighbour pointers for ``ds``."""

    @abc.abstractmethod
    def merge(self, sa: int, sb: int, new_id: int) -> int:
        """Merge slots ``sa`` and ``sb`` into cluster ``new_id``; return its slot.

        On return every active slot's ``nn`` and ``key`` must be exact.
        """

    @abc.abstractmethod
    def slot_value(self, sx: int, sy: int) -> float:
        """Stored selection key ``L(X, Y)`` for slots ``sx``, ``sy``."""

    def record_cost(self, key: float) -> float:
        """Turn a selection key into the cost written to the dendrogram."""
        return key

    def linkage_value(self, a: int, b: int) -> float:
        """Stored linkage value between active cluster ids ``a`` and ``b``."""
        ids = self.state.ids
        sa = np.flatnonzero(ids == a)
        sb = np.flatnonzero(ids == b)
        if not sa.size or not sb.size:
            raise KeyError(f"cluster {a if not sa.size else b} is not active")
        return self.record_cost(self.slot_value(int(sa[0]), int(sb[0])))

    def verify_nn(self) -> None:
        """Exhaustive rescan of every stored neighbour pointer."""
        st = self.state
        alive = np.flatnonzero(st.ids >= 0)
        if alive.size < 2:
            return
        for s in alive:
            others = alive[alive != s]
            vals = np.array([self.slot_value(int(s), int(o)) for o in others])
            j, best = pick_nearest(vals, st.ids[others])
            if int(others[j]) != int(st.nn[s]) or best != self.slot_value(int(s), int(st.nn[s])):
                raise NNInvariantError(
                    f"cluster {st.ids[s]}: stored nn {st.ids[st.nn[s]]}, "
                    f"rescan gives {st.ids[others[j]]} ({best!r})")


def _ordered(state: ClusterState, sa: int, sb: int) -> Tuple[int, int]:
    """Canonical child order: larger cluster first, then smaller id first."""
    ka = (-int(state.sizes[sa]), int(state.ids[sa]))
    kb = (-int(state.sizes[sb]), int(state.ids[sb]))
    return (sa, sb) if ka <= kb else (sb, sa)


def run_hac(ds: Dataset, backend: LinkageBackend, check: bool = False,
            callback: Optional[Callable[[LinkageBackend, MergeRecord], None]] = None
            ) -> Dendrogram:
    """Run nearest-neighbour HAC to completion.

    Parameters
    ----------
    ds : Dataset
    backend : LinkageBackend
        Fresh backend; ``init`` is called here.
    check : bool
        Rescan all neighbour pointers after every merge (quadratic per merge;
        for tests).
    callback : callable, optional
        Called as ``callback(backend, record)`` after every merge.
    """
    state = backend.init(ds)
    backend.state = state
    n = ds.n
    merges = []
    if check:
        backend.verify_nn()
    for _ in range(n - 1):
        src, dst, key = _best_slots(state)
        left, right = _ordered(state, src, dst)
        size = int(state.sizes[src] + state.sizes[dst])
        merges.append(MergeRecord(int(state.ids[left]), int(state.ids[right]),
                                  float(backend.record_cost(key)), size))
        new_id = state.next_id
        backend.merge(src, dst, new_id)
        state.next_id = new_id + 1
        if check:
            backend.verify_nn()
        if callback is not None:
            callback(backend, merges[-1])
    return Dendrogram(n, merges)
