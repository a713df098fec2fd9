"""Minimum-tracking maps.

:class:`MinTreeBank` keeps one fixed-fanout tournament tree per row of a
shared value matrix, so every row's minimum is available in O(1) and a
changed column is repaired in O(log n) per row (vectorized over rows).
:class:`MinTrackingMap` is the single-row, dictionary-flavoured view.

Ties between equal values go to the larger tag. Backends tag columns with
cluster ids, so the most recently created cluster wins a tie.
"""

from __future__ import annotations

from typing import Iterator, Optional, Tuple

import numpy as np

__all__ = ["MinTreeBank", "MinTrackingMap"]

FANOUT = 16


def _pad(k: int) -> int:
    return -(-k // FANOUT) * FANOUT


class MinTreeBank:
    """Per-row minimum over a ``rows x cols`` float matrix with column tags.

    Parameters
    ----------
    values : ndarray of shape (rows, cols)
        Leaf values. The bank keeps a padded private copy; write through
        :attr:`leaves` and then call :meth:`refresh_cols` or
        :meth:`rebuild_rows`.
    tags : ndarray of shape (cols,)
        Tie-break key per column; ``-1`` marks an absent column.
    """

    def __init__(self, values: np.ndarray, tags: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        rows, cols = values.shape
        self.rows, self.cols = rows, cols
        width = _pad(cols + 1)
        self.leaves = np.full((rows, width), np.inf)
        self.leaves[:, :cols] = values
        self.tags = np.full(width, -1, dtype=np.int64)
        self.tags[:cols] = tags
        self._pad_col = cols
        self._vals = [self.leaves]
        self._args = [None]
        k = width
        while True:
            k = k // FANOUT
            size = 1 if k == 1 else _pad(k)
            self._vals.append(np.full((rows, size), np.inf))
            self._args.append(np.full((rows, size), self._pad_col, dtype=np.int64))
            if k == 1:
                break
            k = size
        self.rebuild_rows(slice(None))

    @property
    def depth(self) -> int:
        return len(self._vals) - 1

    def _children(self, level: int, rows, idx):
        vals = self._vals[level - 1]
        args = self._args[level - 1]
        if isinstance(rows, slice):
            v = vals[rows, idx]
            a = args[rows, idx] if level > 1 else np.broadcast_to(idx, v.shape)
        else:
            v = vals[np.ix_(rows, idx)]
            a = args[np.ix_(rows, idx)] if level > 1 else np.broadcast_to(idx, v.shape)
        return v, a

    def _reduce(self, vals: np.ndarray, args: np.ndarray):
        r = vals.shape[0]
        v = vals.reshape(r, -1, FANOUT)
        a = args.reshape(r, -1, FANOUT)
        best = v.min(axis=2)
        tie = np.where(v == best[:, :, None], self.tags[a], -2)
        pick = np.argmax(tie, axis=2)
        return best, np.take_along_axis(a, pick[:, :, None], axis=2)[:, :, 0]

    def rebuild_rows(self, rows) -> None:
        """Recompute every tree level for ``rows`` (an index array or slice)."""
        if not isinstance(rows, slice):
            rows = np.asarray(rows, dtype=np.int64)
        for level in range(1, len(self._vals)):
            hi = self._vals[level - 1].shape[1]
            vals, args = self._children(level, rows, np.arange(hi))
            best, arg = self._reduce(vals, args)
            k = best.shape[1]
            self._vals[level][rows, :k] = best
            self._args[level][rows, :k] = arg

    def refresh_cols(self, cols, rows=slice(None)) -> None:
        """Repair the tree paths above leaf columns ``cols`` in ``rows``."""
        if not isinstance(rows, slice):
            rows = np.asarray(rows, dtype=np.int64)
        nodes = np.unique(np.asarray(cols, dtype=np.int64))
        span = np.arange(FANOUT)
        for level in range(1, len(self._vals)):
            nodes = np.unique(nodes // FANOUT)
            idx = (nodes[:, None] * FANOUT + span).ravel()
            vals, args = self._children(level, rows, idx)
            best, arg = self._reduce(vals, args)
            if isinstance(rows, slice):
                self._vals[level][rows, nodes] = best
                self._args[level][rows, nodes] = arg
            else:
                self._vals[level][np.ix_(rows, nodes)] = best
                self._args[level][np.ix_(rows, nodes)] = arg

    def row_min(self, rows=slice(None)) -> Tuple[np.ndarray, np.ndarray]:
        """Minimum value and its leaf column for each of ``rows``."""
        return self._vals[-1][rows, 0], self._args[-1][rows, 0]


class MinTrackingMap:
    """Map from small integer keys to floats with an O(1) ``min()``.

    Keys live in ``range(capacity)``. Updates cost O(log capacity).
    """

    def __init__(self, capacity: int, items: Optional[dict] = None):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._cap = int(capacity)
        self._bank = MinTreeBank(np.full((1, self._cap), np.inf),
                                 np.full(self._cap, -1, dtype=np.int64))
        self._size = 0
        for k, v in (items or {}).items():
            self[k] = v

    def _check(self, key) -> int:
        key = int(key)
        if not 0 <= key < self._cap:
            raise KeyError(key)
        return key

    def __setitem__(self, key, value) -> None:
        key = self._check(key)
        value = float(value)
        if value != value:
            raise ValueError("NaN values are not ordered")
        if key not in self:
            self._size += 1
            self._bank.tags[key] = key
        self._bank.leaves[0, key] = value
        self._bank.refresh_cols([key])

    def __getitem__(self, key) -> float:
        key = self._check(key)
        if key not in self:
            raise KeyError(key)
        return float(self._bank.leaves[0, key])

    def __delitem__(self, key) -> None:
        key = self._check(key)
        if key not in self:
            raise KeyError(key)
        self._size -= 1
        self._bank.tags[key] = -1
        self._bank.leaves[0, key] = np.inf
        self._bank.refresh_cols([key])

    def __contains__(self, key) -> bool:
        try:
            key = int(key)
        except (TypeError, ValueError):
            return False
        return 0 <= key < self._cap and self._bank.tags[key] == key

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[int]:
        return iter(np.flatnonzero(self._bank.tags[:self._cap] >= 0).tolist())

    def items(self):
        return [(k, self[k]) for k in self]

    def pop(self, key, default=None):
        if key in self:
            value = self[key]
            del self[key]
            return value
        return default

    def min(self) -> Tuple[int, float]:
        """``(key, value)`` of the smallest value; ties go to the larger key."""
        if not self._size:
            raise ValueError("min() of an empty map")
        val, col = self._bank.row_min(0)
        return int(col), float(val)
