"""External clustering-quality indices and dendrogram evaluation.

ARI, NMI (arithmetic-mean normalization), AMI (permutation-model
expectation) and FMI, both from scratch and incrementally along a sequence
of merges. :func:`evaluate_dendrogram` reports the best score of each
index over the cuts visited by three exposure orders of a dendrogram:

``merge``
    the order in which the algorithm performed the merges;
``least-available``
    repeatedly expose the cheapest merge whose children are exposed;
``least-available-monotone``
    the same greedy rule on subtree-summed costs, which increase toward
    the root.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .dendrogram import Dendrogram, least_available_order, merge_order, monotonicize

__all__ = [
    "ari", "nmi", "ami", "fmi", "METRICS", "ORDERS",
    "ContingencyState", "MetricResult", "EvalReport", "evaluate_dendrogram",
    "expected_mutual_information",
]

METRICS = ("ari", "nmi", "ami", "fmi")
ORDERS = ("merge", "least-available", "least-available-monotone")
AMI_RATIO = 1.05
AMI_EXACT_LEVELS = 256

_EPS = np.finfo(np.float64).eps


def _xlogx(x) -> float:
    return x * math.log(x) if x > 1 else 0.0


def _pairs(x: int) -> int:
    return x * (x - 1) // 2


class _Sum:
    """Neumaier-compensated running sum."""

    __slots__ = ("s", "c")

    def __init__(self, value: float = 0.0):
        self.s = value
        self.c = 0.0

    def add(self, x: float) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def value(self) -> float:
        return self.s + self.c


def _dense(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    return np.unique(arr, return_inverse=True)[1].astype(np.int64)


def _table(pred, truth):
    p = _dense(pred)
    t = _dense(truth)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    if p.size < 2:
        raise ValueError("need at least two points")
    kt = int(t.max()) + 1
    cells = np.bincount(p * kt + t)
    cells = cells[cells > 0]
    return (cells.tolist(), np.bincount(p).tolist(), np.bincount(t).tolist(), int(p.size))


def _ari(s_ij: int, s_a: int, s_b: int, n: int, same) -> float:
    # integer numerator and denominator; ``same()`` only runs when degenerate
    total = _pairs(n)
    num = 2 * (s_ij * total - s_a * s_b)
    den = (s_a + s_b) * total - 2 * s_a * s_b
    if den == 0:
        return 1.0 if same() else 0.0
    return num / den


def _fmi(s_ij: int, s_a: int, s_b: int) -> float:
    if s_a == 0 or s_b == 0:
        return 0.0
    if s_a == s_b:
        return s_ij / s_a
    return s_ij / math.sqrt(s_a * s_b)


def _mi_parts(t_ij: float, t_a: float, t_b: float, n: int):
    fn = _xlogx(n)
    mi = max((t_ij - t_a - t_b + fn) / n, 0.0)
    h_a = max((fn - t_a) / n, 0.0)
    h_b = max((fn - t_b) / n, 0.0)
    return mi, h_a, h_b


def _nmi(mi: float, h_a: float, h_b: float, k_a: int, k_b: int) -> float:
    if k_a == k_b == 1:
        return 1.0
    norm = 0.5 * (h_a + h_b)
    return mi / max(norm, _EPS)


def expected_mutual_information(a_sizes: Dict[int, int], b_sizes: Sequence[int], n: int) -> float:
    """Expected mutual information under the permutation model.

    ``a_sizes`` maps a cluster size to how many clusters have it; cells
    are grouped by size pair, so the cost is governed by distinct sizes.
    """
    b_count = Counter(int(b) for b in b_sizes)
    lg_n = gammaln(n + 1)
    emi = 0.0
    for a, ma in a_sizes.items():
        for b, mb in b_count.items():
            lo = max(1, a + b - n)
            hi = min(a, b)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            log_p = (gammaln(a + 1) + gammaln(b + 1) + gammaln(n - a + 1)
                     + gammaln(n - b + 1) - lg_n - gammaln(nij + 1)
                     - gammaln(a - nij + 1) - gammaln(b - nij + 1)
                     - gammaln(n - a - b + nij + 1))
            term = (nij / n) * (np.log(n * nij) - math.log(a * b)) * np.exp(log_p)
            emi += ma * mb * float(term.sum())
    return emi


def _ami(mi: float, h_a: float, h_b: float, a_sizes: Dict[int, int],
         b_sizes: Sequence[int], n: int, k_a: int, k_b: int) -> float:
    if k_a == k_b == 1 or k_a == k_b == n:
        return 1.0
    emi = expected_mutual_information(a_sizes, b_sizes, n)
    den = 0.5 * (h_a + h_b) - emi
    den = min(den, -_EPS) if den < 0 else max(den, _EPS)
    return (mi - emi) / den


def ari(clustering, truth) -> float:
    """Adjusted Rand index.

    >>> ari([0, 0, 1, 1], [0, 1, 0, 1])
    -0.5
    """
    cells, a, b, n = _table(clustering, truth)
    return _ari(sum(map(_pairs, cells)), sum(map(_pairs, a)), sum(map(_pairs, b)), n,
                lambda: len(cells) == len(a) == len(b))


def fmi(clustering, truth) -> float:
    """Fowlkes-Mallows index; 0 when either side has no same-cluster pair."""
    cells, a, b, _ = _table(clustering, truth)
    return _fmi(sum(map(_pairs, cells)), sum(map(_pairs, a)), sum(map(_pairs, b)))


def _entropy_sums(cells, a, b):
    return (math.fsum(map(_xlogx, cells)), math.fsum(map(_xlogx, a)),
            math.fsum(map(_xlogx, b)))


def nmi(clustering, truth) -> float:
    """Normalized mutual information, arithmetic-mean normalization."""
    cells, a, b, n = _table(clustering, truth)
    mi, h_a, h_b = _mi_parts(*_entropy_sums(cells, a, b), n)
    return _nmi(mi, h_a, h_b, len(a), len(b))


def ami(clustering, truth) -> float:
    """Adjusted mutual information, arithmetic-mean normalization."""
    cells, a, b, n = _table(clustering, truth)
    mi, h_a, h_b = _mi_parts(*_entropy_sums(cells, a, b), n)
    return _ami(mi, h_a, h_b, Counter(a), b, n, len(a), len(b))


class ContingencyState:
    """Contingency table of a flat clustering against fixed truth labels.

    Starts from all singletons (point ``i`` in cluster ``i``) and follows
    merges of dendrogram clusters. Pair counts are exact integers and the
    ``x log x`` sums are compensated, so scores match a from-scratch
    evaluation to rounding.
    """

    def __init__(self, truth, capacity: Optional[int] = None):
        t = _dense(truth)
        n = int(t.size)
        self.n = n
        self.truth = t
        b = np.bincount(t).tolist()
        self.b_sizes = b
        self.s_b = sum(map(_pairs, b))
        self.t_b = math.fsum(map(_xlogx, b))
        cap = capacity if capacity is not None else 2 * n - 1
        self.cells: list = [None] * cap
        self.sizes = [0] * cap
        for p in range(n):
            self.cells[p] = {int(t[p]): 1}
            self.sizes[p] = 1
        self.k = n
        self.size_hist = Counter({1: n})
        self.s_ij = 0
        self.s_a = 0
        self.t_ij = _Sum()
        self.t_a = _Sum()

    def merge(self, u: int, v: int, new: int) -> None:
        cu, cv = self.cells[u], self.cells[v]
        if cu is None or cv is None:
            raise ValueError(f"cluster {u if cu is None else v} is not active")
        if len(cu) < len(cv):
            cu, cv = cv, cu
        for lab, cnt in cv.items():
            old = cu.get(lab, 0)
            new_cnt = old + cnt
            self.s_ij += old * cnt
            self.t_ij.add(_xlogx(new_cnt) - _xlogx(old) - _xlogx(cnt))
            cu[lab] = new_cnt
        su, sv = self.sizes[u], self.sizes[v]
        ss = su + sv
        self.s_a += su * sv
        self.t_a.add(_xlogx(ss) - _xlogx(su) - _xlogx(sv))
        hist = self.size_hist
        for s in (su, sv):
            hist[s] -= 1
            if not hist[s]:
                del hist[s]
        hist[ss] += 1
        self.cells[u] = self.cells[v] = None
        self.sizes[u] = self.sizes[v] = 0
        self.cells[new] = cu
        self.sizes[new] = ss
        self.k -= 1

    def _same(self) -> bool:
        n_cells = sum(len(c) for c in self.cells if c is not None)
        return n_cells == self.k == len(self.b_sizes)

    def ari(self) -> float:
        return _ari(self.s_ij, self.s_a, self.s_b, self.n, self._same)

    def fmi(self) -> float:
        return _fmi(self.s_ij, self.s_a, self.s_b)

    def _mi(self):
        return _mi_parts(self.t_ij.value, self.t_a.value, self.t_b, self.n)

    def nmi(self) -> float:
        return _nmi(*self._mi(), self.k, len(self.b_sizes))

    def ami(self) -> float:
        return _ami(*self._mi(), self.size_hist, self.b_sizes, self.n,
                    self.k, len(self.b_sizes))

    def score(self, metric: str) -> float:
        return getattr(self, metric)()


@dataclass(frozen=True)
class MetricResult:
    value: float
    order: str
    n_clusters: int


@dataclass
class EvalReport:
    """Best score per metric with the order and cut that achieved it."""

    results: Dict[str, MetricResult] = field(default_factory=dict)

    def __getitem__(self, metric: str) -> MetricResult:
        return self.results[metric]

    def best(self, metric: str) -> float:
        return self.results[metric].value

    def to_dict(self) -> dict:
        return {m: {"best": r.value, "order": r.order, "n_clusters": r.n_clusters}
                for m, r in self.results.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_tsv(self) -> str:
        lines = ["metric\tbest\torder\tn_clusters"]
        for m, r in self.results.items():
            lines.append(f"{m}\t{r.value:.17g}\t{r.order}\t{r.n_clusters}")
        return "\n".join(lines) + "\n"


def _ami_positions(costs: np.ndarray, exact: bool) -> np.ndarray:
    """Cut positions (0-based merge index along an order) where AMI is scored."""
    m = costs.size
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    if exact:
        return np.arange(m)
    if np.unique(costs).size <= AMI_EXACT_LEVELS:
        # one cut at every distinct cost: the end of each run of equal costs
        ends = np.ones(m, dtype=bool)
        ends[:-1] = costs[:-1] != costs[1:]
        return np.flatnonzero(ends)
    # thresholded cuts: expose the longest prefix whose running max <= tau
    level = np.maximum.accumulate(costs)
    lo, hi = float(level[0]), float(level[-1])
    if lo <= 0:
        shift = (hi - lo) * 1e-9 or 1.0
        level = level - lo + shift
        lo, hi = shift, hi - lo + shift
    count = int(math.ceil(math.log(hi / lo) / math.log(AMI_RATIO))) + 1
    taus = lo * AMI_RATIO ** np.arange(count + 1)
    pos = np.searchsorted(level, taus, side="right") - 1
    pos = np.concatenate([pos[pos >= 0], [m - 1]])
    return np.unique(pos)


def evaluate_dendrogram(dg: Dendrogram, truth, metrics: Iterable[str] = METRICS,
                        ami_exact: bool = False) -> EvalReport:
    """Best score per metric over the cuts of the three exposure orders.

    Parameters
    ----------
    dg : Dendrogram
    truth : array-like of length ``dg.n``
        Ground-truth labels.
    metrics : iterable of {"ari", "nmi", "ami", "fmi"}
    ami_exact : bool
        Score AMI at every cut instead of on the threshold schedule.

    Returns
    -------
    EvalReport
        ARI, NMI and FMI are exact maxima over all ``n - 1`` cuts of each
        order. AMI is scored at every distinct cost when an order has at
        most 256 of them and otherwise on a geometric threshold schedule
        with ratio 1.05.
    """
    metrics = [m.lower() for m in metrics]
    for m in metrics:
        if m not in METRICS:
            raise ValueError(f"unknown metric {m!r}")
    truth = np.asarray(truth)
    if truth.shape != (dg.n,):
        raise ValueError(f"length mismatch: dendrogram has n={dg.n}, "
                         f"labels have {truth.shape}")
    if dg.n < 2:
        raise ValueError("need at least two points")
    n = dg.n
    raw = dg.costs
    mono = monotonicize(dg)
    orders = (
        ("merge", merge_order(dg), raw),
        ("least-available", least_available_order(dg, raw), raw),
        ("least-available-monotone", least_available_order(dg, mono), mono),
    )
    best: Dict[str, MetricResult] = {}
    plain = [m for m in metrics if m != "ami"]
    for name, order, costs in orders:
        state = ContingencyState(truth)
        ami_at = set()
        if "ami" in metrics:
            ami_at = set(_ami_positions(costs[order], ami_exact).tolist())
        for pos, i in enumerate(order):
            rec = dg.merges[i]
            state.merge(rec.left, rec.right, n + i)
            k = n - 1 - pos
            for m in plain:
                val = state.score(m)
                if m not in best or val > best[m].value:
                    best[m] = MetricResult(val, name, k)
            if pos in ami_at:
                val = state.ami()
                if "ami" not in best or val > best["ami"].value:
                    best["ami"] = MetricResult(val, name, k)
    return EvalReport({m: best[m] for m in metrics})
