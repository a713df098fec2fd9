"""Linkage names and backend construction."""

from __future__ import annotations

from typing import Optional

from .chamfer import ChamferBackend, ChamferVariant
from .classical import ClassicalBackend, ClassicalKind
from .dendrogram import Dendrogram
from .engine import LinkageBackend, run_hac
from .geometry import BaseMetric, Dataset, _as_dataset
from .oracle import parse_linkage
from .tradeoff import TradeoffBackend

__all__ = ["LINKAGES", "make_backend", "hac"]

LINKAGES = tuple(v.value for v in ChamferVariant) + tuple(k.value for k in ClassicalKind)


def make_backend(linkage, metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
                 tradeoff_t: Optional[int] = None, threads: int = 1,
                 check_invariants: bool = False) -> LinkageBackend:
    """Backend for a linkage name such as ``"chamfer-n"`` or ``"ward"``."""
    kind = parse_linkage(linkage)
    if tradeoff_t is not None:
        if not isinstance(kind, ChamferVariant):
            raise ValueError("tradeoff is only available for Chamfer linkages")
        return TradeoffBackend(kind, t=tradeoff_t, metric=metric, threads=threads)
    if isinstance(kind, ChamferVariant):
        return ChamferBackend(kind, metric=metric, threads=threads,
                              check_invariants=check_invariants)
    return ClassicalBackend(kind, metric=metric, threads=threads)


def hac(data, linkage="chamfer", metric: BaseMetric | str = BaseMetric.EUCLIDEAN,
        tradeoff_t: Optional[int] = None, threads: int = 1) -> Dendrogram:
    """Cluster ``data`` (a :class:`Dataset` or an ``n x d`` array).

    >>> dg = hac([[0.0], [1.0], [10.0]], "chamfer")
    >>> [(m.left, m.right, m.cost) for m in dg.merges]
    [(0, 1, 1.0), (3, 2, 9.0)]
    """
    ds = data if isinstance(data, Dataset) else _as_dataset(data)
    return run_hac(ds, make_backend(linkage, metric, tradeoff_t, threads))
