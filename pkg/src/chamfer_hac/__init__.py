"""Hierarchical agglomerative clustering with Chamfer linkage.

Exact quadratic-time Chamfer backends (``Ch``, ``ChN``, ``ChS``, ``ChNS``),
a space-time trade-off backend, five classical baselines, a brute-force
oracle, and dendrogram quality evaluation.
"""

from .chamfer import ChamferBackend, ChamferVariant, chamfer_value, normalized_view
from .classical import ClassicalBackend, ClassicalKind, classical_value
from .dendrogram import (Dendrogram, MergeRecord, balance_score, height,
                         least_available_cuts, merge_order_cuts, monotonicize)
from .engine import ClusterState, LinkageBackend, find_global_best, run_hac
from .geometry import BaseMetric, Dataset, point_distance, point_to_cluster_distance
from .linkages import LINKAGES, hac, make_backend
from .metrics import EvalReport, ami, ari, evaluate_dendrogram, fmi, nmi
from .minmap import MinTrackingMap
from .oracle import oracle_hac
from .tradeoff import TradeoffBackend

__version__ = "0.1.0"

__all__ = [
    "BaseMetric", "Dataset", "point_distance", "point_to_cluster_distance",
    "Dendrogram", "MergeRecord", "height", "balance_score", "merge_order_cuts",
    "least_available_cuts", "monotonicize",
    "ClusterState", "LinkageBackend", "find_global_best", "run_hac", "MinTrackingMap",
    "ChamferVariant", "ChamferBackend", "chamfer_value", "normalized_view",
    "ClassicalKind", "ClassicalBackend", "classical_value",
    "TradeoffBackend", "oracle_hac",
    "ari", "nmi", "ami", "fmi", "evaluate_dendrogram", "EvalReport",
    "LINKAGES", "hac", "make_backend",
]
