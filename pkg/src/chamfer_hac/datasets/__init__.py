"""Small bundled datasets."""

from __future__ import annotations

import os

from ..geometry import Dataset
from ..io import load_csv

__all__ = ["load_iris", "IRIS_PATH"]

IRIS_PATH = os.path.join(os.path.dirname(__file__), "iris.csv")


def load_iris() -> Dataset:
    """Fisher's iris measurements (n=150, d=4) with species labels 0, 1, 2."""
    ds = load_csv(IRIS_PATH, has_header=True, label_column="species")
    return Dataset(ds.points, ds.labels, name="iris")
