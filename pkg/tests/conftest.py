import math

import numpy as np
import pytest

from chamfer_hac import Dataset

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_dataset(seed, n, d, kind="normal"):
    rng = np.random.default_rng(seed)
    if kind == "grid":
        # small integer coordinates: many exact ties and duplicate points
        return Dataset(rng.integers(0, 4, size=(n, d)).astype(float))
    return Dataset(rng.normal(size=(n, d)))


def hexagon():
    ang = np.deg2rad(60.0 * np.arange(6))
    return Dataset(np.column_stack([np.cos(ang), np.sin(ang)]))


def assert_same_dendrogram(fast, ref, rel=1e-9):
    assert fast.n == ref.n
    for i, (a, b) in enumerate(zip(fast.merges, ref.merges)):
        assert (a.left, a.right, a.size) == (b.left, b.right, b.size), f"merge {i}: {a} vs {b}"
        assert math.isclose(a.cost, b.cost, rel_tol=rel, abs_tol=1e-300), f"merge {i}: {a} vs {b}"


class MemberTracker:
    """Replays merge records to know the points of every live cluster id."""

    def __init__(self, n):
        self.members = {i: [i] for i in range(n)}
        self.next = n

    def apply(self, rec):
        merged = self.members.pop(rec.left) + self.members.pop(rec.right)
        self.members[self.next] = sorted(merged)
        self.next += 1
        return self.next - 1


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
