import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.cluster.hierarchy import linkage as scipy_linkage
from scipy.sparse.csgraph import minimum_spanning_tree

from chamfer_hac import ClassicalBackend, Dataset, classical_value, hac, run_hac
from chamfer_hac.classical import LANCE_WILLIAMS, ClassicalKind, lance_williams_update
from chamfer_hac.geometry import pairwise_distances

from conftest import MemberTracker, random_dataset

KINDS = [k.value for k in ClassicalKind]
LINE = Dataset([[0.0], [1.0], [3.0]])


class TestClassicalValue:
    def test_examples(self):
        assert classical_value([0, 1], [2], "single", LINE) == 2.0
        assert classical_value([0, 1], [2], "complete", LINE) == 3.0
        assert classical_value([0, 1], [2], "average", LINE) == 2.5
        assert classical_value([0, 1], [2], "centroid", LINE) == 2.5

    def test_ward_example(self):
        assert classical_value([0, 1], [2], "ward", LINE) == pytest.approx(
            np.sqrt(4.0 / 3.0) * 2.5, rel=1e-15)

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            classical_value([], [2], "single", LINE)

    @pytest.mark.parametrize("kind", ["centroid", "ward"])
    def test_squared_kinds_need_euclidean(self, kind):
        with pytest.raises(ValueError, match="euclidean"):
            ClassicalBackend(kind, "sqeuclidean")


class TestLanceWilliams:
    # {0,1,10}: d(0,10)=10, d(1,10)=9, d(0,1)=1
    def test_examples(self):
        assert lance_williams_update("single", 10.0, 9.0, 1.0, 1, 1, 1) == 9.0
        assert lance_williams_update("complete", 10.0, 9.0, 1.0, 1, 1, 1) == 10.0
        assert lance_williams_update("average", 10.0, 9.0, 1.0, 1, 1, 1) == 9.5

    @settings(max_examples=200)
    @given(st.sampled_from(list(ClassicalKind)), st.floats(0, 100), st.floats(0, 100),
           st.floats(0, 100), st.integers(1, 50), st.integers(1, 50), st.integers(1, 50))
    def test_coefficient_form(self, kind, dac, dbc, dab, na, nb, nc):
        c = LANCE_WILLIAMS[kind]
        want = (c.alpha_a(na, nb, nc) * dac + c.alpha_b(na, nb, nc) * dbc
                + c.beta(na, nb, nc) * dab + c.gamma(na, nb, nc) * abs(dac - dbc))
        got = lance_williams_update(kind, dac, dbc, dab, na, nb, nc)
        assert got == pytest.approx(max(want, 0.0), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("kind", KINDS)
def test_recurrence_matches_direct(kind):
    for seed in range(3):
        ds = random_dataset(seed, 50, 3)
        backend = ClassicalBackend(kind)
        tracker = MemberTracker(ds.n)

        def cb(b, rec):
            new = tracker.apply(rec)
            for other in tracker.members:
                if other == new:
                    continue
                direct = classical_value(tracker.members[new], tracker.members[other], kind, ds)
                assert b.linkage_value(new, other) == pytest.approx(direct, rel=1e-9, abs=1e-12)

        run_hac(ds, backend, callback=cb)


@pytest.mark.parametrize("kind", ["single", "complete", "average", "ward"])
def test_reducibility(kind):
    for seed in range(3):
        ds = random_dataset(seed, 40, 2)
        backend = ClassicalBackend(kind)
        tracker = MemberTracker(ds.n)

        def cb(b, rec):
            a, c = tracker.members[rec.left], tracker.members[rec.right]
            new = tracker.apply(rec)
            for other, pts in tracker.members.items():
                if other == new:
                    continue
                lo = min(classical_value(a, pts, kind, ds), classical_value(c, pts, kind, ds))
                assert b.linkage_value(new, other) >= lo * (1 - 1e-12)

        run_hac(ds, backend, callback=cb)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 80), st.integers(1, 5))
def test_single_linkage_costs_are_mst_weights(seed, n, d):
    ds = random_dataset(seed, n, d)
    mst = minimum_spanning_tree(pairwise_distances(ds)).data
    costs = np.sort(hac(ds, "single").costs)
    np.testing.assert_allclose(costs, np.sort(mst), rtol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_heights_agree_with_scipy(kind):
    ds = random_dataset(4, 70, 3)
    ours = np.sort(hac(ds, kind).costs)
    ref = np.sort(scipy_linkage(ds.points, method=kind)[:, 2])
    np.testing.assert_allclose(ours, ref, rtol=1e-9)
