import pytest

from chamfer_hac import Dataset, hac, oracle_hac
from chamfer_hac.linkages import LINKAGES, make_backend
from chamfer_hac.oracle import parse_linkage

from conftest import assert_same_dendrogram, hexagon, random_dataset


def test_line_example_matches_engine():
    pts = [[0.0], [1.0], [10.0]]
    dg = oracle_hac(pts, "chamfer")
    assert [tuple(m) for m in dg.merges] == [(0, 1, 1.0, 2), (3, 2, 9.0, 3)]
    assert dg == hac(pts, "chamfer")


@pytest.mark.parametrize("linkage", LINKAGES)
def test_two_points(linkage):
    dg = oracle_hac([[0.0, 0.0], [3.0, 4.0]], linkage)
    want = {"chamfer-s": 10.0, "chamfer-ns": 10.0}.get(linkage, 5.0)
    assert len(dg.merges) == 1
    assert dg.merges[0].cost == pytest.approx(want, rel=1e-15)


def test_hexagon():
    ds = hexagon()
    dg = oracle_hac(ds, "chamfer")
    # every adjacent pair costs 1; the smallest source (0) takes its
    # largest-id neighbour (5), then point 1 joins the new cluster 6, which
    # ties with point 2 and wins as the newest id
    assert [m[:2] for m in dg.merges[:2]] == [(0, 5), (6, 1)]
    assert [m.cost for m in dg.merges[:2]] == pytest.approx([1.0, 1.0], rel=1e-12)
    assert dg == hac(ds, "chamfer")


def test_cap():
    with pytest.raises(ValueError, match="oracle cap exceeded"):
        oracle_hac(random_dataset(0, 20, 1), "chamfer", cap=10)
    assert oracle_hac(random_dataset(0, 20, 1), "chamfer", cap=None).n == 20


def test_unknown_linkage():
    with pytest.raises(ValueError, match="unknown linkage"):
        parse_linkage("median")


@pytest.mark.parametrize("linkage", LINKAGES)
@pytest.mark.parametrize("metric", ["euclidean", "sqeuclidean"])
def test_matches_fast_backends(linkage, metric):
    if linkage in ("centroid", "ward") and metric != "euclidean":
        with pytest.raises(ValueError, match="euclidean"):
            oracle_hac(random_dataset(0, 5, 1), linkage, metric)
        return
    for seed in range(3):
        ds = random_dataset(seed, 30, 3)
        fast = hac(ds, linkage, metric)
        assert_same_dendrogram(fast, oracle_hac(ds, linkage, metric))


def test_make_backend_rejects_classical_tradeoff():
    with pytest.raises(ValueError, match="only available for Chamfer"):
        make_backend("ward", tradeoff_t=3)
