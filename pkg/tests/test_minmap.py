import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chamfer_hac.minmap import MinTrackingMap, MinTreeBank


def naive_min(d):
    best = min(d.values())
    return max(k for k, v in d.items() if v == best), best


class TestMinTrackingMap:
    def test_basic(self):
        m = MinTrackingMap(10, {3: 2.0, 5: 1.0})
        assert m.min() == (5, 1.0)
        m[5] = 4.0
        assert m.min() == (3, 2.0)
        del m[3]
        assert m.min() == (5, 4.0)
        assert len(m) == 1 and 3 not in m and 5 in m

    def test_ties_go_to_larger_key(self):
        m = MinTrackingMap(40, {1: 1.0, 33: 1.0, 7: 1.0})
        assert m.min() == (33, 1.0)

    def test_single_entry(self):
        assert MinTrackingMap(1, {0: 9.0}).min() == (0, 9.0)

    def test_empty(self):
        with pytest.raises(ValueError):
            MinTrackingMap(3).min()

    def test_key_range(self):
        m = MinTrackingMap(3)
        with pytest.raises(KeyError):
            m[3] = 1.0
        with pytest.raises(KeyError):
            m[1]
        with pytest.raises(KeyError):
            del m[1]

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            MinTrackingMap(2)[0] = float("nan")

    def test_pop_and_items(self):
        m = MinTrackingMap(5, {4: 1.5, 0: 2.5})
        assert sorted(m.items()) == [(0, 2.5), (4, 1.5)]
        assert m.pop(4) == 1.5
        assert m.pop(4, "gone") == "gone"
        assert list(m) == [0]

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 300), st.lists(
        st.tuples(st.sampled_from(["set", "del"]), st.integers(0, 299),
                  st.integers(0, 6).map(float)), max_size=200))
    def test_against_dict(self, cap, ops):
        m, ref = MinTrackingMap(cap), {}
        for op, key, val in ops:
            key %= cap
            if op == "set":
                m[key] = val
                ref[key] = val
            elif key in ref:
                del m[key]
                del ref[key]
            assert len(m) == len(ref)
            if ref:
                assert m.min() == naive_min(ref)


class TestMinTreeBank:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 600))
    def test_refresh_matches_rebuild(self, seed, rows, cols):
        rng = np.random.default_rng(seed)
        vals = rng.integers(0, 5, size=(rows, cols)).astype(float)
        tags = rng.permutation(cols)
        bank = MinTreeBank(vals, tags)
        changed = rng.choice(cols, size=min(cols, 5), replace=False)
        vals[:, changed] = rng.integers(0, 5, size=(rows, changed.size))
        bank.leaves[:rows, :cols] = vals
        bank.refresh_cols(changed)
        v, c = bank.row_min()
        for r in range(rows):
            best = vals[r].min()
            hits = np.flatnonzero(vals[r] == best)
            assert v[r] == best
            assert c[r] == hits[np.argmax(tags[hits])]

    def test_refresh_subset_of_rows(self):
        bank = MinTreeBank(np.array([[3.0, 2.0], [3.0, 2.0]]), np.array([0, 1]))
        bank.leaves[:, 0] = 1.0
        bank.refresh_cols([0], rows=np.array([1]))
        v, c = bank.row_min()
        assert v.tolist() == [2.0, 1.0] and c.tolist() == [1, 0]

    def test_dead_tag_loses_ties(self):
        bank = MinTreeBank(np.array([[1.0, 1.0]]), np.array([-1, 0]))
        assert bank.row_min()[1][0] == 1
