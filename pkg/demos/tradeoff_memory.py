"""Memory against time for the trade-off backend on one random dataset.

Every threshold t produces the same dendrogram; larger t stores less and
rebuilds more.
"""

import math
import time

import numpy as np

from chamfer_hac import ChamferBackend, Dataset, TradeoffBackend, run_hac

n = 1500
ds = Dataset(np.random.default_rng(0).normal(size=(n, 8)))

t0 = time.perf_counter()
ref_backend = ChamferBackend("chamfer")
ref = run_hac(ds, ref_backend)
print(f"quadratic backend: {time.perf_counter() - t0:6.2f}s  "
      f"peak entries {ref_backend.peak_entries:>10,d}")

for t in (1, 4, math.ceil(math.sqrt(n)), 100, n):
    backend = TradeoffBackend("chamfer", t=t)
    t0 = time.perf_counter()
    dg = run_hac(ds, backend)
    elapsed = time.perf_counter() - t0
    print(f"t={t:5d}: {elapsed:6.2f}s  peak entries {backend.peak_entries:>10,d}  "
          f"same dendrogram: {dg == ref}")
