"""Wall time of the exact Chamfer backend as n doubles (expect roughly 4x)."""

import statistics
import time

import numpy as np

from chamfer_hac import ChamferBackend, Dataset, run_hac

previous = None
for n in (1000, 2000, 4000):
    ds = Dataset(np.random.default_rng(n).normal(size=(n, 8)))
    times = []
    for _ in range(3):
        t0 = time.perf_counter()
        run_hac(ds, ChamferBackend("chamfer"))
        times.append(time.perf_counter() - t0)
    med = statistics.median(times)
    ratio = f"  x{med / previous:.2f}" if previous else ""
    print(f"n={n:5d}: {med:6.2f}s{ratio}")
    previous = med
