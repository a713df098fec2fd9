"""Score every linkage on the bundled iris data with the four external indices."""

from chamfer_hac import LINKAGES, evaluate_dendrogram, hac, height
from chamfer_hac.datasets import load_iris

ds = load_iris()
print(f"iris: n={ds.n} d={ds.d} classes={ds.k}\n")
print(f"{'linkage':<12}{'ARI':>8}{'NMI':>8}{'AMI':>8}{'FMI':>8}{'height':>8}")
for linkage in LINKAGES:
    dg = hac(ds, linkage)
    report = evaluate_dendrogram(dg, ds.labels)
    scores = "".join(f"{report.best(m):8.3f}" for m in ("ari", "nmi", "ami", "fmi"))
    print(f"{linkage:<12}{scores}{height(dg):8d}")
