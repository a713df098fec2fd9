"""Six points on a circle: merging two clusters can pull a third one closer.

Classical linkages such as average or Ward never let a merged cluster look
closer to an outsider than both of its parts did. Chamfer linkage can.
"""

import math

import numpy as np

from chamfer_hac import Dataset, chamfer_value, hac

angles = np.deg2rad(60.0 * np.arange(6))
ds = Dataset(np.column_stack([np.cos(angles), np.sin(angles)]), name="hexagon")
red, green, purple = [0, 1], [2, 3], [4, 5]
blue = red + green

print("Ch(purple, red)   =", chamfer_value(purple, red, "chamfer", ds))
print("Ch(purple, green) =", chamfer_value(purple, green, "chamfer", ds))
print("Ch(purple, blue)  =", chamfer_value(purple, blue, "chamfer", ds))
print("1 + sqrt(3)       =", 1 + math.sqrt(3))

print("\nFull Chamfer dendrogram (left, right, cost, size):")
for m in hac(ds, "chamfer").merges:
    print(f"  {m.left:2d} {m.right:2d}  {m.cost:.6f}  {m.size}")
