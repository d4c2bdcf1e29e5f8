# %% [markdown]
# # Coexisting attractors
#
# For one parameter set four long-term behaviours share the phase plane. Every
# grid cell is iterated and labelled; the labels are merged in grid order so
# the picture does not depend on the thread count.

# %%
import numpy as np

from mrchialvo import Budget, basin_grid, correlation_dimension
from mrchialvo.attractors import attractor_points, circle_points
from mrchialvo.presets import TABLE3_K, preset

p = preset("fig10")["map"]
grid = basin_grid((-0.518, 10.633), (-0.115, 1.041), 80, 80, p, Budget())
labels, counts = np.unique(grid.cells, return_counts=True)
for lab, n in zip(labels, counts):
    rec = grid.attractor_table[int(lab)]
    print(f"{rec.name:15s} cells={n:5d}  largest Lyapunov={rec.lyap_max:+.4f}")

# %% [markdown]
# ## Fractal dimension of chaotic sets
# Correlation sums are counted with a k-d tree. A uniform circle is the sanity
# check and should come out close to 1.

# %%
print(f"circle: {correlation_dimension(circle_points(10000)):.3f}")
base = preset("table3")["map"]
for k in TABLE3_K:
    print(f"k = {k}: D2 = {correlation_dimension(attractor_points(base.with_(k=k))):.3f}")
