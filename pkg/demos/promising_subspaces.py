r"""
From predicted winners to search boxes
--------------------------------------
The classifier screens a large Latin hypercube pool against the pivot. The
predicted winners are clustered, the cluster count is read off the elbow of
the within-cluster sum of squares, and every cluster center gets a box that
stops at the nearest measured coordinate on each side.
"""
import numpy as np

from pairtune.benchmarks import get_benchmark
from pairtune.classifier import fit_samples
from pairtune.sampling import lhs, lhs_in_box
from pairtune.search import (best_cluster_num, bound_subspace, find_winners, generate_pool,
                             kmeans, wcss_curve)

d = 2
f = get_benchmark("multimodal", d)
X = lhs(d, 40, seed=3)
y = f(X)
clf = fit_samples(X, y)
pivot = clf.pivot.coords

#%%
# A pool of 1000 * d + 1 candidates, of which some are predicted winners.
pool = generate_pool(d, seed=4)
winners = find_winners(clf, pool, pivot)
print(f"{winners.shape[0]} of {pool.shape[0]} candidates predicted to beat {y.max():.3f}")

#%%
# The W(k) curve and the chosen k.
print("W(k):", np.round(wcss_curve(winners, 10, seed=5), 3))
k, _ = best_cluster_num(winners, seed=5)
clusters = kmeans(winners, k, seed=5)
print("k =", k, "cluster sizes", clusters.sizes())

#%%
# Boxes around the centers and the mean objective of points drawn inside
# them, against the mean of the initial sample.
drawn = []
for i, center in enumerate(clusters.centers):
    sub = bound_subspace(center, X)
    pts = lhs_in_box(sub.box, 10, seed=6 + i)
    drawn.append(pts)
    print(f"box {i}: lower {np.round(sub.box.lower, 3)} upper {np.round(sub.box.upper, 3)}")
print(f"initial mean {y.mean():.3f}, resampled mean {f(np.vstack(drawn)).mean():.3f}")
