"""
BP against greedy on one random instance
========================================

One sample of the standard random model: 1000 nodes, 20% roots, mean degree
around 3, paths of up to five nodes.
"""

import time

from pathpack import InstanceParams, generate_random, greedy_solve, path_value, solve_bp

g = generate_random(1000, root_fraction=0.2, c=3.0, seed=11)
print(f"{g.n} nodes after pruning, {len(g.roots)} roots, {g.num_edges} edges")

#%%
# Greedy takes the longest available path from each root in turn, under 200
# random root orders, and keeps the best.

t0 = time.perf_counter()
paths, rep = greedy_solve(g, K=5, num_orders=200, rng=11)
print(f"greedy: {path_value(paths)} nodes covered ({time.perf_counter() - t0:.2f}s)")

#%%
# BP decodes after every sweep and keeps its best collection so far.

params = InstanceParams(K=5, seed=11)
paths, rep = solve_bp(g, params)
print(f"bp: {rep.best_value} nodes covered at sweep {rep.best_iteration} "
      f"of {rep.iterations} ({rep.wall_time:.2f}s)")
print("best so far, every fifth sweep:", rep.best_so_far[::5])

#%%
# The paths themselves, first few, in node ids.

for p in paths[:5]:
    print(" -> ".join(map(str, p)))
