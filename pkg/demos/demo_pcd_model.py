"""
The same problem as an integer program
======================================

Exports the parent-child-depth model in LP format, builds the variable
assignment of a known packing, and checks it row by row.
"""

from pathpack import exact_solve, generate_random, path_value
from pathpack.pcd import check_pcd, export_pcd, paths_to_pcd, variable_count

g = generate_random(14, root_fraction=0.3, c=2.5, seed=3)
K = 4
text = export_pcd(g, K)
print(f"{variable_count(g)} variables, {text.count(chr(10))} lines of LP text")
print("\n".join(text.splitlines()[:12]))

#%%
# A feasible packing gives a point that satisfies every row.

best = exact_solve(g, K)
v = paths_to_pcd(best, g, K)
print("violation:", check_pcd(v, g, K), "objective:", v.objective(), "=", path_value(best))

#%%
# Break one entry and the checker names the row that fails.

node = best[0][1]
v.d[node] += 1
print("after bumping a depth:", check_pcd(v, g, K))
