"""
Packing paths on a toy graph
============================

A handful of nodes, two roots, and every step of the pipeline printed:
messages, max-marginals, decoding, and a check against the exact optimum.
"""

import numpy as np

from pathpack import RootedDigraph, ah, decode_once, exact_solve, path_value

#%%
# Nodes 0 and 1 are roots. Paths may hold at most K=3 nodes, and no node may
# be used twice, so the two roots compete for the chain 2 -> 3 -> 4.

g = RootedDigraph(6, roots=[0, 1], edges=[(0, 2), (1, 3), (2, 3), (3, 4), (1, 5), (2, 5)])
K, beta = 3, 0.01
print(g.n, "nodes,", g.num_edges, "edges, roots", sorted(g.roots))

#%%
# Run a few sweeps. Each directed side keeps a short vector per family
# instead of a full table over (depth, parent, child).

state = ah.init_ah(g, K)
for _ in range(6):
    state = ah.iterate_ah(state, beta)
print("stored entries:", state.entry_count())
print("message 3 -> 2:", state.bundle(3, 2))

#%%
# The max-marginal of node 2 tells us the best depth and neighbours for it.
# Its cheapest configuration is read off directly.

print("best local config of node 2:", ah.max_marginal_config(state, beta, 2))

#%%
# Decoding visits roots in some order. Here both orders agree, because the
# messages already steer root 0 away from node 3.

for order in ([0, 1], [1, 0]):
    paths = decode_once(state, beta, order)
    print(order, "->", paths, "value", path_value(paths))

#%%
# With six nodes the exact optimum is instant.

best = exact_solve(g, K)
print("exact:", best, "value", path_value(best))
