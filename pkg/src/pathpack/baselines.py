"""Comparison solvers: randomized greedy longest paths and an exact search for small graphs."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .feasibility import PathCollection, path_value
from .graph import RootedDigraph

EXACT_MAX_NODES = 14


def longest_path(g: RootedDigraph, root: int, K: int, avail) -> tuple[int, ...]:
    """Longest path of at most ``K`` nodes from ``root`` through ``avail`` nodes.

    Depth-first over successors in increasing id order; a path replaces the
    incumbent only when strictly longer, so ties go to the first found.
    """
    best = (root,)
    path = [root]
    on_path = set(path)

    def dfs(j):
        nonlocal best
        if len(path) > len(best):
            best = tuple(path)
            if len(best) == K:
                return True
        if len(path) == K:
            return False
        for i in g.out_neighbors(j):
            if avail[i] and i not in on_path:
                path.append(i)
                on_path.add(i)
                done = dfs(i)
                path.pop()
                on_path.discard(i)
                if done:
                    return True
        return False

    dfs(root)
    return best


def greedy_once(g: RootedDigraph, K: int, root_order) -> PathCollection:
    avail = [not r for r in g.is_root]
    paths = []
    for u in root_order:
        p = longest_path(g, int(u), K, avail)
        if len(p) < 2:
            continue
        for v in p[1:]:
            avail[v] = False
        paths.append(p)
    return paths


@dataclass
class GreedyReport:
    orders: int
    best_order: int
    best_value: int
    wall_time: float


def greedy_solve(g: RootedDigraph, K: int, num_orders: int = 200,
                 rng=None) -> tuple[PathCollection, GreedyReport]:
    """Best greedy collection over ``num_orders`` random root orders."""
    if num_orders < 1:
        raise InputError("num_orders must be >= 1")
    rng = np.random.default_rng(rng)
    t0 = time.perf_counter()
    roots = np.array(sorted(g.roots), dtype=np.int64)
    best, best_val, best_k = [], -1, 0
    for k in range(num_orders):
        paths = greedy_once(g, K, rng.permutation(roots))
        val = path_value(paths)
        if val > best_val:
            best, best_val, best_k = paths, val, k
    return best, GreedyReport(num_orders, best_k, max(best_val, 0), time.perf_counter() - t0)


def rooted_paths(g: RootedDigraph, root: int, K: int, avail=None) -> list[tuple[int, ...]]:
    """Every path of 2..K nodes starting at ``root``, optionally through ``avail`` nodes only."""
    out = []
    path = [root]

    def dfs(j):
        if len(path) >= 2:
            out.append(tuple(path))
        if len(path) == K:
            return
        for i in g.out_neighbors(j):
            if (avail is None or avail[i]) and i not in path:
                path.append(i)
                dfs(i)
                path.pop()

    dfs(root)
    return out


def _check_guard(g: RootedDigraph, max_nodes: int):
    if g.n > max_nodes:
        raise InputError(f"exact search is limited to n <= {max_nodes} (got n={g.n}); "
                         "raise max_nodes to override")


def exact_solve(g: RootedDigraph, K: int, max_nodes: int = EXACT_MAX_NODES) -> PathCollection:
    """An optimal collection by branch and bound over the roots.

    Each root in turn is left idle or given one path through the still
    available nodes.  A branch is cut when its value plus every available
    node plus one per unprocessed root cannot beat the incumbent.
    """
    _check_guard(g, max_nodes)
    roots = sorted(g.roots)
    avail = [not r for r in g.is_root]
    free = [sum(avail)]
    best: list = [[], 0]
    chosen: list = []

    def search(k, value):
        if value > best[1]:
            best[0], best[1] = list(chosen), value
        if k == len(roots) or value + free[0] + (len(roots) - k) <= best[1]:
            return
        for p in sorted(rooted_paths(g, roots[k], K, avail), key=len, reverse=True):
            for v in p[1:]:
                avail[v] = False
            free[0] -= len(p) - 1
            chosen.append(p)
            search(k + 1, value + len(p))
            chosen.pop()
            free[0] += len(p) - 1
            for v in p[1:]:
                avail[v] = True
        search(k + 1, value)

    search(0, 0)
    return best[0]


def enumerate_optimum(g: RootedDigraph, K: int, max_nodes: int = EXACT_MAX_NODES) -> int:
    """Optimal value by plain enumeration of every disjoint set of rooted paths (no pruning)."""
    _check_guard(g, max_nodes)
    every = [p for r in sorted(g.roots) for p in rooted_paths(g, r, K)]
    masks = [(sum(1 << v for v in p), len(p)) for p in every]

    def rec(k, used):
        if k == len(masks):
            return 0
        best = rec(k + 1, used)
        m, size = masks[k]
        if not m & used:
            best = max(best, size + rec(k + 1, used | m))
        return best

    return rec(0, 0)
