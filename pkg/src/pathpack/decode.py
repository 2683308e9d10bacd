"""Rebuilding feasible path collections from A-H messages.

Roots are processed in a given order.  Each root either stays idle or starts
a path with an available non-root neighbour, and the path is then grown one
node at a time by comparing the max-marginal of ending the path with that of
continuing to each available successor.  Every compared quantity shares the
term ``sum_k H[k -> j]``, so only the offsets ``A - H`` and ``B - H`` matter.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import ah
from .errors import InvariantError
from .feasibility import PathCollection, path_value, validate_path_collection
from .graph import RootedDigraph
from .params import InstanceParams

INF = float("inf")


class _Offsets:
    """``A - H`` and ``B - H`` per side as nested lists, for fast scalar access."""

    def __init__(self, state: ah.MessageState):
        self.sides = state.sides
        h = state.H[:, None]
        with np.errstate(invalid="ignore"):
            self.qa = (state.A - h).astype(float).tolist()
            self.qb = (state.B - h).astype(float).tolist()
        self.index = state.sides.index


def decode_once(state: ah.MessageState, beta: float, root_order, check: bool = True,
                offsets: _Offsets | None = None) -> PathCollection:
    """Decode one path collection, visiting roots in ``root_order``.

    Ties between stopping and continuing go to continuing; ties between
    candidates go to the lowest node id.  With ``check`` the result is
    validated and candidates that are neighbours but not successors are
    confirmed to carry infinite cost.
    """
    g = state.g
    K = state.K
    off = offsets if offsets is not None else _Offsets(state)
    qa, qb, index = off.qa, off.qb, off.index
    avail = [not r for r in g.is_root]
    paths = []
    for u in root_order:
        u = int(u)
        if check and g.neighbors(u) != g.out_neighbors(u):
            raise InvariantError(f"root {u} has an incoming edge")
        best, child = INF, -1
        for j in g.neighbors(u):
            if avail[j]:
                v = qa[index[(j, u)]][2]
                if v < best:
                    best, child = v, j
        if child < 0 or not best <= beta:
            continue
        path = [u, child]
        avail[child] = False
        while len(path) < K:
            d = len(path)
            p, j = path[-2], path[-1]
            end = qb[index[(p, j)]][d - 1]
            best, nxt = INF, -1
            for i in g.nonroot_neighbors(j):
                if avail[i]:
                    v = qa[index[(i, j)]][d + 1]
                    if v < best:
                        best, nxt = v, i
            if check:
                for i in g.nonroot_neighbors(j):
                    if avail[i] and not g.has_edge(j, i) and qa[index[(i, j)]][d + 1] != INF:
                        raise InvariantError(f"finite continuation {j}->{i} against edge direction")
            if nxt < 0:
                break
            if end != INF and best > 0:
                break
            path.append(nxt)
            avail[nxt] = False
        paths.append(tuple(path))
    if check:
        bad = validate_path_collection(paths, g, K)
        if bad is not None:
            raise InvariantError(f"decoded an infeasible collection: {bad}")
    return paths


def decode_best(state: ah.MessageState, beta: float, num_orders: int, rng,
                check: bool = True) -> PathCollection:
    """Best collection over ``num_orders`` uniformly random root orders (first found wins ties)."""
    if num_orders < 1:
        raise ValueError("num_orders must be >= 1")
    roots = np.array(sorted(state.g.roots), dtype=np.int64)
    off = _Offsets(state)
    best, best_val = [], -1
    for _ in range(num_orders):
        order = rng.permutation(roots)
        paths = decode_once(state, beta, order, check=check, offsets=off)
        val = path_value(paths)
        if val > best_val:
            best, best_val = paths, val
    return best


def iteration_rng(seed: int, t: int) -> np.random.Generator:
    """Root-order generator for iteration ``t``, independent of every other iteration."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))


@dataclass
class BPReport:
    iterations: int
    converged: bool
    truncated: bool
    best_value: int
    best_iteration: int
    values: list = field(default_factory=list)        # best decode at each iteration
    best_so_far: list = field(default_factory=list)   # running maximum of ``values``
    wall_time: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("wall_time")
        return d


def solve_bp(g: RootedDigraph, params: InstanceParams | None = None, check: bool = True,
             normalized: bool = False) -> tuple[PathCollection, BPReport]:
    """Run BP for up to ``params.T`` sweeps, decoding after every sweep; keep the best.

    ``normalized`` is passed to :func:`pathpack.ah.run`.
    """
    params = params or InstanceParams()
    t0 = time.perf_counter()
    best: PathCollection = []
    best_val, best_t = 0, 0
    values, running = [], []

    def hook(t, state):
        nonlocal best, best_val, best_t
        paths = decode_best(state, params.beta, params.bp_orders, iteration_rng(params.seed, t),
                            check=check)
        val = path_value(paths)
        values.append(val)
        if val > best_val:
            best, best_val, best_t = paths, val, t
        running.append(best_val)

    if g.n == 0:
        return [], BPReport(0, True, False, 0, 0, wall_time=time.perf_counter() - t0)
    res = ah.run(g, params.K, params.beta, params.T, time_limit=params.time_limit, callback=hook,
                 normalized=normalized)
    report = BPReport(res.iterations, res.converged, res.truncated, best_val, best_t,
                      values, running, time.perf_counter() - t0)
    return best, report
