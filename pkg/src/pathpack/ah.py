"""Compact min-sum messages for rooted path packing (the A-H form).

For an ordered adjacent pair ``j -> i`` the dense message over all
configurations of ``i`` is fully described by O(K) numbers:

======  ==================================================================
``A[d]``  ``j`` is the child of ``i`` and sits at depth ``d``
``B[d]``  ``j`` is the parent of ``i`` and sits at depth ``d``
``F[d]``  ``j`` is on a path at depth ``d`` and unrelated to ``i``
``G``     ``j`` is idle
``H``     ``min(G, min_d F[d])``, the cost whenever ``i`` and ``j`` are unrelated
======  ==================================================================

Which entries exist depends on the kinds of the endpoints:

* non-root to non-root: ``A[3..K]``, ``B[2..K-1]``, ``F[2..K]``, ``G``, ``H``
* non-root to root:     ``A[2]``, ``F[2..K]``, ``G``, ``H``
* root to non-root:     ``B[1]``, ``F[1]``, ``G``, ``H``

Arrays are indexed by depth directly; entries that do not exist hold ``inf``,
which makes the update rules uniform across the three kinds.  Column ``K+1``
of ``A`` is permanently ``inf`` (no node can sit below depth ``K``).

One sweep costs O(K) per side.  At each node the three smallest values of
every keyed quantity ``X[k -> j] - H[k -> j]`` are kept, so that minima with
up to two excluded neighbours are answered in constant time.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .dense import DenseTable, NodeDomain, dense_from_arrays
from .errors import InputError, InvariantError
from .feasibility import STAR, Value
from .graph import RootedDigraph

INF = np.inf
EPS_FIX = 1e-12
SNAPSHOT_VERSION = 1


class Sides:
    """Directed message slots ``j -> i`` for every adjacent pair, grouped by receiver."""

    def __init__(self, g: RootedDigraph, K: int):
        self.g = g
        self.K = K
        n = g.n
        raw = []
        for a, b in g.undirected_pairs():
            raw.append((a, b))
            raw.append((b, a))
        raw.sort(key=lambda e: (e[1], e[0]))
        self.m = len(raw)
        self.index = {e: k for k, e in enumerate(raw)}
        self.snd = np.array([e[0] for e in raw], dtype=np.int64)
        self.rcv = np.array([e[1] for e in raw], dtype=np.int64)
        self.rev = np.array([self.index[(b, a)] for a, b in raw], dtype=np.int64)
        self.starts = np.searchsorted(self.rcv, np.arange(n))

        is_root = np.array(g.is_root, dtype=bool)
        snd_root = is_root[self.snd] if self.m else np.zeros(0, bool)
        rcv_root = is_root[self.rcv] if self.m else np.zeros(0, bool)
        if np.any(snd_root & rcv_root):
            raise InvariantError("two roots are adjacent")
        self.vv = ~snd_root & ~rcv_root
        self.vu = ~snd_root & rcv_root
        self.uv = snd_root & ~rcv_root
        # delta_a: edge receiver -> sender (needed when the sender is the child)
        # delta_b: edge sender -> receiver (needed when the sender is the parent)
        self.delta_a = np.array([0.0 if g.has_edge(b, a) else INF for a, b in raw])
        self.delta_b = np.array([0.0 if g.has_edge(a, b) else INF for a, b in raw])
        if np.any(np.isinf(self.delta_a[self.vu])):
            raise InvariantError("root adjacent to a node it has no edge to")

        self.a_valid = np.zeros((self.m, K + 2), dtype=bool)
        self.a_valid[self.vu, 2] = True
        self.a_valid[np.ix_(self.vv, np.arange(3, K + 1))] = True
        self.b_valid = np.zeros((self.m, K + 1), dtype=bool)
        self.b_valid[self.uv, 1] = True
        self.b_valid[np.ix_(self.vv, np.arange(2, K))] = True
        self.f_valid = np.zeros((self.m, K + 1), dtype=bool)
        self.f_valid[self.uv, 1] = True
        self.f_valid[np.ix_(~snd_root, np.arange(2, K + 1))] = True

        # per node: sorted (child, side child -> node) over out-neighbours, for decoding
        self.child_sides = [
            [(k, self.index[(k, j)]) for k in g.out_neighbors(j)] for j in range(n)
        ]

    def side(self, j: int, i: int) -> int:
        return self.index[(j, i)]

    def incoming(self, j: int) -> range:
        stop = self.starts[j + 1] if j + 1 < self.g.n else self.m
        return range(int(self.starts[j]), int(stop))

    def closed_form_entry_count(self) -> int:
        """Entries implied by the three bundle layouts, counted per side kind."""
        K = self.K
        return (int(self.vv.sum()) * (3 * K - 3) + int(self.vu.sum()) * (K + 2)
                + int(self.uv.sum()) * 4)


@dataclass
class MessageState:
    sides: Sides
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    t: int = 0
    ops: int = 0
    last_ops: int = 0

    @property
    def g(self) -> RootedDigraph:
        return self.sides.g

    @property
    def K(self) -> int:
        return self.sides.K

    def entry_count(self) -> int:
        s = self.sides
        return int(s.a_valid.sum() + s.b_valid.sum() + s.f_valid.sum()) + 2 * s.m

    def bundle(self, j: int, i: int) -> dict:
        """The entries of message ``j -> i`` keyed by family and depth."""
        s = self.sides
        e = s.side(j, i)
        return {
            "A": {int(d): float(self.A[e, d]) for d in np.flatnonzero(s.a_valid[e])},
            "B": {int(d): float(self.B[e, d]) for d in np.flatnonzero(s.b_valid[e])},
            "F": {int(d): float(self.F[e, d]) for d in np.flatnonzero(s.f_valid[e])},
            "G": float(self.G[e]),
            "H": float(self.H[e]),
        }

    def arrays(self) -> tuple[np.ndarray, ...]:
        return self.A, self.B, self.F, self.G, self.H

    def copy(self) -> "MessageState":
        return MessageState(self.sides, self.A.copy(), self.B.copy(), self.F.copy(),
                            self.G.copy(), self.H.copy(), self.t, self.ops, self.last_ops)


def init_ah(g: RootedDigraph, K: int, value: float = 1.0, dtype=np.float64) -> MessageState:
    """All existing entries set to ``value``; non-existent slots hold ``inf``.

    ``dtype`` may be ``np.longdouble`` for extended-precision comparisons.
    """
    if K < 2:
        raise InputError("K must be >= 2")
    s = Sides(g, K)
    one = np.asarray(value, dtype=dtype)
    A = np.where(s.a_valid, one, np.asarray(INF, dtype=dtype))
    B = np.where(s.b_valid, one, np.asarray(INF, dtype=dtype))
    F = np.where(s.f_valid, one, np.asarray(INF, dtype=dtype))
    return MessageState(s, A, B, F, np.full(s.m, one), np.full(s.m, one))


# ---------------------------------------------------------------------------
# three smallest values per receiver


class ThreeMin:
    """The three smallest ``(value, node)`` pairs of a keyed quantity.

    Enough to answer a minimum with up to two nodes excluded.  Infinite
    values are not kept, since they never win a minimum.
    """

    __slots__ = ("items",)

    def __init__(self, pairs: Iterable[tuple[float, int]] = ()):
        best: list[tuple[float, int]] = []
        for v, k in pairs:
            if v == INF:
                continue
            if len(best) < 3:
                best.append((v, k))
                best.sort()
            elif (v, k) < best[2]:
                best[2] = (v, k)
                best.sort()
        self.items = best

    def min_excluding(self, a: int = -1, b: int = -1) -> float:
        for v, k in self.items:
            if k != a and k != b:
                return v
        return INF

    def pair_min(self, other: "ThreeMin", exclude: int) -> float:
        """``min_l self[l] + min(0, min_{k != l} other[k])`` with ``l, k != exclude``."""
        best = INF
        for v, l in self.items:
            if l == exclude:
                continue
            cand = v + min(0.0, other.min_excluding(exclude, l))
            if cand < best:
                best = cand
        return best


def _top3(q: np.ndarray, sides: Sides):
    """Per receiver, the three smallest values of ``q`` over incoming sides and their senders."""
    n = sides.g.n
    work = q.copy()
    pos = np.arange(sides.m)
    vals = np.empty((n, 3), dtype=q.dtype)
    who = np.full((n, 3), -1, dtype=np.int64)
    big = sides.m
    for r in range(3):
        low = np.minimum.reduceat(work, sides.starts)
        hit = work == low[sides.rcv]
        first = np.minimum.reduceat(np.where(hit, pos, big), sides.starts)
        vals[:, r] = low
        who[:, r] = np.where(np.isfinite(low), sides.snd[first], -1)
        work[first] = INF
    return vals, who, 9 * sides.m


class _Top:
    """Top-3 table gathered onto sending sides: row ``e`` describes node ``snd[e]``."""

    def __init__(self, q: np.ndarray, sides: Sides):
        vals, who, self.ops = _top3(q, sides)
        self.vals = vals[sides.snd]
        self.who = who[sides.snd]

    def excl(self, x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
        keep = self.who != x[:, None]
        if y is not None:
            keep &= self.who != y[:, None]
        return np.where(keep, self.vals, INF).min(axis=1)


class _EmptyTop:
    ops = 0

    def __init__(self, m, dtype):
        self.m = m
        self.dtype = dtype

    def excl(self, x, y=None):
        return np.full(self.m, INF, dtype=self.dtype)


def _pair_min(tb: _Top, ta, excl: np.ndarray) -> np.ndarray:
    best = np.full(excl.shape[0], INF, dtype=tb.vals.dtype)
    for r in range(3):
        lv = np.where(tb.who[:, r] != excl, tb.vals[:, r], INF)
        cand = lv + np.minimum(0.0, ta.excl(excl, tb.who[:, r]))
        best = np.minimum(best, cand)
    return best


def _sweep_vectorized(state: MessageState, beta: float):
    s = state.sides
    K = s.K
    m = s.m
    A, B, H = state.A, state.B, state.H
    ops = 0
    hsum = np.add.reduceat(H, s.starts)
    S = hsum[s.snd] - H[s.rev]
    ops += 3 * m
    excl = s.rcv

    qa = A - H[:, None]
    qb = B - H[:, None]
    ops += qa.size + qb.size
    top_a = {d: _Top(qa[:, d], s) for d in range(2, K + 1)}
    top_a[K + 1] = _EmptyTop(m, A.dtype)
    top_b = {d: _Top(qb[:, d], s) for d in range(1, K)}
    ops += sum(t.ops for t in top_a.values()) + sum(t.ops for t in top_b.values())

    newA = np.full_like(A, INF)
    newB = np.full_like(B, INF)
    newF = np.full_like(state.F, INF)
    for d in range(2, K + 1):
        newA[:, d] = s.delta_a + S + np.minimum(0.0, top_a[d + 1].excl(excl))
        ops += 9 * m
    newB[:, 1] = S
    for d in range(2, K):
        newB[:, d] = s.delta_b + S + top_b[d - 1].excl(excl)
        ops += 8 * m
    newF[:, 1] = S + top_a[2].excl(excl)
    ops += 7 * m
    for d in range(2, K + 1):
        newF[:, d] = S + _pair_min(top_b[d - 1], top_a[d + 1], excl)
        ops += 40 * m
    newA[~s.a_valid] = INF
    newB[~s.b_valid] = INF
    newF[~s.f_valid] = INF
    G = beta + S
    Hn = np.minimum(G, newF.min(axis=1))
    ops += m * (K + 3)
    return newA, newB, newF, G, Hn, ops


class _Counter:
    __slots__ = ("n",)

    def __init__(self):
        self.n = 0


def update_node(j: int, state: MessageState, beta: float, counter: _Counter | None = None) -> dict:
    """All outgoing messages of node ``j``, computed from ``state`` one node at a time.

    Returns ``{i: bundle}`` with bundles shaped like :meth:`MessageState.bundle`.
    Work is O(K * deg(j)): each keyed quantity is reduced once to its three
    smallest values and every target is then served by exclusion queries.
    """
    s = state.sides
    g = s.g
    K = s.K
    ctr = counter if counter is not None else _Counter()
    A, B, H = state.A, state.B, state.H
    inc = s.incoming(j)
    senders = [int(s.snd[e]) for e in inc]
    h_in = {int(s.snd[e]): float(H[e]) for e in inc}
    hsum = sum(h_in[k] for k in senders)
    ctr.n += len(senders)

    def top(arr, d):
        ctr.n += 2 * len(senders)
        return ThreeMin((float(arr[e, d]) - float(H[e]), int(s.snd[e])) for e in inc)

    out = {}
    if g.is_root[j]:
        ta2 = top(A, 2)
        for i in g.neighbors(j):
            S = hsum - h_in[i]
            F1 = S + ta2.min_excluding(i)
            G = beta + S
            out[i] = {"A": {}, "B": {1: S}, "F": {1: F1}, "G": G, "H": min(G, F1)}
            ctr.n += 8
        return out

    ta = {d: top(A, d) for d in range(2, K + 1)}
    ta[K + 1] = ThreeMin()
    tb = {d: top(B, d) for d in range(1, K)}
    for i in g.neighbors(j):
        e = s.side(j, i)
        S = hsum - h_in[i]
        bundle = {"A": {}, "B": {}, "F": {}}
        if g.is_root[i]:
            bundle["A"][2] = S + min(0.0, ta[3].min_excluding(i))
        else:
            for d in range(3, K + 1):
                bundle["A"][d] = float(s.delta_a[e]) + S + min(0.0, ta[d + 1].min_excluding(i))
            for d in range(2, K):
                bundle["B"][d] = float(s.delta_b[e]) + S + tb[d - 1].min_excluding(i)
        for d in range(2, K + 1):
            bundle["F"][d] = S + tb[d - 1].pair_min(ta[d + 1], i)
        G = beta + S
        bundle["G"] = G
        bundle["H"] = min(G, min(bundle["F"].values()))
        out[i] = bundle
        ctr.n += 1 + 4 * len(bundle["A"]) + 4 * len(bundle["B"]) + 12 * len(bundle["F"]) + 2
    return out


def _sweep_by_node(state: MessageState, beta: float):
    s = state.sides
    newA = np.full_like(state.A, INF)
    newB = np.full_like(state.B, INF)
    newF = np.full_like(state.F, INF)
    G = np.empty(s.m)
    H = np.empty(s.m)
    ctr = _Counter()
    for j in range(s.g.n):
        for i, bundle in update_node(j, state, beta, ctr).items():
            e = s.side(j, i)
            for d, v in bundle["A"].items():
                newA[e, d] = v
            for d, v in bundle["B"].items():
                newB[e, d] = v
            for d, v in bundle["F"].items():
                newF[e, d] = v
            G[e] = bundle["G"]
            H[e] = bundle["H"]
    return newA, newB, newF, G, H, ctr.n


def normalize(state: MessageState) -> MessageState:
    """Shift every message by its own ``H`` so that stored ``H`` is zero.

    A per-message constant does not change any outgoing update beyond the
    same constant shift, nor any decoding decision, but it keeps values
    bounded on graphs with cycles.
    """
    out = state.copy()
    h = out.H[:, None]
    out.A = out.A - h
    out.B = out.B - h
    out.F = out.F - h
    out.G = out.G - out.H
    out.H = np.zeros_like(out.H)
    return out


def iterate_ah(state: MessageState, beta: float, method: str = "vectorized",
               normalized: bool = False) -> MessageState:
    """One synchronous sweep: every message recomputed from ``state``.

    ``method`` selects the whole-graph array sweep or the node-by-node
    reference; both give the same messages.
    """
    if state.sides.m == 0:
        return MessageState(state.sides, state.A, state.B, state.F, state.G, state.H,
                            state.t + 1, state.ops, 0)
    if method == "vectorized":
        A, B, F, G, H, ops = _sweep_vectorized(state, beta)
    elif method == "node":
        A, B, F, G, H, ops = _sweep_by_node(state, beta)
    else:
        raise InputError(f"unknown sweep method {method!r}")
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(H))):
        raise InvariantError("non-finite G or H after a sweep")
    new = MessageState(state.sides, A, B, F, G, H, state.t + 1, state.ops + ops, ops)
    if normalized:
        new = normalize(new)
    return new


def is_fixed_point(a: MessageState, b: MessageState, eps: float = EPS_FIX) -> bool:
    """Elementwise equality within ``eps``; infinite entries must coincide."""
    for x, y in zip(a.arrays(), b.arrays()):
        fx = np.isfinite(x)
        if not np.array_equal(fx, np.isfinite(y)):
            return False
        if fx.any() and np.max(np.abs(x[fx] - y[fx])) > eps:
            return False
    return True


# ---------------------------------------------------------------------------
# relation to the dense messages


def _dense_message(state: MessageState, e: int, dom: NodeDomain) -> np.ndarray:
    s = state.sides
    j = int(s.snd[e])
    D, P, C = dom.D, dom.P, dom.C
    out = np.full(dom.size, state.H[e])
    par = P == j
    chi = C == j
    out[par] = state.B[e][np.clip(D[par] - 1, 0, s.K)]
    out[chi] = state.A[e][np.clip(D[chi] + 1, 0, s.K + 1)]
    out[~dom.valid] = INF
    return out


def ah_to_dense(state: MessageState) -> DenseTable:
    """Expand every compact message to its full dense form.

    For receiver configuration ``(d, p, c)`` of ``i`` and sender ``j``:
    invalid local configurations cost ``inf``; ``p == j`` reads ``B[d-1]``;
    ``c == j`` reads ``A[d+1]``; every other configuration reads ``H``.
    """
    s = state.sides
    g = s.g
    tbl = dense_from_arrays(g, s.K, {}, t=state.t, allow_large=True)
    for e in range(s.m):
        j, i = int(s.snd[e]), int(s.rcv[e])
        tbl.msgs[(j, i)] = _dense_message(state, e, tbl.domains[i])
    return tbl


def max_marginals_ah(state: MessageState, beta: float, i: int,
                     domain: NodeDomain | None = None) -> np.ndarray:
    """Negative-log max-marginals of node ``i`` over its :class:`NodeDomain`.

    Uses ``sum_k H[k->i] + beta*idle + (B[d-1] - H)[p->i] + (A[d+1] - H)[c->i]``,
    which is the dense sum with the unrelated neighbours collapsed to ``H``.
    """
    s = state.sides
    dom = domain if domain is not None else NodeDomain(s.g, i, s.K)
    inc = s.incoming(i)
    hsum = state.H[inc.start:inc.stop].sum()
    out = np.full(dom.size, hsum) + beta * dom.idle.astype(state.H.dtype)
    for e in inc:
        k = int(s.snd[e])
        par = dom.P == k
        chi = dom.C == k
        out[par] += state.B[e][np.clip(dom.D[par] - 1, 0, s.K)] - state.H[e]
        out[chi] += state.A[e][np.clip(dom.D[chi] + 1, 0, s.K + 1)] - state.H[e]
    out[~dom.valid] = INF
    return out


def neg_log_max_marginal_ah(state: MessageState, beta: float, i: int,
                            d: Value, p: Value, c: Value) -> float:
    dom = NodeDomain(state.g, i, state.K)
    return float(max_marginals_ah(state, beta, i, dom)[dom.index(d, p, c)])


# ---------------------------------------------------------------------------
# iteration driver


@dataclass
class RunResult:
    state: MessageState
    iterations: int
    converged: bool
    truncated: bool
    elapsed: float
    ops_per_sweep: list = field(default_factory=list)


def run(g: RootedDigraph, K: int, beta: float, T: int, time_limit: float | None = None,
        callback: Callable[[int, MessageState], None] | None = None,
        normalized: bool = False, eps_fix: float = EPS_FIX,
        method: str = "vectorized") -> RunResult:
    """Sweep until ``T`` iterations, a fixed point, or the time limit.

    ``callback(t, state)`` is called after every sweep.  The time limit is
    checked after each completed sweep, so at least one sweep always runs.

    By default messages are the literal recursion, whose values grow
    geometrically on graphs with cycles; after a few dozen sweeps float64
    can no longer resolve the small offsets decoding depends on.  With
    ``normalized=True`` each message is shifted by its own ``H`` after every
    sweep (see :func:`normalize`), which keeps full precision throughout.
    """
    if T < 1:
        raise InputError("T must be >= 1")
    t0 = time.perf_counter()
    state = init_ah(g, K)
    converged = truncated = False
    ops = []
    while state.t < T:
        new = iterate_ah(state, beta, method=method, normalized=normalized)
        ops.append(new.last_ops)
        if callback is not None:
            callback(new.t, new)
        done = is_fixed_point(state, new, eps_fix)
        state = new
        if done:
            converged = True
            break
        if time_limit is not None and time.perf_counter() - t0 >= time_limit and state.t < T:
            truncated = True
            break
    return RunResult(state, state.t, converged, truncated, time.perf_counter() - t0, ops)


# ---------------------------------------------------------------------------
# snapshots


def save_state(state: MessageState, path) -> None:
    """Write a snapshot as ``.npz``; the ``header`` entry is a JSON description."""
    s = state.sides
    header = {
        "format": "pathpack-ah-state",
        "version": SNAPSHOT_VERSION,
        "n": s.g.n,
        "K": s.K,
        "sides": s.m,
        "t": state.t,
        "layout": "rows are sides sorted by (receiver, sender); columns are depths",
    }
    np.savez_compressed(path, header=np.array(json.dumps(header)), snd=s.snd, rcv=s.rcv,
                        A=state.A, B=state.B, F=state.F, G=state.G, H=state.H)


def load_state(path, g: RootedDigraph) -> MessageState:
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("format") != "pathpack-ah-state" or header.get("version") != SNAPSHOT_VERSION:
            raise InputError(f"unsupported snapshot header {header}")
        sides = Sides(g, int(header["K"]))
        if (header["n"] != g.n or not np.array_equal(sides.snd, z["snd"])
                or not np.array_equal(sides.rcv, z["rcv"])):
            raise InputError("snapshot was taken on a different graph")
        return MessageState(sides, z["A"], z["B"], z["F"], z["G"], z["H"], int(header["t"]))


def max_marginal_config(state: MessageState, beta: float, i: int):
    """Minimising configuration of node ``i`` (ties to the lowest domain index)."""
    dom = NodeDomain(state.g, i, state.K)
    vals = max_marginals_ah(state, beta, i, dom)
    return dom.config(int(np.argmin(vals))), float(vals.min())


__all__ = [
    "Sides", "MessageState", "ThreeMin", "init_ah", "update_node", "iterate_ah",
    "normalize", "is_fixed_point", "ah_to_dense", "max_marginals_ah",
    "neg_log_max_marginal_ah", "run", "RunResult", "save_state", "load_state",
    "max_marginal_config", "STAR",
]
