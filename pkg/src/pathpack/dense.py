"""Dense min-sum belief propagation over full ``(depth, parent, child)`` domains.

This is the literal message system: one message per ordered adjacent pair
``(j, i)`` holding a cost for every configuration of the receiver ``i``.
Memory is O(n Δ^3 K) and a sweep costs far more, so it is only meant for
small graphs, where it serves as the correctness oracle for :mod:`pathpack.ah`.

All values are negative-log costs; ``inf`` marks impossible configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .feasibility import BULLET, STAR, Value
from .graph import RootedDigraph

STAR_CODE = -1
BULLET_CODE = -2
MAX_DENSE_NODES = 64

INF = np.inf


def encode(x: Value) -> int:
    if x is STAR:
        return STAR_CODE
    if x is BULLET:
        return BULLET_CODE
    return int(x)


def decode(code: int) -> Value:
    if code == STAR_CODE:
        return STAR
    if code == BULLET_CODE:
        return BULLET
    return int(code)


class NodeDomain:
    """All ``(d, p, c)`` configurations of one node, flattened.

    Depth code 0 stands for ``STAR``; parent/child codes use
    :data:`STAR_CODE` and :data:`BULLET_CODE` for the two symbols.
    """

    def __init__(self, g: RootedDigraph, i: int, K: int):
        self.node = i
        self.d_vals = np.arange(K + 1)
        self.p_vals = np.array([STAR_CODE, BULLET_CODE, *g.neighbors(i)], dtype=np.int64)
        self.c_vals = np.array([STAR_CODE, BULLET_CODE, *g.nonroot_neighbors(i)], dtype=np.int64)
        D, P, C = np.meshgrid(self.d_vals, self.p_vals, self.c_vals, indexing="ij")
        self.D = D.ravel()
        self.P = P.ravel()
        self.C = C.ravel()
        self.size = self.D.size
        self._p_pos = {int(v): k for k, v in enumerate(self.p_vals)}
        self._c_pos = {int(v): k for k, v in enumerate(self.c_vals)}
        root = g.is_root[i]
        idle = (self.D == 0) & (self.P == STAR_CODE) & (self.C == STAR_CODE)
        start = (self.P == BULLET_CODE) & (self.C >= 0) & (self.D == 1) & root
        inner = ((self.P >= 0) & (self.C != STAR_CODE) & (self.C != self.P)
                 & (self.D >= 2) & (not root))
        self.valid = idle | start | inner
        self.idle = idle

    def index(self, d: Value, p: Value, c: Value) -> int:
        dk = 0 if d is STAR else int(d)
        if not 0 <= dk < len(self.d_vals):
            raise InputError(f"depth {d!r} outside domain")
        try:
            pk = self._p_pos[encode(p)]
            ck = self._c_pos[encode(c)]
        except KeyError:
            raise InputError(f"({d!r}, {p!r}, {c!r}) outside node {self.node}'s domain") from None
        return (dk * len(self.p_vals) + pk) * len(self.c_vals) + ck

    def config(self, k: int) -> tuple[Value, Value, Value]:
        d = int(self.D[k])
        return (STAR if d == 0 else d, decode(int(self.P[k])), decode(int(self.C[k])))


def pair_mask(g: RootedDigraph, i: int, j: int, dom_i: NodeDomain, dom_j: NodeDomain) -> np.ndarray:
    """Boolean matrix over (config of i, config of j) of the pair consistency indicator."""
    Di, Pi, Ci = dom_i.D[:, None], dom_i.P[:, None], dom_i.C[:, None]
    Dj, Pj, Cj = dom_j.D[None, :], dom_j.P[None, :], dom_j.C[None, :]
    j_parent = ((Pi == j) & (Cj == i) & (Pj != i) & (Ci != j)
                & g.has_edge(j, i) & (Dj >= 1) & (Di == Dj + 1))
    i_parent = ((Pj == i) & (Ci == j) & (Pi != j) & (Cj != i)
                & g.has_edge(i, j) & (Di >= 1) & (Dj == Di + 1))
    unrelated = (Pi != j) & (Cj != i) & (Pj != i) & (Ci != j)
    return (j_parent | i_parent | unrelated) & dom_i.valid[:, None] & dom_j.valid[None, :]


@dataclass
class DenseTable:
    """Messages ``b[j -> i]`` as flat arrays over the receiver's :class:`NodeDomain`."""

    g: RootedDigraph
    K: int
    domains: list
    msgs: dict
    t: int = 0
    _masks: dict = field(default_factory=dict, repr=False)

    def message(self, j: int, i: int, d: Value, p: Value, c: Value) -> float:
        return float(self.msgs[(j, i)][self.domains[i].index(d, p, c)])

    @property
    def dtype(self):
        return next(iter(self.msgs.values())).dtype if self.msgs else np.dtype(np.float64)

    def entry_count(self) -> int:
        return sum(v.size for v in self.msgs.values())

    def mask(self, j: int, i: int):
        """Row indices of valid receiver configs and the consistency sub-matrix."""
        key = (j, i)
        if key not in self._masks:
            di, dj = self.domains[i], self.domains[j]
            rows = np.flatnonzero(di.valid)
            cols = np.flatnonzero(dj.valid)
            full = pair_mask(self.g, i, j, di, dj)
            self._masks[key] = (rows, cols, full[np.ix_(rows, cols)])
        return self._masks[key]


def _check_size(g: RootedDigraph, allow_large: bool):
    if g.n > MAX_DENSE_NODES and not allow_large:
        raise InputError(f"dense messages are limited to n <= {MAX_DENSE_NODES} "
                         f"(got n={g.n}); pass allow_large=True to override")


def init_dense(g: RootedDigraph, K: int, fill: float = 1.0,
               allow_large: bool = False, dtype=np.float64) -> DenseTable:
    """Every entry of every message set to ``fill`` (1.0 by default)."""
    _check_size(g, allow_large)
    domains = [NodeDomain(g, i, K) for i in range(g.n)]
    msgs = {}
    for i in range(g.n):
        for j in g.neighbors(i):
            msgs[(j, i)] = np.full(domains[i].size, fill, dtype=dtype)
    return DenseTable(g, K, domains, msgs)


def dense_from_arrays(g: RootedDigraph, K: int, msgs: dict, t: int = 0,
                      allow_large: bool = False) -> DenseTable:
    _check_size(g, allow_large)
    domains = [NodeDomain(g, i, K) for i in range(g.n)]
    return DenseTable(g, K, domains, {k: np.asarray(v) for k, v in msgs.items()}, t)


def iterate_dense(tbl: DenseTable, beta: float) -> DenseTable:
    """One synchronous min-sum sweep over every message."""
    g = tbl.g
    new = {}
    for (j, i), _ in tbl.msgs.items():
        dom_j = tbl.domains[j]
        psi = np.zeros(dom_j.size, dtype=tbl.dtype)
        for k in g.neighbors(j):
            if k != i:
                psi = psi + tbl.msgs[(k, j)]
        psi = psi + beta * dom_j.idle
        rows, cols, sub = tbl.mask(j, i)
        out = np.full(tbl.domains[i].size, INF, dtype=tbl.dtype)
        if rows.size and cols.size:
            cand = np.where(sub, psi[cols][None, :], INF)
            out[rows] = cand.min(axis=1)
        new[(j, i)] = out
    return DenseTable(g, tbl.K, tbl.domains, new, tbl.t + 1, tbl._masks)


def max_marginals_dense(tbl: DenseTable, beta: float, i: int) -> np.ndarray:
    """Negative-log max-marginal of every configuration of node ``i``."""
    dom = tbl.domains[i]
    acc = beta * dom.idle.astype(tbl.dtype)
    for k in tbl.g.neighbors(i):
        acc = acc + tbl.msgs[(k, i)]
    return acc


def max_marginal_dense(tbl: DenseTable, beta: float, i: int, d: Value, p: Value, c: Value) -> float:
    return float(max_marginals_dense(tbl, beta, i)[tbl.domains[i].index(d, p, c)])


def table_discrepancy(a: DenseTable, b: DenseTable) -> float:
    """Largest finite discrepancy between two tables; ``inf`` if the inf patterns differ."""
    worst = 0.0
    for key, x in a.msgs.items():
        y = b.msgs[key]
        fx, fy = np.isfinite(x), np.isfinite(y)
        if not np.array_equal(fx, fy):
            return INF
        if fx.any():
            worst = max(worst, float(np.max(np.abs(x[fx] - y[fx]))))
    return worst
