"""Rooted directed graphs, random instances and SNAP edge-list ingestion.

A :class:`RootedDigraph` has its nodes split into roots (which may only start
a path) and non-roots.  Edges never point into a root, there are no isolated
nodes, and node ids are dense ``0..n-1``.  Any relabeling performed while
building the graph is kept in :attr:`RootedDigraph.labels`.
"""

from __future__ import annotations

import io
import math
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import InputError, ParseError


class RootedDigraph:
    """Immutable directed graph with a root/non-root node partition.

    Parameters
    ----------
    n : int
        Number of nodes; ids are ``0..n-1``.
    roots : iterable of int
        The root set.
    edges : iterable of (int, int)
        Directed edges.  Must not contain self-loops, duplicates, or edges
        ending in a root, and every node must be incident to some edge.
    labels : sequence of int, optional
        Original id of every node (defaults to the identity).
    """

    __slots__ = (
        "n", "roots", "is_root", "edges", "labels",
        "_out", "_in", "_nbr", "_nbr_u", "_nbr_v", "_edge_set", "_index",
    )

    def __init__(self, n: int, roots: Iterable[int], edges: Iterable[tuple[int, int]],
                 labels: Sequence[int] | None = None):
        n = int(n)
        if n < 0:
            raise InputError("node count must be non-negative")
        roots = frozenset(int(r) for r in roots)
        for r in roots:
            if not 0 <= r < n:
                raise InputError(f"root {r} out of range for n={n}")
        edge_list = sorted((int(a), int(b)) for a, b in edges)
        edge_set = set(edge_list)
        if len(edge_set) != len(edge_list):
            raise InputError("duplicate edges")
        out = [[] for _ in range(n)]
        inn = [[] for _ in range(n)]
        for a, b in edge_list:
            if not (0 <= a < n and 0 <= b < n):
                raise InputError(f"edge ({a}, {b}) out of range for n={n}")
            if a == b:
                raise InputError(f"self-loop at node {a}")
            if b in roots:
                raise InputError(f"edge ({a}, {b}) ends in a root")
            out[a].append(b)
            inn[b].append(a)
        nbr = [tuple(sorted(set(out[i]) | set(inn[i]))) for i in range(n)]
        for i in range(n):
            if not nbr[i]:
                raise InputError(f"node {i} is isolated")

        self.n = n
        self.roots = roots
        self.is_root = tuple(i in roots for i in range(n))
        self.edges = tuple(edge_list)
        if labels is None:
            labels = range(n)
        self.labels = tuple(int(x) for x in labels)
        if len(self.labels) != n:
            raise InputError("labels must have one entry per node")
        self._out = tuple(tuple(x) for x in out)
        self._in = tuple(tuple(x) for x in inn)
        self._nbr = tuple(nbr)
        self._nbr_u = tuple(tuple(k for k in nb if self.is_root[k]) for nb in nbr)
        self._nbr_v = tuple(tuple(k for k in nb if not self.is_root[k]) for nb in nbr)
        self._edge_set = frozenset(edge_set)
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    # adjacency views; all returned tuples are sorted by node id
    def out_neighbors(self, i: int) -> tuple[int, ...]:
        return self._out[i]

    def in_neighbors(self, i: int) -> tuple[int, ...]:
        return self._in[i]

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._nbr[i]

    def root_neighbors(self, i: int) -> tuple[int, ...]:
        return self._nbr_u[i]

    def nonroot_neighbors(self, i: int) -> tuple[int, ...]:
        return self._nbr_v[i]

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self._edge_set

    def degree(self, i: int) -> int:
        return len(self._nbr[i])

    @property
    def nonroots(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if not self.is_root[i])

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def undirected_pairs(self) -> list[tuple[int, int]]:
        """Adjacent pairs ``(i, j)`` with ``i < j``, i.e. the undirected edge set."""
        return sorted({(min(a, b), max(a, b)) for a, b in self.edges})

    def max_degree(self) -> int:
        return max((len(nb) for nb in self._nbr), default=0)

    def index_of(self, label: int) -> int:
        """Dense id of the node whose original id is ``label``."""
        try:
            return self._index[label]
        except KeyError:
            raise InputError(f"node {label} is not in the graph") from None

    def __repr__(self):
        return (f"RootedDigraph(n={self.n}, roots={len(self.roots)}, "
                f"edges={self.num_edges})")

    def __eq__(self, other):
        if not isinstance(other, RootedDigraph):
            return NotImplemented
        return (self.n == other.n and self.roots == other.roots
                and self.edges == other.edges)

    def __hash__(self):
        return hash((self.n, self.roots, self.edges))


def build_pruned(roots: Iterable[int], edges: Iterable[tuple[int, int]]) -> RootedDigraph:
    """Apply the preprocessing rules and return a dense :class:`RootedDigraph`.

    Self-loops and duplicate edges are dropped, then every edge ending in a
    root is discarded, then nodes left without incident edges are removed.
    Survivors are relabeled ``0..n-1`` in increasing order of original id.
    """
    roots = set(roots)
    kept = set()
    for a, b in edges:
        if a != b and b not in roots:
            kept.add((a, b))
    touched = sorted({x for e in kept for x in e})
    index = {old: new for new, old in enumerate(touched)}
    return RootedDigraph(
        len(touched),
        (index[r] for r in roots if r in index),
        ((index[a], index[b]) for a, b in kept),
        labels=touched,
    )


def generate_random(n: int, root_fraction: float, c: float, seed) -> RootedDigraph:
    """Random instance where each ordered pair into a non-root is an edge w.p. ``c/n``.

    Exactly ``floor(root_fraction * n)`` roots are drawn uniformly without
    replacement.  Every ordered pair ``(i, j)`` with ``j`` a non-root and
    ``i != j`` becomes an edge independently with probability ``c / n``.
    Isolated nodes are removed afterwards, which relabels the survivors.
    """
    if n < 2:
        raise InputError("n must be at least 2")
    if not 0.0 < root_fraction < 1.0:
        raise InputError("root_fraction must lie in (0, 1)")
    if not c > 0 or c / n > 1:
        raise InputError("c must be positive with c/n <= 1")
    p = c / n
    rng = np.random.default_rng(seed)
    num_roots = math.floor(root_fraction * n)
    roots = np.sort(rng.choice(n, size=num_roots, replace=False))
    mask = np.zeros(n, dtype=bool)
    mask[roots] = True
    nonroots = np.flatnonzero(~mask)

    # iid Bernoulli(p) over the full n x |V| grid: a Binomial(N, p) count of
    # cells drawn uniformly without replacement; diagonal cells are then dropped
    cells = n * len(nonroots)
    k = rng.binomial(cells, p)
    picked = rng.choice(cells, size=k, replace=False) if k else np.empty(0, dtype=np.int64)
    src = picked // len(nonroots)
    dst = nonroots[picked % len(nonroots)]
    keep = src != dst
    edges = zip(src[keep].tolist(), dst[keep].tolist())
    return build_pruned(roots.tolist(), edges)


def _parse_int_pair(line: str, lineno: int) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise ParseError(f"expected 'src dst', got {line.strip()!r}", lineno)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"non-integer node id in {line.strip()!r}", lineno) from None


def _as_stream(source) -> TextIO:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def read_edge_list(source) -> list[tuple[int, int]]:
    """Parse SNAP edge-list text; ``#`` lines and blank lines are skipped."""
    pairs = []
    for lineno, line in enumerate(_as_stream(source), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        pairs.append(_parse_int_pair(s, lineno))
    return pairs


def read_roots(source) -> list[int]:
    """Parse a root list: one integer per line, ``#`` comments allowed."""
    roots = []
    for lineno, line in enumerate(_as_stream(source), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            roots.append(int(s))
        except ValueError:
            raise ParseError(f"expected one integer, got {s!r}", lineno) from None
    return roots


def load_snap(source, roots: Iterable[int] | None = None,
              root_fraction: float | None = None, seed=None) -> RootedDigraph:
    """Load a SNAP-style edge list and preprocess it into a :class:`RootedDigraph`.

    Exactly one of ``roots`` (explicit original ids) or ``root_fraction``
    (with ``seed``) must be given.  In the fractional case
    ``floor(root_fraction * N)`` roots are drawn uniformly from the ``N``
    distinct ids in the file.  Processing order: drop self-loops and
    duplicates, select roots, discard edges into roots, drop isolated nodes.
    The returned graph's ``labels`` map dense ids back to file ids.
    """
    pairs = read_edge_list(source)
    present = sorted({x for e in pairs for x in e})
    if (roots is None) == (root_fraction is None):
        raise InputError("give exactly one of roots or root_fraction")
    if roots is not None:
        roots = sorted(set(int(r) for r in roots))
        present_set = set(present)
        missing = [r for r in roots if r not in present_set]
        if missing:
            raise InputError(f"root ids not present in edge list: {missing[:10]}")
    else:
        if not 0.0 <= root_fraction <= 1.0:
            raise InputError("root_fraction must lie in [0, 1]")
        rng = np.random.default_rng(seed)
        k = math.floor(root_fraction * len(present))
        roots = sorted(np.asarray(present)[rng.choice(len(present), size=k, replace=False)].tolist()) if k else []
    return build_pruned(roots, pairs)


def write_snap(g: RootedDigraph, stream: TextIO, header: str | None = None) -> None:
    """Write ``g`` as an edge list using its dense ids."""
    if header:
        for line in header.splitlines():
            stream.write(f"# {line}\n")
    for a, b in g.edges:
        stream.write(f"{a} {b}\n")


def write_roots(g: RootedDigraph, stream: TextIO) -> None:
    for r in sorted(g.roots):
        stream.write(f"{r}\n")
