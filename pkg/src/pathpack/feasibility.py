"""Depth/parent/child encoding of path packings and their validity checks.

Every node ``i`` carries a triple ``(d, p, c)``: its depth on a path, its
parent and its child.  ``STAR`` marks a node that is on no path and
``BULLET`` marks a path end (no parent for a path start, no child for a path
end).  A triple assignment is feasible when every node and every adjacent
pair pass the local indicators below; feasible assignments correspond one to
one with collections of node-disjoint rooted paths of at most ``K`` nodes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import InputError, InvariantError, ParseError
from .graph import RootedDigraph


class Sym(enum.Enum):
    STAR = "*"
    BULLET = "•"

    def __repr__(self):
        return self.value


STAR = Sym.STAR
BULLET = Sym.BULLET

Value = Union[int, Sym]
Triple = tuple[Value, Value, Value]
Assignment = tuple[Triple, ...]
Path = tuple[int, ...]
PathCollection = list[Path]

ALL_STAR: Triple = (STAR, STAR, STAR)


def is_node(x) -> bool:
    return not isinstance(x, Sym)


def in_domain(i: int, triple: Triple, g: RootedDigraph, K: int) -> bool:
    """Whether ``triple`` lies in node ``i``'s variable domains."""
    d, p, c = triple
    if d is not STAR and not (is_node(d) and 1 <= d <= K):
        return False
    if is_node(p) and p not in g.neighbors(i):
        return False
    if is_node(c) and c not in g.nonroot_neighbors(i):
        return False
    return True


def node_cases(i: int, d: Value, p: Value, c: Value, g: RootedDigraph) -> tuple[bool, bool, bool]:
    """Truth of the (idle, path start, path interior) cases at node ``i``."""
    idle = d is STAR and p is STAR and c is STAR
    start = p is BULLET and is_node(c) and d == 1 and is_node(d) and g.is_root[i]
    interior = (is_node(p) and c is not STAR and c != p and is_node(d) and d != 1
                and not g.is_root[i])
    return idle, start, interior


def node_indicator(i: int, d: Value, p: Value, c: Value, g: RootedDigraph) -> int:
    return int(any(node_cases(i, d, p, c, g)))


def _depth_step(lo: Value, hi: Value) -> bool:
    return is_node(lo) and is_node(hi) and hi == lo + 1


def edge_cases(i: int, j: int, ti: Triple, tj: Triple,
               g: RootedDigraph) -> tuple[bool, bool, bool]:
    """Truth of the (j parent of i, i parent of j, unrelated) cases for a pair."""
    di, pi, ci = ti
    dj, pj, cj = tj
    j_parent = (pi == j and cj == i and pj != i and ci != j
                and g.has_edge(j, i) and _depth_step(dj, di))
    i_parent = (pj == i and ci == j and pi != j and cj != i
                and g.has_edge(i, j) and _depth_step(di, dj))
    unrelated = pi != j and cj != i and pj != i and ci != j
    return j_parent, i_parent, unrelated


def edge_indicator(i: int, j: int, ti: Triple, tj: Triple, g: RootedDigraph) -> int:
    return int(any(edge_cases(i, j, ti, tj, g)))


def pair_indicator(i: int, j: int, ti: Triple, tj: Triple, g: RootedDigraph) -> int:
    return (edge_indicator(i, j, ti, tj, g) * node_indicator(i, *ti, g)
            * node_indicator(j, *tj, g))


def is_member_M(a: Sequence[Triple], g: RootedDigraph, K: int) -> bool:
    """True iff every node triple is in-domain and every adjacent pair is consistent."""
    if len(a) != g.n:
        return False
    for i in range(g.n):
        if not in_domain(i, a[i], g, K):
            return False
    for i in range(g.n):
        for j in g.neighbors(i):
            if j > i and not pair_indicator(i, j, a[i], a[j], g):
                return False
    return True


@dataclass(frozen=True)
class Violation:
    kind: str  # short, overlong, node, root, edge, repeat, disjointness
    path_index: int
    message: str

    def __str__(self):
        return f"{self.kind}: {self.message}"


def validate_path_collection(paths: Iterable[Sequence[int]], g: RootedDigraph,
                             K: int) -> Violation | None:
    """Return ``None`` if ``paths`` is a feasible packing, else its first violation.

    Paths are scanned in order and nodes left to right.
    """
    used: dict[int, int] = {}
    for idx, path in enumerate(paths):
        path = tuple(path)
        if len(path) < 2:
            return Violation("short", idx, f"path {idx} has {len(path)} node(s); need at least 2")
        if len(path) > K:
            return Violation("overlong", idx, f"path {idx} has {len(path)} nodes; K={K}")
        for pos, v in enumerate(path):
            if not (is_node(v) and 0 <= v < g.n):
                return Violation("node", idx, f"path {idx} has unknown node {v!r}")
            if pos == 0 and not g.is_root[v]:
                return Violation("root", idx, f"path {idx} starts at non-root {v}")
            if pos > 0 and not g.has_edge(path[pos - 1], v):
                return Violation("edge", idx, f"path {idx} uses missing edge ({path[pos - 1]}, {v})")
            if v in used:
                if used[v] == idx:
                    return Violation("repeat", idx, f"path {idx} visits node {v} twice")
                return Violation("disjointness", idx,
                                 f"node {v} is on paths {used[v]} and {idx}")
            used[v] = idx
    return None


def paths_to_assignment(paths: Iterable[Sequence[int]], g: RootedDigraph,
                        K: int | None = None) -> Assignment:
    """Encode a feasible path collection as per-node ``(depth, parent, child)`` triples."""
    paths = [tuple(p) for p in paths]
    bad = validate_path_collection(paths, g, K if K is not None else g.n + 1)
    if bad is not None:
        raise InputError(f"infeasible path collection ({bad})")
    out: list[Triple] = [ALL_STAR] * g.n
    for path in paths:
        last = len(path) - 1
        for pos, v in enumerate(path):
            parent = BULLET if pos == 0 else path[pos - 1]
            child = BULLET if pos == last else path[pos + 1]
            out[v] = (pos + 1, parent, child)
    return tuple(out)


def assignment_to_paths(a: Sequence[Triple], g: RootedDigraph, K: int) -> PathCollection:
    """Decode a member of the feasible set back into its unique path collection.

    Starts a path at every node of depth 1 (in increasing id order) and
    follows child pointers to the end marker.  Raises
    :class:`InvariantError` if the pointers are inconsistent.
    """
    if len(a) != g.n:
        raise InvariantError("assignment length does not match the graph")
    paths = []
    for start in range(g.n):
        if a[start][0] != 1 or not is_node(a[start][0]):
            continue
        path = [start]
        node = start
        while True:
            d, _, c = a[node]
            if c is BULLET:
                break
            if not is_node(c) or len(path) >= K:
                raise InvariantError(f"child pointer at node {node} does not continue a path")
            dc, pc, _ = a[c]
            if pc != node or dc != d + 1:
                raise InvariantError(f"node {c} does not agree that {node} is its parent")
            path.append(c)
            node = c
        paths.append(tuple(path))
    try:
        back = paths_to_assignment(paths, g, K)
    except InputError as exc:
        raise InvariantError(f"decoded paths are infeasible: {exc}") from None
    if tuple(back) != tuple(tuple(t) for t in a):
        raise InvariantError("assignment is not in the feasible set")
    return paths


def objective(a: Iterable[Triple]) -> int:
    """Number of nodes whose triple is not all-star."""
    return sum(1 for t in a if tuple(t) != ALL_STAR)


def path_value(paths: Iterable[Sequence[int]]) -> int:
    """Total number of nodes covered by ``paths``."""
    return sum(len(p) for p in paths)


def format_paths(paths: Iterable[Sequence[int]], labels: Sequence[int] | None = None) -> str:
    """One path per line, node ids separated by spaces."""
    lines = []
    for path in paths:
        ids = path if labels is None else [labels[v] for v in path]
        lines.append(" ".join(str(v) for v in ids))
    return "".join(line + "\n" for line in lines)


def parse_paths(source) -> PathCollection:
    """Inverse of :func:`format_paths`; ``#`` comment lines are skipped."""
    if isinstance(source, str):
        source = source.splitlines()
    paths = []
    for lineno, line in enumerate(source, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            paths.append(tuple(int(x) for x in s.split()))
        except ValueError:
            raise ParseError(f"non-integer node id in {s!r}", lineno) from None
    return paths
