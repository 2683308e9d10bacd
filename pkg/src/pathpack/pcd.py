"""Parent-child-depth integer program: LP-format export and a direct feasibility checker.

Variables (names are fixed; ``i`` and ``j`` are dense node ids):

==============  =========================================================
``x_i``         node ``i`` is on a path (binary)
``pdot_i``      node ``i`` starts a path (binary)
``d_i``         depth of ``i``, 0 when idle (integer in ``[0, K]``)
``ddot_i``      depth contribution of starting a path (integer)
``p_j_i``       for edge ``(j, i)``: ``j`` is the parent of ``i`` (binary)
``d_j_i``       for edge ``(j, i)``: ``p_j_i * (d_j + 1)`` (integer)
``c_i_j``       for edge ``(i, j)``: ``j`` is the child of ``i`` (binary)
==============  =========================================================

Edge-indexed names read "tail, head", so ``p_j_i`` and ``c_j_i`` refer to the
same edge ``(j, i)``.  The model has ``4n + 3|E|`` variables.

The product ``d_j_i = p_j_i * (d_j + 1)`` is exported as three linear rows
plus ``d_j_i >= 0``, with constant ``M = K + 1``; :func:`linearization_rows`
is the single source for those rows.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from .errors import InputError
from .feasibility import (
    ALL_STAR, BULLET, Assignment, PathCollection, assignment_to_paths, is_node,
    paths_to_assignment,
)
from .graph import RootedDigraph


@dataclass
class PcdVariables:
    x: list
    pdot: list
    d: list
    ddot: list
    p: dict = field(default_factory=dict)   # (j, i) -> parent indicator
    dd: dict = field(default_factory=dict)  # (j, i) -> d_j_i
    c: dict = field(default_factory=dict)   # (i, j) -> child indicator

    @classmethod
    def zeros(cls, g: RootedDigraph) -> "PcdVariables":
        z = [0] * g.n
        return cls(list(z), list(z), list(z), list(z),
                   {e: 0 for e in g.edges}, {e: 0 for e in g.edges}, {e: 0 for e in g.edges})

    def objective(self) -> int:
        return sum(self.x)

    def named(self) -> dict:
        """Flat ``{variable name: value}`` mapping using the LP names."""
        out = {}
        for i in range(len(self.x)):
            out[f"x_{i}"] = self.x[i]
            out[f"pdot_{i}"] = self.pdot[i]
            out[f"d_{i}"] = self.d[i]
            out[f"ddot_{i}"] = self.ddot[i]
        for (j, i), v in self.p.items():
            out[f"p_{j}_{i}"] = v
            out[f"d_{j}_{i}"] = self.dd[(j, i)]
        for (i, j), v in self.c.items():
            out[f"c_{i}_{j}"] = v
        return out


def variable_count(g: RootedDigraph) -> int:
    return 4 * g.n + 3 * g.num_edges


def linearization_rows(K: int):
    """Rows ``(a, b, c, sense, rhs)`` meaning ``a*d_j_i + b*d_j + c*p_j_i  sense  rhs``.

    Together with ``d_j_i >= 0`` they admit exactly ``d_j_i = p_j_i * (d_j + 1)``
    whenever ``p_j_i`` is binary and ``0 <= d_j <= K``.
    """
    M = K + 1
    return [
        (1, 0, -M, "<=", 0),      # d_j_i <= M p_j_i
        (1, -1, 0, "<=", 1),      # d_j_i <= d_j + 1
        (1, -1, -M, ">=", 1 - M),  # d_j_i >= d_j + 1 - M (1 - p_j_i)
    ]


def linear_feasible(K: int, p: int, dj: int, dji: int) -> bool:
    if dji < 0:
        return False
    for a, b, c, sense, rhs in linearization_rows(K):
        lhs = a * dji + b * dj + c * p
        if (sense == "<=" and lhs > rhs) or (sense == ">=" and lhs < rhs):
            return False
    return True


def _terms(pairs) -> str:
    out = []
    for coef, name in pairs:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        term = name if mag == 1 else f"{mag} {name}"
        out.append(f"{sign} {term}")
    if not out:
        return "0"
    out[0] = out[0][2:] if out[0].startswith("+ ") else "-" + out[0][2:]
    # keep rows well under the line-length limit some LP readers impose
    lines = [" ".join(out[k:k + 12]) for k in range(0, len(out), 12)]
    return "\n   ".join(lines)


def export_pcd(g: RootedDigraph, K: int) -> str:
    """The model in LP file format (objective, constraints, bounds, generals, binaries)."""
    if K < 2:
        raise InputError("K must be >= 2")
    n = g.n
    out = io.StringIO()
    w = out.write
    w(f"\\ parent-child-depth model: n={n} edges={g.num_edges} K={K}\n")
    w("Maximize\n")
    w(f" obj: {_terms((1, f'x_{i}') for i in range(n))}\n")
    w("Subject To\n")
    for i in range(n):
        parents = g.in_neighbors(i)
        kids = g.out_neighbors(i)
        w(f" parents_{i}: {_terms([(1, f'x_{i}'), (-1, f'pdot_{i}')] + [(-1, f'p_{j}_{i}') for j in parents])} = 0\n")
        w(f" children_{i}: {_terms([(1, f'c_{i}_{j}') for j in kids] + [(-1, f'x_{i}')])} <= 0\n")
        w(f" rootchild_{i}: {_terms([(1, f'pdot_{i}')] + [(-1, f'c_{i}_{j}') for j in kids])} <= 0\n")
        w(f" depth_{i}: {_terms([(1, f'd_{i}'), (-1, f'ddot_{i}')] + [(-1, f'd_{j}_{i}') for j in parents])} = 0\n")
        w(f" startdepth_{i}: {_terms([(1, f'ddot_{i}'), (-1, f'pdot_{i}')])} = 0\n")
        if not g.is_root[i]:
            w(f" nonroot_{i}: pdot_{i} = 0\n")
    for j, i in g.edges:
        w(f" match_{j}_{i}: p_{j}_{i} - c_{j}_{i} = 0\n")
        for k, (a, b, c, sense, rhs) in enumerate(linearization_rows(K)):
            lhs = _terms([(a, f"d_{j}_{i}"), (b, f"d_{j}"), (c, f"p_{j}_{i}")])
            w(f" lin{k}_{j}_{i}: {lhs} {sense} {rhs}\n")
        if g.has_edge(i, j):
            # i may not take j as both its parent and its child
            w(f" twocycle_{j}_{i}: p_{j}_{i} + c_{i}_{j} <= 1\n")
    w("Bounds\n")
    for i in range(n):
        w(f" 0 <= d_{i} <= {K}\n")
    for j, i in g.edges:
        w(f" 0 <= d_{j}_{i} <= {K + 1}\n")
    w("Generals\n")
    for i in range(n):
        w(f" d_{i} ddot_{i}\n")
    for j, i in g.edges:
        w(f" d_{j}_{i}\n")
    w("Binaries\n")
    for i in range(n):
        w(f" x_{i} pdot_{i}\n")
    for j, i in g.edges:
        w(f" p_{j}_{i} c_{j}_{i}\n")
    w("End\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# direct checking with the exact (quadratic) depth constraint


@dataclass(frozen=True)
class PcdViolation:
    constraint: str
    where: tuple
    message: str

    def __str__(self):
        return f"{self.constraint} at {self.where}: {self.message}"


def check_pcd(v: PcdVariables, g: RootedDigraph, K: int) -> PcdViolation | None:
    """``None`` if ``v`` satisfies every constraint, else the first violated one.

    Constraint names: ``domain``, ``parents``, ``children``, ``rootchild``,
    ``depth``, ``depth-bounds``, ``startdepth``, ``nonroot``, ``match``,
    ``depth-step`` (exact ``d_j_i = p_j_i (d_j + 1)``) and ``twocycle``.
    """
    n = g.n
    if not (len(v.x) == len(v.pdot) == len(v.d) == len(v.ddot) == n
            and set(v.p) == set(g.edges) and set(v.dd) == set(g.edges)
            and set(v.c) == set(g.edges)):
        return PcdViolation("domain", (), "variable set does not match the graph")
    for i in range(n):
        for name, val in (("x", v.x[i]), ("pdot", v.pdot[i])):
            if val not in (0, 1):
                return PcdViolation("domain", (i,), f"{name}_{i}={val!r} is not binary")
        for name, val in (("d", v.d[i]), ("ddot", v.ddot[i])):
            if not isinstance(val, int) or isinstance(val, bool):
                return PcdViolation("domain", (i,), f"{name}_{i}={val!r} is not an integer")
    for e in g.edges:
        if v.p[e] not in (0, 1) or v.c[e] not in (0, 1):
            return PcdViolation("domain", e, "edge indicator is not binary")
        if not isinstance(v.dd[e], int) or isinstance(v.dd[e], bool):
            return PcdViolation("domain", e, "edge depth is not an integer")
    for i in range(n):
        parents = g.in_neighbors(i)
        kids = g.out_neighbors(i)
        if v.x[i] != sum(v.p[(j, i)] for j in parents) + v.pdot[i]:
            return PcdViolation("parents", (i,), f"x_{i} differs from its parent count")
        if sum(v.c[(i, j)] for j in kids) > v.x[i]:
            return PcdViolation("children", (i,), f"node {i} has too many children")
        if v.pdot[i] > sum(v.c[(i, j)] for j in kids):
            return PcdViolation("rootchild", (i,), f"path start {i} has no child")
        if v.d[i] != v.ddot[i] + sum(v.dd[(j, i)] for j in parents):
            return PcdViolation("depth", (i,), f"d_{i} differs from its parts")
        if not 0 <= v.d[i] <= K:
            return PcdViolation("depth-bounds", (i,), f"d_{i}={v.d[i]} outside [0, {K}]")
        if v.ddot[i] != v.pdot[i]:
            return PcdViolation("startdepth", (i,), f"ddot_{i} differs from pdot_{i}")
        if not g.is_root[i] and v.pdot[i] != 0:
            return PcdViolation("nonroot", (i,), f"non-root {i} starts a path")
    for j, i in g.edges:
        if v.p[(j, i)] != v.c[(j, i)]:
            return PcdViolation("match", (j, i), "parent and child indicators disagree")
        if v.dd[(j, i)] != v.p[(j, i)] * (v.d[j] + 1):
            return PcdViolation("depth-step", (j, i), f"d_{j}_{i} is not p_{j}_{i} * (d_{j} + 1)")
    for j, i in g.edges:
        if g.has_edge(i, j) and v.p[(j, i)] + v.c[(i, j)] > 1:
            return PcdViolation("twocycle", (j, i), "both directions of a 2-cycle are used")
    return None


def assignment_to_pcd(a: Assignment, g: RootedDigraph) -> PcdVariables:
    """Node-by-node construction of the program's variables from a feasible assignment."""
    v = PcdVariables.zeros(g)
    for i, (d, p, c) in enumerate(a):
        if (d, p, c) == ALL_STAR:
            continue
        v.x[i] = 1
        v.d[i] = int(d)
        if p is BULLET:
            v.pdot[i] = 1
            v.ddot[i] = 1
        else:
            v.p[(p, i)] = 1
            v.dd[(p, i)] = int(d)
        if is_node(c):
            v.c[(i, c)] = 1
    return v


def paths_to_pcd(paths: PathCollection, g: RootedDigraph, K: int | None = None) -> PcdVariables:
    return assignment_to_pcd(paths_to_assignment(paths, g, K), g)


def pcd_to_assignment(v: PcdVariables, g: RootedDigraph) -> Assignment:
    """Inverse construction; ``v`` is assumed to pass :func:`check_pcd`."""
    out = []
    for i in range(g.n):
        if v.x[i] == 0:
            out.append(ALL_STAR)
            continue
        kids = [j for j in g.out_neighbors(i) if v.c[(i, j)]]
        c = kids[0] if kids else BULLET
        if v.pdot[i]:
            out.append((1, BULLET, c))
        else:
            p = next(j for j in g.in_neighbors(i) if v.p[(j, i)])
            out.append((v.d[i], p, c))
    return tuple(out)


def pcd_to_paths(v: PcdVariables, g: RootedDigraph, K: int) -> PathCollection:
    return assignment_to_paths(pcd_to_assignment(v, g), g, K)
