import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathpack.errors import InputError, InvariantError, ParseError
from pathpack.feasibility import (
    ALL_STAR, BULLET, STAR, assignment_to_paths, edge_cases, edge_indicator, format_paths,
    is_member_M, node_cases, node_indicator, objective, pair_indicator, parse_paths,
    path_value, paths_to_assignment, validate_path_collection,
)
from pathpack.graph import RootedDigraph

from _support import (
    enumerate_collections, enumerate_members, node_values, random_collection, small_graph,
)

# u=0 is a root; v=1, w=2 non-roots; edges 0->1->2
CHAIN3 = RootedDigraph(3, [0], [(0, 1), (1, 2)])
CHAIN2 = RootedDigraph(2, [0], [(0, 1)])


def test_node_indicator_cases():
    g = CHAIN3
    assert node_indicator(0, STAR, STAR, STAR, g) == 1
    assert node_indicator(0, 1, BULLET, 1, g) == 1
    assert node_indicator(1, 1, BULLET, 2, g) == 0  # start at a non-root
    assert node_indicator(0, 1, BULLET, BULLET, g) == 0  # a lone root is not a path
    assert node_indicator(1, 2, 0, BULLET, g) == 1
    assert node_indicator(1, 1, 0, BULLET, g) == 0
    assert node_indicator(1, 2, 2, 2, g) == 0  # child equal to parent


def test_edge_indicator_cases():
    g = CHAIN2
    assert edge_indicator(1, 0, (2, 0, BULLET), (1, BULLET, 1), g) == 1
    assert edge_indicator(1, 0, ALL_STAR, ALL_STAR, g) == 1
    # claimed relation against the edge direction
    assert edge_indicator(0, 1, (2, 1, BULLET), (1, BULLET, 0), g) == 0
    # depth mismatch
    assert edge_indicator(1, 0, (3, 0, BULLET), (1, BULLET, 1), g) == 0


def test_pair_indicator_needs_both_nodes():
    g = CHAIN2
    assert pair_indicator(0, 1, ALL_STAR, ALL_STAR, g) == 1
    assert pair_indicator(1, 0, (2, 0, BULLET), (1, BULLET, 1), g) == 1
    # j=1 is a non-root claiming depth 1
    assert pair_indicator(0, 1, ALL_STAR, (1, BULLET, STAR), g) == 0


def test_cases_mutually_exclusive_exhaustively():
    g = small_graph(3, 6, 8)
    K = 3
    for i in range(g.n):
        vals = node_values(g, i, K)
        for t in vals:
            assert sum(node_cases(i, *t, g)) <= 1
        for j in g.neighbors(i):
            for ti in vals:
                for tj in node_values(g, j, K):
                    assert sum(edge_cases(i, j, ti, tj, g)) <= 1


def test_membership_examples():
    g = CHAIN2
    a = ((1, BULLET, 1), (2, 0, BULLET))
    assert is_member_M((ALL_STAR, ALL_STAR), g, 2)
    assert is_member_M(a, g, 2)
    assert not is_member_M(((1, BULLET, 1), (3, 0, BULLET)), g, 3)
    assert not is_member_M(((1, BULLET, 1), (2, 0, BULLET)), g, 1)


def test_paths_to_assignment_examples():
    assert paths_to_assignment([], CHAIN3) == (ALL_STAR,) * 3
    a = paths_to_assignment([(0, 1, 2)], CHAIN3, 3)
    assert a == ((1, BULLET, 1), (2, 0, 2), (3, 1, BULLET))
    assert objective(a) == path_value([(0, 1, 2)]) == 3
    with pytest.raises(InputError, match="overlong"):
        paths_to_assignment([(0, 1, 2)], CHAIN3, 2)


def test_assignment_to_paths_examples():
    assert assignment_to_paths((ALL_STAR,) * 3, CHAIN3, 3) == []
    assert assignment_to_paths(((1, BULLET, 1), (2, 0, BULLET)), CHAIN2, 2) == [(0, 1)]
    with pytest.raises(InvariantError):
        assignment_to_paths(((1, BULLET, 1), ALL_STAR), CHAIN2, 2)


def test_validate_reports_first_violation():
    g = RootedDigraph(4, [0, 3], [(0, 1), (1, 2), (3, 2)])
    assert validate_path_collection([(0, 1)], g, 2) is None
    assert validate_path_collection([(0, 1, 2)], g, 2).kind == "overlong"
    assert validate_path_collection([(0, 1, 2), (3, 2)], g, 3).kind == "disjointness"
    assert validate_path_collection([(1, 2)], g, 3).kind == "root"
    assert validate_path_collection([(0, 2)], g, 3).kind == "edge"
    assert validate_path_collection([(0,)], g, 3).kind == "short"
    assert validate_path_collection([(0, 9)], g, 3).kind == "node"


def test_format_parse_round_trip():
    paths = [(0, 1, 2), (5, 4)]
    assert parse_paths(format_paths(paths)) == paths
    assert format_paths([(0, 1)], labels=[10, 11]) == "10 11\n"
    with pytest.raises(ParseError, match="line 2"):
        parse_paths("# c\n1 a\n")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), K=st.integers(2, 6))
def test_bijection_property(seed, K):
    rng = np.random.default_rng(seed)
    g = small_graph(seed, 5, 30)
    paths = random_collection(g, K, rng)
    a = paths_to_assignment(paths, g, K)
    assert is_member_M(a, g, K)
    assert objective(a) == path_value(paths)
    back = assignment_to_paths(a, g, K)
    assert set(back) == set(paths)
    assert paths_to_assignment(back, g, K) == a


@pytest.mark.parametrize("seed", range(6))
def test_member_count_equals_collection_count(seed):
    g = small_graph(100 + seed, 4, 6, cs=(2, 3))
    K = 3
    members = enumerate_members(g, K)
    collections = enumerate_collections(g, K)
    assert len(members) == len(collections)
    assert {frozenset(assignment_to_paths(a, g, K)) for a in members} == collections
