"""Rooted, length-bounded, node-disjoint path packing by min-sum belief propagation.

The main entry points are :func:`solve_bp` (message passing plus decoding),
:func:`greedy_solve` and :func:`exact_solve` (baselines), and
:func:`export_pcd` (integer-program export).
"""

from .ah import init_ah, iterate_ah, run
from .baselines import exact_solve, greedy_solve
from .decode import decode_best, decode_once, solve_bp
from .errors import InputError, InvariantError, ParseError
from .feasibility import (
    BULLET, STAR, assignment_to_paths, is_member_M, objective, path_value,
    paths_to_assignment, validate_path_collection,
)
from .graph import RootedDigraph, build_pruned, generate_random, load_snap
from .params import InstanceParams
from .pcd import check_pcd, export_pcd, paths_to_pcd

__all__ = [
    "BULLET", "STAR", "InputError", "InstanceParams", "InvariantError", "ParseError",
    "RootedDigraph", "assignment_to_paths", "build_pruned", "check_pcd", "decode_best",
    "decode_once", "exact_solve", "export_pcd", "generate_random", "greedy_solve",
    "init_ah", "is_member_M", "iterate_ah", "load_snap", "objective", "path_value",
    "paths_to_assignment", "paths_to_pcd", "run", "solve_bp", "validate_path_collection",
]
