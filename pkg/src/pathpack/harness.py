"""Experiment plumbing: named solvers, seeded sample grids, CSV/JSON records."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baselines import EXACT_MAX_NODES, exact_solve, greedy_solve
from .decode import solve_bp
from .errors import InputError, InvariantError
from .feasibility import PathCollection, path_value, validate_path_collection
from .graph import RootedDigraph, generate_random
from .params import InstanceParams

ALGORITHMS = ("bp", "greedy", "exact")
CSV_SCHEMA = "pathpack-results/1"
RESULT_FIELDS = ["schema", "sample", "algorithm", "seed", "n", "roots", "edges",
                 "value", "iterations", "converged", "truncated", "status"]
TIMING_FIELDS = ["sample", "algorithm", "wall_time"]


def derive_seed(master: int, *key: int) -> int:
    """A 63-bit seed for the stream ``key`` under ``master``.

    Counter-based: ``SeedSequence(master, spawn_key=key)``, so any sample can
    be regenerated on its own and no two keys collide in practice.
    """
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass
class SolveRecord:
    algorithm: str
    value: int
    wall_time: float
    iterations: int | None = None
    converged: bool | None = None
    truncated: bool | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("wall_time")
        return d


def solve(g: RootedDigraph, algorithm: str, params: InstanceParams,
          normalized: bool = False, exact_max_nodes: int = EXACT_MAX_NODES
          ) -> tuple[PathCollection, SolveRecord]:
    """Run one named algorithm; the collection is validated before it is returned."""
    t0 = time.perf_counter()
    if algorithm == "bp":
        paths, rep = solve_bp(g, params, normalized=normalized)
        rec = SolveRecord("bp", 0, 0.0, rep.iterations, rep.converged, rep.truncated, params.seed,
                          {"best_iteration": rep.best_iteration, "best_so_far": rep.best_so_far})
    elif algorithm == "greedy":
        paths, rep = greedy_solve(g, params.K, params.greedy_orders, params.seed)
        rec = SolveRecord("greedy", 0, 0.0, seed=params.seed,
                          extra={"orders": rep.orders, "best_order": rep.best_order})
    elif algorithm == "exact":
        paths = exact_solve(g, params.K, max_nodes=exact_max_nodes)
        rec = SolveRecord("exact", 0, 0.0)
    else:
        raise InputError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    rec.wall_time = time.perf_counter() - t0
    bad = validate_path_collection(paths, g, params.K)
    if bad is not None:
        raise InvariantError(f"{algorithm} produced an infeasible collection: {bad}")
    rec.value = path_value(paths)
    return paths, rec


@dataclass
class ExperimentSpec:
    n: int = 1000
    root_fraction: float = 0.2
    c: float = 3.0
    K: int = 5
    samples: int = 30
    algorithms: tuple = ("bp", "greedy")
    seed: int = 0
    beta: float = 0.01
    T: int = 50
    bp_orders: int = 5
    greedy_orders: int = 200
    time_limit: float | None = None
    normalized: bool = False
    exact_max_nodes: int = EXACT_MAX_NODES

    def __post_init__(self):
        if self.samples < 1:
            raise InputError("samples must be >= 1")
        self.algorithms = tuple(self.algorithms)
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise InputError(f"unknown algorithm {a!r}")
        if "exact" in self.algorithms and self.n > self.exact_max_nodes:
            raise InputError(f"exact is only allowed for n <= {self.exact_max_nodes}")
        self.params(0)  # validates the solver settings

    def params(self, seed: int) -> InstanceParams:
        return InstanceParams(K=self.K, beta=self.beta, T=self.T, bp_orders=self.bp_orders,
                              greedy_orders=self.greedy_orders, seed=seed,
                              time_limit=self.time_limit)


def sample_graph(spec: ExperimentSpec, sample: int) -> RootedDigraph:
    return generate_random(spec.n, spec.root_fraction, spec.c, derive_seed(spec.seed, sample, 0))


def run_sample(spec: ExperimentSpec, sample: int) -> list[tuple[dict, dict]]:
    """Rows ``(result, timing)`` for every algorithm on one sample."""
    g = sample_graph(spec, sample)
    rows = []
    for alg in spec.algorithms:
        seed = derive_seed(spec.seed, sample, 1 + ALGORITHMS.index(alg))
        row = {"schema": CSV_SCHEMA, "sample": sample, "algorithm": alg, "seed": seed,
               "n": g.n, "roots": len(g.roots), "edges": g.num_edges,
               "value": "", "iterations": "", "converged": "", "truncated": "", "status": "ok"}
        wall = ""
        try:
            _, rec = solve(g, alg, spec.params(seed), normalized=spec.normalized,
                           exact_max_nodes=spec.exact_max_nodes)
            row["value"] = rec.value
            row["iterations"] = "" if rec.iterations is None else rec.iterations
            row["converged"] = "" if rec.converged is None else int(rec.converged)
            row["truncated"] = "" if rec.truncated is None else int(rec.truncated)
            wall = f"{rec.wall_time:.6f}"
        except (InputError, InvariantError) as exc:
            row["status"] = f"error: {exc}"
        rows.append((row, {"sample": sample, "algorithm": alg, "wall_time": wall}))
    return rows


def _run_sample_args(args):
    return run_sample(*args)


@dataclass
class BenchResult:
    spec: ExperimentSpec
    rows: list
    timings: list

    def summary(self) -> dict:
        """Mean value per algorithm over successful rows (exact arithmetic mean)."""
        out = {}
        for alg in self.spec.algorithms:
            vals = [r["value"] for r in self.rows if r["algorithm"] == alg and r["status"] == "ok"]
            out[alg] = {"samples": len(vals), "failed": sum(
                1 for r in self.rows if r["algorithm"] == alg and r["status"] != "ok"),
                "mean_value": (sum(vals) / len(vals)) if vals else None}
        return out

    def timing_summary(self) -> dict:
        out = {}
        for alg in self.spec.algorithms:
            ts = [float(t["wall_time"]) for t in self.timings
                  if t["algorithm"] == alg and t["wall_time"] != ""]
            out[alg] = (sum(ts) / len(ts)) if ts else None
        return out

    def results_csv(self) -> str:
        return _csv(RESULT_FIELDS, self.rows)

    def timings_csv(self) -> str:
        return _csv(TIMING_FIELDS, self.timings)

    def summary_json(self) -> str:
        doc = {"schema": CSV_SCHEMA, "spec": asdict(self.spec), "summary": self.summary()}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir) -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"results": out / "results.csv", "timings": out / "timings.csv",
                 "summary": out / "summary.json"}
        paths["results"].write_text(self.results_csv())
        paths["timings"].write_text(self.timings_csv())
        paths["summary"].write_text(self.summary_json())
        return paths


def _csv(fields, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def bench(spec: ExperimentSpec, jobs: int = 1, progress=None) -> BenchResult:
    """Run every sample of ``spec``; rows are ordered by sample index whatever ``jobs`` is."""
    tasks = [(spec, s) for s in range(spec.samples)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            per_sample = list(ex.map(_run_sample_args, tasks))
    else:
        per_sample = []
        for t in tasks:
            per_sample.append(run_sample(*t))
            if progress is not None:
                progress(t[1], per_sample[-1])
    rows = [r for sample in per_sample for r, _ in sample]
    timings = [t for sample in per_sample for _, t in sample]
    return BenchResult(spec, rows, timings)
