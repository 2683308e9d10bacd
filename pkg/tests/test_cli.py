import json

import pytest

from pathpack.cli import main
from pathpack.graph import load_snap, read_roots
from pathpack.harness import ExperimentSpec, bench, derive_seed, solve
from pathpack.errors import InputError
from pathpack.params import InstanceParams


@pytest.fixture
def instance(tmp_path):
    prefix = tmp_path / "inst"
    assert main(["generate", "--n", "120", "--seed", "4", "--out", str(prefix)]) == 0
    return tmp_path / "inst.edges", tmp_path / "inst.roots"


def test_generate_round_trips(instance, tmp_path):
    edges, roots = instance
    g = load_snap(edges.read_text(), roots=read_roots(roots.read_text()))
    assert main(["generate", "--n", "120", "--seed", "4", "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "again.edges").read_text() == edges.read_text()
    assert g.n > 0


@pytest.mark.parametrize("alg", ["bp", "greedy"])
def test_solve_then_validate(instance, tmp_path, alg, capsys):
    edges, roots = instance
    sol, rec = tmp_path / f"{alg}.txt", tmp_path / f"{alg}.json"
    args = ["--edges", str(edges), "--roots", str(roots)]
    assert main(["solve", *args, "--algorithm", alg, "--out", str(sol), "--record", str(rec),
                 "--T", "10"]) == 0
    record = json.loads(rec.read_text())
    assert record["algorithm"] == alg and record["value"] > 0
    assert main(["validate", *args, "--solution", str(sol)]) == 0
    assert f"value {record['value']}" in capsys.readouterr().out


def test_solve_chain_and_exact(tmp_path, capsys):
    (tmp_path / "e").write_text("0 1\n")
    (tmp_path / "r").write_text("0\n")
    for alg in ("bp", "exact"):
        assert main(["solve", "--edges", str(tmp_path / "e"), "--roots", str(tmp_path / "r"),
                     "--algorithm", alg, "--K", "2"]) == 0
        assert capsys.readouterr().out == "0 1\n"


def test_hidden_dense_check(tmp_path):
    (tmp_path / "e").write_text("0 1\n1 2\n0 2\n2 3\n")
    (tmp_path / "r").write_text("0\n")
    assert main(["solve", "--edges", str(tmp_path / "e"), "--roots", str(tmp_path / "r"),
                 "--check-dense", "--K", "3"]) == 0


def test_exit_codes(instance, tmp_path):
    edges, roots = instance
    assert main(["solve", "--edges", str(tmp_path / "missing"), "--roots", str(roots)]) == 1
    (tmp_path / "bad").write_text("0 1\nzz\n")
    assert main(["solve", "--edges", str(tmp_path / "bad"), "--roots", str(roots)]) == 1
    (tmp_path / "sol").write_text("1 2 3 4 5 6 7 8\n")
    assert main(["validate", "--edges", str(edges), "--roots", str(roots),
                 "--solution", str(tmp_path / "sol")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 1
    assert main(["solve", "--edges", str(edges)]) == 1  # no root specification


def test_export_pcd_command(instance, tmp_path):
    edges, roots = instance
    out = tmp_path / "m.lp"
    assert main(["export-pcd", "--edges", str(edges), "--roots", str(roots), "--out", str(out)]) == 0
    assert out.read_text().startswith("\\ parent-child-depth model")


def test_bench_outputs_are_reproducible(tmp_path):
    for d in ("a", "b"):
        assert main(["bench", "--n", "80", "--samples", "2", "--seed", "5", "--T", "5",
                     "--greedy-orders", "5", "--out", str(tmp_path / d), "--quiet"]) == 0
    for f in ("results.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    header = (tmp_path / "a" / "timings.csv").read_text().splitlines()[0]
    assert header == "sample,algorithm,wall_time"


def test_bench_summary_is_exact_mean():
    spec = ExperimentSpec(n=60, samples=3, seed=1, T=4, greedy_orders=4)
    res = bench(spec)
    for alg, s in res.summary().items():
        vals = [r["value"] for r in res.rows if r["algorithm"] == alg]
        assert s["mean_value"] == sum(vals) / len(vals)


def test_bench_records_failures_per_row():
    spec = ExperimentSpec(n=12, samples=2, algorithms=("exact",), exact_max_nodes=14, K=3)
    res = bench(spec)
    assert all(r["status"] == "ok" for r in res.rows)
    with pytest.raises(InputError):
        ExperimentSpec(n=100, algorithms=("exact",))


def test_seed_derivation():
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert len({derive_seed(0, s, a) for s in range(50) for a in range(3)}) == 150


def test_solve_validates_before_returning():
    from pathpack.graph import RootedDigraph
    paths, rec = solve(RootedDigraph(2, [0], [(0, 1)]), "greedy", InstanceParams(K=2))
    assert paths == [(0, 1)] and rec.value == 2
    with pytest.raises(InputError):
        solve(RootedDigraph(2, [0], [(0, 1)]), "nope", InstanceParams())


@pytest.mark.parametrize("name", ["demo_small_instance.py", "demo_pcd_model.py"])
def test_fast_demos_run(name, capsys):
    import runpy
    from pathlib import Path
    runpy.run_path(str(Path(__file__).parent.parent / "demos" / name), run_name="__main__")
    assert capsys.readouterr().out


def test_exact_guard_flag(tmp_path):
    from pathpack.graph import RootedDigraph, write_roots, write_snap
    g = RootedDigraph(16, list(range(4)), [(i, i + 4) for i in range(4)] + [(i, i + 1) for i in range(4, 15)])
    with open(tmp_path / "e", "w") as f:
        write_snap(g, f)
    with open(tmp_path / "r", "w") as f:
        write_roots(g, f)
    args = ["solve", "--edges", str(tmp_path / "e"), "--roots", str(tmp_path / "r"),
            "--algorithm", "exact", "--K", "3", "--out", str(tmp_path / "s")]
    assert main(args) == 1
    assert main([*args, "--exact-max-nodes", "16"]) == 0
