"""Command-line interface: commands, exit codes, and output determinism."""

import json
import math

import numpy as np
import pytest

import hklocal as hk
from hklocal.cli import load_sweep_csv, load_vector_csv, run
from hklocal.fixtures import (
    dolphins_boundary_path,
    dolphins_graph_path,
    dolphins_subset_path,
)


@pytest.fixture()
def p4_files(tmp_path):
    graph = tmp_path / "p4.edges"
    graph.write_text("0 1\n1 2\n2 3\n")
    subset = tmp_path / "s.txt"
    subset.write_text("1\n2\n")
    boundary = tmp_path / "b.txt"
    boundary.write_text("0 1.0\n")
    return {"graph": str(graph), "subset": str(subset), "boundary": str(boundary)}


def _io_args(files, out=None):
    args = ["--graph", files["graph"], "--subset", files["subset"], "--boundary", files["boundary"]]
    if out:
        args += ["--out", str(out)]
    return args


def _strip_elapsed(text: str) -> str:
    return "\n".join(
        line for line in text.splitlines() if "elapsed_seconds" not in line
    )


class TestValidate:
    def test_valid_exits_zero(self, p4_files, tmp_path, capsys):
        assert run(["validate", *_io_args(p4_files)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["valid"] is True

    def test_violation_exits_two(self, p4_files, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("1 1.0\n")
        p4_files = dict(p4_files, boundary=str(bad))
        assert run(["validate", *_io_args(p4_files)]) == 2
        doc = json.loads(capsys.readouterr().out)
        assert doc["valid"] is False
        assert any("(i)" in v for v in doc["violations"])

    def test_solver_on_invalid_problem_exits_two(self, p4_files, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("1 1.0\n")
        p4_files = dict(p4_files, boundary=str(bad))
        assert run(["solve-exact", *_io_args(p4_files)]) == 2
        doc = json.loads(capsys.readouterr().out)
        assert doc["violations"]

    def test_malformed_graph_exits_one(self, p4_files, tmp_path, capsys):
        broken = tmp_path / "broken.edges"
        broken.write_text("0 zero\n")
        p4_files = dict(p4_files, graph=str(broken))
        assert run(["validate", *_io_args(p4_files)]) == 1

    def test_missing_file_exits_one(self, p4_files):
        p4_files = dict(p4_files, graph="/nonexistent/g.edges")
        assert run(["validate", *_io_args(p4_files)]) == 1


class TestSolveCommands:
    def test_solve_exact_values(self, p4_files, capsys):
        assert run(["solve-exact", *_io_args(p4_files)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["x_s"]["1"] == pytest.approx(2.0 * math.sqrt(2.0) / 3.0, abs=1e-12)
        assert doc["x_s"]["2"] == pytest.approx(math.sqrt(2.0) / 3.0, abs=1e-12)

    def test_solve_local_report(self, p4_files, capsys):
        assert run(["solve-local", *_io_args(p4_files), "--gamma", "0.2", "--seed", "4"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["format_version"] == 1
        assert doc["schedule"]["r_outer"] == math.ceil(math.log(2 / 0.2) / 0.04)
        assert set(doc["x_hat"]) == {"1", "2"}
        assert "within_local_bound" in doc["error_bounds"]

    def test_solve_greens_bound_flag(self, p4_files, capsys):
        code = run([
            "solve-greens", *_io_args(p4_files),
            "--gamma", "0.25", "--eps", "0.4", "--seed", "7",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["error_bounds"]["within_greens_bound"] in (True, False)
        assert doc["instrumentation"]["walk_steps_total"] > 0

    def test_eps_below_gamma_exits_two(self, p4_files, capsys):
        code = run([
            "solve-greens", *_io_args(p4_files),
            "--gamma", "0.25", "--eps", "0.1", "--seed", "7",
        ])
        assert code == 2

    def test_byte_identical_reruns_and_workers(self, p4_files, tmp_path):
        outs = []
        for i, workers in enumerate((1, 4, 1)):
            out = tmp_path / f"r{i}.json"
            code = run([
                "solve-greens", *_io_args(p4_files, out),
                "--gamma", "0.25", "--eps", "0.4", "--seed", "9",
                "--workers", str(workers),
            ])
            assert code == 0
            outs.append(out.read_text())
        stripped = {_strip_elapsed(text) for text in outs}
        assert len(stripped) == 1


class TestVectorCommands:
    def test_hkpr_exact_csv(self, p4_files, capsys):
        assert run(["hkpr-exact", *_io_args(p4_files), "--t", "1.0"]) == 0
        text = capsys.readouterr().out
        rows = load_vector_csv(text)
        assert rows[1] == pytest.approx(math.exp(-1) * math.cosh(0.5), abs=1e-14)
        assert rows[2] == pytest.approx(math.exp(-1) * math.sinh(0.5), abs=1e-14)

    def test_hkpr_approx_csv_round_trip(self, p4_files, tmp_path):
        out = tmp_path / "v.csv"
        code = run([
            "hkpr-approx", *_io_args(p4_files, out),
            "--t", "1.0", "--eps", "0.3", "--seed", "2",
        ])
        assert code == 0
        rows = load_vector_csv(out.read_text())
        direct = hk.approx_dirhkpr(
            hk.load_graph("0 1\n1 2\n2 3"),
            1.0,
            np.array([1.0, 0.0]),
            hk.VertexSubset.from_iterable([1, 2], 4),
            0.3,
            master_seed=2,
        )
        assert rows[1] == direct[0] and rows[2] == direct[1]


class TestSweep:
    def test_sweep_schema_and_monotone_tail(self, p4_files, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run(["sweep-norms", *_io_args(p4_files, out), "--points", "40"]) == 0
        rows = load_sweep_csv(out.read_text())
        assert len(rows) == 40
        assert rows[0][0] == pytest.approx(1.0)
        assert rows[-1][0] == pytest.approx(hk.make_schedule(2, 0.01).T, rel=1e-12)
        l1 = [r[1] for r in rows]
        assert all(b <= a + 1e-12 for a, b in zip(l1, l1[1:]))

    def test_first_row_matches_exact(self, p4_files, capsys, p4_problem):
        assert run(["sweep-norms", *_io_args(p4_files), "--points", "10"]) == 0
        rows = load_sweep_csv(capsys.readouterr().out)
        op = hk.restricted_operator(p4_problem.graph, p4_problem.subset)
        rho = hk.exact_dirhkpr(op, 1.0, p4_problem.b2)
        assert rows[0][1] == pytest.approx(np.abs(rho).sum(), rel=1e-12)
        assert rows[0][2] == pytest.approx(np.abs(rho).max(), rel=1e-12)

    def test_dolphins_grid_reaches_horizon(self, tmp_path):
        out = tmp_path / "dolphins_sweep.csv"
        code = run([
            "sweep-norms",
            "--graph", str(dolphins_graph_path()),
            "--subset", str(dolphins_subset_path()),
            "--boundary", str(dolphins_boundary_path()),
            "--points", "50",
            "--out", str(out),
        ])
        assert code == 0
        rows = load_sweep_csv(out.read_text())
        assert rows[-1][0] == pytest.approx(108738.936, abs=0.01)


def test_diagnostics_go_to_stderr_only(p4_files, capsys, monkeypatch):
    monkeypatch.setenv("SOLVER_LOG", "info")
    assert run(["solve-local", *_io_args(p4_files), "--gamma", "0.2"]) == 0
    captured = capsys.readouterr()
    json.loads(captured.out)  # stdout holds exactly the result document


def test_constant_override_changes_round_count(p4_files, tmp_path):
    outs = []
    for constant in ("16.0", "4.0"):
        out = tmp_path / f"c{constant}.json"
        code = run([
            "solve-greens", *_io_args(p4_files, out),
            "--gamma", "0.25", "--eps", "0.4", "--seed", "1",
            "--constant-override", constant,
        ])
        assert code == 0
        outs.append(json.loads(out.read_text()))
    assert outs[0]["instrumentation"]["walks_started"] > outs[1]["instrumentation"]["walks_started"]
