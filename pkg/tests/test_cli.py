import contextlib
import io
from pathlib import Path

import pytest

from gencircuit.cli import main
from gencircuit.taskio import emit_submission, parse_task_record
from gencircuit.tasks import Submission


def run_cli(*argv: str) -> tuple[int, str]:
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv))
    return code, out.getvalue()


def read_tree(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestGenerate:
    def test_rerun_is_byte_identical(self, tmp_path):
        code1, _ = run_cli(
            "generate", "--type", "oscillator", "--cycle-length", "3",
            "--count", "4", "--seed", "12", "--out", str(tmp_path / "a"),
        )
        code2, _ = run_cli(
            "generate", "--type", "oscillator", "--cycle-length", "3",
            "--count", "4", "--seed", "12", "--out", str(tmp_path / "b"),
        )
        assert code1 == code2 == 0
        assert read_tree(tmp_path / "a") == read_tree(tmp_path / "b")

    def test_dataset_mode(self, tmp_path):
        code, out = run_cli(
            "generate", "--total", "15", "--seed", "3", "--out", str(tmp_path / "d"),
            "--jobs", "1",
        )
        assert code == 0
        assert "dataset 15 circuits" in out
        assert (tmp_path / "d" / "manifest.txt").exists()

    def test_missing_mode_is_domain_error(self, tmp_path):
        code, _ = run_cli("generate", "--out", str(tmp_path / "x"))
        assert code == 1


class TestVerifyAndScore:
    @pytest.fixture()
    def circuits(self, tmp_path):
        out = tmp_path / "c"
        assert run_cli(
            "generate", "--type", "two_input_gate", "--gate-type", "NOR",
            "--count", "2", "--seed", "2", "--out", str(out),
        )[0] == 0
        return out

    def test_verify_clean_circuit(self, circuits):
        code, out = run_cli("verify", str(circuits / "circuit_0000"))
        assert code == 0
        assert "total 1.0000" in out
        assert "level exec 1.0000" in out

    def test_truth_table_output(self, circuits):
        code, out = run_cli(
            "score", "--truth-table", "--circuit", str(circuits / "circuit_0000")
        )
        assert code == 0
        assert "row 00 1" in out
        assert "row 11 0" in out

    def test_score_zero_still_exits_zero(self, circuits, tmp_path):
        tasks_dir = tmp_path / "t"
        assert run_cli(
            "tasks", "--circuits", str(circuits), "--task", "T5",
            "--count", "1", "--seed", "1", "--out", str(tasks_dir),
        )[0] == 0
        sub = tmp_path / "empty.sub"
        sub.write_text("gencircuit-submission v1\n")
        code, out = run_cli(
            "score", "--task", str(tasks_dir / "task_0000.task"), "--submission", str(sub)
        )
        assert code == 0
        assert "total 0.0000" in out

    def test_score_reference_solution(self, circuits, tmp_path):
        tasks_dir = tmp_path / "t"
        run_cli(
            "tasks", "--circuits", str(circuits), "--task", "T5",
            "--count", "1", "--seed", "1", "--out", str(tasks_dir),
        )
        record = parse_task_record((tasks_dir / "task_0000.task").read_text())
        sub = Submission(outputs=dict(record.reference.ground_truth.truth_table))
        sub_path = tmp_path / "ref.sub"
        sub_path.write_text(emit_submission(sub))
        code, out = run_cli(
            "score", "--task", str(tasks_dir / "task_0000.task"),
            "--submission", str(sub_path),
        )
        assert code == 0
        assert "total 1.0000" in out
        assert "success 1" in out


class TestMetrics:
    def test_results_file(self, tmp_path):
        results = tmp_path / "results.txt"
        results.write_text(
            "result a 0.95 0.9 proc\n"
            "result b 0.70 0.9 proc\n"
            "result c 0.95 0.9 real\n"
            "result d 0.10 0.9 real\n"
        )
        code, out = run_cli("metrics", "--results", str(results))
        assert code == 0
        assert "tsr proc 0.500000" in out
        assert "tsr real 0.500000" in out
        assert "delta_gen 0.000000" in out

    def test_pass_at_k(self):
        code, out = run_cli("metrics", "--pass-at-k", "2", "1", "1")
        assert code == 0
        assert "0.500000" in out


class TestUsageErrors:
    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_bad_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--nope"])
        assert exc.value.code == 2


class TestAssign:
    def test_assign_from_files(self, tmp_path):
        (tmp_path / "topo.txt").write_text(
            "gencircuit-topology v1\ntopo_node x0 - sensor\ntopo_node g1 x0 output\n"
        )
        (tmp_path / "gates.txt").write_text(
            "gencircuit-gates v1\n"
            "gate A 0.02 2.5 0.3 2.5\n"
            "gate B 0.15 0.4 0.3 2.0\n"
        )
        (tmp_path / "table.txt").write_text("gencircuit-table v1\ntt 0 1\ntt 1 0\n")
        code, out = run_cli(
            "assign", "--topology", str(tmp_path / "topo.txt"),
            "--gates", str(tmp_path / "gates.txt"),
            "--truth-table", str(tmp_path / "table.txt"),
            "--iters", "80", "--seed", "5",
        )
        assert code == 0
        assert "assign g1 A" in out
        assert "success 1" in out


class TestRefineCli:
    def test_history_columns(self):
        code, out = run_cli(
            "refine", "--pool-size", "30", "--iterations", "3", "--seed", "1",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "iter mean elite best"
        assert len([l for l in lines if l and l[0].isdigit()]) == 3

    def test_rerun_identical(self):
        _, a = run_cli("refine", "--pool-size", "30", "--iterations", "3", "--seed", "7")
        _, b = run_cli("refine", "--pool-size", "30", "--iterations", "3", "--seed", "7")
        assert a == b


class TestDedupCli:
    def test_reports_removed(self, tmp_path):
        out_dir = tmp_path / "c"
        run_cli(
            "generate", "--type", "toggle", "--count", "6", "--seed", "1",
            "--out", str(out_dir),
        )
        code, out = run_cli("dedup", "--dir", str(out_dir), "--mode", "role_labeled")
        assert code == 0
        assert "kept circuit_0000" in out
        assert "total 6 kept 1" in out
