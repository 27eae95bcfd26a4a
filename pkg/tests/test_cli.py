"""Command-line surface: exit-code contract, seeded batches, trace CSVs."""

import csv
import json

import pytest

from stlmon.cli import EXIT_USAGE, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    """Exit codes form a bijection with verdicts on a small golden corpus."""

    def test_valid_is_zero(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "verify",
            "--model", "timer",
            "--formula", "F[0,6.284]((cos(x) < 0) & (sin(x) < 0))",
        )
        assert code == 0
        assert json.loads(out)["outcome"] == "Valid"

    def test_unsat_is_one(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--model", "timer", "--formula", "G[0,5](x - 1 < 0)"
        )
        assert code == 1
        assert json.loads(out)["outcome"] == "Unsat"

    def test_unknown_is_two(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "verify",
            "--model", "timer",
            "--formula", "F[0,3] !((x - 1 < 0) | (1 - x < 0))",
        )
        assert code == 2
        doc = json.loads(out)
        assert doc["outcome"] == "Unknown"
        assert doc["unknown_cause"] == "PropagationError"

    def test_formula_parse_error_is_usage(self, capsys):
        code, _, err = run_cli(
            capsys, "verify", "--model", "timer", "--formula", "F[0,3] (("
        )
        assert code == EXIT_USAGE
        assert err

    def test_unknown_model_is_usage(self, capsys):
        code, _, err = run_cli(
            capsys, "verify", "--model", "no-such-model", "--formula", "true"
        )
        assert code == EXIT_USAGE
        assert err

    def test_missing_subcommand_is_usage(self, capsys):
        code, _, _ = run_cli(capsys)
        assert code == EXIT_USAGE


BATCH_ARGS = (
    "batch",
    "--model", "rotation",
    "--formula", "G[0,2] F[0,6.284] !(x2 - 1 < 0)",
    "--runs", "6",
    "--seed", "11",
)


class TestBatch:
    def test_seed_determinism(self, capsys):
        # wall-clock mean is the one non-reproducible field; the counts
        # must match byte for byte
        _, out1, _ = run_cli(capsys, *BATCH_ARGS)
        _, out2, _ = run_cli(capsys, *BATCH_ARGS)
        doc1, doc2 = json.loads(out1), json.loads(out2)
        doc1.pop("mean_valid_time")
        doc2.pop("mean_valid_time")
        assert json.dumps(doc1, sort_keys=True) == json.dumps(doc2, sort_keys=True)

    def test_counts_add_up(self, capsys):
        code, out, _ = run_cli(capsys, *BATCH_ARGS)
        assert code == 0
        doc = json.loads(out)
        assert doc["n_valid"] + doc["n_unsat"] + doc["n_unknown"] == doc["runs"]
        assert sum(doc["n_unknown_by_cause"].values()) == doc["n_unknown"]

    def test_single_run_matches_verify(self, capsys):
        # with one sample the aggregate is just the verdict of that sample
        code, out, _ = run_cli(
            capsys,
            "batch",
            "--model", "rotation",
            "--formula", "G[0,2] F[0,6.284] !(x2 - 1 < 0)",
            "--runs", "1",
            "--seed", "5",
        )
        assert code == 0
        doc = json.loads(out)
        counts = (doc["n_valid"], doc["n_unsat"], doc["n_unknown"])
        assert sorted(counts) == [0, 0, 1]

    def test_bad_runs_is_usage(self, capsys):
        code, _, _ = run_cli(
            capsys,
            "batch", "--model", "rotation", "--formula", "true", "--runs", "0",
        )
        assert code == EXIT_USAGE


class TestTrace:
    def test_timer_trace_is_monotone_two_column(self, capsys, tmp_path):
        out_path = tmp_path / "trace.csv"
        code, _, _ = run_cli(
            capsys,
            "trace",
            "--model", "timer",
            "--horizon", "10",
            "--output", str(out_path),
        )
        assert code == 0
        with open(out_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "x_lo", "x_hi"]
        body = [[float(c) for c in row] for row in rows[1:]]
        times = [row[0] for row in body]
        assert times == sorted(times)
        assert times[0] == 0.0 and times[-1] == 10.0
        for t, lo, hi in body:
            assert lo <= t <= hi

    def test_verify_with_trace_writes_csv(self, capsys, tmp_path):
        out_path = tmp_path / "run.csv"
        code, _, _ = run_cli(
            capsys,
            "verify",
            "--model", "timer",
            "--formula", "F[0,3](x - 1 < 0)",
            "--trace", str(out_path),
        )
        assert code == 0
        assert out_path.exists()
