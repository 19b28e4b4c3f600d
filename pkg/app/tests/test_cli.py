# test_cli.py

import json

import pytest

from app.commands.run import overrides_from_args
from app.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, main


def test_gen_data_writes_rows(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["gen-data", "--rows", "25", "--seed", "3", "--out", str(out)]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 25
    assert all(len(line.split(",")) == 11 for line in lines)


def test_gen_data_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["gen-data", "--rows", "10", "--seed", "8", "--out", str(a), "--features", "3"])
    main(["gen-data", "--rows", "10", "--seed", "8", "--out", str(b), "--features", "3"])
    assert a.read_bytes() == b.read_bytes()


def test_missing_required_flag_is_usage_error(capsys):
    assert main(["gen-data", "--rows", "10", "--seed", "1"]) == EXIT_USAGE
    assert "--out" in capsys.readouterr().err


def test_unknown_command_is_usage_error():
    assert main(["train"]) == EXIT_USAGE


def test_help_exits_ok(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "gen-data" in capsys.readouterr().out


def test_run_with_invalid_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n_nodes": 0}), encoding="utf-8")
    assert main(["run", str(path)]) == EXIT_FAILURE
    err = capsys.readouterr().err
    assert "config error" in err and "n_nodes" in err


def test_run_with_unreadable_csv(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"n_nodes": 2, "defense": "none", "rounds": 1}), encoding="utf-8")
    bad = tmp_path / "bad.csv"
    bad.write_text("7,1.0\n", encoding="utf-8")
    assert main(["run", str(cfg), "--data", str(bad), "--out-dir", str(tmp_path / "o")]) == EXIT_FAILURE


def test_overrides_from_flags():
    args = build_parser().parse_args(
        ["run", "--nodes", "5", "--alpha", "2.0", "--data", "x.csv", "--no-timing", "--partitions", "3"]
    )
    assert overrides_from_args(args) == {
        "n_nodes": 5,
        "dirichlet_alpha": 2.0,
        "queue_partitions": 3,
        "dataset": {"source": "csv", "path": "x.csv"},
        "output": {"record_timing": False},
    }


def test_run_then_report(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(
        json.dumps(
            {
                "seed": 2,
                "n_nodes": 3,
                "byzantine_fraction": 0.0,
                "defense": "median",
                "rounds": 2,
                "depth": 2,
                "bins": 4,
                "threads": 1,
                "dataset": {"n_rows": 60, "n_features": 3},
            }
        ),
        encoding="utf-8",
    )
    out = tmp_path / "res"
    assert main(["run", str(cfg), "--out-dir", str(out), "--no-timing", "--write-models"]) == EXIT_OK
    assert "Median aggregation" in capsys.readouterr().out
    assert (out / "rounds.csv").exists()
    assert (out / "model_median.json").exists()

    assert main(["report", str(out / "summary.json")]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "Median aggregation" in printed
    assert "pristine accuracy" in printed


def test_report_missing_file(tmp_path):
    assert main(["report", str(tmp_path / "none.json")]) == EXIT_FAILURE


def test_bench_csv(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--sizes", "1", "--iterations", "1", "--out", str(out)]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n_instances,constraints,prove_ms,verify_ms"
    assert len(lines) == 2
    assert lines[1].startswith("1,327,")


@pytest.mark.parametrize("command", ["gen-data", "run", "bench", "report"])
def test_subcommands_have_help(command, capsys):
    assert main([command, "--help"]) == EXIT_OK
    assert command in capsys.readouterr().out
