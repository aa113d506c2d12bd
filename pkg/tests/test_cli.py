from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from sl2ext import cli, core
from sl2ext.errors import ArithmeticOverflowError

COMMANDS = {
    "dim": ["dim", "--prime", "3", "--n", "3", "--weight", "76", "--poly"],
    "dim-general": ["dim", "--prime", "3", "--n", "3", "--lambda", "1", "--mu", "13"],
    "table": ["table", "--prime", "2", "--max-n", "3", "--max-weight", "40"],
    "table-labels": ["table", "--prime", "3", "--max-n", "3", "--max-weight", "80", "--method", "labels"],
    "table-series": ["table", "--prime", "5", "--max-n", "2", "--max-weight", "100", "--method", "series"],
    "table-partitions": ["table", "--prime", "2", "--max-n", "2", "--max-weight", "40", "--method", "partitions"],
    "scan": ["scan", "--prime", "3", "--n", "2", "--max-weight", "500"],
    "labels": ["labels", "--n", "3"],
    "labels-weight": ["labels", "--n", "3", "--prime", "3", "--weight", "76"],
    "growth-fib": ["growth", "--fibonacci", "--max-n", "12"],
    "growth-binom": ["growth", "--binomial", "--max-n", "40"],
    "growth-const": ["growth", "--constant"],
    "witness": ["witness", "--prime", "3", "--n", "3", "--length", "3"],
    "verify-2": ["verify", "--prime", "2", "--ds", "32", "--dz", "8"],
    "verify-3": ["verify", "--prime", "3", "--ds", "81", "--dz", "8"],
}


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def no_env_cache(monkeypatch):
    monkeypatch.delenv(cli.CACHE_ENV, raising=False)


@pytest.mark.parametrize("key", sorted(COMMANDS))
def test_json_validates_against_schema(capsys, key):
    argv = COMMANDS[key]
    code, out, _ = run(capsys, *argv, "--format", "json", "--no-cache")
    assert code == 0
    payload = json.loads(out)
    assert payload["command"] == argv[0]
    jsonschema.validate(payload, cli.load_schema(argv[0]))


@pytest.mark.parametrize("key", sorted(COMMANDS))
@pytest.mark.parametrize("fmt", ["plain", "csv", "json"])
def test_output_is_byte_identical(capsys, key, fmt):
    argv = [*COMMANDS[key], "--format", fmt, "--no-cache"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[1]


@pytest.mark.parametrize("key", sorted(COMMANDS))
def test_csv_is_rectangular(capsys, key):
    _, out, _ = run(capsys, *COMMANDS[key], "--format", "csv", "--no-cache")
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) >= 2
    assert len({len(r) for r in rows}) == 1


def test_dim_plain(capsys):
    code, out, _ = run(capsys, "dim", "--prime", "3", "--n", "3", "--weight", "76", "--no-cache")
    assert code == 0 and "3" in out


def test_dim_json_value(capsys):
    _, out, _ = run(capsys, "dim", "--prime", "2", "--n", "0", "--weight", "14", "--format", "json", "--no-cache")
    assert json.loads(out)["dimension"] == 1


def test_table_methods_agree(capsys):
    outs = {}
    for method in ("recursion", "labels", "series"):
        _, out, _ = run(capsys, "table", "--prime", "3", "--max-n", "4", "--max-weight", "300",
                        "--method", method, "--format", "csv", "--no-cache")
        outs[method] = out
    assert outs["recursion"] == outs["labels"] == outs["series"]


@pytest.mark.parametrize("argv", [
    ["dim", "--n", "1", "--weight", "4"],
    ["dim", "--prime", "4", "--n", "1", "--weight", "4"],
    ["dim", "--prime", "3", "--n", "-1", "--weight", "4"],
    ["dim", "--prime", "3", "--n", "1"],
    ["dim", "--prime", "3", "--n", "1", "--lambda", "2", "--mu", "7"],
    ["table", "--prime", "2", "--max-n", "2", "--max-weight", "20", "--method", "labels"],
    ["growth", "--constant", "--fit-lo", "3"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv, *(["--no-cache"] if argv != ["frobnicate"] else []))
    assert code == cli.EXIT_USAGE


def test_capacity_exit_5(capsys):
    code, _, err = run(capsys, "table", "--prime", "2", "--max-n", "10", "--max-weight", "2000",
                       "--limit", "100", "--no-cache")
    assert code == cli.EXIT_CAPACITY and "capacity" in err


def test_overflow_exit_3(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise ArithmeticOverflowError("counter exceeds 2^64-1")

    monkeypatch.setattr(core, "ext_dim", boom)
    monkeypatch.setattr(cli.core, "ext_dim", boom)
    code, _, err = run(capsys, "dim", "--prime", "2", "--n", "3", "--weight", "999999998", "--no-cache")
    assert code == cli.EXIT_OVERFLOW and "overflow" in err


def test_verify_clean_cache_passes(capsys, tmp_path):
    path = tmp_path / "cache.jsonl"
    assert run(capsys, "cache", "fill", "--prime", "3", "--max-weight", "200", "--cache", str(path))[0] == 0
    code, out, _ = run(capsys, "verify", "--prime", "3", "--ds", "81", "--dz", "8",
                       "--cache", str(path), "--format", "json")
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert any(c["name"] == "cache entries" and c["passed"] for c in report["checks"])


def test_verify_corrupted_cache_fails(capsys, tmp_path):
    path = tmp_path / "cache.jsonl"
    path.write_text('{"format": "sl2ext-cache", "version": 1}\n'
                    '{"p": 3, "d": 38, "coeffs": [0, 0, 1, 4]}\n')
    code, out, _ = run(capsys, "verify", "--prime", "3", "--ds", "27", "--dz", "6", "--cache", str(path))
    assert code == cli.EXIT_VERIFY
    assert "FAIL cache entries" in out
    assert "p=3 d=38 z^3: stored 4, recomputed 3" in out


def test_verify_malformed_cache_fails(capsys, tmp_path):
    path = tmp_path / "cache.jsonl"
    path.write_text('{"format": "sl2ext-cache", "version": 1}\n{"p": 3, "d": 1, "coeffs": [1]}\n')
    code, out, _ = run(capsys, "verify", "--prime", "3", "--ds", "27", "--dz", "6", "--cache", str(path))
    assert code == cli.EXIT_VERIFY and "outside the principal block" in out


def test_malformed_cache_is_usage_error_elsewhere(capsys, tmp_path):
    path = tmp_path / "cache.jsonl"
    path.write_text("garbage\n")
    code, _, err = run(capsys, "dim", "--prime", "3", "--n", "1", "--weight", "4", "--cache", str(path))
    assert code == cli.EXIT_USAGE and "header" in err


def test_env_var_sets_cache_path(capsys, tmp_path, monkeypatch):
    path = tmp_path / "env.jsonl"
    monkeypatch.setenv(cli.CACHE_ENV, str(path))
    assert run(capsys, "dim", "--prime", "3", "--n", "3", "--weight", "76")[0] == 0
    assert (3, 38) in core.DimCache(path)
    # --no-cache ignores it
    path.unlink()
    assert run(capsys, "dim", "--prime", "3", "--n", "3", "--weight", "76", "--no-cache")[0] == 0
    assert not path.exists()


def test_cache_show_and_clear(capsys, tmp_path):
    path = str(tmp_path / "c.jsonl")
    run(capsys, "cache", "fill", "--prime", "5", "--max-weight", "50", "--cache", path)
    code, out, _ = run(capsys, "cache", "show", "--cache", path, "--format", "json")
    assert code == 0 and json.loads(out)["entries"] == 26
    run(capsys, "cache", "clear", "--cache", path)
    _, out, _ = run(capsys, "cache", "show", "--cache", path, "--format", "json")
    assert json.loads(out)["entries"] == 0


def test_help_lists_csv_columns(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["table", "--help"])
    assert "CSV columns" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sl2ext", "dim", "--prime", "3", "--n", "3",
                          "--weight", "76", "--format", "json", "--no-cache"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["dimension"] == 3
