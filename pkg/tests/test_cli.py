"""CLI behavior: in-process through main() plus subprocess smoke tests."""

import io
import subprocess
import sys

import pytest

from polyfed.cli import main
from polyfed.workspace import SCENARIO_QUERY

from conftest import FIXTURE_DIR, GOLDEN_DIR

ROW = "651\t951\thttp://oilandgas/Well#F03-2\thttp://oilandgas/Horizon#FS8\t23031"
HEADER = "inline\tcrossline\thasWell\thasHorizon\tepsg"


@pytest.fixture
def catalog(tmp_path):
    path = tmp_path / "nl.catalog"
    assert main(["load", str(FIXTURE_DIR), "--catalog", str(path)]) == 0
    return path


def test_load_reports_what_it_ingested(tmp_path, capsys):
    path = tmp_path / "nl.catalog"
    code = main(["load", str(FIXTURE_DIR), "--catalog", str(path)])
    assert code == 0
    out = capsys.readouterr().out
    assert out == (
        f"loaded {FIXTURE_DIR}: 1 entities, 4 stores, 1 workflows -> {path}\n"
    )
    assert path.exists()


def test_query_prints_tab_separated_rows(catalog, capsys):
    capsys.readouterr()
    code = main(["query", SCENARIO_QUERY, "--catalog", str(catalog)])
    assert code == 0
    assert capsys.readouterr().out == f"{HEADER}\n{ROW}\n"


def test_query_reads_stdin_without_argument(catalog, capsys, monkeypatch):
    capsys.readouterr()
    monkeypatch.setattr(sys, "stdin", io.StringIO(SCENARIO_QUERY))
    assert main(["query", "--catalog", str(catalog)]) == 0
    assert ROW in capsys.readouterr().out


def test_explain_prints_the_rendered_sql(catalog, capsys):
    capsys.readouterr()
    code = main(["query", "-e", SCENARIO_QUERY, "--catalog", str(catalog)])
    assert code == 0
    golden = (GOLDEN_DIR / "netherlands_query.sql").read_text()
    assert capsys.readouterr().out == golden


def test_env_var_supplies_the_catalog(catalog, capsys, monkeypatch):
    capsys.readouterr()
    monkeypatch.setenv("POLYFED_CATALOG", str(catalog))
    assert main(["query", SCENARIO_QUERY]) == 0
    assert ROW in capsys.readouterr().out


def test_flag_beats_env_var(catalog, tmp_path, capsys, monkeypatch):
    capsys.readouterr()
    monkeypatch.setenv("POLYFED_CATALOG", str(tmp_path / "missing.catalog"))
    assert main(["query", SCENARIO_QUERY, "--catalog", str(catalog)]) == 0
    assert ROW in capsys.readouterr().out


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        assert main(["no-such-command"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_batches_option_is_1(self, capsys):
        assert main(["bench", "--batches", "one,two"]) == 1
        assert "comma-separated integers" in capsys.readouterr().err

    def test_parse_error_is_2(self, catalog, capsys):
        capsys.readouterr()
        code = main(["query", "select Seismic.", "--catalog", str(catalog)])
        assert code == 2
        err = capsys.readouterr().err
        assert err.startswith("error: 1:16: expected an attribute name")

    def test_validation_error_is_2(self, catalog, capsys):
        capsys.readouterr()
        code = main(
            [
                "query",
                "select Seismic.epsg where Seismic from never_ran",
                "--catalog",
                str(catalog),
            ]
        )
        assert code == 2
        assert "never_ran" in capsys.readouterr().err

    def test_missing_catalog_is_3(self, tmp_path, capsys):
        code = main(
            ["query", SCENARIO_QUERY, "--catalog", str(tmp_path / "absent.catalog")]
        )
        assert code == 3
        assert "error:" in capsys.readouterr().err


def test_bench_prints_a_point_per_batch_count(capsys, tmp_path):
    csv_path = tmp_path / "timings.csv"
    code = main(
        [
            "bench",
            "--batches",
            "1,2",
            "--runs",
            "1",
            "--warmup",
            "0",
            "--csv",
            str(csv_path),
        ]
    )
    assert code == 0
    captured = capsys.readouterr()
    lines = captured.out.strip().splitlines()
    assert lines[0].startswith("batch_count, median_build_ms")
    assert len(lines) == 3
    assert lines[1].startswith("1, ")
    assert lines[2].startswith("2, ")
    assert csv_path.exists()
    assert f"wrote {csv_path}" in captured.err


def test_console_script_round_trip(tmp_path):
    catalog = tmp_path / "nl.catalog"
    loaded = subprocess.run(
        ["polyfed", "load", str(FIXTURE_DIR), "--catalog", str(catalog)],
        capture_output=True,
        text=True,
    )
    assert loaded.returncode == 0, loaded.stderr
    queried = subprocess.run(
        ["polyfed", "query", SCENARIO_QUERY, "--catalog", str(catalog)],
        capture_output=True,
        text=True,
    )
    assert queried.returncode == 0, queried.stderr
    assert queried.stdout == f"{HEADER}\n{ROW}\n"


def test_shell_loop(tmp_path):
    catalog = tmp_path / "nl.catalog"
    subprocess.run(
        ["polyfed", "load", str(FIXTURE_DIR), "--catalog", str(catalog)],
        capture_output=True,
        check=True,
    )
    session = subprocess.run(
        ["polyfed", "shell", "--catalog", str(catalog)],
        input=f"{SCENARIO_QUERY}\nbroken query\n\nquit\n",
        capture_output=True,
        text=True,
    )
    assert session.returncode == 0
    assert "one query per line; exit with 'quit'" in session.stdout
    assert ROW in session.stdout
    assert "(1 rows)" in session.stdout
    # a bad line reports and keeps the loop alive
    assert "error:" in session.stderr
