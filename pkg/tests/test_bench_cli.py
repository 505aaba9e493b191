import csv
import io

import pytest

from waveray import SolverConfig
from waveray.bench import (
    COLUMNS,
    SUITES,
    Cell,
    Suite,
    benchmark_run,
    format_table,
    load_suite,
    parse_suite,
    run_cell,
)
from waveray.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, solver_settings
from waveray.errors import ConfigurationError


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


class TestSuites:
    @pytest.mark.parametrize("name,cells", [("table1", 12), ("table2", 16), ("table3", 8), ("table4", 20),
                                            ("table5", 20), ("table6", 20), ("table7", 24),
                                            ("table8", 24), ("table9", 28)])
    def test_builtin_sizes(self, name, cells):
        s = load_suite(name)
        assert len(s.cells) == cells
        assert s.table.startswith("Table")

    def test_all_listed(self):
        assert SUITES == tuple(f"table{i}" for i in range(1, 10))

    def test_beta_over_k(self):
        s = load_suite("table4")
        for cell in s.cells:
            cfg = cell.configs[0]
            assert cfg.beta / cfg.k in (0.1, 0.25, 0.5, 0.75, 1.0)

    def test_best_of_cells(self):
        s = load_suite("table6")
        assert all(c.best_of and [x.variant for x in c.configs] == ["amgWR", "amgWR_c"] for c in s.cells)

    def test_overrides(self):
        s = load_suite("table1", {"max_cycles": 7})
        assert all(c.configs[0].max_cycles == 7 for c in s.cells)

    def test_sweep_product(self):
        s = parse_suite({"run": [{"variant": "gmgWR", "k": [40, 80], "kh": [0.625, 0.3125, 0.15625]}]})
        assert len(s.cells) == 6 and s.table == "custom"

    @pytest.mark.parametrize("doc", [
        {"run": {"k": 1}},
        {"run": [{"variant": "amgWR", "best_of": ["amgWR", "amgWR_c"]}]},
        {"run": [{"best_of": ["amgWR"]}]},
        {"run": [{"variant": "gmgWR", "colour": 1}]},
    ])
    def test_invalid(self, doc):
        with pytest.raises(ConfigurationError):
            parse_suite(doc)

    def test_missing(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_suite("table10")
        bad = tmp_path / "bad.toml"
        bad.write_text("run = [")
        with pytest.raises(ConfigurationError):
            load_suite(str(bad))


class TestRun:
    def test_empty_suite_header_only(self):
        buf = io.StringIO()
        rows = benchmark_run(Suite("Table X", "empty", ()), buf)
        assert rows == []
        assert buf.getvalue().splitlines() == ["# Table X: empty", ",".join(COLUMNS)]

    def test_row_fields(self):
        row = run_cell(Cell((SolverConfig("gmgWR", k=40),)))
        assert set(row) == set(COLUMNS)
        assert row["outcome"] == "converged" and int(row["cycles"]) <= 28
        assert row["alpha"] == "" and row["p"] == 0

    def test_best_of_row(self):
        cell = load_suite("table6").cells[0]
        row = run_cell(cell)
        assert row["variant"].startswith("best(amgWR,amgWR_c)=")
        assert row["outcome"] == "converged"

    def test_error_row(self):
        row = run_cell(Cell((SolverConfig("amgWR_c", k=40),)))
        assert row["outcome"].startswith("error:")

    def test_jobs_preserve_order(self):
        s = parse_suite({"run": [{"variant": "gmgWR", "k": [80, 40], "max_cycles": 3}]})
        rows = benchmark_run(s, jobs=2)
        assert [r["k"] for r in rows] == [80, 40]

    def test_format_table(self):
        rows = [{"variant": "gmgWR", "k": k, "kh": 0.625, "alpha": "", "beta": "", "gamma": "",
                 "p": 0, "cycles": c} for k, c in ((40, "12"), (80, "D"))]
        text = format_table(rows)
        assert "12" in text and "D" in text and "40" in text


class TestSettings:
    def test_solver_table_wins(self):
        assert solver_settings({"k": 40, "solver": {"k": 80, "variant": "amgWR"}}) == {"k": 80, "variant": "amgWR"}


class TestCli:
    def test_solve_ok(self, capsys):
        assert main(["solve", "--variant", "gmgWR", "--k", "40"]) == EXIT_OK
        assert "converged" in capsys.readouterr().out

    def test_solve_not_converged(self):
        assert main(["solve", "--variant", "gmgWR", "--k", "80", "--max-cycles", "2"]) == EXIT_FAIL

    def test_solve_diverged(self):
        assert main(["solve", "--variant", "gmgWR", "--k", "40", "--gamma", "0.25"]) == EXIT_FAIL

    def test_usage_errors(self, capsys):
        assert main(["solve", "--k", "40"]) == EXIT_USAGE
        assert main(["solve", "--variant", "nope", "--k", "40"]) == EXIT_USAGE
        assert main(["solve", "--variant", "gmgWR", "--k", "40", "--tol", "2"]) == EXIT_USAGE
        assert main(["bench"]) == EXIT_USAGE
        assert main(["bench", "--suite", "table0"]) == EXIT_USAGE
        with pytest.raises(SystemExit) as e:
            main(["solve", "--k", "abc"])
        assert e.value.code == EXIT_USAGE
        with pytest.raises(SystemExit) as e:
            main([])
        assert e.value.code == EXIT_USAGE

    def test_config_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text('[solver]\nvariant = "amgWR"\nk = 40\nmax_cycles = 2\n')
        assert main(["solve", "--config", str(cfg)]) == EXIT_FAIL
        assert main(["solve", "--config", str(cfg), "--max-cycles", "50"]) == EXIT_OK
        assert "amgWR k=40" in capsys.readouterr().out

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text("k = ")
        assert main(["solve", "--config", str(cfg)]) == EXIT_USAGE
        assert main(["solve", "--config", str(tmp_path / "missing.toml")]) == EXIT_USAGE
        cfg.write_text("[solver]\nspeed = 3\n")
        assert main(["solve", "--config", str(cfg), "--variant", "gmgWR", "--k", "40"]) == EXIT_USAGE

    def test_solve_csv(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["solve", "--variant", "gmgWR", "--k", "40", "--out", str(out)]) == EXIT_OK
        head, rows = read_csv(out)
        assert head.startswith("# solve")
        assert list(rows[0]) == list(COLUMNS) and rows[0]["outcome"] == "converged"

    def test_history(self, capsys):
        main(["solve", "--variant", "gmgWR", "--k", "40", "--history"])
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].split()[0] == "0"

    def test_bench_file_suite(self, tmp_path):
        suite = tmp_path / "s.toml"
        suite.write_text('table = "Mine"\ntitle = "two runs"\n[[run]]\nvariant = "gmgWR"\nk = [40, 80]\n')
        out = tmp_path / "o.csv"
        assert main(["bench", "--suite", str(suite), "--out", str(out)]) == EXIT_OK
        head, rows = read_csv(out)
        assert head == "# Mine: two runs"
        assert [float(r["k"]) for r in rows] == [40, 80]

    def test_bench_config_overrides(self, tmp_path):
        suite = tmp_path / "s.toml"
        suite.write_text('[[run]]\nvariant = "gmgWR"\nk = 40\n')
        cfg = tmp_path / "c.toml"
        out = tmp_path / "o.csv"
        cfg.write_text(f'[bench]\nsuite = "{suite}"\nout = "{out}"\n[solver]\nmax_cycles = 2\n')
        assert main(["bench", "--config", str(cfg)]) == EXIT_OK
        _, rows = read_csv(out)
        assert rows[0]["outcome"] == "max_cycles_exceeded"

    def test_check(self, capsys):
        assert main(["check", "--instances", "3"]) == EXIT_OK
        assert "checks passed" in capsys.readouterr().out
        assert main(["check", "--instances", "0"]) == EXIT_USAGE
