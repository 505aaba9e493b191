"""Command line interface: ``waveray solve | bench | check``.

Exit codes: 0 converged (or benchmark and checks complete), 2 not converged
(diverged or out of cycles) or a failed check, 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .bench import COLUMNS, SUITES, _row, benchmark_run, format_table, load_suite
from .errors import ConfigurationError, WaveRayError
from .solver import SolverConfig, solve

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("waveray")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

# CLI flag -> SolverConfig field
_SOLVE_FLAGS = {
    "variant": "variant", "k": "k", "kh": "kh", "gamma": "gamma", "alpha": "alpha",
    "beta": "beta", "seed": "seed", "tol": "tol", "max_cycles": "max_cycles",
    "presmooth": "presmooth",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e.strerror}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"invalid config {path}: {e}") from None


def solver_settings(doc: dict) -> dict:
    """SolverConfig keys of a config document: top-level scalars and the ``[solver]`` table."""
    out = {k: v for k, v in doc.items() if not isinstance(v, dict)}
    out.update(doc.get("solver", {}))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="waveray", description="Wave-ray multigrid for the 1D Helmholtz equation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one problem and report the cycle count")
    s.add_argument("--config", help="TOML file with solver settings; flags override it")
    s.add_argument("--variant")
    s.add_argument("--k", type=float)
    s.add_argument("--kh", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-cycles", dest="max_cycles", type=int)
    s.add_argument("--presmooth", type=int)
    s.add_argument("--out", help="CSV file for the result row")
    s.add_argument("--history", action="store_true", help="print the residual history")

    b = sub.add_parser("bench", help="run a table suite and write CSV")
    b.add_argument("--suite", help=f"one of {', '.join(SUITES)} or a TOML file")
    b.add_argument("--config", help="TOML file; its [solver] table overrides every run")
    b.add_argument("--out", help="CSV file (default: stdout)")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--table", action="store_true", help="also print a k-by-parameter table to stderr")

    c = sub.add_parser("check", help="run the invariant checks")
    c.add_argument("--instances", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    return p


def cmd_solve(args) -> int:
    doc = _load_config(args.config)
    settings = solver_settings(doc)
    for flag, name in _SOLVE_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            settings[name] = v
    if "variant" not in settings:
        raise ConfigurationError("--variant is required (or 'variant' in the config file)")
    if "k" not in settings:
        raise ConfigurationError("--k is required (or 'k' in the config file)")
    cfg = SolverConfig.from_dict(settings)
    _, report = solve(cfg)
    row = _row(cfg, report)
    print(f"{cfg.variant} k={cfg.k:g} kh={cfg.kh:g}: {report.outcome} after {report.cycles_used} cycles, "
          f"reduction {report.final_reduction:.3e}, {report.wall_time + report.setup_time:.3f} s")
    if args.history:
        for i, r in enumerate(report.residual_history):
            print(f"{i:4d} {r:.6e}")
    if args.out:
        with open(args.out, "w", newline="") as f:
            f.write(f"# solve: {cfg.variant}\n")
            w = csv.DictWriter(f, fieldnames=COLUMNS, lineterminator="\n")
            w.writeheader()
            w.writerow(row)
    return EXIT_OK if report.converged else EXIT_FAIL


def cmd_bench(args) -> int:
    doc = _load_config(args.config)
    suite_name = args.suite or doc.get("bench", {}).get("suite")
    if not suite_name:
        raise ConfigurationError("--suite is required")
    out = args.out or doc.get("bench", {}).get("out")
    jobs = args.jobs if args.jobs != 1 else int(doc.get("bench", {}).get("jobs", 1))
    if jobs < 1:
        raise ConfigurationError("--jobs must be >= 1")
    suite = load_suite(suite_name, solver_settings({"solver": doc.get("solver", {})}) or None)
    log.info("running %s (%d cells)", suite.table, len(suite.cells))
    rows = benchmark_run(suite, Path(out) if out else sys.stdout, jobs)
    if args.table:
        sys.stderr.write(f"{suite.table}: {suite.title}\n{format_table(rows)}")
    return EXIT_OK


def cmd_check(args) -> int:
    from .checks import run_checks

    if args.instances < 1:
        raise ConfigurationError("--instances must be >= 1")
    results = run_checks(args.instances, args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handlers = {"solve": cmd_solve, "bench": cmd_bench, "check": cmd_check}
    try:
        return handlers[args.command](args)
    except ConfigurationError as e:
        print(f"waveray: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except WaveRayError as e:
        print(f"waveray: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
