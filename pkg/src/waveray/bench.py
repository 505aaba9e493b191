"""Parameter sweeps over solver configurations, written as CSV.

A suite is a TOML document::

    table = "Table 1"
    title = "gmgWR cycles, constant k"

    [[run]]
    variant = "gmgWR"
    kh = [0.625, 0.3125]
    k = [40, 80]

Every list-valued key of a ``[[run]]`` block is swept (cartesian product, in
key order); scalars are fixed. ``beta_over_k`` sets ``beta = ratio * k``.
``best_of = [variant, ...]`` replaces ``variant`` and keeps the fastest
converged run per cell.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigurationError, WaveRayError
from .solver import SolverConfig, solve, solve_best_of

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COLUMNS = ("variant", "k", "kh", "alpha", "beta", "gamma", "p", "cycles", "outcome",
           "final_reduction", "seconds")
SUITES = tuple(f"table{i}" for i in range(1, 10))


@dataclass(frozen=True)
class Cell:
    """One parameter combination: a single config or a best-of group."""

    configs: tuple[SolverConfig, ...]
    best_of: bool = False


@dataclass(frozen=True)
class Suite:
    table: str
    title: str
    cells: tuple[Cell, ...]


def _expand(block: dict, defaults: dict) -> list[Cell]:
    block = {**defaults, **block}
    variants = block.pop("best_of", None)
    if variants is not None and "variant" in block:
        raise ConfigurationError("a run block takes either 'variant' or 'best_of'")
    if variants is not None and (not isinstance(variants, list) or len(variants) < 2):
        raise ConfigurationError("'best_of' needs a list of at least two variants")
    keys = list(block)
    axes = [v if isinstance(v, list) else [v] for v in block.values()]
    cells = []
    for combo in itertools.product(*axes):
        params = dict(zip(keys, combo))
        ratio = params.pop("beta_over_k", None)
        if ratio is not None:
            params["beta"] = ratio * params.get("k", SolverConfig.k)
        if variants is None:
            cells.append(Cell((SolverConfig.from_dict(params),)))
        else:
            cfgs = tuple(SolverConfig.from_dict({**params, "variant": v}) for v in variants)
            cells.append(Cell(cfgs, best_of=True))
    return cells


def parse_suite(doc: dict, overrides: dict | None = None) -> Suite:
    """Build a suite from a parsed TOML document; ``overrides`` apply to every run."""
    runs = doc.get("run", [])
    if not isinstance(runs, list):
        raise ConfigurationError("'run' must be an array of tables")
    cells = []
    for block in runs:
        cells.extend(_expand(dict(block), {}))
    if overrides:
        cells = [Cell(tuple(SolverConfig.from_dict({**c.to_dict(), **overrides}) for c in cell.configs),
                      cell.best_of) for cell in cells]
    return Suite(str(doc.get("table", "custom")), str(doc.get("title", "")), tuple(cells))


def load_suite(name: str, overrides: dict | None = None) -> Suite:
    """Load a built-in suite (``table1`` .. ``table9``) or a TOML file path."""
    if name in SUITES:
        text = resources.files("waveray").joinpath("suites", f"{name}.toml").read_text()
    else:
        path = Path(name)
        if not path.is_file():
            raise ConfigurationError(f"no built-in suite or file named {name!r}")
        text = path.read_text()
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"invalid suite file: {e}") from None
    return parse_suite(doc, overrides)


def _row(cfg: SolverConfig, report, variant: str | None = None) -> dict:
    return {
        "variant": variant or cfg.variant,
        "k": cfg.k,
        "kh": cfg.kh,
        "alpha": "" if cfg.alpha is None else cfg.alpha,
        "beta": "" if cfg.beta is None else cfg.beta,
        "gamma": "" if cfg.gamma is None else cfg.gamma,
        "p": cfg.presmooth_steps,
        "cycles": report.label if report else "",
        "outcome": report.outcome if report else "error",
        "final_reduction": f"{report.final_reduction:.3e}" if report else "",
        "seconds": f"{report.wall_time + report.setup_time:.3f}" if report else "",
    }


def run_cell(cell: Cell) -> dict:
    """Solve one cell; failures become an ``error`` row instead of an exception."""
    cfg = cell.configs[0]
    try:
        if cell.best_of:
            _, report, i = solve_best_of(list(cell.configs))
            names = ",".join(c.variant for c in cell.configs)
            return _row(cell.configs[i], report, f"best({names})={cell.configs[i].variant}")
        _, report = solve(cfg)
        return _row(cfg, report)
    except (WaveRayError, ArithmeticError) as e:
        row = _row(cfg, None)
        row["outcome"] = f"error: {e}"
        return row


def benchmark_run(suite: Suite, out=None, jobs: int = 1) -> list[dict]:
    """Run every cell of ``suite`` and write the CSV to ``out`` (a path or text stream).

    Rows keep the suite order regardless of ``jobs``.
    """
    if jobs > 1 and len(suite.cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, suite.cells))
    else:
        rows = [run_cell(c) for c in suite.cells]
    if out is not None:
        write_csv(rows, suite, out)
    return rows


def write_csv(rows: list[dict], suite: Suite, out) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as f:
            write_csv(rows, suite, f)
        return
    out.write(f"# {suite.table}: {suite.title}\n")
    w = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def format_table(rows: list[dict]) -> str:
    """Table layout: one line per parameter set, cycle counts across ``k``.

    ``beta`` is shown absolute or relative to ``k``, whichever gives fewer lines.
    """
    ks = sorted({float(r["k"]) for r in rows})

    def grouped(relative: bool) -> dict[tuple, dict[float, str]]:
        groups: dict[tuple, dict[float, str]] = {}
        for r in rows:
            key = []
            for c in ("variant", "kh", "alpha", "beta", "gamma", "p"):
                v = r[c].split("=")[0] if c == "variant" else r[c]
                if v == "":
                    continue
                if c == "beta" and relative:
                    key.append(("beta/k", round(float(v) / float(r["k"]), 6)))
                else:
                    key.append((c, v))
            groups.setdefault(tuple(key), {})[float(r["k"])] = r["cycles"] or "err"
        return groups

    groups = min(grouped(False), grouped(True), key=len)
    buf = io.StringIO()
    width = max((len(_label(k)) for k in groups), default=10)
    buf.write(" " * width + " | " + " ".join(f"{_num(k):>6}" for k in ks) + "\n")
    for key, cells in groups.items():
        buf.write(f"{_label(key):<{width}} | " + " ".join(f"{cells.get(k, ''):>6}" for k in ks) + "\n")
    return buf.getvalue()


def _label(key: tuple) -> str:
    return " ".join(f"{c}={v}" for c, v in key)


def _num(x: float) -> str:
    return str(int(x)) if math.isclose(x, round(x)) else f"{x:g}"
