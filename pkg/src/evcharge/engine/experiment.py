"""Multi-run cells, parameter grids and their tidy CSV output.

Grid files use the scenario keys; alternatives are separated by ``|``::

    mode = ideal | pull | push
    publication_interval = 100 | 900
    runs = 10

Every combination becomes one cell. The CSV has one ``run`` row per
(cell, run) followed by one ``aggregate`` row per cell holding run means,
with ``<metric>_ci95`` columns giving Student-t half widths.
"""
from __future__ import annotations

import csv
import io
import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .config import ScenarioConfig, parse_value, read_pairs
from .metrics import MetricsReport, aggregate
from .simulation import build_graph, run

log = logging.getLogger(__name__)


@dataclass
class CellResult:
    params: dict
    reports: list[MetricsReport] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def summary(self) -> dict:
        return aggregate(self.reports) if self.reports else {}

    def values(self, metric: str) -> list:
        return [r.row()[metric] for r in self.reports]


def run_cell(config: ScenarioConfig, runs: Optional[int] = None, params: Optional[dict] = None) -> CellResult:
    result = CellResult(dict(params or {}))
    try:
        graph = build_graph(config)
        for index in range(config.runs if runs is None else runs):
            result.reports.append(run(config, index, graph))
    except Exception as exc:  # a failing cell must not sink the whole experiment
        log.warning("cell %s failed: %s", params, exc)
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def load_grid(path) -> list[dict]:
    axes = []
    for key, value in read_pairs(path):
        axes.append([(key, parse_value(key, alt)) for alt in value.split("|")])
    return [dict(combo) for combo in itertools.product(*axes)] if axes else [{}]


def run_grid(cells: Sequence[dict], base: Optional[ScenarioConfig] = None) -> list[CellResult]:
    base = base or ScenarioConfig()
    results = []
    for params in cells:
        try:
            config = base.replace(**params)
        except Exception as exc:
            results.append(CellResult(dict(params), error=f"{type(exc).__name__}: {exc}"))
            continue
        results.append(run_cell(config, params=params))
    return results


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(map(str, value))
    return str(value)


def results_to_csv(results: Sequence[CellResult]) -> str:
    param_keys: list[str] = []
    for res in results:
        param_keys += [k for k in res.params if k not in param_keys]
    rows = []
    for cell, res in enumerate(results):
        head = {"cell": cell, **res.params}
        for report in res.reports:
            rows.append({**head, "row_type": "run", **report.row()})
        if res.reports:
            rows.append({**head, "row_type": "aggregate", "run": "", **res.summary})
        if res.error:
            rows.append({**head, "row_type": "error", "error": res.error})
    columns = ["cell", *param_keys, "row_type", "run"]
    for row in rows:
        columns += [k for k in row if k not in columns and not k.endswith("_ci95") and k != "error"]
    for row in rows:
        columns += [k for k in row if k not in columns and k.endswith("_ci95")]
    columns.append("error")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _fmt(row.get(c)) for c in columns})
    return buf.getvalue()
