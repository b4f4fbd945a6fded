"""Per-run metric records and their aggregation over runs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats


@dataclass
class MetricsReport:
    run_index: int
    seed_entropy: int
    average_waiting_time: Optional[float]  # arrival to charge finish, s
    average_queue_wait: Optional[float]  # arrival to charge start, s
    obtain_info_count: int
    average_information_freshness: Optional[float]  # s; None when no decision was made
    utilization_kwh: list[float]
    charged_ev_count: int
    stranded_count: int
    decisions: int
    fallback_decisions: int
    reservations_forwarded: int
    energy_received_kwh: float
    event_counts: dict = field(default_factory=dict)

    @property
    def total_utilization_kwh(self) -> float:
        return float(sum(self.utilization_kwh))

    def row(self) -> dict:
        out = {
            "run": self.run_index,
            "average_waiting_time": self.average_waiting_time,
            "average_queue_wait": self.average_queue_wait,
            "obtain_info_count": self.obtain_info_count,
            "average_information_freshness": self.average_information_freshness,
            "charged_ev_count": self.charged_ev_count,
            "stranded_count": self.stranded_count,
            "decisions": self.decisions,
            "fallback_decisions": self.fallback_decisions,
            "reservations_forwarded": self.reservations_forwarded,
            "total_utilization_kwh": self.total_utilization_kwh,
            "energy_received_kwh": self.energy_received_kwh,
        }
        for i, value in enumerate(self.utilization_kwh):
            out[f"cs{i}_utilization_kwh"] = value
        return out


METRIC_COLUMNS = [
    "average_waiting_time", "average_queue_wait", "obtain_info_count", "average_information_freshness",
    "charged_ev_count", "stranded_count", "decisions", "fallback_decisions", "reservations_forwarded",
    "total_utilization_kwh",
]


def mean_ci(values: Sequence[Optional[float]], level: float = 0.95) -> tuple[Optional[float], Optional[float]]:
    """Mean and Student-t half width over the defined values (None entries skipped)."""
    data = np.array([v for v in values if v is not None], dtype=float)
    if data.size == 0:
        return None, None
    mean = float(data.mean())
    if data.size < 2:
        return mean, None
    sem = float(data.std(ddof=1)) / math.sqrt(data.size)
    return mean, float(stats.t.ppf(0.5 + level / 2, data.size - 1) * sem)


def aggregate(reports: Sequence[MetricsReport]) -> dict:
    rows = [r.row() for r in reports]
    keys = [k for k in rows[0] if k != "run"] if rows else []
    out = {}
    for key in keys:
        mean, half = mean_ci([row.get(key) for row in rows])
        out[key] = mean
        out[f"{key}_ci95"] = half
    return out
