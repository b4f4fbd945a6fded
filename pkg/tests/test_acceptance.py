"""Acceptance suite: exact oracle checks plus statistical trends on the default scenario.

Trend claims are one-sided Welch t-tests on run-level values (10 runs per
cell, alpha = 0.05). A strict claim ("higher", "exceeds", "decreases")
needs a significant difference in the stated direction. A weak claim
("<=", "does not increase") passes unless the opposite direction is
significant.
"""
import functools
import math

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_RESULTS, random_station, replay_free_times, replay_wait, station_with
from evcharge.analysis import StraightRoadParams, monte_carlo_access, p_pull_bound, p_push_bound
from evcharge.decision import expected_waiting_time, make_reservation
from evcharge.domain import EvState, Publication, kw_to_w, kwh_to_j
from evcharge.engine import ScenarioConfig, run_cell
from evcharge.engine.experiment import results_to_csv
from evcharge.roadnet import Location

ALPHA = 0.05

CELLS = {
    "ideal100": dict(mode="ideal"),
    "pull100": dict(mode="pull"),
    "push100": dict(mode="push"),
    "pull900": dict(mode="pull", publication_interval=900.0),
    "push900": dict(mode="push", publication_interval=900.0),
    "pull26": dict(mode="pull", power_kw=26.0),
    "apull100": dict(mode="apull"),
    "pull_rsu3": dict(mode="pull", rsu_count=3),
}


@functools.lru_cache(maxsize=None)
def cell(name):
    result = run_cell(ScenarioConfig(**CELLS[name]), params=CELLS[name])
    assert result.error is None, result.error
    assert len(result.reports) == 10
    return result


def values(name, metric):
    return np.array(cell(name).values(metric), dtype=float)


def p_greater(a, b):
    """One-sided Welch p-value for mean(a) > mean(b)."""
    if np.ptp(a) == 0 and np.ptp(b) == 0:
        return 0.0 if a[0] > b[0] else 1.0
    return float(stats.ttest_ind(a, b, equal_var=False, alternative="greater").pvalue)


def higher(a, b):
    p = p_greater(a, b)
    return p < ALPHA, f"{a.mean():.1f} vs {b.mean():.1f}, p={p:.2g}"


def not_higher(a, b):
    p = p_greater(a, b)
    return p >= ALPHA, f"{a.mean():.1f} vs {b.mean():.1f}, p(reverse)={p:.2g}"


def record(number, desc, checks):
    ok = all(c[0] for c in checks)
    ACCEPTANCE_RESULTS[number] = (desc, ok, "; ".join(c[1] for c in checks))
    assert ok, ACCEPTANCE_RESULTS[number][2]


# ---- exact / oracle ---------------------------------------------------------

def test_c01_station_estimator_examples():
    mrct = [
        station_with([100, 200]).min_remaining_charge_time() == 0,
        station_with([100, 200, 300]).min_remaining_charge_time() == 100,
        station_with([500], slots=1).min_remaining_charge_time() == 500,
    ]
    iqt = [
        station_with([]).instantaneous_queuing_time() == 0,
        station_with([100, 200, 300], [150]).instantaneous_queuing_time() == 250,
        station_with([100, 200, 300]).instantaneous_queuing_time() == 100,
    ]
    record(1, "minimum-remaining and instantaneous-queuing examples",
           [(all(mrct), f"min-remaining {sum(mrct)}/3"), (all(iqt), f"queuing {sum(iqt)}/3")])


def test_c02_slot_times_match_event_replay():
    rng = np.random.default_rng(20240601)
    mismatches = 0
    for _ in range(1000):
        cs = random_station(rng, max_slots=4, max_evs=8)
        mismatches += cs.available_charging_times() != replay_free_times(cs)
    record(2, "per-slot available times vs event replay", [(mismatches == 0, f"{mismatches}/1000 mismatches")])


def test_c03_expected_wait_matches_replay():
    rng = np.random.default_rng(777)
    mismatches = 0
    for _ in range(1000):
        slots = [float(x) for x in rng.integers(0, 1000, int(rng.integers(1, 4)))]
        res = [(float(a), float(c)) for a, c in
               zip(rng.integers(0, 2000, 6), rng.integers(1, 800, 6))][: int(rng.integers(0, 7))]
        t_dec = float(rng.integers(0, 3000))
        pub = Publication(0, 0.0, 0.0, tuple(slots), tuple(res))
        mismatches += expected_waiting_time(pub, t_dec) != replay_wait(slots, res, t_dec)
    busy = Publication(3, 240.0, 3060.0, (3300.0, 3950.0, 4210.0), ((3500.0, 730.0), (4700.0, 700.0)))
    traces = (expected_waiting_time(busy, 5000.0), expected_waiting_time(busy, 3200.0))
    record(3, "expected waiting time vs queue replay",
           [(mismatches == 0, f"{mismatches}/1000 mismatches"),
            (traces == (0.0, 100.0), f"busy-station traces {traces}")])


def test_c04_bound_arithmetic_and_ordering():
    worked = StraightRoadParams(R=150, L=150, T=100, V=20, S=600, F=300, N=3)
    push, pull = p_push_bound(worked), p_pull_bound(worked)
    rng = np.random.default_rng(4)
    violations = draws = 0
    while draws < 10_000:
        n = int(rng.integers(1, 8))
        r = float(rng.uniform(10, 500))
        s = float(rng.uniform(2 * r, 5 * r))
        f = float(rng.uniform(1, 2000))
        vt = float(rng.uniform((n - 1) * s + f + r, 3 * ((n - 1) * s + f + r)))
        if 4 * r * r / (vt * s) > 1:
            continue
        p = StraightRoadParams(r, r, vt / 20.0, 20.0, s, f, n)
        violations += p_pull_bound(p) < p_push_bound(p) - 1e-12
        draws += 1
    record(4, "bound values and pull >= push ordering", [
        (abs(push - 0.3369) < 1e-4, f"push {push:.5f}"),
        (abs(pull - 0.9356) < 1e-4, f"pull {pull:.5f}"),
        (violations == 0, f"{violations}/10000 violations"),
    ])


def test_c05_reservation_example():
    ev = EvState(0, Location.at(0), 11.11, kwh_to_j(30), kwh_to_j(12), 670.8)
    entry = make_reservation(ev, 600.0, kw_to_w(62), now=1000.0)
    record(5, "reservation arrival and charge duration", [
        (entry.arrival_time == 1600.0, f"arrival {entry.arrival_time}"),
        (abs(entry.charge_duration - 1117.0) <= 1.0, f"charge {entry.charge_duration:.2f} s"),
    ])


@pytest.mark.slow
def test_c06_determinism():
    first = results_to_csv([cell("pull100")])
    again = results_to_csv([run_cell(ScenarioConfig(), params=CELLS["pull100"])])
    record(6, "byte-identical reports for equal seeds",
           [(first == again, f"{len(first.encode())} bytes, identical={first == again}")])


@pytest.mark.slow
def test_c07_energy_conservation():
    worst = 0.0
    for name in CELLS:
        for report in cell(name).reports:
            used, received = report.total_utilization_kwh, report.energy_received_kwh
            worst = max(worst, abs(used - received) / max(used, 1e-12))
    record(7, "station energy equals vehicle-received energy", [(worst <= 1e-6, f"max rel err {worst:.2e}")])


# ---- statistical trends -----------------------------------------------------

@pytest.mark.slow
def test_c08_waiting_order_at_short_interval():
    wait = "average_waiting_time"
    record(8, "waiting Ideal <= Pull <= Push at T=100 s", [
        not_higher(values("ideal100", wait), values("pull100", wait)),
        not_higher(values("pull100", wait), values("push100", wait)),
    ])


@pytest.mark.slow
def test_c09_longer_interval_hurts_pull():
    wait, fresh = "average_waiting_time", "average_information_freshness"
    ideal = values("ideal100", fresh)
    record(9, "Pull at T=900 s waits longer and is staler; Ideal freshness 0", [
        higher(values("pull900", wait), values("pull100", wait)),
        higher(values("pull900", fresh), values("pull100", fresh)),
        (bool(np.all(ideal == 0.0)), f"ideal freshness max {ideal.max()}"),
    ])


@pytest.mark.slow
def test_c10_obtain_counts():
    obtain = "obtain_info_count"
    record(10, "obtain count Pull > Push, and falls as T grows", [
        higher(values("pull100", obtain), values("push100", obtain)),
        higher(values("pull900", obtain), values("push900", obtain)),
        higher(values("pull100", obtain), values("pull900", obtain)),
        higher(values("push100", obtain), values("push900", obtain)),
    ])


@pytest.mark.slow
def test_c11_lower_power():
    record(11, "26 kW waits longer and charges fewer than 62 kW", [
        higher(values("pull26", "average_waiting_time"), values("pull100", "average_waiting_time")),
        higher(values("pull100", "charged_ev_count"), values("pull26", "charged_ev_count")),
    ])


@pytest.mark.slow
def test_c12_advanced_pull():
    record(12, "Advanced Pull waits <= Pull and charges >= Pull", [
        not_higher(values("apull100", "average_waiting_time"), values("pull100", "average_waiting_time")),
        not_higher(values("pull100", "charged_ev_count"), values("apull100", "charged_ev_count")),
    ])


@pytest.mark.slow
def test_c13_fewer_rsus():
    record(13, "7 -> 3 RSUs: waiting not lower, obtain count not higher", [
        not_higher(values("pull100", "average_waiting_time"), values("pull_rsu3", "average_waiting_time")),
        not_higher(values("pull_rsu3", "obtain_info_count"), values("pull100", "obtain_info_count")),
    ])


def test_c14_monte_carlo_access():
    trials = 100_000
    base = StraightRoadParams(R=150, L=150, T=100, V=20, S=600, F=300, N=3)
    doubled = StraightRoadParams(R=150, L=150, T=200, V=20, S=600, F=300, N=3)
    push, pull = monte_carlo_access(base, "push", trials, 11), monte_carlo_access(base, "pull", trials, 12)
    push2, pull2 = monte_carlo_access(doubled, "push", trials, 13), monte_carlo_access(doubled, "pull", trials, 14)

    def below(a, b, label):
        return a.ci[1] < b.ci[0], f"{label} {a.p:.4f}±{a.half_width:.4f} < {b.p:.4f}±{b.half_width:.4f}"

    record(14, "Monte Carlo pull > push, both fall as T doubles", [
        below(push, pull, "push<pull"),
        below(push2, push, "push(2T)<push(T)"),
        below(pull2, pull, "pull(2T)<pull(T)"),
        (math.isfinite(push.p) and push.trials == trials, f"{trials} trials"),
    ])
