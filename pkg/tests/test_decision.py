import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import replay_wait
from evcharge.decision import (
    expected_waiting_time,
    make_reservation,
    select_cs_min_expected_wait,
    select_cs_min_queue,
)
from evcharge.domain import EvState, InfoMap, Publication, kw_to_w, kwh_to_j
from evcharge.roadnet import Location, RoadGraph

BUSY_PUB = Publication(3, 240.0, 3060.0, (3300.0, 3950.0, 4210.0), ((3500.0, 730.0), (4700.0, 700.0)))


def test_busy_station_late_decider():
    assert expected_waiting_time(BUSY_PUB, 5000.0) == 0.0


def test_busy_station_early_decider():
    assert expected_waiting_time(BUSY_PUB, 3200.0) == 100.0


def test_no_reservations_empty_station():
    pub = Publication(0, 10.0, 0.0, (10.0, 10.0, 10.0))
    assert expected_waiting_time(pub, 10.0) == 0.0
    assert expected_waiting_time(pub, 50.0) == 0.0


def test_reservation_at_the_same_instant_is_ignored():
    pub = Publication(0, 0.0, 0.0, (0.0,), ((100.0, 500.0),))
    assert expected_waiting_time(pub, 100.0) == 0.0
    assert expected_waiting_time(pub, 100.5) == 499.5


@st.composite
def instances(draw):
    slots = draw(st.lists(st.integers(0, 1000), min_size=1, max_size=3))
    res = draw(st.lists(st.tuples(st.integers(0, 2000), st.integers(1, 800)), max_size=6))
    return [float(s) for s in slots], [(float(a), float(c)) for a, c in res], float(draw(st.integers(0, 3000)))


@settings(max_examples=300, deadline=None)
@given(instances())
def test_matches_queue_replay(case):
    slots, res, t_dec = case
    pub = Publication(0, 0.0, 0.0, tuple(slots), tuple(res))
    assert expected_waiting_time(pub, t_dec) == replay_wait(slots, res, t_dec)


@settings(max_examples=200, deadline=None)
@given(instances(), st.integers(0, 500), st.data())
def test_monotone_in_durations_and_slot_times(case, bump, data):
    slots, res, t_dec = case
    base = expected_waiting_time(Publication(0, 0.0, 0.0, tuple(slots), tuple(res)), t_dec)
    assert base >= 0
    i = data.draw(st.integers(0, len(slots) - 1))
    slots2 = list(slots)
    slots2[i] += bump
    assert expected_waiting_time(Publication(0, 0.0, 0.0, tuple(slots2), tuple(res)), t_dec) >= base
    if res:
        j = data.draw(st.integers(0, len(res) - 1))
        res2 = list(res)
        res2[j] = (res2[j][0], res2[j][1] + bump)
        assert expected_waiting_time(Publication(0, 0.0, 0.0, tuple(slots), tuple(res2)), t_dec) >= base


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1000), min_size=1, max_size=4), st.integers(0, 2000))
def test_closed_form_without_reservations(slots, t_dec):
    pub = Publication(0, 0.0, 0.0, tuple(map(float, slots)))
    assert expected_waiting_time(pub, t_dec) == max(0.0, min(slots) - t_dec)


@settings(max_examples=200, deadline=None)
@given(instances(), st.integers(-1000, 10_000))
def test_shift_invariance(case, shift):
    slots, res, t_dec = case
    pub = Publication(0, 0.0, 0.0, tuple(slots), tuple(res))
    moved = Publication(0, float(shift) if shift < 0 else 0.0, 0.0, tuple(s + shift for s in slots),
                        tuple((a + shift, c) for a, c in res))
    assert expected_waiting_time(moved, t_dec + shift) == expected_waiting_time(pub, t_dec)


# ---- selection ------------------------------------------------------------

def star_graph():
    """EV hub at node 0; stations at nodes 1 (3000 m) and 2 (6000 m)."""
    coords = {0: (0, 0), 1: (3000, 0), 2: (-6000, 0)}
    return RoadGraph.from_edges(coords, [(0, 1), (0, 2)], cs_nodes=[1, 2])


def ev_at(node=0, speed=10.0, cur_kwh=12.0):
    return EvState(0, Location.at(node), speed, kwh_to_j(30), kwh_to_j(cur_kwh), 670.8)


def info_with(*queues, now=0.0):
    info = InfoMap()
    for cs_id, q in enumerate(queues):
        info.store(Publication(cs_id, now, q, (now + q,) * 3), now)
    return info


def test_empty_info_takes_nearest():
    choice = select_cs_min_queue(InfoMap(), ev_at(), star_graph())
    assert choice.cs_id == 0 and choice.fallback


def test_min_queue_argmin():
    choice = select_cs_min_queue(info_with(3060.0, 0.0), ev_at(), star_graph())
    assert choice.cs_id == 1 and choice.estimate == 0.0 and not choice.fallback


def test_min_queue_tie_goes_to_shorter_trip():
    g = star_graph()
    choice = select_cs_min_queue(info_with(50.0, 50.0), ev_at(), g)
    assert choice.cs_id == 0 and choice.travel_time == 300.0


def test_unreachable_station_is_skipped():
    ev = ev_at(cur_kwh=1.0)  # 1 kWh covers ~5.4 km: CS0 only
    assert select_cs_min_queue(info_with(900.0, 0.0), ev, star_graph()).cs_id == 0


def test_nothing_reachable_flags_and_heads_to_nearest():
    ev = ev_at(cur_kwh=0.1)
    choice = select_cs_min_queue(info_with(0.0, 0.0), ev, star_graph())
    assert choice.unreachable and choice.cs_id == 0


def test_expected_wait_single_station():
    g = RoadGraph.from_edges({0: (0, 0), 1: (3000, 0)}, [(0, 1)], cs_nodes=[1])
    info = InfoMap()
    info.store(Publication(0, 0.0, 9999.0, (9999.0,)), 0.0)
    assert select_cs_min_expected_wait(info, ev_at(), g, 0.0).cs_id == 0


def test_expected_wait_picks_smaller_wait():
    g = star_graph()
    info = InfoMap()
    # CS0 reached at t=300 waits 100 s; CS1 reached at t=600 waits nothing
    info.store(Publication(0, 0.0, 400.0, (400.0, 400.0, 400.0)), 0.0)
    info.store(Publication(1, 0.0, 0.0, (0.0, 0.0, 0.0)), 0.0)
    choice = select_cs_min_expected_wait(info, ev_at(), g, 0.0)
    assert choice.cs_id == 1 and choice.estimate == 0.0


def test_expected_wait_sees_earlier_reservation():
    # EV_dec needs 30 min to CS, another EV reserved and arrives after 20 min;
    # the single free slot is taken before EV_dec gets there.
    g = RoadGraph.from_edges({0: (0, 0), 1: (18000, 0), 2: (-18000, 0)}, [(0, 1), (0, 2)], cs_nodes=[1, 2])
    info = InfoMap()
    info.store(Publication(0, 0.0, 0.0, (0.0,), ((1200.0, 1800.0),)), 0.0)
    info.store(Publication(1, 0.0, 0.0, (0.0,), ()), 0.0)
    ev = ev_at(cur_kwh=29.0)
    assert expected_waiting_time(info.get(0), 1800.0) == 1200.0
    assert select_cs_min_expected_wait(info, ev, g, 0.0).cs_id == 1
    assert select_cs_min_queue(info, ev, g).cs_id == 0  # queue-only view misses it


def test_expected_wait_falls_back_without_publications():
    assert select_cs_min_expected_wait(InfoMap(), ev_at(), star_graph(), 0.0).fallback


def test_selection_shift_invariance(rng):
    g = star_graph()
    for _ in range(200):
        slots = [tuple(float(x) for x in rng.integers(0, 2000, 3)) for _ in range(2)]
        res = [tuple((float(a), float(c)) for a, c in rng.integers(1, 1500, (int(rng.integers(0, 4)), 2)))
               for _ in range(2)]
        shift = float(rng.integers(0, 5000))
        choices = []
        for s in (0.0, shift):
            info = InfoMap()
            for cs_id in range(2):
                info.store(Publication(cs_id, s, 0.0, tuple(t + s for t in slots[cs_id]),
                                       tuple((a + s, c) for a, c in res[cs_id])), s)
            choices.append(select_cs_min_expected_wait(info, ev_at(), g, s).cs_id)
        assert choices[0] == choices[1]


# ---- reservations -----------------------------------------------------------

def test_reservation_arrival_time():
    entry = make_reservation(ev_at(), 600.0, kw_to_w(62), now=1000.0)
    assert entry.arrival_time == 1600.0


def test_reservation_charge_time_worked_example():
    ev = ev_at(speed=11.11)
    entry = make_reservation(ev, 600.0, kw_to_w(62), now=1000.0)
    en_route = 11.11 * 600 * 670.8
    assert en_route / 3.6e6 == pytest.approx(1.242, abs=1e-3)
    assert entry.charge_duration == pytest.approx(1117.0, abs=1.0)


def test_reservation_zero_travel():
    ev = ev_at()
    entry = make_reservation(ev, 0.0, kw_to_w(62), now=5.0)
    assert entry.charge_duration == (ev.battery_max - ev.battery_cur) / kw_to_w(62)


def test_no_reservation_when_full_and_parked():
    assert make_reservation(ev_at(cur_kwh=30.0), 0.0, kw_to_w(62), now=0.0) is None


def test_reservation_tokens_are_anonymous():
    entry = make_reservation(ev_at(), 10.0, 1000.0, now=0.0)
    assert set(entry.__dataclass_fields__) == {"token", "arrival_time", "charge_duration"}
