# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # What a charging station tells the road
#
# A station has a few slots and a FCFS waiting line. It summarizes itself
# with three numbers: how long a newcomer would queue, when each slot
# frees up, and which anonymous reservations are inbound.

# %%
from evcharge.domain import ReservationEntry, kw_to_w, kwh_to_j
from evcharge.station import StationState

cs = StationState(cs_id=0, node=0, slots=3, power=kw_to_w(62))
for ev_id, kwh in enumerate([20, 26, 30, 9]):
    cs.arrive(ev_id, kwh_to_j(kwh), now=0.0)
cs.advance_to(240.0)

print("charging :", [round(e.remaining / cs.power) if e else None for e in cs.charging])
print("waiting  :", [round(e.remaining / cs.power) for e in cs.waiting])
print("queue    :", round(cs.instantaneous_queuing_time()), "s")
print("slots    :", [round(t) for t in cs.available_charging_times(cs.clock)])

# %% [markdown]
# The slot times are absolute. The vehicle still waiting takes whichever
# slot frees first, so that slot's time moves out by its charge.

# %%
cs.record_reservation(ReservationEntry(token=1, arrival_time=1500.0, charge_duration=900.0))
cs.record_reservation(ReservationEntry(token=2, arrival_time=2400.0, charge_duration=600.0))
snapshot = cs.publish_snapshot(cs.clock)
snapshot

# %% [markdown]
# Running the clock forward drains the queue. Each completion is an exact
# event instant rather than a step boundary.

# %%
for event in cs.tick(4000.0):
    print(f"{event.time:8.1f}  {event.kind:<9} ev={event.ev_id}")
print("delivered", round(cs.energy_consumed / 3.6e6, 3), "kWh")
