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
# # A small city for half a day
#
# The default scenario is a 9x7 grid with 500 m blocks, 5 stations, 7 RSUs
# and 100 cars. Here it is cut down to 40 cars and six hours so the cells
# run in a few seconds.

# %%
from evcharge.engine import ScenarioConfig, Simulation, build_graph

cfg = ScenarioConfig(ev_count=40, duration=6 * 3600.0)
graph = build_graph(cfg)
print("stations at", [graph.xy(n) for n in graph.cs_nodes])
print("RSUs at    ", [graph.xy(n) for n in graph.rsu_nodes])

# %%
rows = {}
for mode in ("ideal", "pull", "apull", "push"):
    report = Simulation(cfg.replace(mode=mode), graph=graph).run()
    rows[mode] = report
    print(f"{mode:<6} wait {report.average_waiting_time:7.1f} s   obtained {report.obtain_info_count:5d}"
          f"   stale {report.average_information_freshness:6.1f} s   charged {report.charged_ev_count}")

# %% [markdown]
# Every kilowatt-hour a station logs should show up in some battery.

# %%
for mode, r in rows.items():
    print(mode, round(r.total_utilization_kwh, 6), round(r.energy_received_kwh, 6))

# %% [markdown]
# A trace shows what one car did. Here are the first decisions.

# %%
trace = []
Simulation(cfg.replace(ev_count=5), graph=graph, trace=trace).run()
[r for r in trace if r["type"] in ("decision", "arrive")][:6]
