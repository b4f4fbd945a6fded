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
# # Sweeping the publication interval
#
# A grid is a set of alternatives per key. Every combination becomes a cell
# and every cell runs `runs` seeds. Results come back as one CSV with a
# row per run and an aggregate row with 95% intervals.

# %%
import csv
import io
import tempfile
from pathlib import Path

from evcharge.engine import ScenarioConfig, run_grid
from evcharge.engine.experiment import load_grid, results_to_csv

grid_file = Path(tempfile.mkdtemp()) / "grid.txt"
grid_file.write_text("mode = pull | push\npublication_interval = 100 | 900\n")
base = ScenarioConfig(ev_count=40, duration=6 * 3600.0, runs=3)

results = run_grid(load_grid(grid_file), base)

# %%
table = list(csv.DictReader(io.StringIO(results_to_csv(results))))
for row in table:
    if row["row_type"] == "aggregate":
        print(f"{row['mode']:<5} T={float(row['publication_interval']):4.0f}"
              f"  wait {float(row['average_waiting_time']):7.1f} ± {float(row['average_waiting_time_ci95']):5.1f}"
              f"  obtained {float(row['obtain_info_count']):7.1f}")

# %% [markdown]
# Longer intervals starve both modes of updates. Pull keeps collecting more
# often because a car can ask any RSU it meets instead of waiting for the
# broadcast instant.
