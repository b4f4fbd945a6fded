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
# # Push or pull on a straight road
#
# One car drives past `N` evenly spaced RSUs. Publications happen every
# `T` seconds with an unknown phase. Under push the car has to be inside a
# disk at a publication instant. Under pull it only needs one publication
# to have happened before it leaves the last disk.

# %%
from evcharge.analysis import DomainError, StraightRoadParams, monte_carlo_access, p_pull_bound, p_push_bound

base = dict(R=150.0, L=150.0, V=20.0, S=600.0, F=300.0, N=3)

# %%
print(f"{'T':>6} {'push bound':>11} {'pull bound':>11} {'push MC':>9} {'pull MC':>9}")
for T in (90.0, 100.0, 150.0, 200.0, 400.0):
    p = StraightRoadParams(T=T, **base)
    bounds = []
    for fn in (p_push_bound, p_pull_bound):
        try:
            bounds.append(f"{fn(p):11.4f}")
        except DomainError:
            bounds.append(f"{'n/a':>11}")
    mc = [monte_carlo_access(p, mode, 50_000, seed=0).p for mode in ("push", "pull")]
    print(f"{T:6.0f} {bounds[0]} {bounds[1]} {mc[0]:9.4f} {mc[1]:9.4f}")

# %% [markdown]
# The bounds are loose, but they order the two modes the same way the
# simulation does. Below `T = 100` the pull bound is undefined because one
# of its factors would exceed 1.
#
# Widening the RSU disks helps push a lot and pull only a little:

# %%
for R in (50.0, 150.0, 300.0):
    p = StraightRoadParams(R=R, L=R, T=100.0, V=20.0, S=600.0, F=300.0, N=3)
    push = monte_carlo_access(p, "push", 50_000, seed=1)
    pull = monte_carlo_access(p, "pull", 50_000, seed=1)
    print(f"R={R:5.0f}  push {push.p:.3f} ± {push.half_width:.3f}   pull {pull.p:.3f} ± {pull.half_width:.3f}")
