"""Information-access probability on a straight road with N equally spaced RSUs.

Closed-form upper bounds for push and pull dissemination, plus a Monte Carlo
model of the same geometry used to check the qualitative claims (ordering
and monotonicity) the bounds make.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Bound requested outside the parameter region where its factors are probabilities."""


@dataclass(frozen=True)
class StraightRoadParams:
    R: float  # RSU radius (m)
    L: float  # vehicle query range (m)
    T: float  # publication interval (s)
    V: float  # vehicle speed (m/s)
    S: float  # spacing between adjacent RSUs (m)
    F: float  # start point to first RSU (m)
    N: int  # number of RSUs

    def __post_init__(self):
        for name in ("R", "L", "T", "V", "S", "F"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.N < 1 or int(self.N) != self.N:
            raise DomainError("N must be a positive integer")

    @property
    def rsu_positions(self) -> np.ndarray:
        return self.F + self.S * np.arange(self.N)


def _check_prob(value: float, what: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{what} = {value:.6g} is not a probability")
    return value


def p_push_bound(p: StraightRoadParams) -> float:
    vt = p.V * p.T
    first = _check_prob((p.F + p.R) / vt, "(F+R)/(VT)")
    later = _check_prob(4 * p.R ** 2 / (vt * p.S), "4R^2/(VTS)")
    return 1.0 - (1.0 - first) * (1.0 - later) ** (p.N - 1)


def p_pull_bound(p: StraightRoadParams) -> float:
    vt = p.V * p.T
    miss = 1.0
    for i in range(1, p.N + 1):
        term = _check_prob(((i - 1) * p.S + p.F + p.L) / vt, f"pull term {i}")
        miss *= 1.0 - term
    return 1.0 - miss


def push_vs_pull_bound_gap(p: StraightRoadParams) -> tuple[float, float]:
    """Both bounds for R = L and non-overlapping disks; pull never falls below push."""
    if not math.isclose(p.R, p.L, rel_tol=1e-12):
        raise DomainError("comparison requires R == L")
    if 2 * p.R > p.S:
        raise DomainError("comparison requires 2R <= S")
    push, pull = p_push_bound(p), p_pull_bound(p)
    if pull < push - 1e-12:
        raise AssertionError(f"pull bound {pull} below push bound {push}")
    return push, pull


@dataclass(frozen=True)
class Estimate:
    p: float
    half_width: float
    trials: int

    @property
    def ci(self) -> tuple[float, float]:
        return (self.p - self.half_width, self.p + self.half_width)


def _estimate(success: np.ndarray) -> Estimate:
    n = success.size
    p = float(success.mean())
    return Estimate(p, 1.959963984540054 * math.sqrt(p * (1 - p) / n), n)


def push_success(p: StraightRoadParams, phase: np.ndarray) -> np.ndarray:
    """Whether some publication instant finds the vehicle inside some RSU disk."""
    hit = np.zeros(phase.shape, dtype=bool)
    for x in p.rsu_positions:
        enter = max((x - p.R) / p.V, 0.0)
        leave = (x + p.R) / p.V
        k = np.maximum(np.ceil((enter - phase) / p.T), 0.0)
        hit |= phase + k * p.T <= leave
    return hit


def pull_success(p: StraightRoadParams, phase: np.ndarray) -> np.ndarray:
    """Whether the first publication lands before the vehicle leaves the last query disk."""
    last_exit = (p.rsu_positions[-1] + min(p.R, p.L)) / p.V
    return phase <= last_exit


def monte_carlo_access(p: StraightRoadParams, mode: str, trials: int, seed=None) -> Estimate:
    """Fraction of trials in which the vehicle obtains information, with a 95% CI.

    The shared publication phase is uniform on [0, T); the vehicle starts at
    x = 0 at t = 0 and drives at constant speed V.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    phase = np.random.default_rng(seed).uniform(0.0, p.T, size=trials)
    if mode == "push":
        return _estimate(push_success(p, phase))
    if mode == "pull":
        return _estimate(pull_success(p, phase))
    raise ValueError(f"unknown mode {mode!r}")
