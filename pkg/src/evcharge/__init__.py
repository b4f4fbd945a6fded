"""Discrete-event simulator of RSU-bridged publish/subscribe EV charging management."""
from .analysis import StraightRoadParams, monte_carlo_access, p_pull_bound, p_push_bound
from .comms import CommMode
from .domain import EvState, InfoMap, Publication, ReservationEntry
from .engine import ScenarioConfig, run
from .station import StationState

__all__ = [
    "CommMode", "EvState", "InfoMap", "Publication", "ReservationEntry", "ScenarioConfig",
    "StationState", "StraightRoadParams", "monte_carlo_access", "p_pull_bound", "p_push_bound", "run",
]
__version__ = "0.1.0"
