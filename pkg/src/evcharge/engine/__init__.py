from .config import ScenarioConfig, load_config
from .experiment import run_cell, run_grid
from .metrics import MetricsReport
from .simulation import Simulation, build_graph, run

__all__ = ["MetricsReport", "ScenarioConfig", "Simulation", "build_graph", "load_config", "run", "run_cell", "run_grid"]
