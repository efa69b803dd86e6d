from .scenario import Scenario, ScenarioError, load_scenario, scenario_from_dict
from .experiment import MetricsLog, emit_metrics, run_experiment, run_matrix
from .service import SessionEngine, serve_session

__all__ = [
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "scenario_from_dict",
    "MetricsLog",
    "emit_metrics",
    "run_experiment",
    "run_matrix",
    "SessionEngine",
    "serve_session",
]
