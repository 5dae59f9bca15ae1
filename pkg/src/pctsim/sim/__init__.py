from .scenario import Scenario, load_scenario, save_scenario, ScenarioError
from .world import (
    Encounter,
    WorldTrace,
    GroundTruthExposures,
    generate_world,
    ground_truth_oracle,
    world_to_csv,
    scripted_world,
)
from .engine import run, SimulationResult, RunLog
from .curves import detection_rate_vs_adoption, loss_detection_rates, metcalfe_world

__all__ = [
    "Scenario",
    "load_scenario",
    "save_scenario",
    "ScenarioError",
    "Encounter",
    "WorldTrace",
    "GroundTruthExposures",
    "generate_world",
    "ground_truth_oracle",
    "world_to_csv",
    "scripted_world",
    "run",
    "SimulationResult",
    "RunLog",
    "detection_rate_vs_adoption",
    "loss_detection_rates",
    "metcalfe_world",
]
