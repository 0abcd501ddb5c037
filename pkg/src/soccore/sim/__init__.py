"""Deterministic simulation harness: scenarios, virtual-clock runs, reports."""

from soccore.sim.scenario import Scenario, ScenarioParseError, load_scenario
from soccore.sim.harness import SimReport, SimulationHarness, simulate

__all__ = [
    "Scenario",
    "ScenarioParseError",
    "SimReport",
    "SimulationHarness",
    "load_scenario",
    "simulate",
]
