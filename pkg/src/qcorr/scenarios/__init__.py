"""Corpus of worked examples with their expected verdicts."""

from .ghz import classical_brute_force, quantum_win_probabilities
from .registry import Check, ScenarioReport, export_scenario, list_scenarios, run_scenario

__all__ = [
    "Check",
    "ScenarioReport",
    "classical_brute_force",
    "export_scenario",
    "list_scenarios",
    "quantum_win_probabilities",
    "run_scenario",
]
