"""Deterministic simulator for entanglement-assisted broadcasting protocols."""

import json

from ._qbcast import Mode, Report, ScenarioConfig, list_scenarios, parse_config
from ._qbcast import run_scenario as _run_scenario

__all__ = [
    "Mode",
    "Report",
    "ScenarioConfig",
    "list_scenarios",
    "parse_config",
    "run_scenario",
    "run",
]

run_scenario = _run_scenario


def run(scenario, *, mode="enumerate", seed=0, trials=1, params=None,
        verbose_transcript=False):
    """Run a scenario by name and return the parsed report.

    Returns a dict with ``passed``, ``summary`` (dict) and ``records``
    (list of dicts).
    """
    config = ScenarioConfig()
    config.scenario = scenario
    config.mode = Mode.SAMPLE if mode == "sample" else Mode.ENUMERATE
    config.seed = seed
    config.trials = trials
    if params is not None:
        config.params = json.dumps(params)
    report = _run_scenario(config, verbose_transcript)
    return {
        "passed": report.passed,
        "summary": json.loads(report.summary),
        "records": [json.loads(r) for r in report.records],
    }
