import json

import pytest

qbcast = pytest.importorskip("qbcast")


def test_catalog():
    catalog = qbcast.list_scenarios()
    names = {name for name, _, _ in catalog}
    assert len(catalog) >= 17
    assert "bbp" in names
    assert "mbqc-rotation" in names
    for name, description, schema in catalog:
        assert description
        assert isinstance(json.loads(schema), dict)


def test_run_bbp_enumerate():
    result = qbcast.run("bbp")
    assert result["passed"]
    branches = [r for r in result["records"] if r["record"] == "branch"]
    assert len(branches) == 3
    assert abs(sum(b["probability"] for b in branches) - 1.0) < 1e-10
    assert all(b["metrics"]["fidelity"] > 1 - 1e-10 for b in branches)


def test_run_sampled_deterministic():
    a = qbcast.run("auth", mode="sample", seed=12, trials=3)
    b = qbcast.run("auth", mode="sample", seed=12, trials=3)
    assert a == b
    c = qbcast.run("auth", mode="sample", seed=13, trials=3)
    assert a != c


def test_params_passthrough():
    result = qbcast.run("phase-general", params={"K": 8})
    verdict = result["summary"]["verdicts"]["success_probability_exact"]
    assert verdict["pass"]
    assert result["summary"]["metrics"]


def test_unknown_scenario_raises():
    with pytest.raises(Exception):
        qbcast.run("no-such-scenario")


def test_config_roundtrip():
    config = qbcast.parse_config(
        json.dumps({"scenario": "qkd", "mode": "sample", "seed": 5, "trials": 2})
    )
    assert config.scenario == "qkd"
    assert config.seed == 5
    report = qbcast.run_scenario(config)
    assert report.passed
