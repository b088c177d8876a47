import json
import math

import pytest

import bdwalk


def test_linear_drift_threshold():
    low = bdwalk.classify_diagonal(bdwalk.DriftFunction.power_law(0.25, 1, 1))
    high = bdwalk.classify_diagonal(bdwalk.DriftFunction.power_law(0.75, 1, 1))
    assert low.label == bdwalk.Label.Recurrent
    assert high.label == bdwalk.Label.Transient
    assert low.to_dict()["label"] == "Recurrent"
    assert high.witness_c > 1


def test_drift_evaluation_and_errors():
    f = bdwalk.DriftFunction.power_law(1, 1, 1)
    assert f(4, 16) == pytest.approx(0.125)
    assert f.diagonal(10) == pytest.approx(1 / 20)
    assert f == bdwalk.DriftFunction.power_law(1, 1, 1)
    with pytest.raises(bdwalk.DomainError):
        bdwalk.DriftFunction.constant(0.6)(3, 10)
    with pytest.raises(ValueError):
        bdwalk.DriftFunction.power_law(-1, 1, 1)


def test_oracles():
    sym = bdwalk.ChainSpec.constant(0.5, 0.5)
    assert bdwalk.hit_probability(sym, 10, 0, 50) == pytest.approx(0.2, abs=1e-12)
    dist = bdwalk.stationary(bdwalk.ChainSpec.constant(0.25, 0.5), 100)
    assert dist["p"][0] == pytest.approx(0.5, abs=1e-12)
    assert dist["p"][1] == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(bdwalk.NotNormalizable):
        bdwalk.stationary(sym, 100)
    ratio = bdwalk.ChainSpec.from_ratio(lambda n: 1 + 2 / n)
    assert bdwalk.expected_returns(ratio, 1000)["escape"] == pytest.approx(0.5, abs=2e-3)
    assert bdwalk.classify_ratio(ratio).label == bdwalk.Label.Transient


def test_simulation_is_seeded():
    f = bdwalk.DriftFunction.constant(0.0)
    a = bdwalk.simulate(f, 200, horizon=500, seed=3, threads=1)
    b = bdwalk.simulate(f, 200, horizon=500, seed=3, threads=4)
    assert a == b
    assert 0 < a["return_frequency"]["value"] <= 1
    runs = bdwalk.simulate(f, 5, horizon=50, seed=3, per_replica=True)["runs"]
    assert len(runs) == 5


def test_config_errors_name_the_field():
    with pytest.raises(bdwalk.ConfigError) as err:
        bdwalk.parse_config({"rno": 0.3})
    assert err.value.field == "rno"
    assert "did you mean 'rho'" in str(err.value)
    with pytest.raises(bdwalk.ConfigError) as err:
        bdwalk.parse_config({"rho": -1})
    assert err.value.field == "rho"
    defaults = bdwalk.parse_config({})
    assert defaults["family"] == "power_law"


def test_sweep_reruns_from_its_manifest():
    config = {"rho": [0.25, 0.75], "simulation": {"replicas": 50, "horizon": 1000, "seed": 4}}
    out = bdwalk.sweep(config)
    labels = [r["verdict"]["label"] for r in out["sweep"]["records"]]
    assert labels == ["Recurrent", "Transient"]
    again = bdwalk.sweep(json.dumps(out))
    assert json.dumps(again, sort_keys=True) == json.dumps(out, sort_keys=True)


def test_example_three():
    out = bdwalk.example(3)
    assert out["sweep"]["summary"]["inconsistent"] == 0
    assert len(out["sweep"]["records"]) == 40
    assert all(math.isfinite(r["alpha"]) for r in out["sweep"]["records"])


def test_configs_match_the_documented_schema():
    jsonschema = pytest.importorskip("jsonschema")
    from pathlib import Path

    schema = json.loads((Path(__file__).parents[2] / "docs" / "config.schema.json").read_text())
    configs = [bdwalk.parse_config({})] + [bdwalk.example_config(i) for i in range(1, 5)]
    for config in configs:
        jsonschema.validate(config, schema)
        assert bdwalk.parse_config(config) == config
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"rno": 1}, schema)
