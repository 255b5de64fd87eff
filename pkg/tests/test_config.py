import json

import pytest

from kinex import ConfigError, config_from_dict, config_to_dict, parse_config

GIBBS = {"model": "gibbs", "n_agents": 100, "total_money": 1000,
         "n_exchanges": 100_000, "seed": 7}


def _doc(**kw):
    doc = dict(GIBBS)
    doc.update(kw)
    return doc


def test_minimal_gibbs_config():
    config = parse_config(json.dumps(GIBBS))
    assert config.model == "gibbs"
    assert config.mean_money == 10.0
    assert config.saving.kind == "none"
    # documented defaults
    assert config.burn_in == 10 * 100
    assert config.measure_every == 100
    assert config.ensemble == 1
    assert config.init == "equal"


def test_saving_out_of_range_message():
    with pytest.raises(ConfigError, match=r"saving must lie in \[0,1\)"):
        config_from_dict(_doc(saving=1.0))


def test_distributed_law_config():
    doc = _doc(model="ccm", saving_law={"uniform": [0, 1]})
    config = config_from_dict(doc)
    assert config.model == "ccm"
    assert config.saving.kind == "distributed"
    assert (config.saving.low, config.saving.high) == (0.0, 1.0)


def test_uniform_saving_config():
    config = config_from_dict(_doc(model="ccm", saving=0.5))
    assert config.saving.kind == "uniform"
    assert config.saving.value == 0.5


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="unknown config key 'n_agent'"):
        config_from_dict(_doc(n_agent=10))


def test_missing_keys_are_named():
    for key in GIBBS:
        doc = dict(GIBBS)
        del doc[key]
        with pytest.raises(ConfigError, match=f"missing required config key '{key}'"):
            config_from_dict(doc)


def test_type_mismatches_are_named():
    with pytest.raises(ConfigError, match="'n_agents' must be an integer"):
        config_from_dict(_doc(n_agents="100"))
    with pytest.raises(ConfigError, match="'n_agents' must be an integer"):
        config_from_dict(_doc(n_agents=True))
    with pytest.raises(ConfigError, match="'total_money' must be a number"):
        config_from_dict(_doc(total_money="x"))
    with pytest.raises(ConfigError, match="'total_money' must be a number"):
        config_from_dict(_doc(total_money=False))
    with pytest.raises(ConfigError, match="'model' must be a string"):
        config_from_dict(_doc(model=3))
    with pytest.raises(ConfigError, match="'seed' must be an integer"):
        config_from_dict(_doc(seed=1.5))


def test_total_money_may_be_integer_json():
    assert config_from_dict(_doc(total_money=250)).total_money == 250.0


def test_model_value_checked():
    with pytest.raises(ConfigError, match="'gibbs' or 'ccm'"):
        config_from_dict(_doc(model="gas"))


def test_model_saving_consistency():
    with pytest.raises(ConfigError, match="takes no saving"):
        config_from_dict(_doc(saving=0.3))
    with pytest.raises(ConfigError, match="requires 'saving' or 'saving_law'"):
        config_from_dict(_doc(model="ccm"))
    with pytest.raises(ConfigError, match="mutually exclusive"):
        config_from_dict(_doc(model="ccm", saving=0.3,
                              saving_law={"uniform": [0, 1]}))


def test_saving_law_shape_errors():
    for bad in ({"uniform": [1, 0]}, {"uniform": [0, 1.5]},
                {"uniform": [-0.1, 1]}, {"uniform": [0.4, 0.4]}):
        with pytest.raises(ConfigError, match="saving_law"):
            config_from_dict(_doc(model="ccm", saving_law=bad))
    for malformed in ([0, 1], {"beta": [0, 1]}, {"uniform": [0]},
                      {"uniform": [0, "x"]}, {"uniform": [0, True]}):
        with pytest.raises(ConfigError, match="saving_law"):
            config_from_dict(_doc(model="ccm", saving_law=malformed))


def test_range_errors():
    with pytest.raises(ConfigError, match="n_agents must be at least 2"):
        config_from_dict(_doc(n_agents=1))
    with pytest.raises(ConfigError, match="total_money must be positive"):
        config_from_dict(_doc(total_money=0))
    with pytest.raises(ConfigError, match="n_exchanges must be at least burn_in"):
        config_from_dict(_doc(n_exchanges=10, burn_in=100))
    with pytest.raises(ConfigError, match="burn_in must be non-negative"):
        config_from_dict(_doc(burn_in=-1))
    with pytest.raises(ConfigError, match="measure_every must be at least 1"):
        config_from_dict(_doc(measure_every=0))
    with pytest.raises(ConfigError, match="ensemble must be at least 1"):
        config_from_dict(_doc(ensemble=0))
    with pytest.raises(ConfigError, match="seed must be a non-negative"):
        config_from_dict(_doc(seed=-3))
    with pytest.raises(ConfigError, match="'init'"):
        config_from_dict(_doc(init="random"))


def test_not_json_and_not_object():
    with pytest.raises(ConfigError, match="not valid JSON"):
        parse_config("{model: gibbs}")
    with pytest.raises(ConfigError, match="must be a JSON object"):
        parse_config("[1, 2]")


def test_round_trip_through_dict():
    docs = [
        GIBBS,
        _doc(model="ccm", saving=0.25, ensemble=4, init="all-to-one"),
        _doc(model="ccm", saving_law={"uniform": [0.1, 0.9]},
             burn_in=5000, measure_every=10),
    ]
    for doc in docs:
        config = config_from_dict(doc)
        assert config_from_dict(config_to_dict(config)) == config
