"""Strict JSON config parsing for market experiments.

Unknown keys are rejected so typos cannot silently fall back to defaults,
and every error message names the offending key.
"""

import json

from .market import SavingSpec, SimConfig


class ConfigError(ValueError):
    """Bad experiment config: missing/unknown key, wrong type or range."""


REQUIRED_KEYS = ("model", "n_agents", "total_money", "n_exchanges", "seed")
OPTIONAL_KEYS = ("saving", "saving_law", "burn_in", "measure_every",
                 "ensemble", "init")


def parse_config(text) -> SimConfig:
    """Parse a JSON document into a validated SimConfig.

    Defaults for omitted keys: burn_in = 10 * n_agents exchanges,
    measure_every = n_agents, ensemble = 1, init = "equal".
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(doc)


def _require_int(doc, key):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"config key {key!r} must be an integer")
    return v


def _require_real(doc, key):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"config key {key!r} must be a number")
    return float(v)


def _require_str(doc, key):
    v = doc[key]
    if not isinstance(v, str):
        raise ConfigError(f"config key {key!r} must be a string")
    return v


def _saving_law_bounds(doc):
    law = doc["saving_law"]
    bad = ConfigError(
        'config key \'saving_law\' must look like {"uniform": [low, high]}')
    if not isinstance(law, dict) or list(law.keys()) != ["uniform"]:
        raise bad
    bounds = law["uniform"]
    if (not isinstance(bounds, (list, tuple)) or len(bounds) != 2
            or any(isinstance(b, bool) or not isinstance(b, (int, float))
                   for b in bounds)):
        raise bad
    low, high = float(bounds[0]), float(bounds[1])
    if not 0.0 <= low < high <= 1.0:
        raise ConfigError(
            "config key 'saving_law' bounds must satisfy 0 <= low < high <= 1")
    return low, high


def config_from_dict(doc) -> SimConfig:
    """Validate a config mapping; see parse_config for the key schema."""
    for key in doc:
        if key not in REQUIRED_KEYS and key not in OPTIONAL_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise ConfigError(f"missing required config key {key!r}")

    model = _require_str(doc, "model")
    if model not in ("gibbs", "ccm"):
        raise ConfigError("config key 'model' must be 'gibbs' or 'ccm'")
    n_agents = _require_int(doc, "n_agents")
    if n_agents < 2:
        raise ConfigError("n_agents must be at least 2")
    total_money = _require_real(doc, "total_money")
    if not total_money > 0:
        raise ConfigError("total_money must be positive")
    n_exchanges = _require_int(doc, "n_exchanges")
    if n_exchanges < 0:
        raise ConfigError("n_exchanges must be non-negative")
    seed = _require_int(doc, "seed")
    if seed < 0:
        raise ConfigError("seed must be a non-negative integer")

    # Range-check saving parameters before model consistency, so a bad
    # value is reported as such even when the key should not be there.
    saving_value = None
    if "saving" in doc:
        saving_value = _require_real(doc, "saving")
        if not 0.0 <= saving_value < 1.0:
            raise ConfigError("saving must lie in [0,1)")
    law_bounds = None
    if "saving_law" in doc:
        law_bounds = _saving_law_bounds(doc)
    if saving_value is not None and law_bounds is not None:
        raise ConfigError(
            "config keys 'saving' and 'saving_law' are mutually exclusive")

    burn_in = _require_int(doc, "burn_in") if "burn_in" in doc else 10 * n_agents
    if burn_in < 0:
        raise ConfigError("burn_in must be non-negative")
    if n_exchanges < burn_in:
        raise ConfigError("n_exchanges must be at least burn_in")
    measure_every = (_require_int(doc, "measure_every")
                     if "measure_every" in doc else n_agents)
    if measure_every < 1:
        raise ConfigError("measure_every must be at least 1")
    ensemble = _require_int(doc, "ensemble") if "ensemble" in doc else 1
    if ensemble < 1:
        raise ConfigError("ensemble must be at least 1")
    init = _require_str(doc, "init") if "init" in doc else "equal"
    if init not in ("equal", "all-to-one"):
        raise ConfigError("config key 'init' must be 'equal' or 'all-to-one'")

    if model == "gibbs":
        if saving_value is not None or law_bounds is not None:
            raise ConfigError("model 'gibbs' takes no saving parameters")
        spec = SavingSpec.none()
    else:
        if saving_value is not None:
            spec = SavingSpec.uniform(saving_value)
        elif law_bounds is not None:
            spec = SavingSpec.distributed(*law_bounds)
        else:
            raise ConfigError("model 'ccm' requires 'saving' or 'saving_law'")

    config = SimConfig(model=model, n_agents=n_agents, total_money=total_money,
                       saving=spec, n_exchanges=n_exchanges, seed=seed,
                       burn_in=burn_in, measure_every=measure_every,
                       ensemble=ensemble, init=init)
    config.validate()
    return config


def config_to_dict(config: SimConfig) -> dict:
    """Inverse of config_from_dict; round-trips exactly."""
    doc = {
        "model": config.model,
        "n_agents": config.n_agents,
        "total_money": config.total_money,
        "n_exchanges": config.n_exchanges,
        "seed": config.seed,
        "burn_in": config.burn_in,
        "measure_every": config.measure_every,
        "ensemble": config.ensemble,
        "init": config.init,
    }
    if config.saving.kind == "uniform":
        doc["saving"] = config.saving.value
    elif config.saving.kind == "distributed":
        doc["saving_law"] = {"uniform": [config.saving.low, config.saving.high]}
    return doc
