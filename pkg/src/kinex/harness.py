"""Experiment runner: named presets, replica orchestration, ensemble
aggregation, and CSV/JSON artifact emission.

Replicas of an ensemble run independently (optionally in parallel) with
seeds base + r, and aggregation is a pure reduction over replica index,
so results never depend on completion order.  All floats are written with
17 significant digits so files reload to the exact same doubles.
"""

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import stats
from .config import ConfigError, config_from_dict, config_to_dict
from .gas import MBModel, init_gas, run_collisions
from .market import (CONSERVATION_RTOL, GibbsModel, SimConfig, SnapshotSeries,
                     detect_steady_state, dynamics_rng, make_population, run)

RNG_ALGORITHM = "PCG64"

# Fixed measurement policy: the emitted histogram covers the data span,
# the entropy histogram uses a config-derived span so entropies from runs
# at the same mean are compared at identical binning.
HIST_BINS = 200
ENTROPY_BINS = 200
ENTROPY_SPAN_MEANS = 10.0
TAIL_FRACTION = 0.05
LOW_ENERGY_BINS = 500       # fine bins over [0, scale] for the gas check

# Two-sample KS coefficient at the ~1% level; the steady-state verdict in
# reports uses tol = KS_SIG * sqrt(2 / pooled_half_size).
KS_SIG = 1.63

PRESETS = {
    "gibbs": {
        "model": "gibbs", "n_agents": 10000, "total_money": 10000.0,
        "n_exchanges": 10_000_000, "burn_in": 1_000_000,
        "measure_every": 250_000, "ensemble": 1, "seed": 1,
    },
    "gamma": {
        "model": "ccm", "saving": 0.5, "n_agents": 1000,
        "total_money": 1000.0, "n_exchanges": 10_000_000,
        "burn_in": 1_000_000, "measure_every": 1_000_000,
        "ensemble": 10, "seed": 2,
    },
    "pareto-tail": {
        "model": "ccm", "saving_law": {"uniform": [0.0, 1.0]},
        "n_agents": 1000, "total_money": 1000.0, "n_exchanges": 20_000_000,
        "burn_in": 2_000_000, "measure_every": 2_000_000,
        "ensemble": 20, "seed": 3,
    },
    "gas-oracle": {
        "n_particles": 10000, "total_energy": 15000.0,
        "n_collisions": 10_000_000, "burn_in": 1_000_000,
        "measure_every": 180_000, "seed": 4,
    },
}


@dataclass
class ExperimentReport:
    """Everything needed to audit and bit-reproduce one experiment."""

    config_echo: dict
    preset: str | None
    seed: int
    rng_algorithm: str
    n_samples: int
    sweeps: float
    sample_mean: float
    gini: float
    entropy: float
    gamma_shape: float | None
    tail: stats.TailFit | None
    tail_no_plateau: bool | None
    ks_vs_gibbs: float
    steady_state: bool | None
    conservation_error: float
    wall_time_s: float
    histogram_file: str
    ccdf_file: str
    checks: dict
    passed: bool

    def to_dict(self) -> dict:
        tail = None
        if self.tail is not None:
            tail = {
                "exponent_ccdf": self.tail.exponent_ccdf,
                "exponent_pdf": self.tail.exponent_pdf,
                "top_fraction": self.tail.top_fraction,
                "k_used": self.tail.k_used,
                "stderr": self.tail.stderr,
            }
        return {
            "config": self.config_echo,
            "preset": self.preset,
            "seed": self.seed,
            "rng_algorithm": self.rng_algorithm,
            "n_samples": self.n_samples,
            "sweeps": self.sweeps,
            "sample_mean": self.sample_mean,
            "gini": self.gini,
            "entropy": self.entropy,
            "gamma_shape": self.gamma_shape,
            "tail": tail,
            "tail_no_plateau": self.tail_no_plateau,
            "ks_vs_gibbs": self.ks_vs_gibbs,
            "steady_state": self.steady_state,
            "conservation_error": self.conservation_error,
            "wall_time_s": self.wall_time_s,
            "histogram_file": self.histogram_file,
            "ccdf_file": self.ccdf_file,
            "checks": self.checks,
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, doc) -> "ExperimentReport":
        tail = doc["tail"]
        if tail is not None:
            tail = stats.TailFit(exponent_ccdf=tail["exponent_ccdf"],
                                 top_fraction=tail["top_fraction"],
                                 k_used=tail["k_used"],
                                 stderr=tail["stderr"])
        return cls(config_echo=doc["config"], preset=doc["preset"],
                   seed=doc["seed"], rng_algorithm=doc["rng_algorithm"],
                   n_samples=doc["n_samples"], sweeps=doc["sweeps"],
                   sample_mean=doc["sample_mean"], gini=doc["gini"],
                   entropy=doc["entropy"], gamma_shape=doc["gamma_shape"],
                   tail=tail, tail_no_plateau=doc["tail_no_plateau"],
                   ks_vs_gibbs=doc["ks_vs_gibbs"],
                   steady_state=doc["steady_state"],
                   conservation_error=doc["conservation_error"],
                   wall_time_s=doc["wall_time_s"],
                   histogram_file=doc["histogram_file"],
                   ccdf_file=doc["ccdf_file"], checks=doc["checks"],
                   passed=doc["passed"])


def format_float(x) -> str:
    """Decimal with 17 significant digits; reloads to the exact double."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value in report output")
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def dumps_json(obj, indent=0) -> str:
    """JSON text with floats rendered by format_float."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f"{inner}{json.dumps(str(k))}: {dumps_json(v, indent + 1)}"
                for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{inner}{dumps_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_csv(hist: stats.Histogram, ccdf, out_dir):
    """Write histogram.csv and ccdf.csv under out_dir; returns the paths.

    Histogram columns: bin_left,bin_right,count,density.
    CCDF columns: value,tail_prob (descending values, as from ccdf_points).
    """
    out = Path(out_dir)
    hist_path = out / "histogram.csv"
    ccdf_path = out / "ccdf.csv"
    density = hist.density
    with open(hist_path, "w") as fh:
        fh.write("bin_left,bin_right,count,density\n")
        for b in range(len(hist.counts)):
            fh.write(f"{format_float(hist.edges[b])},"
                     f"{format_float(hist.edges[b + 1])},"
                     f"{int(hist.counts[b])},{format_float(density[b])}\n")
    values, tails = ccdf
    with open(ccdf_path, "w") as fh:
        fh.write("value,tail_prob\n")
        for v, t in zip(values, tails):
            fh.write(f"{format_float(v)},{format_float(t)}\n")
    return str(hist_path), str(ccdf_path)


def write_report_json(report: ExperimentReport, path) -> str:
    with open(path, "w") as fh:
        fh.write(dumps_json(report.to_dict()))
        fh.write("\n")
    return str(path)


def read_report_json(path) -> ExperimentReport:
    with open(path) as fh:
        return ExperimentReport.from_dict(json.load(fh))


def _market_replica(task):
    config, keep_series = task
    pop = make_population(config)
    series = run(pop, config)
    out = {"money": pop.money, "conservation": pop.conservation_error()}
    if keep_series:
        out["times"] = series.times
        out["snapshots"] = series.snapshots
    return out


def _run_market_replicas(config: SimConfig, jobs: int):
    tasks = [(config.replica(r), r == 0) for r in range(config.ensemble)]
    if jobs > 1 and config.ensemble > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, config.ensemble)) as ex:
            return list(ex.map(_market_replica, tasks))
    return [_market_replica(t) for t in tasks]


def _steady_state_verdict(series: SnapshotSeries):
    """Report-level steady-state call: trailing halves indistinguishable at
    the ~1% KS level.  None when the schedule yielded under 2 snapshots."""
    w = series.n_snapshots // 2
    if w < 1:
        return None
    half = w * series.snapshots.shape[1]
    tol = KS_SIG * math.sqrt(2.0 / half)
    return detect_steady_state(series, w, tol)


def _distribution_stats(pool, mean_money, ref_cdf):
    """Shared measurement block over a pooled sample vector."""
    ehist = stats.histogram(pool, ENTROPY_BINS,
                            span=(0.0, ENTROPY_SPAN_MEANS * mean_money))
    block = {
        "sample_mean": float(pool.mean()),
        "gini": stats.gini(pool),
        "entropy": stats.shannon_entropy(ehist),
        "ks": stats.ks_distance(pool, ref_cdf),
        "low_density": float(ehist.density[0]),
        "mode_location": float(ehist.midpoints[int(np.argmax(ehist.counts))]),
    }
    try:
        block["gamma_shape"] = stats.fit_gamma_moments(pool).shape
    except stats.DegenerateSampleError:
        block["gamma_shape"] = None
    try:
        block["tail"] = stats.hill_tail(pool, TAIL_FRACTION)
        block["tail_no_plateau"] = stats.hill_no_plateau(pool)
    except ValueError:
        block["tail"] = None
        block["tail_no_plateau"] = None
    return block


def _checks_gibbs(block, config):
    mean = config.mean_money
    return {
        "ks_vs_gibbs": block["ks"] < 0.02,
        "gini_half": abs(block["gini"] - 0.5) <= 0.01,
        "mean_money": abs(block["sample_mean"] - mean) <= CONSERVATION_RTOL * mean,
        "conservation": block["conservation"] < CONSERVATION_RTOL,
    }


def _checks_gamma(block, config):
    mean = config.mean_money
    shape = block["gamma_shape"]
    return {
        "gamma_shape": shape is not None and shape > 1.5,
        "low_money_density": block["low_density"] < 0.2 / mean,
        "mode_away_from_zero": block["mode_location"] > 0.3 * mean,
        "conservation": block["conservation"] < CONSERVATION_RTOL,
    }


def _checks_pareto(block, config):
    tail = block["tail"]
    return {
        "tail_exponent": tail is not None and 1.6 <= tail.exponent_pdf <= 2.4,
        "conservation": block["conservation"] < CONSERVATION_RTOL,
    }


_MARKET_CHECKS = {"gibbs": _checks_gibbs, "gamma": _checks_gamma,
                  "pareto-tail": _checks_pareto}


def run_simulation(config: SimConfig, out_dir, jobs=1,
                   preset=None) -> ExperimentReport:
    """Run all replicas of a market config, pool the final money vectors,
    measure them, and write histogram.csv, ccdf.csv and report.json."""
    config.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    results = _run_market_replicas(config, jobs)
    pool = np.concatenate([res["money"] for res in results])
    block = _distribution_stats(pool, config.mean_money,
                                GibbsModel(config.mean_money).cdf)
    block["conservation"] = max(res["conservation"] for res in results)
    first = results[0]
    steady = None
    if "times" in first:
        steady = _steady_state_verdict(
            SnapshotSeries(first["times"], first["snapshots"], None))
    checks = _MARKET_CHECKS[preset](block, config) if preset else {}

    hist_path, ccdf_path = emit_csv(stats.histogram(pool, HIST_BINS),
                                    stats.ccdf_points(pool), out)
    report = ExperimentReport(
        config_echo=config_to_dict(config), preset=preset, seed=config.seed,
        rng_algorithm=RNG_ALGORITHM, n_samples=int(pool.size),
        sweeps=config.sweeps, sample_mean=block["sample_mean"],
        gini=block["gini"], entropy=block["entropy"],
        gamma_shape=block["gamma_shape"], tail=block["tail"],
        tail_no_plateau=block["tail_no_plateau"], ks_vs_gibbs=block["ks"],
        steady_state=steady, conservation_error=block["conservation"],
        wall_time_s=time.perf_counter() - t0, histogram_file=hist_path,
        ccdf_file=ccdf_path, checks=checks,
        passed=all(checks.values()) if checks else True)
    write_report_json(report, out / "report.json")
    return report


_GAS_KEYS = ("n_particles", "total_energy", "n_collisions", "burn_in",
             "measure_every", "seed")


def _gas_params(params):
    for key in params:
        if key not in _GAS_KEYS:
            raise ConfigError(f"unknown config key {key!r} for the gas preset")
    for key in ("n_particles", "n_collisions", "burn_in", "measure_every",
                "seed"):
        v = params[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"config key {key!r} must be an integer")
    v = params["total_energy"]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("config key 'total_energy' must be a number")
    if params["n_particles"] < 2:
        raise ConfigError("n_particles must be at least 2")
    if not params["total_energy"] > 0:
        raise ConfigError("total_energy must be positive")
    if params["burn_in"] < 0:
        raise ConfigError("burn_in must be non-negative")
    if params["n_collisions"] < params["burn_in"]:
        raise ConfigError("n_collisions must be at least burn_in")
    if params["measure_every"] < 1:
        raise ConfigError("measure_every must be at least 1")
    if params["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    return {k: (float(params[k]) if k == "total_energy" else int(params[k]))
            for k in _GAS_KEYS}


def _run_gas_experiment(params, out_dir) -> ExperimentReport:
    """Gas-oracle run: collisions, pooled trailing snapshots, MB checks."""
    p = _gas_params(params)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    ens = init_gas(p["n_particles"], p["total_energy"])
    series = run_collisions(ens, p["n_collisions"], dynamics_rng(p["seed"]),
                            burn_in=p["burn_in"],
                            measure_every=p["measure_every"])
    pool = series.pooled() if series.n_snapshots else ens.energy
    model = MBModel.from_mean(float(pool.mean()))
    block = _distribution_stats(pool, ens.mean_energy, model.cdf)
    block["conservation"] = ens.conservation_error()
    # Fine bins over [0, scale]: the density must vanish toward zero energy,
    # unlike the market's exponential whose lowest bin is the peak.
    fine = stats.histogram(pool, LOW_ENERGY_BINS, span=(0.0, model.scale))
    low_ratio = float(fine.density[0] / fine.density.max())
    checks = {
        "ks_vs_mb": block["ks"] < 0.02,
        "low_energy_density": low_ratio < 0.1,
        "conservation": block["conservation"] < CONSERVATION_RTOL,
    }
    hist_path, ccdf_path = emit_csv(stats.histogram(pool, HIST_BINS),
                                    stats.ccdf_points(pool), out)
    report = ExperimentReport(
        config_echo={"model": "gas", **p}, preset="gas-oracle",
        seed=p["seed"], rng_algorithm=RNG_ALGORITHM, n_samples=int(pool.size),
        sweeps=p["n_collisions"] / p["n_particles"],
        sample_mean=block["sample_mean"], gini=block["gini"],
        entropy=block["entropy"], gamma_shape=block["gamma_shape"],
        tail=block["tail"], tail_no_plateau=block["tail_no_plateau"],
        ks_vs_gibbs=block["ks"], steady_state=_steady_state_verdict(series),
        conservation_error=block["conservation"],
        wall_time_s=time.perf_counter() - t0, histogram_file=hist_path,
        ccdf_file=ccdf_path, checks=checks, passed=all(checks.values()))
    write_report_json(report, out / "report.json")
    return report


def run_preset(name, overrides, out_dir, jobs=1) -> ExperimentReport:
    """Run a named preset, optionally overriding config keys.

    Presets: gibbs (saving-free market, exponential steady state), gamma
    (shared saving 0.5), pareto-tail (quenched uniform saving draws), and
    gas-oracle (collision sampler vs the analytic MB density).  Each
    report carries pass/fail checks for the claims the preset encodes.
    """
    if name not in PRESETS:
        valid = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r}: valid presets are {valid}")
    params = dict(PRESETS[name])
    overrides = dict(overrides or {})
    if "saving" in overrides and "saving_law" not in overrides:
        params.pop("saving_law", None)
    if "saving_law" in overrides and "saving" not in overrides:
        params.pop("saving", None)
    params.update(overrides)
    if name == "gas-oracle":
        return _run_gas_experiment(params, out_dir)
    config = config_from_dict(params)
    return run_simulation(config, out_dir, jobs=jobs, preset=name)


def load_samples_csv(path) -> np.ndarray:
    """First numeric column of a CSV; one non-numeric header row is skipped."""
    path = os.fspath(path)
    with open(path) as fh:
        first = fh.readline()
    if not first.strip():
        raise ConfigError(f"no samples in {path}")
    try:
        float(first.split(",")[0])
        skip = 0
    except ValueError:
        skip = 1
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=skip, usecols=0,
                          ndmin=1, dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"could not parse samples from {path}: {exc}") from None
    if data.size == 0:
        raise ConfigError(f"no samples in {path}")
    return data


def analyze_samples(samples, tail_fraction=TAIL_FRACTION) -> dict:
    """Distribution report for an external sample vector."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ConfigError("samples must be non-empty")
    if (x < 0).any():
        raise ConfigError("samples must be non-negative")
    mean = float(x.mean())
    if mean <= 0.0:
        raise ConfigError("samples must include a positive value")
    if not 0.0 < tail_fraction < 1.0 or math.floor(tail_fraction * x.size) < 10:
        raise ConfigError("tail_fraction keeps too few samples (need at least 10)")
    block = _distribution_stats(x, mean, GibbsModel(mean).cdf)
    tail = None
    try:
        fit = stats.hill_tail(x, tail_fraction)
        tail = {"exponent_ccdf": fit.exponent_ccdf,
                "exponent_pdf": fit.exponent_pdf,
                "top_fraction": fit.top_fraction,
                "k_used": fit.k_used, "stderr": fit.stderr}
    except ValueError:
        pass
    return {
        "n_samples": int(x.size),
        "mean": mean,
        "gini": block["gini"],
        "entropy": block["entropy"],
        "gamma_shape": block["gamma_shape"],
        "ks_vs_exponential": block["ks"],
        "tail": tail,
        "tail_no_plateau": block["tail_no_plateau"],
    }
