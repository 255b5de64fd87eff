"""kinex: kinetic-exchange market simulator with an ideal-gas cross-check.

Money-conserving pairwise trades between agents relax to an exponential
money distribution; a shared saving fraction produces a Gamma-like shape
with depleted low-money density; quenched per-agent saving fractions
produce a power-law rich tail.  A Beta(3/2,3/2) pair-collision gas
sampler provides the Maxwell-Boltzmann reference channel.
"""

from .config import ConfigError, config_from_dict, config_to_dict, parse_config
from .gas import (GasEnsemble, MBModel, beta_3_2_cdf, beta_3_2_quantile,
                  collide, gibbs_pdf, init_gas, mb_pdf, run_collisions)
from .harness import (ExperimentReport, PRESETS, analyze_samples, emit_csv,
                      load_samples_csv, read_report_json, run_preset,
                      run_simulation, write_report_json)
from .market import (CONSERVATION_RTOL, GibbsModel, Population, SavingSpec,
                     SimConfig, SnapshotSeries, apply_exchanges,
                     detect_steady_state, dynamics_rng, exchange_pair,
                     init_population, init_rng, make_population, run, step)
from .stats import (DegenerateSampleError, GammaFit, Histogram, TailFit,
                    ccdf_points, fit_gamma_moments, gini, hill_no_plateau,
                    hill_tail, histogram, ks_distance, ks_two_sample,
                    shannon_entropy)

__version__ = "0.1.0"

__all__ = [
    "CONSERVATION_RTOL", "ConfigError", "DegenerateSampleError",
    "ExperimentReport", "GammaFit", "GasEnsemble", "GibbsModel", "Histogram",
    "MBModel", "PRESETS", "Population", "SavingSpec", "SimConfig",
    "SnapshotSeries", "TailFit", "analyze_samples", "apply_exchanges",
    "beta_3_2_cdf", "beta_3_2_quantile", "ccdf_points", "collide",
    "config_from_dict", "config_to_dict", "detect_steady_state",
    "dynamics_rng", "emit_csv", "exchange_pair", "fit_gamma_moments",
    "gibbs_pdf", "gini", "hill_no_plateau", "hill_tail", "histogram",
    "init_gas", "init_population", "init_rng", "ks_distance",
    "ks_two_sample", "load_samples_csv", "make_population", "mb_pdf",
    "parse_config", "read_report_json", "run", "run_collisions",
    "run_preset", "run_simulation", "shannon_entropy", "step",
    "write_report_json",
]
