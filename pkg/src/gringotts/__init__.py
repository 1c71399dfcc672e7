"""Wizarding-economy calibration and bank-network stress simulator.

The package derives the size of a fictional magical economy from a
handful of observable prices, builds its interbank liability network in
two market structures (a single monopolist vault versus five competing
banks), clears correlated asset shocks through the network with
bankruptcy costs, and searches for the cheapest capital injection that
caps tail losses to society.

Heavy numerics run through ``gringotts.kernels``, which selects a
numba-compiled or pure-numpy backend via the ``GRINGOTTS_BACKEND``
environment variable.
"""

from .calibration import (KNUTS_PER_GALLEON, KNUTS_PER_SICKLE,
                          SICKLES_PER_GALLEON, CalibrationInputs,
                          CurrencyAmount, EconomyCalibration, ExchangeRates,
                          DEFAULT_INPUTS, DEFAULT_RATES, convert, derive_gdp,
                          from_knuts, max_gold_content, to_knuts)
from .clearing import (ClearingError, ClearingOutcome, ClearingParams,
                       clear_fictitious_default, clear_picard, loss_weights,
                       societal_loss)
from .harness import (ConfigError, ExperimentConfig, SweepRow, SweepSpec,
                      compare_systems, config_from_dict, rows_to_csv,
                      rows_to_json, run_sweep, solve_injection)
from .network import (FinancialNetwork, MONOPOLY_BANK_NAME, SPLIT_BANK_NAMES,
                      SystemKind, build_monopoly_network, build_network,
                      build_split_network, merge, relative_liabilities)
from .risk import (InjectionCriterion, InjectionResult, expected_shortfall,
                   loss_distribution, minimal_injection,
                   minimal_injection_scalar)
from .shocks import (ScenarioSet, ShockModel, beta_cdf, beta_inverse_cdf,
                     monopoly_assets_from_split, sample_scenarios,
                     standard_normal_cdf, standard_normal_inverse_cdf)

__version__ = "0.1.0"

__all__ = [
    "KNUTS_PER_GALLEON", "KNUTS_PER_SICKLE", "SICKLES_PER_GALLEON",
    "CalibrationInputs", "CurrencyAmount", "EconomyCalibration",
    "ExchangeRates", "DEFAULT_INPUTS", "DEFAULT_RATES", "convert",
    "derive_gdp", "from_knuts", "max_gold_content", "to_knuts",
    "ClearingError", "ClearingOutcome", "ClearingParams",
    "clear_fictitious_default", "clear_picard", "loss_weights",
    "societal_loss",
    "ConfigError", "ExperimentConfig", "SweepRow", "SweepSpec",
    "compare_systems", "config_from_dict", "rows_to_csv", "rows_to_json",
    "run_sweep", "solve_injection",
    "FinancialNetwork", "MONOPOLY_BANK_NAME", "SPLIT_BANK_NAMES",
    "SystemKind", "build_monopoly_network", "build_network",
    "build_split_network", "merge", "relative_liabilities",
    "InjectionCriterion", "InjectionResult", "expected_shortfall",
    "loss_distribution", "minimal_injection", "minimal_injection_scalar",
    "ScenarioSet", "ShockModel", "beta_cdf", "beta_inverse_cdf",
    "monopoly_assets_from_split", "sample_scenarios", "standard_normal_cdf",
    "standard_normal_inverse_cdf",
]
