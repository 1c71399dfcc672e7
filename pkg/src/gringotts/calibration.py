"""Economy-wide constants derived from raw Wizarding-UK observations.

The derivation chain is short and exact:

    tuition x students                 -> education budget
    budget / education share of GDP    -> GDP
    GDP / population                   -> GDP per capita
    1% of GDP                          -> acceptable-loss threshold
    banking share x GDP                -> total banking-sector assets

Coin arithmetic (Galleons / Sickles / Knuts) is integer-exact.  Everything
downstream of the budget works in real-valued Galleons, since the derived
quantities are fractional (GDP per capita is 17,045.45 G, not a coin count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

KNUTS_PER_SICKLE = 29
SICKLES_PER_GALLEON = 17
KNUTS_PER_GALLEON = KNUTS_PER_SICKLE * SICKLES_PER_GALLEON  # 493

#: Official USD rate quoted alongside the GBP one; kept for the gold bound.
OFFICIAL_USD_PER_GALLEON = 7.35
#: Reference gold price (USD per gram) used for the default no-arbitrage bound.
GOLD_USD_PER_GRAM = 9.61

RATE_SELECTORS = ("official-GBP", "ppp-USD", "ppp-GBP")


@dataclass(frozen=True)
class CurrencyAmount:
    """An exact coin amount, stored as a count of Knuts (the smallest coin)."""

    knuts: int

    def __post_init__(self):
        if self.knuts < 0:
            raise ValueError("coin amounts are non-negative")

    @property
    def galleons(self) -> float:
        return self.knuts / KNUTS_PER_GALLEON


def to_knuts(galleons: int, sickles: int, knuts: int) -> CurrencyAmount:
    """Collapse a (galleons, sickles, knuts) triple into Knuts."""
    if galleons < 0 or sickles < 0 or knuts < 0:
        raise ValueError("coin counts are non-negative")
    total = KNUTS_PER_GALLEON * galleons + KNUTS_PER_SICKLE * sickles + knuts
    return CurrencyAmount(total)


def from_knuts(amount: CurrencyAmount | int) -> tuple[int, int, int]:
    """Canonical (galleons, sickles, knuts): 0 <= sickles < 17, 0 <= knuts < 29."""
    total = amount.knuts if isinstance(amount, CurrencyAmount) else int(amount)
    if total < 0:
        raise ValueError("coin amounts are non-negative")
    galleons, rem = divmod(total, KNUTS_PER_GALLEON)
    sickles, knuts = divmod(rem, KNUTS_PER_SICKLE)
    return galleons, sickles, knuts


@dataclass(frozen=True)
class ExchangeRates:
    """Galleon exchange rates: the official peg and the newspaper-index PPP."""

    official_gbp_per_galleon: float = 5.01
    ppp_usd_per_galleon: float = 493.0
    ppp_gbp_per_galleon: float = 376.90

    def __post_init__(self):
        for value in (self.official_gbp_per_galleon,
                      self.ppp_usd_per_galleon,
                      self.ppp_gbp_per_galleon):
            if not (value > 0 and math.isfinite(value)):
                raise ValueError("exchange rates must be strictly positive")


DEFAULT_RATES = ExchangeRates()


def convert(amount_galleons: float, rate_selector: str,
            rates: ExchangeRates = DEFAULT_RATES) -> float:
    """Galleons into Muggle currency under the selected rate."""
    if not math.isfinite(amount_galleons):
        raise ValueError("amount must be finite")
    table = {
        "official-GBP": rates.official_gbp_per_galleon,
        "ppp-USD": rates.ppp_usd_per_galleon,
        "ppp-GBP": rates.ppp_gbp_per_galleon,
    }
    try:
        rate = table[rate_selector]
    except KeyError:
        raise ValueError(
            f"unknown rate selector {rate_selector!r}; expected one of {RATE_SELECTORS}"
        ) from None
    return amount_galleons * rate


def max_gold_content(usd_per_galleon: float, gold_usd_per_gram: float) -> float:
    """No-arbitrage ceiling on grams of gold per Galleon coin."""
    if usd_per_galleon <= 0 or gold_usd_per_gram <= 0:
        raise ValueError("rates must be strictly positive")
    return usd_per_galleon / gold_usd_per_gram


@dataclass(frozen=True)
class CalibrationInputs:
    """Raw observations the whole derivation starts from.

    Defaults are the canonical Wizarding-UK record; the CLI can override any
    field.  ``banking_assets_share_of_gdp`` may exceed 1 (the 450%-of-GDP
    sizing is a supported override, not a second calibration path).
    """

    students_per_year: int = 1000
    tuition_galleons_per_year: float = 7500.0
    education_share_of_gdp: float = 0.044
    population: int = 10_000
    banking_assets_share_of_gdp: float = 1.00
    central_bank_share_of_gdp: float = 0.11

    def __post_init__(self):
        if self.students_per_year <= 0:
            raise ValueError("students_per_year must be positive")
        if self.population <= 0:
            raise ValueError("population must be positive")
        if not (self.tuition_galleons_per_year > 0
                and math.isfinite(self.tuition_galleons_per_year)):
            raise ValueError("tuition_galleons_per_year must be positive")
        if not 0.0 < self.education_share_of_gdp <= 1.0:
            raise ValueError("education_share_of_gdp must lie in (0, 1]")
        if not (self.banking_assets_share_of_gdp > 0
                and math.isfinite(self.banking_assets_share_of_gdp)):
            raise ValueError("banking_assets_share_of_gdp must be positive")
        if not 0.0 < self.central_bank_share_of_gdp <= 1.0:
            raise ValueError("central_bank_share_of_gdp must lie in (0, 1]")
        if self.central_bank_share_of_gdp > self.banking_assets_share_of_gdp:
            raise ValueError(
                "central_bank_share_of_gdp cannot exceed banking_assets_share_of_gdp")


DEFAULT_INPUTS = CalibrationInputs()


@dataclass(frozen=True)
class EconomyCalibration:
    """Derived constants every other module consumes."""

    inputs: CalibrationInputs
    education_budget_galleons: float
    gdp_galleons: float
    gdp_per_capita_galleons: float
    loss_threshold_galleons: float
    total_bank_assets_galleons: float


def derive_gdp(inputs: CalibrationInputs = DEFAULT_INPUTS) -> EconomyCalibration:
    """Run the derivation chain; the threshold is pinned at 1% of GDP."""
    budget = inputs.students_per_year * inputs.tuition_galleons_per_year
    gdp = budget / inputs.education_share_of_gdp
    return EconomyCalibration(
        inputs=inputs,
        education_budget_galleons=budget,
        gdp_galleons=gdp,
        gdp_per_capita_galleons=gdp / inputs.population,
        loss_threshold_galleons=0.01 * gdp,
        total_bank_assets_galleons=inputs.banking_assets_share_of_gdp * gdp,
    )
