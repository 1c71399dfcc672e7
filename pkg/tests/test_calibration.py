"""Currency arithmetic and the GDP derivation chain.

The derived figures are re-computed here with ``fractions.Fraction`` so the
oracle shares no floating-point path with the implementation.
"""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gringotts import (CalibrationInputs, CurrencyAmount, DEFAULT_RATES,
                       ExchangeRates, KNUTS_PER_GALLEON, KNUTS_PER_SICKLE,
                       SICKLES_PER_GALLEON, convert, derive_gdp, from_knuts,
                       max_gold_content, to_knuts)

# exact-rational derivation chain, independent of the implementation
_BUDGET = Fraction(1000) * Fraction(7500)
_GDP = _BUDGET / Fraction(44, 1000)
_PER_CAPITA = _GDP / 10_000
_THRESHOLD = _GDP / 100


class TestCoins:
    def test_constants(self):
        assert KNUTS_PER_SICKLE == 29
        assert SICKLES_PER_GALLEON == 17
        assert KNUTS_PER_GALLEON == 493

    def test_to_knuts(self):
        assert to_knuts(2, 3, 5).knuts == 2 * 493 + 3 * 29 + 5
        assert to_knuts(0, 0, 0).knuts == 0
        assert to_knuts(1, 0, 0).galleons == 1.0

    def test_from_knuts_canonical(self):
        assert from_knuts(1078) == (2, 3, 5)
        assert from_knuts(CurrencyAmount(493)) == (1, 0, 0)
        assert from_knuts(492) == (0, 16, 28)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            to_knuts(-1, 0, 0)
        with pytest.raises(ValueError):
            from_knuts(-5)
        with pytest.raises(ValueError):
            CurrencyAmount(-1)

    @given(st.integers(0, 10**9))
    def test_roundtrip(self, total):
        g, s, k = from_knuts(total)
        assert 0 <= s < SICKLES_PER_GALLEON
        assert 0 <= k < KNUTS_PER_SICKLE
        assert to_knuts(g, s, k).knuts == total

    @given(st.integers(0, 10**4), st.integers(0, 10**4), st.integers(0, 10**4))
    def test_non_canonical_triples_collapse(self, g, s, k):
        total = to_knuts(g, s, k)
        assert from_knuts(total) == from_knuts(total.knuts)
        assert total.knuts == 493 * g + 29 * s + k


class TestRates:
    def test_defaults(self):
        assert DEFAULT_RATES.official_gbp_per_galleon == 5.01
        assert DEFAULT_RATES.ppp_usd_per_galleon == 493.0
        assert DEFAULT_RATES.ppp_gbp_per_galleon == 376.90

    def test_convert(self):
        assert convert(100.0, "official-GBP") == pytest.approx(501.0)
        assert convert(1.0, "ppp-USD") == pytest.approx(493.0)
        assert convert(10.0, "ppp-GBP") == pytest.approx(3769.0)

    def test_convert_custom_rates(self):
        rates = ExchangeRates(2.0, 3.0, 4.0)
        assert convert(5.0, "official-GBP", rates) == 10.0
        assert convert(5.0, "ppp-USD", rates) == 15.0
        assert convert(5.0, "ppp-GBP", rates) == 20.0

    def test_unknown_selector(self):
        with pytest.raises(ValueError, match="selector"):
            convert(1.0, "official-USD")

    def test_rates_positive(self):
        with pytest.raises(ValueError):
            ExchangeRates(official_gbp_per_galleon=0.0)
        with pytest.raises(ValueError):
            ExchangeRates(ppp_usd_per_galleon=-1.0)

    def test_gold_ceiling(self):
        # 7.35 USD per coin at 9.61 USD/gram caps the coin's gold mass
        assert max_gold_content(7.35, 9.61) == pytest.approx(0.7648, abs=5e-5)
        assert max_gold_content(9.61, 9.61) == 1.0
        with pytest.raises(ValueError):
            max_gold_content(0.0, 9.61)


class TestDerivation:
    def test_default_chain_exact_rational(self):
        calib = derive_gdp()
        assert calib.education_budget_galleons == float(_BUDGET)
        assert calib.gdp_galleons == pytest.approx(float(_GDP), rel=1e-12)
        assert calib.gdp_per_capita_galleons == pytest.approx(
            float(_PER_CAPITA), rel=1e-12)
        assert calib.loss_threshold_galleons == pytest.approx(
            float(_THRESHOLD), rel=1e-12)
        assert calib.total_bank_assets_galleons == pytest.approx(
            calib.gdp_galleons, rel=1e-12)

    def test_inflated_banking_sector(self):
        inputs = CalibrationInputs(banking_assets_share_of_gdp=4.50)
        calib = derive_gdp(inputs)
        assert calib.total_bank_assets_galleons == pytest.approx(
            4.5 * float(_GDP), rel=1e-12)
        # the GDP chain itself is untouched by the banking share
        assert calib.gdp_galleons == pytest.approx(float(_GDP), rel=1e-12)

    def test_scaling_linearity(self):
        double = derive_gdp(CalibrationInputs(students_per_year=2000))
        base = derive_gdp()
        assert double.gdp_galleons == pytest.approx(2 * base.gdp_galleons)
        assert double.loss_threshold_galleons == pytest.approx(
            2 * base.loss_threshold_galleons)

    @given(st.integers(1, 10**6), st.floats(1.0, 1e6),
           st.floats(0.001, 1.0), st.integers(1, 10**9))
    def test_chain_identities(self, students, tuition, share, population):
        calib = derive_gdp(CalibrationInputs(
            students_per_year=students, tuition_galleons_per_year=tuition,
            education_share_of_gdp=share, population=population))
        assert calib.gdp_galleons == pytest.approx(
            students * tuition / share, rel=1e-12)
        assert calib.loss_threshold_galleons == pytest.approx(
            calib.gdp_galleons / 100, rel=1e-12)
        assert calib.gdp_per_capita_galleons == pytest.approx(
            calib.gdp_galleons / population, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            CalibrationInputs(students_per_year=0)
        with pytest.raises(ValueError):
            CalibrationInputs(population=-3)
        with pytest.raises(ValueError):
            CalibrationInputs(tuition_galleons_per_year=0.0)
        with pytest.raises(ValueError):
            CalibrationInputs(education_share_of_gdp=0.0)
        with pytest.raises(ValueError):
            CalibrationInputs(education_share_of_gdp=1.5)
        with pytest.raises(ValueError):
            CalibrationInputs(banking_assets_share_of_gdp=0.0)
        with pytest.raises(ValueError):
            CalibrationInputs(central_bank_share_of_gdp=0.0)
        with pytest.raises(ValueError):
            # the central bank cannot hold more than the whole sector
            CalibrationInputs(banking_assets_share_of_gdp=0.10,
                              central_bank_share_of_gdp=0.11)
