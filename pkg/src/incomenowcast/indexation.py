"""Uprating of income components from survey vintage to an analysis month.

Wages (and business income) move with an economy-wide uprating factor to the
baseline month times an industry-by-age-band payroll factor for the analysis
month; investment income compounds at a fixed annual real return to the
baseline and then follows a monthly market index; remaining income and
childcare costs follow a consumer-price index. All adjustments are
multiplicative, so zero components stay zero and within-cell wage ratios are
preserved.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from .errors import IndexationError
from .records import HouseholdRecord, MonthId, PersonRecord, WeightedSample
from .synthpop import PayrollSeries, age_band

DEFAULT_ANNUAL_REAL_RETURN = 0.025


@dataclass(frozen=True)
class IndexTables:
    baseline_month: MonthId
    awe_factor: float  # wage uprating, collection vintage -> baseline month
    payroll: PayrollSeries
    investment: Mapping[MonthId, float]  # market index relative to baseline
    cpi: Mapping[MonthId, float]
    annual_real_return: float = DEFAULT_ANNUAL_REAL_RETURN
    years_to_baseline: float = 2.0  # collection vintage -> baseline, in years

    def __post_init__(self):
        if self.awe_factor <= 0:
            raise ValueError("awe_factor must be positive")
        for name, table in (("investment", self.investment), ("cpi", self.cpi)):
            for month, factor in table.items():
                if factor <= 0:
                    raise ValueError(f"{name} factor must be positive ({month})")
            base = table.get(self.baseline_month)
            if base is not None and base != 1.0:
                raise ValueError(f"{name} baseline factor must equal 1.0")

    def investment_factor(self, month: MonthId) -> float:
        try:
            monthly = self.investment[month]
        except KeyError:
            raise IndexationError(f"investment table missing month {month}")
        return (1.0 + self.annual_real_return) ** self.years_to_baseline * monthly

    def cpi_factor(self, month: MonthId) -> float:
        try:
            return self.cpi[month]
        except KeyError:
            raise IndexationError(f"cpi table missing month {month}")

    def wage_factor(self, person: PersonRecord, month: MonthId) -> float:
        if month == self.baseline_month:
            return self.awe_factor
        try:
            payroll = self.payroll.wage_factor(person.industry, age_band(person.age), month)
        except KeyError:
            raise IndexationError(f"payroll table missing month {month}")
        return self.awe_factor * payroll


def index_person(p: PersonRecord, month: MonthId, tables: IndexTables) -> PersonRecord:
    """Return a copy of the record with incomes indexed to the month."""
    if month < tables.baseline_month:
        raise IndexationError(
            f"analysis month {month} precedes baseline {tables.baseline_month}"
        )
    wage_f = tables.wage_factor(p, month)
    inv_f = tables.investment_factor(month)
    cpi_f = tables.cpi_factor(month)
    return replace(
        p,
        wage_income=p.wage_income * wage_f,
        business_income=p.business_income * wage_f,
        investment_income=p.investment_income * inv_f,
        other_income=p.other_income * cpi_f,
    )


def index_household(
    h: HouseholdRecord, month: MonthId, tables: IndexTables
) -> HouseholdRecord:
    cpi_f = tables.cpi_factor(month)
    return replace(
        h,
        members=tuple(index_person(p, month, tables) for p in h.members),
        childcare_cost=h.childcare_cost * cpi_f,
    )


def index_sample(
    sample: WeightedSample, month: MonthId, tables: IndexTables
) -> WeightedSample:
    households = tuple(index_household(h, month, tables) for h in sample.households)
    return WeightedSample(month=month, households=households)
