"""Parameterised tax-and-transfer rules computing household disposable income.

The engine is a deliberately small, fully parameterised system covering the
rules the scenarios manipulate: a progressive income tax with a levy and a
low-income offset, five means-tested payments sharing one taper mechanism, a
flat-rate wage subsidy, one-off payments to flagged welfare recipients, a
temporary benefit supplement, and a free-childcare window.

Conventions: all amounts are per fortnight; tax is assessed per person on
annualised (x26) private income; government payments are not taxed.
Households have no asset records, so asset tests run on assets imputed from
investment income at a fixed yield.

Regime parameters are data (see ``load_regime``); the repo ships a stylised
baseline parameter file and a crisis-package file.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import ConfigError
from .records import (
    HouseholdRecord,
    LabourState,
    Marital,
    MonthId,
    PersonRecord,
    WelfareFlag,
)

FORTNIGHTS_PER_YEAR = 26.0
ASSET_IMPUTATION_YIELD = 0.025  # annual yield used to impute assets

BENEFIT_NAMES = ("jobseeker", "pension", "parenting", "youth_allowance", "ftb")

ONE_OFF_QUALIFYING_FLAGS = frozenset(
    {WelfareFlag.PENSION, WelfareFlag.JOBSEEKER, WelfareFlag.FTB}
)

_FLAG_FOR_BENEFIT = {
    "pension": WelfareFlag.PENSION,
    "parenting": WelfareFlag.PARENTING,
    "youth_allowance": WelfareFlag.YOUTH_ALLOWANCE,
    "ftb": WelfareFlag.FTB,
}


@dataclass(frozen=True)
class TaxSchedule:
    """Progressive brackets plus a shade-in levy and a withdrawable offset.

    ``brackets`` are (lower threshold, marginal rate) pairs over annual
    income, ascending, first threshold 0.
    """

    brackets: tuple[tuple[float, float], ...]
    levy_rate: float = 0.0
    levy_threshold: float = 0.0
    levy_shade_in_rate: float = 0.10
    offset_amount: float = 0.0
    offset_threshold: float = 0.0
    offset_withdrawal_rate: float = 0.0


@dataclass(frozen=True)
class BenefitRule:
    base_rate: float  # per fortnight
    free_area: float = 0.0  # own income disregarded, per fortnight
    taper: float = 0.0
    partner_free_area: float = 0.0
    partner_taper: float = 0.0
    asset_threshold: float = float("inf")
    asset_test_active: bool = False
    activity_test_active: bool = True


@dataclass(frozen=True)
class OneOffPayment:
    amount: float = 0.0
    months: tuple[MonthId, ...] = ()


@dataclass(frozen=True)
class WageSubsidy:
    rate: float = 0.0
    active: bool = False


@dataclass(frozen=True)
class FreeChildcare:
    active: bool = False
    months: tuple[MonthId, ...] = ()


@dataclass(frozen=True)
class CovidMeasures:
    supplement_rate: float = 0.0
    supplement_benefits: tuple[str, ...] = ("jobseeker", "parenting", "youth_allowance")
    one_off: OneOffPayment = field(default_factory=OneOffPayment)
    jobkeeper: WageSubsidy = field(default_factory=WageSubsidy)
    free_childcare: FreeChildcare = field(default_factory=FreeChildcare)


@dataclass(frozen=True)
class PolicyRegime:
    regime_id: str
    tax: TaxSchedule
    benefits: Mapping[str, BenefitRule]
    covid: CovidMeasures = field(default_factory=CovidMeasures)
    effective_months: tuple[MonthId, ...] | None = None  # None: all months


def validate_regime(regime: PolicyRegime) -> None:
    brackets = regime.tax.brackets
    if not brackets or brackets[0][0] != 0:
        raise ConfigError(f"regime {regime.regime_id}: brackets must start at 0")
    for (lo1, r1), (lo2, r2) in zip(brackets, brackets[1:]):
        if lo2 <= lo1:
            raise ConfigError(
                f"regime {regime.regime_id}: bracket thresholds must increase"
            )
    for _, rate in brackets:
        if not 0.0 <= rate <= 1.0:
            raise ConfigError(f"regime {regime.regime_id}: rate outside [0, 1]")
    for name, rule in regime.benefits.items():
        if rule.base_rate < 0 or rule.free_area < 0 or rule.partner_free_area < 0:
            raise ConfigError(f"regime {regime.regime_id}: negative amount in {name}")
        if not 0.0 <= rule.taper <= 1.0 or not 0.0 <= rule.partner_taper <= 1.0:
            raise ConfigError(f"regime {regime.regime_id}: taper outside [0, 1] in {name}")
    if regime.covid.supplement_rate < 0 or regime.covid.jobkeeper.rate < 0:
        raise ConfigError(f"regime {regime.regime_id}: negative crisis amount")


def _check_month(regime: PolicyRegime, month: MonthId) -> None:
    if regime.effective_months is not None and month not in regime.effective_months:
        raise ConfigError(
            f"regime {regime.regime_id} is not defined for month {month}"
        )


# ---------------------------------------------------------------------------
# JSON serialisation
# ---------------------------------------------------------------------------


def regime_to_dict(regime: PolicyRegime) -> dict:
    return {
        "regime_id": regime.regime_id,
        "tax": {
            "brackets": [list(b) for b in regime.tax.brackets],
            "levy_rate": regime.tax.levy_rate,
            "levy_threshold": regime.tax.levy_threshold,
            "levy_shade_in_rate": regime.tax.levy_shade_in_rate,
            "offset_amount": regime.tax.offset_amount,
            "offset_threshold": regime.tax.offset_threshold,
            "offset_withdrawal_rate": regime.tax.offset_withdrawal_rate,
        },
        "benefits": {
            name: {
                "base_rate": rule.base_rate,
                "free_area": rule.free_area,
                "taper": rule.taper,
                "partner_free_area": rule.partner_free_area,
                "partner_taper": rule.partner_taper,
                # JSON has no infinity; an effectively-unbounded test serialises as a huge float
                "asset_threshold": min(rule.asset_threshold, 1e308),
                "asset_test_active": rule.asset_test_active,
                "activity_test_active": rule.activity_test_active,
            }
            for name, rule in regime.benefits.items()
        },
        "covid": {
            "supplement_rate": regime.covid.supplement_rate,
            "supplement_benefits": list(regime.covid.supplement_benefits),
            "one_off": {
                "amount": regime.covid.one_off.amount,
                "months": [str(m) for m in regime.covid.one_off.months],
            },
            "jobkeeper": {
                "rate": regime.covid.jobkeeper.rate,
                "active": regime.covid.jobkeeper.active,
            },
            "free_childcare": {
                "active": regime.covid.free_childcare.active,
                "months": [str(m) for m in regime.covid.free_childcare.months],
            },
        },
        "effective_months": (
            None
            if regime.effective_months is None
            else [str(m) for m in regime.effective_months]
        ),
    }


def regime_from_dict(data: dict) -> PolicyRegime:
    try:
        tax = TaxSchedule(
            brackets=tuple((float(a), float(b)) for a, b in data["tax"]["brackets"]),
            levy_rate=float(data["tax"].get("levy_rate", 0.0)),
            levy_threshold=float(data["tax"].get("levy_threshold", 0.0)),
            levy_shade_in_rate=float(data["tax"].get("levy_shade_in_rate", 0.10)),
            offset_amount=float(data["tax"].get("offset_amount", 0.0)),
            offset_threshold=float(data["tax"].get("offset_threshold", 0.0)),
            offset_withdrawal_rate=float(data["tax"].get("offset_withdrawal_rate", 0.0)),
        )
        benefits = {}
        for name, rule in data["benefits"].items():
            benefits[name] = BenefitRule(
                base_rate=float(rule["base_rate"]),
                free_area=float(rule.get("free_area", 0.0)),
                taper=float(rule.get("taper", 0.0)),
                partner_free_area=float(rule.get("partner_free_area", 0.0)),
                partner_taper=float(rule.get("partner_taper", 0.0)),
                asset_threshold=float(rule.get("asset_threshold", float("inf"))),
                asset_test_active=bool(rule.get("asset_test_active", False)),
                activity_test_active=bool(rule.get("activity_test_active", True)),
            )
        covid_data = data.get("covid", {})
        covid = CovidMeasures(
            supplement_rate=float(covid_data.get("supplement_rate", 0.0)),
            supplement_benefits=tuple(
                covid_data.get(
                    "supplement_benefits", ["jobseeker", "parenting", "youth_allowance"]
                )
            ),
            one_off=OneOffPayment(
                amount=float(covid_data.get("one_off", {}).get("amount", 0.0)),
                months=tuple(
                    MonthId.parse(m)
                    for m in covid_data.get("one_off", {}).get("months", [])
                ),
            ),
            jobkeeper=WageSubsidy(
                rate=float(covid_data.get("jobkeeper", {}).get("rate", 0.0)),
                active=bool(covid_data.get("jobkeeper", {}).get("active", False)),
            ),
            free_childcare=FreeChildcare(
                active=bool(covid_data.get("free_childcare", {}).get("active", False)),
                months=tuple(
                    MonthId.parse(m)
                    for m in covid_data.get("free_childcare", {}).get("months", [])
                ),
            ),
        )
        months = data.get("effective_months")
        regime = PolicyRegime(
            regime_id=str(data["regime_id"]),
            tax=tax,
            benefits=benefits,
            covid=covid,
            effective_months=(
                None if months is None else tuple(MonthId.parse(m) for m in months)
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed regime file: {exc}") from exc
    validate_regime(regime)
    return regime


def load_regime(path: str | Path) -> PolicyRegime:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"regime file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return regime_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# rule evaluation
# ---------------------------------------------------------------------------


def jobkeeper_wage(
    p: PersonRecord, regime: PolicyRegime, month: MonthId
) -> tuple[float, float]:
    """(wage paid, subsidy top-up) for the person under the regime.

    A flagged worker is paid at least the flat subsidy rate; the top-up above
    the usual wage counts as gross income. Above the rate the subsidy offsets
    employer cost and take-home pay is unchanged.
    """
    _check_month(regime, month)
    jk = regime.covid.jobkeeper
    if jk.active and p.jobkeeper_flag:
        paid = max(p.wage_income, jk.rate)
        return paid, paid - p.wage_income
    return p.wage_income, 0.0


def income_tax(annual_income: float, schedule: TaxSchedule) -> float:
    """Annual tax: progressive brackets plus shade-in levy minus a
    non-refundable offset, floored at zero and continuous in income."""
    if annual_income <= 0:
        return 0.0
    base = 0.0
    brackets = schedule.brackets
    for i, (lo, rate) in enumerate(brackets):
        hi = brackets[i + 1][0] if i + 1 < len(brackets) else float("inf")
        if annual_income > lo:
            base += rate * (min(annual_income, hi) - lo)
        else:
            break
    offset = 0.0
    if schedule.offset_amount > 0:
        offset = max(
            0.0,
            schedule.offset_amount
            - schedule.offset_withdrawal_rate
            * max(0.0, annual_income - schedule.offset_threshold),
        )
    levy = 0.0
    if schedule.levy_rate > 0 and annual_income > schedule.levy_threshold:
        levy = min(
            schedule.levy_shade_in_rate * (annual_income - schedule.levy_threshold),
            schedule.levy_rate * annual_income,
        )
    return max(0.0, base - offset) + levy


def _imputed_assets(p: PersonRecord) -> float:
    return p.investment_income * FORTNIGHTS_PER_YEAR / ASSET_IMPUTATION_YIELD


def _own_income(p: PersonRecord, regime: PolicyRegime, month: MonthId) -> float:
    paid, _ = jobkeeper_wage(p, regime, month)
    return paid + p.business_income + p.investment_income + p.other_income


def _partner_of(
    p: PersonRecord, household: HouseholdRecord
) -> PersonRecord | None:
    if p.marital is not Marital.PARTNERED:
        return None
    candidates = [
        q
        for q in household.adults()
        if q.person_id != p.person_id and q.marital is Marital.PARTNERED
    ]
    return min(candidates, key=lambda q: q.person_id) if candidates else None


def _qualifies(p: PersonRecord, name: str, rule: BenefitRule) -> bool:
    if name == "jobseeker":
        if p.labour_state is LabourState.UNEMPLOYED:
            return True
        return (
            not rule.activity_test_active
            and p.employed_since_baseline_flag
            and p.labour_state is LabourState.NOT_IN_LABOUR_FORCE
        )
    return _FLAG_FOR_BENEFIT[name] in p.welfare_flags


def benefit_entitlement(
    p: PersonRecord,
    household: HouseholdRecord,
    regime: PolicyRegime,
    month: MonthId,
) -> dict[str, float]:
    """Fortnightly payments by benefit name for one person (full take-up).

    Each payment is the base rate withdrawn at the own-income taper above the
    free area and at the partner taper above the partner threshold, zeroed by
    an active asset test, with the supplement added to any positive payment
    of a qualifying type.
    """
    _check_month(regime, month)
    if not p.is_adult:
        return {}
    own = _own_income(p, regime, month)
    partner = _partner_of(p, household)
    partner_income = (
        _own_income(partner, regime, month) if partner is not None else 0.0
    )
    out: dict[str, float] = {}
    for name, rule in regime.benefits.items():
        if not _qualifies(p, name, rule):
            continue
        if rule.asset_test_active and _imputed_assets(p) > rule.asset_threshold:
            continue
        payment = (
            rule.base_rate
            - rule.taper * max(0.0, own - rule.free_area)
            - rule.partner_taper * max(0.0, partner_income - rule.partner_free_area)
        )
        if payment <= 0:
            continue
        if (
            regime.covid.supplement_rate > 0
            and name in regime.covid.supplement_benefits
        ):
            payment += regime.covid.supplement_rate
        out[name] = payment
    return out


def one_off_payments(p: PersonRecord, regime: PolicyRegime, month: MonthId) -> float:
    """One-off support payment in a configured month for flagged recipients."""
    one_off = regime.covid.one_off
    if month not in one_off.months:
        return 0.0
    if p.welfare_flags & ONE_OFF_QUALIFYING_FLAGS:
        return one_off.amount
    return 0.0


def childcare_out_of_pocket(
    household: HouseholdRecord, regime: PolicyRegime, month: MonthId
) -> float:
    fc = regime.covid.free_childcare
    if fc.active and month in fc.months:
        return 0.0
    return household.childcare_cost


@dataclass(frozen=True)
class DisposableIncomeResult:
    """Household accounting under one regime and month, all per fortnight.

    disposable = gross_market + jobkeeper + benefits + one_offs - tax holds
    exactly, as do the after-childcare and after-housing identities.
    """

    household_id: str
    gross_market_income: float  # private income at usual wages, subsidy excluded
    jobkeeper_amount: float
    benefits_by_type: Mapping[str, float]
    one_off_payments: float
    income_tax: float
    disposable_income: float
    childcare_out_of_pocket: float
    disposable_after_childcare: float
    after_housing_income: float

    @property
    def total_benefits(self) -> float:
        return sum(self.benefits_by_type.values())

    @property
    def gross_income_with_subsidy(self) -> float:
        return self.gross_market_income + self.jobkeeper_amount


def compute_disposable(
    household: HouseholdRecord, regime: PolicyRegime, month: MonthId
) -> DisposableIncomeResult:
    """Evaluate the full rule set for one household."""
    _check_month(regime, month)
    gross_market = 0.0
    subsidy = 0.0
    tax = 0.0
    one_offs = 0.0
    benefits: dict[str, float] = {}
    for p in household.members:
        paid, top_up = jobkeeper_wage(p, regime, month)
        private = p.business_income + p.investment_income + p.other_income
        gross_market += p.wage_income + private
        subsidy += top_up
        tax += income_tax((paid + private) * FORTNIGHTS_PER_YEAR, regime.tax) / (
            FORTNIGHTS_PER_YEAR
        )
        one_offs += one_off_payments(p, regime, month)
        for name, amount in benefit_entitlement(p, household, regime, month).items():
            benefits[name] = benefits.get(name, 0.0) + amount
    total_benefits = sum(benefits.values())
    disposable = gross_market + subsidy + total_benefits + one_offs - tax
    childcare = childcare_out_of_pocket(household, regime, month)
    after_childcare = disposable - childcare
    return DisposableIncomeResult(
        household_id=household.household_id,
        gross_market_income=gross_market,
        jobkeeper_amount=subsidy,
        benefits_by_type=benefits,
        one_off_payments=one_offs,
        income_tax=tax,
        disposable_income=disposable,
        childcare_out_of_pocket=childcare,
        disposable_after_childcare=after_childcare,
        after_housing_income=after_childcare - household.housing_cost,
    )


def compute_sample(
    sample, regime: PolicyRegime, month: MonthId
) -> dict[str, DisposableIncomeResult]:
    """Disposable-income results for every household, keyed by id."""
    return {
        h.household_id: compute_disposable(h, regime, month)
        for h in sample.households
    }
