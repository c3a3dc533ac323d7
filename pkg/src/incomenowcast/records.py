"""Unit-record data model: persons, households and weighted population samples.

All currency amounts are carried per fortnight. Monthly table output is the
fortnightly amount times 26/12, applied at the reporting layer only.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

from .errors import DataError

ADULT_AGE = 15
FORTNIGHTS_PER_MONTH = 26.0 / 12.0


class Sex(str, enum.Enum):
    MALE = "male"
    FEMALE = "female"


class Marital(str, enum.Enum):
    PARTNERED = "partnered"
    SINGLE = "single"


class Education(enum.IntEnum):
    BELOW_BACHELOR = 0
    BACHELOR_OR_HIGHER = 1


class LabourState(str, enum.Enum):
    EMPLOYED = "employed"
    UNEMPLOYED = "unemployed"
    NOT_IN_LABOUR_FORCE = "nilf"


class Industry(str, enum.Enum):
    """The 19 industry divisions used for shock profiles and payroll cells."""

    AGRICULTURE_FORESTRY_FISHING = "agriculture_forestry_fishing"
    MINING = "mining"
    MANUFACTURING = "manufacturing"
    ELECTRICITY_GAS_WATER_WASTE = "electricity_gas_water_waste"
    CONSTRUCTION = "construction"
    WHOLESALE_TRADE = "wholesale_trade"
    RETAIL_TRADE = "retail_trade"
    ACCOMMODATION_FOOD = "accommodation_food"
    TRANSPORT_POSTAL_WAREHOUSING = "transport_postal_warehousing"
    INFORMATION_MEDIA_TELECOM = "information_media_telecom"
    FINANCIAL_INSURANCE = "financial_insurance"
    RENTAL_HIRING_REAL_ESTATE = "rental_hiring_real_estate"
    PROFESSIONAL_SCIENTIFIC_TECHNICAL = "professional_scientific_technical"
    ADMINISTRATIVE_SUPPORT = "administrative_support"
    PUBLIC_ADMINISTRATION_SAFETY = "public_administration_safety"
    EDUCATION_TRAINING = "education_training"
    HEALTH_CARE_SOCIAL_ASSISTANCE = "health_care_social_assistance"
    ARTS_RECREATION = "arts_recreation"
    OTHER_SERVICES = "other_services"


class Occupation(enum.IntEnum):
    MANAGERS = 1
    PROFESSIONALS = 2
    TECHNICIANS_TRADES = 3
    COMMUNITY_PERSONAL_SERVICE = 4
    CLERICAL_ADMINISTRATIVE = 5
    SALES = 6
    MACHINERY_OPERATORS = 7
    LABOURERS = 8


class State(str, enum.Enum):
    NSW = "nsw"
    VIC = "vic"
    QLD = "qld"
    SA = "sa"
    WA = "wa"
    TAS = "tas"
    NT = "nt"
    ACT = "act"


class WelfareFlag(str, enum.Enum):
    PENSION = "pension"
    JOBSEEKER = "jobseeker"
    PARENTING = "parenting"
    YOUTH_ALLOWANCE = "youth_allowance"
    FTB = "ftb"


@dataclass(frozen=True, order=True)
class MonthId:
    """Calendar month with total ordering; serialised as ``YYYY-MM``."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")

    @classmethod
    def parse(cls, text: str) -> "MonthId":
        try:
            y, m = text.strip().split("-")
            return cls(int(y), int(m))
        except (ValueError, AttributeError) as exc:
            raise ValueError(f"cannot parse month {text!r}, expected YYYY-MM") from exc

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"

    def plus(self, months: int) -> "MonthId":
        idx = self.year * 12 + (self.month - 1) + months
        return MonthId(idx // 12, idx % 12 + 1)

    def months_since(self, other: "MonthId") -> int:
        return (self.year - other.year) * 12 + (self.month - other.month)


@dataclass(frozen=True, slots=True)
class PersonRecord:
    person_id: str
    household_id: str
    age: int
    sex: Sex
    marital: Marital
    overseas_born: bool
    education: Education
    labour_state: LabourState
    industry: Industry | None
    occupation: Occupation | None
    usual_hours: float
    n_jobs: int
    unemployment_duration: float
    wage_income: float
    business_income: float
    investment_income: float
    other_income: float
    welfare_flags: frozenset[WelfareFlag] = frozenset()
    jobkeeper_flag: bool = False
    employed_since_baseline_flag: bool = False

    @property
    def is_adult(self) -> bool:
        return self.age >= ADULT_AGE

    @property
    def employed(self) -> bool:
        return self.labour_state is LabourState.EMPLOYED

    def market_income(self) -> float:
        """Wage, business and investment income, before any wage subsidy."""
        return self.wage_income + self.business_income + self.investment_income


@dataclass(frozen=True, slots=True)
class HouseholdRecord:
    household_id: str
    members: tuple[PersonRecord, ...]
    n_children_0_4: int
    n_children_5_14: int
    housing_cost: float
    childcare_cost: float
    state: State
    weight: float

    @property
    def size(self) -> int:
        return len(self.members)

    def adults(self) -> tuple[PersonRecord, ...]:
        return tuple(p for p in self.members if p.is_adult)


@dataclass(frozen=True)
class WeightedSample:
    """A weighted collection of households representing one month's population."""

    month: MonthId
    households: tuple[HouseholdRecord, ...]

    def total_weight(self) -> float:
        return sum(h.weight for h in self.households)

    def persons(self) -> Iterator[tuple[HouseholdRecord, PersonRecord]]:
        for h in self.households:
            for p in h.members:
                yield h, p

    def adults(self) -> Iterator[tuple[HouseholdRecord, PersonRecord]]:
        for h, p in self.persons():
            if p.is_adult:
                yield h, p

    def by_id(self) -> dict[str, HouseholdRecord]:
        return {h.household_id: h for h in self.households}


def validate_person(p: PersonRecord) -> None:
    """Raise DataError if the record violates a unit-record invariant."""
    if p.age < 0:
        raise DataError(f"person {p.person_id}: negative age")
    if p.usual_hours < 0 or p.n_jobs < 0 or p.unemployment_duration < 0:
        raise DataError(f"person {p.person_id}: negative hours, jobs or duration")
    if p.wage_income < 0 or p.other_income < 0:
        raise DataError(f"person {p.person_id}: negative wage or other income")
    employed = p.labour_state is LabourState.EMPLOYED
    if employed != (p.usual_hours > 0):
        raise DataError(
            f"person {p.person_id}: usual_hours {p.usual_hours} inconsistent "
            f"with labour state {p.labour_state.value}"
        )
    if p.wage_income > 0 and not (employed or p.jobkeeper_flag):
        raise DataError(f"person {p.person_id}: wage income without employment")
    if employed and p.industry is None:
        raise DataError(f"person {p.person_id}: employed without industry")
    for f in (p.wage_income, p.business_income, p.investment_income, p.other_income):
        if not math.isfinite(f):
            raise DataError(f"person {p.person_id}: non-finite income component")


def validate_household(h: HouseholdRecord) -> None:
    if not h.members:
        raise DataError(f"household {h.household_id}: empty household")
    if not math.isfinite(h.weight) or h.weight < 0:
        raise DataError(f"household {h.household_id}: invalid weight {h.weight}")
    if h.housing_cost < 0 or h.childcare_cost < 0:
        raise DataError(f"household {h.household_id}: negative cost")
    n04 = sum(1 for p in h.members if p.age <= 4)
    n514 = sum(1 for p in h.members if 5 <= p.age <= 14)
    if (n04, n514) != (h.n_children_0_4, h.n_children_5_14):
        raise DataError(
            f"household {h.household_id}: child counts ({h.n_children_0_4}, "
            f"{h.n_children_5_14}) do not match member ages ({n04}, {n514})"
        )
    for p in h.members:
        if p.household_id != h.household_id:
            raise DataError(
                f"household {h.household_id}: member {p.person_id} carries "
                f"household_id {p.household_id}"
            )
        validate_person(p)


def validate_sample(sample: WeightedSample) -> None:
    if not sample.households:
        raise DataError("empty sample")
    for h in sample.households:
        validate_household(h)
    if sample.total_weight() <= 0:
        raise DataError("sample has zero total weight")


def equivalence_scale(household: HouseholdRecord) -> float:
    """Modified OECD scale: 1.0 for the first (oldest) member, 0.5 per further
    member aged 15+ and 0.3 per child under 15."""
    if not household.members:
        raise DataError("empty household")
    ages = sorted((p.age for p in household.members), reverse=True)
    scale = 1.0
    for age in ages[1:]:
        scale += 0.5 if age >= ADULT_AGE else 0.3
    return scale


def equivalise(income: float, household: HouseholdRecord) -> float:
    """Income per equivalent adult under the modified OECD scale."""
    if not math.isfinite(income):
        raise DataError("non-finite income")
    return income / equivalence_scale(household)


def assign_quintiles(
    sample: WeightedSample, values: Mapping[str, float]
) -> dict[str, int]:
    """Assign each household a weighted quintile 1..5 of the given measure.

    Boundaries follow the left-continuous weighted empirical CDF; ties are
    broken by household_id so assignment is stable. The mapping is intended to
    be computed once at the baseline month and reused for later months.
    """
    if not sample.households:
        raise DataError("empty sample")
    total = sample.total_weight()
    if total <= 0:
        raise DataError("zero total weight")
    ordered = sorted(
        sample.households, key=lambda h: (values[h.household_id], h.household_id)
    )
    out: dict[str, int] = {}
    cum_before = 0.0
    for h in ordered:
        out[h.household_id] = min(4, int(cum_before * 5.0 / total)) + 1
        cum_before += h.weight
    return out


def weighted_total(
    sample: WeightedSample, field: str | Callable[[PersonRecord], float]
) -> float:
    """Weighted sum of a person-level income component over the sample.

    Summation runs in ascending household_id order so results are reproducible
    bit for bit.
    """
    if callable(field):
        get = field
    else:
        get = lambda p: getattr(p, field)  # noqa: E731
    total = 0.0
    for h in sorted(sample.households, key=lambda h: h.household_id):
        for p in h.members:
            total += h.weight * get(p)
    return total
