"""Synthetic data sources at desk scale.

Generates the three inputs every downstream stage consumes: a baseline income
survey, a monthly rotating labour-force panel without income fields, and an
administrative-style payroll index series. The generator is openly synthetic:
it is structurally faithful to the three sources' schemas and dynamics, not a
statistical emulator of any real population.

Everything is driven by ``SynthConfig`` and is bit-reproducible for a fixed
seed. Labour-market dynamics are controlled by a per-industry shock profile
(monthly extra exit hazards and wage index levels) layered on a configurable
baseline churn, so a config with zero churn and an empty profile produces a
frozen labour market.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import ConfigError
from .records import (
    Education,
    HouseholdRecord,
    Industry,
    LabourState,
    Marital,
    MonthId,
    Occupation,
    PersonRecord,
    Sex,
    State,
    WeightedSample,
    WelfareFlag,
)

BASELINE_MONTH = MonthId(2020, 2)

# Payroll cells are keyed by industry x age band x month.
AGE_BANDS = ("15-24", "25-34", "35-44", "45-54", "55-64", "65+")


def age_band(age: int) -> str:
    if age >= 65:
        return "65+"
    if age < 25:
        return "15-24"
    return AGE_BANDS[min((age - 15) // 10, 4)]


# ---------------------------------------------------------------------------
# Generator calibration constants. These steer marginal shares of the
# synthetic population (age mix, couple shares, labour states, industry
# sizes); they are configuration for a synthetic world, not estimates.
# ---------------------------------------------------------------------------

# (archetype, probability): age class of the head x single/couple
HOUSEHOLD_TYPES = (
    ("young_single", 0.123),
    ("young_couple", 0.020),
    ("adult_single", 0.323),
    ("adult_couple", 0.343),
    ("senior_single", 0.097),
    ("senior_couple", 0.094),
)

# co-resident adult children (15-24) in households with an older head
ADULT_CHILD_PROB = 0.20
ADULT_CHILD_MIN_HEAD_AGE = 42

# employed / unemployed probabilities by age class (remainder not in labour force)
LABOUR_STATE_PROBS = {
    "young": (0.60, 0.090),
    "adult": (0.775, 0.036),
    "senior": (0.12, 0.003),
}

BACHELOR_PROB = {"young": 0.15, "adult": 0.35, "senior": 0.14}
OVERSEAS_BORN_PROB = 0.341
MALE_PROB_SINGLE = 0.49

# number-of-children distribution for households with a head aged 25-50
CHILD_COUNT_PROBS = ((0, 0.32), (1, 0.24), (2, 0.29), (3, 0.11), (4, 0.04))

STATE_SHARES = {
    State.NSW: 0.319,
    State.VIC: 0.261,
    State.QLD: 0.201,
    State.WA: 0.104,
    State.SA: 0.069,
    State.TAS: 0.021,
    State.ACT: 0.017,
    State.NT: 0.008,
}

# Relative industry sizes for the synthetic employed population.
INDUSTRY_SHARES = {
    Industry.AGRICULTURE_FORESTRY_FISHING: 337.1,
    Industry.MINING: 238.5,
    Industry.MANUFACTURING: 908.9,
    Industry.ELECTRICITY_GAS_WATER_WASTE: 136.1,
    Industry.CONSTRUCTION: 1182.1,
    Industry.WHOLESALE_TRADE: 385.7,
    Industry.RETAIL_TRADE: 1261.4,
    Industry.ACCOMMODATION_FOOD: 930.5,
    Industry.TRANSPORT_POSTAL_WAREHOUSING: 666.4,
    Industry.INFORMATION_MEDIA_TELECOM: 211.6,
    Industry.FINANCIAL_INSURANCE: 474.5,
    Industry.RENTAL_HIRING_REAL_ESTATE: 213.7,
    Industry.PROFESSIONAL_SCIENTIFIC_TECHNICAL: 1171.9,
    Industry.ADMINISTRATIVE_SUPPORT: 449.9,
    Industry.PUBLIC_ADMINISTRATION_SAFETY: 828.5,
    Industry.EDUCATION_TRAINING: 1096.6,
    Industry.HEALTH_CARE_SOCIAL_ASSISTANCE: 1798.3,
    Industry.ARTS_RECREATION: 251.9,
    Industry.OTHER_SERVICES: 492.9,
}

# Default February-to-trough employment change used to build the shipped
# shock profile (fractional change over the three shock months).
EMPLOYMENT_SHOCK_FEB_TO_TROUGH = {
    Industry.AGRICULTURE_FORESTRY_FISHING: 0.072,
    Industry.MINING: -0.047,
    Industry.MANUFACTURING: -0.049,
    Industry.ELECTRICITY_GAS_WATER_WASTE: 0.238,
    Industry.CONSTRUCTION: -0.002,
    Industry.WHOLESALE_TRADE: 0.010,
    Industry.RETAIL_TRADE: -0.062,
    Industry.ACCOMMODATION_FOOD: -0.297,
    Industry.TRANSPORT_POSTAL_WAREHOUSING: -0.142,
    Industry.INFORMATION_MEDIA_TELECOM: -0.112,
    Industry.FINANCIAL_INSURANCE: 0.032,
    Industry.RENTAL_HIRING_REAL_ESTATE: 0.029,
    Industry.PROFESSIONAL_SCIENTIFIC_TECHNICAL: -0.054,
    Industry.ADMINISTRATIVE_SUPPORT: -0.127,
    Industry.PUBLIC_ADMINISTRATION_SAFETY: 0.021,
    Industry.EDUCATION_TRAINING: -0.055,
    Industry.HEALTH_CARE_SOCIAL_ASSISTANCE: -0.037,
    Industry.ARTS_RECREATION: -0.365,
    Industry.OTHER_SERVICES: -0.102,
}

# share of the trough-level employment change realised by each month offset
# from the shock start (month 1 = first shock month), and beyond
SHOCK_RAMP = (0.35, 0.75, 1.0, 0.80)
WAGE_SENSITIVITY = 0.45  # wage index response to cumulative employment change
WAGE_FLOOR = 0.80

# industries with a high part-time share in the synthetic world
HIGH_PART_TIME = {
    Industry.ACCOMMODATION_FOOD,
    Industry.RETAIL_TRADE,
    Industry.ARTS_RECREATION,
    Industry.OTHER_SERVICES,
}


@dataclass(frozen=True)
class LabourChurn:
    """Monthly baseline labour-market flows, independent of the shock."""

    exit_rate: float = 0.008  # employed -> not employed
    re_entry_rate: float = 0.18  # unemployed -> employed, normal months
    re_entry_rate_shock: float = 0.06  # unemployed -> employed, shock months
    nilf_entry_rate: float = 0.010  # not in labour force -> employed
    nilf_to_unemployed_rate: float = 0.008
    hours_cut_prob: float = 0.25  # chance of an hours cut in a shocked industry
    hours_cut_factor: float = 0.70

    @classmethod
    def none(cls) -> "LabourChurn":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)

    @property
    def frozen(self) -> bool:
        return (
            self.exit_rate == 0.0
            and self.re_entry_rate == 0.0
            and self.re_entry_rate_shock == 0.0
            and self.nilf_entry_rate == 0.0
            and self.nilf_to_unemployed_rate == 0.0
        )


@dataclass(frozen=True)
class IndustryShock:
    """One industry-month: extra exit hazard and wage index level (baseline=1)."""

    exit_rate: float = 0.0
    wage_factor: float = 1.0


ShockProfile = Mapping[MonthId, Mapping[Industry, IndustryShock]]


def default_shock_profile(policy_month: MonthId = MonthId(2020, 3)) -> dict:
    """Shock profile with pronounced cross-industry heterogeneity.

    Exit hazards are sized so the cumulative employment drop over the first
    three shock months approaches each industry's configured trough change,
    with a partial recovery in the fourth month. Wage indices move with the
    cumulative employment change, floored.
    """
    profile: dict[MonthId, dict[Industry, IndustryShock]] = {}
    for k, ramp in enumerate(SHOCK_RAMP):
        month = policy_month.plus(k)
        cells = {}
        prev_ramp = SHOCK_RAMP[k - 1] if k > 0 else 0.0
        for ind, trough in EMPLOYMENT_SHOCK_FEB_TO_TROUGH.items():
            cum = ramp * trough
            prev_cum = prev_ramp * trough
            if trough < 0 and cum < prev_cum:
                hazard = 1.0 - (1.0 + cum) / (1.0 + prev_cum)
            else:
                hazard = 0.0
            wage = max(WAGE_FLOOR, 1.0 + WAGE_SENSITIVITY * cum)
            cells[ind] = IndustryShock(exit_rate=hazard, wage_factor=wage)
        profile[month] = cells
    return profile


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    n_households: int
    n_panel_waves: int = 5
    rotation_retention: float = 0.82
    shock_profile: ShockProfile = field(default_factory=default_shock_profile)
    policy_month: MonthId = MonthId(2020, 3)
    baseline_month: MonthId = BASELINE_MONTH
    panel_households: int | None = None  # default: same as n_households
    population_households: float = 9.9e6
    churn: LabourChurn = field(default_factory=LabourChurn)

    def __post_init__(self):
        if self.n_households <= 0:
            raise ConfigError("n_households must be positive")
        if not 0.0 < self.rotation_retention <= 1.0:
            raise ConfigError("rotation_retention must be in (0, 1]")
        if self.n_panel_waves <= 0:
            raise ConfigError("n_panel_waves must be positive")


@dataclass(frozen=True)
class PayrollCell:
    wage_index: float
    job_index: float


@dataclass(frozen=True)
class PayrollSeries:
    """Average-wage and job-count indices by industry x age band x month."""

    baseline_month: MonthId
    cells: Mapping[tuple[Industry, str, MonthId], PayrollCell]

    def months(self) -> set[MonthId]:
        return {key[2] for key in self.cells}

    def wage_factor(self, industry: Industry | None, band: str, month: MonthId) -> float:
        """Cell factor, falling back to the industry mean then the
        economy-wide mean when the cell is missing."""
        if industry is not None:
            cell = self.cells.get((industry, band, month))
            if cell is not None:
                return cell.wage_index
            values = [
                c.wage_index
                for (ind, _, m), c in self.cells.items()
                if ind is industry and m == month
            ]
            if values:
                return float(np.mean(values))
        values = [c.wage_index for (_, _, m), c in self.cells.items() if m == month]
        if not values:
            raise KeyError(month)
        return float(np.mean(values))


def validate_payroll(series: PayrollSeries) -> None:
    for (ind, band, month), cell in series.cells.items():
        if cell.wage_index <= 0 or cell.job_index <= 0:
            raise ConfigError(f"non-positive payroll factor in cell {ind.value}/{band}/{month}")
        if month == series.baseline_month and (
            cell.wage_index != 1.0 or cell.job_index != 1.0
        ):
            raise ConfigError("baseline payroll factors must equal 1.0")


# ---------------------------------------------------------------------------
# household generation
# ---------------------------------------------------------------------------

_IND_LIST = list(INDUSTRY_SHARES)
_IND_PROBS = np.array(list(INDUSTRY_SHARES.values()))
_IND_PROBS = _IND_PROBS / _IND_PROBS.sum()
_STATE_LIST = list(STATE_SHARES)
_STATE_PROBS = np.array(list(STATE_SHARES.values()))
_STATE_PROBS = _STATE_PROBS / _STATE_PROBS.sum()
_TYPE_NAMES = [t for t, _ in HOUSEHOLD_TYPES]
_TYPE_PROBS = np.array([p for _, p in HOUSEHOLD_TYPES])
_TYPE_PROBS = _TYPE_PROBS / _TYPE_PROBS.sum()
_CHILD_COUNTS = [c for c, _ in CHILD_COUNT_PROBS]
_CHILD_PROBS = np.array([p for _, p in CHILD_COUNT_PROBS])

# log-wage premia by industry relative to the base, synthetic calibration
_INDUSTRY_PREMIUM = {
    Industry.MINING: 0.55,
    Industry.FINANCIAL_INSURANCE: 0.30,
    Industry.PROFESSIONAL_SCIENTIFIC_TECHNICAL: 0.25,
    Industry.INFORMATION_MEDIA_TELECOM: 0.22,
    Industry.ELECTRICITY_GAS_WATER_WASTE: 0.25,
    Industry.PUBLIC_ADMINISTRATION_SAFETY: 0.12,
    Industry.EDUCATION_TRAINING: 0.08,
    Industry.CONSTRUCTION: 0.08,
    Industry.ACCOMMODATION_FOOD: -0.28,
    Industry.RETAIL_TRADE: -0.22,
    Industry.ARTS_RECREATION: -0.15,
    Industry.OTHER_SERVICES: -0.10,
    Industry.AGRICULTURE_FORESTRY_FISHING: -0.12,
}
_OCC_PREMIUM = {1: 0.35, 2: 0.28, 3: 0.10, 4: -0.12, 5: 0.0, 6: -0.18, 7: 0.02, 8: -0.22}
_BASE_LOG_WAGE = math.log(1500.0)  # median full-time fortnightly wage
_WAGE_SIGMA = 0.42


def _age_class(archetype: str) -> str:
    return archetype.split("_")[0]


def _draw_age(rng, cls: str) -> int:
    if cls == "young":
        return int(rng.integers(15, 25))
    if cls == "adult":
        return int(rng.integers(25, 65))
    return int(rng.integers(65, 90))


def _draw_occupation(rng, education: Education) -> Occupation:
    if education is Education.BACHELOR_OR_HIGHER:
        probs = [0.18, 0.44, 0.06, 0.08, 0.12, 0.06, 0.02, 0.04]
    else:
        probs = [0.09, 0.08, 0.20, 0.12, 0.14, 0.12, 0.11, 0.14]
    return Occupation(int(rng.choice(np.arange(1, 9), p=probs)))


def _draw_hours(rng, industry: Industry) -> float:
    ft_share = 0.45 if industry in HIGH_PART_TIME else 0.72
    if rng.random() < ft_share:
        return float(np.clip(rng.normal(38.0, 4.0), 35.0, 60.0))
    return float(rng.uniform(1.0, 34.0))


def _draw_wage(rng, industry: Industry, occupation: Occupation, hours: float) -> float:
    mu = (
        _BASE_LOG_WAGE
        + 0.92 * math.log(max(hours, 1.0) / 38.0)
        + _INDUSTRY_PREMIUM.get(industry, 0.0)
        + _OCC_PREMIUM[int(occupation)]
    )
    return round(float(np.exp(mu + _WAGE_SIGMA * rng.standard_normal())), 2)


def _draw_adult(
    rng,
    person_id: str,
    household_id: str,
    age: int,
    sex: Sex,
    marital: Marital,
    cls: str,
) -> PersonRecord:
    education = (
        Education.BACHELOR_OR_HIGHER
        if rng.random() < BACHELOR_PROB[cls]
        else Education.BELOW_BACHELOR
    )
    p_emp, p_unemp = LABOUR_STATE_PROBS[cls]
    u = rng.random()
    if u < p_emp:
        labour = LabourState.EMPLOYED
    elif u < p_emp + p_unemp:
        labour = LabourState.UNEMPLOYED
    else:
        labour = LabourState.NOT_IN_LABOUR_FORCE

    industry = occupation = None
    hours = 0.0
    n_jobs = 0
    duration = 0.0
    wage = 0.0
    if labour is LabourState.EMPLOYED:
        industry = _IND_LIST[int(rng.choice(len(_IND_LIST), p=_IND_PROBS))]
        occupation = _draw_occupation(rng, education)
        hours = round(_draw_hours(rng, industry), 1)
        n_jobs = 2 if rng.random() < 0.08 else 1
        wage = _draw_wage(rng, industry, occupation, hours)
    elif labour is LabourState.UNEMPLOYED:
        duration = float(rng.geometric(0.18))
        if rng.random() < 0.8:
            industry = _IND_LIST[int(rng.choice(len(_IND_LIST), p=_IND_PROBS))]
            occupation = _draw_occupation(rng, education)

    single = marital is Marital.SINGLE
    flags = set()
    if cls == "senior" and rng.random() < 0.78:
        flags.add(WelfareFlag.PENSION)
    if cls == "adult" and labour is LabourState.NOT_IN_LABOUR_FORCE:
        # disability and carer payments, folded into the pension payment
        # type; partnered homemakers mostly rely on partner income instead
        if rng.random() < (0.75 if single else 0.40):
            flags.add(WelfareFlag.PENSION)
    if labour is LabourState.UNEMPLOYED and rng.random() < 0.85:
        flags.add(WelfareFlag.JOBSEEKER)
    if (
        cls != "senior"
        and labour is LabourState.NOT_IN_LABOUR_FORCE
        and rng.random() < 0.03
    ):
        flags.add(WelfareFlag.JOBSEEKER)
    if cls == "young" and labour is not LabourState.EMPLOYED:
        if rng.random() < (0.75 if single else 0.40):
            flags.add(WelfareFlag.YOUTH_ALLOWANCE)

    business = 0.0
    if labour is LabourState.EMPLOYED and rng.random() < 0.12:
        business = round(float(rng.lognormal(math.log(900.0), 0.8)), 2)
        if rng.random() < 0.12:
            business = -round(float(rng.lognormal(math.log(300.0), 0.7)), 2)
    inv_prob, inv_med = (0.8, 90.0) if cls == "senior" else (0.55, 25.0)
    investment = (
        round(float(rng.lognormal(math.log(inv_med), 1.25)), 2)
        if rng.random() < inv_prob
        else 0.0
    )
    other = 0.0
    if cls == "senior":
        # self-funded retirees draw superannuation income instead of a pension
        if WelfareFlag.PENSION not in flags and rng.random() < 0.85:
            other = round(float(rng.lognormal(math.log(700.0), 0.6)), 2)
        elif rng.random() < 0.35:
            other = round(float(rng.lognormal(math.log(200.0), 0.8)), 2)
    elif rng.random() < 0.08:
        other = round(float(rng.lognormal(math.log(80.0), 0.6)), 2)

    return PersonRecord(
        person_id=person_id,
        household_id=household_id,
        age=age,
        sex=sex,
        marital=marital,
        overseas_born=rng.random() < OVERSEAS_BORN_PROB,
        education=education,
        labour_state=labour,
        industry=industry,
        occupation=occupation,
        usual_hours=hours,
        n_jobs=n_jobs,
        unemployment_duration=duration,
        wage_income=wage,
        business_income=business,
        investment_income=investment,
        other_income=other,
        welfare_flags=frozenset(flags),
    )


def _draw_child(rng, person_id: str, household_id: str) -> PersonRecord:
    return PersonRecord(
        person_id=person_id,
        household_id=household_id,
        age=int(rng.integers(0, 15)),
        sex=Sex.MALE if rng.random() < 0.512 else Sex.FEMALE,
        marital=Marital.SINGLE,
        overseas_born=rng.random() < 0.10,
        education=Education.BELOW_BACHELOR,
        labour_state=LabourState.NOT_IN_LABOUR_FORCE,
        industry=None,
        occupation=None,
        usual_hours=0.0,
        n_jobs=0,
        unemployment_duration=0.0,
        wage_income=0.0,
        business_income=0.0,
        investment_income=0.0,
        other_income=0.0,
        welfare_flags=frozenset(),
    )


def _draw_housing(rng, cls: str) -> float:
    u = rng.random()
    if cls == "senior":
        tenure = "own" if u < 0.75 else ("mortgage" if u < 0.85 else "rent")
    elif cls == "adult":
        tenure = "own" if u < 0.25 else ("mortgage" if u < 0.65 else "rent")
    else:
        tenure = "own" if u < 0.02 else ("mortgage" if u < 0.20 else "rent")
    if tenure == "own":
        return round(float(rng.uniform(30.0, 120.0)), 2)
    med = 550.0 if tenure == "mortgage" else 420.0
    return round(float(rng.lognormal(math.log(med), 0.35)), 2)


def _gen_household(rng, household_id: str, weight: float) -> HouseholdRecord:
    archetype = _TYPE_NAMES[int(rng.choice(len(_TYPE_NAMES), p=_TYPE_PROBS))]
    cls = _age_class(archetype)
    couple = archetype.endswith("couple")
    head_age = _draw_age(rng, cls)

    members: list[PersonRecord] = []
    if couple:
        head_sex = Sex.MALE if rng.random() < 0.5 else Sex.FEMALE
        partner_sex = Sex.FEMALE if head_sex is Sex.MALE else Sex.MALE
        partner_age = int(np.clip(head_age + rng.integers(-4, 5), 15, 95))
        members.append(
            _draw_adult(rng, f"{household_id}p1", household_id, head_age, head_sex,
                        Marital.PARTNERED, cls)
        )
        members.append(
            _draw_adult(rng, f"{household_id}p2", household_id, partner_age,
                        partner_sex, Marital.PARTNERED, cls)
        )
    else:
        head_sex = Sex.MALE if rng.random() < MALE_PROB_SINGLE else Sex.FEMALE
        members.append(
            _draw_adult(rng, f"{household_id}p1", household_id, head_age, head_sex,
                        Marital.SINGLE, cls)
        )

    n_kids = 0
    if cls == "adult" and head_age <= 50:
        n_kids = int(_CHILD_COUNTS[int(rng.choice(len(_CHILD_COUNTS), p=_CHILD_PROBS))])
    for k in range(n_kids):
        members.append(_draw_child(rng, f"{household_id}p{len(members) + 1}", household_id))

    if (
        cls == "adult"
        and head_age >= ADULT_CHILD_MIN_HEAD_AGE
        and rng.random() < ADULT_CHILD_PROB
    ):
        members.append(
            _draw_adult(
                rng,
                f"{household_id}p{len(members) + 1}",
                household_id,
                int(rng.integers(15, 25)),
                Sex.MALE if rng.random() < 0.51 else Sex.FEMALE,
                Marital.SINGLE,
                "young",
            )
        )

    n04 = sum(1 for p in members if p.age <= 4)
    n514 = sum(1 for p in members if 5 <= p.age <= 14)

    # parenting and family payment flags sit on one parent
    if any(p.age <= 7 for p in members if p.age < 15):
        parent_prob = 0.85 if not couple else 0.22
        if rng.random() < parent_prob:
            target = members[1] if couple else members[0]
            members[members.index(target)] = replace(
                target, welfare_flags=target.welfare_flags | {WelfareFlag.PARENTING}
            )
    if (n04 + n514) > 0 and rng.random() < 0.8:
        head = members[0]
        members[0] = replace(
            head, welfare_flags=head.welfare_flags | {WelfareFlag.FTB}
        )

    childcare = 0.0
    adults = [p for p in members if p.age >= 15]
    all_working = all(p.labour_state is LabourState.EMPLOYED for p in adults)
    if n04 > 0 and all_working:
        childcare = round(float(rng.lognormal(math.log(170.0), 0.6)), 2)
    elif n04 > 0 and rng.random() < 0.5:
        childcare = round(float(rng.lognormal(math.log(85.0), 0.6)), 2)
    elif n514 > 0 and rng.random() < 0.25:
        childcare = round(float(rng.lognormal(math.log(60.0), 0.6)), 2)

    return HouseholdRecord(
        household_id=household_id,
        members=tuple(members),
        n_children_0_4=n04,
        n_children_5_14=n514,
        housing_cost=_draw_housing(rng, cls),
        childcare_cost=childcare,
        state=_STATE_LIST[int(rng.choice(len(_STATE_LIST), p=_STATE_PROBS))],
        weight=weight,
    )


def gen_baseline_survey(cfg: SynthConfig) -> WeightedSample:
    """Synthetic stand-in for the baseline income survey."""
    rng = np.random.default_rng([cfg.seed, 0])
    base_weight = cfg.population_households / cfg.n_households
    households = []
    width = len(str(cfg.n_households))
    for i in range(cfg.n_households):
        weight = round(base_weight * float(rng.uniform(0.7, 1.3)), 4)
        households.append(_gen_household(rng, f"sh{i + 1:0{width}d}", weight))
    return WeightedSample(month=cfg.baseline_month, households=tuple(households))


# ---------------------------------------------------------------------------
# labour-force panel
# ---------------------------------------------------------------------------


def _strip_incomes(h: HouseholdRecord) -> HouseholdRecord:
    members = tuple(
        replace(
            p,
            wage_income=0.0,
            business_income=0.0,
            investment_income=0.0,
            other_income=0.0,
        )
        for p in h.members
    )
    return replace(h, members=members)


def _evolve_household(
    rng,
    h: HouseholdRecord,
    month: MonthId,
    shocks: Mapping[Industry, IndustryShock],
    churn: LabourChurn,
) -> HouseholdRecord:
    """One month of labour-market dynamics applied to every adult member."""
    if churn.frozen and not any(s.exit_rate > 0 for s in shocks.values()):
        return h
    shock_month = any(s.exit_rate > 0 for s in shocks.values())
    members = []
    for p in h.members:
        if not p.is_adult:
            members.append(p)
            continue
        if p.labour_state is LabourState.EMPLOYED:
            hazard = churn.exit_rate
            if p.industry is not None and p.industry in shocks:
                hazard += shocks[p.industry].exit_rate
            if rng.random() < hazard:
                to_unemployed = rng.random() < 0.6
                p = replace(
                    p,
                    labour_state=(
                        LabourState.UNEMPLOYED
                        if to_unemployed
                        else LabourState.NOT_IN_LABOUR_FORCE
                    ),
                    usual_hours=0.0,
                    n_jobs=0,
                    wage_income=0.0,
                    unemployment_duration=1.0 if to_unemployed else 0.0,
                )
            else:
                hit = (
                    p.industry is not None
                    and p.industry in shocks
                    and shocks[p.industry].exit_rate > 0
                )
                if hit and rng.random() < churn.hours_cut_prob:
                    p = replace(
                        p,
                        usual_hours=round(
                            max(1.0, p.usual_hours * churn.hours_cut_factor), 1
                        ),
                    )
        elif p.labour_state is LabourState.UNEMPLOYED:
            rate = churn.re_entry_rate_shock if shock_month else churn.re_entry_rate
            if rng.random() < rate:
                industry = (
                    p.industry
                    if p.industry is not None
                    else _IND_LIST[int(rng.choice(len(_IND_LIST), p=_IND_PROBS))]
                )
                occupation = (
                    p.occupation
                    if p.occupation is not None
                    else _draw_occupation(rng, p.education)
                )
                p = replace(
                    p,
                    labour_state=LabourState.EMPLOYED,
                    industry=industry,
                    occupation=occupation,
                    usual_hours=round(_draw_hours(rng, industry), 1),
                    n_jobs=1,
                    unemployment_duration=0.0,
                )
            else:
                p = replace(p, unemployment_duration=p.unemployment_duration + 1.0)
        else:
            if p.age < 65 and rng.random() < churn.nilf_entry_rate and not shock_month:
                industry = _IND_LIST[int(rng.choice(len(_IND_LIST), p=_IND_PROBS))]
                occupation = _draw_occupation(rng, p.education)
                p = replace(
                    p,
                    labour_state=LabourState.EMPLOYED,
                    industry=industry,
                    occupation=occupation,
                    usual_hours=round(_draw_hours(rng, industry), 1),
                    n_jobs=1,
                )
            elif p.age < 65 and rng.random() < churn.nilf_to_unemployed_rate:
                p = replace(
                    p,
                    labour_state=LabourState.UNEMPLOYED,
                    unemployment_duration=1.0,
                )
        members.append(p)
    return replace(h, members=tuple(members))


def gen_labour_panel(cfg: SynthConfig, baseline: WeightedSample) -> list[WeightedSample]:
    """Rotating monthly panel without income fields.

    A fixed pool of synthetic households evolves month by month under the
    shock profile; each wave retains ``rotation_retention`` of the previous
    wave's households and tops up from never-used pool households, so person
    ids persist for retained persons.
    """
    rng = np.random.default_rng([cfg.seed, 1])
    n_wave = cfg.panel_households or cfg.n_households
    expected_new = (cfg.n_panel_waves - 1) * (1.0 - cfg.rotation_retention)
    pool_size = int(math.ceil(n_wave * (1.0 + expected_new) * 1.15)) + 8
    base_weight = cfg.population_households / n_wave
    width = len(str(pool_size))
    pool = []
    for i in range(pool_size):
        weight = round(base_weight * float(rng.uniform(0.75, 1.25)), 4)
        pool.append(_gen_household(rng, f"lp{i + 1:0{width}d}", weight))

    current = list(range(n_wave))
    next_unused = n_wave
    waves = []
    month = cfg.baseline_month
    waves.append(
        WeightedSample(
            month=month, households=tuple(_strip_incomes(pool[i]) for i in current)
        )
    )
    for _ in range(1, cfg.n_panel_waves):
        month = month.plus(1)
        shocks = cfg.shock_profile.get(month, {})
        for i in range(pool_size):
            pool[i] = _evolve_household(rng, pool[i], month, shocks, cfg.churn)
        kept = [i for i in current if rng.random() < cfg.rotation_retention]
        n_new = min(n_wave - len(kept), pool_size - next_unused)
        entrants = list(range(next_unused, next_unused + n_new))
        next_unused += n_new
        current = kept + entrants
        waves.append(
            WeightedSample(
                month=month, households=tuple(_strip_incomes(pool[i]) for i in current)
            )
        )
    return waves


def gen_payroll(cfg: SynthConfig) -> PayrollSeries:
    """Payroll wage/job index series implied by the shock profile."""
    cells: dict[tuple[Industry, str, MonthId], PayrollCell] = {}
    job_level = {ind: 1.0 for ind in Industry}
    for k in range(cfg.n_panel_waves):
        month = cfg.baseline_month.plus(k)
        shocks = cfg.shock_profile.get(month, {})
        for ind in Industry:
            shock = shocks.get(ind, IndustryShock())
            job_level[ind] *= 1.0 - shock.exit_rate
            wage = 1.0 if month == cfg.baseline_month else shock.wage_factor
            for band in AGE_BANDS:
                cells[(ind, band, month)] = PayrollCell(
                    wage_index=wage, job_index=job_level[ind]
                )
    series = PayrollSeries(baseline_month=cfg.baseline_month, cells=cells)
    validate_payroll(series)
    return series
