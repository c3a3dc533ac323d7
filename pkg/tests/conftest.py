"""Shared record builders for the test suite."""
from __future__ import annotations


from incomenowcast.records import (
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
)

FEB = MonthId(2020, 2)
APR = MonthId(2020, 4)


def person(**kw) -> PersonRecord:
    base = dict(
        person_id="p1",
        household_id="h1",
        age=35,
        sex=Sex.FEMALE,
        marital=Marital.SINGLE,
        overseas_born=False,
        education=Education.BELOW_BACHELOR,
        labour_state=LabourState.EMPLOYED,
        industry=Industry.RETAIL_TRADE,
        occupation=Occupation.SALES,
        usual_hours=38.0,
        n_jobs=1,
        unemployment_duration=0.0,
        wage_income=1500.0,
        business_income=0.0,
        investment_income=0.0,
        other_income=0.0,
    )
    base.update(kw)
    return PersonRecord(**base)


def unemployed(**kw) -> PersonRecord:
    base = dict(
        labour_state=LabourState.UNEMPLOYED,
        industry=None,
        occupation=None,
        usual_hours=0.0,
        n_jobs=0,
        unemployment_duration=3.0,
        wage_income=0.0,
    )
    base.update(kw)
    return person(**base)


def nilf(**kw) -> PersonRecord:
    base = dict(
        labour_state=LabourState.NOT_IN_LABOUR_FORCE,
        industry=None,
        occupation=None,
        usual_hours=0.0,
        n_jobs=0,
        unemployment_duration=0.0,
        wage_income=0.0,
    )
    base.update(kw)
    return person(**base)


def household(members, **kw) -> HouseholdRecord:
    members = tuple(members)
    hid = members[0].household_id if members else kw.get("household_id", "h1")
    base = dict(
        household_id=hid,
        members=members,
        n_children_0_4=sum(1 for p in members if p.age <= 4),
        n_children_5_14=sum(1 for p in members if 5 <= p.age <= 14),
        housing_cost=0.0,
        childcare_cost=0.0,
        state=State.NSW,
        weight=1.0,
    )
    base.update(kw)
    return HouseholdRecord(**base)


_HOUSEHOLD_KW = ("state", "housing_cost", "childcare_cost")


def single_household(hid: str, weight: float = 1.0, **kw) -> HouseholdRecord:
    household_kw = {k: kw.pop(k) for k in _HOUSEHOLD_KW if k in kw}
    p = person(person_id=f"{hid}p1", household_id=hid, **kw)
    return household([p], weight=weight, **household_kw)


def sample(households, month: MonthId = FEB) -> WeightedSample:
    return WeightedSample(month=month, households=tuple(households))
