import math

import numpy as np
import pytest

from conftest import household, person, sample, single_household, unemployed
from incomenowcast.errors import DataError
from incomenowcast.records import (
    MonthId,
    assign_quintiles,
    equivalence_scale,
    equivalise,
    validate_household,
    validate_person,
    weighted_total,
)


class TestMonthId:
    def test_ordering_and_arithmetic(self):
        assert MonthId(2020, 2) < MonthId(2020, 3) < MonthId(2021, 1)
        assert MonthId(2020, 12).plus(1) == MonthId(2021, 1)
        assert MonthId(2020, 6).months_since(MonthId(2020, 2)) == 4

    def test_parse_round_trip(self):
        m = MonthId.parse("2020-04")
        assert (m.year, m.month) == (2020, 4)
        assert str(m) == "2020-04"

    def test_invalid(self):
        with pytest.raises(ValueError):
            MonthId(2020, 13)
        with pytest.raises(ValueError):
            MonthId.parse("April 2020")


class TestEquivalise:
    def test_single_adult(self):
        h = single_household("h1")
        assert equivalise(1000.0, h) == 1000.0

    def test_couple_two_children(self):
        members = [
            person(person_id="a", age=40),
            person(person_id="b", age=38),
            person(person_id="c", age=6, **_child_kw()),
            person(person_id="d", age=3, **_child_kw()),
        ]
        h = household(members)
        assert equivalence_scale(h) == pytest.approx(2.1)
        assert equivalise(2100.0, h) == pytest.approx(1000.0)

    def test_three_adults_against_summation_oracle(self):
        members = [person(person_id=f"p{i}", age=30 + i) for i in range(3)]
        h = household(members)
        # independent oracle: sum contributions member by member
        ages = sorted((p.age for p in members), reverse=True)
        expected = 1.0 + sum(0.5 if a >= 15 else 0.3 for a in ages[1:])
        assert expected == 2.0
        assert equivalise(1500.0, h) == pytest.approx(1500.0 / expected) == 750.0

    def test_empty_household_errors(self):
        h = household([person()])
        object.__setattr__(h, "members", ())
        with pytest.raises(DataError, match="empty household"):
            equivalise(100.0, h)

    def test_homogeneous_in_income(self):
        h = household([person(person_id="a"), person(person_id="b", age=10, **_child_kw())])
        rng = np.random.default_rng(0)
        for _ in range(50):
            x, k = rng.uniform(0, 5000), rng.uniform(0, 10)
            assert equivalise(k * x, h) == pytest.approx(k * equivalise(x, h))

    def test_non_finite_income_rejected(self):
        with pytest.raises(DataError):
            equivalise(float("nan"), single_household("h1"))


def _child_kw():
    from incomenowcast.records import LabourState

    return dict(
        labour_state=LabourState.NOT_IN_LABOUR_FORCE,
        industry=None,
        occupation=None,
        usual_hours=0.0,
        n_jobs=0,
        wage_income=0.0,
    )


def _quintile_oracle(weights, values, ids):
    """Brute-force weighted CDF oracle: quintile of a household is one plus
    the number of full 20% blocks below its (tie-broken) position."""
    order = sorted(range(len(ids)), key=lambda i: (values[i], ids[i]))
    total = sum(weights)
    out = {}
    cum = 0.0
    for i in order:
        out[ids[i]] = min(4, int(cum * 5 / total)) + 1
        cum += weights[i]
    return out


class TestAssignQuintiles:
    def test_five_equal_households(self):
        hs = [single_household(f"h{i}") for i in range(5)]
        values = {f"h{i}": float(i * 10) for i in range(5)}
        q = assign_quintiles(sample(hs), values)
        assert [q[f"h{i}"] for i in range(5)] == [1, 2, 3, 4, 5]

    def test_all_equal_values_tie_break_by_id(self):
        hs = [single_household(f"h{i}") for i in range(5)]
        values = {f"h{i}": 7.0 for i in range(5)}
        q = assign_quintiles(sample(hs), values)
        assert [q[f"h{i}"] for i in range(5)] == [1, 2, 3, 4, 5]

    def test_ten_households_against_cdf_oracle(self):
        hs = [single_household(f"h{i:02d}") for i in range(10)]
        values = {f"h{i:02d}": float(i + 1) for i in range(10)}
        q = assign_quintiles(sample(hs), values)
        expected = _quintile_oracle(
            [1.0] * 10, [float(i + 1) for i in range(10)], [f"h{i:02d}" for i in range(10)]
        )
        assert q == expected
        assert [q[f"h{i:02d}"] for i in range(10)] == [1, 1, 2, 2, 3, 3, 4, 4, 5, 5]

    def test_random_weights_match_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            n = int(rng.integers(2, 40))
            weights = rng.uniform(0.1, 5.0, n)
            values = rng.normal(0, 1000, n)
            ids = [f"h{i:03d}" for i in range(n)]
            hs = [single_household(ids[i], weight=weights[i]) for i in range(n)]
            got = assign_quintiles(sample(hs), dict(zip(ids, values)))
            assert got == _quintile_oracle(weights, values, ids)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(7)
        n = 30
        ids = [f"h{i:03d}" for i in range(n)]
        weights = rng.uniform(0.5, 3.0, n)
        values = rng.normal(0, 100, n)
        hs = [single_household(ids[i], weight=weights[i]) for i in range(n)]
        base = assign_quintiles(sample(hs), dict(zip(ids, values)))
        transformed = assign_quintiles(
            sample(hs), {i: math.exp(v / 150.0) for i, v in zip(ids, values)}
        )
        assert base == transformed

    def test_quintile_mass_within_largest_weight(self):
        rng = np.random.default_rng(3)
        n = 200
        ids = [f"h{i:03d}" for i in range(n)]
        weights = rng.uniform(0.1, 4.0, n)
        values = rng.normal(0, 100, n)
        hs = [single_household(ids[i], weight=weights[i]) for i in range(n)]
        q = assign_quintiles(sample(hs), dict(zip(ids, values)))
        total = sum(weights)
        masses = [0.0] * 5
        for i, hid in enumerate(ids):
            masses[q[hid] - 1] += weights[i]
        for m in masses:
            assert abs(m - total / 5) <= weights.max() + 1e-9

    def test_zero_total_weight_errors(self):
        hs = [single_household("h1", weight=0.0)]
        with pytest.raises(DataError):
            assign_quintiles(sample(hs), {"h1": 1.0})


class TestWeightedTotal:
    def test_simple(self):
        hs = [
            single_household("h1", weight=2.0, wage_income=10.0),
            single_household("h2", weight=3.0, wage_income=10.0),
        ]
        assert weighted_total(sample(hs), "wage_income") == 50.0

    def test_fractional_weights_hand_sum(self):
        hs = [
            single_household("h1", weight=1.5, wage_income=4.0),
            single_household("h2", weight=0.5, wage_income=8.0),
        ]
        assert weighted_total(sample(hs), "wage_income") == 10.0

    def test_empty_sample_is_zero(self):
        assert weighted_total(sample([]), "wage_income") == 0.0

    def test_callable_selector(self):
        hs = [single_household("h1", weight=2.0, wage_income=7.0, investment_income=3.0)]
        total = weighted_total(sample(hs), lambda p: p.wage_income + p.investment_income)
        assert total == 20.0


class TestValidation:
    def test_hours_state_consistency(self):
        with pytest.raises(DataError, match="usual_hours"):
            validate_person(person(usual_hours=0.0))
        with pytest.raises(DataError, match="usual_hours"):
            validate_person(unemployed(usual_hours=10.0))

    def test_wage_needs_employment_or_subsidy_flag(self):
        with pytest.raises(DataError, match="wage income"):
            validate_person(unemployed(wage_income=100.0))
        ok = unemployed(wage_income=100.0, jobkeeper_flag=True)
        validate_person(ok)

    def test_employed_needs_industry(self):
        with pytest.raises(DataError, match="industry"):
            validate_person(person(industry=None))

    def test_child_count_consistency(self):
        kid = person(person_id="kid", age=8, **_child_kw())
        h = household([person(), kid], n_children_5_14=0)
        with pytest.raises(DataError, match="child counts"):
            validate_household(h)
