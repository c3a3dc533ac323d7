"""Distributional outcome measures: weighted Gini, quintile means, poverty.

Person-level measures attribute each household's (equivalised) income to all
of its members at the household weight. The poverty line is anchored once at
the baseline month and reused unchanged for later months.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError
from .records import FORTNIGHTS_PER_MONTH, MonthId, WeightedSample, equivalise
from .taxben import DisposableIncomeResult, PolicyRegime, jobkeeper_wage


class MeasureKind(str, enum.Enum):
    MEAN = "mean"
    GINI = "gini"
    POVERTY_RATE = "poverty_rate"
    QUINTILE_MEANS = "quintile_means"


class IncomeConcept(str, enum.Enum):
    MARKET_15_64 = "market_income_15_64"
    EQUIV_DISPOSABLE = "equivalised_disposable"
    EQUIV_DISPOSABLE_AFTER_CHILDCARE = "equivalised_disposable_after_childcare"
    EQUIV_AFTER_HOUSING = "equivalised_after_housing"


@dataclass(frozen=True)
class OutcomeMeasure:
    kind: MeasureKind
    concept: IncomeConcept
    value: float | tuple[float, ...]


@dataclass(frozen=True)
class PovertyLine:
    value: float  # per fortnight, per equivalent adult
    anchor_month: MonthId

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("poverty line must be positive")


def _as_arrays(values, weights) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if x.shape != w.shape or x.ndim != 1:
        raise ValueError("values and weights must be 1-d and the same length")
    if np.any(w < 0):
        raise DataError("negative weight")
    if x.size == 0 or np.sum(w) <= 0:
        raise DataError("zero total weight")
    return x, w


def gini(values, weights, nonnegative: bool = False) -> float:
    """Weighted Gini via the sorted-covariance form.

    Equals half the weighted mean absolute difference over the mean. Values
    may be negative (the index can then exceed 1); pass ``nonnegative=True``
    to reject negative inputs instead.
    """
    x, w = _as_arrays(values, weights)
    if nonnegative and np.any(x < 0):
        raise DataError("negative income in a nonnegative-only Gini input")
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    total = np.sum(w)
    mu = float(np.sum(w * x)) / total
    if mu == 0:
        raise DataError("zero mean income; Gini undefined")
    # group exact ties so the midpoint rank matches the pairwise definition
    boundaries = np.flatnonzero(np.diff(x)) + 1
    xg = x[np.concatenate(([0], boundaries))]
    wg = np.add.reduceat(w, np.concatenate(([0], boundaries)))
    cum = np.cumsum(wg)
    rank = (cum - 0.5 * wg) / total  # midpoint of each value's weight block
    cov = np.sum(wg * xg * rank) / total - mu * np.sum(wg * rank) / total
    return float(2.0 * cov / mu)


def weighted_quantile(values, weights, q: float) -> float:
    """Smallest value whose weighted CDF reaches q; when the q-boundary
    falls exactly between two units, their midpoint (the usual even-split
    median convention)."""
    if not 0.0 < q <= 1.0:
        raise ValueError("q must be in (0, 1]")
    x, w = _as_arrays(values, weights)
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    cum = np.cumsum(w)
    target = q * cum[-1]
    tiny = 1e-9 * cum[-1]
    idx = int(np.searchsorted(cum, target - tiny))
    idx = min(idx, x.size - 1)
    if idx + 1 < x.size and abs(cum[idx] - target) <= tiny:
        return float(0.5 * (x[idx] + x[idx + 1]))
    return float(x[idx])


def weighted_median(values, weights) -> float:
    return weighted_quantile(values, weights, 0.5)


def poverty_rate(values, weights, line: PovertyLine | float) -> float:
    """Weighted share of units strictly below the line."""
    cutoff = line.value if isinstance(line, PovertyLine) else float(line)
    x, w = _as_arrays(values, weights)
    return float(np.sum(w[x < cutoff]) / np.sum(w))


def anchor_poverty_line(
    values, weights, anchor_month: MonthId, factor: float = 0.5
) -> PovertyLine:
    """Half (by default) the weighted median of the given incomes."""
    return PovertyLine(
        value=factor * weighted_median(values, weights), anchor_month=anchor_month
    )


# ---------------------------------------------------------------------------
# income concepts
# ---------------------------------------------------------------------------


def household_concept_values(
    sample: WeightedSample,
    results: Mapping[str, DisposableIncomeResult],
    concept: IncomeConcept,
) -> dict[str, float]:
    """Household-level value of an equivalised income concept."""
    out = {}
    for h in sample.households:
        r = results[h.household_id]
        if concept is IncomeConcept.EQUIV_DISPOSABLE:
            out[h.household_id] = equivalise(r.disposable_income, h)
        elif concept is IncomeConcept.EQUIV_DISPOSABLE_AFTER_CHILDCARE:
            out[h.household_id] = equivalise(r.disposable_after_childcare, h)
        elif concept is IncomeConcept.EQUIV_AFTER_HOUSING:
            out[h.household_id] = equivalise(r.after_housing_income, h)
        else:
            raise ValueError(f"{concept.value} is not a household-level concept")
    return out


def person_concept_arrays(
    sample: WeightedSample,
    results: Mapping[str, DisposableIncomeResult],
    concept: IncomeConcept,
) -> tuple[np.ndarray, np.ndarray]:
    """Person-level arrays (value, weight) for an equivalised concept."""
    by_household = household_concept_values(sample, results, concept)
    values, weights = [], []
    for h in sample.households:
        v = by_household[h.household_id]
        for _ in h.members:
            values.append(v)
            weights.append(h.weight)
    return np.array(values), np.array(weights)


def person_market_income_arrays(
    sample: WeightedSample,
    regime: PolicyRegime,
    month: MonthId,
    age_min: int = 15,
    age_max: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Individual market income (wage, business, investment) including any
    wage-subsidy top-up, for persons in the age window."""
    values, weights = [], []
    for h, p in sample.persons():
        if not age_min <= p.age <= age_max:
            continue
        paid, _ = jobkeeper_wage(p, regime, month)
        values.append(paid + p.business_income + p.investment_income)
        weights.append(h.weight)
    return np.array(values), np.array(weights)


# ---------------------------------------------------------------------------
# quintile tables
# ---------------------------------------------------------------------------


def quintile_means(
    values_by_household: Mapping[str, float],
    sample: WeightedSample,
    quintile_of: Mapping[str, int],
) -> np.ndarray:
    """Weighted mean of a household measure within each baseline quintile."""
    sums = np.zeros(5)
    masses = np.zeros(5)
    for h in sample.households:
        q = quintile_of[h.household_id] - 1
        sums[q] += h.weight * values_by_household[h.household_id]
        masses[q] += h.weight
    if np.any(masses <= 0):
        empty = [i + 1 for i in range(5) if masses[i] <= 0]
        raise DataError(f"empty quintile(s): {empty}")
    return sums / masses


@dataclass(frozen=True)
class QuintileTable:
    """Five quintile means in monthly currency, optionally with the
    percentage change against a baseline table."""

    means_monthly: tuple[float, ...]
    pct_change: tuple[float, ...] | None


def quintile_table(
    values_by_household: Mapping[str, float],
    sample: WeightedSample,
    quintile_of: Mapping[str, int],
    baseline_means_monthly: Sequence[float] | None = None,
) -> QuintileTable:
    means = quintile_means(values_by_household, sample, quintile_of)
    monthly = means * FORTNIGHTS_PER_MONTH
    pct = None
    if baseline_means_monthly is not None:
        base = np.asarray(baseline_means_monthly, dtype=float)
        pct = tuple((monthly - base) / base * 100.0)
    return QuintileTable(means_monthly=tuple(monthly), pct_change=pct)
