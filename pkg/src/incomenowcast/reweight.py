"""Semi-parametric reweighting of the baseline survey toward a panel wave.

A binary membership model (logit link) is fitted on the pooled person-level
records of the baseline survey and one panel wave. The fitted odds of a
record belonging to the panel, times a prior reflecting relative dataset
size, gives the density ratio used to update the baseline weights. Records
keep their incomes and characteristics; only weights move.

Weights live on households while the membership model is a person-level
object, so a household's update factor is the mean ratio over its members
aged 15+. Fixtures that need exact cell-share replication use one-adult
households, where the two coincide.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import design
from .design import Context, DesignInfo
from .errors import ConvergenceError, DataError
from .mle import fit_binary_mle
from .records import ADULT_AGE, MonthId, WeightedSample

# Occupation enters as its ordinal rank: its categorical "none" level would
# coincide exactly with industry's (both exist only for job-holders) and the
# two dummy groups would be collinear.
DEFAULT_MEMBERSHIP_TERMS = (
    "age",
    "age_sq",
    "partnered",
    "male",
    "overseas_born",
    "industry",
    "occupation_rank",
    "hours_band",
    "n_jobs",
    "unemployment_duration",
    "employment",
    "male:employment",
    "age:employment",
    "n_children_0_4",
    "n_children_5_14",
    "household_size",
    "state",
)

DEFAULT_TRIM_QUANTILE = 0.995


@dataclass(frozen=True)
class CovariateSpec:
    """Terms entering the membership model; ``saturated`` crosses all
    (categorical) terms into one dummy per observed cell."""

    terms: tuple[str, ...] = DEFAULT_MEMBERSHIP_TERMS
    saturated: bool = False
    min_age: int = ADULT_AGE


@dataclass
class MembershipModel:
    spec: CovariateSpec
    design: DesignInfo
    intercept: float
    coefficients: np.ndarray  # non-intercept columns
    loglik: float
    iterations: int
    converged: bool
    panel_month: MonthId

    def linear_predictor(self, contexts: Sequence[Context]) -> np.ndarray:
        X = design.build_matrix(contexts, self.design)
        beta = np.concatenate(([self.intercept], self.coefficients))
        return X @ beta

    def predict_prob(self, contexts: Sequence[Context]) -> np.ndarray:
        from scipy.special import expit

        return expit(self.linear_predictor(contexts))


@dataclass
class WeightUpdate:
    """Per-person density ratios and the resulting (uncalibrated) weights."""

    gamma: float
    person_ratios: dict[str, float]
    household_factors: dict[str, float]
    new_weights: dict[str, float]
    base_sample: WeightedSample
    target_month: MonthId


def _contexts(sample: WeightedSample, min_age: int) -> list[Context]:
    return [(h, p) for h, p in sample.persons() if p.age >= min_age]


def default_gamma(
    baseline: WeightedSample, panel: WeightedSample, min_age: int = ADULT_AGE
) -> float:
    """Relative dataset-size prior: baseline person mass over panel person mass."""
    w_base = sum(h.weight for h, p in baseline.persons() if p.age >= min_age)
    w_panel = sum(h.weight for h, p in panel.persons() if p.age >= min_age)
    if w_base <= 0 or w_panel <= 0:
        raise DataError("zero person mass in baseline or panel")
    return w_base / w_panel


def fit_membership(
    baseline: WeightedSample, panel: WeightedSample, spec: CovariateSpec | None = None
) -> MembershipModel:
    """Fit the panel-membership logit on the pooled samples.

    Records are weighted by their household weights (frequency weights).
    Raises DataError when a covariate column is constant across the pool and
    the fit errors from mle on separation or a singular information matrix.
    """
    spec = spec or CovariateSpec()
    ctx_base = _contexts(baseline, spec.min_age)
    ctx_panel = _contexts(panel, spec.min_age)
    if not ctx_base or not ctx_panel:
        raise DataError("empty baseline or panel after age filtering")
    pooled = ctx_base + ctx_panel
    info = design.build_design_info(pooled, spec.terms, saturated=spec.saturated)
    X = design.build_matrix(pooled, info)
    constant = design.constant_columns(X, info.columns)
    if constant:
        raise DataError(f"constant covariate columns across the pool: {constant}")
    y = np.concatenate([np.zeros(len(ctx_base)), np.ones(len(ctx_panel))])
    w = np.array([h.weight for h, _ in pooled])
    fit = fit_binary_mle(X, y, w, link="logit", columns=info.columns)
    return MembershipModel(
        spec=spec,
        design=info,
        intercept=float(fit.coefficients[0]),
        coefficients=fit.coefficients[1:].copy(),
        loglik=fit.loglik,
        iterations=fit.iterations,
        converged=fit.converged,
        panel_month=panel.month,
    )


def compute_ratios(
    model: MembershipModel,
    baseline: WeightedSample,
    gamma: float,
    trim_quantile: float | None = DEFAULT_TRIM_QUANTILE,
) -> WeightUpdate:
    """Per-person density ratios odds(panel | x) * gamma, and household weights.

    Ratios above the ``trim_quantile`` quantile are capped (pass None to
    disable trimming).
    """
    if not model.converged:
        raise ConvergenceError("membership model did not converge")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    contexts = _contexts(baseline, model.spec.min_age)
    eta = model.linear_predictor(contexts)
    odds = np.exp(eta)
    if not np.all(np.isfinite(odds)):
        raise DataError("zero source-membership probability; cannot invert")
    if trim_quantile is not None:
        odds = np.minimum(odds, np.quantile(odds, trim_quantile))
    ratios = odds * gamma

    person_ratios: dict[str, float] = {}
    per_household: dict[str, list[float]] = {}
    for (h, p), r in zip(contexts, ratios):
        person_ratios[p.person_id] = float(r)
        per_household.setdefault(h.household_id, []).append(float(r))

    household_factors = {}
    new_weights = {}
    for h in baseline.households:
        rs = per_household.get(h.household_id)
        factor = float(np.mean(rs)) if rs else gamma
        household_factors[h.household_id] = factor
        new_weights[h.household_id] = h.weight * factor
    return WeightUpdate(
        gamma=gamma,
        person_ratios=person_ratios,
        household_factors=household_factors,
        new_weights=new_weights,
        base_sample=baseline,
        target_month=model.panel_month,
    )


def calibrate_total(update: WeightUpdate, population_target: float) -> WeightedSample:
    """Uniformly rescale updated weights so they sum to the population target."""
    if population_target <= 0:
        raise ValueError("population target must be positive")
    total = sum(update.new_weights.values())
    if total <= 0:
        raise DataError("zero weight mass after update")
    scale = population_target / total
    households = tuple(
        replace(h, weight=update.new_weights[h.household_id] * scale)
        for h in update.base_sample.households
    )
    return WeightedSample(month=update.target_month, households=households)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass
class DiagnosticsReport:
    """Demographic shares in the baseline, the panel and the reweighted
    sample, plus weight-dispersion diagnostics."""

    rows: list[tuple[str, float, float, float]]
    neff_before: float
    neff_after: float
    weight_ratio: float  # max/min reweighted household weight

    def as_mapping(self) -> dict[str, tuple[float, float, float]]:
        return {name: (b, p, m) for name, b, p, m in self.rows}


def effective_sample_size(weights: Sequence[float]) -> float:
    w = np.asarray(list(weights), dtype=float)
    if w.size == 0 or np.sum(w) <= 0:
        return 0.0
    return float(np.sum(w) ** 2 / np.sum(w * w))


def _profile(sample: WeightedSample) -> dict[str, float]:
    w_adult = 0.0
    acc = {
        "share_age_15_24": 0.0,
        "share_age_25_64": 0.0,
        "share_age_65_plus": 0.0,
        "share_male": 0.0,
        "share_partnered": 0.0,
        "share_locally_born": 0.0,
        "share_bachelor_or_higher": 0.0,
    }
    employed = unemployed = 0.0
    kids = hh_mass = 0.0
    for h in sample.households:
        hh_mass += h.weight
        kids += h.weight * (h.n_children_0_4 + h.n_children_5_14)
        for p in h.members:
            if not p.is_adult:
                continue
            w = h.weight
            w_adult += w
            if p.age <= 24:
                acc["share_age_15_24"] += w
            elif p.age <= 64:
                acc["share_age_25_64"] += w
            else:
                acc["share_age_65_plus"] += w
            if p.sex.value == "male":
                acc["share_male"] += w
            if p.marital.value == "partnered":
                acc["share_partnered"] += w
            if not p.overseas_born:
                acc["share_locally_born"] += w
            if int(p.education) >= 1:
                acc["share_bachelor_or_higher"] += w
            if p.labour_state.value == "employed":
                employed += w
            elif p.labour_state.value == "unemployed":
                unemployed += w
    out = {k: v / w_adult for k, v in acc.items()} if w_adult > 0 else dict(acc)
    labour_force = employed + unemployed
    out["unemployment_rate"] = unemployed / labour_force if labour_force > 0 else 0.0
    out["mean_children_under_15"] = kids / hh_mass if hh_mass > 0 else 0.0
    return out


def reweight_diagnostics(
    before: WeightedSample, after: WeightedSample, panel: WeightedSample
) -> DiagnosticsReport:
    """Comparison table of demographic shares across the three samples."""
    prof_b = _profile(before)
    prof_p = _profile(panel)
    prof_a = _profile(after)
    rows = [
        (name, prof_b[name], prof_p[name], prof_a[name]) for name in prof_b
    ]
    after_weights = [h.weight for h in after.households]
    positive = [w for w in after_weights if w > 0]
    ratio = max(positive) / min(positive) if positive else float("nan")
    return DiagnosticsReport(
        rows=rows,
        neff_before=effective_sample_size([h.weight for h in before.households]),
        neff_after=effective_sample_size(after_weights),
        weight_ratio=ratio,
    )
