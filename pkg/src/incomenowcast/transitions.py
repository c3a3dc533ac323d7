"""Labour-market transition propensities and alignment to external counts.

Two probit models are estimated on the panel, separately by sex and wave:
whether a person currently out of the labour force has worked since the
baseline month (benefit-eligibility relaxation), and whether an employed
person remains employed in the next wave (its complement proxies wage-subsidy
receipt). Scores transfer to the baseline sample, and simulated binary
outcomes are aligned so their weighted count hits an administrative target
exactly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from . import design
from .design import Context, DesignInfo
from .errors import AlignmentError, DataError
from .mle import fit_binary_mle
from .records import LabourState, MonthId, Sex, WeightedSample


class TransitionOutcome(str, enum.Enum):
    # out of the labour force now, but employed in some wave since baseline
    RECENT_EMPLOYMENT = "recent_employment"
    # employed last wave and still employed this wave
    JOB_RETENTION = "job_retention"


RECENT_EMPLOYMENT_TERMS = (
    "age",
    "age_sq",
    "bachelor_or_higher",
    "overseas_born",
    "n_children_0_4",
    "n_children_5_14",
    "state",
)

JOB_RETENTION_TERMS = RECENT_EMPLOYMENT_TERMS + (
    "industry",
    "occupation",
    "usual_hours",
    "n_jobs",
)

DEFAULT_TERMS = {
    TransitionOutcome.RECENT_EMPLOYMENT: RECENT_EMPLOYMENT_TERMS,
    TransitionOutcome.JOB_RETENTION: JOB_RETENTION_TERMS,
}

_CONDITION = {
    TransitionOutcome.RECENT_EMPLOYMENT: LabourState.NOT_IN_LABOUR_FORCE,
    TransitionOutcome.JOB_RETENTION: LabourState.EMPLOYED,
}


@dataclass
class ProbitModel:
    outcome: TransitionOutcome
    stratum: tuple[Sex, MonthId]
    design: DesignInfo
    intercept: float
    coefficients: np.ndarray
    standard_errors: np.ndarray  # intercept first
    loglik: float
    iterations: int
    converged: bool

    def predict(self, contexts: Sequence[Context]) -> np.ndarray:
        X = design.build_matrix(contexts, self.design)
        beta = np.concatenate(([self.intercept], self.coefficients))
        return ndtr(X @ beta)


def _observations(
    waves: Sequence[WeightedSample],
    outcome: TransitionOutcome,
    stratum: tuple[Sex, MonthId],
) -> tuple[list[Context], np.ndarray, np.ndarray]:
    """Assemble (context, outcome, weight) rows for one stratum.

    Retention rows condition on employment in the wave before the stratum
    wave and use that earlier wave's covariates. Recent-employment rows
    condition on being out of the labour force in the stratum wave, with the
    outcome read off the person's earlier observed waves.
    """
    sex, month = stratum
    index = {w.month: w for w in waves}
    if month not in index:
        raise DataError(f"panel has no wave for month {month}")
    wave = index[month]

    contexts: list[Context] = []
    ys: list[float] = []
    ws: list[float] = []
    if outcome is TransitionOutcome.JOB_RETENTION:
        prev_month = month.plus(-1)
        if prev_month not in index:
            raise DataError(f"panel has no wave for month {prev_month}")
        now_state = {
            p.person_id: p.labour_state for _, p in index[month].persons()
        }
        for h, p in index[prev_month].adults():
            if p.sex is not sex or p.labour_state is not LabourState.EMPLOYED:
                continue
            state_now = now_state.get(p.person_id)
            if state_now is None:  # rotated out
                continue
            contexts.append((h, p))
            ys.append(1.0 if state_now is LabourState.EMPLOYED else 0.0)
            ws.append(h.weight)
    else:
        earlier = [w for w in waves if w.month < month]
        ever_employed: set[str] = set()
        for w in earlier:
            for _, p in w.adults():
                if p.labour_state is LabourState.EMPLOYED:
                    ever_employed.add(p.person_id)
        seen_before: set[str] = {
            p.person_id for w in earlier for _, p in w.adults()
        }
        for h, p in wave.adults():
            if p.sex is not sex:
                continue
            if p.labour_state is not LabourState.NOT_IN_LABOUR_FORCE:
                continue
            if p.person_id not in seen_before:  # no history to read the outcome from
                continue
            contexts.append((h, p))
            ys.append(1.0 if p.person_id in ever_employed else 0.0)
            ws.append(h.weight)
    return contexts, np.array(ys), np.array(ws)


def fit_probit(
    waves: Sequence[WeightedSample],
    outcome: TransitionOutcome,
    stratum: tuple[Sex, MonthId],
    terms: tuple[str, ...] | None = None,
) -> ProbitModel:
    """Fit the stratum's probit by maximum likelihood.

    Raises DataError when the stratum subsample is empty or the outcome is
    constant in it, and the mle errors on separation or singularity.
    """
    terms = DEFAULT_TERMS[outcome] if terms is None else terms
    contexts, y, w = _observations(waves, outcome, stratum)
    if not contexts:
        raise DataError(f"empty stratum {stratum[0].value}/{stratum[1]}")
    if y.min() == y.max():
        raise DataError(
            f"outcome {outcome.value} constant in stratum "
            f"{stratum[0].value}/{stratum[1]}"
        )
    info = design.build_design_info(contexts, terms)
    X = design.build_matrix(contexts, info)
    fit = fit_binary_mle(X, y, w, link="probit", columns=info.columns)
    return ProbitModel(
        outcome=outcome,
        stratum=stratum,
        design=info,
        intercept=float(fit.coefficients[0]),
        coefficients=fit.coefficients[1:].copy(),
        standard_errors=np.sqrt(np.diag(fit.cov)),
        loglik=fit.loglik,
        iterations=fit.iterations,
        converged=fit.converged,
    )


def score_baseline(model: ProbitModel, sample: WeightedSample) -> dict[str, float]:
    """Propensities for baseline persons in the model's conditioning
    population (and of the stratum's sex); everyone else gets no score."""
    condition = _CONDITION[model.outcome]
    sex = model.stratum[0]
    contexts = [
        (h, p)
        for h, p in sample.adults()
        if p.sex is sex and p.labour_state is condition
    ]
    if not contexts:
        return {}
    probs = model.predict(contexts)
    return {p.person_id: float(pr) for (_, p), pr in zip(contexts, probs)}


@dataclass(frozen=True)
class AlignmentTarget:
    outcome: TransitionOutcome
    target_count: float  # weighted persons
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.target_count < 0:
            raise ValueError("target_count must be non-negative")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")


_PROB_CLIP = 1e-12


def align_binary(
    scores: Mapping[str, float],
    weights: Mapping[str, float],
    target: AlignmentTarget,
    seed: int,
) -> frozenset[str]:
    """Select persons so the weighted count first reaches the target.

    Persons are ranked by the latent index of their propensity plus logistic
    noise (scale ``noise_scale``; zero makes the ranking a pure top-k by
    score) and selected greedily. The achieved weighted count overshoots the
    target by less than the final selected person's weight.
    """
    ids = sorted(scores)
    total = sum(weights[i] for i in ids)
    if target.target_count > total * (1.0 + 1e-12):
        raise AlignmentError(
            f"infeasible alignment target {target.target_count:.6g} with "
            f"eligible weight {total:.6g}"
        )
    if target.target_count <= 0 or not ids:
        return frozenset()
    latent = ndtri(np.clip([scores[i] for i in ids], _PROB_CLIP, 1.0 - _PROB_CLIP))
    if target.noise_scale > 0:
        rng = np.random.default_rng(seed)
        latent = latent + rng.logistic(0.0, target.noise_scale, size=len(ids))
    order = sorted(range(len(ids)), key=lambda k: (-latent[k], ids[k]))
    selected = []
    cum = 0.0
    for k in order:
        selected.append(ids[k])
        cum += weights[ids[k]]
        if cum >= target.target_count:
            break
    return frozenset(selected)


def apply_transitions(
    sample: WeightedSample,
    jobkeeper_selection: frozenset[str] | set[str],
    eligibility_selection: frozenset[str] | set[str],
) -> WeightedSample:
    """Set subsidy and benefit-eligibility flags on the selected persons.

    Wage-subsidy flags may only land on employed persons and eligibility
    flags only on persons out of the labour force; anything else raises.
    """
    overlap = set(jobkeeper_selection) & set(eligibility_selection)
    if overlap:
        raise DataError(f"persons selected for both outcomes: {sorted(overlap)[:5]}")
    seen: set[str] = set()
    households = []
    for h in sample.households:
        members = []
        changed = False
        for p in h.members:
            if p.person_id in jobkeeper_selection:
                if p.labour_state is not LabourState.EMPLOYED:
                    raise DataError(
                        f"person {p.person_id}: wage-subsidy flag on a "
                        f"{p.labour_state.value} person"
                    )
                p = replace(p, jobkeeper_flag=True)
                changed = True
                seen.add(p.person_id)
            elif p.person_id in eligibility_selection:
                if p.labour_state is not LabourState.NOT_IN_LABOUR_FORCE:
                    raise DataError(
                        f"person {p.person_id}: eligibility flag on a "
                        f"{p.labour_state.value} person"
                    )
                p = replace(p, employed_since_baseline_flag=True)
                changed = True
                seen.add(p.person_id)
            members.append(p)
        households.append(replace(h, members=tuple(members)) if changed else h)
    missing = (set(jobkeeper_selection) | set(eligibility_selection)) - seen
    if missing:
        raise DataError(f"selected persons not present in sample: {sorted(missing)[:5]}")
    return WeightedSample(month=sample.month, households=tuple(households))
