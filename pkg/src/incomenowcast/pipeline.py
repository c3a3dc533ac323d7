"""Batch orchestration: config, the month-by-month run, and table output.

Each analysis month is processed independently: reweight the baseline survey
to that month's panel wave, index incomes, simulate and align transitions,
evaluate the tax-benefit scenarios, and decompose the change in every
outcome measure. All randomness flows from per-(stage, month) seeds derived
from the master seed, so identical configs reproduce identical output bytes
and removing one month from the config cannot perturb another.
"""
from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__, io
from .decompose import (
    Bound,
    DecompositionResult,
    DisposableBreakdown,
    build_counterfactual,
    decomposition_from_values,
    materialise_wage_subsidy,
    without_free_childcare,
)
from .errors import ConfigError, DataError, SeparationError, SingularModelError
from .indexation import IndexTables, index_sample
from .records import (
    FORTNIGHTS_PER_MONTH,
    LabourState,
    MonthId,
    Sex,
    WeightedSample,
    assign_quintiles,
)
from .reweight import (
    CovariateSpec,
    DiagnosticsReport,
    calibrate_total,
    compute_ratios,
    default_gamma,
    fit_membership,
    reweight_diagnostics,
)
from .stats import (
    IncomeConcept,
    PovertyLine,
    anchor_poverty_line,
    gini,
    household_concept_values,
    person_concept_arrays,
    person_market_income_arrays,
    poverty_rate,
    quintile_means,
)
from .synthpop import PayrollSeries, SynthConfig, gen_baseline_survey, gen_labour_panel, gen_payroll
from .taxben import PolicyRegime, compute_sample, load_regime
from .transitions import (
    AlignmentTarget,
    TransitionOutcome,
    align_binary,
    apply_transitions,
    fit_probit,
    score_baseline,
)


def derive_seed(master: int, label: str) -> int:
    """Stable per-stage child seed from the master seed and a label."""
    tag = zlib.crc32(label.encode("utf-8"))
    return int(np.random.SeedSequence([master, tag]).generate_state(1, np.uint64)[0])


def interpolate_target(anchors: Mapping[MonthId, float], month: MonthId) -> float:
    """Linear interpolation between anchor months; clamped outside the range."""
    if not anchors:
        raise ConfigError("no alignment anchors configured")
    if month in anchors:
        return anchors[month]
    months = sorted(anchors)
    if month <= months[0]:
        return anchors[months[0]]
    if month >= months[-1]:
        return anchors[months[-1]]
    for lo, hi in zip(months, months[1:]):
        if lo < month < hi:
            span = hi.months_since(lo)
            t = month.months_since(lo) / span
            return anchors[lo] + t * (anchors[hi] - anchors[lo])
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunOptions:
    trim_quantile: float | None = 0.995
    noise_scale: float = 1.0
    poverty_line_factor: float = 0.5


@dataclass(frozen=True)
class DataPaths:
    """Pre-generated inputs instead of on-the-fly synthesis."""

    survey_persons: Path
    survey_households: Path
    panel: tuple[tuple[MonthId, Path, Path], ...]  # (month, persons, households)
    payroll: Path


@dataclass(frozen=True)
class RunConfig:
    seed: int
    baseline_month: MonthId
    analysis_months: tuple[MonthId, ...]
    regime_baseline_path: Path
    regime_reform_path: Path
    output_dir: Path
    synth: SynthConfig | None = None
    data: DataPaths | None = None
    index_series_path: Path | None = None
    awe_factor: float = 1.05
    years_to_baseline: float = 2.0
    annual_real_return: float = 0.025
    population_target: float | None = None
    jobkeeper_targets: Mapping[MonthId, float] = field(default_factory=dict)
    eligibility_targets: Mapping[MonthId, float] = field(default_factory=dict)
    options: RunOptions = field(default_factory=RunOptions)
    config_sha256: str = ""


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else (base / path)


def load_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    """Parse a run-config JSON file; relative paths resolve against it."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = path.read_bytes()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    overrides = overrides or {}
    base = path.parent
    try:
        seed = int(overrides.get("seed", data["seed"]))
        baseline_month = MonthId.parse(data["baseline_month"])
        months = overrides.get("months") or data["analysis_months"]
        analysis_months = tuple(MonthId.parse(m) for m in months)
        regimes = data["regimes"]
        synth = None
        if "synth" in data:
            s = data["synth"]
            synth = SynthConfig(
                seed=seed,
                n_households=int(s["n_households"]),
                n_panel_waves=int(s.get("n_panel_waves", 5)),
                rotation_retention=float(s.get("rotation_retention", 0.82)),
                panel_households=(
                    int(s["panel_households"]) if "panel_households" in s else None
                ),
                population_households=float(s.get("population_households", 9.9e6)),
                baseline_month=baseline_month,
            )
        datapaths = None
        if "data" in data:
            d = data["data"]
            datapaths = DataPaths(
                survey_persons=_resolve(base, d["persons"]),
                survey_households=_resolve(base, d["households"]),
                panel=tuple(
                    (MonthId.parse(w["month"]), _resolve(base, w["persons"]),
                     _resolve(base, w["households"]))
                    for w in d.get("panel", [])
                ),
                payroll=_resolve(base, d["payroll"]),
            )
        index = data.get("index", {})
        alignment = data.get("alignment", {})
        options = data.get("options", {})
        trim = options.get("trim_quantile", 0.995)
        if overrides.get("out"):
            # command-line/env overrides are relative to the caller, not the config
            output_dir = Path(overrides["out"]).absolute()
        else:
            output_dir = _resolve(base, data["output_dir"])
        cfg = RunConfig(
            seed=seed,
            baseline_month=baseline_month,
            analysis_months=analysis_months,
            regime_baseline_path=_resolve(base, regimes["baseline"]),
            regime_reform_path=_resolve(base, regimes["reform"]),
            output_dir=output_dir,
            synth=synth,
            data=datapaths,
            index_series_path=(
                _resolve(base, index["series_csv"]) if "series_csv" in index else None
            ),
            awe_factor=float(index.get("awe_factor", 1.05)),
            years_to_baseline=float(index.get("years_to_baseline", 2.0)),
            annual_real_return=float(index.get("annual_real_return", 0.025)),
            population_target=(
                float(data["population_target"]) if "population_target" in data else None
            ),
            jobkeeper_targets={
                MonthId.parse(k): float(v)
                for k, v in alignment.get("jobkeeper_targets", {}).items()
            },
            eligibility_targets={
                MonthId.parse(k): float(v)
                for k, v in alignment.get("eligibility_targets", {}).items()
            },
            options=RunOptions(
                trim_quantile=None if trim in (None, 0, "off") else float(trim),
                noise_scale=float(
                    overrides.get("noise_scale", alignment.get("noise_scale", 1.0))
                ),
                poverty_line_factor=float(options.get("poverty_line_factor", 0.5)),
            ),
            config_sha256=hashlib.sha256(raw).hexdigest(),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc!r}") from exc
    if cfg.synth is None and cfg.data is None:
        raise ConfigError("config needs either a synth block or a data block")
    return cfg


def validate(cfg: RunConfig) -> list[str]:
    """Dry-run checks; returns findings instead of raising."""
    findings: list[str] = []
    for month in cfg.analysis_months:
        if month <= cfg.baseline_month:
            findings.append(
                f"analysis month {month} does not follow baseline {cfg.baseline_month}"
            )
    for name, p in (
        ("baseline regime", cfg.regime_baseline_path),
        ("reform regime", cfg.regime_reform_path),
    ):
        if not p.exists():
            findings.append(f"{name} file missing: {p}")
        else:
            try:
                load_regime(p)
            except ConfigError as exc:
                findings.append(str(exc))
    if cfg.index_series_path is not None and not cfg.index_series_path.exists():
        findings.append(f"index series file missing: {cfg.index_series_path}")
    if cfg.synth is not None:
        coverage = cfg.synth.baseline_month.plus(cfg.synth.n_panel_waves - 1)
        for month in cfg.analysis_months:
            if month > coverage:
                findings.append(
                    f"analysis month {month} beyond panel coverage ({coverage})"
                )
    if cfg.data is not None:
        for p in (cfg.data.survey_persons, cfg.data.survey_households, cfg.data.payroll):
            if not p.exists():
                findings.append(f"data file missing: {p}")
        panel_months = {m for m, _, _ in cfg.data.panel}
        for month in (cfg.baseline_month, *cfg.analysis_months):
            if month not in panel_months:
                findings.append(f"panel wave missing for month {month}")
        if cfg.data.survey_persons.exists() and cfg.data.survey_households.exists():
            try:
                io.load_sample(
                    cfg.data.survey_persons,
                    cfg.data.survey_households,
                    cfg.baseline_month,
                )
            except DataError as exc:
                findings.append(str(exc))
    if not cfg.jobkeeper_targets:
        findings.append("no jobkeeper alignment targets configured")
    return findings


# ---------------------------------------------------------------------------
# world assembly
# ---------------------------------------------------------------------------


@dataclass
class World:
    survey: WeightedSample
    waves: dict[MonthId, WeightedSample]
    payroll: PayrollSeries
    index_tables: IndexTables
    regime_baseline: PolicyRegime
    regime_reform: PolicyRegime


def _flat_index(months: Sequence[MonthId]) -> dict[MonthId, float]:
    return {m: 1.0 for m in months}


def prepare_world(cfg: RunConfig) -> World:
    if cfg.synth is not None:
        survey = gen_baseline_survey(cfg.synth)
        waves = gen_labour_panel(cfg.synth, survey)
        payroll = gen_payroll(cfg.synth)
    else:
        survey = io.load_sample(
            cfg.data.survey_persons, cfg.data.survey_households, cfg.baseline_month
        )
        waves = [
            io.load_sample(pp, hp, month) for month, pp, hp in cfg.data.panel
        ]
        payroll = io.read_payroll(cfg.data.payroll, cfg.baseline_month)
    wave_map = {w.month: w for w in waves}

    months = sorted(wave_map) + [m for m in cfg.analysis_months if m not in wave_map]
    if cfg.index_series_path is not None:
        series = io.read_index_series(cfg.index_series_path)
        investment = series.get("investment", _flat_index(months))
        cpi = series.get("cpi", _flat_index(months))
    else:
        investment = _flat_index(months)
        cpi = _flat_index(months)
    tables = IndexTables(
        baseline_month=cfg.baseline_month,
        awe_factor=cfg.awe_factor,
        payroll=payroll,
        investment=investment,
        cpi=cpi,
        annual_real_return=cfg.annual_real_return,
        years_to_baseline=cfg.years_to_baseline,
    )
    return World(
        survey=survey,
        waves=wave_map,
        payroll=payroll,
        index_tables=tables,
        regime_baseline=load_regime(cfg.regime_baseline_path),
        regime_reform=load_regime(cfg.regime_reform_path),
    )


# ---------------------------------------------------------------------------
# measure evaluation
# ---------------------------------------------------------------------------

MEASURES = (
    "market_quintiles",
    "disposable_quintiles",
    "gini_market",
    "gini_disposable",
    "poverty",
)


class ScenarioEvaluator:
    """Evaluates measures over (regime, sample, month), caching the
    tax-benefit results per scenario so every measure reuses one pass."""

    def __init__(self, quintile_of: Mapping[str, int], poverty_line: PovertyLine):
        self.quintile_of = quintile_of
        self.poverty_line = poverty_line
        self._cache: dict = {}

    def results(self, regime: PolicyRegime, sample: WeightedSample, month: MonthId):
        key = (regime.regime_id, id(sample), month)
        if key not in self._cache:
            self._cache[key] = (sample, compute_sample(sample, regime, month))
        return self._cache[key][1]

    def evaluate(self, measure: str, regime, sample, month):
        if measure == "market_quintiles":
            results = self.results(regime, sample, month)
            values = {
                hid: r.gross_income_with_subsidy for hid, r in results.items()
            }
            return quintile_means(values, sample, self.quintile_of) * FORTNIGHTS_PER_MONTH
        if measure == "disposable_quintiles":
            results = self.results(regime, sample, month)
            values = household_concept_values(
                sample, results, IncomeConcept.EQUIV_DISPOSABLE_AFTER_CHILDCARE
            )
            return quintile_means(values, sample, self.quintile_of) * FORTNIGHTS_PER_MONTH
        if measure == "gini_market":
            values, weights = person_market_income_arrays(sample, regime, month)
            return gini(values, weights)
        if measure == "gini_disposable":
            results = self.results(regime, sample, month)
            values, weights = person_concept_arrays(
                sample, results, IncomeConcept.EQUIV_DISPOSABLE
            )
            return gini(values, weights)
        if measure == "poverty":
            results = self.results(regime, sample, month)
            values, weights = person_concept_arrays(
                sample, results, IncomeConcept.EQUIV_AFTER_HOUSING
            )
            return poverty_rate(values, weights, self.poverty_line)
        raise KeyError(measure)


# ---------------------------------------------------------------------------
# month processing
# ---------------------------------------------------------------------------


@dataclass
class BaselineArtifacts:
    sample: WeightedSample  # reweighted to the baseline wave and indexed
    quintile_of: dict[str, int]
    poverty_line: PovertyLine
    measures: dict[str, "float | np.ndarray"]
    diagnostics: DiagnosticsReport
    unemployment: tuple[float, float, float, float]  # model, panel, youth pair


@dataclass
class MonthResults:
    month: MonthId
    nowcast: WeightedSample
    diagnostics: DiagnosticsReport
    unemployment: tuple[float, float, float, float]
    jobkeeper_selected_mass: float
    eligibility_selected_mass: float
    decompositions: dict[str, DecompositionResult]
    breakdown: DisposableBreakdown  # disposable quintile means, monthly currency


def _unemployment_rates(sample: WeightedSample) -> tuple[float, float]:
    """(overall, youth 15-24) weighted unemployment rates."""
    lf = u = lf_y = u_y = 0.0
    for h, p in sample.adults():
        if p.labour_state is LabourState.EMPLOYED:
            lf += h.weight
            if p.age <= 24:
                lf_y += h.weight
        elif p.labour_state is LabourState.UNEMPLOYED:
            lf += h.weight
            u += h.weight
            if p.age <= 24:
                lf_y += h.weight
                u_y += h.weight
    return (u / lf if lf else 0.0, u_y / lf_y if lf_y else 0.0)


def _reweight_to(world: World, cfg: RunConfig, month: MonthId) -> WeightedSample:
    if month not in world.waves:
        raise DataError(f"no panel wave for month {month}")
    wave = world.waves[month]
    model = fit_membership(world.survey, wave, CovariateSpec())
    gamma = default_gamma(world.survey, wave)
    update = compute_ratios(
        model, world.survey, gamma, trim_quantile=cfg.options.trim_quantile
    )
    target = (
        cfg.population_target
        if cfg.population_target is not None
        else world.survey.total_weight()
    )
    return calibrate_total(update, target)


def process_baseline(world: World, cfg: RunConfig) -> BaselineArtifacts:
    month = cfg.baseline_month
    reweighted = _reweight_to(world, cfg, month)
    indexed = index_sample(reweighted, month, world.index_tables)
    results = compute_sample(indexed, world.regime_baseline, month)
    quintile_values = household_concept_values(
        indexed, results, IncomeConcept.EQUIV_DISPOSABLE
    )
    quintile_of = assign_quintiles(indexed, quintile_values)
    ah_values, ah_weights = person_concept_arrays(
        indexed, results, IncomeConcept.EQUIV_AFTER_HOUSING
    )
    line = anchor_poverty_line(
        ah_values, ah_weights, month, cfg.options.poverty_line_factor
    )
    evaluator = ScenarioEvaluator(quintile_of, line)
    measures = {
        m: evaluator.evaluate(m, world.regime_baseline, indexed, month)
        for m in MEASURES
    }
    u_model = _unemployment_rates(indexed)
    u_panel = _unemployment_rates(world.waves[month])
    return BaselineArtifacts(
        sample=indexed,
        quintile_of=quintile_of,
        poverty_line=line,
        measures=measures,
        diagnostics=reweight_diagnostics(world.survey, reweighted, world.waves[month]),
        unemployment=(u_model[0], u_panel[0], u_model[1], u_panel[1]),
    )


def _selection_mass(selected, weights) -> float:
    # fixed summation order: set iteration order varies across processes
    return sum(weights[pid] for pid in sorted(selected))


# Condensed term lists tried in order when a thin stratum makes the full
# specification rank-deficient (or separated); empty stratum and constant
# outcome stay hard errors.
_FALLBACK_TERMS = {
    TransitionOutcome.RECENT_EMPLOYMENT: (
        None,
        ("age", "age_sq", "bachelor_or_higher", "overseas_born",
         "n_children_0_4", "n_children_5_14"),
        ("age", "age_sq"),
        (),
    ),
    TransitionOutcome.JOB_RETENTION: (
        None,
        ("age", "age_sq", "bachelor_or_higher", "overseas_born",
         "n_children_0_4", "n_children_5_14", "usual_hours", "n_jobs"),
        ("age", "age_sq", "usual_hours"),
        (),
    ),
}


def _fit_probit_with_fallback(waves_list, outcome, stratum):
    last: Exception | None = None
    for terms in _FALLBACK_TERMS[outcome]:
        try:
            return fit_probit(waves_list, outcome, stratum, terms=terms)
        except (SingularModelError, SeparationError) as exc:
            last = exc
    raise last


def process_month(
    world: World, cfg: RunConfig, month: MonthId, base: BaselineArtifacts
) -> MonthResults:
    reweighted = _reweight_to(world, cfg, month)
    indexed = index_sample(reweighted, month, world.index_tables)

    # transition propensities by sex for this wave
    jk_scores: dict[str, float] = {}
    elig_scores: dict[str, float] = {}
    for sex in Sex:
        waves_list = sorted(world.waves.values(), key=lambda w: w.month)
        retention = _fit_probit_with_fallback(
            waves_list, TransitionOutcome.JOB_RETENTION, (sex, month)
        )
        for pid, score in score_baseline(retention, indexed).items():
            jk_scores[pid] = 1.0 - score  # receipt risk proxies separation risk
        recent = _fit_probit_with_fallback(
            waves_list, TransitionOutcome.RECENT_EMPLOYMENT, (sex, month)
        )
        elig_scores.update(score_baseline(recent, indexed))

    weights_by_person = {
        p.person_id: h.weight for h, p in indexed.persons()
    }
    jk_target = AlignmentTarget(
        TransitionOutcome.JOB_RETENTION,
        interpolate_target(cfg.jobkeeper_targets, month),
        cfg.options.noise_scale,
    )
    jk_selected = align_binary(
        jk_scores,
        weights_by_person,
        jk_target,
        derive_seed(cfg.seed, f"align_jobkeeper:{month}"),
    )
    if cfg.eligibility_targets:
        elig_target = AlignmentTarget(
            TransitionOutcome.RECENT_EMPLOYMENT,
            interpolate_target(cfg.eligibility_targets, month),
            cfg.options.noise_scale,
        )
        elig_selected = align_binary(
            elig_scores,
            weights_by_person,
            elig_target,
            derive_seed(cfg.seed, f"align_eligibility:{month}"),
        )
    else:
        elig_selected = frozenset()
    nowcast = apply_transitions(indexed, jk_selected, elig_selected)

    # scenario samples, built once and shared by every measure
    counterfactuals = {b: build_counterfactual(nowcast, b) for b in Bound}
    shocked_incomes = materialise_wage_subsidy(nowcast, world.regime_reform, month)
    no_childcare = without_free_childcare(world.regime_reform)

    evaluator = ScenarioEvaluator(base.quintile_of, base.poverty_line)
    decompositions = {}
    for measure in MEASURES:
        i_00 = base.measures[measure]
        i_11 = evaluator.evaluate(measure, world.regime_reform, nowcast, month)
        i_01 = {
            b: evaluator.evaluate(measure, world.regime_baseline, counterfactuals[b], month)
            for b in Bound
        }
        decompositions[measure] = decomposition_from_values(i_00, i_11, i_01)

    # three-way split of the disposable change (quintile means, monthly)
    i_00 = base.measures["disposable_quintiles"]
    i_11 = decompositions["disposable_quintiles"].nowcast_value
    i_11_ncc = evaluator.evaluate("disposable_quintiles", no_childcare, nowcast, month)
    i_01_jk = evaluator.evaluate(
        "disposable_quintiles", world.regime_baseline, shocked_incomes, month
    )
    total = np.asarray(i_11) - np.asarray(i_00)
    free_childcare = np.asarray(i_11) - np.asarray(i_11_ncc)
    gross_income = np.asarray(i_01_jk) - np.asarray(i_00)
    breakdown = DisposableBreakdown(
        total=total,
        free_childcare=free_childcare,
        gross_income=gross_income,
        rest=total - free_childcare - gross_income,
    )

    u_model = _unemployment_rates(indexed)
    u_panel = _unemployment_rates(world.waves[month])
    return MonthResults(
        month=month,
        nowcast=nowcast,
        diagnostics=reweight_diagnostics(world.survey, reweighted, world.waves[month]),
        unemployment=(u_model[0], u_panel[0], u_model[1], u_panel[1]),
        jobkeeper_selected_mass=_selection_mass(jk_selected, weights_by_person),
        eligibility_selected_mass=_selection_mass(elig_selected, weights_by_person),
        decompositions=decompositions,
        breakdown=breakdown,
    )


# ---------------------------------------------------------------------------
# output tables
# ---------------------------------------------------------------------------

IDENTITY_TOLERANCE = 1e-9


def _check_identities(results: Sequence[MonthResults]) -> None:
    for res in results:
        for measure, dec in res.decompositions.items():
            for bound, eff in dec.bounds.items():
                if eff.identity_residual > IDENTITY_TOLERANCE:
                    raise RuntimeError(
                        f"decomposition identity violated for {measure}/"
                        f"{bound.value} in {res.month}: {eff.identity_residual:.2e}"
                    )
        br = res.breakdown
        resid = np.max(
            np.abs(
                np.asarray(br.free_childcare)
                + np.asarray(br.gross_income)
                + np.asarray(br.rest)
                - np.asarray(br.total)
            )
        )
        if resid > IDENTITY_TOLERANCE * max(1.0, float(np.max(np.abs(br.total)))):
            raise RuntimeError(f"breakdown identity violated in {res.month}")


def _pct(value: float, base: float) -> float:
    return (value / base) * 100.0 if base else float("nan")


def write_outputs(
    cfg: RunConfig,
    base: BaselineArtifacts,
    results: Sequence[MonthResults],
    out_dir: Path | None = None,
) -> Path:
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    months = [r.month for r in results]

    # demographic validation, one file per processed month
    def _write_validation(month: MonthId, diag: DiagnosticsReport):
        rows = [
            (name, b, p, m) for name, b, p, m in diag.rows
        ] + [
            ("effective_sample_size", diag.neff_before, "", diag.neff_after),
            ("max_min_weight_ratio", "", "", diag.weight_ratio),
        ]
        io.write_csv(
            out / f"validation_{month}.csv",
            ("variable", "baseline_survey", "panel", "reweighted"),
            rows,
        )

    _write_validation(cfg.baseline_month, base.diagnostics)
    for res in results:
        _write_validation(res.month, res.diagnostics)

    io.write_csv(
        out / "unemployment.csv",
        ("month", "modelled", "panel", "modelled_youth", "panel_youth"),
        [(str(cfg.baseline_month), *base.unemployment)]
        + [(str(r.month), *r.unemployment) for r in results],
    )

    # quintile income tables with counterfactual scenario panels
    for measure, filename in (
        ("market_quintiles", "market_income_quintiles.csv"),
        ("disposable_quintiles", "disposable_income_quintiles.csv"),
    ):
        rows = []
        base_means = np.asarray(base.measures[measure])
        for q in range(5):
            rows.append(
                (str(cfg.baseline_month), "baseline", q + 1, base_means[q], 0.0)
            )
        for res in results:
            dec = res.decompositions[measure]
            panels = [
                ("nowcast", np.asarray(dec.nowcast_value)),
                ("keep_jobs", np.asarray(dec.bounds[Bound.KEEP_JOBS].counterfactual_value)),
                ("lose_jobs", np.asarray(dec.bounds[Bound.LOSE_JOBS].counterfactual_value)),
            ]
            for scenario, values in panels:
                for q in range(5):
                    rows.append(
                        (
                            str(res.month),
                            scenario,
                            q + 1,
                            values[q],
                            _pct(values[q] - base_means[q], base_means[q]),
                        )
                    )
        io.write_csv(
            out / filename,
            ("month", "scenario", "quintile", "mean_monthly", "pct_change_vs_baseline"),
            rows,
        )

    # effect decompositions per quintile
    for measure, filename in (
        ("market_quintiles", "effects_market_income.csv"),
        ("disposable_quintiles", "effects_disposable_income.csv"),
    ):
        rows = []
        base_means = np.asarray(base.measures[measure])
        for res in results:
            dec = res.decompositions[measure]
            for bound in Bound:
                eff = dec.bounds[bound]
                shock = np.asarray(eff.income_shock_effect)
                policy = np.asarray(eff.policy_response_effect)
                for q in range(5):
                    rows.append(
                        (
                            str(res.month),
                            bound.value,
                            q + 1,
                            shock[q],
                            policy[q],
                            _pct(shock[q], base_means[q]),
                            _pct(policy[q], base_means[q]),
                        )
                    )
        io.write_csv(
            out / filename,
            (
                "month",
                "bound",
                "quintile",
                "income_shock_monthly",
                "policy_response_monthly",
                "income_shock_pct_of_baseline",
                "policy_response_pct_of_baseline",
            ),
            rows,
        )

    # three-way breakdown of the disposable change, as % of the baseline mean
    rows = []
    base_disp = np.asarray(base.measures["disposable_quintiles"])
    for res in results:
        br = res.breakdown
        for q in range(5):
            rows.append(
                (
                    str(res.month),
                    q + 1,
                    _pct(np.asarray(br.total)[q], base_disp[q]),
                    _pct(np.asarray(br.free_childcare)[q], base_disp[q]),
                    _pct(np.asarray(br.gross_income)[q], base_disp[q]),
                    _pct(np.asarray(br.rest)[q], base_disp[q]),
                )
            )
    io.write_csv(
        out / "breakdown_disposable_income.csv",
        ("month", "quintile", "total_pct", "free_childcare_pct", "gross_income_pct", "rest_pct"),
        rows,
    )

    # Gini and poverty series with effect bounds
    for measure, filename in (
        ("gini_market", "gini_market_income.csv"),
        ("gini_disposable", "gini_disposable_income.csv"),
    ):
        rows = [
            (str(cfg.baseline_month), base.measures[measure], 0.0, "", "", "", "")
        ]
        for res in results:
            dec = res.decompositions[measure]
            keep = dec.bounds[Bound.KEEP_JOBS]
            lose = dec.bounds[Bound.LOSE_JOBS]
            rows.append(
                (
                    str(res.month),
                    dec.nowcast_value,
                    dec.total_change,
                    keep.income_shock_effect,
                    lose.income_shock_effect,
                    keep.policy_response_effect,
                    lose.policy_response_effect,
                )
            )
        io.write_csv(
            out / filename,
            (
                "month",
                "gini",
                "change_vs_baseline",
                "income_shock_keep_jobs",
                "income_shock_lose_jobs",
                "policy_response_keep_jobs",
                "policy_response_lose_jobs",
            ),
            rows,
        )

    rows = [
        (
            str(cfg.baseline_month),
            base.measures["poverty"],
            base.measures["poverty"],
            base.measures["poverty"],
        )
    ]
    for res in results:
        dec = res.decompositions["poverty"]
        rows.append(
            (
                str(res.month),
                dec.nowcast_value,
                dec.bounds[Bound.KEEP_JOBS].counterfactual_value,
                dec.bounds[Bound.LOSE_JOBS].counterfactual_value,
            )
        )
    io.write_csv(
        out / "poverty.csv",
        ("month", "nowcast", "no_policy_keep_jobs", "no_policy_lose_jobs"),
        rows,
    )

    io.write_csv(
        out / "alignment.csv",
        ("month", "jobkeeper_target", "jobkeeper_selected", "eligibility_target", "eligibility_selected"),
        [
            (
                str(r.month),
                interpolate_target(cfg.jobkeeper_targets, r.month),
                r.jobkeeper_selected_mass,
                (
                    interpolate_target(cfg.eligibility_targets, r.month)
                    if cfg.eligibility_targets
                    else 0.0
                ),
                r.eligibility_selected_mass,
            )
            for r in results
        ],
    )

    import platform

    import scipy

    manifest = {
        "seed": cfg.seed,
        "config_sha256": cfg.config_sha256,
        "versions": {
            "package": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "baseline_month": str(cfg.baseline_month),
        "analysis_months": [str(m) for m in months],
        "poverty_line": base.poverty_line.value,
        "population_target": cfg.population_target,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def run_pipeline(cfg: RunConfig) -> Path:
    """Run every analysis month and write the output tables; returns the
    output directory."""
    world = prepare_world(cfg)
    base = process_baseline(world, cfg)
    results = [process_month(world, cfg, month, base) for month in cfg.analysis_months]
    _check_identities(results)
    return write_outputs(cfg, base, results)
