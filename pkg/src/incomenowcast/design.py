"""Design matrices for person-level binary-response models.

Terms are named extractors over a (household, person) context. Categorical
terms are dummy-encoded against a reference level shared between the datasets
a model is fitted on and later scored on; numeric-by-categorical interaction
terms multiply a numeric extractor into the non-reference dummies.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .records import HouseholdRecord, PersonRecord

Context = tuple[HouseholdRecord, PersonRecord]

HOURS_BAND_WIDTH = 5.0
HOURS_BAND_CAP = 50.0


def hours_band(hours: float) -> str:
    if hours >= HOURS_BAND_CAP:
        return "50+"
    lo = int(HOURS_BAND_WIDTH * (hours // HOURS_BAND_WIDTH))
    return f"{lo:02d}"


def _industry_level(p: PersonRecord) -> str:
    return p.industry.value if p.industry is not None else "none"


def _occupation_level(p: PersonRecord) -> str:
    return f"occ{p.occupation.value}" if p.occupation is not None else "none"


@dataclass(frozen=True)
class NumericTerm:
    name: str
    fn: Callable[[HouseholdRecord, PersonRecord], float]


@dataclass(frozen=True)
class CategoricalTerm:
    name: str
    fn: Callable[[HouseholdRecord, PersonRecord], str]


@dataclass(frozen=True)
class InteractionTerm:
    """Numeric extractor times the non-reference dummies of a categorical."""

    name: str
    numeric: Callable[[HouseholdRecord, PersonRecord], float]
    categorical: str


TERMS: dict[str, NumericTerm | CategoricalTerm | InteractionTerm] = {}


def _register(term):
    TERMS[term.name] = term
    return term


_register(NumericTerm("age", lambda h, p: float(p.age)))
_register(NumericTerm("age_sq", lambda h, p: float(p.age) ** 2))
_register(NumericTerm("male", lambda h, p: 1.0 if p.sex.value == "male" else 0.0))
_register(
    NumericTerm("partnered", lambda h, p: 1.0 if p.marital.value == "partnered" else 0.0)
)
_register(NumericTerm("overseas_born", lambda h, p: 1.0 if p.overseas_born else 0.0))
_register(
    NumericTerm("bachelor_or_higher", lambda h, p: 1.0 if int(p.education) >= 1 else 0.0)
)
_register(NumericTerm("usual_hours", lambda h, p: float(p.usual_hours)))
_register(
    NumericTerm(
        "occupation_rank",
        lambda h, p: float(p.occupation.value) if p.occupation is not None else 0.0,
    )
)
_register(NumericTerm("n_jobs", lambda h, p: float(p.n_jobs)))
_register(
    NumericTerm("unemployment_duration", lambda h, p: float(p.unemployment_duration))
)
_register(NumericTerm("n_children_0_4", lambda h, p: float(h.n_children_0_4)))
_register(NumericTerm("n_children_5_14", lambda h, p: float(h.n_children_5_14)))
_register(NumericTerm("household_size", lambda h, p: float(h.size)))
_register(CategoricalTerm("industry", lambda h, p: _industry_level(p)))
_register(CategoricalTerm("occupation", lambda h, p: _occupation_level(p)))
_register(CategoricalTerm("hours_band", lambda h, p: hours_band(p.usual_hours)))
_register(CategoricalTerm("employment", lambda h, p: p.labour_state.value))
_register(CategoricalTerm("sex", lambda h, p: p.sex.value))
_register(CategoricalTerm("state", lambda h, p: h.state.value))
_register(
    InteractionTerm(
        "male:employment", lambda h, p: 1.0 if p.sex.value == "male" else 0.0, "employment"
    )
)
_register(InteractionTerm("age:employment", lambda h, p: float(p.age), "employment"))


@dataclass(frozen=True)
class DesignInfo:
    """Frozen encoding of a fitted model's columns, reusable for scoring."""

    terms: tuple[str, ...]
    levels: Mapping[str, tuple[str, ...]]  # categorical name -> ordered levels
    columns: tuple[str, ...]  # expanded column names, intercept first
    saturated: bool = False


def _categorical_of(term_name: str) -> str:
    term = TERMS[term_name]
    if isinstance(term, CategoricalTerm):
        return term_name
    if isinstance(term, InteractionTerm):
        return term.categorical
    raise KeyError(term_name)


def _collect_levels(
    contexts: Sequence[Context], terms: Sequence[str]
) -> dict[str, tuple[str, ...]]:
    needed = []
    for name in terms:
        term = TERMS[name]
        if isinstance(term, CategoricalTerm):
            needed.append(name)
        elif isinstance(term, InteractionTerm):
            needed.append(term.categorical)
    levels: dict[str, tuple[str, ...]] = {}
    for cat in dict.fromkeys(needed):
        fn = TERMS[cat].fn
        observed = sorted({fn(h, p) for h, p in contexts})
        levels[cat] = tuple(observed)
    return levels


def build_design_info(
    contexts: Sequence[Context], terms: Sequence[str], saturated: bool = False
) -> DesignInfo:
    """Derive column layout (and categorical levels) from observed data."""
    unknown = [t for t in terms if t not in TERMS]
    if unknown:
        raise KeyError(f"unknown design terms: {unknown}")
    if saturated:
        cats = [t for t in terms if isinstance(TERMS[t], CategoricalTerm)]
        if len(cats) != len(terms):
            raise ValueError("saturated designs accept categorical terms only")
        cells = sorted({_cell_key(h, p, cats) for h, p in contexts})
        columns = ("intercept",) + tuple(f"cell[{c}]" for c in cells[1:])
        return DesignInfo(tuple(terms), {"__cells__": tuple(cells)}, columns, True)
    levels = _collect_levels(contexts, terms)
    columns: list[str] = ["intercept"]
    for name in terms:
        term = TERMS[name]
        if isinstance(term, NumericTerm):
            columns.append(name)
        elif isinstance(term, CategoricalTerm):
            columns.extend(f"{name}[{lvl}]" for lvl in levels[name][1:])
        else:
            columns.extend(
                f"{name}[{lvl}]" for lvl in levels[term.categorical][1:]
            )
    return DesignInfo(tuple(terms), levels, tuple(columns), False)


def _cell_key(h: HouseholdRecord, p: PersonRecord, cats: Sequence[str]) -> str:
    return "|".join(TERMS[c].fn(h, p) for c in cats)


def build_matrix(contexts: Sequence[Context], info: DesignInfo) -> np.ndarray:
    """Dense design matrix matching ``info.columns``.

    Raises DataError naming the record and term when a categorical level was
    not present in the data the layout was derived from.
    """
    n = len(contexts)
    X = np.zeros((n, len(info.columns)))
    X[:, 0] = 1.0
    if info.saturated:
        cats = list(info.terms)
        cell_index = {c: j for j, c in enumerate(info.levels["__cells__"])}
        for i, (h, p) in enumerate(contexts):
            key = _cell_key(h, p, cats)
            j = cell_index.get(key)
            if j is None:
                raise DataError(
                    f"person {p.person_id}: unseen covariate cell {key!r}"
                )
            if j > 0:
                X[i, j] = 1.0
        return X

    col = 1
    for name in info.terms:
        term = TERMS[name]
        if isinstance(term, NumericTerm):
            for i, (h, p) in enumerate(contexts):
                v = term.fn(h, p)
                if not np.isfinite(v):
                    raise DataError(
                        f"person {p.person_id}: term {name} is not finite"
                    )
                X[i, col] = v
            col += 1
        elif isinstance(term, CategoricalTerm):
            lvls = info.levels[name]
            index = {lvl: k for k, lvl in enumerate(lvls)}
            for i, (h, p) in enumerate(contexts):
                lvl = term.fn(h, p)
                k = index.get(lvl)
                if k is None:
                    raise DataError(
                        f"person {p.person_id}: term {name} has unseen level {lvl!r}"
                    )
                if k > 0:
                    X[i, col + k - 1] = 1.0
            col += len(lvls) - 1
        else:
            lvls = info.levels[term.categorical]
            index = {lvl: k for k, lvl in enumerate(lvls)}
            for i, (h, p) in enumerate(contexts):
                lvl = TERMS[term.categorical].fn(h, p)
                k = index.get(lvl)
                if k is None:
                    raise DataError(
                        f"person {p.person_id}: term {name} has unseen level {lvl!r}"
                    )
                if k > 0:
                    X[i, col + k - 1] = term.numeric(h, p)
            col += len(lvls) - 1
    return X


def constant_columns(X: np.ndarray, columns: Sequence[str]) -> list[str]:
    """Names of non-intercept columns with no variation (degenerate design)."""
    out = []
    for j in range(1, X.shape[1]):
        if np.all(X[:, j] == X[0, j]):
            out.append(columns[j])
    return out
