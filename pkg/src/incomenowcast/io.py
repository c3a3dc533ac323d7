"""CSV interchange formats.

Unit records travel as a persons file and a households file keyed by ids
(see docs/data_dictionary.md for the column dictionary); payroll indices and
the other index series use long-format CSVs. All files are UTF-8 with a
header row. Floats are written with a fixed shortest-round-trip format so
identical runs produce identical bytes.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
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
    validate_sample,
)
from .synthpop import PayrollCell, PayrollSeries

PERSON_COLUMNS = (
    "person_id",
    "household_id",
    "age",
    "sex",
    "marital",
    "overseas_born",
    "education",
    "labour_state",
    "industry",
    "occupation",
    "usual_hours",
    "n_jobs",
    "unemployment_duration",
    "wage_income",
    "business_income",
    "investment_income",
    "other_income",
    "welfare_flags",
    "jobkeeper_flag",
    "employed_since_baseline_flag",
)

HOUSEHOLD_COLUMNS = (
    "household_id",
    "n_children_0_4",
    "n_children_5_14",
    "housing_cost",
    "childcare_cost",
    "state",
    "weight",
)

PAYROLL_COLUMNS = ("industry", "age_band", "month", "wage_index", "job_index")
INDEX_SERIES_COLUMNS = ("series", "month", "factor")


def fmt(value) -> str:
    """Deterministic scalar formatting for CSV output; floats use the
    shortest representation that round-trips exactly."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_sample(
    sample: WeightedSample, persons_path: str | Path, households_path: str | Path
) -> None:
    person_rows = []
    household_rows = []
    for h in sorted(sample.households, key=lambda h: h.household_id):
        household_rows.append(
            (
                h.household_id,
                h.n_children_0_4,
                h.n_children_5_14,
                h.housing_cost,
                h.childcare_cost,
                h.state.value,
                h.weight,
            )
        )
        for p in h.members:
            person_rows.append(
                (
                    p.person_id,
                    p.household_id,
                    p.age,
                    p.sex.value,
                    p.marital.value,
                    p.overseas_born,
                    p.education.name.lower(),
                    p.labour_state.value,
                    p.industry.value if p.industry else "",
                    int(p.occupation) if p.occupation else "",
                    p.usual_hours,
                    p.n_jobs,
                    p.unemployment_duration,
                    p.wage_income,
                    p.business_income,
                    p.investment_income,
                    p.other_income,
                    ";".join(sorted(f.value for f in p.welfare_flags)),
                    p.jobkeeper_flag,
                    p.employed_since_baseline_flag,
                )
            )
    write_csv(persons_path, PERSON_COLUMNS, person_rows)
    write_csv(households_path, HOUSEHOLD_COLUMNS, household_rows)


def _parse_bool(text: str, where: str) -> bool:
    if text in ("1", "true", "True"):
        return True
    if text in ("0", "false", "False", ""):
        return False
    raise DataError(f"{where}: cannot parse boolean {text!r}")


def _parse_enum(enum_cls, text: str, where: str):
    try:
        return enum_cls(text)
    except ValueError:
        raise DataError(f"{where}: unknown {enum_cls.__name__.lower()} {text!r}")


def read_persons(path: str | Path) -> dict[str, list[PersonRecord]]:
    """Persons grouped by household id, in file order."""
    path = Path(path)
    grouped: dict[str, list[PersonRecord]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(PERSON_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing person columns {sorted(missing)}")
        for i, row in enumerate(reader, start=2):
            where = f"{path}:{i}"
            try:
                education = Education[row["education"].upper()]
            except KeyError:
                raise DataError(f"{where}: unknown education {row['education']!r}")
            industry = (
                _parse_enum(Industry, row["industry"], where)
                if row["industry"]
                else None
            )
            occupation = Occupation(int(row["occupation"])) if row["occupation"] else None
            flags = frozenset(
                _parse_enum(WelfareFlag, f, where)
                for f in row["welfare_flags"].split(";")
                if f
            )
            try:
                person = PersonRecord(
                    person_id=row["person_id"],
                    household_id=row["household_id"],
                    age=int(row["age"]),
                    sex=_parse_enum(Sex, row["sex"], where),
                    marital=_parse_enum(Marital, row["marital"], where),
                    overseas_born=_parse_bool(row["overseas_born"], where),
                    education=education,
                    labour_state=_parse_enum(LabourState, row["labour_state"], where),
                    industry=industry,
                    occupation=occupation,
                    usual_hours=float(row["usual_hours"]),
                    n_jobs=int(row["n_jobs"]),
                    unemployment_duration=float(row["unemployment_duration"]),
                    wage_income=float(row["wage_income"]),
                    business_income=float(row["business_income"]),
                    investment_income=float(row["investment_income"]),
                    other_income=float(row["other_income"]),
                    welfare_flags=flags,
                    jobkeeper_flag=_parse_bool(row["jobkeeper_flag"], where),
                    employed_since_baseline_flag=_parse_bool(
                        row["employed_since_baseline_flag"], where
                    ),
                )
            except ValueError as exc:
                raise DataError(f"{where}: {exc}") from exc
            grouped.setdefault(person.household_id, []).append(person)
    return grouped


def load_sample(
    persons_path: str | Path,
    households_path: str | Path,
    month: MonthId,
    validate: bool = True,
) -> WeightedSample:
    persons = read_persons(persons_path)
    households = []
    path = Path(households_path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(HOUSEHOLD_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing household columns {sorted(missing)}")
        for i, row in enumerate(reader, start=2):
            where = f"{path}:{i}"
            hid = row["household_id"]
            members = persons.get(hid)
            if not members:
                raise DataError(f"{where}: household {hid} has no persons")
            try:
                households.append(
                    HouseholdRecord(
                        household_id=hid,
                        members=tuple(members),
                        n_children_0_4=int(row["n_children_0_4"]),
                        n_children_5_14=int(row["n_children_5_14"]),
                        housing_cost=float(row["housing_cost"]),
                        childcare_cost=float(row["childcare_cost"]),
                        state=_parse_enum(State, row["state"], where),
                        weight=float(row["weight"]),
                    )
                )
            except ValueError as exc:
                raise DataError(f"{where}: {exc}") from exc
    sample = WeightedSample(month=month, households=tuple(households))
    if validate:
        validate_sample(sample)
    return sample


def write_payroll(series: PayrollSeries, path: str | Path) -> None:
    rows = [
        (ind.value, band, str(month), cell.wage_index, cell.job_index)
        for (ind, band, month), cell in sorted(
            series.cells.items(), key=lambda kv: (kv[0][0].value, kv[0][1], str(kv[0][2]))
        )
    ]
    write_csv(path, PAYROLL_COLUMNS, rows)


def read_payroll(path: str | Path, baseline_month: MonthId) -> PayrollSeries:
    path = Path(path)
    cells = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(PAYROLL_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing payroll columns {sorted(missing)}")
        for i, row in enumerate(reader, start=2):
            where = f"{path}:{i}"
            industry = _parse_enum(Industry, row["industry"], where)
            try:
                month = MonthId.parse(row["month"])
                cells[(industry, row["age_band"], month)] = PayrollCell(
                    wage_index=float(row["wage_index"]),
                    job_index=float(row["job_index"]),
                )
            except ValueError as exc:
                raise DataError(f"{where}: {exc}") from exc
    return PayrollSeries(baseline_month=baseline_month, cells=cells)


def read_index_series(path: str | Path) -> dict[str, dict[MonthId, float]]:
    """Long-format (series, month, factor) table, e.g. investment and cpi."""
    path = Path(path)
    out: dict[str, dict[MonthId, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(INDEX_SERIES_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing index columns {sorted(missing)}")
        for i, row in enumerate(reader, start=2):
            try:
                month = MonthId.parse(row["month"])
                factor = float(row["factor"])
            except ValueError as exc:
                raise DataError(f"{path}:{i}: {exc}") from exc
            out.setdefault(row["series"], {})[month] = factor
    return out
