"""Ingestion: time-series CSV, mortality tables, gender-gap series construction.

Mortality tables follow the standard wide layout of the public mortality
database exports: a header row naming Year, Age, Female, Male (Total is
ignored), whitespace- or comma-delimited, one row per (year, age).  Ages like
"110+" parse as their numeric prefix and are excluded by the configured age
range.  Missing cells are ".".
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import IngestionError
from .hmm import ObservedSeries


def load_series(path, value_column: str, time_column: str | None = None) -> ObservedSeries:
    """Read an ordered series from a CSV file with a header row.

    Row order is preserved; the optional time column is kept as labels.
    Lines starting with '#' (metadata comments) are skipped.  Malformed cells
    raise IngestionError naming the row (1-based, comments and header
    included in the count).
    """
    try:
        with open(path, newline="") as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    row_numbers = [
        i + 1 for i, line in enumerate(raw) if not line.lstrip().startswith("#")
    ]
    reader = csv.reader(line for line in raw if not line.lstrip().startswith("#"))
    rows = list(reader)
    if not rows:
        raise IngestionError(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    if value_column not in header:
        raise IngestionError(
            f"{path}: no column named {value_column!r}; found {header}"
        )
    vcol = header.index(value_column)
    tcol = None
    if time_column is not None:
        if time_column not in header:
            raise IngestionError(
                f"{path}: no column named {time_column!r}; found {header}"
            )
        tcol = header.index(time_column)
    values: list[float] = []
    labels: list[str] = []
    for rownum, row in zip(row_numbers[1:], rows[1:]):
        if not row or all(not c.strip() for c in row):
            raise IngestionError(f"{path}: row {rownum} is blank")
        if vcol >= len(row):
            raise IngestionError(f"{path}: row {rownum} has no {value_column!r} cell")
        cell = row[vcol].strip()
        try:
            v = float(cell)
        except ValueError:
            raise IngestionError(
                f"{path}: row {rownum}: {value_column!r} cell {cell!r} is not numeric"
            ) from None
        if not math.isfinite(v):
            raise IngestionError(f"{path}: row {rownum}: non-finite value {cell!r}")
        values.append(v)
        if tcol is not None:
            labels.append(row[tcol].strip())
    if not values:
        raise IngestionError(f"{path}: no data rows")
    return ObservedSeries(values=np.array(values), labels=tuple(labels) if labels else None)


@dataclass
class MortalityTable:
    """One measure (deaths or exposures) keyed by (year, age, sex in {M, F})."""

    measure: str
    cells: dict = field(default_factory=dict)

    def get(self, year: int, age: int, sex: str):
        return self.cells.get((year, age, sex))


_AGE_RE = re.compile(r"^(\d+)\+?$")


def load_mortality_table(path, measure: str) -> MortalityTable:
    """Parse a wide-format mortality table (Year Age Female Male [Total])."""
    table = MortalityTable(measure=measure)
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    header_idx = None
    cols = None
    for i, line in enumerate(lines):
        parts = [p.strip() for p in re.split(r"[,\s]+", line.strip()) if p.strip()]
        lowered = [p.lower() for p in parts]
        if "year" in lowered and "age" in lowered:
            header_idx = i
            cols = lowered
            break
    if header_idx is None or cols is None:
        raise IngestionError(f"{path}: no header row naming Year and Age")
    for need in ("female", "male"):
        if need not in cols:
            raise IngestionError(f"{path}: header lacks a {need.capitalize()} column")
    iyear, iage = cols.index("year"), cols.index("age")
    icols = {"F": cols.index("female"), "M": cols.index("male")}
    for rownum, line in enumerate(lines[header_idx + 1 :], start=header_idx + 2):
        parts = [p for p in re.split(r"[,\s]+", line.strip()) if p]
        if not parts:
            continue
        if len(parts) <= max(iyear, iage, *icols.values()):
            raise IngestionError(f"{path}: row {rownum} has too few columns")
        try:
            year = int(parts[iyear])
        except ValueError:
            raise IngestionError(f"{path}: row {rownum}: bad year {parts[iyear]!r}") from None
        m = _AGE_RE.match(parts[iage])
        if m is None:
            raise IngestionError(f"{path}: row {rownum}: bad age {parts[iage]!r}")
        age = int(m.group(1))
        for sex, idx in icols.items():
            cell = parts[idx]
            if cell == ".":
                continue
            try:
                table.cells[(year, age, sex)] = float(cell)
            except ValueError:
                raise IngestionError(
                    f"{path}: row {rownum}: bad {measure} value {cell!r}"
                ) from None
    if not table.cells:
        raise IngestionError(f"{path}: no usable data rows")
    return table


def mortality_rate(deaths: float, exposure: float) -> float:
    """Deaths over exposure; the exposure must be positive."""
    if exposure <= 0:
        raise ValueError(f"exposure must be > 0, got {exposure}")
    return deaths / exposure


def gender_gap(male_rate: float, female_rate: float) -> float:
    """log(male rate / female rate); positive when male mortality is higher."""
    if male_rate <= 0 or female_rate <= 0:
        raise ValueError("both rates must be > 0")
    return math.log(male_rate / female_rate)


@dataclass
class GpSeries:
    """Flattened gender-gap panel plus the exclusion log."""

    series: ObservedSeries
    exclusions: list[str]
    cells: list[tuple[int, int]]  # (year, age) per retained observation


def build_gp_series(
    deaths: MortalityTable,
    exposures: MortalityTable,
    ages: tuple[int, int] = (0, 90),
    years: tuple[int, int] = (1960, 1975),
    order: str = "year-major",
) -> GpSeries:
    """Gender-gap values over the age x year panel, flattened into one series.

    ``order`` picks the flattening: "year-major" walks ages within each year,
    "age-major" walks years within each age.  Cells with missing data,
    non-positive exposure, or a non-positive rate are skipped and logged once
    each.
    """
    if order not in ("year-major", "age-major"):
        raise IngestionError(f"unknown ordering {order!r}")
    year_range = range(years[0], years[1] + 1)
    age_range = range(ages[0], ages[1] + 1)
    if order == "year-major":
        grid = [(y, a) for y in year_range for a in age_range]
    else:
        grid = [(y, a) for a in age_range for y in year_range]

    values: list[float] = []
    labels: list[str] = []
    cells: list[tuple[int, int]] = []
    exclusions: list[str] = []
    for year, age in grid:
        reason = None
        rates = {}
        for sex in ("M", "F"):
            d = deaths.get(year, age, sex)
            e = exposures.get(year, age, sex)
            if d is None or e is None:
                reason = f"missing {'deaths' if d is None else 'exposure'} ({sex})"
                break
            if e <= 0:
                reason = f"non-positive exposure ({sex})"
                break
            rates[sex] = d / e
            if rates[sex] <= 0:
                reason = f"non-positive rate ({sex})"
                break
        if reason is not None:
            exclusions.append(f"year={year} age={age}: {reason}")
            continue
        values.append(math.log(rates["M"] / rates["F"]))
        labels.append(f"{year}-{age}")
        cells.append((year, age))
    if not values:
        raise IngestionError("no usable cells in the requested age/year ranges")
    return GpSeries(
        series=ObservedSeries(values=np.array(values), labels=tuple(labels)),
        exclusions=exclusions,
        cells=cells,
    )
