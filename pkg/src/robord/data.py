"""CSV ingestion: column roles, standardisation and dummy coding."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from robord.model import Dataset

ROLES = ("response", "continuous", "binary", "categorical", "drop")


class DataError(ValueError):
    """Malformed input data; messages carry row/column context."""


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    role: str
    reference: str | None = None  # categorical reference level
    levels: tuple | None = None  # ordered levels (response) or level order (categorical/binary)

    def __post_init__(self):
        if self.role not in ROLES:
            raise DataError(f"column {self.name!r}: unknown role {self.role!r}; expected one of {ROLES}")
        if self.levels is not None:
            object.__setattr__(self, "levels", tuple(str(v) for v in self.levels))


def load_spec(path) -> list[ColumnSpec]:
    """Read a JSON column spec: a list of column objects or {"columns": [...]}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return spec_from_obj(raw)


def spec_from_obj(raw) -> list[ColumnSpec]:
    if isinstance(raw, dict):
        raw = raw.get("columns", [])
    specs = [ColumnSpec(c["name"], c["role"], c.get("reference"), c.get("levels")) for c in raw]
    n_resp = sum(s.role == "response" for s in specs)
    if n_resp != 1:
        raise DataError(f"column spec must have exactly one response column, found {n_resp}")
    return specs


@dataclass
class Preprocessor:
    """Fitted transformation from raw CSV columns to a design matrix."""

    specs: list
    means: dict = field(default_factory=dict)
    sds: dict = field(default_factory=dict)
    levels: dict = field(default_factory=dict)  # categorical/binary: ordered level list
    response_levels: tuple = ()

    @property
    def feature_names(self) -> tuple:
        names = []
        for s in self.specs:
            if s.role in ("continuous", "binary"):
                names.append(s.name)
            elif s.role == "categorical":
                ref = self._reference(s)
                names.extend(f"{s.name}[{lv}]" for lv in self.levels[s.name] if lv != ref)
        return tuple(names)

    def _reference(self, s: ColumnSpec) -> str:
        return s.reference if s.reference is not None else self.levels[s.name][0]

    def fit(self, table: dict) -> "Preprocessor":
        for s in self.specs:
            col = table[s.name]
            if s.role == "continuous":
                vals = _numeric(col, s.name)
                sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
                if not sd > 0:
                    raise DataError(f"column {s.name!r} is constant; cannot standardise")
                self.means[s.name] = float(np.mean(vals))
                self.sds[s.name] = sd
            elif s.role == "binary":
                lv = list(s.levels) if s.levels else _sorted_levels(col)
                if len(lv) != 2:
                    raise DataError(f"binary column {s.name!r} has {len(lv)} distinct values: {lv}")
                self.levels[s.name] = lv
            elif s.role == "categorical":
                lv = list(s.levels) if s.levels else _sorted_levels(col)
                if s.reference is not None and s.reference not in lv:
                    raise DataError(f"reference level {s.reference!r} not found in column {s.name!r}")
                self.levels[s.name] = lv
            elif s.role == "response":
                lv = list(s.levels) if s.levels else _sorted_levels(col)
                present = set(col)
                missing = [v for v in lv if v not in present]
                if missing:
                    raise DataError(
                        f"response column {s.name!r}: category {missing[0]!r} has no observations"
                    )
                self.response_levels = tuple(lv)
        return self

    def transform(self, table: dict, n_rows: int) -> Dataset:
        cols = []
        y = None
        for s in self.specs:
            raw = table[s.name]
            if s.role == "continuous":
                cols.append((_numeric(raw, s.name) - self.means[s.name]) / self.sds[s.name])
            elif s.role == "binary":
                lv = self.levels[s.name]
                cols.append(np.array([_level_index(v, lv, s.name, i) for i, v in enumerate(raw)], float))
            elif s.role == "categorical":
                lv = self.levels[s.name]
                ref = self._reference(s)
                idx = [_level_index(v, lv, s.name, i) for i, v in enumerate(raw)]
                for j, level in enumerate(lv):
                    if level != ref:
                        cols.append(np.array([1.0 if k == j else 0.0 for k in idx]))
            elif s.role == "response":
                lv = list(self.response_levels)
                y = np.array([_level_index(v, lv, s.name, i) + 1 for i, v in enumerate(raw)])
        if not cols:
            raise DataError("column spec selects no covariates")
        X = np.column_stack(cols) if cols else np.empty((n_rows, 0))
        return Dataset(y, X, len(self.response_levels), self.feature_names)

    def to_dict(self) -> dict:
        return {
            "means": self.means,
            "sds": self.sds,
            "levels": self.levels,
            "response_levels": list(self.response_levels),
        }


def _sorted_levels(col) -> list:
    # numeric-looking levels sort numerically, others lexically
    uniq = sorted(set(col))
    try:
        return sorted(uniq, key=float)
    except ValueError:
        return uniq


def _level_index(v, levels, name, row) -> int:
    try:
        return levels.index(v)
    except ValueError:
        raise DataError(f"row {row + 2}, column {name!r}: unknown level {v!r}") from None


def _numeric(col, name) -> np.ndarray:
    out = np.empty(len(col))
    for i, v in enumerate(col):
        try:
            out[i] = float(v)
        except ValueError:
            raise DataError(f"row {i + 2}, column {name!r}: non-numeric value {v!r}") from None
        if not math.isfinite(out[i]):
            raise DataError(f"row {i + 2}, column {name!r}: non-finite value {v!r}")
    return out


def read_table(path) -> tuple[dict, int]:
    """Read a headered CSV into {column: list of stripped strings}."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise DataError(f"{path}: row {i + 2} has {len(r)} fields, header has {len(header)}")
    table = {h: [r[j].strip() for r in rows] for j, h in enumerate(header)}
    return table, len(rows)


def load_csv(path, specs) -> tuple[Dataset, Preprocessor]:
    """Load ``path`` under ``specs``; returns the Dataset and the fitted preprocessing."""
    table, n = read_table(path)
    if n == 0:
        raise DataError(f"{path}: no data rows")
    for s in specs:
        if s.name not in table:
            raise DataError(f"{path}: column {s.name!r} not found (have {sorted(table)})")
    prep = Preprocessor(list(specs)).fit(table)
    return prep.transform(table, n), prep


def apply_csv(path, prep: Preprocessor) -> Dataset:
    """Transform a new file with previously fitted standardisation and coding."""
    table, n = read_table(path)
    for s in prep.specs:
        if s.name not in table:
            raise DataError(f"{path}: column {s.name!r} not found")
    return prep.transform(table, n)
