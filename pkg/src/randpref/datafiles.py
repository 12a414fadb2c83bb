"""CSV readers and writers for budgets, observations, series and vectors."""

from __future__ import annotations

import csv
from typing import List, Sequence, Tuple

import numpy as np

from .axioms import DemandObservationSeries
from .budgets import Budget
from .errors import ValidationError
from .stochastic_test import Observations


def _rows(path) -> Tuple[List[str], List[Tuple[int, List[str]]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: file is empty") from None
        body = [(reader.line_num, row) for row in reader if any(c.strip() for c in row)]
    return header, body


def _floats(path, line: int, cells: Sequence[str]) -> List[float]:
    try:
        return [float(c) for c in cells]
    except ValueError:
        raise ValidationError(f"{path}:{line}: non-numeric value in {list(cells)}") from None


def _goods(header: Sequence[str], prefix: str, path) -> int:
    cols = [h for h in header if h.startswith(prefix) and h[len(prefix):].isdigit()]
    expected = [f"{prefix}{k}" for k in range(1, len(cols) + 1)]
    if not cols or cols != expected:
        raise ValidationError(f"{path}: expected columns {prefix}1..{prefix}L in order")
    return len(cols)


def read_budgets_csv(path) -> Tuple[List[str], List[Budget]]:
    """``period,p1..pL,expenditure``; returns period labels and budgets."""
    header, body = _rows(path)
    L = _goods(header, "p", path)
    if header != ["period"] + [f"p{k}" for k in range(1, L + 1)] + ["expenditure"]:
        raise ValidationError(f"{path}: header must be period,p1..pL,expenditure")
    labels, budgets = [], []
    for line, row in body:
        if len(row) != L + 2:
            raise ValidationError(f"{path}:{line}: expected {L + 2} fields, got {len(row)}")
        vals = _floats(path, line, row[1:])
        if any(v <= 0 for v in vals):
            raise ValidationError(f"{path}:{line}: prices and expenditure must be positive")
        label = row[0].strip()
        if label in labels:
            raise ValidationError(f"{path}:{line}: period {label!r} repeated")
        labels.append(label)
        budgets.append(Budget(np.array(vals[:L]), vals[L]))
    if not budgets:
        raise ValidationError(f"{path}: no budgets")
    return labels, budgets


def read_observations_csv(path, period_labels: Sequence[str]) -> Observations:
    """``period,household_id,q1..qL`` with periods named as in the budgets file."""
    header, body = _rows(path)
    L = _goods(header, "q", path)
    if header[:2] != ["period", "household_id"] or len(header) != L + 2:
        raise ValidationError(f"{path}: header must be period,household_id,q1..qL")
    index = {lbl: t for t, lbl in enumerate(period_labels)}
    periods, ids, bundles = [], [], []
    for line, row in body:
        if len(row) != L + 2:
            raise ValidationError(f"{path}:{line}: expected {L + 2} fields, got {len(row)}")
        label = row[0].strip()
        if label not in index:
            raise ValidationError(f"{path}:{line}: unknown period {label!r}")
        q = _floats(path, line, row[2:])
        if any(v < 0 for v in q):
            raise ValidationError(f"{path}:{line}: quantities must be nonnegative")
        periods.append(index[label])
        ids.append(row[1].strip())
        bundles.append(q)
    if not bundles:
        raise ValidationError(f"{path}: no observations")
    return Observations(np.array(periods), np.array(bundles), np.array(ids))


def write_observations_csv(obs: Observations, path, period_labels=None) -> None:
    L = obs.bundles.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["period", "household_id"] + [f"q{k}" for k in range(1, L + 1)])
        for h, (t, y) in enumerate(obs):
            label = period_labels[t] if period_labels is not None else t
            w.writerow([label, h] + [repr(float(v)) for v in y])


def read_series_csv(path) -> DemandObservationSeries:
    """``period,p1..pL,q1..qL``: one consumer, one row per period."""
    header, body = _rows(path)
    L = _goods(header, "p", path)
    if header != ["period"] + [f"p{k}" for k in range(1, L + 1)] + [f"q{k}" for k in range(1, L + 1)]:
        raise ValidationError(f"{path}: header must be period,p1..pL,q1..qL")
    prices, bundles = [], []
    for line, row in body:
        if len(row) != 2 * L + 1:
            raise ValidationError(f"{path}:{line}: expected {2 * L + 1} fields, got {len(row)}")
        vals = _floats(path, line, row[1:])
        prices.append(vals[:L])
        bundles.append(vals[L:])
    if not prices:
        raise ValidationError(f"{path}: no observations")
    return DemandObservationSeries(np.array(prices), np.array(bundles))


def read_vector_csv(path) -> np.ndarray:
    """Numbers separated by commas and/or newlines; a non-numeric first line is a header."""
    with open(path, encoding="utf-8") as fh:
        lines = [(n, ln.strip()) for n, ln in enumerate(fh, 1) if ln.strip()]
    if lines:
        try:
            float(lines[0][1].split(",")[0])
        except ValueError:
            lines = lines[1:]
    vals = []
    for n, ln in lines:
        vals.extend(_floats(path, n, [c for c in ln.split(",") if c.strip()]))
    if not vals:
        raise ValidationError(f"{path}: empty vector")
    return np.array(vals)


def parse_number_list(text: str, name: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
