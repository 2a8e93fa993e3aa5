"""FRED-QD style CSV ingestion and panel preparation"""
import logging
import re
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from sparsebvar.data.manifest import DatasetManifest
from sparsebvar.data.transforms import TRANSFORM_ORDER, apply_transform
from sparsebvar.errors import MissingColumn, MissingValues, UnparseableCell, tags_operation
from sparsebvar.model.var_core import TimeSeriesPanel

logger = logging.getLogger(__name__)

METADATA_ROWS = ("factors", "transform")
_QUARTER = re.compile(r"^\s*(\d{4})\s*:?\s*Q([1-4])\s*$", re.IGNORECASE)


def parse_period(label: str) -> str:
    """'1959:Q1', '1959Q1', '1959-01-01' or '3/1/1959' -> '1959Q1'"""
    text = str(label).strip()
    match = _QUARTER.match(text)
    if match:
        return f"{match.group(1)}Q{match.group(2)}"
    return str(pd.Timestamp(text).to_period("Q"))


@tags_operation("loader.load_csv")
def load_csv(path: Union[str, Path], manifest: DatasetManifest,
             variables: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """Raw levels indexed by quarter, columns restricted and ordered per the manifest"""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    date_column = frame.columns[0]
    labels = frame[date_column].str.strip()
    body = frame[~labels.str.lower().isin(METADATA_ROWS)]
    # header is line 1
    lines = body.index.to_numpy() + 2

    wanted = list(variables) if variables is not None else manifest.mnemonics
    for name in wanted:
        if name not in body.columns:
            raise MissingColumn(name)
    extra = [c for c in body.columns[1:] if c not in manifest.mnemonics]
    if extra:
        logger.info(f"Ignoring {len(extra)} column(s) not in the manifest: {extra[:10]}")

    periods = []
    for line, label in zip(lines, body[date_column]):
        if not label.strip():
            continue
        try:
            periods.append(parse_period(label))
        except (ValueError, TypeError):
            raise UnparseableCell(int(line), date_column, label) from None
    body = body[body[date_column].str.strip() != ""]
    lines = body.index.to_numpy() + 2

    columns = {}
    for name in wanted:
        raw = body[name].str.strip()
        numbers = pd.to_numeric(raw, errors="coerce")
        bad = numbers.isna() & ~raw.str.lower().isin({"", "nan", "na", "."})
        if bad.any():
            position = int(np.flatnonzero(bad.to_numpy())[0])
            raise UnparseableCell(int(lines[position]), name, raw.iloc[position])
        columns[name] = numbers.to_numpy(dtype=float)

    raw_frame = pd.DataFrame(columns, index=pd.Index(periods, name="period"))
    logger.info(f"Loaded {raw_frame.shape[0]} periods x {raw_frame.shape[1]} variables from {path}")
    return raw_frame


@tags_operation("loader.prepare_panel")
def prepare_panel(raw: pd.DataFrame, manifest: DatasetManifest,
                  variables: Optional[Sequence[str]] = None) -> TimeSeriesPanel:
    """Transform each column by its code, align on common dates and trim incomplete edge rows"""
    names = list(variables) if variables is not None else [n for n in manifest.mnemonics if n in raw.columns]
    for name in names:
        if name not in raw.columns:
            raise MissingColumn(name)

    frame = raw[names]
    if manifest.sample_start is not None:
        frame = frame.loc[frame.index >= parse_period(manifest.sample_start)]
    if manifest.sample_end is not None:
        frame = frame.loc[frame.index <= parse_period(manifest.sample_end)]

    codes = {name: manifest.spec(name).tcode for name in names}
    transformed = pd.DataFrame(
        {name: apply_transform(frame[name], codes[name]) for name in names},
        index=frame.index,
    )
    transformed = transformed.iloc[max(TRANSFORM_ORDER[c] for c in codes.values()):]

    complete = transformed.notna().all(axis=1).to_numpy()
    if not complete.any():
        raise MissingValues("no period has every variable observed")
    first, last = np.flatnonzero(complete)[[0, -1]]
    trimmed = transformed.iloc[first:last + 1]
    gaps = trimmed.columns[trimmed.isna().any(axis=0)].tolist()
    if gaps:
        raise MissingValues(f"interior missing values in {gaps[:10]}")
    if first or last + 1 < len(transformed):
        logger.info(f"Trimmed {first} leading and {len(transformed) - last - 1} trailing incomplete period(s)")
    return TimeSeriesPanel(trimmed.to_numpy(dtype=float), tuple(names), tuple(trimmed.index))
