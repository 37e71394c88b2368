# fairdc - Deep fair discriminative clustering with exact fair assignments.
# Copyright (C) 2026 fairdc authors
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Affero General Public License for more details.
#
# You should have received a copy of the GNU Affero General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable, Sequence
import csv
import logging
import math

from attr import dataclass
import attr
import numpy as np

from mautrix.util.logging import TraceLogger

from ..errors import CSVFormatError, DomainError
from ..fairsolve import GroupMembership
from .dataset import Dataset
from .matrix import is_matrix_file, load_matrix

log: TraceLogger = logging.getLogger("fairdc.data")


@dataclass(frozen=True)
class CSVSchema:
    """Which header columns are features, which is the protected attribute and the label."""

    features: list[str] = attr.ib(converter=list)
    psv: str | None = None
    label: str | None = None

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> CSVSchema:
        return cls(
            features=data.get("features") or [], psv=data.get("psv"), label=data.get("label")
        )


def _read_rows(path: Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """The stripped header and every non-blank row, numbered from 1 counting the header."""
    with open(path, newline="", encoding="utf-8") as file:
        reader = csv.reader(file)
        try:
            header = [name.strip() for name in next(reader)]
        except StopIteration:
            raise CSVFormatError(str(path), "file is empty")
        rows = [(number, row) for number, row in enumerate(reader, start=2) if row]
    return header, rows


def _parse_float(path: Path, number: int, column: str, cell: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise CSVFormatError(str(path), f"cannot parse {cell!r} as a number", number, column)
    if not math.isfinite(value):
        raise CSVFormatError(str(path), f"non-finite value {cell!r}", number, column)
    return value


def load_csv(path: str | Path, schema: CSVSchema, name: str | None = None) -> Dataset:
    """
    Load a headed, comma-separated UTF-8 file. Feature cells must parse as finite reals; the
    protected attribute's distinct values become groups in order of first appearance.

    Raises:
        CSVFormatError: for a missing column, a ragged row or an unparsable cell, with the row
            and column located, or when the protected attribute has fewer than two values.
    """
    path = Path(path)
    header, rows = _read_rows(path)
    wanted = [*schema.features, *filter(None, (schema.psv, schema.label))]
    for column in wanted:
        if column not in header:
            raise CSVFormatError(str(path), "missing column", column=column)
    if not schema.features:
        raise CSVFormatError(str(path), "the schema names no feature columns")
    feature_at = [header.index(column) for column in schema.features]
    features: list[list[float]] = []
    groups: list[str] = []
    labels: list[str] = []
    for number, row in rows:
        if len(row) != len(header):
            raise CSVFormatError(
                str(path), f"expected {len(header)} cells, found {len(row)}", number
            )
        features.append(
            [
                _parse_float(path, number, column, row[index].strip())
                for column, index in zip(schema.features, feature_at)
            ]
        )
        if schema.psv:
            groups.append(row[header.index(schema.psv)].strip())
        if schema.label:
            labels.append(row[header.index(schema.label)].strip())
    if not features:
        raise CSVFormatError(str(path), "no data rows")
    membership = None
    if schema.psv:
        membership = GroupMembership.from_values(groups)
        if membership.t < 2:
            raise CSVFormatError(
                str(path),
                f"protected attribute has {membership.t} group(s), need 2",
                column=schema.psv,
            )
    label_vector = None
    if schema.label:
        label_vector = _encode_labels(labels)
    log.debug("Loaded %d rows x %d features from %s", len(features), len(feature_at), path)
    return Dataset(
        features=np.array(features),
        membership=membership,
        labels=label_vector,
        name=name or path.stem,
        provenance={"source": "csv", "path": str(path), "schema": attr.asdict(schema)},
    )


def _encode_labels(values: Sequence[str]) -> np.ndarray:
    """Integer labels stay as they are; anything else is indexed by first appearance."""
    try:
        return np.array([int(value) for value in values], dtype=np.int64)
    except ValueError:
        index: dict[str, int] = {}
        return np.array([index.setdefault(value, len(index)) for value in values], dtype=np.int64)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, np.floating) else v for v in row])


def write_dataset(
    path: str | Path, dataset: Dataset, feature_names: Sequence[str] | None = None
) -> CSVSchema:
    """Write ``dataset`` so that :func:`load_csv` with the returned schema reads it back."""
    names = list(feature_names or (f"x{i}" for i in range(dataset.d)))
    header = list(names)
    columns: list[list[Any]] = [
        [repr(float(v)) for v in dataset.features[:, j]] for j in range(dataset.d)
    ]
    schema = CSVSchema(features=names)
    if dataset.membership is not None:
        header.append("psv")
        names_by_code = dataset.membership.names
        columns.append([names_by_code[code] for code in dataset.membership.codes])
        schema = attr.evolve(schema, psv="psv")
    if dataset.labels is not None:
        header.append("label")
        columns.append([int(v) for v in dataset.labels])
        schema = attr.evolve(schema, label="label")
    write_csv(path, header, zip(*columns))
    return schema


def read_table(path: str | Path) -> np.ndarray:
    """
    A numeric matrix from either an FDCM file (sniffed by its magic bytes) or a headed CSV file
    whose cells are all numbers.
    """
    path = Path(path)
    if is_matrix_file(path):
        return load_matrix(path)
    header, rows = _read_rows(path)
    values = []
    for number, row in rows:
        if len(row) != len(header):
            raise CSVFormatError(
                str(path), f"expected {len(header)} cells, found {len(row)}", number
            )
        values.append(
            [_parse_float(path, number, column, cell.strip()) for column, cell in zip(header, row)]
        )
    if not values:
        raise CSVFormatError(str(path), "no data rows")
    return np.array(values, dtype=np.float64)


def read_column(path: str | Path) -> list[str]:
    """The first column of a headed CSV file, or of an FDCM matrix formatted as integers."""
    path = Path(path)
    if is_matrix_file(path):
        matrix = load_matrix(path)
        return [str(int(v)) for v in matrix[:, 0]]
    _, rows = _read_rows(path)
    return [row[0].strip() for _, row in rows]


def load_membership(path: str | Path) -> GroupMembership:
    """
    Group membership from a one-column CSV of group values, or from an FDCM matrix holding
    either one integer group code per row or a one-hot N×T indicator.
    """
    path = Path(path)
    if is_matrix_file(path):
        matrix = load_matrix(path)
        if matrix.shape[1] == 1:
            codes = matrix[:, 0]
            if not np.array_equal(codes, np.round(codes)):
                raise DomainError(f"{path}: group codes must be integers")
            return GroupMembership.from_codes(codes.astype(np.int64))
        return GroupMembership.from_matrix(matrix)
    return GroupMembership.from_values(read_column(path))


def load_labels(path: str | Path) -> np.ndarray:
    return _encode_labels(read_column(path))
