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
from typing import Any, Iterable
import json

import numpy as np

from ..dataio import write_csv
from ..types import EpochRecord, RunReport

EPOCH_COLUMNS = [
    "phase",
    "epoch",
    "loss",
    "clustering",
    "fairness",
    "augmentation",
    "balance",
    "fairness_metric",
    "accuracy",
    "nmi",
    "fair_balance",
    "objective",
]


class ReportWriter:
    """
    Appends one JSON record per line to ``report.jsonl``: the config echo first, then one
    record per epoch, then the final record. The per-epoch rows also go to ``epochs.csv`` when
    the run finishes.
    """

    directory: Path
    path: Path
    epochs: list[EpochRecord]

    def __init__(self, directory: Path, name: str = "report.jsonl") -> None:
        self.directory = directory
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = directory / name
        self.path.write_text("")
        self.epochs = []

    def record(self, kind: str, data: dict[str, Any]) -> None:
        with self.path.open("a", encoding="utf-8") as file:
            file.write(json.dumps({"type": kind, **data}, sort_keys=True) + "\n")

    def config(self, echo: dict[str, Any], version: str) -> None:
        self.record("config", {"version": version, "config": echo})

    def epoch(self, record: EpochRecord) -> None:
        self.epochs.append(record)
        self.record("epoch", record.serialize())

    def final(self, report: RunReport) -> None:
        if self.epochs:
            path = self.directory / "epochs.csv"
            write_csv(
                path,
                EPOCH_COLUMNS,
                ([row[column] for column in EPOCH_COLUMNS] for row in self._epoch_rows()),
            )
            report.artifacts["epochs"] = str(path)
        data = report.serialize()
        # Epochs were already written one per line.
        data.pop("trace", None)
        self.record("final", data)

    def _epoch_rows(self) -> Iterable[dict[str, Any]]:
        return (record.csv_row() for record in self.epochs)


def write_labels(path: Path, labels: np.ndarray, column: str = "cluster") -> str:
    write_csv(path, [column], ([int(label)] for label in labels))
    return str(path)


def read_report(path: Path) -> list[dict[str, Any]]:
    with path.open(encoding="utf-8") as file:
        return [json.loads(line) for line in file if line.strip()]
