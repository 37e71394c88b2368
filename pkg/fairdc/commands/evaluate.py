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

from argparse import ArgumentParser

import numpy as np

from ..dataio import load_labels, load_membership, read_column, write_csv
from ..errors import DomainError
from ..metrics import evaluate as evaluate_labels
from .handler import CommandEvent, command_handler


def _arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--labels", required=True, metavar="<path>", help="cluster of every row")
    parser.add_argument(
        "--membership", required=True, metavar="<path>", help="group of every row"
    )
    parser.add_argument(
        "--truth", default=None, metavar="<path>", help="ground-truth class of every row"
    )
    parser.add_argument(
        "--nmi-average",
        choices=("arithmetic", "geometric"),
        default="arithmetic",
        help="normaliser of the mutual information",
    )


def _cluster_labels(path: str) -> np.ndarray:
    values = read_column(path)
    try:
        labels = np.array([int(float(value)) for value in values], dtype=np.int64)
    except ValueError as e:
        raise DomainError(f"{path}: cluster labels must be integers") from e
    if labels.size and labels.min() < 0:
        raise DomainError(f"{path}: cluster labels must be non-negative")
    return labels


@command_handler(
    help_text="Compute balance, fairness and optionally accuracy and NMI of a clustering.",
    arguments=_arguments,
)
async def evaluate(evt: CommandEvent) -> int:
    labels = _cluster_labels(evt.args.labels)
    membership = load_membership(evt.args.membership)
    truth = load_labels(evt.args.truth) if evt.args.truth else None
    report = evaluate_labels(labels, membership, truth, average=evt.args.nmi_average)

    rows = [("balance", report.balance), ("fairness", report.fairness)]
    if report.accuracy is not None:
        rows += [("accuracy", report.accuracy), ("nmi", report.nmi)]
    rows.append(("optimal_balance", report.optimal_balance))
    path = evt.output_dir / "metrics.csv"
    write_csv(path, ["metric", "value"], rows)
    for name, value in rows:
        evt.print(f"{name:<16} {value:.6f}")
    evt.log.debug("Wrote metrics to %s", path)
    return 0
