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

from ..dataio import load_membership, read_table
from ..fairsolve import fair_assignment
from ..metrics import evaluate
from ..version import version
from .handler import CommandEvent, command_handler
from .report import ReportWriter, write_labels


def _arguments(parser: ArgumentParser) -> None:
    parser.add_argument(
        "soft", metavar="<soft-assignment>", help="N×K soft assignment, CSV or FDCM"
    )
    parser.add_argument("membership", metavar="<membership>", help="group of every row")
    parser.add_argument(
        "--epsilon-relax",
        type=float,
        default=None,
        metavar="FLOAT",
        help="allowed deviation of each group's share; exact quotas if omitted",
    )


@command_handler(
    help_text="Solve the fair hard assignment closest to a soft assignment.",
    arguments=_arguments,
)
async def assign(evt: CommandEvent) -> int:
    y = read_table(evt.args.soft)
    membership = load_membership(evt.args.membership)
    relax = evt.config["fairness.relax"]
    proportions = evt.config["fairness.proportions"] if relax is not None else None
    # Infeasible bounds raise and become exit code 3 with the violated aggregate printed.
    result = fair_assignment(y, membership, relax, proportions)

    out = evt.output_dir
    labels_path = write_labels(out / "fair_labels.csv", result.labels)
    metrics = evaluate(result.assignment, membership)
    writer = ReportWriter(out, "assign.jsonl")
    writer.record(
        "assign",
        {
            "version": version,
            "soft": str(evt.args.soft),
            "membership": str(evt.args.membership),
            "mode": result.plan.mode,
            "relax": relax,
            "objective": result.objective,
            "augmentations": result.augmentations,
            "elapsed": result.elapsed,
            "labels": labels_path,
            "metrics": metrics.serialize(),
        },
    )
    evt.log.info(
        "Solved %s fair assignment with objective %.6f in %.3fs",
        result.plan.mode,
        result.objective,
        result.elapsed,
    )
    evt.print(f"objective={result.objective:.6f} {metrics.summary()}")
    evt.print(f"Wrote labels to {labels_path}")
    return 0
