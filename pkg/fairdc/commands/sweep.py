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
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any
import asyncio
import os

from ..config import load_config
from ..dataio import write_csv
from ..errors import DomainError
from ..version import version
from .handler import CommandEvent, command_handler, config_overrides
from .report import ReportWriter
from .train import run_training

# Config key of each sweepable parameter, and which passing value the recommendation takes.
# Both directions pick the least fairness pressure that still reaches the balance threshold:
# a smaller weight, or a wider relaxation.
GRID_KEYS = {
    "beta": ("loss.beta", "smallest"),
    "gamma": ("loss.gamma", "smallest"),
    "alpha": ("loss.alpha", "smallest"),
    "fairness_relax": ("fairness.relax", "largest"),
    "epsilon": ("fairness.relax", "largest"),
}

SWEEP_COLUMNS = [
    "value",
    "status",
    "accuracy",
    "nmi",
    "balance",
    "fairness",
    "fair_balance",
    "objective",
    "exit_code",
    "directory",
]


def parse_grid(grid: str) -> tuple[str, list[float]]:
    """Parse ``name=v1,v2,...`` into the swept parameter and its values."""
    name, sep, values = grid.partition("=")
    name = name.strip().replace("-", "_")
    if not sep or name not in GRID_KEYS:
        raise DomainError(
            f"Grid must look like NAME=V1,V2,... with NAME one of {', '.join(GRID_KEYS)}"
        )
    try:
        points = [float(value) for value in values.split(",") if value.strip()]
    except ValueError as e:
        raise DomainError(f"Grid values must be numbers: {values!r}") from e
    if not points:
        raise DomainError("Grid is empty")
    return name, points


def _run_point(
    config_path: str | None, overrides: dict[str, Any], output_dir: str
) -> dict[str, Any]:
    # Runs in a worker process, so everything it gets and returns must pickle.
    config = load_config(config_path, overrides)
    return run_training(config, Path(output_dir), command="sweep").serialize()


def _row(value: float, directory: Path, result: dict[str, Any] | BaseException) -> dict[str, Any]:
    row: dict[str, Any] = {column: None for column in SWEEP_COLUMNS}
    row.update(value=value, directory=str(directory))
    if isinstance(result, BaseException):
        row.update(status="failed", exit_code=getattr(result, "exit_code", 1))
        row["error"] = f"{type(result).__name__}: {result}"
        return row
    row.update(status=result["status"], exit_code=result.get("exit_code", 0))
    row["objective"] = result.get("objective")
    if result.get("error"):
        row["error"] = result["error"]
    train = result.get("train") or {}
    row.update({key: train.get(key) for key in ("accuracy", "nmi", "balance", "fairness")})
    fair = result.get("fair_train") or {}
    row["fair_balance"] = fair.get("balance")
    return row


def recommend(
    rows: list[dict[str, Any]], threshold: float, prefer: str = "smallest"
) -> float | None:
    """
    The smallest (or with ``prefer="largest"`` the largest) swept value whose run succeeded
    with a balance of at least ``threshold``.
    """
    if prefer not in ("smallest", "largest"):
        raise DomainError(f"Unknown preference {prefer!r}")
    passing = [
        row["value"]
        for row in rows
        if row["status"] == "ok" and row["balance"] is not None and row["balance"] >= threshold
    ]
    if not passing:
        return None
    return min(passing) if prefer == "smallest" else max(passing)


def _arguments(parser: ArgumentParser) -> None:
    parser.add_argument(
        "--grid",
        required=True,
        metavar="NAME=V1,V2,...",
        help=f"the parameter to sweep, one of {', '.join(GRID_KEYS)}",
    )
    parser.add_argument(
        "--balance-threshold",
        type=float,
        default=None,
        metavar="FLOAT",
        help=(
            "recommend the value with the least fairness pressure (smallest weight, largest"
            " relaxation) whose final balance reaches this"
        ),
    )


@command_handler(
    help_text="Train once per grid value, in parallel, and tabulate the results.",
    arguments=_arguments,
    training_flags=True,
)
async def sweep(evt: CommandEvent) -> int:
    name, grid = parse_grid(evt.args.grid)
    key, prefer = GRID_KEYS[name]
    threshold = evt.args.balance_threshold
    if threshold is None:
        threshold = float(evt.config["sweep.balance_threshold"])
    workers = min(evt.config["sweep.threads"] or os.cpu_count() or 1, len(grid))
    out = evt.output_dir
    base = config_overrides(evt.args)
    base["output.directory"] = str(out)

    evt.log.info("Sweeping %s over %s with %d workers", key, grid, workers)
    loop = asyncio.get_running_loop()
    directories = [out / f"{name}={value:g}" for value in grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = await asyncio.gather(
            *(
                loop.run_in_executor(
                    pool, _run_point, evt.args.config, {**base, key: value}, str(directory)
                )
                for value, directory in zip(grid, directories)
            ),
            return_exceptions=True,
        )

    rows = [_row(value, d, result) for value, d, result in zip(grid, directories, results)]
    for row in rows:
        if row["status"] != "ok":
            evt.log.warning("Run with %s=%g failed: %s", name, row["value"], row.get("error"))
    best = recommend(rows, threshold, prefer)

    writer = ReportWriter(out, "sweep.jsonl")
    writer.record("config", {"version": version, "config": evt.config.echo(), "grid": grid})
    for row in rows:
        writer.record("run", {"parameter": name, **row})
    writer.record(
        "recommendation",
        {"parameter": name, "threshold": threshold, "prefer": prefer, "value": best},
    )
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, ([row[c] for c in SWEEP_COLUMNS] for row in rows))

    for row in rows:
        balance = row["balance"]
        evt.print(
            f"{name}={row['value']:g} {row['status']}"
            + (f" balance={balance:.4f}" if balance is not None else "")
            + (f" acc={row['accuracy']:.4f}" if row["accuracy"] is not None else "")
            + (f" nmi={row['nmi']:.4f}" if row["nmi"] is not None else "")
        )
    if best is None:
        evt.print(f"No {name} reached balance {threshold}")
    else:
        evt.print(f"{prefer.capitalize()} {name} reaching balance {threshold}: {best:g}")
    if any(row["status"] == "ok" for row in rows):
        return 0
    return rows[-1]["exit_code"] or 1
