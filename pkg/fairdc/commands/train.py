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
import logging

import numpy as np

from mautrix.util.logging import TraceLogger

from ..config import Config
from ..dataio import (
    Dataset,
    load_csv,
    load_labels,
    load_membership,
    make_biased_blobs,
    read_table,
    split,
    standardize_dataset,
)
from ..errors import FairDCError
from ..metrics import evaluate
from ..trainer import ClusteringModel, Trainer, predict
from ..types import RunReport
from ..version import version
from .handler import CommandEvent, command_handler
from .report import ReportWriter, write_labels

log: TraceLogger = logging.getLogger("fairdc.cli.train")


def load_dataset(config: Config) -> Dataset:
    source = config["data.source"]
    if source == "blobs":
        dataset = make_biased_blobs(
            n_per_blob=config["data.blobs.n_per_blob"],
            k=config["data.blobs.k"],
            d=config["data.blobs.d"],
            psv_bias=float(config["data.blobs.psv_bias"]),
            seed=config["data.blobs.seed"],
        )
    elif source == "csv":
        dataset = load_csv(config["data.path"], config.schema())
    else:
        path = config["data.path"]
        dataset = Dataset(
            features=read_table(path),
            membership=load_membership(config["data.membership"]),
            labels=load_labels(config["data.labels"]) if config["data.labels"] else None,
            name=Path(path).stem,
            provenance={"source": "fdcm", "path": str(path)},
        )
    if config["data.standardize"]:
        dataset, _ = standardize_dataset(dataset)
    log.info("Loaded %s: %d rows, %d features", dataset.name, dataset.n, dataset.d)
    return dataset


def save_model(path: Path, model: ClusteringModel) -> str:
    np.savez(path, **model.params.to_arrays())
    return str(path)


def run_training(config: Config, output_dir: Path, command: str = "train") -> RunReport:
    """
    Train on the configured data and write every artifact of the run into ``output_dir``.
    Failures are not raised: the returned report is flagged ``failed`` and carries the exit
    code, and whatever finished before the failure is still written.
    """
    writer = ReportWriter(output_dir)
    echo = config.echo()
    writer.config(echo, version)
    report = RunReport(command=command, status="running", config=echo, version=version)
    trainer: Trainer | None = None
    try:
        dataset = load_dataset(config)
        test_set = None
        if config["data.test_fraction"]:
            dataset, test_set = split(
                dataset, float(config["data.test_fraction"]), config["data.split_seed"]
            )
        cfg = config.train_config()
        model = ClusteringModel.create(dataset.d, cfg)
        trainer = Trainer(
            cfg, model, embed_dir=output_dir if cfg.embed_every else None, on_epoch=writer.epoch
        )
        trainer.run(dataset)

        assign, _ = predict(model, dataset.features)
        report.artifacts["model"] = save_model(output_dir / "model.npz", model)
        report.artifacts["labels"] = write_labels(output_dir / "labels.csv", assign.labels)
        if dataset.membership is not None:
            report.train = evaluate(assign, dataset.membership, dataset.labels)
        if trainer.last_fair is not None:
            fair = trainer.last_fair
            report.artifacts["fair_labels"] = write_labels(
                output_dir / "fair_labels.csv", fair.labels
            )
            report.fair_train = evaluate(fair.assignment, dataset.membership, dataset.labels)
            report.objective = fair.objective
        if test_set is not None:
            # The held-out rows are clustered without looking at their group.
            test_assign, _ = predict(model, test_set.without_membership().features)
            report.artifacts["test_labels"] = write_labels(
                output_dir / "test_labels.csv", test_assign.labels
            )
            report.test = evaluate(test_assign, test_set.membership, test_set.labels)
        report.status = "ok"
    except FairDCError as e:
        log.error("Training failed: %s", e)
        report.status = "failed"
        report.error = f"{type(e).__name__}: {e}"
        report.exit_code = e.exit_code
    except Exception as e:
        log.exception("Unexpected error while training")
        report.status = "failed"
        report.error = f"{type(e).__name__}: {e}"
        report.exit_code = 1
    if trainer is not None:
        report.trace = trainer.trace
        report.timings = dict(trainer.timings)
    writer.final(report)
    if report.train:
        log.info("Final: %s", report.train.summary())
    return report


@command_handler(
    help_text="Pretrain and refine a fair clustering network on the configured data.",
    training_flags=True,
)
async def train(evt: CommandEvent) -> int:
    report = run_training(evt.config, evt.output_dir)
    if report.status == "ok":
        evt.print(f"Wrote report to {evt.output_dir / 'report.jsonl'}")
        if report.train:
            evt.print(report.train.summary())
        if report.test:
            evt.print(f"test: {report.test.summary()}")
    else:
        evt.print(f"Training failed: {report.error}")
    return report.exit_code
