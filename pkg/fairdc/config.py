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
from typing import Any
import importlib.resources
import os

from mautrix.util.config import BaseFileConfig, ConfigUpdateHelper

from .dataio import CSVSchema
from .errors import ConfigError
from .types import LossWeights, TrainConfig

BASE_PATH = "pkg://fairdc/example-config.yaml"
SOURCES = ("blobs", "csv", "fdcm")

OUTPUT_ENV = "FAIRDC_OUTPUT_DIR"
LOG_LEVEL_ENV = "FAIRDC_LOG_LEVEL"


def example_config_path() -> str:
    return str(importlib.resources.files("fairdc") / "example-config.yaml")


class Config(BaseFileConfig):
    def __init__(self, path: str | None = None) -> None:
        super().__init__(path or example_config_path(), BASE_PATH)

    def do_update(self, helper: ConfigUpdateHelper) -> None:
        copy, copy_dict, base = helper

        copy("model.hidden")

        copy("training.k")
        copy("training.seed")
        copy("training.batch_size")
        copy("training.pretrain_epochs")
        copy("training.max_refine_epochs")
        copy("training.stop_tolerance")
        copy("training.shuffle")
        copy("training.learning_rate")
        copy("training.adam_beta1")
        copy("training.adam_beta2")

        copy("loss.alpha")
        copy("loss.beta")
        copy("loss.gamma")
        copy("loss.vat_epsilon")
        copy("loss.vat_xi")
        copy("loss.vat_power_iters")
        copy("loss.vat_reduction")

        # Older configs kept the relaxation next to the loss weights.
        if "loss.fairness_relax" in self:
            base["fairness.relax"] = self["loss.fairness_relax"]
        else:
            copy("fairness.relax")
        copy("fairness.proportions")
        copy("fairness.freeze_sizes")

        copy("data.source")
        copy("data.path")
        copy("data.membership")
        copy("data.labels")
        copy_dict("data.schema")
        copy("data.standardize")
        copy("data.test_fraction")
        copy("data.split_seed")
        copy("data.blobs.n_per_blob")
        copy("data.blobs.k")
        copy("data.blobs.d")
        copy("data.blobs.psv_bias")
        copy("data.blobs.seed")

        copy("output.directory")
        copy("output.embed_every")

        copy("sweep.threads")
        copy("sweep.balance_threshold")

        copy_dict("logging", override_existing_map=False)

    def apply_environment(self) -> None:
        if os.environ.get(OUTPUT_ENV):
            self["output.directory"] = os.environ[OUTPUT_ENV]
        level = os.environ.get(LOG_LEVEL_ENV)
        if level:
            self["logging.root.level"] = level.upper()
            self["logging.loggers.fairdc.level"] = level.upper()

    def apply_overrides(self, overrides: dict[str, Any]) -> None:
        for key, value in overrides.items():
            if value is not None:
                self[key] = value

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            k=self["training.k"],
            seed=self["training.seed"],
            hidden=list(self["model.hidden"]),
            pretrain_epochs=self["training.pretrain_epochs"],
            max_refine_epochs=self["training.max_refine_epochs"],
            batch_size=self["training.batch_size"],
            stop_tolerance=float(self["training.stop_tolerance"]),
            shuffle=bool(self["training.shuffle"]),
            learning_rate=float(self["training.learning_rate"]),
            adam_beta1=float(self["training.adam_beta1"]),
            adam_beta2=float(self["training.adam_beta2"]),
            fairness_relax=(
                float(self["fairness.relax"]) if self["fairness.relax"] is not None else None
            ),
            target_proportions=(
                [float(p) for p in self["fairness.proportions"]]
                if self["fairness.proportions"] is not None
                else None
            ),
            freeze_sizes=bool(self["fairness.freeze_sizes"]),
            embed_every=self["output.embed_every"],
            loss=LossWeights(
                alpha=float(self["loss.alpha"]),
                beta=float(self["loss.beta"]),
                gamma=float(self["loss.gamma"]),
                vat_epsilon=float(self["loss.vat_epsilon"]),
                vat_xi=float(self["loss.vat_xi"]),
                vat_power_iters=self["loss.vat_power_iters"],
                vat_reduction=str(self["loss.vat_reduction"]),
            ),
        )

    def schema(self) -> CSVSchema:
        return CSVSchema.deserialize(self["data.schema"] or {})

    @property
    def output_dir(self) -> Path:
        return Path(self["output.directory"])

    def problems(self) -> dict[str, str]:
        problems: dict[str, str] = {}
        try:
            problems.update(self.train_config().problems())
        except (TypeError, ValueError) as e:
            problems["training"] = f"malformed value ({e})"
        source = self["data.source"]
        if source not in SOURCES:
            problems["data.source"] = f"must be one of {', '.join(SOURCES)}"
        elif source != "blobs" and not self["data.path"]:
            problems["data.path"] = f"required for {source} sources"
        elif source == "csv" and not self.schema().features:
            problems["data.schema.features"] = "required for csv sources"
        elif source == "fdcm" and not self["data.membership"]:
            problems["data.membership"] = "required for fdcm sources"
        fraction = self["data.test_fraction"]
        if fraction is not None and not 0 < fraction < 1:
            problems["data.test_fraction"] = "must lie in (0, 1)"
        if source == "blobs":
            for key in ("n_per_blob", "k", "d"):
                if self[f"data.blobs.{key}"] < 1:
                    problems[f"data.blobs.{key}"] = "must be positive"
            if not 0 <= self["data.blobs.psv_bias"] <= 1:
                problems["data.blobs.psv_bias"] = "must lie in [0, 1]"
        if self["sweep.threads"] < 0:
            problems["sweep.threads"] = "must be non-negative"
        if not self["output.directory"]:
            problems["output.directory"] = "must be set"
        return problems

    def validate(self) -> None:
        """
        Raises:
            ConfigError: listing every offending field at once.
        """
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def echo(self) -> dict[str, Any]:
        """Every resolved setting that affects results, logging excluded."""
        return {
            key: self._copy_plain(self[key])
            for key in ("model", "training", "loss", "fairness", "data", "output", "sweep")
        }

    @classmethod
    def _copy_plain(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {str(k): cls._copy_plain(v) for k, v in value.items()}
        if isinstance(value, list):
            return [cls._copy_plain(v) for v in value]
        return value


def load_config(path: str | None, overrides: dict[str, Any] | None = None) -> Config:
    config = Config(path)
    config.load()
    config.update(save=False)
    config.apply_environment()
    config.apply_overrides(overrides or {})
    config.validate()
    return config
