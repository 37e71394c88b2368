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
from typing import Any, Dict, List, Optional

from attr import dataclass
import attr

from mautrix.types import SerializableAttrs

from .errors import ConfigError, DomainError

AUG_REDUCTIONS = ("mean", "sum")


@dataclass
class LossWeights(SerializableAttrs):
    alpha: float = 1e-4
    beta: float = 4.0
    gamma: float = 1.0
    vat_epsilon: float = 0.1
    vat_xi: float = 10.0
    vat_power_iters: int = 1
    vat_reduction: str = "mean"

    def problems(self) -> Dict[str, str]:
        problems = {}
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name) < 0:
                problems[f"loss.{name}"] = "must be non-negative"
        if self.vat_epsilon <= 0:
            problems["loss.vat_epsilon"] = "must be positive"
        if self.vat_xi <= 0:
            problems["loss.vat_xi"] = "must be positive"
        if self.vat_power_iters < 1:
            problems["loss.vat_power_iters"] = "must be at least 1"
        if self.vat_reduction not in AUG_REDUCTIONS:
            problems["loss.vat_reduction"] = f"must be one of {', '.join(AUG_REDUCTIONS)}"
        return problems

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise ConfigError(problems)


@dataclass
class TrainConfig(SerializableAttrs):
    """Everything a training run depends on besides the data; the seed included."""

    k: int
    seed: int = 0
    hidden: List[int] = attr.ib(factory=lambda: [256, 256])
    pretrain_epochs: int = 20
    max_refine_epochs: int = 100
    batch_size: int = 250
    stop_tolerance: float = 0.01
    shuffle: bool = True
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    fairness_relax: Optional[float] = None
    target_proportions: Optional[List[float]] = None
    freeze_sizes: bool = True
    embed_every: int = 0
    loss: LossWeights = attr.ib(factory=LossWeights)

    def problems(self) -> Dict[str, str]:
        problems = {}
        if self.k < 2:
            problems["training.k"] = "must be at least 2"
        if any(width < 1 for width in self.hidden):
            problems["model.hidden"] = "layer widths must be positive"
        if self.pretrain_epochs < 0:
            problems["training.pretrain_epochs"] = "must be non-negative"
        if self.max_refine_epochs < 0:
            problems["training.max_refine_epochs"] = "must be non-negative"
        if self.batch_size < 2:
            problems["training.batch_size"] = "must be at least 2"
        if not 0 <= self.stop_tolerance < 1:
            problems["training.stop_tolerance"] = "must lie in [0, 1)"
        if self.learning_rate <= 0:
            problems["training.learning_rate"] = "must be positive"
        for name in ("adam_beta1", "adam_beta2"):
            if not 0 <= getattr(self, name) < 1:
                problems[f"training.{name}"] = "must lie in [0, 1)"
        if self.fairness_relax is not None and not 0 <= self.fairness_relax < 1:
            problems["fairness.relax"] = "must lie in [0, 1)"
        if self.target_proportions is not None:
            if self.fairness_relax is None:
                problems["fairness.proportions"] = "custom proportions need fairness.relax"
            elif any(p < 0 for p in self.target_proportions) or not (
                abs(sum(self.target_proportions) - 1) < 1e-9
            ):
                problems["fairness.proportions"] = "must be non-negative and sum to 1"
        if self.embed_every < 0:
            problems["output.embed_every"] = "must be non-negative"
        problems.update(self.loss.problems())
        return problems

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise ConfigError(problems)


@dataclass
class MetricsReport(SerializableAttrs):
    balance: float
    fairness: float
    cluster_balance: List[float]
    cluster_fairness: List[float]
    accuracy: Optional[float] = None
    nmi: Optional[float] = None
    epoch: Optional[int] = None
    optimal_balance: Optional[float] = None

    def summary(self) -> str:
        parts = [f"balance={self.balance:.4f}", f"fairness={self.fairness:.4f}"]
        if self.accuracy is not None:
            parts.append(f"acc={self.accuracy:.4f}")
        if self.nmi is not None:
            parts.append(f"nmi={self.nmi:.4f}")
        return " ".join(parts)


@dataclass
class EpochRecord(SerializableAttrs):
    phase: str
    epoch: int
    loss: float
    clustering: float
    fairness: float
    augmentation: float
    metrics: Optional[MetricsReport] = None
    fair_balance: Optional[float] = None
    objective: Optional[float] = None
    augmentations: Optional[int] = None

    def csv_row(self) -> Dict[str, Any]:
        metrics = self.metrics
        return {
            "phase": self.phase,
            "epoch": self.epoch,
            "loss": self.loss,
            "clustering": self.clustering,
            "fairness": self.fairness,
            "augmentation": self.augmentation,
            "balance": metrics.balance if metrics else "",
            "fairness_metric": metrics.fairness if metrics else "",
            "accuracy": metrics.accuracy if metrics and metrics.accuracy is not None else "",
            "nmi": metrics.nmi if metrics and metrics.nmi is not None else "",
            "fair_balance": "" if self.fair_balance is None else self.fair_balance,
            "objective": "" if self.objective is None else self.objective,
        }


@dataclass
class TrainTrace(SerializableAttrs):
    records: List[EpochRecord] = attr.ib(factory=list)
    stopped_early: bool = False

    def append(self, record: EpochRecord) -> None:
        last = self.last
        if last and last.phase == record.phase and record.epoch <= last.epoch:
            raise DomainError(f"{record.phase} epoch {record.epoch} recorded after {last.epoch}")
        self.records.append(record)

    def phase(self, name: str) -> List[EpochRecord]:
        return [record for record in self.records if record.phase == name]

    @property
    def last(self) -> Optional[EpochRecord]:
        return self.records[-1] if self.records else None


@dataclass
class RunReport(SerializableAttrs):
    """Everything one command run produced; ``config`` alone reproduces the run."""

    command: str
    status: str
    config: Dict[str, Any]
    version: str
    trace: TrainTrace = attr.ib(factory=TrainTrace)
    train: Optional[MetricsReport] = None
    test: Optional[MetricsReport] = None
    fair_train: Optional[MetricsReport] = None
    objective: Optional[float] = None
    timings: Dict[str, float] = attr.ib(factory=dict)
    artifacts: Dict[str, str] = attr.ib(factory=dict)
    error: Optional[str] = None
    exit_code: int = 0
