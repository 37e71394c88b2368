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
from typing import Callable, Iterator
import logging
import math
import time

from attr import dataclass
import attr
import numpy as np

from mautrix.util.logging import TraceLogger

from .dataio import Dataset, save_matrix
from .errors import DimensionMismatch, DomainError, InfeasibleError, NumericError, TrainingDiverged
from .fairsolve import (
    FairAssignmentResult,
    GroupMembership,
    HardAssignment,
    check_plan,
    fair_assignment,
    round_assignment,
)
from .metrics import balance, evaluate, optimal_balance
from .objectives import compute_losses, vat_perturbation
from .tensornet import (
    ModelParams,
    OptimizerState,
    ParamNodes,
    backward,
    embed,
    forward,
    forward_graph,
    init_params,
    optimizer_step,
)
from .tensornet import graph as G
from .types import EpochRecord, TrainConfig, TrainTrace

PRETRAIN = "pretrain"
REFINE = "refine"

EpochCallback = Callable[[EpochRecord], None]


@dataclass(eq=False)
class ClusteringModel:
    """
    The trainable state of one run: network parameters, the Adam state shared by both phases,
    and the random streams for batch shuffling and VAT directions.
    """

    params: ModelParams
    optimizer: OptimizerState
    shuffle_rng: np.random.Generator
    vat_rng: np.random.Generator

    @classmethod
    def create(cls, input_dim: int, cfg: TrainConfig) -> ClusteringModel:
        init_seed, shuffle_seed, vat_seed = np.random.SeedSequence(cfg.seed).spawn(3)
        params = init_params(input_dim, cfg.hidden, cfg.k, np.random.default_rng(init_seed))
        return cls(
            params=params,
            optimizer=OptimizerState.fresh(
                params,
                learning_rate=cfg.learning_rate,
                beta1=cfg.adam_beta1,
                beta2=cfg.adam_beta2,
            ),
            shuffle_rng=np.random.default_rng(shuffle_seed),
            vat_rng=np.random.default_rng(vat_seed),
        )

    @classmethod
    def restore(cls, params: ModelParams, cfg: TrainConfig) -> ClusteringModel:
        params.validate()
        model = cls.create(params.input_dim, attr.evolve(cfg, hidden=params.hidden))
        model.params = params
        return model


def batches(
    n: int, batch_size: int, rng: np.random.Generator, shuffle: bool
) -> Iterator[np.ndarray]:
    """
    Row indices of one epoch's minibatches. A short final batch is kept if it has at least two
    rows and merged into the previous batch otherwise.
    """
    if n < 2:
        raise DomainError(f"Training needs at least 2 rows, got {n}")
    order = rng.permutation(n) if shuffle else np.arange(n)
    starts = list(range(0, n, batch_size))
    if len(starts) > 1 and n - starts[-1] < 2:
        starts.pop()
    for index, start in enumerate(starts):
        stop = starts[index + 1] if index + 1 < len(starts) else n
        yield order[start:stop]


def predict(
    model: ClusteringModel | ModelParams, features: np.ndarray
) -> tuple[HardAssignment, np.ndarray]:
    """
    Cluster rows that carry no protected attribute: plain argmax of the network's soft
    assignment, with no fairness solving.

    Raises:
        DimensionMismatch: if the feature width differs from the network's input width.
    """
    params = model.params if isinstance(model, ClusteringModel) else model
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != params.input_dim:
        raise DimensionMismatch(params.input_dim, features.shape[-1])
    y = forward(params, features)
    return round_assignment(y), y


def refinement_sizes(assign: HardAssignment) -> np.ndarray:
    """
    Cluster sizes to hold fixed for a whole refinement: those of ``assign``, or near-equal
    sizes if ``assign`` leaves a cluster empty.
    """
    sizes = assign.cluster_sizes
    if (sizes > 0).all():
        return sizes
    n, k = int(sizes.sum()), assign.k
    return np.array([n // k + (j < n % k) for j in range(k)], dtype=np.int64)


def stopping_check(assign: HardAssignment, membership: GroupMembership, delta: float) -> bool:
    """Whether the balance of ``assign`` reaches (1 - δ) times the best achievable balance."""
    overall, _ = balance(assign, membership)
    return overall >= (1.0 - delta) * optimal_balance(membership) - 1e-12


class Trainer:
    """
    Runs the two training phases on one dataset and keeps the epoch trace.

    Pretraining minimises ℓ_C + γ·ℓ_Aug. Refinement repeats: predict on the whole dataset, solve
    the fair assignment closest to those predictions, then fit minibatches to
    ℓ_C + β·ℓ_Fair + γ·ℓ_Aug using the solved labels, until the predictions are balanced enough
    or ``max_refine_epochs`` runs out.
    """

    log: TraceLogger = logging.getLogger("fairdc.trainer")

    cfg: TrainConfig
    model: ClusteringModel
    trace: TrainTrace
    embed_dir: Path | None
    on_epoch: EpochCallback | None
    timings: dict[str, float]
    last_fair: FairAssignmentResult | None
    sizes: np.ndarray | None

    def __init__(
        self,
        cfg: TrainConfig,
        model: ClusteringModel,
        embed_dir: Path | None = None,
        on_epoch: EpochCallback | None = None,
    ) -> None:
        cfg.validate()
        self.cfg = cfg
        self.model = model
        self.trace = TrainTrace()
        self.embed_dir = embed_dir
        self.on_epoch = on_epoch
        self.timings = {}
        self.last_fair = None
        self.sizes = None

    def _step(
        self, x: np.ndarray, fair: np.ndarray | None, phase: str, epoch: int, batch: int
    ) -> dict[str, float]:
        model, weights = self.model, self.cfg.loss
        nodes = ParamNodes.record(model.params)
        try:
            probs = forward_graph(nodes, G.constant(x, "x"))
            perturbed = None
            if weights.gamma > 0:
                r = vat_perturbation(model.params, x, weights, model.vat_rng)
                perturbed = forward_graph(nodes, G.constant(x + r, "x_adv"))
            terms = compute_losses(probs, nodes, weights, perturbed, fair)
            breakdown = terms.breakdown()
            if not math.isfinite(breakdown["total"]):
                raise NumericError("loss")
            grads = backward(terms.total, nodes)
        except NumericError as e:
            raise TrainingDiverged(
                {"phase": phase, "epoch": epoch, "batch": batch, "node": e.node}
            ) from e
        model.params, model.optimizer = optimizer_step(model.params, grads, model.optimizer)
        self.log.trace("%s epoch %d batch %d: %s", phase, epoch, batch, breakdown)
        return breakdown

    def _epoch(
        self, features: np.ndarray, fair: np.ndarray | None, phase: str, epoch: int
    ) -> dict[str, float]:
        sums: dict[str, float] = {}
        count = 0
        for batch, rows in enumerate(
            batches(len(features), self.cfg.batch_size, self.model.shuffle_rng, self.cfg.shuffle)
        ):
            labels = fair[rows] if fair is not None else None
            for key, value in self._step(features[rows], labels, phase, epoch, batch).items():
                sums[key] = sums.get(key, 0.0) + value * len(rows)
            count += len(rows)
        return {key: value / count for key, value in sums.items()}

    def _record(
        self,
        dataset: Dataset,
        phase: str,
        epoch: int,
        losses: dict[str, float],
        fair: FairAssignmentResult | None = None,
    ) -> tuple[EpochRecord, HardAssignment]:
        assign, _ = predict(self.model, dataset.features)
        metrics = None
        if dataset.membership is not None:
            metrics = evaluate(assign, dataset.membership, dataset.labels, epoch)
        record = EpochRecord(
            phase=phase,
            epoch=epoch,
            loss=losses["total"],
            clustering=losses["clustering"],
            fairness=losses["fairness"],
            augmentation=losses["augmentation"],
            metrics=metrics,
            fair_balance=(
                balance(fair.assignment, dataset.membership)[0]
                if fair is not None and dataset.membership is not None
                else None
            ),
            objective=fair.objective if fair is not None else None,
            augmentations=fair.augmentations if fair is not None else None,
        )
        self.trace.append(record)
        self.log.info(
            "%s epoch %d: loss=%.5f l_c=%.5f l_fair=%.5f l_aug=%.5f %s%s",
            phase,
            epoch,
            record.loss,
            record.clustering,
            record.fairness,
            record.augmentation,
            metrics.summary() if metrics else "",
            f" objective={record.objective:.4f}" if record.objective is not None else "",
        )
        self._dump_embedding(dataset, phase, epoch)
        if self.on_epoch:
            self.on_epoch(record)
        return record, assign

    def _dump_embedding(self, dataset: Dataset, phase: str, epoch: int) -> None:
        every = self.cfg.embed_every
        if not self.embed_dir or not every or (epoch + 1) % every:
            return
        path = self.embed_dir / f"embedding-{phase}-{epoch:04d}.fdcm"
        save_matrix(path, embed(self.model.params, dataset.features))
        self.log.debug("Wrote embedding to %s", path)

    def pretrain(self, dataset: Dataset) -> TrainTrace:
        start = time.perf_counter()
        for epoch in range(self.cfg.pretrain_epochs):
            losses = self._epoch(dataset.features, None, PRETRAIN, epoch)
            self._record(dataset, PRETRAIN, epoch, losses)
        self.timings[PRETRAIN] = time.perf_counter() - start
        return self.trace

    def solve(self, dataset: Dataset, epoch: int) -> FairAssignmentResult:
        y = forward(self.model.params, dataset.features)
        try:
            result = fair_assignment(
                y,
                dataset.membership,
                self.cfg.fairness_relax,
                self.cfg.target_proportions,
                self.sizes,
            )
        except InfeasibleError as e:
            raise e.with_context(f"refine epoch {epoch}") from e
        check_plan(result.assignment, dataset.membership, result.plan)
        self.log.debug(
            "Epoch %d fair solve: %s plan, objective %.4f, %d augmentations, %.3fs",
            epoch,
            result.plan.mode,
            result.objective,
            result.augmentations,
            result.elapsed,
        )
        return result

    def freeze_sizes(self, dataset: Dataset) -> np.ndarray:
        assign, _ = predict(self.model, dataset.features)
        sizes = refinement_sizes(assign)
        if not np.array_equal(sizes, assign.cluster_sizes):
            self.log.warning(
                "Pretraining left empty clusters %s, refining with near-equal sizes instead",
                np.flatnonzero(assign.cluster_sizes == 0).tolist(),
            )
        self.log.debug("Cluster sizes fixed for refinement: %s", sizes.tolist())
        return sizes

    def refine(self, dataset: Dataset) -> TrainTrace:
        if dataset.membership is None:
            raise DomainError("Refinement needs the protected-group membership of every row")
        start = time.perf_counter()
        solve_time = 0.0
        self.sizes = None
        if self.cfg.freeze_sizes:
            self.sizes = self.freeze_sizes(dataset)
        for epoch in range(self.cfg.max_refine_epochs):
            solve_start = time.perf_counter()
            result = self.solve(dataset, epoch)
            solve_time += time.perf_counter() - solve_start
            self.last_fair = result
            losses = self._epoch(dataset.features, result.labels, REFINE, epoch)
            _, assign = self._record(dataset, REFINE, epoch, losses, result)
            if stopping_check(assign, dataset.membership, self.cfg.stop_tolerance):
                self.log.info("Predictions reached the balance target after epoch %d", epoch)
                self.trace.stopped_early = True
                break
        self.timings[REFINE] = time.perf_counter() - start
        self.timings["solve"] = solve_time
        return self.trace

    def run(self, dataset: Dataset) -> TrainTrace:
        self.pretrain(dataset)
        if self.cfg.max_refine_epochs and dataset.membership is not None:
            self.refine(dataset)
        return self.trace


def pretrain(
    model: ClusteringModel, dataset: Dataset, cfg: TrainConfig
) -> tuple[ClusteringModel, TrainTrace]:
    trainer = Trainer(cfg, model)
    return trainer.model, trainer.pretrain(dataset)


def refine(
    model: ClusteringModel, dataset: Dataset, membership: GroupMembership, cfg: TrainConfig
) -> tuple[ClusteringModel, TrainTrace]:
    trainer = Trainer(cfg, model)
    return trainer.model, trainer.refine(attr.evolve(dataset, membership=membership))
