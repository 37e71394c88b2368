from __future__ import annotations

import attr
import numpy as np
import pytest

from fairdc import trainer as trainer_module
from fairdc.dataio import make_biased_blobs, split, standardize_dataset
from fairdc.errors import DimensionMismatch, DomainError, NumericError, TrainingDiverged
from fairdc.fairsolve import GroupMembership, HardAssignment, fair_assignment
from fairdc.metrics import accuracy, balance, optimal_balance
from fairdc.trainer import (
    PRETRAIN,
    REFINE,
    ClusteringModel,
    Trainer,
    batches,
    predict,
    pretrain,
    refine,
    refinement_sizes,
    stopping_check,
)
from fairdc.types import LossWeights, TrainConfig


def run(dataset, cfg: TrainConfig, **kwargs) -> Trainer:
    trainer = Trainer(cfg, ClusteringModel.create(dataset.d, cfg), **kwargs)
    trainer.run(dataset)
    return trainer


@pytest.mark.parametrize(
    "n, size, expected",
    [(10, 4, [4, 4, 2]), (9, 4, [4, 5]), (8, 4, [4, 4]), (3, 8, [3])],
)
def test_batch_sizes(n, size, expected):
    parts = list(batches(n, size, np.random.default_rng(0), shuffle=True))
    assert [len(p) for p in parts] == expected
    assert sorted(np.concatenate(parts).tolist()) == list(range(n))


def test_batches_without_shuffle_keep_order():
    parts = list(batches(5, 2, np.random.default_rng(0), shuffle=False))
    assert [p.tolist() for p in parts] == [[0, 1], [2, 3, 4]]


def test_batches_need_two_rows():
    with pytest.raises(DomainError):
        list(batches(1, 4, np.random.default_rng(0), shuffle=True))


def test_training_is_reproducible(tiny_blobs, tiny_config):
    first = run(tiny_blobs, tiny_config)
    second = run(tiny_blobs, tiny_config)
    for a, b in zip(first.model.params.tensors(), second.model.params.tensors()):
        np.testing.assert_array_equal(a, b)
    assert [r.loss for r in first.trace.records] == [r.loss for r in second.trace.records]
    np.testing.assert_array_equal(first.last_fair.labels, second.last_fair.labels)


def test_trace_layout(tiny_blobs, tiny_config):
    cfg = attr.evolve(tiny_config, stop_tolerance=0.0)
    trace = run(tiny_blobs, cfg).trace
    pretraining = trace.phase(PRETRAIN)
    assert [r.epoch for r in pretraining] == [0, 1]
    assert all(r.fairness == 0.0 and r.objective is None for r in pretraining)
    refinement = trace.phase(REFINE)
    assert 1 <= len(refinement) <= 2
    for record in refinement:
        assert record.objective is not None
        assert record.fair_balance is not None
        assert record.metrics.accuracy is not None
        assert record.loss == pytest.approx(
            record.clustering + 4.0 * record.fairness + record.augmentation
        )


def test_without_augmentation_the_term_stays_zero(tiny_blobs, tiny_config):
    cfg = attr.evolve(tiny_config, loss=attr.evolve(tiny_config.loss, gamma=0.0))
    trace = run(tiny_blobs, cfg).trace
    assert all(record.augmentation == 0.0 for record in trace.records)


def test_epoch_callback_sees_every_record(tiny_blobs, tiny_config):
    seen = []
    trainer = run(tiny_blobs, tiny_config, on_epoch=seen.append)
    assert seen == trainer.trace.records


def test_refinement_without_membership_is_skipped(tiny_blobs, tiny_config):
    trainer = run(tiny_blobs.without_membership(), tiny_config)
    assert not trainer.trace.phase(REFINE)
    assert all(record.metrics is None for record in trainer.trace.records)
    with pytest.raises(DomainError):
        trainer.refine(tiny_blobs.without_membership())


def test_phase_functions(tiny_blobs, tiny_config):
    model = ClusteringModel.create(tiny_blobs.d, tiny_config)
    model, trace = pretrain(model, tiny_blobs, tiny_config)
    assert len(trace.phase(PRETRAIN)) == 2
    unlabeled = tiny_blobs.without_membership()
    model, trace = refine(model, unlabeled, tiny_blobs.membership, tiny_config)
    assert trace.phase(REFINE)
    assert model.optimizer.step > 0


def test_predict(tiny_blobs, tiny_config):
    trainer = run(tiny_blobs, tiny_config)
    assign, y = predict(trainer.model, tiny_blobs.features)
    assert assign.labels.shape == (tiny_blobs.n,)
    np.testing.assert_allclose(y.sum(axis=1), 1.0)
    np.testing.assert_array_equal(assign.labels, np.argmax(y, axis=1))
    with pytest.raises(DimensionMismatch):
        predict(trainer.model.params, np.zeros((3, tiny_blobs.d + 1)))


def test_restore_keeps_parameters(tiny_blobs, tiny_config):
    trainer = run(tiny_blobs, tiny_config)
    restored = ClusteringModel.restore(trainer.model.params.copy(), tiny_config)
    a, _ = predict(trainer.model, tiny_blobs.features)
    b, _ = predict(restored, tiny_blobs.features)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_stopping_check():
    membership = GroupMembership.from_values("AABB")
    assert stopping_check(HardAssignment(labels=[0, 1, 0, 1], k=2), membership, 0.0)
    assert not stopping_check(HardAssignment(labels=[0, 0, 1, 1], k=2), membership, 0.5)
    # A tolerance of one accepts anything.
    assert stopping_check(HardAssignment(labels=[0, 0, 1, 1], k=2), membership, 1.0)


def test_embeddings_are_dumped(tmp_path, tiny_blobs, tiny_config):
    cfg = attr.evolve(tiny_config, embed_every=1)
    run(tiny_blobs, cfg, embed_dir=tmp_path)
    assert (tmp_path / "embedding-pretrain-0000.fdcm").exists()
    assert (tmp_path / "embedding-pretrain-0001.fdcm").exists()


def test_divergence_reports_where_it_happened(monkeypatch, tiny_blobs, tiny_config):
    def explode(*args, **kwargs):
        raise NumericError("matmul")

    monkeypatch.setattr(trainer_module, "backward", explode)
    with pytest.raises(TrainingDiverged) as info:
        run(tiny_blobs, tiny_config)
    assert info.value.snapshot == {"phase": PRETRAIN, "epoch": 0, "batch": 0, "node": "matmul"}
    assert info.value.exit_code == 4


def test_refinement_sizes():
    assert refinement_sizes(HardAssignment(labels=[0, 0, 1, 1, 1], k=2)).tolist() == [2, 3]
    # An empty cluster falls back to near-equal sizes.
    assert refinement_sizes(HardAssignment(labels=[0, 0, 0, 0, 0], k=3)).tolist() == [2, 2, 1]


def _record_solves(monkeypatch) -> list[tuple[tuple, np.ndarray]]:
    calls = []

    def recording(*args, **kwargs):
        result = fair_assignment(*args, **kwargs)
        calls.append((args, result.assignment.cluster_sizes))
        return result

    monkeypatch.setattr(trainer_module, "fair_assignment", recording)
    return calls


def test_refinement_keeps_pretrained_cluster_sizes(monkeypatch, tiny_blobs, tiny_config):
    calls = _record_solves(monkeypatch)
    cfg = attr.evolve(tiny_config, stop_tolerance=0.0, max_refine_epochs=3)
    trainer = Trainer(cfg, ClusteringModel.create(tiny_blobs.d, cfg))
    trainer.pretrain(tiny_blobs)
    assign, _ = predict(trainer.model, tiny_blobs.features)
    expected = refinement_sizes(assign)
    trainer.refine(tiny_blobs)
    assert calls
    np.testing.assert_array_equal(trainer.sizes, expected)
    for _, sizes in calls:
        np.testing.assert_array_equal(sizes, expected)


def test_refinement_sizes_can_follow_predictions(monkeypatch, tiny_blobs, tiny_config):
    calls = _record_solves(monkeypatch)
    cfg = attr.evolve(tiny_config, freeze_sizes=False)
    trainer = run(tiny_blobs, cfg)
    assert trainer.sizes is None
    assert calls and all(args[4] is None for args, _ in calls)


def _blobs(n_per_blob: int, psv_bias: float, seed: int = 0):
    dataset, _ = standardize_dataset(
        make_biased_blobs(n_per_blob=n_per_blob, k=4, d=2, psv_bias=psv_bias, seed=seed)
    )
    return dataset


def _predicted_balance(trainer: Trainer, dataset) -> float:
    assign, _ = predict(trainer.model, dataset.features)
    return balance(assign, dataset.membership)[0]


@pytest.mark.slow
def test_default_pretraining_finds_the_blobs():
    dataset = _blobs(500, 0.9)
    cfg = TrainConfig(k=4, seed=0, max_refine_epochs=0)
    trainer = run(dataset, cfg)
    assign, _ = predict(trainer.model, dataset.features)
    assert (assign.cluster_sizes > 0).all()
    assert accuracy(assign, dataset.labels) >= 0.9


@pytest.mark.slow
def test_biased_blobs_end_to_end():
    dataset = _blobs(500, 0.9)
    cfg = TrainConfig(k=4, seed=0, batch_size=100, pretrain_epochs=20, max_refine_epochs=10)
    trainer = Trainer(cfg, ClusteringModel.create(dataset.d, cfg))
    trainer.pretrain(dataset)
    pretrained = _predicted_balance(trainer, dataset)
    trainer.refine(dataset)
    assign, _ = predict(trainer.model, dataset.features)
    # Predictions never see the protected attribute, so their balance is the real measure.
    predicted = balance(assign, dataset.membership)[0]
    assert (assign.cluster_sizes > 0).all()
    assert predicted >= 0.3
    assert predicted >= pretrained + 0.15
    assert np.mean(assign.labels == trainer.last_fair.labels) >= 0.6
    fair_balance, _ = balance(trainer.last_fair.assignment, dataset.membership)
    assert fair_balance >= optimal_balance(dataset.membership) - 0.02

    again = Trainer(cfg, ClusteringModel.create(dataset.d, cfg))
    again.run(dataset)
    for a, b in zip(trainer.model.params.tensors(), again.model.params.tensors()):
        np.testing.assert_array_equal(a, b)


@pytest.mark.slow
def test_fairness_weight_raises_predicted_balance():
    dataset = _blobs(100, 1.0)
    results = {}
    for beta in (0.0, 4.0):
        cfg = TrainConfig(
            k=4,
            seed=0,
            batch_size=50,
            pretrain_epochs=20,
            max_refine_epochs=40,
            loss=LossWeights(beta=beta),
        )
        results[beta] = _predicted_balance(run(dataset, cfg), dataset)
    assert results[0.0] < 0.1
    assert results[4.0] - results[0.0] >= 0.3


@pytest.mark.slow
def test_wider_relaxation_never_raises_balance():
    dataset = _blobs(100, 0.9)
    cfg = TrainConfig(k=4, seed=0, batch_size=50, pretrain_epochs=20, max_refine_epochs=0)
    trainer = run(dataset, cfg)
    _, y = predict(trainer.model, dataset.features)
    balances = [
        balance(fair_assignment(y, dataset.membership, relax).assignment, dataset.membership)[0]
        for relax in (0.01, 0.02, 0.03, 0.04)
    ]
    assert all(later <= earlier + 1e-12 for earlier, later in zip(balances, balances[1:]))


@pytest.mark.slow
def test_held_out_predictions_stay_close_to_train_balance():
    dataset = _blobs(500, 0.9)
    train_set, test_set = split(dataset, 0.25, seed=0)
    cfg = TrainConfig(k=4, seed=0, batch_size=100, pretrain_epochs=20, max_refine_epochs=10)
    trainer = run(train_set, cfg)
    train_balance = _predicted_balance(trainer, train_set)
    test_assign, _ = predict(trainer.model, test_set.without_membership().features)
    assert test_assign.labels.shape == (test_set.n,)
    test_balance = balance(test_assign, test_set.membership)[0]
    # 500 test rows spread over four clusters leave each cluster's group ratio with a sampling
    # spread of roughly ±0.15.
    assert abs(test_balance - train_balance) <= 0.3
