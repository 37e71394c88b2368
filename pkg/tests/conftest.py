from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from fairdc.dataio import make_biased_blobs
from fairdc.fairsolve import GroupMembership
from fairdc.tensornet import ModelParams, ParamNodes, backward
from fairdc.tensornet import graph as G
from fairdc.types import LossWeights, TrainConfig


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def four_points() -> tuple[np.ndarray, GroupMembership]:
    """Groups A, A, B, B with soft assignments that all lean towards cluster 0."""
    y = np.array([[0.9, 0.1], [0.8, 0.2], [0.7, 0.3], [0.2, 0.8]])
    return y, GroupMembership.from_values(["A", "A", "B", "B"])


@pytest.fixture
def tiny_blobs():
    return make_biased_blobs(n_per_blob=20, k=2, d=2, psv_bias=0.9, seed=3)


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(
        k=2,
        seed=5,
        hidden=[8],
        pretrain_epochs=2,
        max_refine_epochs=2,
        batch_size=16,
        loss=LossWeights(alpha=1e-4, beta=4.0, gamma=1.0),
    )


LossBuilder = Callable[[ParamNodes], G.Node]


def _gradcheck(
    loss_of: LossBuilder,
    params: ModelParams,
    rng: np.random.Generator,
    coordinates: int = 20,
    step: float = 1e-5,
) -> None:
    """Compare reverse-mode gradients with central differences at random coordinates."""
    nodes = ParamNodes.record(params)
    analytic = backward(loss_of(nodes), nodes)
    tensors = params.tensors()
    for _ in range(coordinates):
        which = int(rng.integers(len(tensors)))
        index = tuple(int(rng.integers(size)) for size in tensors[which].shape)
        values = []
        for sign in (1.0, -1.0):
            shifted = params.copy()
            shifted.tensors()[which][index] += sign * step
            values.append(float(loss_of(ParamNodes.freeze(shifted))))
        numeric = (values[0] - values[1]) / (2 * step)
        expected = analytic.tensors[which][index]
        assert np.isclose(expected, numeric, rtol=1e-4, atol=1e-7), (which, index)


@pytest.fixture
def gradcheck() -> Callable[..., None]:
    return _gradcheck
