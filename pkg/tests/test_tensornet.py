from __future__ import annotations

import math

import numpy as np
import pytest

from fairdc.errors import DimensionMismatch, DomainError, NumericError
from fairdc.objectives import clustering_loss
from fairdc.tensornet import (
    ModelParams,
    OptimizerState,
    ParamNodes,
    backward,
    embed,
    entropy,
    forward,
    forward_graph,
    init_params,
    optimizer_step,
)
from fairdc.tensornet import graph as G
from fairdc.tensornet.model import GradientSet


def zero_params(d: int, hidden: list[int], k: int) -> ModelParams:
    params = init_params(d, hidden, k, 0)
    return params.with_tensors([np.zeros_like(t) for t in params.tensors()])


def test_forward_with_zero_weights_is_uniform():
    y = forward(zero_params(3, [5], 4), np.random.default_rng(0).normal(size=(6, 3)))
    np.testing.assert_allclose(y, np.full((6, 4), 0.25))


def test_softmax_of_equal_logits():
    np.testing.assert_allclose(G.softmax(G.constant([[0.0, 0.0]])).value, [[0.5, 0.5]])


def test_softmax_ignores_a_constant_shift_per_row(rng):
    logits = rng.normal(scale=5.0, size=(6, 4))
    shift = rng.normal(scale=50.0, size=(6, 1))
    p = G.softmax(G.constant(logits)).value
    np.testing.assert_allclose(p, G.softmax(G.constant(logits + shift)).value, atol=1e-9)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)


def test_forward_matches_plain_matrix_arithmetic():
    params = init_params(2, [3], 2, 42)
    x = np.array([[0.5, -1.0], [2.0, 0.25], [-0.75, 1.5]])
    hidden = np.maximum(x @ params.weights[0] + params.biases[0], 0.0)
    z = hidden @ params.weights[1] + params.biases[1]
    expected = np.exp(z) / np.exp(z).sum(axis=1, keepdims=True)
    np.testing.assert_allclose(forward(params, x), expected, rtol=1e-10)
    np.testing.assert_allclose(embed(params, x), hidden, rtol=1e-12)


def test_forward_rejects_wrong_width():
    with pytest.raises(DimensionMismatch):
        forward(init_params(3, [4], 2, 0), np.zeros((2, 5)))


def test_params_validate():
    params = init_params(2, [3], 2, 0)
    params.validate()
    broken = params.copy()
    broken.weights[0][0, 0] = np.nan
    with pytest.raises(NumericError):
        broken.validate()
    with pytest.raises(DomainError):
        init_params(2, [3], 1, 0)


def test_params_array_dump_restores():
    params = init_params(4, [6, 5], 3, 9)
    restored = ModelParams.from_arrays(params.to_arrays())
    assert restored.hidden == [6, 5]
    assert restored.activations == params.activations
    for a, b in zip(params.tensors(), restored.tensors()):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize(
    "p, expected",
    [
        (np.full(10, 0.1), math.log(10)),
        ([0.0, 1.0, 0.0], 0.0),
        ([0.25, 0.75], 0.562335),
    ],
)
def test_entropy(p, expected):
    assert entropy(p) == pytest.approx(expected, abs=1e-6)


def test_entropy_rejects_negative():
    with pytest.raises(DomainError):
        entropy([1.5, -0.5])


def test_constant_loss_has_zero_gradients():
    params = init_params(2, [3], 2, 0)
    nodes = ParamNodes.record(params)
    grads = backward(G.constant(3.0), nodes)
    assert all((g == 0).all() for g in grads.tensors)


def test_quadratic_loss_gradient():
    params = init_params(2, [3], 2, 1)
    nodes = ParamNodes.record(params)
    loss = G.sum_squares(nodes.leaves[0])
    for leaf in nodes.leaves[1:]:
        loss = G.add(loss, G.sum_squares(leaf))
    grads = backward(loss, nodes)
    for tensor, grad in zip(params.tensors(), grads.tensors):
        np.testing.assert_allclose(grad, 2 * tensor)


def test_clustering_loss_gradient_matches_finite_differences(rng, gradcheck):
    params = init_params(3, [6], 3, 11)
    x = rng.normal(size=(12, 3))

    def loss_of(nodes: ParamNodes) -> G.Node:
        return clustering_loss(forward_graph(nodes, G.constant(x)), nodes, 1e-4)

    gradcheck(loss_of, params, rng)


def test_non_finite_gradient_names_node():
    bad = G.leaf(np.array([np.inf, 1.0]), "bad")
    with pytest.raises(NumericError) as info:
        G.gradients(G.reduce_sum(bad), [bad])
    assert info.value.node == "sum"


def test_optimizer_zero_gradient_keeps_params_and_decays_moments():
    params = init_params(2, [3], 2, 0)
    state = OptimizerState.fresh(params)
    state.first = [np.ones_like(t) for t in state.first]
    state.second = [np.ones_like(t) for t in state.second]
    zeros = GradientSet(tensors=[np.zeros_like(t) for t in params.tensors()])
    _, new_state = optimizer_step(params, zeros, state)
    # The decayed first moment still moves the parameters; with a zero moment nothing moves.
    fresh = OptimizerState.fresh(params)
    still, _ = optimizer_step(params, zeros, fresh)
    for a, b in zip(params.tensors(), still.tensors()):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(new_state.first[0], 0.9)
    np.testing.assert_allclose(new_state.second[0], 0.999)
    assert new_state.step == 1


def test_optimizer_first_step():
    params = ModelParams(
        weights=[np.array([[1.0]])], biases=[np.array([0.0])], activations=["linear"]
    )
    grads = GradientSet(tensors=[np.array([[1.0]]), np.array([0.0])])
    state = OptimizerState.fresh(params, learning_rate=1e-3)
    new_params, new_state = optimizer_step(params, grads, state)
    assert new_params.weights[0][0, 0] == pytest.approx(1.0 - 1e-3, abs=1e-9)
    assert new_params.biases[0][0] == 0.0
    # Inputs are left alone.
    assert params.weights[0][0, 0] == 1.0
    assert state.step == 0


def test_optimizer_minimises_a_parabola():
    params = ModelParams(
        weights=[np.array([[1.0]])], biases=[np.array([0.0])], activations=["linear"]
    )
    state = OptimizerState.fresh(params, learning_rate=0.1)
    for _ in range(100):
        x = params.weights[0]
        grads = GradientSet(tensors=[2.0 * x, np.zeros(1)])
        params, state = optimizer_step(params, grads, state)
    assert abs(params.weights[0][0, 0]) < 0.05
    assert state.step == 100
