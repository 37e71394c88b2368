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

from typing import Sequence

from attr import dataclass
from scipy.special import entr
import attr
import numpy as np

from ..errors import DimensionMismatch, DomainError, NumericError, ShapeMismatch
from . import graph as G

ACTIVATIONS = ("relu", "linear")


@dataclass(eq=False)
class ModelParams:
    """
    Weights of the clustering network f_θ: a stack of dense layers followed by a softmax head.

    ``weights[l]`` has shape (fan_in, fan_out) and ``activations[l]`` is the nonlinearity applied
    after layer ``l``; the last layer is always ``linear`` and feeds the softmax.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: list[str]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def hidden(self) -> list[int]:
        return [w.shape[1] for w in self.weights[:-1]]

    def tensors(self) -> list[np.ndarray]:
        return [t for pair in zip(self.weights, self.biases) for t in pair]

    def with_tensors(self, tensors: Sequence[np.ndarray]) -> ModelParams:
        return ModelParams(
            weights=list(tensors[0::2]),
            biases=list(tensors[1::2]),
            activations=list(self.activations),
        )

    def copy(self) -> ModelParams:
        return self.with_tensors([t.copy() for t in self.tensors()])

    def validate(self) -> None:
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ShapeMismatch(
                "layer count", len(self.weights), (len(self.biases), len(self.activations))
            )
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            if bias.shape != (weight.shape[1],):
                raise ShapeMismatch(f"layer {index} bias", (weight.shape[1],), bias.shape)
            if index > 0 and weight.shape[0] != self.weights[index - 1].shape[1]:
                raise ShapeMismatch(
                    f"layer {index} input", self.weights[index - 1].shape[1], weight.shape[0]
                )
            if not (np.isfinite(weight).all() and np.isfinite(bias).all()):
                raise NumericError(f"layer{index}")
        for activation in self.activations:
            if activation not in ACTIVATIONS:
                raise DomainError(f"Unknown activation {activation!r}")
        if self.activations[-1] != "linear":
            raise DomainError("The output layer must be linear (it feeds the softmax head)")
        if self.output_dim < 2:
            raise DomainError(f"The network needs at least 2 clusters, got {self.output_dim}")

    def to_arrays(self) -> dict[str, np.ndarray]:
        arrays = {}
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            arrays[f"layer{index}.weight"] = weight
            arrays[f"layer{index}.bias"] = bias
        arrays["activations"] = np.array(self.activations)
        return arrays

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray]) -> ModelParams:
        activations = [str(a) for a in arrays["activations"]]
        params = cls(
            weights=[np.asarray(arrays[f"layer{i}.weight"]) for i in range(len(activations))],
            biases=[np.asarray(arrays[f"layer{i}.bias"]) for i in range(len(activations))],
            activations=activations,
        )
        params.validate()
        return params


@dataclass(eq=False)
class GradientSet:
    """Gradients aligned one-to-one with :meth:`ModelParams.tensors`."""

    tensors: list[np.ndarray]

    def is_finite(self) -> bool:
        return all(np.isfinite(t).all() for t in self.tensors)


@dataclass(eq=False)
class ParamNodes:
    params: ModelParams
    leaves: list[G.Node] = attr.ib(factory=list)

    @classmethod
    def record(cls, params: ModelParams) -> ParamNodes:
        leaves = []
        for index, (weight, bias) in enumerate(zip(params.weights, params.biases)):
            leaves.append(G.leaf(weight, f"layer{index}.weight"))
            leaves.append(G.leaf(bias, f"layer{index}.bias"))
        return cls(params=params, leaves=leaves)

    @classmethod
    def freeze(cls, params: ModelParams) -> ParamNodes:
        """Wrap the parameters as constants, for graphs that only differentiate the input."""
        leaves = []
        for weight, bias in zip(params.weights, params.biases):
            leaves.append(G.constant(weight))
            leaves.append(G.constant(bias))
        return cls(params=params, leaves=leaves)

    @property
    def weights(self) -> list[G.Node]:
        return self.leaves[0::2]


def init_params(
    input_dim: int,
    hidden: Sequence[int],
    k: int,
    rng: np.random.Generator | int,
) -> ModelParams:
    """
    Uniform fan-in initialisation: every weight and bias of a layer with fan-in ``m`` is drawn
    from U(-1/√m, 1/√m).
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    if k < 2:
        raise DomainError(f"The network needs at least 2 clusters, got {k}")
    dims = [input_dim, *hidden, k]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    activations = ["relu"] * len(hidden) + ["linear"]
    return ModelParams(weights=weights, biases=biases, activations=activations)


def _check_batch(params: ModelParams, batch: np.ndarray) -> np.ndarray:
    params.validate()
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch[None, :]
    if batch.ndim != 2 or batch.shape[1] != params.input_dim:
        raise DimensionMismatch(params.input_dim, batch.shape[-1] if batch.ndim else 0)
    return batch


def _layers(nodes: ParamNodes, x: G.Node, stop: int) -> G.Node:
    h = x
    activations = nodes.params.activations
    for index in range(stop):
        weight, bias = nodes.leaves[2 * index], nodes.leaves[2 * index + 1]
        h = G.add(G.matmul(h, weight), bias)
        if activations[index] == "relu":
            h = G.relu(h)
    return h


def logits_graph(nodes: ParamNodes, x: G.Node) -> G.Node:
    return _layers(nodes, x, len(nodes.params.weights))


def forward_graph(nodes: ParamNodes, x: G.Node) -> G.Node:
    """Record σ(f_θ(x)) on the graph; the result is an n×K soft assignment node."""
    return G.softmax(logits_graph(nodes, x))


def logits(params: ModelParams, batch: np.ndarray) -> np.ndarray:
    batch = _check_batch(params, batch)
    return logits_graph(ParamNodes.freeze(params), G.constant(batch)).value


def forward(params: ModelParams, batch: np.ndarray) -> np.ndarray:
    """
    Predict the soft assignment Y = σ(f_θ(X)) for a batch.

    Raises:
        DimensionMismatch: if the batch width differs from the network input width.
    """
    batch = _check_batch(params, batch)
    return forward_graph(ParamNodes.freeze(params), G.constant(batch)).value


def embed(params: ModelParams, batch: np.ndarray) -> np.ndarray:
    """Penultimate-layer activations, for external visualisation."""
    batch = _check_batch(params, batch)
    return _layers(ParamNodes.freeze(params), G.constant(batch), len(params.weights) - 1).value


def backward(loss: G.Node, nodes: ParamNodes) -> GradientSet:
    return GradientSet(tensors=G.gradients(loss, nodes.leaves))


def entropy(p: np.ndarray) -> float:
    """Entropy in nats of a probability vector, with 0·ln 0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    if (p < 0).any():
        raise DomainError("Entropy is undefined for negative probabilities")
    return float(np.sum(entr(p)))
