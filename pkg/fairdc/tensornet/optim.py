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

from attr import dataclass
import attr
import numpy as np

from ..errors import ShapeMismatch
from .model import GradientSet, ModelParams


@dataclass(eq=False)
class OptimizerState:
    """Adam moment accumulators, one pair per tensor in :meth:`ModelParams.tensors`."""

    first: list[np.ndarray]
    second: list[np.ndarray]
    step: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def fresh(cls, params: ModelParams, **kwargs) -> OptimizerState:
        tensors = params.tensors()
        return cls(
            first=[np.zeros_like(t) for t in tensors],
            second=[np.zeros_like(t) for t in tensors],
            **kwargs,
        )

    def copy(self) -> OptimizerState:
        return attr.evolve(
            self, first=[m.copy() for m in self.first], second=[v.copy() for v in self.second]
        )


def optimizer_step(
    params: ModelParams, grads: GradientSet, state: OptimizerState
) -> tuple[ModelParams, OptimizerState]:
    """
    Apply one bias-corrected Adam update. Neither input is modified.

    Returns:
        The updated parameters and optimizer state.
    """
    tensors = params.tensors()
    if len(tensors) != len(grads.tensors) or len(tensors) != len(state.first):
        raise ShapeMismatch("tensor count", len(tensors), (len(grads.tensors), len(state.first)))
    step = state.step + 1
    correction1 = 1.0 - state.beta1**step
    correction2 = 1.0 - state.beta2**step
    new_tensors, first, second = [], [], []
    for index, (tensor, grad, m, v) in enumerate(
        zip(tensors, grads.tensors, state.first, state.second)
    ):
        if grad.shape != tensor.shape:
            raise ShapeMismatch(f"gradient #{index}", tensor.shape, grad.shape)
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        denominator = np.sqrt(v / correction2) + state.epsilon
        new_tensors.append(tensor - state.learning_rate * (m / correction1) / denominator)
        first.append(m)
        second.append(v)
    new_state = attr.evolve(state, first=first, second=second, step=step)
    return params.with_tensors(new_tensors), new_state
