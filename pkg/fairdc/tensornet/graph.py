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

from typing import Callable, Sequence

from scipy.special import logsumexp
import numpy as np

from ..errors import NumericError

LOG_FLOOR = 1e-12

GradFn = Callable[[np.ndarray], np.ndarray]


class Node:
    """
    A value in a recorded computation, together with the closures that map the gradient of the
    final scalar with respect to this node onto each of its parents.

    Leaves are created with :func:`leaf` (differentiable) or :func:`constant`. Every operation
    below returns a new node; nothing is mutated after construction, so a graph can be walked
    backwards any number of times.
    """

    __slots__ = ("value", "parents", "grad_fns", "name", "requires_grad")

    value: np.ndarray
    parents: tuple[Node, ...]
    grad_fns: tuple[GradFn, ...]
    name: str
    requires_grad: bool

    def __init__(
        self,
        value: np.ndarray,
        name: str,
        parents: tuple[Node, ...] = (),
        grad_fns: tuple[GradFn, ...] = (),
        requires_grad: bool = False,
    ) -> None:
        self.value = value
        self.name = name
        self.parents = parents
        self.grad_fns = grad_fns
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def item(self) -> float:
        return float(self.value)

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return f"Node({self.name}, shape={self.shape})"


def leaf(value: np.ndarray | float, name: str = "leaf") -> Node:
    return Node(np.asarray(value, dtype=np.float64), name, requires_grad=True)


def constant(value: np.ndarray | float, name: str = "const") -> Node:
    return Node(np.asarray(value, dtype=np.float64), name)


def as_node(value: Node | np.ndarray | float, name: str = "const") -> Node:
    return value if isinstance(value, Node) else constant(value, name)


def detach(node: Node) -> Node:
    return constant(node.value, f"stop_gradient({node.name})")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _op(
    value: np.ndarray, name: str, parents: Sequence[Node], grad_fns: Sequence[GradFn]
) -> Node:
    return Node(value, name, tuple(parents), tuple(grad_fns))


def add(a: Node, b: Node) -> Node:
    return _op(
        a.value + b.value,
        "add",
        (a, b),
        (lambda g: _unbroadcast(g, a.shape), lambda g: _unbroadcast(g, b.shape)),
    )


def sub(a: Node, b: Node) -> Node:
    return _op(
        a.value - b.value,
        "sub",
        (a, b),
        (lambda g: _unbroadcast(g, a.shape), lambda g: -_unbroadcast(g, b.shape)),
    )


def mul(a: Node, b: Node) -> Node:
    return _op(
        a.value * b.value,
        "mul",
        (a, b),
        (
            lambda g: _unbroadcast(g * b.value, a.shape),
            lambda g: _unbroadcast(g * a.value, b.shape),
        ),
    )


def scale(a: Node, factor: float) -> Node:
    return _op(a.value * factor, "scale", (a,), (lambda g: g * factor,))


def matmul(a: Node, b: Node) -> Node:
    return _op(
        a.value @ b.value,
        "matmul",
        (a, b),
        (lambda g: g @ b.value.T, lambda g: a.value.T @ g),
    )


def relu(a: Node) -> Node:
    mask = a.value > 0
    return _op(np.where(mask, a.value, 0.0), "relu", (a,), (lambda g: g * mask,))


def softmax(a: Node) -> Node:
    """Row-wise softmax of a matrix of logits."""
    s = np.exp(a.value - logsumexp(a.value, axis=-1, keepdims=True))

    def grad(g: np.ndarray) -> np.ndarray:
        return s * (g - np.sum(g * s, axis=-1, keepdims=True))

    return _op(s, "softmax", (a,), (grad,))


def log(a: Node, floor: float = LOG_FLOOR) -> Node:
    """Natural log with the argument clamped to ``floor``; no gradient flows through the clamp."""
    clamped = np.maximum(a.value, floor)
    live = a.value > floor
    return _op(np.log(clamped), "log", (a,), (lambda g: np.where(live, g / clamped, 0.0),))


def reduce_sum(a: Node, axis: int | None = None) -> Node:
    shape = a.shape

    def grad(g: np.ndarray) -> np.ndarray:
        if axis is not None:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, shape).copy()

    return _op(np.sum(a.value, axis=axis), "sum", (a,), (grad,))


def mean(a: Node, axis: int | None = None) -> Node:
    count = a.value.size if axis is None else a.shape[axis]
    return scale(reduce_sum(a, axis=axis), 1.0 / count)


def sum_squares(a: Node) -> Node:
    return _op(np.sum(a.value * a.value), "sum_squares", (a,), (lambda g: 2.0 * g * a.value,))


def pick(a: Node, columns: np.ndarray) -> Node:
    """Select ``a[i, columns[i]]`` for every row ``i``."""
    rows = np.arange(a.shape[0])

    def grad(g: np.ndarray) -> np.ndarray:
        out = np.zeros_like(a.value)
        out[rows, columns] = g
        return out

    return _op(a.value[rows, columns], "pick", (a,), (grad,))


def _topological_order(root: Node) -> list[Node]:
    order: list[Node] = []
    visited: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited or not node.requires_grad:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in reversed(node.parents):
            stack.append((parent, False))
    return order


def gradients(root: Node, wrt: Sequence[Node]) -> list[np.ndarray]:
    """
    Reverse-mode differentiation of a scalar node.

    Args:
        root: The scalar to differentiate.
        wrt: The leaves to return gradients for. Leaves the root does not depend on get zeros.

    Returns:
        One gradient array per entry in ``wrt``, shaped like the leaf.

    Raises:
        NumericError: if any value or gradient on the way is not finite.
    """
    if root.value.size != 1:
        raise ValueError(f"gradients() needs a scalar root, got shape {root.shape}")
    if not np.isfinite(root.value).all():
        raise NumericError(root.name, "non-finite loss")
    grads: dict[int, np.ndarray] = {id(root): np.ones_like(root.value)}
    for node in reversed(_topological_order(root)):
        grad = grads.get(id(node))
        if grad is None:
            continue
        if not np.isfinite(grad).all():
            raise NumericError(node.name, "non-finite gradient")
        for parent, grad_fn in zip(node.parents, node.grad_fns):
            if not parent.requires_grad:
                continue
            if not np.isfinite(parent.value).all():
                raise NumericError(parent.name)
            contribution = grad_fn(grad)
            existing = grads.get(id(parent))
            grads[id(parent)] = contribution if existing is None else existing + contribution
    return [grads.get(id(node), np.zeros_like(node.value)) for node in wrt]
