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

from typing import Hashable, Iterable, Sequence

from attr import dataclass
import attr
import numpy as np

from ..errors import DomainError, ShapeMismatch


def _int_array(value: Iterable[int]) -> np.ndarray:
    array = np.asarray(value, dtype=np.int64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GroupMembership:
    """
    Protected-group membership of N instances over T groups.

    Stored as one group code per instance; :attr:`matrix` materialises the one-hot N×T
    indicator M.
    """

    codes: np.ndarray = attr.ib(converter=_int_array)
    names: tuple[str, ...] = attr.ib(converter=tuple)

    def __attrs_post_init__(self) -> None:
        if self.codes.ndim != 1:
            raise ShapeMismatch("group codes", "a vector", self.codes.shape)
        if len(self.names) < 1:
            raise DomainError("Group membership needs at least one group")
        if self.codes.size and (self.codes.min() < 0 or self.codes.max() >= len(self.names)):
            raise DomainError(f"Group codes must lie in [0, {len(self.names)})")

    @classmethod
    def from_codes(
        cls, codes: Sequence[int], n_groups: int | None = None, names: Sequence[str] | None = None
    ) -> GroupMembership:
        codes = np.asarray(codes, dtype=np.int64)
        if names is None:
            if n_groups is None:
                n_groups = int(codes.max()) + 1 if codes.size else 1
            names = [str(i) for i in range(n_groups)]
        return cls(codes=codes, names=names)

    @classmethod
    def from_values(cls, values: Iterable[Hashable]) -> GroupMembership:
        """Index groups by first appearance of each distinct value."""
        index: dict[Hashable, int] = {}
        codes = [index.setdefault(value, len(index)) for value in values]
        return cls(codes=codes, names=[str(value) for value in index])

    @classmethod
    def from_matrix(
        cls, matrix: np.ndarray, names: Sequence[str] | None = None
    ) -> GroupMembership:
        matrix = np.asarray(matrix)
        if matrix.ndim != 2:
            raise ShapeMismatch("membership matrix", "an N×T matrix", matrix.shape)
        if not np.isin(matrix, (0, 1)).all() or not (matrix.sum(axis=1) == 1).all():
            raise DomainError("Every membership row must contain exactly one 1")
        if names is None:
            names = [str(i) for i in range(matrix.shape[1])]
        return cls(codes=np.argmax(matrix, axis=1), names=names)

    @property
    def n(self) -> int:
        return self.codes.size

    @property
    def t(self) -> int:
        return len(self.names)

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(self.t, dtype=np.int64)[self.codes]

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=self.t)

    @property
    def proportions(self) -> np.ndarray:
        return self.group_sizes / self.n

    def subset(self, indices: np.ndarray) -> GroupMembership:
        return GroupMembership(codes=self.codes[indices], names=self.names)


@dataclass(frozen=True, eq=False)
class HardAssignment:
    """One cluster index in [0, K) per instance."""

    labels: np.ndarray = attr.ib(converter=_int_array)
    k: int

    def __attrs_post_init__(self) -> None:
        if self.labels.ndim != 1:
            raise ShapeMismatch("labels", "a vector", self.labels.shape)
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise DomainError(f"Cluster labels must lie in [0, {self.k})")

    def __len__(self) -> int:
        return self.labels.size

    @property
    def one_hot(self) -> np.ndarray:
        return np.eye(self.k, dtype=np.int64)[self.labels]

    @property
    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def subset(self, indices: np.ndarray) -> HardAssignment:
        return HardAssignment(labels=self.labels[indices], k=self.k)


def check_soft_assignment(y: np.ndarray, tolerance: float = 1e-6) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2:
        raise ShapeMismatch("soft assignment", "an N×K matrix", y.shape)
    if not np.isfinite(y).all() or (y < 0).any():
        raise DomainError("Soft assignments must be finite and non-negative")
    if not np.allclose(y.sum(axis=1), 1.0, atol=tolerance):
        raise DomainError("Every soft assignment row must sum to 1")
    return y


def round_assignment(y: np.ndarray) -> HardAssignment:
    """Per-row argmax; ties go to the lowest cluster index."""
    y = check_soft_assignment(y)
    return HardAssignment(labels=np.argmax(y, axis=1), k=y.shape[1])
