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

from typing import Any

from attr import dataclass
import attr
import numpy as np

from ..errors import DomainError, ShapeMismatch
from ..fairsolve import GroupMembership


def _features(value: Any) -> np.ndarray:
    features = np.array(value, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeMismatch("features", "an N×D matrix", features.shape)
    bad = np.argwhere(~np.isfinite(features))
    if bad.size:
        row, col = bad[0]
        raise DomainError(f"Non-finite feature at row {row}, column {col}")
    features.setflags(write=False)
    return features


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Features with optional protected-group membership and ground-truth labels. Immutable once
    built; ``provenance`` records where the rows came from.
    """

    features: np.ndarray = attr.ib(converter=_features)
    membership: GroupMembership | None = None
    labels: np.ndarray | None = None
    name: str = ""
    provenance: dict[str, Any] = attr.ib(factory=dict)

    def __attrs_post_init__(self) -> None:
        if self.membership is not None and self.membership.n != self.n:
            raise ShapeMismatch("group membership", self.n, self.membership.n)
        if self.labels is not None and np.shape(self.labels) != (self.n,):
            raise ShapeMismatch("labels", (self.n,), np.shape(self.labels))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray, name: str | None = None) -> Dataset:
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[indices],
            membership=self.membership.subset(indices) if self.membership is not None else None,
            labels=self.labels[indices] if self.labels is not None else None,
            name=name or self.name,
            provenance={**self.provenance, "rows": int(indices.size)},
        )

    def with_features(self, features: np.ndarray, **provenance: Any) -> Dataset:
        return attr.evolve(self, features=features, provenance={**self.provenance, **provenance})

    def without_membership(self) -> Dataset:
        """The same rows with the protected attribute dropped, as seen at prediction time."""
        return attr.evolve(self, membership=None)
