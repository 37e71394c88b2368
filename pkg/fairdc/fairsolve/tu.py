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

from itertools import combinations, product

import numpy as np

from ..errors import DomainError, TooLargeForEnumeration
from .types import GroupMembership

BICOLORING_ROW_CAP = 12


def constraint_matrix(membership: GroupMembership, k: int) -> np.ndarray:
    """
    The (T+1)×(N+K) constraint matrix of the fair-assignment program: column ``i < N`` carries
    instance ``i``'s group indicator in the first T rows, and column ``N + j`` carries a single
    1 in the cluster-size row T.
    """
    n, t = membership.n, membership.t
    matrix = np.zeros((t + 1, n + k), dtype=np.int64)
    matrix[membership.codes, np.arange(n)] = 1
    matrix[t, n:] = 1
    return matrix


def _check_entries(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise DomainError("Expected a two-dimensional matrix")
    if not np.isin(matrix, (-1, 0, 1)).all():
        raise DomainError("Matrix entries must lie in {-1, 0, 1}")
    return matrix.astype(np.int64)


def verify_tu(matrix: np.ndarray, max_order: int = 4) -> bool:
    """
    Check total unimodularity up to ``max_order``: every square submatrix of that order or
    smaller must have determinant -1, 0 or 1.
    """
    matrix = _check_entries(matrix)
    rows, cols = matrix.shape
    for order in range(1, min(max_order, rows, cols) + 1):
        column_sets = np.array(list(combinations(range(cols), order)))
        for row_set in combinations(range(rows), order):
            # All column choices for this row choice at once: (choices, order, order).
            blocks = matrix[np.array(row_set)][:, column_sets].transpose(1, 0, 2)
            determinants = np.rint(np.linalg.det(blocks.astype(np.float64)))
            if (np.abs(determinants) > 1).any():
                return False
    return True


def has_equitable_bicoloring(matrix: np.ndarray) -> bool:
    """
    Row-split test for total unimodularity: every subset of rows can be split into two parts
    whose column sums differ by -1, 0 or 1 in every column.
    """
    matrix = _check_entries(matrix)
    rows = matrix.shape[0]
    if rows > BICOLORING_ROW_CAP:
        raise TooLargeForEnumeration(rows, BICOLORING_ROW_CAP)
    for size in range(1, rows + 1):
        for subset in combinations(range(rows), size):
            block = matrix[list(subset)]
            # The first row always goes to the +1 side; splits are symmetric.
            if not any(
                (np.abs(np.array((1, *signs)) @ block) <= 1).all()
                for signs in product((1, -1), repeat=size - 1)
            ):
                return False
    return True
