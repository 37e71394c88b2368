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

import math

import numpy as np

from ..errors import InfeasibleError, ShapeMismatch, TooLargeForEnumeration
from .quota import QuotaPlan
from .types import GroupMembership, HardAssignment, check_soft_assignment

ENUMERATION_CAP = 12


def brute_force_assign(
    y: np.ndarray, membership: GroupMembership, plan: QuotaPlan, cap: int = ENUMERATION_CAP
) -> HardAssignment:
    """
    Exhaustively search every labeling that meets ``plan`` and return one minimising
    Σᵢ (1 - y[i, ŷᵢ]). Labelings are visited in lexicographic order and only a strictly better
    cost replaces the incumbent.

    Raises:
        TooLargeForEnumeration: if there are more than ``cap`` instances.
        InfeasibleError: if no labeling meets the plan.
    """
    y = check_soft_assignment(y)
    n, k = y.shape
    if n > cap:
        raise TooLargeForEnumeration(n, cap)
    if membership.n != n:
        raise ShapeMismatch("group membership", n, membership.n)
    codes = membership.codes.tolist()
    sizes = plan.cluster_sizes.tolist()
    lower, upper = plan.lower.tolist(), plan.upper.tolist()
    # Members of each group still unplaced from instance i onwards.
    remaining = np.zeros((n + 1, membership.t), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        remaining[i] = remaining[i + 1]
        remaining[i, codes[i]] += 1
    remaining = remaining.tolist()

    counts = [[0] * membership.t for _ in range(k)]
    fill = [0] * k
    labels = [0] * n
    best: list[int] | None = None
    best_cost = math.inf

    def feasible_completion(i: int) -> bool:
        for t in range(membership.t):
            need = sum(max(lower[j][t] - counts[j][t], 0) for j in range(k))
            if need > remaining[i][t]:
                return False
        return True

    def search(i: int, cost: float) -> None:
        nonlocal best, best_cost
        if cost > best_cost + 1e-12:
            return
        if i == n:
            if fill != sizes or any(
                counts[j][t] < lower[j][t] for j in range(k) for t in range(membership.t)
            ):
                return
            exact = math.fsum(1.0 - y[index, label] for index, label in enumerate(labels))
            if exact < best_cost:
                best, best_cost = list(labels), exact
            return
        if not feasible_completion(i):
            return
        group = codes[i]
        for j in range(k):
            if fill[j] >= sizes[j] or counts[j][group] >= upper[j][group]:
                continue
            labels[i] = j
            fill[j] += 1
            counts[j][group] += 1
            search(i + 1, cost + (1.0 - y[i, j]))
            fill[j] -= 1
            counts[j][group] -= 1

    search(0, 0.0)
    if best is None:
        raise InfeasibleError("plan", context="no labeling satisfies the quota plan")
    return HardAssignment(labels=best, k=k)
