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
import logging
import math
import time

from attr import dataclass
import numpy as np

from mautrix.util.logging import TraceLogger

from ..errors import InfeasibleError, ShapeMismatch
from .mcf import solve_min_cost_flow
from .network import build_network, extract_labels
from .quota import QuotaPlan, check_plan, plan_quotas
from .types import GroupMembership, HardAssignment, check_soft_assignment, round_assignment

log: TraceLogger = logging.getLogger("fairdc.solver")


@dataclass(eq=False)
class FairAssignmentResult:
    assignment: HardAssignment
    objective: float
    plan: QuotaPlan
    augmentations: int
    elapsed: float

    @property
    def labels(self) -> np.ndarray:
        return self.assignment.labels


def assignment_objective(y: np.ndarray, assign: HardAssignment | np.ndarray) -> float:
    """Σᵢ (1 - y[i, ŷᵢ]), summed exactly so that equal optima compare equal."""
    y = np.asarray(y, dtype=np.float64)
    labels = np.asarray(getattr(assign, "labels", assign), dtype=np.int64)
    if labels.shape != (y.shape[0],):
        raise ShapeMismatch("labels", (y.shape[0],), labels.shape)
    return math.fsum((1.0 - y[np.arange(labels.size), labels]).tolist())


def fair_assignment(
    y: np.ndarray,
    membership: GroupMembership,
    relax: float | None = None,
    proportions: Sequence[float] | None = None,
    sizes: Sequence[int] | None = None,
) -> FairAssignmentResult:
    """
    Find the fair hard assignment closest to ``y``.

    Cluster sizes are pinned to ``sizes`` when given and to those of the rounded ``y``
    otherwise. Among all assignments with those sizes that meet the quota plan (exact, or
    ε-relaxed when ``relax`` is given), the returned one minimises Σᵢ (1 - y[i, ŷᵢ]).

    Raises:
        InfeasibleError: if the relaxed quota bounds admit no assignment.
    """
    start = time.perf_counter()
    y = check_soft_assignment(y)
    if membership.n != y.shape[0]:
        raise ShapeMismatch("group membership", y.shape[0], membership.n)
    if sizes is None:
        sizes = round_assignment(y).cluster_sizes
    elif len(sizes) != y.shape[1]:
        raise ShapeMismatch("cluster sizes", y.shape[1], len(sizes))
    plan = plan_quotas(sizes, membership, relax, proportions)
    net = build_network(y, membership, plan)
    solution = solve_min_cost_flow(net)
    assignment = HardAssignment(labels=extract_labels(net, solution.flow), k=y.shape[1])
    check_plan(assignment, membership, plan)
    elapsed = time.perf_counter() - start
    objective = assignment_objective(y, assignment)
    log.debug(
        "Solved %s fair assignment for N=%d K=%d T=%d: objective %.6f, %d augmentations in %.3fs",
        plan.mode,
        membership.n,
        y.shape[1],
        membership.t,
        objective,
        solution.augmentations,
        elapsed,
    )
    return FairAssignmentResult(
        assignment=assignment,
        objective=objective,
        plan=plan,
        augmentations=solution.augmentations,
        elapsed=elapsed,
    )


def solve_fair_assignment(
    y: np.ndarray,
    membership: GroupMembership,
    relax: float | None = None,
    proportions: Sequence[float] | None = None,
    sizes: Sequence[int] | None = None,
) -> HardAssignment:
    try:
        return fair_assignment(y, membership, relax, proportions, sizes).assignment
    except InfeasibleError as e:
        raise e.with_context("fair assignment") from e
