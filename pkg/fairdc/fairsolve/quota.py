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

from attr import dataclass
import attr
import numpy as np

from mautrix.util.logging import TraceLogger

from ..errors import DomainError, InfeasibleError, ShapeMismatch
from .mcf import solve_min_cost_flow
from .network import FlowNetwork
from .types import GroupMembership, HardAssignment

# Absorbs float error in (ρ ± ε)·|C| before taking ceil/floor.
BOUND_SLACK = 1e-9

log: TraceLogger = logging.getLogger("fairdc.solver")


@dataclass(frozen=True, eq=False)
class QuotaPlan:
    """
    Per-cluster, per-group bounds on how many members of each group a cluster may hold.

    ``lower`` and ``upper`` are K×T: row ``j`` is cluster ``j``, column ``t`` is group ``t``.
    ``relax`` is ``None`` for an exact plan, in which case ``lower == upper``.
    """

    cluster_sizes: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    relax: float | None = None
    targets: np.ndarray | None = attr.ib(default=None)

    @property
    def exact(self) -> bool:
        return self.relax is None

    @property
    def mode(self) -> str:
        return "exact" if self.exact else f"relaxed({self.relax:g})"

    @property
    def k(self) -> int:
        return self.lower.shape[0]

    @property
    def t(self) -> int:
        return self.lower.shape[1]

    def check_feasible(self, group_sizes: np.ndarray) -> None:
        """
        Check the aggregate conditions for an integral point to exist: every cell interval is
        non-empty, every cluster size lies between its column-bound sums and every group size
        between its row-bound sums. Because the bound system is a transportation polytope these
        are also sufficient.

        Raises:
            InfeasibleError: naming the first violated aggregate.
        """
        for j in range(self.k):
            for t in range(self.t):
                if self.lower[j, t] > self.upper[j, t]:
                    raise InfeasibleError(
                        "cell",
                        j * self.t + t,
                        required=int(self.lower[j, t]),
                        available=int(self.upper[j, t]),
                        context=f"cluster {j}, group {t}",
                    )
        for j, size in enumerate(self.cluster_sizes):
            low, high = int(self.lower[j].sum()), int(self.upper[j].sum())
            if not low <= size <= high:
                raise InfeasibleError(
                    "cluster", j, required=int(size), available=f"[{low}, {high}]"
                )
        for t, size in enumerate(group_sizes):
            low, high = int(self.lower[:, t].sum()), int(self.upper[:, t].sum())
            if not low <= size <= high:
                raise InfeasibleError(
                    "group", t, required=int(size), available=f"[{low}, {high}]"
                )


def _rounding_network(
    sizes: np.ndarray, groups: np.ndarray
) -> tuple[FlowNetwork, np.ndarray]:
    """
    Controlled rounding of the targets |C_j|·|G_t|/N as a transportation problem. Each cell
    gets its floor as a lower bound and may take one extra unit at cost 1 - 2·frac, which is
    what that unit changes in Σ|q - target|. Integral targets are pinned.
    """
    n = int(groups.sum())
    numerators = np.outer(sizes, groups)
    floors = numerators // n
    net = FlowNetwork()
    for j, size in enumerate(sizes):
        net.add_node(int(size), f"C{j}")
    for t, size in enumerate(groups):
        net.add_node(-int(size), f"G{t}")
    k = len(sizes)
    for j in range(k):
        for t in range(len(groups)):
            remainder = int(numerators[j, t] % n)
            extra = 1 if remainder else 0
            net.add_arc(
                j,
                k + t,
                int(floors[j, t]) + extra,
                cost=1.0 - 2.0 * remainder / n,
                lower=int(floors[j, t]),
            )
    return net, floors


def controlled_round(cluster_sizes: Sequence[int], group_sizes: Sequence[int]) -> np.ndarray:
    """
    Round the proportional targets |C_j|·|G_t|/N to integers whose rows sum to the cluster
    sizes and whose columns sum to the group sizes, minimising the total absolute deviation.
    Every cell ends at the floor or ceiling of its target.
    """
    sizes = np.asarray(cluster_sizes, dtype=np.int64)
    groups = np.asarray(group_sizes, dtype=np.int64)
    if sizes.sum() != groups.sum():
        raise DomainError(
            f"Cluster sizes sum to {int(sizes.sum())} but group sizes sum to {int(groups.sum())}"
        )
    if sizes.sum() == 0:
        return np.zeros((sizes.size, groups.size), dtype=np.int64)
    net, _ = _rounding_network(sizes, groups)
    solution = solve_min_cost_flow(net)
    return solution.flow.reshape(sizes.size, groups.size)


def _check_proportions(proportions: Sequence[float], t: int) -> np.ndarray:
    rho = np.asarray(proportions, dtype=np.float64)
    if rho.shape != (t,):
        raise ShapeMismatch("target proportions", (t,), rho.shape)
    if (rho < 0).any() or not math.isclose(math.fsum(rho), 1.0, abs_tol=1e-9):
        raise DomainError("Target proportions must be non-negative and sum to 1")
    return rho


def plan_quotas(
    cluster_sizes: Sequence[int],
    membership: GroupMembership,
    relax: float | None = None,
    proportions: Sequence[float] | None = None,
) -> QuotaPlan:
    """
    Derive per-cluster group quotas for fixed cluster sizes.

    Without ``relax`` the plan is exact: each cluster receives the controlled rounding of its
    proportional share of every group. With ``relax = ε`` every cell may hold between
    ``max(0, ⌈(ρ_t - ε)|C_j|⌉)`` and ``min(|C_j|, ⌊(ρ_t + ε)|C_j|⌋)`` members, where ρ is the
    population proportion or the user-supplied ``proportions``.

    Raises:
        InfeasibleError: if the relaxed bounds leave no integral assignment.
    """
    sizes = np.asarray(cluster_sizes, dtype=np.int64)
    if sizes.ndim != 1 or (sizes < 0).any():
        raise DomainError("Cluster sizes must be a vector of non-negative integers")
    groups = membership.group_sizes
    if sizes.sum() != membership.n:
        raise DomainError(f"Cluster sizes sum to {int(sizes.sum())}, expected {membership.n}")
    if relax is None:
        if proportions is not None:
            raise DomainError("Custom target proportions are only supported with a relaxation")
        quotas = controlled_round(sizes, groups)
        plan = QuotaPlan(
            cluster_sizes=sizes,
            lower=quotas,
            upper=quotas.copy(),
            targets=np.outer(sizes, groups) / membership.n,
        )
    else:
        if not 0 <= relax < 1:
            raise DomainError(f"Relaxation must lie in [0, 1), got {relax}")
        rho = (
            membership.proportions
            if proportions is None
            else _check_proportions(proportions, membership.t)
        )
        column = sizes[:, None].astype(np.float64)
        lower = np.ceil((rho[None, :] - relax) * column - BOUND_SLACK).astype(np.int64)
        upper = np.floor((rho[None, :] + relax) * column + BOUND_SLACK).astype(np.int64)
        plan = QuotaPlan(
            cluster_sizes=sizes,
            lower=np.maximum(lower, 0),
            upper=np.minimum(upper, sizes[:, None]),
            relax=float(relax),
            targets=rho[None, :] * column,
        )
    plan.check_feasible(groups)
    log.debug("Planned %s quotas for cluster sizes %s", plan.mode, sizes.tolist())
    return plan


def check_plan(assign: HardAssignment, membership: GroupMembership, plan: QuotaPlan) -> None:
    """
    Raises:
        InfeasibleError: naming the first cluster size or (cluster, group) count that the
            assignment violates.
    """
    if len(assign) != membership.n:
        raise ShapeMismatch("assignment", membership.n, len(assign))
    sizes = assign.cluster_sizes
    for j in range(plan.k):
        if sizes[j] != plan.cluster_sizes[j]:
            raise InfeasibleError(
                "cluster", j, required=int(plan.cluster_sizes[j]), available=int(sizes[j])
            )
    counts = np.zeros((plan.k, plan.t), dtype=np.int64)
    np.add.at(counts, (assign.labels, membership.codes), 1)
    for j in range(plan.k):
        for t in range(plan.t):
            if not plan.lower[j, t] <= counts[j, t] <= plan.upper[j, t]:
                raise InfeasibleError(
                    "cell",
                    j * plan.t + t,
                    required=int(counts[j, t]),
                    available=f"[{plan.lower[j, t]}, {plan.upper[j, t]}]",
                    context=f"cluster {j}, group {membership.names[t]}",
                )
