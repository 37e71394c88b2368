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

from typing import Literal

from attr import dataclass
from sklearn.metrics import normalized_mutual_info_score
import numpy as np

from .errors import ShapeMismatch
from .fairsolve import FlowNetwork, GroupMembership, HardAssignment, solve_min_cost_flow
from .types import MetricsReport

Averaging = Literal["arithmetic", "geometric"]


@dataclass(frozen=True, eq=False)
class GroupComposition:
    """How many members of each protected group every cluster holds (K×T)."""

    counts: np.ndarray

    @property
    def cluster_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def group_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def proportions(self) -> np.ndarray:
        """In-cluster group proportions; rows of empty clusters are all zero."""
        sizes = self.cluster_sizes[:, None]
        return np.divide(self.counts, sizes, out=np.zeros(self.counts.shape), where=sizes > 0)


def _labels(assign: HardAssignment | np.ndarray) -> np.ndarray:
    return np.asarray(getattr(assign, "labels", assign), dtype=np.int64)


def composition(
    assign: HardAssignment | np.ndarray, membership: GroupMembership, k: int | None = None
) -> GroupComposition:
    labels = _labels(assign)
    if labels.shape != (membership.n,):
        raise ShapeMismatch("assignment", membership.n, labels.shape)
    if k is None:
        k = getattr(assign, "k", None) or (int(labels.max()) + 1 if labels.size else 1)
    counts = np.zeros((k, membership.t), dtype=np.int64)
    np.add.at(counts, (labels, membership.codes), 1)
    return GroupComposition(counts=counts)


def balance(
    assign: HardAssignment | np.ndarray, membership: GroupMembership
) -> tuple[float, np.ndarray]:
    """
    Per-cluster balance, the smallest group count over the largest, and its minimum over all
    clusters. A cluster that is empty or misses a group scores 0.
    """
    counts = composition(assign, membership).counts
    largest = counts.max(axis=1)
    per_cluster = np.divide(
        counts.min(axis=1), largest, out=np.zeros(counts.shape[0]), where=largest > 0
    )
    return float(per_cluster.min()), per_cluster


def fairness(
    assign: HardAssignment | np.ndarray, membership: GroupMembership
) -> tuple[float, np.ndarray]:
    """
    Per-cluster fairness, min over groups of min(ρ_t/ρ_t(k), ρ_t(k)/ρ_t), and its minimum over
    all clusters. Population proportions come from ``membership``.
    """
    comp = composition(assign, membership)
    rho = membership.proportions[None, :]
    inner = comp.proportions
    ratio = np.divide(
        np.minimum(inner, rho), np.maximum(inner, rho), out=np.zeros(inner.shape), where=inner > 0
    )
    per_cluster = ratio.min(axis=1)
    return float(per_cluster.min()), per_cluster


def optimal_balance(membership: GroupMembership) -> float:
    """|G_min| / |G_max|, the best overall balance any partition can reach."""
    sizes = membership.group_sizes
    return float(sizes.min() / sizes.max()) if sizes.max() else 0.0


def contingency(
    assign: HardAssignment | np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    clusters = _labels(assign)
    labels = np.asarray(labels)
    if clusters.shape != labels.shape:
        raise ShapeMismatch("ground-truth labels", clusters.shape, labels.shape)
    cluster_ids, rows = np.unique(clusters, return_inverse=True)
    class_ids, cols = np.unique(labels, return_inverse=True)
    table = np.zeros((cluster_ids.size, class_ids.size), dtype=np.int64)
    np.add.at(table, (rows, cols), 1)
    return table, cluster_ids, class_ids


def best_matching(table: np.ndarray) -> tuple[int, np.ndarray]:
    """
    Match rows to columns one to one so that the matched mass is maximal.

    Solved as a min-cost flow of min(rows, columns) units through one unit-capacity arc per
    cell, costing ``max(table) - table[r, c]``.

    Returns:
        The matched mass and, per row, the matched column (``-1`` for unmatched rows).
    """
    table = np.asarray(table, dtype=np.int64)
    n_rows, n_cols = table.shape
    chosen = np.full(n_rows, -1, dtype=np.int64)
    units = min(n_rows, n_cols)
    if units == 0:
        return 0, chosen
    top = int(table.max())
    net = FlowNetwork()
    source = net.add_node(units, "source")
    rows = [net.add_node(name=f"cluster{r}") for r in range(n_rows)]
    cols = [net.add_node(name=f"class{c}") for c in range(n_cols)]
    sink = net.add_node(-units, "sink")
    for row in rows:
        net.add_arc(source, row, 1)
    cells = {}
    for r, row in enumerate(rows):
        for c, col in enumerate(cols):
            cells[net.add_arc(row, col, 1, top - int(table[r, c]))] = (r, c)
    for col in cols:
        net.add_arc(col, sink, 1)
    flow = solve_min_cost_flow(net).flow
    for arc, (r, c) in cells.items():
        if flow[arc]:
            chosen[r] = c
    matched = np.flatnonzero(chosen >= 0)
    return int(table[matched, chosen[matched]].sum()), chosen


def accuracy(assign: HardAssignment | np.ndarray, labels: np.ndarray) -> float:
    """Share of instances whose cluster maps to their class under the best one-to-one mapping."""
    table, _, _ = contingency(assign, labels)
    if table.sum() == 0:
        return 0.0
    matched, _ = best_matching(table)
    return matched / int(table.sum())


def nmi(
    assign: HardAssignment | np.ndarray, labels: np.ndarray, average: Averaging = "arithmetic"
) -> float:
    clusters = _labels(assign)
    labels = np.asarray(labels)
    if clusters.shape != labels.shape:
        raise ShapeMismatch("ground-truth labels", clusters.shape, labels.shape)
    return float(normalized_mutual_info_score(labels, clusters, average_method=average))


def evaluate(
    assign: HardAssignment | np.ndarray,
    membership: GroupMembership,
    labels: np.ndarray | None = None,
    epoch: int | None = None,
    average: Averaging = "arithmetic",
) -> MetricsReport:
    overall_balance, cluster_balance = balance(assign, membership)
    overall_fairness, cluster_fairness = fairness(assign, membership)
    report = MetricsReport(
        balance=overall_balance,
        fairness=overall_fairness,
        cluster_balance=[float(v) for v in cluster_balance],
        cluster_fairness=[float(v) for v in cluster_fairness],
        epoch=epoch,
        optimal_balance=optimal_balance(membership),
    )
    if labels is not None:
        report.accuracy = accuracy(assign, labels)
        report.nmi = nmi(assign, labels, average)
    return report
