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

from typing import TYPE_CHECKING
import math

from attr import dataclass
import attr
import numpy as np

from ..errors import DomainError, ShapeMismatch
from .types import GroupMembership, check_soft_assignment

if TYPE_CHECKING:
    from .quota import QuotaPlan


@dataclass(eq=False)
class FlowNetwork:
    """
    A directed network with integral node supplies and arcs carrying an integral lower bound,
    an integral capacity and a real cost. Positive supply is a source of flow, negative supply a
    demand. Arcs keep insertion order, which fixes how equal-cost optima are broken.
    """

    supply: list[int] = attr.ib(factory=list)
    names: list[str] = attr.ib(factory=list)
    tail: list[int] = attr.ib(factory=list)
    head: list[int] = attr.ib(factory=list)
    lower: list[int] = attr.ib(factory=list)
    capacity: list[int] = attr.ib(factory=list)
    cost: list[float] = attr.ib(factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.supply)

    @property
    def n_arcs(self) -> int:
        return len(self.tail)

    def add_node(self, supply: int = 0, name: str = "") -> int:
        self.supply.append(int(supply))
        self.names.append(name or f"node{len(self.supply) - 1}")
        return len(self.supply) - 1

    def add_arc(
        self, tail: int, head: int, capacity: int, cost: float = 0.0, lower: int = 0
    ) -> int:
        if not (0 <= tail < self.n_nodes and 0 <= head < self.n_nodes):
            raise DomainError(f"Arc endpoints ({tail}, {head}) are not nodes of the network")
        if lower < 0:
            raise DomainError(
                f"Arc {self.names[tail]}->{self.names[head]} has a negative lower bound"
            )
        self.tail.append(tail)
        self.head.append(head)
        self.lower.append(int(lower))
        self.capacity.append(int(capacity))
        self.cost.append(float(cost))
        return len(self.tail) - 1


@dataclass(eq=False)
class FairFlowNetwork(FlowNetwork):
    """
    The fair-assignment network. Node order is instances, then one node per (group, cluster)
    pair, then clusters, then the sink; instance ``i`` owns arcs ``i*K .. i*K+K-1``, one per
    cluster in index order. Instances carry supply 1 directly, so no separate source node is
    needed and the arc count is N·K + K·T + K.
    """

    n: int = 0
    k: int = 0
    t: int = 0

    def pair_node(self, group: int, cluster: int) -> int:
        return self.n + group * self.k + cluster

    def cluster_node(self, cluster: int) -> int:
        return self.n + self.t * self.k + cluster

    @property
    def sink(self) -> int:
        return self.n + self.t * self.k + self.k


def build_network(
    y: np.ndarray, membership: GroupMembership, plan: QuotaPlan
) -> FairFlowNetwork:
    """
    Encode the minimum-change fair assignment as a min-cost flow.

    Each instance sends its unit of supply to the (group, cluster) node of its own group at cost
    ``1 - y[i, j]``; pair nodes feed their cluster within the plan's bounds and every cluster
    forwards exactly its pinned size to the sink. Integral feasible flows and feasible
    assignments correspond one to one, with equal cost.
    """
    y = check_soft_assignment(y)
    n, k = y.shape
    if membership.n != n:
        raise ShapeMismatch("group membership", n, membership.n)
    if plan.lower.shape != (k, membership.t):
        raise ShapeMismatch("quota plan", (k, membership.t), plan.lower.shape)
    t = membership.t
    net = FairFlowNetwork(n=n, k=k, t=t)
    for i in range(n):
        net.add_node(1, f"x{i}")
    for group in range(t):
        for cluster in range(k):
            net.add_node(0, f"{membership.names[group]}/C{cluster}")
    for cluster in range(k):
        net.add_node(0, f"C{cluster}")
    net.add_node(-n, "sink")

    for i, group in enumerate(membership.codes):
        for cluster in range(k):
            net.add_arc(i, net.pair_node(group, cluster), 1, 1.0 - y[i, cluster])
    for group in range(t):
        for cluster in range(k):
            net.add_arc(
                net.pair_node(group, cluster),
                net.cluster_node(cluster),
                int(plan.upper[cluster, group]),
                lower=int(plan.lower[cluster, group]),
            )
    for cluster in range(k):
        size = int(plan.cluster_sizes[cluster])
        net.add_arc(net.cluster_node(cluster), net.sink, size, lower=size)
    return net


def induced_flow(net: FairFlowNetwork, labels: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """The flow a labeling routes through ``net``; feasible iff the labeling meets the plan."""
    labels = np.asarray(labels, dtype=np.int64)
    flow = np.zeros(net.n_arcs, dtype=np.int64)
    flow[np.arange(net.n) * net.k + labels] = 1
    counts = np.zeros((net.t, net.k), dtype=np.int64)
    np.add.at(counts, (np.asarray(codes), labels), 1)
    pair_start = net.n * net.k
    flow[pair_start : pair_start + net.t * net.k] = counts.ravel()
    sink_start = pair_start + net.t * net.k
    flow[sink_start : sink_start + net.k] = counts.sum(axis=0)
    return flow


def extract_labels(net: FairFlowNetwork, flow: np.ndarray) -> np.ndarray:
    instance_flow = np.asarray(flow[: net.n * net.k]).reshape(net.n, net.k)
    if not (instance_flow.sum(axis=1) == 1).all():
        raise DomainError("Flow does not route exactly one unit out of every instance")
    return np.argmax(instance_flow, axis=1)


def flow_cost(net: FlowNetwork, flow: np.ndarray) -> float:
    return math.fsum(c * f for c, f in zip(net.cost, np.asarray(flow).tolist()) if f)
