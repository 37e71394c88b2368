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

import heapq
import logging
import math

from attr import dataclass
import numpy as np

from mautrix.util.logging import TraceLogger

from ..errors import DomainError, InfeasibleError
from .network import FlowNetwork, flow_cost

TOLERANCE = 1e-12

log: TraceLogger = logging.getLogger("fairdc.solver")


@dataclass(eq=False)
class Flow:
    flow: np.ndarray
    cost: float
    augmentations: int = 0


class _Residual:
    """
    Residual graph of a network after the lower-bound transformation. Arc ``a`` of the network
    becomes residual arcs ``2a`` (forward) and ``2a + 1`` (backward).
    """

    def __init__(self, net: FlowNetwork) -> None:
        n = net.n_nodes
        self.head: list[int] = []
        self.residual: list[int] = []
        self.cost: list[float] = []
        self.adjacent: list[list[int]] = [[] for _ in range(n)]
        self.excess = list(net.supply)
        for a in range(net.n_arcs):
            tail, head, lower, cap = net.tail[a], net.head[a], net.lower[a], net.capacity[a]
            if cap < lower:
                raise InfeasibleError(
                    "arc", a, required=lower, available=cap, context=net.names[tail]
                )
            self.excess[tail] -= lower
            self.excess[head] += lower
            self.head += [head, tail]
            self.residual += [cap - lower, 0]
            self.cost += [net.cost[a], -net.cost[a]]
            self.adjacent[tail].append(2 * a)
            self.adjacent[head].append(2 * a + 1)

    def push(self, arc: int, amount: int) -> None:
        self.residual[arc] -= amount
        self.residual[arc ^ 1] += amount


def _initial_potentials(res: _Residual, n: int) -> list[float]:
    """
    Bellman-Ford from a virtual root joined to every node at cost 0. Only needed when some
    residual arc has negative cost; otherwise zero potentials are already valid.
    """
    potential = [0.0] * n
    if all(c >= 0 or r == 0 for c, r in zip(res.cost, res.residual)):
        return potential
    for _ in range(n):
        changed = False
        for u in range(n):
            pu = potential[u]
            for arc in res.adjacent[u]:
                if res.residual[arc] > 0:
                    candidate = pu + res.cost[arc]
                    v = res.head[arc]
                    if candidate < potential[v] - TOLERANCE:
                        potential[v] = candidate
                        changed = True
        if not changed:
            return potential
    raise DomainError("The network contains a negative-cost cycle")


def _shortest_path(
    res: _Residual, potential: list[float], source: int
) -> tuple[int, dict[int, float], dict[int, int]]:
    """
    Dijkstra on reduced costs from ``source``, stopping at the first settled node with a
    deficit. Returns that node (or -1), the settled distances and the predecessor arcs.
    """
    dist = {source: 0.0}
    settled: dict[int, float] = {}
    via: dict[int, int] = {}
    heap = [(0.0, source)]
    head, residual, cost, adjacent, excess = (
        res.head,
        res.residual,
        res.cost,
        res.adjacent,
        res.excess,
    )
    while heap:
        d, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled[u] = d
        if excess[u] < 0:
            return u, settled, via
        pu = potential[u]
        for arc in adjacent[u]:
            if residual[arc] <= 0:
                continue
            v = head[arc]
            if v in settled:
                continue
            reduced = cost[arc] + pu - potential[v]
            if reduced < 0:
                reduced = 0.0
            candidate = d + reduced
            if candidate < dist.get(v, math.inf) - TOLERANCE:
                dist[v] = candidate
                via[v] = arc
                heapq.heappush(heap, (candidate, v))
    return -1, settled, via


def solve_min_cost_flow(net: FlowNetwork) -> Flow:
    """
    Find a minimum-cost feasible flow by successive shortest paths with node potentials.

    Lower bounds are shifted into node excesses first. Excess nodes are drained in index
    order, each along a cheapest residual path to the nearest deficit node. All bounds and
    supplies are integers, so every augmentation and therefore every returned flow value is an
    integer.

    Raises:
        InfeasibleError: if supplies are unbalanced, an arc's capacity is below its lower
            bound, or some excess cannot reach any deficit.
    """
    imbalance = sum(net.supply)
    if imbalance != 0:
        raise InfeasibleError("supply balance", required=0, available=imbalance)
    n = net.n_nodes
    res = _Residual(net)
    potential = _initial_potentials(res, n)
    augmentations = 0
    for source in range(n):
        while res.excess[source] > 0:
            target, settled, via = _shortest_path(res, potential, source)
            if target < 0:
                raise InfeasibleError(
                    "flow",
                    source,
                    required=res.excess[source],
                    available=0,
                    context=f"no residual path from {net.names[source]} to a demand",
                )
            reach = settled[target]
            for node, d in settled.items():
                if d < reach:
                    potential[node] += d - reach
            amount = min(res.excess[source], -res.excess[target])
            node = target
            while node != source:
                arc = via[node]
                amount = min(amount, res.residual[arc])
                node = res.head[arc ^ 1]
            node = target
            while node != source:
                arc = via[node]
                res.push(arc, amount)
                node = res.head[arc ^ 1]
            res.excess[source] -= amount
            res.excess[target] += amount
            augmentations += 1
    leftover = [node for node in range(n) if res.excess[node] != 0]
    if leftover:
        node = leftover[0]
        raise InfeasibleError(
            "demand", node, required=-res.excess[node], available=0, context=net.names[node]
        )
    flow = np.array(
        [net.lower[a] + res.residual[2 * a + 1] for a in range(net.n_arcs)], dtype=np.int64
    )
    cost = flow_cost(net, flow)
    log.trace("Min-cost flow: %d nodes, %d arcs, %d augmentations", n, net.n_arcs, augmentations)
    return Flow(flow=flow, cost=cost, augmentations=augmentations)
