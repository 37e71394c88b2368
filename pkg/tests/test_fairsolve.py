from __future__ import annotations

from itertools import product

import attr
import numpy as np
import pytest

from fairdc.errors import DomainError, InfeasibleError, ShapeMismatch, TooLargeForEnumeration
from fairdc.fairsolve import (
    FairAssignmentResult,
    FlowNetwork,
    GroupMembership,
    HardAssignment,
    QuotaPlan,
    assignment_objective,
    brute_force_assign,
    build_network,
    check_plan,
    constraint_matrix,
    controlled_round,
    extract_labels,
    fair_assignment,
    flow_cost,
    has_equitable_bicoloring,
    induced_flow,
    plan_quotas,
    round_assignment,
    solve_fair_assignment,
    solve_min_cost_flow,
    verify_tu,
)
from fairdc.metrics import balance, optimal_balance


def random_instance(rng: np.random.Generator, n: int, k: int, t: int):
    y = rng.random((n, k)) + 1e-3
    y /= y.sum(axis=1, keepdims=True)
    membership = GroupMembership.from_codes(rng.integers(t, size=n), n_groups=t)
    return y, membership


def test_round_assignment():
    np.testing.assert_array_equal(round_assignment(np.eye(3)[[2, 0, 1]]).labels, [2, 0, 1])
    assert round_assignment(np.array([[0.5, 0.5]])).labels.tolist() == [0]
    assert round_assignment(np.array([[0.2, 0.8], [0.7, 0.3]])).labels.tolist() == [1, 0]


def test_membership_from_values_orders_by_first_appearance():
    membership = GroupMembership.from_values(["b", "a", "b", "c"])
    assert membership.names == ("b", "a", "c")
    assert membership.codes.tolist() == [0, 1, 0, 2]
    np.testing.assert_allclose(membership.proportions, [0.5, 0.25, 0.25])
    np.testing.assert_array_equal(membership.matrix.sum(axis=0), [2, 1, 1])


def test_single_path_is_saturated():
    net = FlowNetwork()
    source, middle, sink = net.add_node(2), net.add_node(0), net.add_node(-2)
    net.add_arc(source, middle, 5, cost=1.0)
    net.add_arc(middle, sink, 5, cost=2.0)
    solution = solve_min_cost_flow(net)
    assert solution.flow.tolist() == [2, 2]
    assert solution.cost == 6.0


def test_transportation_instance():
    net = FlowNetwork()
    for supply in (1, 1, -1, -1):
        net.add_node(supply)
    for i, j in product(range(2), range(2)):
        net.add_arc(i, 2 + j, 1, cost=float(i != j))
    solution = solve_min_cost_flow(net)
    assert solution.flow.tolist() == [1, 0, 0, 1]
    assert solution.cost == 0.0


def test_lower_bounds_are_honoured():
    net = FlowNetwork()
    net.add_node(2)
    net.add_node(-2)
    net.add_arc(0, 1, 2, cost=5.0, lower=1)
    net.add_arc(0, 1, 2, cost=1.0)
    assert solve_min_cost_flow(net).flow.tolist() == [1, 1]


def test_unbalanced_or_blocked_networks_are_infeasible():
    net = FlowNetwork()
    net.add_node(1)
    net.add_node(-2)
    net.add_arc(0, 1, 5)
    with pytest.raises(InfeasibleError):
        solve_min_cost_flow(net)
    net = FlowNetwork()
    net.add_node(2)
    net.add_node(-2)
    net.add_arc(0, 1, 1)
    with pytest.raises(InfeasibleError):
        solve_min_cost_flow(net)
    net = FlowNetwork()
    net.add_node(1)
    net.add_node(-1)
    net.add_arc(0, 1, 1, lower=2)
    with pytest.raises(InfeasibleError):
        solve_min_cost_flow(net)


def test_controlled_round_preserves_margins():
    q = controlled_round([3, 3], [3, 3])
    assert q.tolist() in ([[2, 1], [1, 2]], [[1, 2], [2, 1]])
    # Every rounding with these margins deviates from the 1.5 targets by the same amount.
    roundings = [np.array([[a, 3 - a], [3 - a, a]]) for a in (1, 2)]
    best = min(np.abs(r - 1.5).sum() for r in roundings)
    assert np.abs(q - 1.5).sum() == best


def test_controlled_round_random_margins(rng):
    for _ in range(20):
        sizes = rng.integers(0, 30, size=rng.integers(2, 6))
        groups = rng.multinomial(int(sizes.sum()), np.full(3, 1 / 3))
        q = controlled_round(sizes, groups)
        np.testing.assert_array_equal(q.sum(axis=1), sizes)
        np.testing.assert_array_equal(q.sum(axis=0), groups)
        if sizes.sum():
            targets = np.outer(sizes, groups) / sizes.sum()
            assert (q >= np.floor(targets)).all() and (q <= np.ceil(targets)).all()


def test_exact_plan_with_integral_targets():
    membership = GroupMembership.from_values("AABB")
    plan = plan_quotas([2, 2], membership)
    assert plan.exact
    assert plan.lower.tolist() == [[1, 1], [1, 1]]
    assert plan.upper.tolist() == [[1, 1], [1, 1]]


def test_relaxed_bounds():
    membership = GroupMembership.from_codes([0] * 12 + [1] * 88)
    plan = plan_quotas([100], membership, relax=0.02)
    assert plan.lower[0, 0] == 10
    assert plan.upper[0, 0] == 14
    assert plan.mode == "relaxed(0.02)"


def test_relaxed_bounds_that_admit_nothing():
    membership = GroupMembership.from_values("AAAB")
    with pytest.raises(InfeasibleError) as info:
        plan_quotas([2, 2], membership, relax=0.0)
    assert info.value.exit_code == 3


def test_network_layout(rng):
    y, membership = random_instance(rng, 6, 3, 2)
    plan = plan_quotas(round_assignment(y).cluster_sizes, membership)
    net = build_network(y, membership, plan)
    assert net.n_nodes == 6 + 2 * 3 + 3 + 1
    assert net.n_arcs == 6 * 3 + 3 * 2 + 3
    for i, group in enumerate(membership.codes):
        for j in range(3):
            arc = i * 3 + j
            assert net.head[arc] == net.pair_node(group, j)
            assert net.cost[arc] == pytest.approx(1 - y[i, j])
    assert all(float(b).is_integer() for b in net.lower + net.capacity)


def test_single_chain_network():
    membership = GroupMembership.from_codes([0])
    y = np.array([[1.0]])
    net = build_network(y, membership, plan_quotas([1], membership))
    assert net.n_arcs == 3
    assert solve_min_cost_flow(net).flow.tolist() == [1, 1, 1]


def test_worked_example(four_points):
    y, membership = four_points
    plan = plan_quotas([2, 2], membership)
    net = build_network(y, membership, plan)
    solution = solve_min_cost_flow(net)
    labels = extract_labels(net, solution.flow)
    assert labels.tolist() == [0, 1, 0, 1]
    assert solution.cost == pytest.approx(1.4)
    assert assignment_objective(y, labels) == pytest.approx(1.4)

    feasible = []
    for labeling in product(range(2), repeat=4):
        assign = HardAssignment(labels=labeling, k=2)
        try:
            check_plan(assign, membership, plan)
        except InfeasibleError:
            continue
        feasible.append(round(assignment_objective(y, labeling), 9))
    assert sorted(feasible) == [1.4, 1.6, 2.4, 2.6]

    brute = brute_force_assign(y, membership, plan)
    assert brute.labels.tolist() == [0, 1, 0, 1]


def test_induced_flow_cost_equals_objective(four_points):
    y, membership = four_points
    plan = plan_quotas([2, 2], membership)
    net = build_network(y, membership, plan)
    labels = np.array([1, 0, 0, 1])
    assert flow_cost(net, induced_flow(net, labels, membership.codes)) == pytest.approx(
        assignment_objective(y, labels)
    )


def test_given_cluster_sizes_replace_the_rounded_ones(four_points):
    y, membership = four_points
    assert round_assignment(y).cluster_sizes.tolist() == [3, 1]
    result = fair_assignment(y, membership, sizes=[2, 2])
    assert result.assignment.cluster_sizes.tolist() == [2, 2]
    check_plan(result.assignment, membership, result.plan)
    assert solve_fair_assignment(y, membership, sizes=[2, 2]).labels.tolist() == (
        result.labels.tolist()
    )
    with pytest.raises(ShapeMismatch):
        fair_assignment(y, membership, sizes=[4])
    with pytest.raises(DomainError):
        fair_assignment(y, membership, sizes=[3, 3])


def test_already_fair_one_hot_is_kept():
    y = np.eye(2)[[0, 1, 0, 1]]
    result = fair_assignment(y, GroupMembership.from_values("AABB"))
    assert result.labels.tolist() == [0, 1, 0, 1]
    assert result.objective == 0.0


def test_loose_relaxation_keeps_argmax(rng):
    y, membership = random_instance(rng, 30, 3, 2)
    result = fair_assignment(y, membership, relax=0.99)
    np.testing.assert_array_equal(result.labels, round_assignment(y).labels)


def test_matches_exhaustive_search(rng):
    for _ in range(200):
        n = int(rng.integers(2, 9))
        y, membership = random_instance(rng, n, int(rng.integers(2, 4)), int(rng.integers(1, 3)))
        result = fair_assignment(y, membership)
        brute = brute_force_assign(y, membership, result.plan)
        assert result.objective == pytest.approx(assignment_objective(y, brute), abs=1e-12)


def test_matches_exhaustive_search_relaxed(rng):
    for _ in range(50):
        y, membership = random_instance(rng, int(rng.integers(4, 9)), 2, 2)
        try:
            result = fair_assignment(y, membership, relax=0.2)
        except InfeasibleError:
            continue
        brute = brute_force_assign(y, membership, result.plan)
        assert result.objective == pytest.approx(assignment_objective(y, brute), abs=1e-12)


def check_integral_solution(y: np.ndarray, membership: GroupMembership) -> FairAssignmentResult:
    result = fair_assignment(y, membership)
    net = build_network(y, membership, result.plan)
    flow = solve_min_cost_flow(net).flow
    assert flow.dtype.kind == "i"
    assert ((flow == 0) | (flow == 1))[: net.n * net.k].all()
    check_plan(result.assignment, membership, result.plan)
    np.testing.assert_array_equal(
        result.assignment.cluster_sizes, round_assignment(y).cluster_sizes
    )
    return result


def test_solutions_are_integral(rng):
    for _ in range(30):
        n = int(rng.integers(5, 80))
        y, membership = random_instance(rng, n, int(rng.integers(2, 8)), int(rng.integers(2, 5)))
        check_integral_solution(y, membership)


@pytest.mark.slow
def test_solutions_are_integral_at_scale(rng):
    elapsed = []
    for index in range(1000):
        if index % 50 == 0:
            n, k, t = 500, 10, 5
        else:
            n = int(rng.integers(5, 120))
            k, t = int(rng.integers(2, 11)), int(rng.integers(1, 6))
        result = check_integral_solution(*random_instance(rng, n, k, t))
        if n == 500:
            elapsed.append(result.elapsed)
    assert len(elapsed) == 20
    assert float(np.median(elapsed)) < 0.2


def test_shifting_one_instances_costs_keeps_the_assignment(rng):
    for _ in range(30):
        n, k = int(rng.integers(5, 40)), int(rng.integers(2, 5))
        y, membership = random_instance(rng, n, k, 2)
        net = build_network(y, membership, fair_assignment(y, membership).plan)
        base = solve_min_cost_flow(net)
        instance, shift = int(rng.integers(n)), float(rng.uniform(-1, 1))
        shifted = attr.evolve(
            net,
            cost=[c + shift if net.tail[a] == instance else c for a, c in enumerate(net.cost)],
        )
        moved = solve_min_cost_flow(shifted)
        np.testing.assert_array_equal(
            extract_labels(net, moved.flow), extract_labels(net, base.flow)
        )
        assert moved.cost == pytest.approx(base.cost + shift, abs=1e-9)


def test_exhaustive_search_limits(four_points):
    y, membership = four_points
    impossible = QuotaPlan(
        cluster_sizes=np.array([2, 2]),
        lower=np.array([[2, 0], [2, 0]]),
        upper=np.array([[2, 0], [2, 0]]),
    )
    with pytest.raises(InfeasibleError):
        brute_force_assign(y, membership, impossible)
    big = np.full((13, 2), 0.5)
    with pytest.raises(TooLargeForEnumeration):
        brute_force_assign(big, GroupMembership.from_codes([0, 1] * 6 + [0]), impossible)


def test_infeasible_solve_carries_context():
    with pytest.raises(InfeasibleError) as info:
        solve_fair_assignment(
            np.array([[0.9, 0.1], [0.8, 0.2], [0.2, 0.8], [0.1, 0.9]]),
            GroupMembership.from_values("AAAB"),
            relax=0.0,
        )
    assert "fair assignment" in str(info.value)


def test_constraint_matrix_by_hand():
    matrix = constraint_matrix(GroupMembership.from_codes([0, 0]), 1)
    assert matrix.tolist() == [[1, 1, 0], [0, 0, 1]]


def test_verify_tu_basics():
    assert verify_tu(np.eye(4, dtype=int))
    assert not verify_tu(np.array([[1, 1], [-1, 1]]))


def test_constraint_matrices_are_totally_unimodular(rng):
    for _ in range(50):
        n, k, t = int(rng.integers(1, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 3))
        membership = GroupMembership.from_codes(rng.integers(t, size=n), n_groups=t)
        matrix = constraint_matrix(membership, k)
        assert verify_tu(matrix, max_order=4)
        assert has_equitable_bicoloring(matrix)


def test_balance_optimal_partitions_share_one_cluster_balance():
    for a, b in [(2, 2), (2, 4), (4, 4), (4, 6)]:
        membership = GroupMembership.from_codes([0] * a + [1] * b)
        results = [
            balance(np.array(labeling), membership)
            for labeling in product(range(2), repeat=a + b)
        ]
        best = max(overall for overall, _ in results)
        assert best == pytest.approx(min(a, b) / max(a, b))
        optimal = [per_cluster for overall, per_cluster in results if overall >= best - 1e-12]
        assert optimal
        for per_cluster in optimal:
            np.testing.assert_allclose(per_cluster, per_cluster[0])


def test_balance_never_exceeds_group_ratio():
    for a, b in [(2, 3), (4, 2), (3, 5), (4, 6), (1, 4)]:
        membership = GroupMembership.from_codes([0] * a + [1] * b)
        n = a + b
        best = 0.0
        for labeling in product(range(2), repeat=n):
            overall, _ = balance(np.array(labeling), membership)
            assert overall <= optimal_balance(membership) + 1e-12
            best = max(best, overall)
        if a % 2 == 0 and b % 2 == 0:
            # Even quotas: the proportional split reaches the ratio in every cluster.
            assert best == pytest.approx(min(a, b) / max(a, b))
            q = controlled_round([n // 2, n // 2], [a, b])
            per_cluster = q.min(axis=1) / q.max(axis=1)
            np.testing.assert_allclose(per_cluster, min(a, b) / max(a, b))
