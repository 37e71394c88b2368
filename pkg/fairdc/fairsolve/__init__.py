from .mcf import Flow, solve_min_cost_flow
from .network import (
    FairFlowNetwork,
    FlowNetwork,
    build_network,
    extract_labels,
    flow_cost,
    induced_flow,
)
from .oracle import ENUMERATION_CAP, brute_force_assign
from .quota import QuotaPlan, check_plan, controlled_round, plan_quotas
from .solver import (
    FairAssignmentResult,
    assignment_objective,
    fair_assignment,
    solve_fair_assignment,
)
from .tu import constraint_matrix, has_equitable_bicoloring, verify_tu
from .types import GroupMembership, HardAssignment, check_soft_assignment, round_assignment
