from .graph import LOG_FLOOR, Node, constant, detach, gradients, leaf
from .model import (
    GradientSet,
    ModelParams,
    ParamNodes,
    backward,
    embed,
    entropy,
    forward,
    forward_graph,
    init_params,
    logits,
)
from .optim import OptimizerState, optimizer_step
