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

from attr import dataclass
from scipy.special import xlogy
import numpy as np

from .errors import DomainError, ShapeMismatch
from .tensornet import graph as G
from .tensornet.model import ModelParams, ParamNodes, forward, forward_graph
from .types import AUG_REDUCTIONS, LossWeights


@dataclass(eq=False)
class LossTerms:
    total: G.Node
    clustering: G.Node
    fairness: G.Node | None = None
    augmentation: G.Node | None = None

    def breakdown(self) -> dict[str, float]:
        return {
            "total": float(self.total),
            "clustering": float(self.clustering),
            "fairness": float(self.fairness) if self.fairness is not None else 0.0,
            "augmentation": float(self.augmentation) if self.augmentation is not None else 0.0,
        }


def _rows(probs: G.Node | np.ndarray, name: str) -> G.Node:
    node = G.as_node(probs, name)
    if node.value.ndim != 2:
        raise ShapeMismatch(name, "an n×K matrix", node.shape)
    return node


def _row_entropy_sum(p: G.Node) -> G.Node:
    return G.scale(G.reduce_sum(G.mul(p, G.log(p))), -1.0)


def _l2(params: ModelParams | ParamNodes | None) -> G.Node | None:
    if params is None:
        return None
    if isinstance(params, ModelParams):
        params = ParamNodes.freeze(params)
    terms = [G.sum_squares(leaf) for leaf in params.leaves]
    total = terms[0]
    for term in terms[1:]:
        total = G.add(total, term)
    return total


def clustering_loss(
    probs: G.Node | np.ndarray, params: ModelParams | ParamNodes | None, alpha: float
) -> G.Node:
    """
    The regularised negative mutual information between inputs and cluster indicators:
    the mean per-row entropy, minus the entropy of the mean row, plus α times the squared norm
    of every layer's parameters. Marginals are estimated over the rows given, i.e. per batch.
    """
    p = _rows(probs, "probs")
    n = p.shape[0]
    if n < 1:
        raise DomainError("The clustering loss needs at least one row")
    conditional = G.scale(_row_entropy_sum(p), 1.0 / n)
    marginal = G.mean(p, axis=0)
    marginal_entropy = G.scale(G.reduce_sum(G.mul(marginal, G.log(marginal))), -1.0)
    loss = G.sub(conditional, marginal_entropy)
    penalty = _l2(params) if alpha else None
    if penalty is not None:
        loss = G.add(loss, G.scale(penalty, alpha))
    return loss


def fairness_loss(probs: G.Node | np.ndarray, fair: np.ndarray) -> G.Node:
    """Cross-entropy of the predictions against the solved fair pseudo-labels."""
    p = _rows(probs, "probs")
    labels = np.asarray(getattr(fair, "labels", fair), dtype=np.int64)
    if labels.shape != (p.shape[0],):
        raise ShapeMismatch("pseudo-labels", (p.shape[0],), labels.shape)
    if labels.size and (labels.min() < 0 or labels.max() >= p.shape[1]):
        raise DomainError(f"Pseudo-labels must lie in [0, {p.shape[1]})")
    return G.scale(G.mean(G.log(G.pick(p, labels))), -1.0)


def augmentation_loss(
    probs: G.Node | np.ndarray,
    probs_perturbed: G.Node | np.ndarray,
    reduction: str = "sum",
) -> G.Node:
    """
    Σᵢ KL(pᵢ ‖ p′ᵢ), or its mean over rows with ``reduction="mean"``. The clean predictions
    are a fixed target; only ``probs_perturbed`` receives gradient.
    """
    if reduction not in AUG_REDUCTIONS:
        raise DomainError(f"Unknown reduction {reduction!r}")
    target = np.asarray(probs.value if isinstance(probs, G.Node) else probs, dtype=np.float64)
    q = _rows(probs_perturbed, "probs_perturbed")
    if target.shape != q.shape:
        raise ShapeMismatch("perturbed predictions", target.shape, q.shape)
    negentropy = G.constant(np.sum(xlogy(target, target)), "target_negentropy")
    cross = G.reduce_sum(G.mul(G.constant(target, "target"), G.log(q)))
    kl = G.sub(negentropy, cross)
    return G.scale(kl, 1.0 / max(q.shape[0], 1)) if reduction == "mean" else kl


def _unit_rows(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(d, axis=1, keepdims=True)
    live = norms > 0
    return np.where(live, d / np.where(live, norms, 1.0), 0.0), live


def vat_perturbation(
    params: ModelParams, x: np.ndarray, cfg: LossWeights, rng: np.random.Generator
) -> np.ndarray:
    """
    Approximate the virtual adversarial direction by power iteration.

    Starting from a random unit direction per row, the direction is replaced
    ``cfg.vat_power_iters`` times by the normalised gradient of KL(σ(f(x)) ‖ σ(f(x + ξd))) with
    respect to ``d``. Rows whose gradient vanishes keep the random starting direction.

    Returns:
        An array shaped like ``x`` whose rows all have Euclidean norm ``cfg.vat_epsilon``.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    batch = x[None, :] if single else x
    clean = forward(params, batch)
    frozen = ParamNodes.freeze(params)
    seed, _ = _unit_rows(rng.standard_normal(batch.shape))
    direction = seed
    for _ in range(cfg.vat_power_iters):
        d = G.leaf(direction, "vat.direction")
        shifted = G.add(G.constant(batch, "x"), G.scale(d, cfg.vat_xi))
        kl = augmentation_loss(clean, forward_graph(frozen, shifted))
        (grad,) = G.gradients(kl, [d])
        unit, live = _unit_rows(grad)
        direction = np.where(live, unit, seed)
    perturbation = cfg.vat_epsilon * direction
    return perturbation[0] if single else perturbation


def compute_losses(
    probs: G.Node | np.ndarray,
    params: ModelParams | ParamNodes | None,
    weights: LossWeights,
    probs_perturbed: G.Node | np.ndarray | None = None,
    fair: np.ndarray | None = None,
) -> LossTerms:
    """
    Build ℓ = ℓ_C + β·ℓ_Fair + γ·ℓ_Aug, with ℓ_Aug summed or averaged over the batch as
    ``weights.vat_reduction`` says. Terms whose inputs are absent (no pseudo-labels during
    pretraining, no perturbed predictions) contribute nothing.
    """
    clustering = clustering_loss(probs, params, weights.alpha)
    total = clustering
    fairness = augmentation = None
    if fair is not None:
        fairness = fairness_loss(probs, fair)
        total = G.add(total, G.scale(fairness, weights.beta))
    if probs_perturbed is not None:
        augmentation = augmentation_loss(probs, probs_perturbed, weights.vat_reduction)
        total = G.add(total, G.scale(augmentation, weights.gamma))
    return LossTerms(
        total=total, clustering=clustering, fairness=fairness, augmentation=augmentation
    )


def total_loss(
    probs: G.Node | np.ndarray,
    probs_perturbed: G.Node | np.ndarray | None,
    fair: np.ndarray | None,
    params: ModelParams | ParamNodes | None,
    weights: LossWeights,
) -> G.Node:
    return compute_losses(probs, params, weights, probs_perturbed, fair).total
