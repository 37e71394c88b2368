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

import logging

from attr import dataclass
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler
import numpy as np

from mautrix.util.logging import TraceLogger

from ..errors import DomainError
from .dataset import Dataset

log: TraceLogger = logging.getLogger("fairdc.data")


@dataclass(frozen=True, eq=False)
class Standardized:
    """Scaled features plus the per-column statistics used to scale them."""

    features: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray


def standardize(features: np.ndarray) -> Standardized:
    """
    Shift every column to zero mean and scale it to unit population (1/N) variance. Columns
    with zero variance are flagged in ``constant`` and left untouched.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 2:
        raise DomainError("Standardizing needs at least two rows")
    scaler = StandardScaler().fit(features)
    constant = scaler.var_ == 0
    if constant.any():
        log.warning("Leaving %d constant column(s) unscaled", int(constant.sum()))
    return Standardized(
        features=np.where(constant, features, scaler.transform(features)),
        mean=scaler.mean_,
        std=np.sqrt(scaler.var_),
        constant=constant,
    )


def standardize_dataset(dataset: Dataset) -> tuple[Dataset, Standardized]:
    scaled = standardize(dataset.features)
    return dataset.with_features(scaled.features, standardized=True), scaled


def _strata(dataset: Dataset) -> np.ndarray | None:
    keys = []
    if dataset.labels is not None:
        keys.append(np.asarray(dataset.labels))
    if dataset.membership is not None:
        keys.append(dataset.membership.codes)
    if not keys:
        return None
    _, strata = np.unique(np.stack(keys, axis=1), axis=0, return_inverse=True)
    return strata.ravel()


def split(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """
    Split into train and test parts stratified on the joint (label, group) value, so both
    parts keep the full set's composition up to rounding. Falls back to an unstratified split
    with a warning when some stratum has fewer than two rows.
    """
    if not 0 < test_fraction < 1:
        raise DomainError(f"Test fraction must lie in (0, 1), got {test_fraction}")
    strata = _strata(dataset)
    if strata is not None and np.bincount(strata).min() < 2:
        log.warning("A (label, group) stratum has fewer than 2 rows, splitting unstratified")
        strata = None
    try:
        train_index, test_index = train_test_split(
            np.arange(dataset.n), test_size=test_fraction, random_state=seed, stratify=strata
        )
    except ValueError:
        if strata is None:
            raise DomainError(f"Cannot split {dataset.n} rows with test fraction {test_fraction}")
        log.warning("Test part too small to hold every stratum, splitting unstratified")
        train_index, test_index = train_test_split(
            np.arange(dataset.n), test_size=test_fraction, random_state=seed
        )
    train_index, test_index = np.sort(train_index), np.sort(test_index)
    return (
        dataset.subset(train_index, f"{dataset.name}-train"),
        dataset.subset(test_index, f"{dataset.name}-test"),
    )
