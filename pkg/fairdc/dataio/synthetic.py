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

import numpy as np

from ..errors import DomainError
from ..fairsolve import GroupMembership
from .dataset import Dataset

# Distance between neighbouring blob centres, in units of the blob standard deviation.
DEFAULT_SEPARATION = 10.0


def blob_centers(k: int, d: int, separation: float = DEFAULT_SEPARATION) -> np.ndarray:
    """
    Scaled standard basis vectors when ``d >= k`` (a simplex with edge ``separation``),
    otherwise a regular polygon in the first two coordinates with that edge length. With a
    single dimension the centres sit on a line.
    """
    centers = np.zeros((k, d))
    if d >= k:
        centers[np.arange(k), np.arange(k)] = separation / np.sqrt(2.0)
    elif d == 1:
        centers[:, 0] = separation * np.arange(k)
    else:
        radius = separation / (2.0 * np.sin(np.pi / k))
        angles = 2.0 * np.pi * np.arange(k) / k
        centers[:, 0] = radius * np.cos(angles)
        centers[:, 1] = radius * np.sin(angles)
    return centers


def make_biased_blobs(
    n_per_blob: int,
    k: int,
    d: int,
    psv_bias: float,
    seed: int,
    separation: float = DEFAULT_SEPARATION,
) -> Dataset:
    """
    ``k`` unit-covariance Gaussian blobs of ``n_per_blob`` points each, labelled by blob id,
    with a binary protected attribute that equals the blob's parity with probability
    ``psv_bias``. At 0.5 the attribute is independent of the blobs; at 1.0 it aliases the
    parity exactly, so clustering by blob is maximally unfair.
    """
    if n_per_blob < 1 or k < 1 or d < 1:
        raise DomainError("Blob counts and dimensions must be positive")
    if not 0 <= psv_bias <= 1:
        raise DomainError(f"psv_bias must lie in [0, 1], got {psv_bias}")
    rng = np.random.default_rng(seed)
    centers = blob_centers(k, d, separation)
    labels = np.repeat(np.arange(k), n_per_blob)
    features = centers[labels] + rng.standard_normal((labels.size, d))
    parity = labels % 2
    matches = rng.random(labels.size) < psv_bias
    codes = np.where(matches, parity, 1 - parity)
    return Dataset(
        features=features,
        membership=GroupMembership.from_codes(codes, n_groups=2),
        labels=labels,
        name="biased-blobs",
        provenance={
            "source": "blobs",
            "n_per_blob": n_per_blob,
            "k": k,
            "d": d,
            "psv_bias": psv_bias,
            "seed": seed,
            "separation": separation,
        },
    )
