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

from pathlib import Path
import io
import struct

import numpy as np

from ..errors import (
    BadMagic,
    DimensionOverflow,
    DomainError,
    ShapeMismatch,
    TruncatedMatrix,
    UnsupportedVersion,
)

MAGIC = b"FDCM"
VERSION = 1
HEADER = struct.Struct("<4sHII")
ITEM = np.dtype("<f8")
# Largest payload a reader will try to allocate.
MAX_PAYLOAD = 1 << 40


class MatrixReader(io.BytesIO):
    """
    MatrixReader decodes the FDCM container: the 4-byte magic ``FDCM``, a little-endian u16
    version, u32 row and column counts, then rows×cols little-endian float64 values in
    row-major order.
    """

    def read_header(self) -> tuple[int, int]:
        raw = self.read(HEADER.size)
        if len(raw) < 4 or raw[:4] != MAGIC:
            raise BadMagic(raw[:4])
        if len(raw) < HEADER.size:
            raise TruncatedMatrix(HEADER.size, len(raw))
        _, version, rows, cols = HEADER.unpack(raw)
        if version != VERSION:
            raise UnsupportedVersion(version)
        if rows * cols * ITEM.itemsize > MAX_PAYLOAD:
            raise DimensionOverflow(rows, cols)
        return rows, cols

    def read_matrix(self) -> np.ndarray:
        rows, cols = self.read_header()
        expected = rows * cols * ITEM.itemsize
        payload = self.read(expected)
        if len(payload) < expected:
            raise TruncatedMatrix(HEADER.size + expected, HEADER.size + len(payload))
        return np.frombuffer(payload, dtype=ITEM).astype(np.float64).reshape(rows, cols)


class MatrixWriter(io.BytesIO):
    def write_matrix(self, matrix: np.ndarray) -> None:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if matrix.ndim != 2:
            raise ShapeMismatch("matrix", "two dimensions", matrix.shape)
        rows, cols = matrix.shape
        if rows > 0xFFFFFFFF or cols > 0xFFFFFFFF:
            raise DimensionOverflow(rows, cols)
        self.write(HEADER.pack(MAGIC, VERSION, rows, cols))
        self.write(np.ascontiguousarray(matrix, dtype=ITEM).tobytes())


def is_matrix_file(path: str | Path) -> bool:
    with open(path, "rb") as file:
        return file.read(len(MAGIC)) == MAGIC


def load_matrix(path: str | Path) -> np.ndarray:
    with open(path, "rb") as file:
        matrix = MatrixReader(file.read()).read_matrix()
    bad = np.argwhere(~np.isfinite(matrix))
    if bad.size:
        row, col = bad[0]
        raise DomainError(f"{path}: non-finite value at row {row}, column {col}")
    return matrix


def save_matrix(path: str | Path, matrix: np.ndarray) -> None:
    writer = MatrixWriter()
    writer.write_matrix(matrix)
    Path(path).write_bytes(writer.getvalue())
