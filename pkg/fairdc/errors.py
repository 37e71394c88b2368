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

from typing import Any


class FairDCError(Exception):
    exit_code: int = 1


class InvalidInputError(FairDCError):
    exit_code = 2


class DomainError(InvalidInputError, ValueError):
    pass


class ShapeMismatch(DomainError):
    def __init__(self, what: str, expected: Any, actual: Any) -> None:
        self.what = what
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: expected {expected}, got {actual}")


class TooLargeForEnumeration(InvalidInputError):
    def __init__(self, size: int, cap: int) -> None:
        self.size = size
        self.cap = cap
        super().__init__(f"Refusing to enumerate {size} instances (cap is {cap})")


class CSVFormatError(InvalidInputError):
    def __init__(
        self, path: str, message: str, row: int | None = None, column: str | None = None
    ) -> None:
        self.path = path
        self.row = row
        self.column = column
        location = path
        if row is not None:
            location += f", row {row}"
        if column is not None:
            location += f", column {column!r}"
        super().__init__(f"{location}: {message}")


class MatrixFormatError(InvalidInputError):
    pass


class BadMagic(MatrixFormatError):
    def __init__(self, magic: bytes) -> None:
        self.magic = magic
        super().__init__(f"Not an FDCM matrix file (magic bytes {magic!r})")


class UnsupportedVersion(MatrixFormatError):
    def __init__(self, version: int) -> None:
        self.version = version
        super().__init__(f"Unsupported FDCM version {version}")


class TruncatedMatrix(MatrixFormatError):
    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"Truncated FDCM payload: expected {expected} bytes, got {actual}")


class DimensionOverflow(MatrixFormatError):
    def __init__(self, rows: int, cols: int) -> None:
        self.rows = rows
        self.cols = cols
        super().__init__(f"FDCM dimensions {rows}x{cols} exceed the addressable payload size")


class ConfigError(FairDCError):
    exit_code = 2

    def __init__(self, fields: dict[str, str]) -> None:
        self.fields = fields
        listing = "; ".join(f"{key}: {reason}" for key, reason in fields.items())
        super().__init__(f"Invalid configuration ({len(fields)} field(s)): {listing}")


class DimensionMismatch(ConfigError):
    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(
            {"model.input_dim": f"network expects {expected} input columns, data has {actual}"}
        )


class InfeasibleError(FairDCError):
    """
    Raised when quota bounds or a flow network admit no integral solution.

    Attributes:
        kind: The aggregate that was violated, e.g. ``cluster`` or ``group``.
        index: The cluster or group index of the violated aggregate, if any.
        required: The amount the constraints require.
        available: The amount the bounds can provide.
    """

    exit_code = 3

    def __init__(
        self,
        kind: str,
        index: int | None = None,
        required: float | None = None,
        available: str | float | None = None,
        context: str | None = None,
    ) -> None:
        self.kind = kind
        self.index = index
        self.required = required
        self.available = available
        self.context = context
        message = f"Infeasible {kind} constraint"
        if index is not None:
            message += f" #{index}"
        if required is not None:
            message += f": requires {required}, bounds allow {available}"
        if context:
            message = f"{context}: {message}"
        super().__init__(message)

    def with_context(self, context: str) -> InfeasibleError:
        """A copy whose context is prefixed with ``context``."""
        if self.context:
            context = f"{context}: {self.context}"
        return InfeasibleError(self.kind, self.index, self.required, self.available, context)


class NumericError(FairDCError, ArithmeticError):
    exit_code = 4

    def __init__(self, node: str, detail: str = "non-finite value") -> None:
        self.node = node
        super().__init__(f"{detail} at graph node {node!r}")


class TrainingDiverged(FairDCError):
    exit_code = 4

    def __init__(self, snapshot: dict[str, Any]) -> None:
        self.snapshot = snapshot
        details = ", ".join(f"{key}={value}" for key, value in snapshot.items())
        super().__init__(f"Training produced a non-finite loss ({details})")
