"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Tensor length or configuration mismatch."""


class DomainError(ValueError):
    """Input outside the domain of an operation (negative size, center at 1.0, ...)."""


class EncodingConflictError(ValueError):
    """Two ground-truth objects land in the same grid cell."""

    def __init__(self, cell):
        self.cell = cell
        super().__init__(f"encoding conflict: two objects in cell (row={cell[0]}, col={cell[1]})")
