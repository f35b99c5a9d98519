"""Exception hierarchy shared across the solver."""


class CovsweError(Exception):
    """Base class for all solver errors."""


class PoleSingularity(CovsweError):
    """Metric determinant fell below the admissible floor (chart critical point)."""


class NonPositiveDepth(CovsweError):
    """Fluid depth reached or crossed zero; wetting/drying is unsupported."""


class InvalidBounds(CovsweError):
    """Degenerate domain bounds or cell counts."""


class DegenerateCell(CovsweError):
    """A mesh cell collapsed below the area floor."""


class SingularStencil(CovsweError):
    """Least-squares stencil has collinear neighbors (rank-deficient normal matrix)."""


class ParseError(CovsweError):
    """Malformed mesh file."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingExactSolution(CovsweError):
    """Operation requires a scenario exact solution that is not available."""


class DegenerateRatio(CovsweError):
    """Convergence order undefined (equal mesh sizes or zero errors)."""


class ZeroWaveSpeed(CovsweError):
    """No admissible time step (should be unreachable for h > 0)."""


class IoError(CovsweError):
    """Result file could not be written or read."""
