"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid input data or configuration."""


class ParseError(ValidationError):
    """A point-cloud or diagram file could not be parsed."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class SimplexBudgetError(RuntimeError):
    """Simplex enumeration exceeded the configured budget."""

    def __init__(self, dimension, count, budget):
        self.dimension = dimension
        self.count = count
        self.budget = budget
        super().__init__(
            f"simplex budget exceeded in dimension {dimension}: "
            f"{count} simplices so far, budget {budget}"
        )
