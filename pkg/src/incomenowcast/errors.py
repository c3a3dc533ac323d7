"""Exception classes shared across the package."""


class ConfigError(Exception):
    """Invalid run configuration or config file."""


class DataError(Exception):
    """Unit-record data violates the schema or an invariant."""


class ConvergenceError(Exception):
    """An iterative fit failed to converge."""


class SeparationError(ConvergenceError):
    """Perfect separation detected during a binary-response fit."""


class SingularModelError(ConvergenceError):
    """Singular information matrix; carries the offending column names."""

    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(
            "singular information matrix; collinear terms: " + ", ".join(self.columns)
        )


class AlignmentError(Exception):
    """Alignment target cannot be met with the eligible population."""


class IndexationError(Exception):
    """An index table is missing a required month."""
