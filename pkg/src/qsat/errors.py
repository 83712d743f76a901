"""Exception types shared across the package."""


class QsatError(Exception):
    """Base class for all package errors."""


class CsvFormatError(QsatError):
    """Malformed corpus CSV. Carries the 1-based row (header = row 1) and column."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class UnknownDesignError(CsvFormatError):
    pass


class InvalidScoreError(CsvFormatError):
    pass


class MissingDesignError(QsatError):
    """A required research design has no records."""


class ConfigError(QsatError):
    """Invalid configuration value."""


class NotFittedError(QsatError):
    """Operation requires a fitted object."""


class ConvergenceError(QsatError):
    """Iterative solver hit its iteration cap before converging."""

    def __init__(self, message, iterations=None):
        self.iterations = iterations
        if iterations is not None:
            message = f"{message} (after {iterations} iterations)"
        super().__init__(message)


class SingularSystemError(QsatError):
    """Linear system is singular (e.g. unpenalized fit on rank-deficient data)."""


class ValidationError(QsatError):
    """Invalid request field. Maps to a 422 response in the service."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class BundleError(QsatError):
    """Base class for model-bundle persistence errors."""


class VersionMismatchError(BundleError):
    def __init__(self, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"bundle format_version {found} not supported (expected {expected})")


class MissingModelError(BundleError):
    def __init__(self, kind):
        self.kind = kind
        super().__init__(f"bundle is missing model {kind!r}")


class BundleSchemaError(BundleError):
    """Schema violation; ``path`` is a JSON-pointer to the offending node."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
