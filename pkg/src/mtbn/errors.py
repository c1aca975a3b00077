"""Exception types shared across the package."""


class MtbnError(Exception):
    """Base class for all package errors."""


class ModelParseError(MtbnError):
    """Raised when a model file is structurally unusable."""


class ModelInvalidError(MtbnError):
    """Raised when an operation requires a valid model and validation failed."""


class UnknownInstanceError(MtbnError):
    """Raised when a query references an instance that was not deployed."""


class MissingRowError(MtbnError):
    """Raised when a CPD lookup hits a context with no matching row."""


class CyclicModelError(MtbnError):
    """Raised when a realized structure contains a dependency cycle."""


class CapExceededError(MtbnError):
    """Raised when exact enumeration would exceed the configured assignment cap."""


class InconclusiveRunError(MtbnError):
    """Raised when a sampling run accepts no samples or collects zero total weight."""


class InterventionError(MtbnError):
    """Raised for invalid manipulation bindings or values."""
