"""Exception hierarchy shared by all pavesage modules."""


class PavesageError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(PavesageError, ValueError):
    """Operands have incompatible dimensions."""


class ConfigError(PavesageError, ValueError):
    """A configuration value is missing, empty, or out of range."""


class DataError(PavesageError, ValueError):
    """Input data violates a documented contract (non-finite, malformed)."""


class SchemaError(DataError):
    """A file is missing mandatory columns or has an unusable header."""


class VocabularyError(DataError):
    """A categorical value is not part of its closed vocabulary."""


class NumericError(PavesageError, ArithmeticError):
    """A computation produced or encountered a non-finite value."""


class ConsistencyError(PavesageError, RuntimeError):
    """Internal invariant broken (e.g. a sampled node not covered by its frontier)."""


class UndefinedMetricError(PavesageError, ValueError):
    """A metric is mathematically undefined for the given inputs."""
