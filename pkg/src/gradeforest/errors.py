"""Exception types shared across the package.

The CLI maps these onto its exit codes, so new error paths should reuse
one of the classes below rather than raising bare exceptions.
"""


class ConfigError(ValueError):
    """Invalid configuration value (ratios, fractions, preset names, ...)."""


class SchemaError(ValueError):
    """An input file does not match its documented schema."""


class DegenerateDataError(ValueError):
    """Training data cannot support the requested fit (e.g. a single class)."""


class ModelTaskError(ValueError):
    """Model and dataset/task do not fit together (wrong k, wrong features)."""


class NumericError(RuntimeError):
    """Numeric failure during optimization (non-finite loss, divergence)."""


class CategoricalArityError(ValueError):
    """A categorical feature has too many distinct values to enumerate."""
