"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A config file or run configuration is internally inconsistent."""


class ContractViolationError(ValueError):
    """An argument breaks a documented contract (e.g. an unnormalized density)."""


class OracleFailureError(RuntimeError):
    """A brute-force oracle failed to converge within its refinement budget."""
