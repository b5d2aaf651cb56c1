"""Exception types shared across the package."""


class SfgSwapError(Exception):
    """Base class for every error raised deliberately by this package."""


class ConfigurationError(SfgSwapError, ValueError):
    """A run configuration is inconsistent or outside supported ranges."""


class MemoryBudgetError(SfgSwapError, RuntimeError):
    """A requested dense object would exceed the configured memory budget."""


class HeraldImpossibleError(SfgSwapError, ValueError):
    """A conditional state was requested for a zero-probability herald bin."""


class NumericalConsistencyError(SfgSwapError, RuntimeError):
    """Two mathematically equivalent computation routes disagreed."""
