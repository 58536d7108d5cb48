"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit-specific failures."""


class ConfigError(ToolkitError, ValueError):
    """A configuration value is out of range or internally inconsistent."""


class CapacityError(ToolkitError, ValueError):
    """The groups cannot hold the nodes (G*P < K, or a group exceeds P)."""


class ConsistencyError(ToolkitError, ValueError):
    """A partition and a node set disagree (unknown, missing or duplicate ids)."""


class EnumerationSizeError(ToolkitError, ValueError):
    """The brute-force search space exceeds the safety bound."""


class SolveTimeout(ToolkitError, TimeoutError):
    """The exact solver exceeded its time budget."""
