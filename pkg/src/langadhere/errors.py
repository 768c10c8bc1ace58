"""Exception hierarchy shared by all modules.

Every error carries enough context (file, line, tensor/question id) for the
CLI to print a one-line structured message and exit nonzero.
"""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = {k: v for k, v in context.items() if v is not None}

    def __str__(self) -> str:
        base = super().__str__()
        if not self.context:
            return base
        ctx = ", ".join(f"{k}={v}" for k, v in sorted(self.context.items()))
        return f"{base} ({ctx})"


class IngestError(ToolkitError):
    """Corpus file is malformed or violates a corpus invariant."""


class LangIdError(ToolkitError):
    """Profile building or classification preconditions violated."""


class MatchError(ToolkitError):
    """Generation log judging or set collection failed."""


class MetricError(ToolkitError):
    """Metric precondition violated (bad ranges, empty universe, ...)."""


class ContainerError(ToolkitError):
    """Tensor container is structurally invalid or tensors are incompatible."""


class SchemeError(ToolkitError):
    """Parameter naming scheme is invalid or ambiguous for a name."""


class PlanError(ToolkitError):
    """Freeze plan construction failed."""


class ConfigError(ToolkitError):
    """Run configuration file or flag combination is invalid."""
