"""Tool registry and invocation failures."""

from __future__ import annotations


class ToolError(Exception):
    """Base class; interpreter records str(error) verbatim in the run."""


class UnknownTool(ToolError):
    """Call target not in the registry: a hallucinated tool name."""


class DuplicateToolName(ToolError):
    pass


class ManifestParseError(ToolError):
    def __init__(self, file: str, reason: str):
        super().__init__(f"{file}: {reason}")
        self.file = file
        self.reason = reason


class ArgumentMismatch(ToolError):
    pass


class ToolTimeout(ToolError):
    pass


class ToolCrashed(ToolError):
    def __init__(self, exit_status: int, detail: str = ""):
        message = f"tool subprocess exited with status {exit_status}"
        if detail:
            message += f": {detail}"
        super().__init__(message)
        self.exit_status = exit_status


class MalformedToolOutput(ToolError):
    pass


class ToolExecutionError(ToolError):
    """The tool itself reported a failure; the message is surfaced as-is."""
