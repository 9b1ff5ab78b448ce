"""Unified tool API: specs, registry, builtins, mocks, and the subprocess protocol."""

from .errors import (
    ArgumentMismatch,
    DuplicateToolName,
    MalformedToolOutput,
    ManifestParseError,
    ToolCrashed,
    ToolError,
    ToolExecutionError,
    ToolTimeout,
    UnknownTool,
)
from .spec import (
    BuiltinBinding,
    ExternalBinding,
    SensorSupport,
    ToolCallRecord,
    ToolParam,
    ToolSpec,
    TrainingDataset,
    parse_manifest,
)
from .registry import Registry, default_specs, load_registry, render_prompt_catalog
from .catalog import EmptyCatalog, LocalCatalog, SceneEntry, UnknownScene
from .mocks import FLAIR2_TAXONOMY, failing_tool, mock_model_tools

__all__ = [
    "ArgumentMismatch",
    "BuiltinBinding",
    "DuplicateToolName",
    "EmptyCatalog",
    "ExternalBinding",
    "FLAIR2_TAXONOMY",
    "LocalCatalog",
    "MalformedToolOutput",
    "ManifestParseError",
    "Registry",
    "SceneEntry",
    "SensorSupport",
    "ToolCallRecord",
    "ToolCrashed",
    "ToolError",
    "ToolExecutionError",
    "ToolParam",
    "ToolSpec",
    "ToolTimeout",
    "TrainingDataset",
    "UnknownScene",
    "UnknownTool",
    "default_specs",
    "failing_tool",
    "load_registry",
    "mock_model_tools",
    "parse_manifest",
    "render_prompt_catalog",
]
