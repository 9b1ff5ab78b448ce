"""Central tool registry: discovery, prompt catalog rendering, invocation.

The registry is immutable after construction and safe to share. Every
invocation, successful or failed, appends exactly one ToolCallRecord to
the caller-supplied log.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from ..raster import Mask, Raster
from .builtins import data_tool_specs, index_tool_specs
from .errors import ArgumentMismatch, DuplicateToolName, UnknownTool
from .mocks import mock_model_tools
from .spec import BuiltinBinding, ExternalBinding, ToolCallRecord, ToolSpec, parse_manifest
from .subproc import run_external
from .values import digest_args, summarize_value

_TYPE_CHECKS = {
    "str": lambda v: isinstance(v, str),
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "bool": lambda v: isinstance(v, bool),
    "list": lambda v: isinstance(v, list),
    "raster": lambda v: isinstance(v, Raster),
    "mask": lambda v: isinstance(v, Mask),
    "image": lambda v: isinstance(v, (str, Raster)),
    "any": lambda v: True,
}


def default_specs(include_mocks: bool = True) -> list[ToolSpec]:
    specs = data_tool_specs() + index_tool_specs()
    if include_mocks:
        specs += mock_model_tools()
    return specs


class Registry:
    def __init__(self, specs: Iterable[ToolSpec]):
        self._specs: dict[str, ToolSpec] = {}
        for spec in specs:
            if spec.name in self._specs:
                raise DuplicateToolName(f"tool {spec.name!r} registered twice")
            self._specs[spec.name] = spec

    def __contains__(self, name: str) -> bool:
        return name in self._specs

    def __len__(self) -> int:
        return len(self._specs)

    def names(self) -> list[str]:
        return sorted(self._specs)

    def get(self, name: str) -> ToolSpec:
        if name not in self._specs:
            raise UnknownTool(f"unknown tool {name!r}")
        return self._specs[name]

    def specs(self) -> list[ToolSpec]:
        return [self._specs[n] for n in self.names()]

    def arity(self, name: str) -> Optional[tuple[int, Optional[int]]]:
        return self.get(name).arity

    def with_overrides(self, *replacements: ToolSpec) -> "Registry":
        """A new registry with some tools replaced (for scripted failures)."""
        merged = dict(self._specs)
        for spec in replacements:
            merged[spec.name] = spec
        return Registry(merged.values())

    def _check_args(self, spec: ToolSpec, args: list) -> None:
        if spec.params is None:
            return
        lo, hi = spec.arity
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ArgumentMismatch(
                f"tool {spec.name!r} takes {lo if lo == hi else f'{lo}..{hi}'} "
                f"argument(s), got {len(args)}"
            )
        for param, value in zip(spec.params, args):
            if not _TYPE_CHECKS[param.type](value):
                raise ArgumentMismatch(
                    f"tool {spec.name!r} argument {param.name!r} expects "
                    f"{param.type}, got {summarize_value(value)}"
                )

    def invoke(self, name: str, args: list, ctx=None, calls: Optional[list] = None):
        """Dispatch one tool call, logging it whatever the outcome."""
        record = ToolCallRecord(
            tool=name,
            args_digest=digest_args(args),
            started_at=datetime.now(timezone.utc).isoformat(),
        )
        if calls is not None:
            calls.append(record)
        try:
            spec = self.get(name)
            self._check_args(spec, list(args))
            if isinstance(spec.binding, BuiltinBinding):
                result = spec.binding.fn(ctx, *args)
            else:
                result = run_external(spec.binding, name, list(args))
            record.status = "ok"
            record.output_summary = summarize_value(result)
            return result
        except Exception as exc:
            record.status = "error"
            record.error = str(exc)
            raise
        finally:
            record.finished_at = datetime.now(timezone.utc).isoformat()


def load_registry(
    manifest_dir: str | Path | None = None, include_mocks: bool = True
) -> Registry:
    """Builtins plus any external-tool manifests found in ``manifest_dir``."""
    specs = default_specs(include_mocks=include_mocks)
    if manifest_dir is not None:
        for path in sorted(Path(manifest_dir).glob("*.json")):
            specs.append(parse_manifest(path))
    return Registry(specs)


def _render_spec(spec: ToolSpec) -> str:
    lines = [f"## {spec.signature()}", f"Category: {spec.category}"]
    lines.append(f"General description: {spec.general_description}")
    lines.append(f"Technical description: {spec.technical_description}")
    if spec.supported_sensors is not None:
        lines.append("Supported sensors:")
        for s in spec.supported_sensors:
            bands = ", ".join(f"{k}={v}" for k, v in sorted(s.bands.items()))
            lines.append(f"  - {s.sensor}: bands {bands}; normalization: {s.normalization}")
    if spec.usage_example is not None:
        lines.append("Usage example:")
        for code_line in spec.usage_example.splitlines():
            lines.append(f"    {code_line}")
    if spec.training_datasets is not None:
        lines.append("Training datasets:")
        for t in spec.training_datasets:
            taxonomy = "; ".join(f"{k}={v}" for k, v in sorted(t.taxonomy.items()))
            lines.append(f"  - {t.name}: {taxonomy}")
    return "\n".join(lines)


def render_prompt_catalog(reg: Registry) -> str:
    """Deterministic text block describing every tool, sorted by name."""
    blocks = [_render_spec(spec) for spec in reg.specs()]
    return "# Available tools\n\n" + "\n\n".join(blocks) + "\n"
