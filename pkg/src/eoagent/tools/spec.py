"""Tool specifications: the structured description template plus bindings.

Every registered tool carries a general description and a technical
description; model tools additionally declare supported sensors (with
expected input normalization), a usage example, and the training
datasets with their taxonomies. The technical description embeds a
machine-checkable argument schema so the validator can check arity.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Union

from .errors import ManifestParseError

_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")

#: loose runtime types for schema checking
ARG_TYPES = ("str", "int", "float", "number", "bool", "list", "raster", "mask", "image", "any")


@dataclass(frozen=True)
class ToolParam:
    name: str
    type: str = "any"
    required: bool = True

    def __post_init__(self):
        if self.type not in ARG_TYPES:
            raise ValueError(f"unknown argument type {self.type!r}")


@dataclass(frozen=True)
class SensorSupport:
    sensor: str
    bands: dict[str, str] = field(default_factory=dict)  # canonical -> sensor channel
    normalization: str = "reflectance in [0, 1]"


@dataclass(frozen=True)
class TrainingDataset:
    name: str
    taxonomy: dict[int, str] = field(default_factory=dict)


@dataclass(frozen=True)
class BuiltinBinding:
    fn: Callable  # called as fn(ctx, *args)


@dataclass(frozen=True)
class ExternalBinding:
    cmd: tuple[str, ...]
    timeout_s: float = 30.0


Binding = Union[BuiltinBinding, ExternalBinding]


@dataclass(frozen=True)
class ToolSpec:
    name: str
    category: str  # data | model
    general_description: str
    technical_description: str
    binding: Binding
    params: Optional[tuple[ToolParam, ...]] = None
    return_type: Optional[str] = None
    supported_sensors: Optional[tuple[SensorSupport, ...]] = None
    usage_example: Optional[str] = None
    training_datasets: Optional[tuple[TrainingDataset, ...]] = None
    resources: Optional[str] = None  # opaque dispatch hint, e.g. "gpu"

    def __post_init__(self):
        if not _NAME_RE.match(self.name):
            raise ValueError(f"tool name {self.name!r} must match [a-z][a-z0-9_]*")
        if self.category not in ("data", "model"):
            raise ValueError(f"tool category must be data or model, got {self.category!r}")
        if self.category == "model":
            for part in ("supported_sensors", "usage_example", "training_datasets"):
                if getattr(self, part) is None:
                    raise ValueError(f"model tool {self.name!r} must provide {part}")
        else:
            for part in ("supported_sensors", "usage_example", "training_datasets"):
                if getattr(self, part) is not None:
                    raise ValueError(f"data tool {self.name!r} must not provide {part}")

    @property
    def arity(self) -> Optional[tuple[int, Optional[int]]]:
        """(min, max) argument count when a schema is declared, else None."""
        if self.params is None:
            return None
        required = sum(1 for p in self.params if p.required)
        return required, len(self.params)

    def signature(self) -> str:
        if self.params is None:
            args = "..."
        else:
            rendered = [
                f"{p.name}: {p.type}" + ("" if p.required else " (optional)")
                for p in self.params
            ]
            args = ", ".join(rendered)
        ret = f" -> {self.return_type}" if self.return_type else ""
        return f"{self.name}({args}){ret}"

    def to_public_dict(self) -> dict:
        """JSON view for the /tools endpoint: no callable internals."""
        d: dict[str, Any] = {
            "name": self.name,
            "category": self.category,
            "signature": self.signature(),
            "general_description": self.general_description,
            "technical_description": self.technical_description,
            "binding": "builtin" if isinstance(self.binding, BuiltinBinding) else "external",
        }
        if self.params is not None:
            d["params"] = [
                {"name": p.name, "type": p.type, "required": p.required} for p in self.params
            ]
        if self.return_type:
            d["return_type"] = self.return_type
        if self.supported_sensors is not None:
            d["supported_sensors"] = [
                {"sensor": s.sensor, "bands": dict(s.bands), "normalization": s.normalization}
                for s in self.supported_sensors
            ]
        if self.usage_example is not None:
            d["usage_example"] = self.usage_example
        if self.training_datasets is not None:
            d["training_datasets"] = [
                {"name": t.name, "taxonomy": {str(k): v for k, v in sorted(t.taxonomy.items())}}
                for t in self.training_datasets
            ]
        if self.resources:
            d["resources"] = self.resources
        return d


@dataclass
class ToolCallRecord:
    """One audit entry per tool invocation, success or failure."""

    tool: str
    args_digest: str = ""
    started_at: str = ""
    finished_at: str = ""
    status: str = "ok"  # ok | error
    error: Optional[str] = None
    output_summary: str = ""

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "args_digest": self.args_digest,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "status": self.status,
            "error": self.error,
            "output_summary": self.output_summary,
        }

    @staticmethod
    def from_dict(d: dict) -> "ToolCallRecord":
        return ToolCallRecord(
            tool=d["tool"],
            args_digest=d.get("args_digest", ""),
            started_at=d.get("started_at", ""),
            finished_at=d.get("finished_at", ""),
            status=d.get("status", "ok"),
            error=d.get("error"),
            output_summary=d.get("output_summary", ""),
        )


def _parse_params(raw, file: str) -> tuple[ToolParam, ...]:
    params = []
    for entry in raw:
        if not isinstance(entry, dict) or "name" not in entry:
            raise ManifestParseError(file, f"bad argument entry {entry!r}")
        try:
            params.append(
                ToolParam(entry["name"], entry.get("type", "any"), entry.get("required", True))
            )
        except ValueError as exc:
            raise ManifestParseError(file, str(exc)) from None
    return tuple(params)


def parse_manifest(path: str | Path) -> ToolSpec:
    """Read one external-tool manifest file.

    ``technical_description`` may be a plain string or an object
    ``{text, args, returns}`` carrying the argument schema. ``cmd``
    entries may contain ``{manifest_dir}``, substituted at load time;
    a literal ``python`` resolves to the current interpreter.
    """
    path = Path(path)
    name = str(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestParseError(name, str(exc)) from exc
    if not isinstance(raw, dict):
        raise ManifestParseError(name, "manifest is not a JSON object")
    for required in ("name", "category", "general_description", "technical_description", "binding"):
        if required not in raw:
            raise ManifestParseError(name, f"field {required!r} absent")

    tech = raw["technical_description"]
    params = None
    return_type = None
    if isinstance(tech, dict):
        text = tech.get("text", "")
        if "args" in tech:
            params = _parse_params(tech["args"], name)
        return_type = tech.get("returns")
    else:
        text = str(tech)

    binding_raw = raw["binding"]
    if not isinstance(binding_raw, dict) or binding_raw.get("type") != "external":
        raise ManifestParseError(name, "binding must be {type: 'external', cmd, timeout_s}")
    cmd_raw = binding_raw.get("cmd")
    if not isinstance(cmd_raw, list) or not cmd_raw:
        raise ManifestParseError(name, "binding.cmd must be a nonempty list")
    cmd = []
    for part in cmd_raw:
        part = str(part).replace("{manifest_dir}", str(path.parent))
        if part == "python":
            part = sys.executable
        cmd.append(part)
    binding = ExternalBinding(tuple(cmd), float(binding_raw.get("timeout_s", 30.0)))

    sensors = None
    if raw.get("supported_sensors") is not None:
        sensors = tuple(
            SensorSupport(
                s.get("sensor", "unknown"),
                {str(k): str(v) for k, v in s.get("bands", {}).items()},
                s.get("normalization", "reflectance in [0, 1]"),
            )
            for s in raw["supported_sensors"]
        )
    datasets = None
    if raw.get("training_datasets") is not None:
        datasets = tuple(
            TrainingDataset(
                t.get("name", "unknown"),
                {int(k): str(v) for k, v in t.get("taxonomy", {}).items()},
            )
            for t in raw["training_datasets"]
        )

    try:
        return ToolSpec(
            name=raw["name"],
            category=raw["category"],
            general_description=str(raw["general_description"]),
            technical_description=text,
            binding=binding,
            params=params,
            return_type=return_type,
            supported_sensors=sensors,
            usage_example=raw.get("usage_example"),
            training_datasets=datasets,
            resources=raw.get("resources"),
        )
    except ValueError as exc:
        raise ManifestParseError(name, str(exc)) from None
