"""Execution context and resource limits shared by the runtime and tools."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class Limits:
    """Hard caps enforced while a generated script runs."""

    max_steps: int = 1_000_000
    max_wall_s: float = 60.0
    max_value_bytes: int = 256 * 1024 * 1024
    max_tool_calls: int = 16


@dataclass
class ExecutionContext:
    """Per-run state visible to data tools: uploads, catalog, artifact sink."""

    uploads: dict[str, str] = field(default_factory=dict)
    catalog_dir: Optional[str] = None
    artifacts_dir: Optional[str] = None
    limits: Limits = field(default_factory=Limits)
    artifacts: list[str] = field(default_factory=list)
