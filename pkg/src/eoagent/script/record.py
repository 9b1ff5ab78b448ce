"""Run records: the persisted audit log of one query.

A record carries everything needed to reproduce or audit a run: the
query, prompt digest, every generation attempt with its verdict, the
executed code, tool calls, printed output, artifacts, the outcome and
resource usage. Serialized as JSON under ``runs/<id>.json``.
"""

from __future__ import annotations

import json
import os
import tempfile
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from ..tools.spec import ToolCallRecord
from .validate import Verdict


def new_run_id() -> str:
    return uuid.uuid4().hex[:16]


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Attempt:
    raw_completion: str
    code: str
    verdict: Verdict

    def to_dict(self) -> dict:
        return {
            "raw_completion": self.raw_completion,
            "code": self.code,
            "verdict": self.verdict.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "Attempt":
        return Attempt(d["raw_completion"], d["code"], Verdict.from_dict(d["verdict"]))


@dataclass
class Outcome:
    kind: str  # success | validation_failure | runtime_error | backend_error
    message: Optional[str] = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message}

    @staticmethod
    def from_dict(d: dict) -> "Outcome":
        return Outcome(d["kind"], d.get("message"))


@dataclass
class Usage:
    steps: int = 0
    wall_ms: float = 0.0
    peak_value_bytes: int = 0

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "wall_ms": self.wall_ms,
            "peak_value_bytes": self.peak_value_bytes,
        }

    @staticmethod
    def from_dict(d: dict) -> "Usage":
        return Usage(d.get("steps", 0), d.get("wall_ms", 0.0), d.get("peak_value_bytes", 0))


@dataclass
class RunRecord:
    run_id: str = field(default_factory=new_run_id)
    query: str = ""
    prompt_digest: str = ""
    script: str = ""
    attempts: list[Attempt] = field(default_factory=list)
    verdict: Optional[Verdict] = None
    tool_calls: list[ToolCallRecord] = field(default_factory=list)
    printed: list[str] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)
    outcome: Outcome = field(default_factory=lambda: Outcome("success"))
    usage: Usage = field(default_factory=Usage)
    started_at: str = field(default_factory=utc_now)
    finished_at: str = ""

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "query": self.query,
            "prompt_digest": self.prompt_digest,
            "script": self.script,
            "attempts": [a.to_dict() for a in self.attempts],
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "tool_calls": [c.to_dict() for c in self.tool_calls],
            "printed": list(self.printed),
            "artifacts": list(self.artifacts),
            "outcome": self.outcome.to_dict(),
            "usage": self.usage.to_dict(),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @staticmethod
    def from_dict(d: dict) -> "RunRecord":
        return RunRecord(
            run_id=d["run_id"],
            query=d.get("query", ""),
            prompt_digest=d.get("prompt_digest", ""),
            script=d.get("script", ""),
            attempts=[Attempt.from_dict(a) for a in d.get("attempts", ())],
            verdict=Verdict.from_dict(d["verdict"]) if d.get("verdict") else None,
            tool_calls=[ToolCallRecord.from_dict(c) for c in d.get("tool_calls", ())],
            printed=list(d.get("printed", ())),
            artifacts=list(d.get("artifacts", ())),
            outcome=Outcome.from_dict(d["outcome"]),
            usage=Usage.from_dict(d.get("usage", {})),
            started_at=d.get("started_at", ""),
            finished_at=d.get("finished_at", ""),
        )


def save_run(record: RunRecord, runs_dir: str | Path) -> Path:
    """Persist a record atomically (write-temp-then-rename)."""
    runs_dir = Path(runs_dir)
    runs_dir.mkdir(parents=True, exist_ok=True)
    path = runs_dir / f"{record.run_id}.json"
    payload = (json.dumps(record.to_dict(), indent=2) + "\n").encode()
    fd, tmp = tempfile.mkstemp(dir=str(runs_dir), prefix=record.run_id + ".")
    with os.fdopen(fd, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)
    return path


def load_run(path: str | Path) -> RunRecord:
    return RunRecord.from_dict(json.loads(Path(path).read_text()))
