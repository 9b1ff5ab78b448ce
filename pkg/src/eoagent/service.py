"""HTTP backend: query handling, run inspection, tool catalog, uploads.

Synchronous /query runs the full pipeline and persists the record before
responding; GET endpoints are side-effect free and byte-stable. All
configuration comes from environment variables (see ServiceConfig).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Request, Response
from pydantic import BaseModel

from .backends import RemoteBackend, ScriptedBackend
from .context import ExecutionContext, Limits
from .controller import DEFAULT_MAX_RETRIES, handle_query
from .script.record import RunRecord, load_run, new_run_id, save_run
from .tools.registry import Registry, load_registry, render_prompt_catalog

ENV_PREFIX = "EOAGENT_"
DEFAULT_UPLOAD_CAP = 64 * 1024 * 1024
ALLOWED_UPLOAD_SUFFIXES = (".png", ".json", ".jsonl", ".bin")


@dataclass
class ServiceConfig:
    registry: Registry
    backend: object
    runs_dir: Path
    uploads_dir: Path
    catalog_dir: Optional[str] = None
    limits: Limits = field(default_factory=Limits)
    upload_cap_bytes: int = DEFAULT_UPLOAD_CAP
    max_retries: int = DEFAULT_MAX_RETRIES

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        """Build from EOAGENT_* variables; see the README for the full list."""
        runs_dir = Path(os.environ.get(ENV_PREFIX + "RUNS_DIR", "runs"))
        uploads_dir = Path(os.environ.get(ENV_PREFIX + "UPLOADS_DIR", "uploads"))
        manifest_dir = os.environ.get(ENV_PREFIX + "MANIFEST_DIR")
        registry = load_registry(manifest_dir)
        backend_kind = os.environ.get(ENV_PREFIX + "BACKEND", "scripted")
        if backend_kind == "remote":
            backend = RemoteBackend.from_env()
        else:
            completions = os.environ.get(ENV_PREFIX + "COMPLETIONS")
            backend = (
                ScriptedBackend.from_file(completions) if completions else ScriptedBackend({})
            )
        return cls(
            registry=registry,
            backend=backend,
            runs_dir=runs_dir,
            uploads_dir=uploads_dir,
            catalog_dir=os.environ.get(ENV_PREFIX + "CATALOG_DIR"),
            upload_cap_bytes=int(
                os.environ.get(ENV_PREFIX + "UPLOAD_CAP_BYTES", DEFAULT_UPLOAD_CAP)
            ),
            max_retries=int(os.environ.get(ENV_PREFIX + "MAX_RETRIES", DEFAULT_MAX_RETRIES)),
        )


class LimitsIn(BaseModel):
    max_steps: Optional[int] = None
    max_wall_s: Optional[float] = None
    max_value_bytes: Optional[int] = None
    max_tool_calls: Optional[int] = None

    def merge(self, base: Limits) -> Limits:
        return Limits(
            max_steps=self.max_steps or base.max_steps,
            max_wall_s=self.max_wall_s or base.max_wall_s,
            max_value_bytes=self.max_value_bytes or base.max_value_bytes,
            max_tool_calls=self.max_tool_calls or base.max_tool_calls,
        )


class QueryIn(BaseModel):
    query: str
    attachments: list[str] = []
    limits: Optional[LimitsIn] = None


def _artifact_entries(record: RunRecord) -> list[dict]:
    return [
        {
            "name": name,
            "header_url": f"/runs/{record.run_id}/artifacts/{name}.json",
            "data_url": f"/runs/{record.run_id}/artifacts/{name}.bin",
        }
        for name in record.artifacts
    ]


def _query_response(record: RunRecord) -> dict:
    return {
        "run_id": record.run_id,
        "code": record.script,
        "verdict": record.verdict.to_dict() if record.verdict else None,
        "printed": list(record.printed),
        "artifacts": _artifact_entries(record),
        "outcome": record.outcome.to_dict(),
    }


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    app = FastAPI(title="eoagent", version="0.1.0")
    app.state.config = config
    config.runs_dir.mkdir(parents=True, exist_ok=True)
    config.uploads_dir.mkdir(parents=True, exist_ok=True)

    @app.post("/query")
    def post_query(body: QueryIn):
        if not body.query.strip():
            raise HTTPException(status_code=422, detail="query text must be nonempty")
        attachments = []
        for ref in body.attachments:
            path = config.uploads_dir / Path(ref).name
            if not path.exists():
                raise HTTPException(status_code=400, detail=f"unknown attachment {ref!r}")
            attachments.append(str(path))
        limits = body.limits.merge(config.limits) if body.limits else config.limits
        run_id = new_run_id()
        ctx = ExecutionContext(
            uploads={Path(a).name: a for a in attachments},
            catalog_dir=config.catalog_dir,
            artifacts_dir=str(config.runs_dir / f"{run_id}.artifacts"),
            limits=limits,
        )
        record = handle_query(
            config.registry,
            config.backend,
            body.query,
            attachments=attachments,
            ctx=ctx,
            max_retries=config.max_retries,
            run_id=run_id,
        )
        save_run(record, config.runs_dir)
        if record.outcome.kind == "backend_error":
            raise HTTPException(status_code=502, detail=record.outcome.message)
        return _query_response(record)

    @app.get("/runs")
    def list_runs():
        summaries = []
        for path in config.runs_dir.glob("*.json"):
            try:
                raw = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError):
                continue
            summaries.append(
                {
                    "run_id": raw.get("run_id", path.stem),
                    "query": raw.get("query", ""),
                    "outcome": (raw.get("outcome") or {}).get("kind", "unknown"),
                    "started_at": raw.get("started_at", ""),
                }
            )
        summaries.sort(key=lambda s: (s["started_at"], s["run_id"]), reverse=True)
        return summaries

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        path = config.runs_dir / f"{Path(run_id).name}.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no run {run_id!r}")
        # byte-stable: return the persisted file exactly as written
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.get("/runs/{run_id}/artifacts/{filename}")
    def get_artifact(run_id: str, filename: str):
        path = config.runs_dir / f"{Path(run_id).name}.artifacts" / Path(filename).name
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no artifact {filename!r}")
        media = "application/json" if path.suffix == ".json" else "application/octet-stream"
        return Response(content=path.read_bytes(), media_type=media)

    @app.get("/tools")
    def get_tools():
        return {
            "catalog_text": render_prompt_catalog(config.registry),
            "tools": [spec.to_public_dict() for spec in config.registry.specs()],
        }

    @app.post("/uploads")
    async def post_upload(request: Request, name: str = Query(...)):
        clean = Path(name).name
        if not clean or Path(clean).suffix.lower() not in ALLOWED_UPLOAD_SUFFIXES:
            raise HTTPException(
                status_code=415,
                detail=f"unsupported format; allowed: {', '.join(ALLOWED_UPLOAD_SUFFIXES)}",
            )
        declared = request.headers.get("content-length")
        if declared and int(declared) > config.upload_cap_bytes:
            raise HTTPException(status_code=413, detail="upload exceeds the size cap")
        body = await request.body()
        if len(body) > config.upload_cap_bytes:
            raise HTTPException(status_code=413, detail="upload exceeds the size cap")
        (config.uploads_dir / clean).write_bytes(body)
        return {"ref": clean, "bytes": len(body)}

    return app
