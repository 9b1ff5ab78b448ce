"""Query orchestration: prompt assembly, code generation, validate, execute.

The controller holds the code-only contract: the model must reply with
runnable tool-script code and nothing else, and the program must print
its final result. Invalid generations get at most a configurable number
of diagnostic-augmented retries; every attempt lands in the run record.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .backends import BackendUnavailable, EmptyCompletion
from .context import ExecutionContext, Limits
from .script import (
    Attempt,
    Outcome,
    RunRecord,
    Script,
    ScriptSyntaxError,
    execute_script,
    parse_script,
    strip_code_fences,
    validate_calls,
)
from .script.record import new_run_id, utc_now
from .script.validate import syntax_failure
from .tools.registry import Registry, render_prompt_catalog

#: The two contract clauses every system prompt must state.
CODE_ONLY_CLAUSE = (
    "Respond with runnable code in the tool-script language only: no prose, "
    "no markdown, no explanations."
)
PRINT_RESULT_CLAUSE = "The program must print a final result."

DEFAULT_SYSTEM_TEXT = (
    "You are an Earth-Observation analyst that answers by writing programs.\n"
    f"{CODE_ONLY_CLAUSE}\n"
    f"{PRINT_RESULT_CLAUSE}\n"
    "The language supports assignments, calls to the tools listed below, "
    "list/number/string literals, arithmetic and comparison operators, "
    "`value in mask`, the methods .sum() .mean() .count(v), and the "
    "functions print, len, round, abs. No imports, loops, or definitions."
)

DEFAULT_MAX_RETRIES = 1


class EmptyQuery(Exception):
    pass


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    catalog_text: str
    user_query: str
    attachments: tuple[str, ...] = ()

    def user_message(self) -> str:
        if not self.attachments:
            return self.user_query
        listing = ", ".join(self.attachments)
        return (
            f"{self.user_query}\n"
            f"Uploaded files available through the upload data tools: {listing}"
        )

    def text(self) -> str:
        return "\n\n".join([self.system_text, self.catalog_text, self.user_message()])

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text().encode()).hexdigest()


def build_prompt(
    reg: Registry,
    query: str,
    attachments: Sequence[str] = (),
    system_text: str = DEFAULT_SYSTEM_TEXT,
) -> PromptBundle:
    """Deterministic prompt: contract text + rendered catalog + query."""
    if not query or not query.strip():
        raise EmptyQuery("query text must be nonempty")
    return PromptBundle(
        system_text=system_text,
        catalog_text=render_prompt_catalog(reg),
        user_query=query,
        attachments=tuple(attachments),
    )


def generate_code(backend, bundle: PromptBundle, feedback=None) -> tuple[Script, str]:
    """One backend call; returns the fence-stripped script plus the raw text."""
    raw = backend.complete(bundle, feedback=feedback)
    code = strip_code_fences(raw)
    if not code.strip():
        raise EmptyCompletion("backend returned no code")
    return Script(source=code, origin="llm"), raw


def _uploads_from(attachments: Sequence[str]) -> dict[str, str]:
    return {Path(a).name: str(a) for a in attachments}


def handle_query(
    reg: Registry,
    backend,
    query: str,
    attachments: Sequence[str] = (),
    limits: Optional[Limits] = None,
    ctx: Optional[ExecutionContext] = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
    run_id: Optional[str] = None,
    system_text: str = DEFAULT_SYSTEM_TEXT,
    catalog_dir: Optional[str] = None,
    artifacts_dir: Optional[str] = None,
) -> RunRecord:
    """Drive one query end to end; all failures land in the record's outcome."""
    record = RunRecord(run_id=run_id or new_run_id(), query=query)
    if ctx is None:
        ctx = ExecutionContext(
            uploads=_uploads_from(attachments),
            limits=limits or Limits(),
            catalog_dir=catalog_dir,
            artifacts_dir=artifacts_dir,
        )
    elif limits is not None:
        ctx.limits = limits

    try:
        bundle = build_prompt(reg, query, attachments)
    except EmptyQuery as exc:
        record.verdict = syntax_failure(str(exc))
        record.outcome = Outcome("validation_failure", str(exc))
        record.finished_at = utc_now()
        return record
    record.prompt_digest = bundle.digest

    feedback: Optional[list[str]] = None
    for _ in range(1 + max(0, max_retries)):
        try:
            script, raw = generate_code(backend, bundle, feedback=feedback)
        except EmptyCompletion as exc:
            verdict = syntax_failure(str(exc))
            record.attempts.append(Attempt(raw_completion="", code="", verdict=verdict))
            record.verdict = verdict
            feedback = [str(exc)]
            continue
        except BackendUnavailable as exc:
            record.outcome = Outcome("backend_error", str(exc))
            record.finished_at = utc_now()
            return record

        try:
            ast = parse_script(script)
            verdict = validate_calls(ast, reg)
        except ScriptSyntaxError as exc:
            ast = None
            verdict = syntax_failure(exc.message, exc.line, exc.col)

        record.attempts.append(
            Attempt(raw_completion=raw, code=script.source, verdict=verdict)
        )
        record.script = script.source
        record.verdict = verdict
        if verdict.calls_valid:
            result = execute_script(ast, reg, ctx=ctx, script_source=script.source)
            record.tool_calls = result.tool_calls
            record.printed = result.printed
            record.artifacts = result.artifacts
            record.outcome = result.outcome
            record.usage = result.usage
            record.finished_at = utc_now()
            return record
        feedback = [str(d) for d in verdict.diagnostics] or ["program failed validation"]

    record.outcome = Outcome(
        "validation_failure",
        "no valid program after "
        f"{len(record.attempts)} attempt(s); see attempt diagnostics",
    )
    record.finished_at = utc_now()
    return record
