"""Dataset-driven evaluation: final answers per scenario, code-level rates."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from ..context import Limits
from ..controller import handle_query
from ..script.record import RunRecord
from .answers import score_answer

SCENARIOS = ("land_cover", "wildfire_burn", "wildfire_objects")


class DatasetParseError(Exception):
    pass


class EmptyInput(Exception):
    pass


@dataclass(frozen=True)
class EvalQuestion:
    id: str
    query: str
    expected: str
    scenario: str
    attachments: tuple[str, ...] = ()

    def __post_init__(self):
        if not str(self.expected):
            raise DatasetParseError(f"question {self.id}: empty expected answer")
        if self.scenario not in SCENARIOS:
            raise DatasetParseError(f"question {self.id}: unknown scenario {self.scenario!r}")


def load_dataset(path: str | Path) -> list[EvalQuestion]:
    """Read a JSON-lines dataset; attachment paths resolve against the file's directory."""
    path = Path(path)
    base = path.parent
    questions = []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DatasetParseError(str(exc)) from exc
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetParseError(f"{path}:{n}: {exc}") from exc
        try:
            questions.append(
                EvalQuestion(
                    id=str(raw["id"]),
                    query=raw["query"],
                    expected=str(raw["expected"]),
                    scenario=raw["scenario"],
                    attachments=tuple(
                        str((base / a).resolve()) for a in raw.get("attachments", ())
                    ),
                )
            )
        except KeyError as exc:
            raise DatasetParseError(f"{path}:{n}: field {exc} absent") from exc
    if not questions:
        raise DatasetParseError(f"{path}: dataset holds no questions")
    return questions


@dataclass
class QuestionVerdict:
    id: str
    scenario: str
    expected: str
    actual: str
    correct: bool
    outcome: str
    run_id: str


@dataclass
class FinalAnswerResult:
    per_scenario: dict[str, float]
    verdicts: list[QuestionVerdict]
    records: list[RunRecord] = field(default_factory=list)


def eval_final_answers(
    dataset: Union[str, Path, Sequence[EvalQuestion]],
    reg,
    backend,
    limits: Optional[Limits] = None,
    runs_dir: Optional[str] = None,
    max_retries: int = 1,
    catalog_dir: Optional[str] = None,
) -> FinalAnswerResult:
    """Run every question through the controller and score the printed answer."""
    if isinstance(dataset, (str, Path)):
        questions = load_dataset(dataset)
    else:
        questions = list(dataset)
    if not questions:
        raise DatasetParseError("dataset holds no questions")

    verdicts = []
    records = []
    totals: dict[str, list[int]] = {}
    for q in sorted(questions, key=lambda q: q.id):
        record = handle_query(
            reg,
            backend,
            q.query,
            attachments=q.attachments,
            limits=limits,
            max_retries=max_retries,
            catalog_dir=catalog_dir,
        )
        records.append(record)
        if runs_dir is not None:
            from ..script.record import save_run

            save_run(record, runs_dir)
        actual = record.printed[-1] if (record.outcome.kind == "success" and record.printed) else ""
        correct = bool(actual) and score_answer(
            q.expected, actual, exact_integer=(q.scenario == "wildfire_objects")
        )
        verdicts.append(
            QuestionVerdict(
                id=q.id,
                scenario=q.scenario,
                expected=q.expected,
                actual=actual,
                correct=correct,
                outcome=record.outcome.kind,
                run_id=record.run_id,
            )
        )
        bucket = totals.setdefault(q.scenario, [0, 0])
        bucket[0] += 1 if correct else 0
        bucket[1] += 1
    per_scenario = {s: c / n for s, (c, n) in sorted(totals.items())}
    return FinalAnswerResult(per_scenario=per_scenario, verdicts=verdicts, records=records)


def _record_fields(record) -> tuple[bool, bool]:
    if isinstance(record, RunRecord):
        valid = bool(record.verdict and record.verdict.calls_valid)
        success = record.outcome.kind == "success"
        return valid, success
    verdict = record.get("verdict") or {}
    valid = bool(verdict.get("calls_valid"))
    success = (record.get("outcome") or {}).get("kind") == "success"
    return valid, success


def eval_llm_level(records: Sequence) -> dict:
    """Code validity rate and execution success rate over run records."""
    if not records:
        raise EmptyInput("no run records")
    valid = 0
    success = 0
    for record in records:
        v, s = _record_fields(record)
        valid += 1 if v else 0
        success += 1 if s else 0
    n = len(records)
    return {
        "code_validity_rate": valid / n,
        "execution_success_rate": success / n,
    }


@dataclass
class EvalReport:
    """Joined view of the three evaluation levels."""

    final_answer_accuracy: dict[str, float] = field(default_factory=dict)
    tool_level: dict = field(default_factory=dict)
    llm_level: dict = field(default_factory=dict)
    per_question: list[dict] = field(default_factory=list)

    def __post_init__(self):
        for name, rate in list(self.final_answer_accuracy.items()) + list(self.llm_level.items()):
            if rate is not None and not (0.0 <= rate <= 1.0):
                raise ValueError(f"rate {name} out of [0, 1]: {rate}")

    def to_dict(self) -> dict:
        return {
            "final_answer_accuracy": dict(self.final_answer_accuracy),
            "tool_level": dict(self.tool_level),
            "llm_level": dict(self.llm_level),
            "per_question": list(self.per_question),
        }
