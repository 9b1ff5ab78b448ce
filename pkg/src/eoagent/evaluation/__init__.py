"""Three-level evaluation: final answers, tool metrics, code-generation rates."""

from .answers import score_answer
from .metrics import (
    DegenerateBox,
    EmptyInput,
    LengthMismatch,
    ObbDetection,
    ShapeMismatch,
    binary_iou,
    map50,
    miou,
    obb_corners,
    obb_iou,
    top1_accuracy,
)
from .harness import (
    DatasetParseError,
    EvalQuestion,
    EvalReport,
    eval_final_answers,
    eval_llm_level,
    load_dataset,
)
from .report import render_report

__all__ = [
    "DatasetParseError",
    "DegenerateBox",
    "EmptyInput",
    "EvalQuestion",
    "EvalReport",
    "LengthMismatch",
    "ObbDetection",
    "ShapeMismatch",
    "binary_iou",
    "eval_final_answers",
    "eval_llm_level",
    "load_dataset",
    "map50",
    "miou",
    "obb_corners",
    "obb_iou",
    "render_report",
    "score_answer",
    "top1_accuracy",
]
