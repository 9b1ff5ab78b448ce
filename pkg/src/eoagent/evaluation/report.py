"""Human-readable rendering of evaluation reports."""

from __future__ import annotations

from .harness import EvalReport


def _pct(x) -> str:
    if x is None:
        return "n/a"
    return f"{100.0 * x:.1f}"


def _rows(title: str, rows: list[tuple[str, str, str]]) -> list[str]:
    lines = [title, "-" * len(title)]
    width = max((len(r[0]) for r in rows), default=0)
    metric_width = max((len(r[1]) for r in rows), default=0)
    for name, metric, score in rows:
        lines.append(f"  {name.ljust(width)}  {metric.ljust(metric_width)}  {score}")
    return lines


def render_report(report: EvalReport) -> str:
    """Three blocks: final-answer accuracy, tool metrics, code-level rates."""
    sections: list[str] = []

    if report.final_answer_accuracy:
        rows = [
            (scenario.replace("_", " "), "accuracy (%)", _pct(rate))
            for scenario, rate in sorted(report.final_answer_accuracy.items())
        ]
        sections.append("\n".join(_rows("Final answers", rows)))

    if report.tool_level:
        rows = []
        labels = {
            "top1": "top-1 (%)",
            "miou": "mIoU (%)",
            "map50": "mAP@50 (%)",
            "burn_iou": "IoU (%)",
        }
        for key, value in sorted(report.tool_level.items()):
            if isinstance(value, dict):
                value = value.get("mean")
            rows.append((key, labels.get(key, key), _pct(value)))
        sections.append("\n".join(_rows("Tool level", rows)))

    if report.llm_level:
        rows = [
            (name.replace("_", " "), "rate (%)", _pct(rate))
            for name, rate in sorted(report.llm_level.items())
        ]
        sections.append("\n".join(_rows("LLM level", rows)))

    return "\n\n".join(sections) + "\n"
