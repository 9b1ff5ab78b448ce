"""Command-line entrypoints: serve, query, tools, runs, eval, fixtures."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .backends import BackendUnavailable, RemoteBackend, ScriptedBackend
from .context import Limits
from .controller import handle_query
from .evaluation import (
    EvalReport,
    binary_iou,
    eval_final_answers,
    eval_llm_level,
    map50,
    miou,
    render_report,
    top1_accuracy,
)
from .evaluation.metrics import ObbDetection
from .raster import load_mask
from .script.record import load_run, save_run
from .tools.registry import load_registry, render_prompt_catalog


def _build_backend(backend: str, completions: str | None):
    if backend == "remote":
        return RemoteBackend.from_env()
    if not completions:
        raise click.UsageError("--completions is required with the scripted backend")
    return ScriptedBackend.from_file(completions)


def _registry(manifest_dir: str | None):
    return load_registry(manifest_dir)


@click.group()
def main():
    """Earth-Observation assistant runtime."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, envvar="EOAGENT_PORT")
def serve(host: str, port: int):
    """Run the HTTP backend (configuration via EOAGENT_* variables)."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


@main.command()
@click.option("--text", required=True, help="The natural-language query.")
@click.option("--attach", "attachments", multiple=True, type=click.Path(exists=True))
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted",
              show_default=True)
@click.option("--completions", type=click.Path(exists=True),
              help="Scripted-backend fixture file (query digest -> code).")
@click.option("--manifest-dir", type=click.Path(exists=True), default=None)
@click.option("--catalog-dir", type=click.Path(exists=True), default=None)
@click.option("--runs-dir", type=click.Path(), default="runs", show_default=True)
@click.option("--retries", default=1, show_default=True)
def query(text, attachments, backend, completions, manifest_dir, catalog_dir, runs_dir, retries):
    """Run one query end to end and print the outcome."""
    reg = _registry(manifest_dir)
    try:
        llm = _build_backend(backend, completions)
        record = handle_query(
            reg,
            llm,
            text,
            attachments=[str(a) for a in attachments],
            max_retries=retries,
            catalog_dir=catalog_dir,
            artifacts_dir=str(Path(runs_dir) / "pending.artifacts"),
        )
    except BackendUnavailable as exc:
        raise click.ClickException(f"backend unavailable: {exc}")
    if record.artifacts:
        artifacts_dir = Path(runs_dir) / f"{record.run_id}.artifacts"
        (Path(runs_dir) / "pending.artifacts").rename(artifacts_dir)
    path = save_run(record, runs_dir)
    click.echo(f"run {record.run_id} -> {record.outcome.kind}")
    if record.outcome.message:
        click.echo(f"  {record.outcome.message}")
    for line in record.printed:
        click.echo(line)
    click.echo(f"record: {path}")
    if record.outcome.kind == "backend_error":
        raise SystemExit(1)


@main.group()
def tools():
    """Inspect the tool registry."""


@tools.command("list")
@click.option("--manifest-dir", type=click.Path(exists=True), default=None)
@click.option("--full", is_flag=True, help="Print the rendered prompt catalog.")
def tools_list(manifest_dir, full):
    reg = _registry(manifest_dir)
    if full:
        click.echo(render_prompt_catalog(reg), nl=False)
        return
    for spec in reg.specs():
        click.echo(f"{spec.signature()}  [{spec.category}]")


@main.group()
def runs():
    """Inspect persisted run records."""


@runs.command("list")
@click.option("--runs-dir", type=click.Path(exists=True), default="runs", show_default=True)
def runs_list(runs_dir):
    entries = []
    for path in Path(runs_dir).glob("*.json"):
        try:
            record = load_run(path)
        except (ValueError, KeyError):
            continue
        entries.append(record)
    entries.sort(key=lambda r: (r.started_at, r.run_id), reverse=True)
    for r in entries:
        click.echo(f"{r.run_id}  {r.outcome.kind:<18}  {r.query[:60]}")


@runs.command("show")
@click.argument("run_id")
@click.option("--runs-dir", type=click.Path(exists=True), default="runs", show_default=True)
def runs_show(run_id, runs_dir):
    path = Path(runs_dir) / f"{run_id}.json"
    if not path.exists():
        raise click.ClickException(f"no run {run_id!r} in {runs_dir}")
    click.echo(path.read_text(), nl=False)


@main.group(name="eval")
def eval_group():
    """Three-level evaluation protocol."""


@eval_group.command("final")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted",
              show_default=True)
@click.option("--completions", type=click.Path(exists=True))
@click.option("--manifest-dir", type=click.Path(exists=True), default=None)
@click.option("--catalog-dir", type=click.Path(exists=True), default=None)
@click.option("--runs-dir", type=click.Path(), default=None,
              help="Persist every run record for audit.")
@click.option("--json", "as_json", is_flag=True)
def eval_final(dataset, backend, completions, manifest_dir, catalog_dir, runs_dir, as_json):
    """Final-answer accuracy per scenario over a question dataset."""
    reg = _registry(manifest_dir)
    llm = _build_backend(backend, completions)
    result = eval_final_answers(
        dataset, reg, llm, runs_dir=runs_dir, catalog_dir=catalog_dir
    )
    llm_rates = eval_llm_level(result.records)
    report = EvalReport(
        final_answer_accuracy=result.per_scenario,
        llm_level=llm_rates,
        per_question=[v.__dict__ for v in result.verdicts],
    )
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        click.echo(render_report(report), nl=False)


def _load_labels(path: str) -> list[int]:
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, list):
        raise click.ClickException(f"{path}: expected a JSON list of class ids")
    return [int(x) for x in raw]


def _load_boxes(path: str) -> list[ObbDetection]:
    raw = json.loads(Path(path).read_text())
    boxes = []
    for b in raw.get("boxes", []):
        boxes.append(
            ObbDetection(
                cx=b["cx"], cy=b["cy"], w=b["w"], h=b["h"],
                angle=b.get("angle", 0.0), class_id=int(b.get("class", 0)),
                score=b.get("score"),
            )
        )
    return boxes


@eval_group.command("tools")
@click.option("--task", required=True, type=click.Choice(["cls", "seg", "det", "burn"]))
@click.option("--pred", required=True, type=click.Path(exists=True))
@click.option("--truth", required=True, type=click.Path(exists=True))
@click.option("--num-classes", default=16, show_default=True, help="Class universe for seg.")
def eval_tools(task, pred, truth, num_classes):
    """Tool-level metric over prediction/ground-truth files."""
    if task == "cls":
        score = top1_accuracy(_load_labels(pred), _load_labels(truth))
        click.echo(f"top-1 accuracy: {score:.4f}")
    elif task == "seg":
        result = miou(load_mask(pred), load_mask(truth), num_classes)
        for c, iou in sorted(result["per_class"].items()):
            click.echo(f"  class {c}: IoU {iou:.4f}")
        click.echo(f"mIoU: {result['mean']:.4f}")
    elif task == "det":
        result = map50(_load_boxes(pred), _load_boxes(truth))
        mean = result["mean"]
        click.echo(f"mAP@50: {'n/a' if mean is None else f'{mean:.4f}'}")
    else:
        score = binary_iou(load_mask(pred), load_mask(truth))
        click.echo(f"IoU (burned): {score:.4f}")


@eval_group.command("llm")
@click.option("--runs", "runs_dir", required=True, type=click.Path(exists=True))
def eval_llm(runs_dir):
    """Code validity and execution success rates over recorded runs."""
    records = []
    for path in sorted(Path(runs_dir).glob("*.json")):
        try:
            records.append(json.loads(path.read_text()))
        except (OSError, json.JSONDecodeError):
            continue
    if not records:
        raise click.ClickException(f"no run records under {runs_dir}")
    rates = eval_llm_level(records)
    click.echo(f"code validity rate:     {rates['code_validity_rate']:.4f}")
    click.echo(f"execution success rate: {rates['execution_success_rate']:.4f}")


@main.group()
def fixtures():
    """Demo fixtures: scenes, uploads, datasets, scripted completions."""


@fixtures.command("make")
@click.option("--dir", "target", default="fixtures", show_default=True, type=click.Path())
def fixtures_make(target):
    from .fixturegen import make_fixtures

    root = make_fixtures(target)
    click.echo(f"fixtures written under {root}")


if __name__ == "__main__":
    sys.exit(main())
