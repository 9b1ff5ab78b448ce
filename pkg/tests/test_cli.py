import json

import numpy as np
import pytest
from click.testing import CliRunner

from eoagent.cli import main
from eoagent.fixturegen import BRUSHWOOD_QUERY
from eoagent.raster import Mask, save_mask


@pytest.fixture()
def runner():
    return CliRunner()


def test_tools_list(runner):
    result = runner.invoke(main, ["tools", "list"])
    assert result.exit_code == 0
    assert "ndvi(raster: raster) -> raster" in result.output
    assert "dofa_segmentation_tool" in result.output


def test_tools_list_full_catalog(runner):
    result = runner.invoke(main, ["tools", "list", "--full"])
    assert result.exit_code == 0
    assert "# Available tools" in result.output
    assert "Training datasets:" in result.output


def test_query_roundtrip_and_runs_show(runner, fixtures_root, tmp_path):
    runs_dir = tmp_path / "runs"
    result = runner.invoke(
        main,
        [
            "query",
            "--text", BRUSHWOOD_QUERY,
            "--attach", str(fixtures_root / "uploads" / "img_brushwood.png"),
            "--completions", str(fixtures_root / "completions" / "scripted.json"),
            "--runs-dir", str(runs_dir),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "success" in result.output
    assert "True" in result.output

    run_id = next(runs_dir.glob("*.json")).stem
    listed = runner.invoke(main, ["runs", "list", "--runs-dir", str(runs_dir)])
    assert run_id in listed.output
    shown = runner.invoke(main, ["runs", "show", run_id, "--runs-dir", str(runs_dir)])
    assert shown.exit_code == 0
    assert json.loads(shown.output)["run_id"] == run_id


def test_query_backend_unavailable(runner, fixtures_root):
    result = runner.invoke(
        main,
        [
            "query",
            "--text", "a query nobody scripted",
            "--completions", str(fixtures_root / "completions" / "scripted.json"),
        ],
    )
    assert result.exit_code != 0
    assert "backend_error" in result.output or "backend unavailable" in result.output


def test_eval_final_cli(runner, fixtures_root, tmp_path):
    result = runner.invoke(
        main,
        [
            "eval", "final",
            "--dataset", str(fixtures_root / "datasets" / "wildfire.jsonl"),
            "--completions", str(fixtures_root / "completions" / "scripted.json"),
            "--catalog-dir", str(fixtures_root / "scenes"),
            "--runs-dir", str(tmp_path / "runs"),
            "--json",
        ],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["final_answer_accuracy"]["wildfire_burn"] == 1.0
    assert report["final_answer_accuracy"]["wildfire_objects"] == 1.0
    assert (tmp_path / "runs").exists()


def test_eval_llm_cli(runner, fixtures_root, tmp_path):
    runner.invoke(
        main,
        [
            "eval", "final",
            "--dataset", str(fixtures_root / "datasets" / "wildfire.jsonl"),
            "--completions", str(fixtures_root / "completions" / "scripted.json"),
            "--catalog-dir", str(fixtures_root / "scenes"),
            "--runs-dir", str(tmp_path / "runs"),
        ],
    )
    result = runner.invoke(main, ["eval", "llm", "--runs", str(tmp_path / "runs")])
    assert result.exit_code == 0, result.output
    assert "code validity rate:     1.0000" in result.output
    assert "execution success rate: 1.0000" in result.output


def test_eval_tools_cls(runner, tmp_path):
    (tmp_path / "pred.json").write_text(json.dumps([1, 2, 3]))
    (tmp_path / "truth.json").write_text(json.dumps([1, 2, 4]))
    result = runner.invoke(
        main,
        ["eval", "tools", "--task", "cls",
         "--pred", str(tmp_path / "pred.json"), "--truth", str(tmp_path / "truth.json")],
    )
    assert result.exit_code == 0
    assert "0.6667" in result.output


def test_eval_tools_seg_and_burn(runner, tmp_path):
    pred = Mask(values=np.array([[1, 1], [0, 0]]))
    truth = Mask(values=np.array([[1, 0], [1, 0]]))
    save_mask(pred, tmp_path / "pred")
    save_mask(truth, tmp_path / "truth")
    result = runner.invoke(
        main,
        ["eval", "tools", "--task", "seg", "--num-classes", "2",
         "--pred", str(tmp_path / "pred.json"), "--truth", str(tmp_path / "truth.json")],
    )
    assert result.exit_code == 0
    assert "mIoU: 0.3333" in result.output

    bp = Mask(values=np.array([[True, True, False]]))
    bt = Mask(values=np.array([[True, False, True]]))
    save_mask(bp, tmp_path / "bp")
    save_mask(bt, tmp_path / "bt")
    result = runner.invoke(
        main,
        ["eval", "tools", "--task", "burn",
         "--pred", str(tmp_path / "bp.json"), "--truth", str(tmp_path / "bt.json")],
    )
    assert result.exit_code == 0
    assert "0.3333" in result.output


def test_eval_tools_det(runner, tmp_path):
    truth = {"image": "x.png", "boxes": [
        {"cx": 0, "cy": 0, "w": 2, "h": 2, "angle": 0.0, "class": 0},
        {"cx": 9, "cy": 9, "w": 2, "h": 2, "angle": 0.0, "class": 0},
    ]}
    pred = {"image": "x.png", "boxes": [
        {"cx": 0, "cy": 0, "w": 2, "h": 2, "angle": 0.0, "class": 0, "score": 0.9},
        {"cx": 50, "cy": 50, "w": 2, "h": 2, "angle": 0.0, "class": 0, "score": 0.8},
    ]}
    (tmp_path / "pred.json").write_text(json.dumps(pred))
    (tmp_path / "truth.json").write_text(json.dumps(truth))
    result = runner.invoke(
        main,
        ["eval", "tools", "--task", "det",
         "--pred", str(tmp_path / "pred.json"), "--truth", str(tmp_path / "truth.json")],
    )
    assert result.exit_code == 0
    assert "mAP@50: 0.5000" in result.output


def test_fixtures_make(runner, tmp_path):
    result = runner.invoke(main, ["fixtures", "make", "--dir", str(tmp_path / "fx")])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "fx" / "datasets" / "land_cover.jsonl").exists()
    assert (tmp_path / "fx" / "scenes" / "catalog.json").exists()
    assert (tmp_path / "fx" / "completions" / "scripted.json").exists()
