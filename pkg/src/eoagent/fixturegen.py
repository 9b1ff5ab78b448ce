"""Deterministic fixture builder: scenes, uploads, datasets, completions.

Everything is a pure function of constants and seeded RNG, so
regenerating the fixtures reproduces them exactly. Expected answers are
computed by running the mock tools directly on the generated inputs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import geo
from .backends import query_digest
from .raster import Raster, load_raster, save_raster
from .tools.mocks import FLAIR2_TAXONOMY, mock_burn_scar, mock_detection, segmentation_mask

SCENE_BANDS = ("RED", "GREEN", "BLUE", "NIR", "SWIR1", "SWIR2")

PRESENCE_CODE = (
    "uploaded_image_path = get_uploaded_image_path()\n"
    "segmented_mask = dofa_segmentation_tool(uploaded_image_path)\n"
    "present = {class_id} in segmented_mask\n"
    "print(present)"
)

BRUSHWOOD_QUERY = "Are there areas of brushwood in this uploaded image?"
BRUSHWOOD_CODE = (
    "uploaded_image_path = get_uploaded_image_path()\n"
    "segmented_mask = dofa_segmentation_tool(uploaded_image_path)\n"
    "brushwood_present = 8 in segmented_mask\n"
    "print(brushwood_present)"
)

AGRI_QUERY = "List agricultural areas in the uploaded image."
AGRI_CODE = (
    "uploaded_image_path = get_uploaded_image_path()\n"
    "segmented_mask = dofa_segmentation_tool(uploaded_image_path)\n"
    "agricultural_areas = (segmented_mask == 11).sum()\n"
    "print(agricultural_areas)"
)


def _write_png(path: Path, gray: np.ndarray) -> None:
    from PIL import Image

    rgb = np.stack([gray, gray, gray], axis=2).astype(np.uint8)
    Image.fromarray(rgb, "RGB").save(path)


def _patched(size: int, background: int, patch_value: int | None, lo: int = 8, hi: int = 20):
    img = np.full((size, size), background, dtype=np.uint8)
    if patch_value is not None:
        img[lo:hi, lo:hi] = patch_value
    return img


def _scene(green, swir1, nir, origin, pixel, crs) -> Raster:
    h, w = green.shape
    planes = {
        "RED": np.full((h, w), 0.15, dtype=np.float32),
        "GREEN": green,
        "BLUE": np.full((h, w), 0.1, dtype=np.float32),
        "NIR": nir,
        "SWIR1": swir1,
        "SWIR2": np.clip(swir1 * 0.8, 0.0, 1.0),
    }
    data = np.stack([planes[b] for b in SCENE_BANDS]).astype(np.float32)
    gt = (origin[0], pixel, 0.0, origin[1], 0.0, -pixel)
    return Raster(data=data, band_names=SCENE_BANDS, geotransform=gt, crs=crs)


def _make_scenes(root: Path) -> None:
    scenes_dir = root / "scenes"
    scenes_dir.mkdir(parents=True, exist_ok=True)
    entries = []

    def flat(shape, value):
        return np.full(shape, value, dtype=np.float32)

    # alpine winter scene: bright green band + dark shortwave inside the patch
    green = flat((24, 24), 0.2)
    swir1 = flat((24, 24), 0.35)
    green[4:14, 4:14] = 0.8
    swir1[4:14, 4:14] = 0.05
    alpine_2025 = _scene(green, swir1, flat((24, 24), 0.3), (7.6, 46.4), 0.01, "EPSG:4326")

    alpine_2024 = _scene(
        flat((24, 24), 0.25), flat((24, 24), 0.4), flat((24, 24), 0.35),
        (7.6, 46.4), 0.01, "EPSG:4326",
    )
    plains_2025 = _scene(
        flat((24, 24), 0.3), flat((24, 24), 0.25), flat((24, 24), 0.6),
        (2.0, 48.8), 0.01, "EPSG:4326",
    )

    nir = flat((32, 32), 0.2)
    nir[10:18, 8:24] = 0.8  # burn signature
    fire_2025 = _scene(
        flat((32, 32), 0.3), flat((32, 32), 0.3), nir,
        (500000.0, 300000.0), 10.0, "EPSG:3857",
    )

    for scene_id, raster, date, sensor in (
        ("alpine_2025", alpine_2025, "2025-01-15", "sentinel-2"),
        ("alpine_2024", alpine_2024, "2024-08-05", "sentinel-2"),
        ("plains_2025", plains_2025, "2025-06-10", "sentinel-2"),
        ("fire_2025", fire_2025, "2025-01-20", "sentinel-2"),
    ):
        save_raster(raster, scenes_dir / scene_id)
        bounds = geo.raster_bounds(raster)
        entries.append(
            {
                "id": scene_id,
                "path": f"{scene_id}.json",
                "sensor": sensor,
                "date": date,
                "bounds": {
                    "min_x": bounds.min_x,
                    "min_y": bounds.min_y,
                    "max_x": bounds.max_x,
                    "max_y": bounds.max_y,
                    "crs": bounds.crs,
                },
            }
        )
    (scenes_dir / "catalog.json").write_text(json.dumps({"scenes": entries}, indent=2) + "\n")


#: gray values chosen so the mock segmenter's 13-bin quantization lands on
#: the class each image is named after (value/255*13 -> bin)
_CLASS_GRAY = {1: 10, 5: 90, 8: 140, 11: 204}


def _make_uploads(root: Path) -> None:
    uploads = root / "uploads"
    uploads.mkdir(parents=True, exist_ok=True)
    _write_png(uploads / "img_brushwood.png", _patched(32, 60, _CLASS_GRAY[8]))
    _write_png(uploads / "img_water.png", _patched(32, 10, _CLASS_GRAY[5]))
    _write_png(uploads / "img_agri.png", _patched(32, 60, _CLASS_GRAY[11]))
    mixed = np.full((32, 32), 10, dtype=np.uint8)
    mixed[:16, 16:] = _CLASS_GRAY[5]
    mixed[16:, :16] = _CLASS_GRAY[8]
    mixed[16:, 16:] = _CLASS_GRAY[11]
    _write_png(uploads / "img_mixed.png", mixed)
    _write_png(uploads / "img_plain.png", _patched(32, 10, None))
    _write_png(uploads / "img_blank.png", _patched(32, 128, None))
    rng = np.random.default_rng(7)
    _write_png(uploads / "img_vehicles.png", rng.integers(0, 256, (32, 32), dtype=np.uint8))
    (uploads / "claims_fire_2025.json").write_text(
        json.dumps(
            {
                "event": "wildfire",
                "period": "2025-01",
                "location": {"lon": -118.52062, "lat": 34.04871},
                "total_damage_usd": 2512000,
                "parcels": 12,
            },
            indent=2,
        )
        + "\n"
    )


def _land_cover_questions(root: Path) -> tuple[list[dict], dict[str, str]]:
    labels = {5: "water", 8: "brushwood", 11: "agricultural land", 1: "buildings"}
    images = ["img_brushwood.png", "img_water.png", "img_agri.png", "img_mixed.png", "img_plain.png"]
    questions = []
    completions = {}
    n = 0
    for image in images:
        mask = segmentation_mask(load_raster(root / "uploads" / image))
        present = set(int(v) for v in np.unique(mask.values))
        for class_id, label in sorted(labels.items()):
            n += 1
            query = f"Is there {label} in the uploaded image {image}?"
            questions.append(
                {
                    "id": f"lc_{n:03d}",
                    "query": query,
                    "attachments": [f"../uploads/{image}"],
                    "expected": "True" if class_id in present else "False",
                    "scenario": "land_cover",
                }
            )
            completions[query] = PRESENCE_CODE.format(class_id=class_id)

    # the worked brushwood example, verbatim generated code
    questions.append(
        {
            "id": "lc_fig_brushwood",
            "query": BRUSHWOOD_QUERY,
            "attachments": ["../uploads/img_brushwood.png"],
            "expected": "True",
            "scenario": "land_cover",
        }
    )
    completions[BRUSHWOOD_QUERY] = BRUSHWOOD_CODE

    # a completion that violates the code-only contract (prose)
    prose_query = "Describe the uploaded image img_plain.png in detail."
    questions.append(
        {
            "id": "lc_invalid",
            "query": prose_query,
            "attachments": ["../uploads/img_plain.png"],
            "expected": "uniform bare area",
            "scenario": "land_cover",
        }
    )
    completions[prose_query] = "The image shows a uniform area without notable features."

    # a well-formed program that checks the wrong class id
    wrong_query = "Can you see open water in the uploaded image img_water.png?"
    questions.append(
        {
            "id": "lc_wrong",
            "query": wrong_query,
            "attachments": ["../uploads/img_water.png"],
            "expected": "True",
            "scenario": "land_cover",
        }
    )
    completions[wrong_query] = PRESENCE_CODE.format(class_id=9)
    return questions, completions


def _wildfire_questions(root: Path) -> tuple[list[dict], dict[str, str]]:
    questions = []
    completions = {}

    fire = load_raster(root / "scenes" / "fire_2025")
    burned = mock_burn_scar(None, fire)
    burned_area = geo.mask_area_m2(burned, fire.geotransform, fire.crs, 1)

    q = "Is there burn damage visible in scene fire_2025?"
    questions.append(
        {
            "id": "wf_b01",
            "query": q,
            "attachments": [],
            "expected": "True",
            "scenario": "wildfire_burn",
        }
    )
    completions[q] = (
        'scene = fetch_scene("fire_2025")\n'
        "burned = burn_scar_tool(scene)\n"
        "print(1 in burned)"
    )

    q = "How many square meters burned in scene fire_2025?"
    questions.append(
        {
            "id": "wf_b02",
            "query": q,
            "attachments": [],
            "expected": repr(burned_area),
            "scenario": "wildfire_burn",
        }
    )
    completions[q] = (
        'scene = fetch_scene("fire_2025")\n'
        "burned = burn_scar_tool(scene)\n"
        "burned_area = area_m2(burned, scene, 1)\n"
        "print(burned_area)"
    )

    q = (
        "What was the total damage in terms of dollar amount during the fire "
        "described by the uploaded insurance file claims_fire_2025.json?"
    )
    questions.append(
        {
            "id": "wf_b03",
            "query": q,
            "attachments": ["../uploads/claims_fire_2025.json"],
            "expected": "2512000",
            "scenario": "wildfire_burn",
        }
    )
    completions[q] = (
        'claims_path = get_uploaded_file_path("claims_fire_2025.json")\n'
        'damage = read_json_field(claims_path, "total_damage_usd")\n'
        "print(damage)"
    )

    q = "How many insured parcels are listed in the uploaded insurance file claims_fire_2025.json?"
    questions.append(
        {
            "id": "wf_b04",
            "query": q,
            "attachments": ["../uploads/claims_fire_2025.json"],
            "expected": "12",
            "scenario": "wildfire_burn",
        }
    )
    completions[q] = (
        'claims_path = get_uploaded_file_path("claims_fire_2025.json")\n'
        'parcels = read_json_field(claims_path, "parcels")\n'
        "print(parcels)"
    )

    vehicles = load_raster(root / "uploads" / "img_vehicles.png")
    all_boxes = mock_detection(None, vehicles)
    count_code = (
        "image_path = get_uploaded_image_path()\n"
        "detections = object_detection_tool(image_path{filter})\n"
        "print(len(detections))"
    )
    for qid, label, class_id in (
        ("wf_o01", "objects", None),
        ("wf_o02", "vehicles", 9),
        ("wf_o03", "airplanes", 0),
    ):
        q = f"How many {label} are detected in the uploaded image img_vehicles.png?"
        expected = len(all_boxes) if class_id is None else sum(1 for b in all_boxes if b[5] == class_id)
        questions.append(
            {
                "id": qid,
                "query": q,
                "attachments": ["../uploads/img_vehicles.png"],
                "expected": str(expected),
                "scenario": "wildfire_objects",
            }
        )
        completions[q] = count_code.format(filter="" if class_id is None else f", {class_id}")

    q = "Are any objects detected in the uploaded image img_blank.png?"
    questions.append(
        {
            "id": "wf_o04",
            "query": q,
            "attachments": ["../uploads/img_blank.png"],
            "expected": "False",
            "scenario": "wildfire_objects",
        }
    )
    completions[q] = (
        "image_path = get_uploaded_image_path()\n"
        "detections = object_detection_tool(image_path)\n"
        "print(len(detections) > 0)"
    )
    return questions, completions


_EXTERNAL_SEGMENTER = '''#!/usr/bin/env python
"""External segmentation tool speaking the stdin/stdout JSON protocol."""

import json
import sys
import tempfile

from eoagent.raster import load_raster, save_mask
from eoagent.tools.mocks import segmentation_mask
from eoagent.tools.values import decode_value


def main() -> int:
    request = json.loads(sys.stdin.read())
    try:
        args = [decode_value(a) for a in request.get("args", [])]
        image = args[0]
        raster = load_raster(image) if isinstance(image, str) else image
        mask = segmentation_mask(raster)
        out_dir = tempfile.mkdtemp(prefix="ext_segmenter_")
        base = out_dir + "/mask"
        save_mask(mask, base)
        print(json.dumps({"status": "ok", "value": {"$kind": "mask", "path": base}}))
        return 0
    except Exception as exc:
        print(json.dumps({"status": "error", "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
'''


def _make_external_tool(root: Path) -> None:
    tools_dir = root / "tools"
    tools_dir.mkdir(parents=True, exist_ok=True)
    (tools_dir / "external_segmenter.py").write_text(_EXTERNAL_SEGMENTER)
    manifests = root / "manifests"
    manifests.mkdir(parents=True, exist_ok=True)
    manifest = {
        "name": "external_segmentation_tool",
        "category": "model",
        "general_description": "Out-of-process land-cover segmentation over the subprocess protocol.",
        "technical_description": {
            "text": "Takes an image path or raster; returns a 13-class mask by sidecar reference.",
            "args": [{"name": "image", "type": "image"}],
            "returns": "mask",
        },
        "supported_sensors": [
            {
                "sensor": "rgb",
                "bands": {"RED": "RED", "GREEN": "GREEN", "BLUE": "BLUE"},
                "normalization": "reflectance in [0, 1]; 8-bit PNG divided by 255",
            }
        ],
        "usage_example": "mask = external_segmentation_tool(get_uploaded_image_path())\nprint(8 in mask)",
        "training_datasets": [
            {"name": "FLAIR-2", "taxonomy": {str(k): v for k, v in FLAIR2_TAXONOMY.items()}}
        ],
        "binding": {
            "type": "external",
            "cmd": ["python", "{manifest_dir}/../tools/external_segmenter.py"],
            "timeout_s": 60,
        },
    }
    (manifests / "external_segmentation_tool.json").write_text(
        json.dumps(manifest, indent=2) + "\n"
    )


def make_fixtures(root: str | Path) -> Path:
    """Build the full fixture tree under ``root`` and return it."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    _make_scenes(root)
    _make_uploads(root)
    _make_external_tool(root)

    lc_questions, completions = _land_cover_questions(root)
    wf_questions, wf_completions = _wildfire_questions(root)
    completions.update(wf_completions)
    completions[AGRI_QUERY] = AGRI_CODE

    datasets = root / "datasets"
    datasets.mkdir(parents=True, exist_ok=True)
    (datasets / "land_cover.jsonl").write_text(
        "".join(json.dumps(q) + "\n" for q in lc_questions)
    )
    (datasets / "wildfire.jsonl").write_text(
        "".join(json.dumps(q) + "\n" for q in wf_questions)
    )

    comp_dir = root / "completions"
    comp_dir.mkdir(parents=True, exist_ok=True)
    keyed = {query_digest(q): code for q, code in completions.items()}
    (comp_dir / "scripted.json").write_text(json.dumps(keyed, indent=2, sort_keys=True) + "\n")
    # the query->code map too, for human inspection
    (comp_dir / "scripted_queries.json").write_text(
        json.dumps(completions, indent=2, sort_keys=True) + "\n"
    )
    return root
