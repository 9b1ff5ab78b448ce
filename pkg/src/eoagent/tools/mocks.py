"""Deterministic mock model tools.

Stand-ins for the GPU perception models: each is a pure function of the
image content (hashes and quantization, never wall-clock or RNG state),
so identical inputs always produce identical outputs and end-to-end
tests stay stable. They honor the same registry contract as real model
tools, including the full structured description.
"""

from __future__ import annotations

import hashlib
import math
import random

import numpy as np

from ..raster import Mask, Raster, load_raster
from .errors import ToolExecutionError
from .spec import BuiltinBinding, SensorSupport, ToolParam, ToolSpec, TrainingDataset

FLAIR2_TAXONOMY = {
    1: "building",
    2: "pervious surface",
    3: "impervious surface",
    4: "bare soil",
    5: "water",
    6: "coniferous",
    7: "deciduous",
    8: "brushwood",
    9: "vineyard",
    10: "herbaceous vegetation",
    11: "agricultural land",
    12: "plowed land",
    13: "others",
}

EUROSAT_TAXONOMY = {
    0: "annual crop",
    1: "forest",
    2: "herbaceous vegetation",
    3: "highway",
    4: "industrial",
    5: "pasture",
    6: "permanent crop",
    7: "residential",
    8: "river",
    9: "sea or lake",
}

VHR10_TAXONOMY = {
    0: "airplane",
    1: "ship",
    2: "storage tank",
    3: "baseball diamond",
    4: "tennis court",
    5: "basketball court",
    6: "ground track field",
    7: "harbor",
    8: "bridge",
    9: "vehicle",
}

BURN_TAXONOMY = {0: "unburned", 1: "burned"}

_RGB_SENSOR = SensorSupport(
    sensor="rgb",
    bands={"RED": "RED", "GREEN": "GREEN", "BLUE": "BLUE"},
    normalization="reflectance in [0, 1]; 8-bit PNG uploads are divided by 255",
)
_S2_SENSOR = SensorSupport(
    sensor="sentinel-2",
    bands={"RED": "B04", "GREEN": "B03", "BLUE": "B02", "NIR": "B08",
           "SWIR1": "B11", "SWIR2": "B12"},
    normalization="surface reflectance scaled to [0, 1]",
)


def _as_raster(image, ctx=None) -> Raster:
    if isinstance(image, Raster):
        return image
    if isinstance(image, str):
        return load_raster(image)
    raise ToolExecutionError(
        f"expected an image path or raster, got {type(image).__name__}"
    )


def _content_digest(r: Raster) -> bytes:
    # hash the decoded pixels, not the container bytes, so re-encoding
    # the same image never flips the result
    return hashlib.sha256(r.data.tobytes()).digest()


def mock_classification(ctx, image) -> int:
    r = _as_raster(image)
    return int.from_bytes(_content_digest(r)[:8], "big") % len(EUROSAT_TAXONOMY)


def segmentation_mask(r: Raster) -> Mask:
    intensity = r.data.mean(axis=0)
    classes = np.clip(np.floor(intensity * len(FLAIR2_TAXONOMY)), 0, 12).astype(np.int32) + 1
    return Mask(values=classes, legend=dict(FLAIR2_TAXONOMY))


def mock_segmentation(ctx, image) -> Mask:
    return segmentation_mask(_as_raster(image))


def mock_detection(ctx, image, class_id=None) -> list:
    r = _as_raster(image)
    data = r.data
    if float(data.max()) == float(data.min()):
        return []  # featureless image: nothing to detect
    rng = random.Random(_content_digest(r))
    count = rng.randint(2, 6)
    boxes = []
    for _ in range(count):
        w = rng.uniform(0.08, 0.3) * r.width
        h = rng.uniform(0.08, 0.3) * r.height
        cx = rng.uniform(0.15, 0.85) * r.width
        cy = rng.uniform(0.15, 0.85) * r.height
        angle = rng.uniform(-math.pi / 2 + 1e-6, math.pi / 2)
        cls = rng.randrange(len(VHR10_TAXONOMY))
        score = round(rng.uniform(0.5, 0.99), 4)
        boxes.append([round(cx, 2), round(cy, 2), round(w, 2), round(h, 2),
                      round(angle, 4), cls, score])
    if class_id is not None:
        boxes = [b for b in boxes if b[5] == class_id]
    return boxes


BURN_THRESHOLD = 0.5


def mock_burn_scar(ctx, image) -> Mask:
    r = _as_raster(image)
    band = r.band("NIR") if "NIR" in r.band_names else r.data[0]
    burned = band > BURN_THRESHOLD
    if r.nodata is not None:
        burned = burned & (band != np.float32(r.nodata))
    return Mask(values=burned, legend=dict(BURN_TAXONOMY))


def mock_model_tools() -> list[ToolSpec]:
    """The four deterministic model tools with full description blocks."""
    image_param = ToolParam("image", "image")
    return [
        ToolSpec(
            name="dofa_classification_tool",
            category="model",
            general_description=(
                "Classifies a whole scene into one of ten land-use classes."
            ),
            technical_description=(
                "Takes an image path or raster and returns the integer class id. "
                "Deterministic mock: the id is the content hash of the decoded "
                "pixels modulo the class count."
            ),
            binding=BuiltinBinding(mock_classification),
            params=(image_param,),
            return_type="int",
            supported_sensors=(_RGB_SENSOR, _S2_SENSOR),
            usage_example=(
                "image_path = get_uploaded_image_path()\n"
                "scene_class = dofa_classification_tool(image_path)\n"
                "print(scene_class)"
            ),
            training_datasets=(TrainingDataset("EuroSAT", dict(EUROSAT_TAXONOMY)),),
            resources="cpu",
        ),
        ToolSpec(
            name="dofa_segmentation_tool",
            category="model",
            general_description=(
                "Segments an aerial or satellite image into 13 land-cover classes, "
                "one class id per pixel."
            ),
            technical_description=(
                "Takes an image path or raster and returns a class-id mask with the "
                "13-class legend attached. Deterministic mock: each pixel's class is "
                "its mean-band intensity quantized into 13 bins (ids 1..13)."
            ),
            binding=BuiltinBinding(mock_segmentation),
            params=(image_param,),
            return_type="mask",
            supported_sensors=(_RGB_SENSOR, _S2_SENSOR),
            usage_example=(
                "uploaded_image_path = get_uploaded_image_path()\n"
                "segmented_mask = dofa_segmentation_tool(uploaded_image_path)\n"
                "brushwood_present = 8 in segmented_mask\n"
                "print(brushwood_present)"
            ),
            training_datasets=(TrainingDataset("FLAIR-2", dict(FLAIR2_TAXONOMY)),),
            resources="gpu",
        ),
        ToolSpec(
            name="object_detection_tool",
            category="model",
            general_description=(
                "Detects objects and returns oriented bounding boxes, optionally "
                "filtered to one class."
            ),
            technical_description=(
                "Takes an image path or raster plus an optional class id; returns a "
                "list of detections [cx, cy, w, h, angle_rad, class_id, score]. "
                "Deterministic mock: boxes come from a generator seeded by the image "
                "content digest; a featureless (constant) image yields no detections."
            ),
            binding=BuiltinBinding(mock_detection),
            params=(image_param, ToolParam("class_id", "int", required=False)),
            return_type="list",
            supported_sensors=(_RGB_SENSOR,),
            usage_example=(
                "image_path = get_uploaded_image_path()\n"
                "vehicles = object_detection_tool(image_path, 9)\n"
                "print(len(vehicles))"
            ),
            training_datasets=(TrainingDataset("NWPU VHR-10", dict(VHR10_TAXONOMY)),),
            resources="gpu",
        ),
        ToolSpec(
            name="burn_scar_tool",
            category="model",
            general_description=(
                "Maps burn scars: returns a boolean mask of burned pixels."
            ),
            technical_description=(
                "Takes an image path or raster and returns a boolean mask "
                "(1 = burned). Deterministic mock: thresholds the NIR band "
                f"(first band when NIR is absent) at {BURN_THRESHOLD}."
            ),
            binding=BuiltinBinding(mock_burn_scar),
            params=(image_param,),
            return_type="mask",
            supported_sensors=(_S2_SENSOR,),
            usage_example=(
                "scene = fetch_scene(\"scene_id\")\n"
                "burned = burn_scar_tool(scene)\n"
                "print(area_m2(burned, scene, 1))"
            ),
            training_datasets=(TrainingDataset("HLS Burn Scars", dict(BURN_TAXONOMY)),),
            resources="gpu",
        ),
    ]


def failing_tool(template: ToolSpec, message: str) -> ToolSpec:
    """A copy of a tool spec whose binding always fails with ``message``.

    Used to script execution-time failures (e.g. out-of-memory) that are
    distinct from invalid code.
    """

    def fail(ctx, *args):
        raise ToolExecutionError(message)

    return ToolSpec(
        name=template.name,
        category=template.category,
        general_description=template.general_description,
        technical_description=template.technical_description,
        binding=BuiltinBinding(fail),
        params=template.params,
        return_type=template.return_type,
        supported_sensors=template.supported_sensors,
        usage_example=template.usage_example,
        training_datasets=template.training_datasets,
        resources=template.resources,
    )
