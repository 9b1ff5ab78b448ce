"""Builtin data tools: uploads, scene catalog, indices, geo operators, artifacts."""

from __future__ import annotations

import json
import re
from pathlib import Path

from .. import geo, indices
from ..raster import Mask, Raster, load_raster, save_mask, save_raster
from .catalog import LocalCatalog
from .errors import ToolExecutionError
from .spec import BuiltinBinding, ToolParam, ToolSpec

_SAFE_NAME_RE = re.compile(r"[^A-Za-z0-9._-]+")


def _data_tool(name, general, technical, fn, params, return_type) -> ToolSpec:
    return ToolSpec(
        name=name,
        category="data",
        general_description=general,
        technical_description=technical,
        binding=BuiltinBinding(fn),
        params=tuple(params),
        return_type=return_type,
    )


# --- uploads and local files -------------------------------------------------


def get_uploaded_image_path(ctx) -> str:
    if ctx is None or not ctx.uploads:
        raise ToolExecutionError("no uploaded image is attached to this query")
    for name, path in ctx.uploads.items():
        if name.lower().endswith(".png"):
            return str(path)
    return str(next(iter(ctx.uploads.values())))


def get_uploaded_file_path(ctx, name) -> str:
    if ctx is None or name not in (ctx.uploads or {}):
        raise ToolExecutionError(f"no uploaded file named {name!r}")
    return str(ctx.uploads[name])


def tool_load_raster(ctx, path) -> Raster:
    return load_raster(path)


def read_json_field(ctx, path, key):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ToolExecutionError(f"cannot read JSON file {path!r}: {exc}") from exc
    if not isinstance(doc, dict) or key not in doc:
        raise ToolExecutionError(f"field {key!r} absent from {path!r}")
    value = doc[key]
    if not isinstance(value, (bool, int, float, str, list)):
        raise ToolExecutionError(f"field {key!r} is not a scalar or list")
    return value


# --- scene catalog ------------------------------------------------------------


def _catalog(ctx) -> LocalCatalog:
    if ctx is None or not ctx.catalog_dir:
        raise ToolExecutionError("no scene catalog configured for this run")
    return LocalCatalog(ctx.catalog_dir)


def search_scenes(ctx, min_lon, min_lat, max_lon, max_lat, start_date, end_date, sensor=None):
    bounds = geo.GeoBounds(min_lon, min_lat, max_lon, max_lat, "EPSG:4326")
    return _catalog(ctx).search(bounds, str(start_date), str(end_date), sensor)


def fetch_scene(ctx, scene_id) -> Raster:
    return _catalog(ctx).fetch(scene_id)


# --- geospatial operators ------------------------------------------------------


def tool_reproject(ctx, raster, crs) -> Raster:
    return geo.reproject(raster, crs)


def tool_mosaic(ctx, rasters) -> Raster:
    if not isinstance(rasters, list) or not all(isinstance(r, Raster) for r in rasters):
        raise ToolExecutionError("mosaic expects a list of rasters")
    return geo.mosaic(rasters)


def tool_area_m2(ctx, mask, raster, class_id) -> float:
    if not isinstance(mask, Mask):
        raise ToolExecutionError("area_m2 expects a mask as its first argument")
    return geo.mask_area_m2(mask, raster.geotransform, raster.crs, int(class_id))


# --- artifacts ------------------------------------------------------------------


def _artifact_base(ctx, name: str) -> Path:
    if ctx is None or not ctx.artifacts_dir:
        raise ToolExecutionError("this run has no artifact directory")
    clean = _SAFE_NAME_RE.sub("_", str(name)).strip("._") or "artifact"
    out = Path(ctx.artifacts_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / clean


def tool_save_raster(ctx, raster, name) -> str:
    base = _artifact_base(ctx, name)
    save_raster(raster, base)
    ctx.artifacts.append(base.name)
    return str(base)


def tool_save_mask(ctx, mask, name) -> str:
    base = _artifact_base(ctx, name)
    save_mask(mask, base)
    ctx.artifacts.append(base.name)
    return str(base)


# --- spectral index tools --------------------------------------------------------

# NDSI's shortwave role defaults to SWIR1 here at the tool layer; the core
# operation itself never guesses and always takes an explicit mapping.
_INDEX_EXTRA_ROLE = {"NDSI": ("SWIR", "SWIR1")}


def _make_index_fn(kind: str):
    extra = _INDEX_EXTRA_ROLE.get(kind)

    def run(ctx, raster, band=None):
        if not isinstance(raster, Raster):
            raise ToolExecutionError(f"{kind.lower()} expects a raster")
        band_map = None
        if extra is not None:
            role, default = extra
            band_map = {role: band if band is not None else default}
        return indices.compute_index(kind, raster, band_map=band_map)

    return run


def index_tool_specs() -> list[ToolSpec]:
    specs = []
    for entry in indices.list_indices():
        kind = entry["kind"]
        params = [ToolParam("raster", "raster")]
        technical = (
            f"Input: raster with bands {', '.join(entry['required_bands'])} "
            "(reflectance in [0, 1]). Output: single-band raster; pixels with "
            "nodata input or a near-zero denominator are nodata."
        )
        if kind in _INDEX_EXTRA_ROLE:
            role, default = _INDEX_EXTRA_ROLE[kind]
            params.append(ToolParam("swir_band", "str", required=False))
            technical += (
                f" The {role} role reads band {default!r} unless a band name is "
                "given as the second argument."
            )
        if entry["parameter_defaults"]:
            rendered = ", ".join(f"{k}={v}" for k, v in sorted(entry["parameter_defaults"].items()))
            technical += f" Constants: {rendered}."
        specs.append(
            _data_tool(
                name=kind.lower(),
                general=entry["description"],
                technical=technical,
                fn=_make_index_fn(kind),
                params=params,
                return_type="raster",
            )
        )
    return specs


def data_tool_specs() -> list[ToolSpec]:
    return [
        _data_tool(
            "get_uploaded_image_path",
            "Path of the image uploaded with the current query.",
            "No arguments. Returns the filesystem path of the first uploaded "
            "image, ready to pass to a model tool.",
            get_uploaded_image_path,
            [],
            "str",
        ),
        _data_tool(
            "get_uploaded_file_path",
            "Path of an uploaded file selected by name.",
            "Input: the upload's file name. Returns its filesystem path.",
            get_uploaded_file_path,
            [ToolParam("name", "str")],
            "str",
        ),
        _data_tool(
            "load_raster",
            "Loads a raster from a sidecar file or an RGB PNG.",
            "Input: file path. PNG values are scaled to [0, 1].",
            tool_load_raster,
            [ToolParam("path", "str")],
            "raster",
        ),
        _data_tool(
            "read_json_field",
            "Reads one field from an uploaded JSON document.",
            "Inputs: file path and field name. Returns the field's value "
            "(scalar, string, or list).",
            read_json_field,
            [ToolParam("path", "str"), ToolParam("key", "str")],
            "any",
        ),
        _data_tool(
            "search_scenes",
            "Searches the scene catalog by area, date range, and sensor.",
            "Inputs: min_lon, min_lat, max_lon, max_lat (degrees, EPSG:4326), "
            "start_date and end_date (YYYY-MM-DD), optional sensor name. "
            "Returns matching scene ids sorted by date.",
            search_scenes,
            [
                ToolParam("min_lon", "number"),
                ToolParam("min_lat", "number"),
                ToolParam("max_lon", "number"),
                ToolParam("max_lat", "number"),
                ToolParam("start_date", "str"),
                ToolParam("end_date", "str"),
                ToolParam("sensor", "str", required=False),
            ],
            "list",
        ),
        _data_tool(
            "fetch_scene",
            "Fetches a catalog scene as a raster.",
            "Input: scene id from search_scenes. Returns the stored raster.",
            fetch_scene,
            [ToolParam("scene_id", "str")],
            "raster",
        ),
        _data_tool(
            "reproject",
            "Reprojects a raster between EPSG:4326 and EPSG:3857.",
            "Inputs: raster and target CRS code ('EPSG:4326' or 'EPSG:3857'). "
            "Nearest-neighbor resampling; ground resolution is preserved.",
            tool_reproject,
            [ToolParam("raster", "raster"), ToolParam("crs", "str")],
            "raster",
        ),
        _data_tool(
            "mosaic",
            "Merges grid-aligned rasters into one; earlier rasters win overlaps.",
            "Input: list of rasters sharing CRS, pixel size, and band set.",
            tool_mosaic,
            [ToolParam("rasters", "list")],
            "raster",
        ),
        _data_tool(
            "area_m2",
            "Ground area in square meters covered by one mask class.",
            "Inputs: mask, the raster it was derived from (for georeference), "
            "and the class id. Spherical earth model (authalic radius "
            "6371008.8 m); EPSG:3857 pixel areas are corrected by cos^2 of "
            "the row latitude.",
            tool_area_m2,
            [ToolParam("mask", "mask"), ToolParam("raster", "raster"), ToolParam("class_id", "int")],
            "float",
        ),
        _data_tool(
            "save_raster",
            "Saves a raster as a run artifact.",
            "Inputs: raster and artifact name. Returns the saved path.",
            tool_save_raster,
            [ToolParam("raster", "raster"), ToolParam("name", "str")],
            "str",
        ),
        _data_tool(
            "save_mask",
            "Saves a mask as a run artifact.",
            "Inputs: mask and artifact name. Returns the saved path.",
            tool_save_mask,
            [ToolParam("mask", "mask"), ToolParam("name", "str")],
            "str",
        ),
    ]
