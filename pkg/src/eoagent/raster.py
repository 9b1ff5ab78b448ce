"""Georeferenced rasters, class masks, and the sidecar file format.

A raster is an immutable stack of float32 band planes plus the affine
geotransform and CRS that place pixels on the ground. Persistence is a
two-file sidecar: ``<name>.json`` (header) next to ``<name>.bin`` (raw
little-endian float32, band-sequential, row-major), which round-trips
bit-exactly. 8-bit PNGs are accepted for RGB uploads and scaled to [0, 1].
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

SUPPORTED_CRS = ("EPSG:4326", "EPSG:3857")

#: Canonical band vocabulary used by index formulas and tool descriptions.
CANONICAL_BANDS = ("RED", "GREEN", "BLUE", "NIR", "SWIR1", "SWIR2", "NIR900", "NIR970")

#: Sentinel written when a derived raster needs a nodata value but its
#: source defines none. Index outputs and mosaic gaps use it.
DEFAULT_NODATA = -9999.0

Geotransform = tuple[float, float, float, float, float, float]


class RasterError(Exception):
    """Base class for raster construction and I/O failures."""


class MissingFile(RasterError):
    pass


class MalformedHeader(RasterError):
    pass


class SizeMismatch(RasterError):
    pass


class IoFailure(RasterError):
    pass


class UnknownBand(RasterError):
    pass


class EmptySelection(RasterError):
    pass


class OutOfBounds(RasterError):
    pass


class AllNodata(RasterError):
    pass


def pixel_to_world(gt: Geotransform, col: float, row: float) -> tuple[float, float]:
    """Map a pixel (col, row) corner through the affine geotransform."""
    x = gt[0] + col * gt[1] + row * gt[2]
    y = gt[3] + col * gt[4] + row * gt[5]
    return x, y


@dataclass(frozen=True)
class Raster:
    """Immutable multi-band raster.

    ``data`` is float32 with shape (bands, height, width); planes hold
    reflectance (typically [0, 1]) or class ids for label rasters.
    Only north-up geotransforms (pixel_w > 0, pixel_h < 0, no rotation)
    are accepted.
    """

    data: np.ndarray
    band_names: tuple[str, ...]
    geotransform: Geotransform = (0.0, 1.0, 0.0, 0.0, 0.0, -1.0)
    crs: str = "EPSG:3857"
    nodata: Optional[float] = None

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3:
            raise RasterError(f"raster data must be 2-D or 3-D, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        names = tuple(self.band_names)
        object.__setattr__(self, "band_names", names)
        if len(names) != arr.shape[0]:
            raise RasterError(
                f"{len(names)} band names for {arr.shape[0]} band planes"
            )
        if len(set(names)) != len(names):
            raise RasterError("duplicate band names")
        if self.crs not in SUPPORTED_CRS:
            raise RasterError(f"unsupported CRS {self.crs!r}")
        gt = tuple(float(v) for v in self.geotransform)
        if len(gt) != 6:
            raise RasterError("geotransform must have 6 elements")
        if gt[2] != 0.0 or gt[4] != 0.0:
            raise RasterError("rotated geotransforms are not supported")
        if not (gt[1] > 0 and gt[5] < 0):
            raise RasterError("only north-up rasters (pixel_w > 0, pixel_h < 0) accepted")
        object.__setattr__(self, "geotransform", gt)
        if self.nodata is not None:
            nd = float(self.nodata)
            if not math.isfinite(nd):
                raise RasterError("nodata must be finite")
            object.__setattr__(self, "nodata", nd)

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def band_count(self) -> int:
        return self.data.shape[0]

    def band(self, name: str) -> np.ndarray:
        """Return one band plane (read-only view) by canonical name."""
        try:
            i = self.band_names.index(name)
        except ValueError:
            raise UnknownBand(f"band {name!r} not in {list(self.band_names)}") from None
        return self.data[i]

    def __repr__(self):  # numpy payload elided on purpose
        return f"<raster {self.band_count}x{self.height}x{self.width} {self.crs}>"


@dataclass(frozen=True)
class Mask:
    """Per-pixel class ids (or booleans) with an optional id -> label legend.

    The value flowing between segmentation-style tools and area/statistics
    operators; carries no georeference of its own.
    """

    values: np.ndarray
    legend: Optional[dict[int, str]] = None

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 2:
            raise RasterError(f"mask values must be 2-D, got shape {arr.shape}")
        if arr.dtype == bool:
            arr = np.ascontiguousarray(arr)
        else:
            arr = np.ascontiguousarray(arr.astype(np.int32))
            if arr.size and arr.min() < 0:
                raise RasterError("mask class ids must be nonnegative")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        if self.legend is not None:
            legend = {int(k): str(v) for k, v in self.legend.items()}
            present = set(int(v) for v in np.unique(arr))
            missing = present - set(legend)
            if missing:
                raise RasterError(f"legend missing labels for class ids {sorted(missing)}")
            object.__setattr__(self, "legend", legend)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def is_boolean(self) -> bool:
        return self.values.dtype == bool

    def __repr__(self):
        return f"<mask {self.height}x{self.width}>"


def _strip_sidecar_suffix(path: str | Path) -> Path:
    p = Path(path)
    if p.suffix in (".json", ".bin"):
        return p.with_suffix("")
    return p


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def save_raster(r: Raster, path: str | Path) -> None:
    """Write ``<path>.json`` + ``<path>.bin`` (f32le, band-sequential)."""
    base = _strip_sidecar_suffix(path)
    header: dict = {
        "width": r.width,
        "height": r.height,
        "bands": list(r.band_names),
        "crs": r.crs,
        "geotransform": list(r.geotransform),
        "dtype": "f32le",
        "layout": "band-sequential",
    }
    if r.nodata is not None:
        header["nodata"] = r.nodata
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    _atomic_write(base.with_suffix(".json"), (json.dumps(header, indent=2) + "\n").encode())
    _atomic_write(base.with_suffix(".bin"), r.data.astype("<f4").tobytes())


def save_mask(m: Mask, path: str | Path) -> None:
    """Write a mask sidecar: ``kind: mask`` header + i32le payload."""
    base = _strip_sidecar_suffix(path)
    header: dict = {
        "kind": "mask",
        "width": m.width,
        "height": m.height,
        "dtype": "i32le",
        "layout": "row-major",
    }
    if m.is_boolean:
        header["boolean"] = True
    if m.legend is not None:
        header["legend"] = {str(k): v for k, v in sorted(m.legend.items())}
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    _atomic_write(base.with_suffix(".json"), (json.dumps(header, indent=2) + "\n").encode())
    _atomic_write(base.with_suffix(".bin"), m.values.astype("<i4").tobytes())


def _read_header(base: Path) -> dict:
    header_path = base.with_suffix(".json")
    if not header_path.exists():
        raise MissingFile(str(header_path))
    try:
        header = json.loads(header_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedHeader(f"{header_path}: {exc}") from exc
    if not isinstance(header, dict):
        raise MalformedHeader(f"{header_path}: header is not a JSON object")
    return header


def _require(header: dict, key: str, kinds: tuple[type, ...]):
    if key not in header:
        raise MalformedHeader(f"header field {key!r} absent")
    value = header[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise MalformedHeader(f"header field {key!r} ill-typed: {value!r}")
    return value


def _read_payload(base: Path, expected_len: int, dtype: str) -> np.ndarray:
    bin_path = base.with_suffix(".bin")
    if not bin_path.exists():
        raise MissingFile(str(bin_path))
    raw = bin_path.read_bytes()
    if len(raw) != expected_len * 4:
        raise SizeMismatch(
            f"{bin_path}: payload holds {len(raw)} bytes, header implies {expected_len * 4}"
        )
    return np.frombuffer(raw, dtype=dtype)


def _load_png(path: Path) -> Raster:
    from PIL import Image

    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float32) / 255.0
    except OSError as exc:
        raise MalformedHeader(f"{path}: not a decodable image ({exc})") from exc
    data = np.moveaxis(arr, 2, 0)
    # Uploads carry no georeference; use a 1 m Web Mercator pixel grid.
    return Raster(
        data=data,
        band_names=("RED", "GREEN", "BLUE"),
        geotransform=(0.0, 1.0, 0.0, 0.0, 0.0, -1.0),
        crs="EPSG:3857",
    )


def load_raster(path: str | Path) -> Raster:
    """Load a sidecar raster (or an 8-bit RGB PNG scaled by 1/255)."""
    p = Path(path)
    if p.suffix.lower() == ".png":
        if not p.exists():
            raise MissingFile(str(p))
        return _load_png(p)
    base = _strip_sidecar_suffix(p)
    header = _read_header(base)
    if header.get("kind") not in (None, "raster"):
        raise MalformedHeader(f"{base}.json: kind {header.get('kind')!r} is not a raster")
    width = _require(header, "width", (int,))
    height = _require(header, "height", (int,))
    bands = _require(header, "bands", (list,))
    if not bands or not all(isinstance(b, str) for b in bands):
        raise MalformedHeader("header field 'bands' must be a nonempty list of names")
    crs = _require(header, "crs", (str,))
    gt = _require(header, "geotransform", (list,))
    if len(gt) != 6 or not all(isinstance(v, (int, float)) for v in gt):
        raise MalformedHeader("header field 'geotransform' must hold 6 numbers")
    if _require(header, "dtype", (str,)) != "f32le":
        raise MalformedHeader(f"unsupported dtype {header['dtype']!r}")
    if _require(header, "layout", (str,)) != "band-sequential":
        raise MalformedHeader(f"unsupported layout {header['layout']!r}")
    nodata = header.get("nodata")
    if nodata is not None and (isinstance(nodata, bool) or not isinstance(nodata, (int, float))):
        raise MalformedHeader(f"header field 'nodata' ill-typed: {nodata!r}")
    if width <= 0 or height <= 0:
        raise MalformedHeader("width and height must be positive")
    flat = _read_payload(base, width * height * len(bands), "<f4")
    data = flat.reshape(len(bands), height, width)
    try:
        return Raster(
            data=data,
            band_names=tuple(bands),
            geotransform=tuple(gt),
            crs=crs,
            nodata=None if nodata is None else float(nodata),
        )
    except RasterError as exc:
        raise MalformedHeader(f"{base}.json: {exc}") from exc


def load_mask(path: str | Path) -> Mask:
    """Load a mask sidecar written by :func:`save_mask`."""
    base = _strip_sidecar_suffix(Path(path))
    header = _read_header(base)
    if header.get("kind") != "mask":
        raise MalformedHeader(f"{base}.json: not a mask sidecar")
    width = _require(header, "width", (int,))
    height = _require(header, "height", (int,))
    flat = _read_payload(base, width * height, "<i4")
    values = flat.reshape(height, width)
    if header.get("boolean"):
        values = values.astype(bool)
    legend = header.get("legend")
    if legend is not None:
        legend = {int(k): str(v) for k, v in legend.items()}
    return Mask(values=values, legend=legend)


def select_bands(r: Raster, names: list[str]) -> Raster:
    """Reorder/subset bands; geotransform and CRS are preserved."""
    if not names:
        raise EmptySelection("at least one band name required")
    indices = []
    for name in names:
        if name not in r.band_names:
            raise UnknownBand(f"band {name!r} not in {list(r.band_names)}")
        indices.append(r.band_names.index(name))
    return Raster(
        data=r.data[indices].copy(),
        band_names=tuple(names),
        geotransform=r.geotransform,
        crs=r.crs,
        nodata=r.nodata,
    )


def crop_window(r: Raster, col0: int, row0: int, w: int, h: int) -> Raster:
    """Crop a pixel window; the origin shifts through the affine map."""
    if w < 1 or h < 1 or col0 < 0 or row0 < 0 or col0 + w > r.width or row0 + h > r.height:
        raise OutOfBounds(
            f"window ({col0},{row0},{w},{h}) outside raster {r.width}x{r.height}"
        )
    ox, oy = pixel_to_world(r.geotransform, col0, row0)
    gt = (ox, r.geotransform[1], 0.0, oy, 0.0, r.geotransform[5])
    return Raster(
        data=r.data[:, row0 : row0 + h, col0 : col0 + w].copy(),
        band_names=r.band_names,
        geotransform=gt,
        crs=r.crs,
        nodata=r.nodata,
    )


def raster_stats(r: Raster, band: str) -> dict:
    """Min/max/mean/valid_count over one band, nodata excluded."""
    plane = r.band(band)
    if r.nodata is None:
        valid = plane.reshape(-1)
    else:
        valid = plane[plane != np.float32(r.nodata)]
    if valid.size == 0:
        raise AllNodata(f"band {band!r} holds no valid pixels")
    return {
        "min": float(valid.min()),
        "max": float(valid.max()),
        "mean": float(valid.mean(dtype=np.float64)),
        "valid_count": int(valid.size),
    }
