"""Value encoding for the subprocess wire protocol.

Scalars, strings, and lists travel as plain JSON; rasters and masks are
written as sidecar files and referenced by path via a tagged object
``{"$kind": "raster"|"mask", "path": <base path>}``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from ..raster import Mask, Raster, load_mask, load_raster, save_mask, save_raster
from .errors import MalformedToolOutput


def encode_value(value, files_dir: str | Path, prefix: str = "val"):
    """Encode one value, materializing rasters/masks under ``files_dir``."""
    counter = [0]

    def enc(v):
        if isinstance(v, bool) or v is None:
            return v
        if isinstance(v, (int, float, str)):
            return v
        if isinstance(v, (list, tuple)):
            return [enc(x) for x in v]
        if isinstance(v, Raster):
            counter[0] += 1
            base = Path(files_dir) / f"{prefix}_{counter[0]}"
            save_raster(v, base)
            return {"$kind": "raster", "path": str(base)}
        if isinstance(v, Mask):
            counter[0] += 1
            base = Path(files_dir) / f"{prefix}_{counter[0]}"
            save_mask(v, base)
            return {"$kind": "mask", "path": str(base)}
        raise TypeError(f"value of type {type(v).__name__} cannot cross the tool boundary")

    return enc(value)


def decode_value(obj):
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if isinstance(obj, list):
        return [decode_value(x) for x in obj]
    if isinstance(obj, dict):
        kind = obj.get("$kind")
        path = obj.get("path")
        if kind == "raster" and isinstance(path, str):
            return load_raster(path)
        if kind == "mask" and isinstance(path, str):
            return load_mask(path)
        raise MalformedToolOutput(f"unrecognized tagged value {obj!r}")
    raise MalformedToolOutput(f"unrecognized wire value of type {type(obj).__name__}")


def _digestable(v):
    if isinstance(v, Raster):
        return ["raster", v.band_count, v.height, v.width,
                hashlib.sha256(v.data.tobytes()).hexdigest()[:16]]
    if isinstance(v, Mask):
        return ["mask", v.height, v.width,
                hashlib.sha256(v.values.tobytes()).hexdigest()[:16]]
    if isinstance(v, (list, tuple)):
        return [_digestable(x) for x in v]
    return v


def digest_args(args) -> str:
    """Stable short digest of an argument list for audit records."""
    canonical = json.dumps(_digestable(list(args)), sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def summarize_value(v) -> str:
    """Type + shape only; payloads never leak into the audit log."""
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, str):
        return "str"
    if isinstance(v, Raster):
        return f"raster {v.band_count}x{v.height}x{v.width}"
    if isinstance(v, Mask):
        return f"mask {v.height}x{v.width}"
    if isinstance(v, (list, tuple)):
        return f"list[{len(v)}]"
    if v is None:
        return "none"
    return type(v).__name__
