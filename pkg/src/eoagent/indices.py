"""Classical spectral indices as pure raster-to-raster operations.

Nine indices over the canonical band vocabulary. Each formula names the
band *roles* it needs (e.g. NDSI needs a SWIR role); callers map roles to
actual raster bands explicitly, so no sensor channel is ever guessed.
Pixels with nodata input or a near-zero denominator come out as nodata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .raster import DEFAULT_NODATA, Raster

INDEX_KINDS = ("NDVI", "SAVI", "EVI", "NDWI", "WBI", "NDSI", "SR", "NWI1", "NWI2")


class IndexComputationError(Exception):
    pass


class MissingBand(IndexComputationError):
    def __init__(self, kind: str, band: str):
        super().__init__(f"{kind} requires band {band!r}")
        self.kind = kind
        self.band = band


class ShapeMismatch(IndexComputationError):
    pass


@dataclass(frozen=True)
class IndexParams:
    """Tunable constants shared by the index formulas.

    ``l_savi`` is the soil brightness correction (default 0.5).
    ``l_evi`` is the canopy background term (default 1.0; the SAVI value
    would silently diverge from published EVI references). ``g_gain``,
    ``c1`` and ``c2`` are the EVI gain and aerosol resistance
    coefficients (2.5, 6, 7.5).
    """

    l_savi: float = 0.5
    l_evi: float = 1.0
    g_gain: float = 2.5
    c1: float = 6.0
    c2: float = 7.5
    epsilon_denominator: float = 1e-8

    def __post_init__(self):
        for name in ("l_savi", "l_evi", "g_gain", "c1", "c2", "epsilon_denominator"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"index parameter {name} must be finite")
        if self.epsilon_denominator <= 0:
            raise ValueError("epsilon_denominator must be positive")


#: role bands -> (numerator, denominator) so the nodata/epsilon guard is shared
_Formula = Callable[[dict[str, np.ndarray], IndexParams], tuple[np.ndarray, np.ndarray]]


def _normalized_difference(a: str, b: str) -> _Formula:
    def formula(bands, params):
        return bands[a] - bands[b], bands[a] + bands[b]

    return formula


def _savi(bands, params):
    n, r = bands["NIR"], bands["RED"]
    return (n - r) * (1.0 + params.l_savi), n + r + params.l_savi


def _evi(bands, params):
    n, r, b = bands["NIR"], bands["RED"], bands["BLUE"]
    return params.g_gain * (n - r), n + params.c1 * r - params.c2 * b + params.l_evi


def _ratio(a: str, b: str) -> _Formula:
    def formula(bands, params):
        return bands[a], bands[b]

    return formula


@dataclass(frozen=True)
class IndexSpec:
    kind: str
    required_bands: tuple[str, ...]
    description: str
    formula: _Formula
    parameter_defaults: dict[str, float]


_SPECS: dict[str, IndexSpec] = {
    spec.kind: spec
    for spec in (
        IndexSpec(
            "NDVI",
            ("NIR", "RED"),
            "Normalized difference vegetation index from near-infrared and red reflectance.",
            _normalized_difference("NIR", "RED"),
            {},
        ),
        IndexSpec(
            "SAVI",
            ("NIR", "RED"),
            "Soil-adjusted vegetation index with soil brightness correction L.",
            _savi,
            {"l_savi": 0.5},
        ),
        IndexSpec(
            "EVI",
            ("NIR", "RED", "BLUE"),
            "Enhanced vegetation index with gain G and aerosol resistance coefficients C1, C2.",
            _evi,
            {"g_gain": 2.5, "c1": 6.0, "c2": 7.5, "l_evi": 1.0},
        ),
        IndexSpec(
            "NDWI",
            ("GREEN", "NIR"),
            "Normalized difference water index highlighting open water from green and near-infrared.",
            _normalized_difference("GREEN", "NIR"),
            {},
        ),
        IndexSpec(
            "WBI",
            ("NIR900", "NIR970"),
            "Water band index: ratio of near-infrared reflectance at 900 nm to 970 nm.",
            _ratio("NIR900", "NIR970"),
            {},
        ),
        IndexSpec(
            "NDSI",
            ("GREEN", "SWIR"),
            "Normalized difference snow index separating snow from clouds via green and shortwave infrared.",
            _normalized_difference("GREEN", "SWIR"),
            {},
        ),
        IndexSpec(
            "SR",
            ("NIR", "RED"),
            "Simple ratio of near-infrared to red reflectance.",
            _ratio("NIR", "RED"),
            {},
        ),
        IndexSpec(
            "NWI1",
            ("NIR", "SWIR1"),
            "Normalized water index using near-infrared and the first shortwave infrared band.",
            _normalized_difference("NIR", "SWIR1"),
            {},
        ),
        IndexSpec(
            "NWI2",
            ("NIR", "SWIR2"),
            "Normalized water index using near-infrared and the second shortwave infrared band.",
            _normalized_difference("NIR", "SWIR2"),
            {},
        ),
    )
}


def index_spec(kind: str) -> IndexSpec:
    k = kind.upper()
    if k not in _SPECS:
        raise IndexComputationError(f"unknown index kind {kind!r}")
    return _SPECS[k]


def list_indices() -> list[dict]:
    """One entry per index: kind, required roles, parameter defaults, description."""
    return [
        {
            "kind": s.kind,
            "required_bands": list(s.required_bands),
            "parameter_defaults": dict(s.parameter_defaults),
            "description": s.description,
        }
        for s in (_SPECS[k] for k in INDEX_KINDS)
    ]


def compute_index(
    kind: str,
    r: Raster,
    band_map: Optional[dict[str, str]] = None,
    params: Optional[IndexParams] = None,
) -> Raster:
    """Evaluate one index over a raster.

    ``band_map`` maps formula roles to band names in ``r`` (identity by
    default). The output is a single-band raster named after the index,
    with geotransform/CRS copied from the input; nodata wherever any
    input pixel is nodata or |denominator| < epsilon.
    """
    spec = index_spec(kind)
    params = params or IndexParams()
    bands: dict[str, np.ndarray] = {}
    invalid = np.zeros((r.height, r.width), dtype=bool)
    for role in spec.required_bands:
        name = band_map.get(role, role) if band_map else role
        if name not in r.band_names:
            raise MissingBand(spec.kind, name)
        plane = r.band(name)
        if plane.shape != (r.height, r.width):
            raise ShapeMismatch(f"band {name!r} shape {plane.shape}")
        bands[role] = plane.astype(np.float64)
        if r.nodata is not None:
            invalid |= plane == np.float32(r.nodata)

    numerator, denominator = spec.formula(bands, params)
    numerator = np.broadcast_to(numerator, invalid.shape)
    denominator = np.broadcast_to(denominator, invalid.shape)
    invalid = invalid | (np.abs(denominator) < params.epsilon_denominator)
    out_nodata = r.nodata if r.nodata is not None else DEFAULT_NODATA
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(invalid, out_nodata, numerator / np.where(invalid, 1.0, denominator))
    return Raster(
        data=values.astype(np.float32)[np.newaxis, :, :],
        band_names=(spec.kind,),
        geotransform=r.geotransform,
        crs=r.crs,
        nodata=out_nodata,
    )
