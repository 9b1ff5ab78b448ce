"""Reprojection, tiling, mosaicking, and geodesic area computation.

Supports lon/lat (EPSG:4326) and spherical Web Mercator (EPSG:3857).
Resampling is nearest-neighbor only so class masks never get
interpolated. Areas use the spherical earth model with the authalic
radius 6371008.8 m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import Mask, Raster, Geotransform, pixel_to_world

WEB_MERCATOR_RADIUS = 6378137.0
AUTHALIC_RADIUS_M = 6371008.8
MAX_MERCATOR_LAT = 85.06


class GeoOpsError(Exception):
    pass


class UnsupportedCrs(GeoOpsError):
    pass


class LatitudeOutOfRange(GeoOpsError):
    pass


class CrsMismatch(GeoOpsError):
    pass


class GridMisaligned(GeoOpsError):
    pass


@dataclass(frozen=True)
class GeoBounds:
    min_x: float
    min_y: float
    max_x: float
    max_y: float
    crs: str = "EPSG:4326"

    def __post_init__(self):
        if not (self.min_x < self.max_x and self.min_y < self.max_y):
            raise GeoOpsError(
                f"degenerate bounds ({self.min_x},{self.min_y})..({self.max_x},{self.max_y})"
            )

    def intersects(self, other: "GeoBounds") -> bool:
        if other.crs != self.crs:
            other = transform_bounds(other, self.crs)
        return not (
            other.max_x <= self.min_x
            or other.min_x >= self.max_x
            or other.max_y <= self.min_y
            or other.min_y >= self.max_y
        )


def lonlat_to_mercator(lon, lat):
    """Forward spherical Web Mercator; accepts scalars or arrays."""
    lon = np.asarray(lon, dtype=np.float64)
    lat = np.asarray(lat, dtype=np.float64)
    x = WEB_MERCATOR_RADIUS * np.radians(lon)
    y = WEB_MERCATOR_RADIUS * np.log(np.tan(np.pi / 4.0 + np.radians(lat) / 2.0))
    if x.ndim == 0:
        return float(x), float(y)
    return x, y


def mercator_to_lonlat(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    lon = np.degrees(x / WEB_MERCATOR_RADIUS)
    lat = np.degrees(2.0 * np.arctan(np.exp(y / WEB_MERCATOR_RADIUS)) - np.pi / 2.0)
    if lon.ndim == 0:
        return float(lon), float(lat)
    return lon, lat


def transform_point(x: float, y: float, src_crs: str, dst_crs: str) -> tuple[float, float]:
    _check_crs(src_crs)
    _check_crs(dst_crs)
    if src_crs == dst_crs:
        return float(x), float(y)
    if src_crs == "EPSG:4326":
        return lonlat_to_mercator(x, y)
    return mercator_to_lonlat(x, y)


def transform_bounds(b: GeoBounds, dst_crs: str) -> GeoBounds:
    # 4326 <-> 3857 is separable and monotone, so corners suffice.
    x0, y0 = transform_point(b.min_x, b.min_y, b.crs, dst_crs)
    x1, y1 = transform_point(b.max_x, b.max_y, b.crs, dst_crs)
    return GeoBounds(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1), dst_crs)


def raster_bounds(r: Raster) -> GeoBounds:
    x0, y0 = pixel_to_world(r.geotransform, 0, r.height)
    x1, y1 = pixel_to_world(r.geotransform, r.width, 0)
    return GeoBounds(x0, y0, x1, y1, r.crs)


def _check_crs(crs: str) -> None:
    if crs not in ("EPSG:4326", "EPSG:3857"):
        raise UnsupportedCrs(f"unsupported CRS {crs!r}")


def reproject(r: Raster, dst_crs: str) -> Raster:
    """Nearest-neighbor reprojection between the two supported CRSs.

    The output pixel size equals the source's center-pixel ground
    resolution mapped through the projection's local scale, so
    resolution is preserved exactly; the grid covers the source extent
    (edge centers clamp to the nearest source pixel).
    """
    _check_crs(r.crs)
    _check_crs(dst_crs)
    if dst_crs == r.crs:
        return r

    bounds = raster_bounds(r)
    gt = r.geotransform
    cx, cy = pixel_to_world(gt, r.width / 2.0, r.height / 2.0)

    if dst_crs == "EPSG:3857":
        if max(abs(bounds.min_y), abs(bounds.max_y)) > MAX_MERCATOR_LAT:
            raise LatitudeOutOfRange(
                f"latitudes beyond +/-{MAX_MERCATOR_LAT} deg cannot target EPSG:3857"
            )
        # meters per degree of the local projection scale at the source center
        k = math.pi / 180.0 * WEB_MERCATOR_RADIUS
        px = gt[1] * k
        py = abs(gt[5]) * k / math.cos(math.radians(cy))
    else:
        k = 180.0 / (math.pi * WEB_MERCATOR_RADIUS)
        _, center_lat = mercator_to_lonlat(cx, cy)
        px = gt[1] * k
        py = abs(gt[5]) * k * math.cos(math.radians(center_lat))

    out_bounds = transform_bounds(bounds, dst_crs)
    out_w = max(1, math.ceil((out_bounds.max_x - out_bounds.min_x) / px - 1e-9))
    out_h = max(1, math.ceil((out_bounds.max_y - out_bounds.min_y) / py - 1e-9))
    out_gt: Geotransform = (out_bounds.min_x, px, 0.0, out_bounds.max_y, 0.0, -py)

    cols = out_bounds.min_x + (np.arange(out_w, dtype=np.float64) + 0.5) * px
    rows = out_bounds.max_y - (np.arange(out_h, dtype=np.float64) + 0.5) * py
    if dst_crs == "EPSG:3857":
        src_x, _ = mercator_to_lonlat(cols, np.zeros_like(cols))
        _, src_y = mercator_to_lonlat(np.zeros_like(rows), rows)
    else:
        src_x, _ = lonlat_to_mercator(cols, np.zeros_like(cols))
        _, src_y = lonlat_to_mercator(np.zeros_like(rows), rows)

    src_c = np.clip(np.floor((src_x - gt[0]) / gt[1]).astype(np.int64), 0, r.width - 1)
    src_r = np.clip(np.floor((src_y - gt[3]) / gt[5]).astype(np.int64), 0, r.height - 1)
    data = r.data[:, src_r[:, np.newaxis], src_c[np.newaxis, :]]
    return Raster(
        data=data,
        band_names=r.band_names,
        geotransform=out_gt,
        crs=dst_crs,
        nodata=r.nodata,
    )


@dataclass(frozen=True)
class Tile:
    col0: int
    row0: int
    raster: Raster


@dataclass(frozen=True)
class TileGrid:
    tile_w: int
    tile_h: int
    source_width: int
    source_height: int
    tiles: tuple[Tile, ...]


def make_tiles(r: Raster, tile_w: int, tile_h: int) -> TileGrid:
    """Partition a raster into row-major tiles; edge tiles may be smaller."""
    if tile_w < 1 or tile_h < 1:
        raise GeoOpsError("tile dimensions must be >= 1")
    from .raster import crop_window

    tiles = []
    for row0 in range(0, r.height, tile_h):
        for col0 in range(0, r.width, tile_w):
            w = min(tile_w, r.width - col0)
            h = min(tile_h, r.height - row0)
            tiles.append(Tile(col0, row0, crop_window(r, col0, row0, w, h)))
    return TileGrid(tile_w, tile_h, r.width, r.height, tuple(tiles))


def mosaic(rs: list[Raster]) -> Raster:
    """Merge grid-aligned rasters; at overlaps the earliest valid pixel wins."""
    if not rs:
        raise GeoOpsError("mosaic of an empty list")
    if len(rs) == 1:
        return rs[0]
    first = rs[0]
    pw, ph = first.geotransform[1], first.geotransform[5]
    for r in rs[1:]:
        if r.crs != first.crs:
            raise CrsMismatch(f"{r.crs} vs {first.crs}")
        if r.band_names != first.band_names:
            raise GridMisaligned(f"band sets differ: {r.band_names} vs {first.band_names}")
        if not (
            math.isclose(r.geotransform[1], pw, rel_tol=1e-9)
            and math.isclose(r.geotransform[5], ph, rel_tol=1e-9)
        ):
            raise GridMisaligned("pixel sizes differ")
        for axis, size in ((0, pw), (3, ph)):
            shift = (r.geotransform[axis] - first.geotransform[axis]) / size
            if abs(shift - round(shift)) > 1e-6:
                raise GridMisaligned("origins not congruent modulo pixel size")

    min_x = min(r.geotransform[0] for r in rs)
    max_y = max(r.geotransform[3] for r in rs)
    max_x = max(r.geotransform[0] + r.width * pw for r in rs)
    min_y = min(r.geotransform[3] + r.height * ph for r in rs)
    out_w = round((max_x - min_x) / pw)
    out_h = round((min_y - max_y) / ph)

    nodata = next((r.nodata for r in rs if r.nodata is not None), None)
    from .raster import DEFAULT_NODATA

    fill = nodata if nodata is not None else DEFAULT_NODATA
    out = np.full((first.band_count, out_h, out_w), fill, dtype=np.float32)
    filled = np.zeros((out_h, out_w), dtype=bool)
    for r in rs:
        c0 = round((r.geotransform[0] - min_x) / pw)
        r0 = round((r.geotransform[3] - max_y) / ph)
        window = (slice(r0, r0 + r.height), slice(c0, c0 + r.width))
        if r.nodata is None:
            valid = np.ones((r.height, r.width), dtype=bool)
        else:
            # a pixel counts as valid only when every band is valid
            valid = np.all(r.data != np.float32(r.nodata), axis=0)
        take = valid & ~filled[window]
        out[:, window[0], window[1]][:, take] = r.data[:, take]
        filled[window] |= take
    return Raster(
        data=out,
        band_names=first.band_names,
        geotransform=(min_x, pw, 0.0, max_y, 0.0, ph),
        crs=first.crs,
        nodata=fill if not filled.all() or nodata is not None else first.nodata,
    )


def mask_area_m2(m: Mask, geotransform: Geotransform, crs: str, class_id: int) -> float:
    """Ground area covered by one class, in square meters.

    EPSG:3857 pixels are corrected by cos^2 of the row-center latitude;
    EPSG:4326 rows use the spherical band area R^2 * dlon * (sin(top) -
    sin(bottom)) with the authalic radius.
    """
    _check_crs(crs)
    selected = m.values == class_id
    counts = selected.sum(axis=1).astype(np.float64)
    rows = np.arange(m.height, dtype=np.float64)
    gt = geotransform
    if crs == "EPSG:3857":
        y_center = gt[3] + (rows + 0.5) * gt[5]
        _, lat = mercator_to_lonlat(np.zeros_like(y_center), y_center)
        row_area = abs(gt[1] * gt[5]) * np.cos(np.radians(lat)) ** 2
    else:
        top = np.radians(np.clip(gt[3] + rows * gt[5], -90.0, 90.0))
        bottom = np.radians(np.clip(gt[3] + (rows + 1.0) * gt[5], -90.0, 90.0))
        dlon = math.radians(abs(gt[1]))
        row_area = AUTHALIC_RADIUS_M**2 * dlon * (np.sin(top) - np.sin(bottom))
    return float(np.dot(counts, row_area))
