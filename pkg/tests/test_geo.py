import math

import numpy as np
import pytest

from eoagent.geo import (
    AUTHALIC_RADIUS_M,
    CrsMismatch,
    GeoBounds,
    GeoOpsError,
    GridMisaligned,
    LatitudeOutOfRange,
    UnsupportedCrs,
    lonlat_to_mercator,
    make_tiles,
    mask_area_m2,
    mercator_to_lonlat,
    mosaic,
    raster_bounds,
    reproject,
)
from eoagent.raster import Mask
from helpers import cell_area_quadrature, make_raster


def test_mercator_origin():
    assert lonlat_to_mercator(0.0, 0.0) == pytest.approx((0.0, 0.0), abs=1e-9)


def test_mercator_antimeridian():
    x, _ = lonlat_to_mercator(180.0, 0.0)
    assert x == pytest.approx(20037508.342789244, abs=1e-3)


def test_mercator_round_trip_1000_points():
    rng = np.random.default_rng(5)
    lon = rng.uniform(-180, 180, 1000)
    lat = rng.uniform(-85, 85, 1000)
    x, y = lonlat_to_mercator(lon, lat)
    lon2, lat2 = mercator_to_lonlat(x, y)
    assert float(np.max(np.abs(lon2 - lon))) <= 1e-9
    assert float(np.max(np.abs(lat2 - lat))) <= 1e-9


def test_reproject_same_crs_is_identity():
    r = make_raster({"RED": np.random.default_rng(0).uniform(0, 1, (4, 4))})
    assert reproject(r, "EPSG:4326") is r


def test_reproject_unsupported_crs():
    r = make_raster({"RED": np.zeros((2, 2))})
    with pytest.raises(UnsupportedCrs):
        reproject(r, "EPSG:32633")


def test_reproject_latitude_guard():
    r = make_raster({"RED": np.zeros((4, 4))}, gt=(0.0, 0.1, 0.0, 89.0, 0.0, -0.1))
    with pytest.raises(LatitudeOutOfRange):
        reproject(r, "EPSG:3857")


def test_reproject_preserves_center_resolution():
    r = make_raster(
        {"RED": np.random.default_rng(1).uniform(0, 1, (20, 20))},
        gt=(7.0, 0.01, 0.0, 46.0, 0.0, -0.01),
    )
    out = reproject(r, "EPSG:3857")
    assert out.crs == "EPSG:3857"
    # expected ground size of the source center pixel through the projection
    k = math.pi / 180.0 * 6378137.0
    expected_px = 0.01 * k
    expected_py = 0.01 * k / math.cos(math.radians(46.0 - 0.1))
    assert out.geotransform[1] == pytest.approx(expected_px, rel=0.05)
    assert abs(out.geotransform[5]) == pytest.approx(expected_py, rel=0.05)


def test_reproject_round_trip_values_survive():
    values = np.zeros((10, 10), dtype=np.float32)
    values[2:5, 3:7] = 1.0
    r = make_raster({"RED": values}, gt=(5.0, 0.02, 0.0, 45.0, 0.0, -0.02))
    out = reproject(reproject(r, "EPSG:3857"), "EPSG:4326")
    # nearest neighbor: the marked block survives approximately in place
    assert out.data.max() == 1.0
    assert out.data.min() == 0.0
    src_bounds = raster_bounds(r)
    dst_bounds = raster_bounds(out)
    assert dst_bounds.min_x == pytest.approx(src_bounds.min_x, abs=0.05)
    assert dst_bounds.max_y == pytest.approx(src_bounds.max_y, abs=0.05)


def test_make_tiles_counts():
    r = make_raster({"RED": np.arange(16, dtype=float).reshape(4, 4)})
    grid = make_tiles(r, 2, 2)
    assert len(grid.tiles) == 4

    r54 = make_raster({"RED": np.arange(20, dtype=float).reshape(4, 5)})
    grid54 = make_tiles(r54, 2, 2)
    assert len(grid54.tiles) == 6
    right_edge = [t for t in grid54.tiles if t.col0 == 4]
    assert all(t.raster.width == 1 for t in right_edge)


def test_tiles_reassemble_bit_exact():
    rng = np.random.default_rng(2)
    r = make_raster(
        {"RED": rng.uniform(0, 1, (7, 5)), "NIR": rng.uniform(0, 1, (7, 5))},
        gt=(10.0, 0.5, 0.0, 20.0, 0.0, -0.5),
    )
    grid = make_tiles(r, 3, 2)
    rebuilt = mosaic([t.raster for t in grid.tiles])
    assert rebuilt.data.tobytes() == r.data.tobytes()
    assert rebuilt.geotransform == r.geotransform


def test_tiling_is_a_partition():
    r = make_raster({"RED": np.arange(35, dtype=float).reshape(5, 7)})
    grid = make_tiles(r, 3, 2)
    seen = sorted(
        v for t in grid.tiles for v in t.raster.data.reshape(-1).tolist()
    )
    assert seen == sorted(r.data.reshape(-1).tolist())


def test_mosaic_singleton_identity():
    r = make_raster({"RED": np.zeros((2, 2))})
    assert mosaic([r]) is r


def test_mosaic_idempotent():
    rng = np.random.default_rng(3)
    r = make_raster({"RED": rng.uniform(0, 1, (3, 3))})
    out = mosaic([r, r])
    assert out.data.tobytes() == r.data.tobytes()
    assert out.geotransform == r.geotransform


def test_mosaic_abutting_extent_union():
    left = make_raster({"RED": np.full((2, 2), 1.0)}, gt=(0.0, 1.0, 0.0, 2.0, 0.0, -1.0),
                       crs="EPSG:3857")
    right = make_raster({"RED": np.full((2, 2), 2.0)}, gt=(2.0, 1.0, 0.0, 2.0, 0.0, -1.0),
                        crs="EPSG:3857")
    out = mosaic([left, right])
    assert (out.width, out.height) == (4, 2)
    assert out.data[0, 0, 0] == 1.0
    assert out.data[0, 0, 3] == 2.0


def test_mosaic_first_valid_wins_and_nodata_fill():
    first = make_raster(
        {"RED": np.array([[np.float32(-1.0), 5.0]])},
        gt=(0.0, 1.0, 0.0, 1.0, 0.0, -1.0), crs="EPSG:3857", nodata=-1.0,
    )
    second = make_raster(
        {"RED": np.array([[7.0, 9.0]])},
        gt=(0.0, 1.0, 0.0, 1.0, 0.0, -1.0), crs="EPSG:3857", nodata=-1.0,
    )
    out = mosaic([first, second])
    assert out.data[0, 0, 0] == 7.0  # filled by the later raster
    assert out.data[0, 0, 1] == 5.0  # earliest valid wins


def test_mosaic_errors():
    a = make_raster({"RED": np.zeros((2, 2))}, crs="EPSG:4326")
    b = make_raster({"RED": np.zeros((2, 2))}, crs="EPSG:3857",
                    gt=(0.0, 1.0, 0.0, 0.0, 0.0, -1.0))
    with pytest.raises(CrsMismatch):
        mosaic([a, b])
    congruent = make_raster({"RED": np.zeros((2, 2))}, gt=(0.02, 0.01, 0.0, 45.0, 0.0, -0.01))
    shifted = make_raster({"RED": np.zeros((2, 2))}, gt=(0.005, 0.01, 0.0, 45.0, 0.0, -0.01))
    base = make_raster({"RED": np.zeros((2, 2))}, gt=(0.0, 0.01, 0.0, 45.0, 0.0, -0.01))
    mosaic([base, congruent])  # whole-pixel origin offsets are fine
    with pytest.raises(GridMisaligned):
        mosaic([base, shifted])
    with pytest.raises(GeoOpsError):
        mosaic([])


def test_empty_mask_area_zero():
    m = Mask(values=np.zeros((3, 3), dtype=np.int32))
    assert mask_area_m2(m, (0.0, 1.0, 0.0, 0.0, 0.0, -1.0), "EPSG:3857", 1) == 0.0


def test_equator_cell_area_matches_quadrature():
    m = Mask(values=np.ones((1, 1), dtype=np.int32))
    gt = (0.0, 1.0, 0.0, 1.0, 0.0, -1.0)
    area = mask_area_m2(m, gt, "EPSG:4326", 1)
    oracle = cell_area_quadrature(0.0, 1.0, 0.0, 1.0)
    assert area == pytest.approx(oracle, rel=1e-3)
    assert area == pytest.approx(1.2364e10, rel=1e-3)


def test_mercator_area_at_equator():
    m = Mask(values=np.ones((2, 2), dtype=np.int32))
    gt = (0.0, 10.0, 0.0, 10.0, 0.0, -10.0)  # centered on the equator
    area = mask_area_m2(m, gt, "EPSG:3857", 1)
    assert area == pytest.approx(400.0, rel=1e-6)


def test_mercator_area_shrinks_with_latitude():
    m = Mask(values=np.ones((1, 1), dtype=np.int32))
    y60 = lonlat_to_mercator(0.0, 60.0)[1]
    gt = (0.0, 10.0, 0.0, y60 + 5.0, 0.0, -10.0)
    area = mask_area_m2(m, gt, "EPSG:3857", 1)
    assert area == pytest.approx(100.0 * math.cos(math.radians(60.0)) ** 2, rel=1e-3)


def test_area_monotone_and_total():
    rng = np.random.default_rng(4)
    values = rng.integers(0, 3, (6, 8), dtype=np.int32)
    m = Mask(values=values)
    gt = (5.0, 0.25, 0.0, 47.0, 0.0, -0.25)
    total = sum(mask_area_m2(m, gt, "EPSG:4326", c) for c in range(3))
    full = mask_area_m2(Mask(values=np.ones_like(values)), gt, "EPSG:4326", 1)
    assert total == pytest.approx(full, rel=1e-6)

    grown = values.copy()
    grown[0, 0] = 1
    bigger = mask_area_m2(Mask(values=grown), gt, "EPSG:4326", 1)
    assert bigger >= mask_area_m2(m, gt, "EPSG:4326", 1) - 1e-9


def test_area_unsupported_crs():
    m = Mask(values=np.ones((1, 1), dtype=np.int32))
    with pytest.raises(UnsupportedCrs):
        mask_area_m2(m, (0, 1, 0, 0, 0, -1), "EPSG:2154", 1)


def test_bounds_validation():
    with pytest.raises(GeoOpsError):
        GeoBounds(1.0, 0.0, 0.0, 1.0)
    b = GeoBounds(0.0, 0.0, 2.0, 2.0)
    assert b.intersects(GeoBounds(1.0, 1.0, 3.0, 3.0))
    assert not b.intersects(GeoBounds(2.0, 2.0, 3.0, 3.0))
