"""Shared test helpers: independent oracles and an AST fuzzer.

The oracles here deliberately re-derive results through different math
than the library (scalar arithmetic, rasterized area counts, Riemann
sums) so agreement is meaningful.
"""

from __future__ import annotations

import math
import random

import numpy as np

from eoagent.raster import Raster
from eoagent.script.nodes import (
    Assign,
    BinOp,
    BoolLit,
    Call,
    ExprStmt,
    FloatLit,
    Index,
    IntLit,
    ListLit,
    MethodCall,
    Name,
    Neg,
    ScriptAst,
    StringLit,
)

# --- scalar spectral-index oracle -------------------------------------------


def scalar_index(kind: str, bands: dict, l_savi=0.5, l_evi=1.0, g=2.5, c1=6.0, c2=7.5,
                 eps=1e-8):
    """Pixelwise index per the published formulas; None when the guard fires."""
    if kind == "NDVI":
        num, den = bands["NIR"] - bands["RED"], bands["NIR"] + bands["RED"]
    elif kind == "SAVI":
        num = (bands["NIR"] - bands["RED"]) * (1.0 + l_savi)
        den = bands["NIR"] + bands["RED"] + l_savi
    elif kind == "EVI":
        num = g * (bands["NIR"] - bands["RED"])
        den = bands["NIR"] + c1 * bands["RED"] - c2 * bands["BLUE"] + l_evi
    elif kind == "NDWI":
        num, den = bands["GREEN"] - bands["NIR"], bands["GREEN"] + bands["NIR"]
    elif kind == "WBI":
        num, den = bands["NIR900"], bands["NIR970"]
    elif kind == "NDSI":
        num, den = bands["GREEN"] - bands["SWIR"], bands["GREEN"] + bands["SWIR"]
    elif kind == "SR":
        num, den = bands["NIR"], bands["RED"]
    elif kind == "NWI1":
        num, den = bands["NIR"] - bands["SWIR1"], bands["NIR"] + bands["SWIR1"]
    elif kind == "NWI2":
        num, den = bands["NIR"] - bands["SWIR2"], bands["NIR"] + bands["SWIR2"]
    else:
        raise ValueError(kind)
    if abs(den) < eps:
        return None
    return num / den


def make_raster(planes: dict[str, np.ndarray], crs="EPSG:4326",
                gt=(0.0, 0.01, 0.0, 45.0, 0.0, -0.01), nodata=None) -> Raster:
    names = tuple(planes)
    data = np.stack([np.asarray(planes[n], dtype=np.float32) for n in names])
    return Raster(data=data, band_names=names, geotransform=gt, crs=crs, nodata=nodata)


# --- rotated-box rasterization oracle ------------------------------------------


def _oracle_corners(cx, cy, w, h, angle):
    c, s = math.cos(angle), math.sin(angle)
    pts = []
    for dx, dy in ((w / 2, h / 2), (-w / 2, h / 2), (-w / 2, -h / 2), (w / 2, -h / 2)):
        pts.append((cx + dx * c - dy * s, cy + dx * s + dy * c))
    return pts


def _inside(poly, x, y):
    ok = np.ones(x.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        ok &= (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) >= 0
    return ok


def rasterized_obb_iou(a, b, n=1000) -> float:
    """Count-based IoU on an n x n grid of cell centers over both boxes."""
    pa = _oracle_corners(a.cx, a.cy, a.w, a.h, a.angle)
    pb = _oracle_corners(b.cx, b.cy, b.w, b.h, b.angle)
    xs = [p[0] for p in pa + pb]
    ys = [p[1] for p in pa + pb]
    pad = 1e-6 + 0.01 * max(max(xs) - min(xs), max(ys) - min(ys))
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    cx = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    cy = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    gx, gy = np.meshgrid(cx, cy)
    in_a = _inside(pa, gx, gy)
    in_b = _inside(pb, gx, gy)
    union = int(np.count_nonzero(in_a | in_b))
    if union == 0:
        return 0.0
    return int(np.count_nonzero(in_a & in_b)) / union


# --- spherical cell-area quadrature oracle ---------------------------------------


def cell_area_quadrature(lon0, lon1, lat0, lat1, radius=6371008.8, n=20000) -> float:
    """Midpoint Riemann sum of R^2 cos(phi) dphi dlambda over the cell."""
    lats = np.linspace(min(lat0, lat1), max(lat0, lat1), n + 1)
    mid = np.radians((lats[:-1] + lats[1:]) / 2.0)
    dphi = math.radians(abs(lat1 - lat0) / n)
    dlam = math.radians(abs(lon1 - lon0))
    return float((radius**2 * np.cos(mid) * dphi * dlam).sum())


# --- AST fuzzer -------------------------------------------------------------------


_NAMES = ["x", "y", "z", "mask0", "value", "result", "a1"]
_STRINGS = ["", "water", "a b", 'quote"d', "tab\there", "line\nbreak", "it's"]


def _literal(rng: random.Random):
    pick = rng.randrange(5)
    if pick == 0:
        return IntLit(rng.randrange(0, 1000))
    if pick == 1:
        return FloatLit(round(rng.uniform(0, 100), rng.randrange(1, 6)))
    if pick == 2:
        return StringLit(rng.choice(_STRINGS))
    if pick == 3:
        return BoolLit(rng.random() < 0.5)
    return Name(rng.choice(_NAMES))


def random_expr(rng: random.Random, depth: int):
    if depth <= 0:
        return _literal(rng)
    pick = rng.randrange(8)
    if pick == 0:
        return _literal(rng)
    if pick == 1:
        return BinOp(
            rng.choice(["==", "!=", "<", "<=", ">", ">=", "in", "+", "-", "*", "/"]),
            random_expr(rng, depth - 1),
            random_expr(rng, depth - 1),
        )
    if pick == 2:
        return Neg(random_expr(rng, depth - 1))
    if pick == 3:
        return ListLit(tuple(random_expr(rng, depth - 1) for _ in range(rng.randrange(0, 4))))
    if pick == 4:
        return Call(
            Name(rng.choice(_NAMES + ["print", "len", "ndvi"])),
            tuple(random_expr(rng, depth - 1) for _ in range(rng.randrange(0, 3))),
        )
    if pick == 5:
        method = rng.choice(["sum", "mean", "count"])
        args = (random_expr(rng, depth - 1),) if method == "count" else ()
        return MethodCall(random_expr(rng, depth - 1), method, args)
    if pick == 6:
        return Index(random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    # exotic but grammatical: calling the result of an expression
    return Call(random_expr(rng, depth - 1), tuple(random_expr(rng, depth - 1) for _ in range(rng.randrange(0, 2))))


def random_program(rng: random.Random, max_statements: int = 6) -> ScriptAst:
    statements = []
    for _ in range(rng.randrange(1, max_statements + 1)):
        expr = random_expr(rng, rng.randrange(1, 4))
        if rng.random() < 0.6:
            statements.append(Assign(rng.choice(_NAMES), expr))
        else:
            statements.append(ExprStmt(expr))
    return ScriptAst(tuple(statements))
