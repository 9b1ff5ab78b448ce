"""Local scene catalog standing in for an external imagery provider.

The index file ``catalog.json`` lists scenes with footprint, date, and
sensor. A live provider can replace this class as long as it keeps the
same two operations: search by bounds/date/sensor and fetch by id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..geo import GeoBounds
from ..raster import Raster, load_raster
from .errors import ToolError


class EmptyCatalog(ToolError):
    pass


class UnknownScene(ToolError):
    pass


@dataclass(frozen=True)
class SceneEntry:
    scene_id: str
    path: str
    sensor: str
    date: str  # ISO YYYY-MM-DD
    bounds: GeoBounds


class LocalCatalog:
    def __init__(self, catalog_dir: str | Path):
        self.root = Path(catalog_dir)
        index = self.root / "catalog.json"
        if not index.exists():
            raise EmptyCatalog(f"no catalog index at {index}")
        raw = json.loads(index.read_text())
        self.scenes: dict[str, SceneEntry] = {}
        for entry in raw.get("scenes", []):
            b = entry["bounds"]
            self.scenes[entry["id"]] = SceneEntry(
                scene_id=entry["id"],
                path=entry["path"],
                sensor=entry.get("sensor", "unknown"),
                date=entry["date"],
                bounds=GeoBounds(
                    b["min_x"], b["min_y"], b["max_x"], b["max_y"], b.get("crs", "EPSG:4326")
                ),
            )

    def search(
        self,
        bounds: GeoBounds,
        date_from: str,
        date_to: str,
        sensor: Optional[str] = None,
    ) -> list[str]:
        """Scene ids intersecting the bounds within the date range, by date."""
        if not self.scenes:
            raise EmptyCatalog(f"catalog at {self.root} lists no scenes")
        hits = [
            s
            for s in self.scenes.values()
            if date_from <= s.date <= date_to
            and (sensor is None or s.sensor == sensor)
            and s.bounds.intersects(bounds)
        ]
        hits.sort(key=lambda s: (s.date, s.scene_id))
        return [s.scene_id for s in hits]

    def fetch(self, scene_id: str) -> Raster:
        if scene_id not in self.scenes:
            raise UnknownScene(f"no scene {scene_id!r} in catalog")
        return load_raster(self.root / self.scenes[scene_id].path)
