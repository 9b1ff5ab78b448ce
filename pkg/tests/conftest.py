from __future__ import annotations

import numpy as np
import pytest

from eoagent.fixturegen import make_fixtures
from eoagent.tools.registry import Registry, default_specs, load_registry


@pytest.fixture(scope="session")
def fixtures_root(tmp_path_factory):
    """Full deterministic fixture tree (scenes, uploads, datasets, completions)."""
    return make_fixtures(tmp_path_factory.mktemp("fixtures"))


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture()
def rgb_raster():
    from helpers import make_raster

    rng = np.random.default_rng(3)
    shape = (8, 8)
    return make_raster(
        {
            "RED": rng.uniform(0, 1, shape),
            "GREEN": rng.uniform(0, 1, shape),
            "BLUE": rng.uniform(0, 1, shape),
        }
    )
