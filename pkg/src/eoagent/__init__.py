"""eoagent: a code-generating Earth-Observation assistant runtime.

Natural-language queries become programs in a restricted tool-script
dialect; the programs are validated against a tool registry and executed
in a guarded interpreter with full audit logging. Ships spectral
indices, geospatial operators, deterministic mock model tools, an HTTP
service, and a three-level evaluation harness.
"""

from .context import ExecutionContext, Limits
from .raster import Mask, Raster, crop_window, load_mask, load_raster, raster_stats, save_mask, save_raster, select_bands
from .indices import IndexParams, compute_index, list_indices
from .geo import GeoBounds, make_tiles, mask_area_m2, mosaic, reproject
from .tools import Registry, default_specs, load_registry, render_prompt_catalog
from .script import RunRecord, Script, execute_script, parse_script, to_source, validate_calls
from .backends import RemoteBackend, ScriptedBackend
from .controller import PromptBundle, build_prompt, generate_code, handle_query

__version__ = "0.1.0"

__all__ = [
    "ExecutionContext",
    "GeoBounds",
    "IndexParams",
    "Limits",
    "Mask",
    "PromptBundle",
    "Raster",
    "Registry",
    "RemoteBackend",
    "RunRecord",
    "Script",
    "ScriptedBackend",
    "build_prompt",
    "compute_index",
    "crop_window",
    "default_specs",
    "execute_script",
    "generate_code",
    "handle_query",
    "list_indices",
    "load_mask",
    "load_raster",
    "load_registry",
    "make_tiles",
    "mask_area_m2",
    "mosaic",
    "parse_script",
    "raster_stats",
    "render_prompt_catalog",
    "reproject",
    "save_mask",
    "save_raster",
    "select_bands",
    "to_source",
    "validate_calls",
]
