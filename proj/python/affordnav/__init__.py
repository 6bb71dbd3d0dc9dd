"""Embodiment-aware affordance scoring for navigation paths.

Thin wrapper over the C++ core; see the README for the data formats.
"""

import json as _json

from ._affordnav import *  # noqa: F401,F403
from ._affordnav import (
    ConfigError,
    FormatError,
    LayoutError,
    default_config as _default_config,
    run_pipeline as _run_pipeline,
)

__version__ = "0.1.0"


def default_config() -> dict:
    """The default run configuration as a dict."""
    return _json.loads(_default_config())


def run_pipeline(config=None, out_dir: str = "") -> dict:
    """Terrains, datasets, models and benchmark tables for `config` (a dict or JSON string)."""
    if config is None:
        config = {}
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_pipeline(config, out_dir)
