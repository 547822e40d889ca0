"""Bundled example scenes.

Two ready-to-run scenes ship inside the package:

* ``theme-park`` — 35 amusement-park attractions in 7 themed areas, with
  waiting-time scalars.  Good for exercising group aggregation.
* ``local-shops`` — a strip of shops placed by latitude/longitude around a
  scene origin, with occupancy-density scalars on a white-to-red scale.
  Good for exercising geographic anchoring.
"""

from __future__ import annotations

import json
from importlib import resources

from .scene import Scene, SceneFormatError, scene_from_json

EXAMPLE_NAMES = ("theme-park", "local-shops")

_FILES = {
    "theme-park": "theme_park.json",
    "local-shops": "local_shops.json",
}


def load_example(name: str) -> Scene:
    """Load a bundled example scene by name (see EXAMPLE_NAMES)."""
    if name not in _FILES:
        raise KeyError(f"unknown example {name!r}; available: {', '.join(EXAMPLE_NAMES)}")
    text = resources.files("arlabels.data").joinpath(_FILES[name]).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:  # pragma: no cover - bundled data is valid
        raise SceneFormatError(f"bundled scene {name!r} is corrupt: {exc}") from exc
    return scene_from_json(doc)
