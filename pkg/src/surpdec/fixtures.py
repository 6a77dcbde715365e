"""Access to the datasets bundled with the package.

The `data/` tree ships a small four-family stimulus set in the style of
a classic N400/P600 crossing design, a mock backend scoring it, matching
corrections and constraint files, a toy lexicon with word vectors for
the sampler, and per-study depth-weight presets.  Everything is plain
JSON or TSV, so the same files double as format examples.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from surpdec.errors import SchemaError
from surpdec.types import SCHEMA_VERSION


def fixture_path(relative: str) -> Path:
    """Absolute path of a bundled data file, e.g. 'stimuli/ryskin21.json'."""
    candidate = resources.files("surpdec").joinpath("data").joinpath(relative)
    if not candidate.is_file():
        raise FileNotFoundError(f"no bundled data file {relative!r}")
    return Path(str(candidate))


def list_fixtures() -> list[str]:
    """Relative paths of every bundled data file, sorted."""
    root = Path(str(resources.files("surpdec").joinpath("data")))
    return sorted(
        str(p.relative_to(root)) for p in root.rglob("*") if p.is_file()
    )


def load_depth_presets() -> dict:
    """Per-study depth weights plus the shared semantic scale.

    Returns {"semantic_scale": float, "depth_weights": {tag: float}}.
    """
    with open(fixture_path("presets/depth_presets.json"), encoding="utf-8") as f:
        data = json.load(f)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"preset schema {data.get('schema_version')!r} != {SCHEMA_VERSION!r}"
        )
    weights = data.get("depth_weights")
    if not isinstance(weights, dict) or not weights:
        raise SchemaError("presets must carry a non-empty depth_weights table")
    return {
        "semantic_scale": float(data["semantic_scale"]),
        "depth_weights": {k: float(v) for k, v in weights.items()},
    }
