"""Loading grid and unit-commitment instances from JSON (bundled or on disk)."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .grid import Grid
from .uc import UCInstance

DEFAULT_GRID = "appendix_grid.json"
DEFAULT_UC = "appendix_uc.json"


def _read_text(path: str | Path | None, default: str) -> tuple[str, Path | None]:
    if path is None:
        return resources.files("quc.data").joinpath(default).read_text(), None
    p = Path(path)
    return p.read_text(), p.parent


def _parse(text: str, source: str) -> dict:
    # JSONDecodeError already carries line/column; just add the file name
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise json.JSONDecodeError(f"{source}: {exc.msg}", exc.doc, exc.pos) from None


def load_grid(path: str | Path | None = None) -> Grid:
    text, _ = _read_text(path, DEFAULT_GRID)
    return Grid.from_dict(_parse(text, str(path or DEFAULT_GRID)))


def load_instance(path: str | Path | None = None, grid: str | Path | None = None) -> UCInstance:
    """An explicit ``grid`` path overrides the one named inside the UC file."""
    text, base = _read_text(path, DEFAULT_UC)
    data = _parse(text, str(path or DEFAULT_UC))
    if grid is not None:
        g = load_grid(grid)
    else:
        ref = data.get("grid", DEFAULT_GRID)
        if isinstance(ref, dict):
            g = Grid.from_dict(ref)
        elif base is None:
            g = load_grid(None) if ref == DEFAULT_GRID else load_grid(ref)
        else:
            g = load_grid(base / ref)
    return UCInstance.from_dict(data, g)
