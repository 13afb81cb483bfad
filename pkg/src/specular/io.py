"""Plain-text scene files, JSON reports and SVG rendering."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .geometry import EPS_GEOM
from .scene import Scene

HEADER = "specular-scene v1"


class SceneParseError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


# ---------------------------------------------------------------------------
# scenes


def dumps_scene(scene: Scene) -> str:
    out = [HEADER]
    for k in sorted(scene.meta):
        key, val = str(k), str(scene.meta[k])
        if not key or any(c.isspace() for c in key) or "\n" in val:
            raise ValueError(f"metadata entry {key!r} cannot be serialized")
        out.append(f"# {key} {val}".rstrip())
    for r in scene.segs.tolist():
        out.append("segment " + " ".join(repr(float(x)) for x in r))
    return "\n".join(out) + "\n"


def loads_scene(text: str) -> Scene:
    lines = text.splitlines()
    if not lines:
        raise SceneParseError("empty file", 1)
    head = lines[0].strip()
    if head != HEADER:
        if head.startswith("specular-scene"):
            raise SceneParseError(f"unsupported version {head.split()[-1]!r}", 1)
        raise SceneParseError("missing header 'specular-scene v1'", 1)
    meta, rows = {}, []
    for i, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body:
                key, _, val = body.partition(" ")
                meta[key] = val
            continue
        parts = line.split()
        if parts[0] != "segment" or len(parts) != 5:
            raise SceneParseError(f"expected 'segment x1 y1 x2 y2', got {line!r}", i)
        try:
            row = [float(p) for p in parts[1:]]
        except ValueError:
            raise SceneParseError(f"bad number in {line!r}", i) from None
        if not all(map(math.isfinite, row)):
            raise SceneParseError("non-finite coordinate", i)
        if row[0] == row[2] and row[1] == row[3]:
            raise SceneParseError("zero-length segment", i)
        rows.append(row)
    return Scene(np.array(rows, dtype=float).reshape(-1, 4), meta)


def write_scene(scene: Scene, path) -> None:
    Path(path).write_text(dumps_scene(scene))


def read_scene(path) -> Scene:
    return loads_scene(Path(path).read_text())


# ---------------------------------------------------------------------------
# reports


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def report(command: str, params: dict, result: dict) -> dict:
    """Envelope recording everything needed to reproduce the numbers."""
    p = {"eps_geom": EPS_GEOM}
    p.update(params)
    return {"tool": "specular", "version": __version__, "command": command,
            "params": _plain(p), "result": _plain(result)}


def dumps_report(rep: dict) -> str:
    return json.dumps(_plain(rep), sort_keys=True, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# svg


def _fmt(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(scene: Scene, paths: Optional[Iterable[np.ndarray]] = None, path=None,
               rhombi: Optional[Sequence[np.ndarray]] = None, width: int = 800) -> str:
    """Deterministic SVG.  Mirrors are solid; with ``rhombi`` the outlines are bold
    and the mirrors dotted.  ``paths`` are (k, 2) polylines drawn in red."""
    paths = [np.asarray(p, float).reshape(-1, 2) for p in (paths or [])]
    polys = [np.asarray(r, float).reshape(-1, 2) for r in (rhombi or [])]
    pts = [scene.segs.reshape(-1, 2)] + paths + polys
    pts = np.vstack([p for p in pts if p.size]) if any(p.size for p in pts) else np.zeros((0, 2))
    if len(pts):
        x0, y0 = pts.min(0)
        x1, y1 = pts.max(0)
    else:
        x0 = y0 = 0.0
        x1 = y1 = 1.0
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 0.05 * span
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    sw = span / 400
    height = max(1, int(round(width * (y1 - y0) / (x1 - x0))))
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="{_fmt(x0)} {_fmt(-y1)} {_fmt(x1 - x0)} {_fmt(y1 - y0)}">',
           f'<g transform="scale(1,-1)" fill="none" stroke-linecap="round">']
    for p in polys:
        d = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in p)
        out.append(f'<polygon class="rhombus" points="{d}" stroke="black" stroke-width="{_fmt(3 * sw)}"/>')
    dash = f' stroke-dasharray="{_fmt(2 * sw)},{_fmt(2 * sw)}"' if polys else ""
    for a, b, c, d in scene.segs.tolist():
        out.append(f'<line class="mirror" x1="{_fmt(a)}" y1="{_fmt(b)}" x2="{_fmt(c)}" y2="{_fmt(d)}" '
                   f'stroke="black" stroke-width="{_fmt(sw)}"{dash}/>')
    for p in paths:
        d = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in p)
        out.append(f'<polyline class="ray" points="{d}" stroke="red" stroke-width="{_fmt(sw)}"/>')
    out += ["</g>", "</svg>"]
    svg = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(svg)
    return svg
