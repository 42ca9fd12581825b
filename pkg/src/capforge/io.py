"""JSON and SVG emission for shapes, measures and developments."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import GeometryError
from .geometry import Polyline, ensure_ccw
from .measure import BoundaryMeasure


def points_to_list(z) -> list:
    z = np.asarray(z, dtype=complex).ravel()
    return [[float(p.real), float(p.imag)] for p in z]


def shape_to_dict(p: Polyline) -> dict:
    return {"vertices": points_to_list(p.points), "closed": p.closed}


def shape_from_dict(data: dict) -> Polyline:
    if "vertices" not in data:
        raise GeometryError("shape JSON needs a 'vertices' list")
    verts = np.asarray(data["vertices"], dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise GeometryError("vertices must be [x, y] pairs")
    p = Polyline(verts[:, 0] + 1j * verts[:, 1], bool(data.get("closed", True)))
    return ensure_ccw(p)


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(data, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(data, sort_keys=True, indent=1, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def load_shape(path) -> Polyline:
    return shape_from_dict(load_json(path))


def load_measure(path) -> BoundaryMeasure:
    return BoundaryMeasure.from_dict(load_json(path))


# ---------------------------------------------------------------------------
# SVG


class SvgCanvas:
    """Minimal SVG writer with a fixed viewbox from the joint bounding box of all layers."""

    def __init__(self, size: int = 800, margin: float = 0.05):
        self.size = size
        self.margin = margin
        self.layers = []

    def polyline(self, z, closed=True, stroke="#1f77b4", width=1.0, fill="none", label=None):
        self.layers.append(("poly", np.asarray(z, dtype=complex), closed, stroke, width, fill, label))

    def marker(self, z, radius=4.0, fill="#d62728", label=None):
        self.layers.append(("dot", np.asarray([z], dtype=complex), False, fill, radius, fill, label))

    def _frame(self):
        allz = np.concatenate([layer[1] for layer in self.layers]) if self.layers else np.zeros(1, complex)
        lo = complex(allz.real.min(), allz.imag.min())
        hi = complex(allz.real.max(), allz.imag.max())
        span = max(hi.real - lo.real, hi.imag - lo.imag, 1e-12)
        pad = self.margin * span
        return lo - complex(pad, pad), span + 2 * pad

    def render(self) -> str:
        origin, span = self._frame()
        s = self.size / span

        def xy(z):
            return (z.real - origin.real) * s, self.size - (z.imag - origin.imag) * s

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
               f'viewBox="0 0 {self.size} {self.size}">']
        for kind, z, closed, stroke, width, fill, label in self.layers:
            title = f"<title>{label}</title>" if label else ""
            if kind == "dot":
                x, y = xy(z[0])
                out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{width}" fill="{fill}">{title}</circle>')
                continue
            pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in (xy(p) for p in z))
            tag = "polygon" if closed else "polyline"
            out.append(f'<{tag} points="{pts}" fill="{fill}" stroke="{stroke}" '
                       f'stroke-width="{width}" stroke-linejoin="round">{title}</{tag}>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def coordinates(self) -> list:
        """Every plotted coordinate, for the JSON twin."""
        return [{"kind": layer[0], "label": layer[6], "closed": layer[2], "points": points_to_list(layer[1])}
                for layer in self.layers]

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        dump_json({"layers": self.coordinates()}, path.with_suffix(".svg.json"))
        return path
