"""Scene JSON input and output.

A scene file holds a list of named curves.  Each curve record carries a
space tag ("affine" or "projective"), a representation tag ("fourier" or
"polyline"), the coefficient or point array as decimal doubles, and a
traversal orientation of +1 or -1.  JSON is the single source of truth
for scenes; meshes and CSV summaries are derived views.

Affine scenes are rescaled on ingestion so their bounding-box diameter
is one, because every default tolerance in this package is quoted in
those units.  Pass rescale=False to keep raw coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .curves import FourierCurve, PolylineCurve, ProjectiveCurve
from .errors import InputError

SCENE_DIAMETER = 1.0


@dataclass(frozen=True)
class Scene:
    """A named list of curves sharing one ambient space."""

    name: str
    curves: tuple
    projective: bool

    def __len__(self) -> int:
        return len(self.curves)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InputError(message)


def _finite_array(values, field: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{field} is not a numeric array") from exc
    _require(np.isfinite(arr).all(), f"{field} contains non-finite values")
    return arr


def curve_to_dict(curve, name: str) -> dict:
    """Schema record for one curve."""
    if isinstance(curve, ProjectiveCurve):
        return {"name": name, "space": "projective",
                "representation": "fourier",
                "coefficients": curve.coeffs.tolist(),
                "orientation": int(curve.orientation)}
    if isinstance(curve, FourierCurve):
        return {"name": name, "space": "affine",
                "representation": "fourier",
                "coefficients": curve.coeffs.tolist(),
                "orientation": int(curve.orientation)}
    if isinstance(curve, PolylineCurve):
        return {"name": name, "space": "affine",
                "representation": "polyline",
                "points": curve.points.tolist(),
                "orientation": int(curve.orientation)}
    raise InputError(f"cannot serialize curve of type {type(curve).__name__}")


def curve_from_dict(rec) -> tuple[str, object]:
    """Curve (with its name) from one schema record."""
    _require(isinstance(rec, dict), "curve record must be a JSON object")
    name = rec.get("name", "")
    _require(isinstance(name, str), "curve name must be a string")
    space = rec.get("space")
    _require(space in ("affine", "projective"),
             f"curve {name!r}: space must be 'affine' or 'projective'")
    representation = rec.get("representation")
    _require(representation in ("fourier", "polyline"),
             f"curve {name!r}: representation must be 'fourier' or "
             f"'polyline'")
    orientation = rec.get("orientation", 1)
    _require(orientation in (1, -1),
             f"curve {name!r}: orientation must be 1 or -1")
    if representation == "polyline":
        _require(space == "affine",
                 f"curve {name!r}: polyline curves are affine only")
        pts = _finite_array(rec.get("points"), f"curve {name!r} points")
        return name, PolylineCurve(points=pts, orientation=orientation)
    coeffs = _finite_array(rec.get("coefficients"),
                           f"curve {name!r} coefficients")
    _require(coeffs.ndim == 2, f"curve {name!r}: coefficients must be a "
                               f"matrix with one row per component")
    if space == "projective":
        return name, ProjectiveCurve(coeffs=coeffs, orientation=orientation)
    return name, FourierCurve(coeffs=coeffs, orientation=orientation)


def scene_to_dict(curves, name: str = "scene",
                  curve_names=None) -> dict:
    if curve_names is None:
        curve_names = [f"curve{i + 1}" for i in range(len(curves))]
    return {"name": name,
            "curves": [curve_to_dict(c, n)
                       for c, n in zip(curves, curve_names)]}


def _bbox_diameter(curves) -> float:
    pts = np.vstack([c.samples(256)[1] for c in curves])
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def rescale_curves(curves) -> tuple:
    """Uniform scale and recenter so the scene bounding box has diameter
    one about the origin."""
    pts = np.vstack([c.samples(256)[1] for c in curves])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diam = float(np.linalg.norm(hi - lo))
    _require(diam > 0.0, "scene is a single point; cannot rescale")
    scale = SCENE_DIAMETER / diam
    center = 0.5 * (lo + hi)
    return tuple(c.transformed(scale=scale, offset=-center * scale)
                 for c in curves)


def scene_from_dict(obj, rescale: bool = True) -> Scene:
    """Scene from a parsed JSON object (or a bare list of curve records).

    Affine scenes are rescaled to unit diameter unless rescale is false;
    homogeneous coordinates have no scale so projective scenes pass
    through unchanged.  Mixing spaces is rejected.
    """
    if isinstance(obj, list):
        obj = {"name": "scene", "curves": obj}
    _require(isinstance(obj, dict), "scene must be a JSON object or list")
    records = obj.get("curves")
    _require(isinstance(records, list) and len(records) > 0,
             "scene must hold a non-empty curve list")
    name = obj.get("name", "scene")
    _require(isinstance(name, str), "scene name must be a string")
    named = [curve_from_dict(rec) for rec in records]
    curves = tuple(c for _, c in named)
    flags = [isinstance(c, ProjectiveCurve) for c in curves]
    _require(all(flags) or not any(flags),
             "scene mixes affine and projective curves")
    projective = all(flags)
    if rescale and not projective:
        curves = rescale_curves(curves)
    return Scene(name=name, curves=curves, projective=projective)


def load_scene(path, rescale: bool = True) -> Scene:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read scene file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed scene JSON in {path}: {exc}") from exc
    return scene_from_dict(obj, rescale=rescale)


def save_scene(path, curves, name: str = "scene", curve_names=None) -> None:
    obj = scene_to_dict(curves, name=name, curve_names=curve_names)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
