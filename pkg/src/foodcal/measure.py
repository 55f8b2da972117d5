"""Silhouette features and shape-model volume estimation.

Two binary masks (top view, side view) plus per-view scale factors become a
physical volume through one of three geometric models:

* Column:    V = top area x side height
* Ellipsoid: V = (pi/6) x top major x top minor x side height
* Irregular: per-row solids of revolution over the side profile, corrected
  by the top view's ellipticity

All per-mask features live in ``Silhouette`` so the formulas stay pure
arithmetic over named quantities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DegenerateExtent, EmptyMask, MissingFile, ParseError, SchemaError, UnknownFood


class ShapeModel(Enum):
    ELLIPSOID = "ellipsoid"
    COLUMN = "column"
    IRREGULAR = "irregular"


# Geometry class of each supported food. This is configuration, not ground
# truth: override per run with a JSON map via load_shape_overrides.
SHAPE_TABLE: dict[str, ShapeModel] = {
    "apple": ShapeModel.ELLIPSOID,
    "orange": ShapeModel.ELLIPSOID,
    "tomato": ShapeModel.ELLIPSOID,
    "peach": ShapeModel.ELLIPSOID,
    "plum": ShapeModel.ELLIPSOID,
    "lemon": ShapeModel.ELLIPSOID,
    "qiwi": ShapeModel.ELLIPSOID,
    "egg": ShapeModel.ELLIPSOID,
    "pear": ShapeModel.ELLIPSOID,
    "mango": ShapeModel.ELLIPSOID,
    "litchi": ShapeModel.ELLIPSOID,
    "grape": ShapeModel.ELLIPSOID,
    "bread": ShapeModel.COLUMN,
    "bun": ShapeModel.COLUMN,
    "mooncake": ShapeModel.COLUMN,
    "sachima": ShapeModel.COLUMN,
    "doughnut": ShapeModel.COLUMN,
    "fired dough twist": ShapeModel.COLUMN,
    "banana": ShapeModel.IRREGULAR,
}


@dataclass(frozen=True)
class Silhouette:
    """Binary mask plus the derived features the volume formulas consume."""

    mask: np.ndarray  # (H, W) bool
    area_px: int
    row_widths: tuple[int, ...]  # per nonempty row: rightmost - leftmost + 1
    height_px: int  # number of nonempty rows
    max_width_px: int
    principal_extents: tuple[float, float]  # (major_px, minor_px)

    @property
    def major_px(self) -> float:
        return self.principal_extents[0]

    @property
    def minor_px(self) -> float:
        return self.principal_extents[1]


@dataclass(frozen=True)
class VolumeEstimate:
    volume_cm3: float
    shape_used: ShapeModel
    scale_top_cm_per_px: float
    scale_side_cm_per_px: float


def silhouette_features(mask: np.ndarray) -> Silhouette:
    """Compute all features of a binary foreground mask.

    Principal extents are full lengths along the mask's principal axes,
    derived from second moments of the foreground pixel coordinates with the
    solid-ellipse convention (extent = 4 sqrt(eigenvalue)), so a filled disc
    of radius r reports extents of about 2r each.
    """
    mask = np.asarray(mask).astype(bool)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyMask("mask has no foreground pixels")

    area = int(ys.size)
    rows = np.unique(ys)
    widths = []
    for r in rows:
        cols = xs[ys == r]
        widths.append(int(cols.max() - cols.min() + 1))

    coords = np.stack([xs.astype(np.float64), ys.astype(np.float64)])
    centered = coords - coords.mean(axis=1, keepdims=True)
    cov = centered @ centered.T / area
    eigvals = np.linalg.eigvalsh(cov)  # ascending
    minor = 4.0 * math.sqrt(max(eigvals[0], 0.0))
    major = 4.0 * math.sqrt(max(eigvals[1], 0.0))

    return Silhouette(
        mask=mask,
        area_px=area,
        row_widths=tuple(widths),
        height_px=int(rows.size),
        max_width_px=int(max(widths)),
        principal_extents=(major, minor),
    )


def estimate_volume(
    top: Silhouette,
    side: Silhouette,
    scale_top,
    scale_side,
    shape: ShapeModel,
) -> VolumeEstimate:
    """Combine two silhouettes and two scales under a shape model.

    ``scale_top`` / ``scale_side`` accept either a calibrate.ScaleFactor or a
    plain cm-per-px float.
    """
    s_top = float(getattr(scale_top, "cm_per_px", scale_top))
    s_side = float(getattr(scale_side, "cm_per_px", scale_side))
    if not (s_top > 0 and s_side > 0 and math.isfinite(s_top) and math.isfinite(s_side)):
        raise ValueError(f"scale factors must be positive and finite, got {s_top}, {s_side}")
    if top.area_px == 0 or side.area_px == 0:
        raise EmptyMask("empty silhouette")

    if shape is ShapeModel.COLUMN:
        base_area_cm2 = top.area_px * s_top * s_top
        height_cm = side.height_px * s_side
        volume = base_area_cm2 * height_cm
    elif shape is ShapeModel.ELLIPSOID:
        if top.minor_px <= 0.0:
            raise DegenerateExtent(f"top extents {top.principal_extents} cannot support an ellipsoid")
        volume = (
            (math.pi / 6.0)
            * (top.major_px * s_top)
            * (top.minor_px * s_top)
            * (side.height_px * s_side)
        )
    elif shape is ShapeModel.IRREGULAR:
        if top.major_px <= 0.0 or top.minor_px <= 0.0:
            raise DegenerateExtent(f"top extents {top.principal_extents} give no eccentricity")
        ecc = top.minor_px / top.major_px  # in (0, 1]
        slice_sum = 0.0
        for width_px in side.row_widths:
            diameter_cm = width_px * s_side
            slice_sum += (math.pi / 4.0) * diameter_cm * diameter_cm * ecc * s_side
        volume = slice_sum
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown shape model {shape}")

    return VolumeEstimate(
        volume_cm3=float(volume),
        shape_used=shape,
        scale_top_cm_per_px=s_top,
        scale_side_cm_per_px=s_side,
    )


def shape_for(label: str, overrides: dict[str, ShapeModel] | None = None) -> ShapeModel:
    """Shape model assigned to a food label; overrides take precedence."""
    if overrides and label in overrides:
        return overrides[label]
    try:
        return SHAPE_TABLE[label]
    except KeyError:
        raise UnknownFood(f"no shape model for {label!r}") from None


def load_shape_overrides(path: str | Path) -> dict[str, ShapeModel]:
    """Read a JSON map of label -> "ellipsoid"|"column"|"irregular"."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: expected an object mapping label to shape name")
    out = {}
    for label, name in raw.items():
        try:
            out[str(label)] = ShapeModel(str(name))
        except ValueError:
            valid = ", ".join(m.value for m in ShapeModel)
            raise SchemaError(f"{path}: {label}: unknown shape {name!r} (valid: {valid})") from None
    return out
