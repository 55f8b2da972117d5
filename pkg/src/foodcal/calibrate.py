"""Coin localization via a Hough circle transform and pixel-scale derivation.

The search is restricted to the coin's detection box. Pipeline: grayscale
(Rec.601 luma), 3x3 Sobel gradients, edge pixels at the 80th percentile of
gradient magnitude within the box, then a 3-D accumulator over (radius,
center y, center x) with 1 px bins. Votes are cast only along each edge
pixel's gradient line (both polarities, since the coin may be darker or
brighter than the table), which keeps the accumulator sharp. The peak is the
maximum bin after 3x3x3 non-max suppression; its support is the vote mass in
that 3x3x3 neighborhood normalized by the circle perimeter and clamped to
[0, 1], i.e. the approximate fraction of the perimeter backing the circle.

Tie-breaks are deterministic: equal support prefers the larger radius (the
coin dominates its box), then the smaller center y, then the smaller x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import BoxTooSmall, NoCircle
from .geometry import Rect, as_pixel_array, luma

MIN_BOX_SIDE = 16
DEFAULT_MIN_SUPPORT = 0.4
RADIUS_RATIO_LO = 0.25
RADIUS_RATIO_HI = 0.6
EDGE_PERCENTILE = 80.0


@dataclass(frozen=True)
class CircleEstimate:
    """Detected circle in full-image pixel coordinates."""

    cx: float
    cy: float
    r: float
    support: float


@dataclass(frozen=True)
class ScaleFactor:
    cm_per_px: float

    def __post_init__(self):
        if not (self.cm_per_px > 0 and math.isfinite(self.cm_per_px)):
            raise ValueError(f"cm_per_px must be positive and finite, got {self.cm_per_px}")


@dataclass(frozen=True)
class CalibrationConstants:
    """Physical reference sizes. The default is the 25.0 mm one-yuan coin."""

    coin_diameter_cm: float = 2.5


def detect_coin(image, box: Rect, min_support: float = DEFAULT_MIN_SUPPORT) -> CircleEstimate:
    """Find the strongest circle inside ``box``.

    The radius search range is [0.25, 0.6] x the box's shorter side, which
    rejects small texture circles and anything larger than a plausible coin.
    Raises NoCircle when the best support falls below ``min_support`` and
    BoxTooSmall when the box's shorter side is under 16 px.
    """
    pixels = as_pixel_array(image)
    height, width = pixels.shape[:2]
    if not box.within(width, height):
        raise ValueError(f"box {box.as_tuple()} outside {width}x{height} image")
    if box.min_side < MIN_BOX_SIDE:
        raise BoxTooSmall(f"box min side {box.min_side} px < {MIN_BOX_SIDE} px")

    gray = luma(pixels[box.slices])
    gx = ndimage.sobel(gray, axis=1, mode="reflect")
    gy = ndimage.sobel(gray, axis=0, mode="reflect")
    mag = np.hypot(gx, gy)

    threshold = np.percentile(mag, EDGE_PERCENTILE)
    edge_mask = (mag >= threshold) & (mag > 0)
    if not edge_mask.any():
        raise NoCircle("no gradient edges in box (support 0)")

    r_lo = max(3, math.ceil(RADIUS_RATIO_LO * box.min_side))
    r_hi = math.floor(RADIUS_RATIO_HI * box.min_side)
    radii = np.arange(r_lo, r_hi + 1)

    acc = _vote(edge_mask, gx, gy, mag, radii)
    r, cy, cx, support = select_circle_peak(acc, radii)
    if support < min_support:
        raise NoCircle(f"best circle support {support:.3f} below {min_support}")
    return CircleEstimate(cx=box.xmin + float(cx), cy=box.ymin + float(cy), r=float(r), support=support)


def _vote(edge_mask: np.ndarray, gx: np.ndarray, gy: np.ndarray, mag: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Accumulate center votes along each edge pixel's gradient direction."""
    bh, bw = edge_mask.shape
    ys, xs = np.nonzero(edge_mask)
    ux = gx[ys, xs] / mag[ys, xs]
    uy = gy[ys, xs] / mag[ys, xs]

    acc = np.zeros((radii.size, bh, bw), dtype=np.int32)
    for ri, r in enumerate(radii):
        for sign in (1.0, -1.0):
            cx = np.rint(xs + sign * r * ux).astype(np.int64)
            cy = np.rint(ys + sign * r * uy).astype(np.int64)
            ok = (cx >= 0) & (cx < bw) & (cy >= 0) & (cy < bh)
            np.add.at(acc[ri], (cy[ok], cx[ok]), 1)
    return acc


def select_circle_peak(acc: np.ndarray, radii: np.ndarray) -> tuple[int, int, int, float]:
    """Pick the accumulator peak after 3x3x3 NMS.

    Returns (radius, cy, cx, support). Support is the 3x3x3 vote mass at the
    peak divided by the circle perimeter, clamped to [0, 1]. Deterministic
    tie-break: support desc, radius desc, cy asc, cx asc.
    """
    # Integer window sums keep tie comparisons exact.
    window = ndimage.convolve(acc.astype(np.int64), np.ones((3, 3, 3), dtype=np.int64), mode="constant")
    support = window / (2.0 * math.pi * radii)[:, None, None]
    np.clip(support, None, 1.0, out=support)

    peaks = (window == ndimage.maximum_filter(window, size=3, mode="constant")) & (window > 0)
    if not peaks.any():
        return int(radii[-1]), 0, 0, 0.0

    ris, cys, cxs = np.nonzero(peaks)
    scores = support[ris, cys, cxs]
    order = np.lexsort((cxs, cys, -radii[ris], -scores))
    best = order[0]
    return int(radii[ris[best]]), int(cys[best]), int(cxs[best]), float(scores[best])


def scale_from_coin(circle: CircleEstimate, constants: CalibrationConstants | None = None) -> ScaleFactor:
    """cm per pixel from the coin's known diameter: d_cm / (2 r_px)."""
    constants = constants or CalibrationConstants()
    if not circle.r > 0:
        raise ValueError(f"circle radius must be positive, got {circle.r}")
    return ScaleFactor(cm_per_px=constants.coin_diameter_cm / (2.0 * circle.r))
