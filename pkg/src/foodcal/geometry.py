"""Axis-aligned pixel rectangles and small image helpers.

Boxes use inclusive integer pixel coordinates with the origin at the top-left
corner, matching the manifest annotation format: a box (0, 0, 9, 9) covers a
10x10 pixel patch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rect:
    """Inclusive axis-aligned pixel rectangle (xmin, ymin, xmax, ymax)."""

    xmin: int
    ymin: int
    xmax: int
    ymax: int

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"degenerate box {self.as_tuple()}: need xmin < xmax and ymin < ymax")

    @classmethod
    def parse(cls, text: str) -> "Rect":
        """Parse "x0,y0,x1,y1" as used by the CLI --box flag."""
        parts = text.split(",")
        if len(parts) != 4:
            raise ValueError(f"expected x0,y0,x1,y1, got {text!r}")
        x0, y0, x1, y1 = (int(p) for p in parts)
        return cls(x0, y0, x1, y1)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.xmin, self.ymin, self.xmax, self.ymax)

    @property
    def width(self) -> int:
        return self.xmax - self.xmin + 1

    @property
    def height(self) -> int:
        return self.ymax - self.ymin + 1

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def min_side(self) -> int:
        return min(self.width, self.height)

    def within(self, width: int, height: int) -> bool:
        return 0 <= self.xmin and 0 <= self.ymin and self.xmax < width and self.ymax < height

    def clipped(self, width: int, height: int) -> "Rect":
        """Clamp to image bounds; raises ValueError if nothing remains."""
        return Rect(
            max(0, self.xmin),
            max(0, self.ymin),
            min(width - 1, self.xmax),
            min(height - 1, self.ymax),
        )

    def contains_point(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def overlaps(self, other: "Rect") -> bool:
        return not (
            self.xmax < other.xmin
            or other.xmax < self.xmin
            or self.ymax < other.ymin
            or other.ymax < self.ymin
        )

    @property
    def slices(self) -> tuple[slice, slice]:
        """(row, column) slices selecting this rectangle from an array."""
        return (slice(self.ymin, self.ymax + 1), slice(self.xmin, self.xmax + 1))


def as_pixel_array(image) -> np.ndarray:
    """Accept either an ingest.Image or a (H, W, 3) uint8 array."""
    pixels = getattr(image, "pixels", image)
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) color image, got shape {arr.shape}")
    return arr


def luma(pixels: np.ndarray) -> np.ndarray:
    """Rec.601 grayscale: 0.299 R + 0.587 G + 0.114 B, float64."""
    arr = pixels.astype(np.float64)
    return 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]
