"""Labeled bounding boxes from interchangeable detection providers.

A provider is anything with a ``detections(image)`` method returning raw
``Detection`` objects for one view. Two providers ship here: one replaying
ground-truth annotations, one reading an external detector's JSON sidecar.
``detect`` validates the raw boxes against the scene rules (exactly one coin,
one or two foods with distinct labels) and never repairs a broken scene
silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Protocol

from .errors import (
    DuplicateFoodLabels,
    InvariantViolation,
    MissingAnnotations,
    MultipleCoins,
    NoCoin,
    NoFood,
    ParseError,
    SchemaError,
    TooManyFoods,
)
from .geometry import Rect, as_pixel_array

if TYPE_CHECKING:
    from .ingest import ImagePairRecord

COIN_LABEL = "coin"
DEFAULT_SCORE_THRESHOLD = 0.5
MAX_FOODS_PER_VIEW = 2


@dataclass(frozen=True)
class Detection:
    """One labeled box with a confidence score in [0, 1]."""

    label: str
    box: Rect
    score: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class SceneDetections:
    """Validated detections for one view: exactly one coin, 1..2 foods.

    ``notes`` records non-fatal repairs (currently only boundary clipping).
    """

    coin: Detection
    foods: tuple[Detection, ...]
    notes: tuple[str, ...] = ()

    def food_labels(self) -> set[str]:
        return {d.label for d in self.foods}


class DetectorProvider(Protocol):
    def detections(self, image) -> list[Detection]: ...


@dataclass(frozen=True)
class AnnotationProvider:
    """Replays ground-truth boxes for one view of one record."""

    boxes: tuple[Detection, ...]

    def detections(self, image) -> list[Detection]:
        return list(self.boxes)


@dataclass(frozen=True)
class SidecarProvider:
    """Boxes from an external detector's per-image JSON file.

    Detections below the score threshold are dropped at construction time.
    Same-label boxes that overlap are treated as duplicate detections of one
    object and resolved to the strictly higher score (ties keep the larger
    box); disjoint same-label boxes are kept and will fail scene validation,
    because each image holds at most one food of a given type.
    """

    source: Path
    boxes: tuple[Detection, ...]
    score_threshold: float = DEFAULT_SCORE_THRESHOLD

    def detections(self, image) -> list[Detection]:
        return list(self.boxes)


def annotation_provider(record: "ImagePairRecord", view: str) -> AnnotationProvider:
    """Provider replaying the record's ground-truth boxes for ``view``."""
    if view not in ("top", "side"):
        raise ValueError(f"view must be 'top' or 'side', got {view!r}")
    boxes = record.annotations_top if view == "top" else record.annotations_side
    if not boxes:
        raise MissingAnnotations(f"record {record.pair_id!r} has no {view} annotations")
    return AnnotationProvider(boxes=tuple(boxes))


def sidecar_provider(path: str | Path, score_threshold: float = DEFAULT_SCORE_THRESHOLD) -> SidecarProvider:
    """Load an external detector's sidecar JSON for one image."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ParseError(f"sidecar {path} not found") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"sidecar {path}: {exc}") from exc

    if not isinstance(raw, dict) or "detections" not in raw:
        raise SchemaError(f"sidecar {path}: expected an object with a 'detections' list")
    entries = raw["detections"]
    if not isinstance(entries, list):
        raise SchemaError(f"sidecar {path}: 'detections' must be a list")

    boxes = []
    for i, entry in enumerate(entries):
        try:
            det = Detection(
                label=str(entry["label"]),
                box=Rect(int(entry["xmin"]), int(entry["ymin"]), int(entry["xmax"]), int(entry["ymax"])),
                score=float(entry["score"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"sidecar {path}: detections[{i}]: {exc}") from exc
        if det.score >= score_threshold:
            boxes.append(det)
    return SidecarProvider(source=path, boxes=tuple(_dedup_overlapping(boxes)), score_threshold=score_threshold)


def _dedup_overlapping(boxes: list[Detection]) -> list[Detection]:
    """Keep one of each overlapping same-label group (highest score wins)."""
    kept: list[Detection] = []
    for det in boxes:
        replaced = False
        for i, other in enumerate(kept):
            if other.label == det.label and other.box.overlaps(det.box):
                better = _prefer(det, other)
                kept[i] = better
                replaced = True
                break
        if not replaced:
            kept.append(det)
    return kept


def _prefer(a: Detection, b: Detection) -> Detection:
    if a.score != b.score:
        return a if a.score > b.score else b
    if a.box.area != b.box.area:
        return a if a.box.area > b.box.area else b
    return b  # equal score and area: keep the earlier detection


def detect(image, provider: DetectorProvider) -> SceneDetections:
    """Run a provider on one view and validate the resulting scene.

    Boxes extending past the image edge are clipped (and flagged in notes);
    anything else that violates the scene invariants is an error rather than
    a silent repair.
    """
    pixels = as_pixel_array(image)
    height, width = pixels.shape[:2]

    notes: list[str] = []
    cleaned: list[Detection] = []
    for det in provider.detections(image):
        if det.box.within(width, height):
            cleaned.append(det)
            continue
        try:
            clipped = det.box.clipped(width, height)
        except ValueError as exc:
            raise InvariantViolation(
                f"detection {det.label!r} box {det.box.as_tuple()} lies outside the {width}x{height} image"
            ) from exc
        notes.append(f"clipped {det.label} box {det.box.as_tuple()} -> {clipped.as_tuple()}")
        cleaned.append(Detection(det.label, clipped, det.score))

    coins = [d for d in cleaned if d.label == COIN_LABEL]
    foods = [d for d in cleaned if d.label != COIN_LABEL]

    if not coins:
        raise NoCoin("no coin detection in view")
    if len(coins) > 1:
        raise MultipleCoins(f"{len(coins)} coin detections in view")
    if not foods:
        raise NoFood("no food detection in view")
    if len(foods) > MAX_FOODS_PER_VIEW:
        raise TooManyFoods(f"{len(foods)} food detections in view (max {MAX_FOODS_PER_VIEW})")
    labels = [d.label for d in foods]
    if len(set(labels)) != len(labels):
        raise DuplicateFoodLabels(f"duplicate food labels in view: {sorted(labels)}")

    return SceneDetections(coin=coins[0], foods=tuple(foods), notes=tuple(notes))


def boxes_as_detections(raw: Iterable[dict]) -> tuple[Detection, ...]:
    """Build Detections from manifest-style annotation dicts."""
    out = []
    for i, entry in enumerate(raw):
        try:
            out.append(
                Detection(
                    label=str(entry["label"]),
                    box=Rect(int(entry["xmin"]), int(entry["ymin"]), int(entry["xmax"]), int(entry["ymax"])),
                    score=float(entry.get("score", 1.0)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"annotation [{i}]: {exc}") from exc
    return tuple(out)
