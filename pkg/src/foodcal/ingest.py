"""Dataset loading: manifest JSON, images, and per-image annotations.

The manifest is the single canonical input format. One record pairs a top
view and a side view of the same food portion, plus optional ground-truth
volume/mass used by the evaluation harness. A small converter for the
per-image XML bounding-box files that the released dataset ships with is
included at the bottom.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import ImageOps, UnidentifiedImageError

from .detect import Detection, boxes_as_detections
from .errors import DecodeError, InvariantViolation, MissingFile, ParseError, TooSmall
from .nutrition import FOOD_LABELS

MIN_IMAGE_SIDE = 32

# "mix" marks images holding two different foods; it has no nutrition row.
VALID_LABELS = frozenset(FOOD_LABELS) | {"mix"}


@dataclass(frozen=True)
class Image:
    """Decoded 8-bit RGB image; pixel buffer is frozen after load."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8, row-major

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "Image":
        arr = np.ascontiguousarray(pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        return cls(width=arr.shape[1], height=arr.shape[0], pixels=arr)


@dataclass(frozen=True)
class ImagePairRecord:
    pair_id: str
    food_label: str
    top_image_path: Path
    side_image_path: Path
    annotations_top: tuple[Detection, ...] = ()
    annotations_side: tuple[Detection, ...] = ()
    true_volume_cm3: float | None = None
    true_mass_g: float | None = None


@dataclass(frozen=True)
class Manifest:
    dataset_root: Path
    records: tuple[ImagePairRecord, ...]

    def record(self, pair_id: str) -> ImagePairRecord:
        for rec in self.records:
            if rec.pair_id == pair_id:
                return rec
        raise KeyError(pair_id)


def load_image(path: str | Path) -> Image:
    """Decode a PNG/JPEG, normalizing EXIF orientation."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        with PILImage.open(path) as img:
            img = ImageOps.exif_transpose(img)
            arr = np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    if min(arr.shape[0], arr.shape[1]) < MIN_IMAGE_SIDE:
        raise TooSmall(f"{path}: {arr.shape[1]}x{arr.shape[0]} below the {MIN_IMAGE_SIDE} px pipeline minimum")
    return Image.from_array(arr)


def load_manifest(path: str | Path) -> Manifest:
    """Load and validate a manifest.

    All records are validated before anything is returned; if any record is
    bad, an InvariantViolation carrying one diagnostic per offending record
    is raised, so a load never partially succeeds silently.
    """
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc

    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be an object")
    for key in ("dataset_root", "records"):
        if key not in raw:
            raise ParseError(f"{path}: missing top-level field {key!r}")

    root = Path(raw["dataset_root"])
    if not root.is_absolute():
        root = path.parent / root

    records: list[ImagePairRecord] = []
    diagnostics: list[tuple[str, str]] = []
    seen_ids: set[str] = set()

    for i, entry in enumerate(raw["records"]):
        try:
            rec = _parse_record(entry)
        except (KeyError, TypeError, ValueError, ParseError) as exc:
            raise ParseError(f"{path}: records[{i}]: {exc}") from exc
        for reason in _record_problems(rec, root, seen_ids):
            diagnostics.append((rec.pair_id, reason))
        seen_ids.add(rec.pair_id)
        records.append(rec)

    if diagnostics:
        raise InvariantViolation(
            f"{path}: {len(diagnostics)} record problem(s); first: {diagnostics[0][0]}: {diagnostics[0][1]}",
            diagnostics=diagnostics,
        )
    return Manifest(dataset_root=root, records=tuple(records))


def _parse_record(entry: dict) -> ImagePairRecord:
    ann = entry.get("annotations", {}) or {}
    return ImagePairRecord(
        pair_id=str(entry["pair_id"]),
        food_label=str(entry["food_label"]),
        top_image_path=Path(entry["top_image"]),
        side_image_path=Path(entry["side_image"]),
        annotations_top=boxes_as_detections(ann.get("top", [])),
        annotations_side=boxes_as_detections(ann.get("side", [])),
        true_volume_cm3=_opt_number(entry.get("true_volume_cm3")),
        true_mass_g=_opt_number(entry.get("true_mass_g")),
    )


def _opt_number(value) -> float | None:
    if value is None:
        return None
    return float(value)


def _record_problems(rec: ImagePairRecord, root: Path, seen_ids: set[str]) -> list[str]:
    problems = []
    if rec.pair_id in seen_ids:
        problems.append("duplicate")
    if rec.food_label not in VALID_LABELS:
        problems.append(f"unknown food label {rec.food_label!r}")
    if rec.top_image_path == rec.side_image_path:
        problems.append("top and side image paths are identical")
    for name, rel in (("top", rec.top_image_path), ("side", rec.side_image_path)):
        if not (root / rel).exists():
            problems.append(f"{name} image missing: {rel}")
    if rec.true_volume_cm3 is not None and not rec.true_volume_cm3 > 0:
        problems.append("nonpositive volume")
    if rec.true_mass_g is not None and not rec.true_mass_g > 0:
        problems.append("nonpositive mass")
    return problems


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    """Write the canonical manifest JSON (round-trips through load_manifest)."""
    payload = {
        "dataset_root": str(manifest.dataset_root),
        "records": [_record_payload(rec) for rec in manifest.records],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def _record_payload(rec: ImagePairRecord) -> dict:
    return {
        "pair_id": rec.pair_id,
        "food_label": rec.food_label,
        "top_image": str(rec.top_image_path),
        "side_image": str(rec.side_image_path),
        "true_volume_cm3": rec.true_volume_cm3,
        "true_mass_g": rec.true_mass_g,
        "annotations": {
            "top": [_box_payload(d) for d in rec.annotations_top],
            "side": [_box_payload(d) for d in rec.annotations_side],
        },
    }


def _box_payload(det: Detection) -> dict:
    return {
        "label": det.label,
        "xmin": det.box.xmin,
        "ymin": det.box.ymin,
        "xmax": det.box.xmax,
        "ymax": det.box.ymax,
    }


# --- XML annotation converter ----------------------------------------------
#
# The released dataset annotates each image with a VOC-style XML file listing
# <object><name> plus <bndbox> xmin/ymin/xmax/ymax. These helpers turn those
# files into manifest records.

def parse_annotation_xml(path: str | Path) -> tuple[Detection, ...]:
    """Read one per-image XML bounding-box file."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ParseError(f"{path}: {exc}") from exc

    boxes = []
    for obj in tree.getroot().iter("object"):
        name = obj.findtext("name")
        bnd = obj.find("bndbox")
        if name is None or bnd is None:
            raise ParseError(f"{path}: <object> missing <name> or <bndbox>")
        try:
            coords = {k: int(float(bnd.findtext(k))) for k in ("xmin", "ymin", "xmax", "ymax")}
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: bad bndbox: {exc}") from exc
        boxes.append(Detection(label=name.strip(), box=_rect_from(coords)))
    return tuple(boxes)


def _rect_from(coords: dict):
    from .geometry import Rect

    return Rect(coords["xmin"], coords["ymin"], coords["xmax"], coords["ymax"])


def record_from_xml(
    pair_id: str,
    food_label: str,
    top_image: str | Path,
    side_image: str | Path,
    top_xml: str | Path,
    side_xml: str | Path,
    true_volume_cm3: float | None = None,
    true_mass_g: float | None = None,
) -> ImagePairRecord:
    """Assemble one manifest record from a pair of XML annotation files."""
    return ImagePairRecord(
        pair_id=pair_id,
        food_label=food_label,
        top_image_path=Path(top_image),
        side_image_path=Path(side_image),
        annotations_top=parse_annotation_xml(top_xml),
        annotations_side=parse_annotation_xml(side_xml),
        true_volume_cm3=true_volume_cm3,
        true_mass_g=true_mass_g,
    )
