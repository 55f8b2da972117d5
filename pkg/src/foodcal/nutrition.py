"""The built-in density/energy table and calorie arithmetic.

Density and energy values are shipped exactly as published with the dataset.
Three entries carry energies above 9 kcal/g (pure fat), which is physically
implausible; they are kept verbatim and flagged with a warning rather than
corrected, so results stay comparable with the source data.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import MissingFile, NonpositiveVolume, ParseError, SchemaError, UnknownFood
from .measure import SHAPE_TABLE, ShapeModel

# Highest defensible energy density; anything above is flagged on load.
ENERGY_WARN_KCAL_PER_G = 9.0


@dataclass(frozen=True)
class FoodSpec:
    label: str
    density_g_cm3: float
    energy_kcal_g: float
    shape: ShapeModel

    def __post_init__(self):
        if not self.density_g_cm3 > 0:
            raise ValueError(f"{self.label}: density must be > 0")
        if not self.energy_kcal_g > 0:
            raise ValueError(f"{self.label}: energy must be > 0")


@dataclass(frozen=True)
class CalorieResult:
    volume_cm3: float
    mass_g: float
    calories_kcal: float


# label -> (density g/cm^3, energy kcal/g), as published.
_TABLE_ROWS: tuple[tuple[str, float, float], ...] = (
    ("apple", 0.78, 0.52),
    ("banana", 0.91, 0.89),
    ("bread", 0.18, 3.15),
    ("bun", 0.34, 2.23),
    ("doughnut", 0.31, 4.34),
    ("egg", 1.03, 1.43),
    ("fired dough twist", 0.58, 24.16),
    ("grape", 0.97, 0.69),
    ("lemon", 0.96, 0.29),
    ("litchi", 1.00, 0.66),
    ("mango", 1.07, 0.60),
    ("mooncake", 0.96, 18.83),
    ("orange", 0.90, 0.63),
    ("peach", 0.96, 0.57),
    ("pear", 1.02, 0.39),
    ("plum", 1.01, 0.46),
    ("qiwi", 0.97, 0.61),
    ("sachima", 0.22, 21.45),
    ("tomato", 0.98, 0.27),
)

FOOD_LABELS: tuple[str, ...] = tuple(label for label, _, _ in _TABLE_ROWS)


def builtin_table() -> dict[str, FoodSpec]:
    """The 19-row built-in nutrition table."""
    return {
        label: FoodSpec(label, density, energy, SHAPE_TABLE[label])
        for label, density, energy in _TABLE_ROWS
    }


_BUILTIN = builtin_table()


def lookup(label: str, table: dict[str, FoodSpec] | None = None) -> FoodSpec:
    table = _BUILTIN if table is None else table
    try:
        return table[label]
    except KeyError:
        raise UnknownFood(f"{label!r} is not in the nutrition table") from None


def calories_from_volume(volume_cm3: float, spec: FoodSpec) -> CalorieResult:
    """mass = volume x density; calories = mass x energy."""
    if not volume_cm3 > 0:
        raise NonpositiveVolume(f"volume must be > 0, got {volume_cm3}")
    mass = volume_cm3 * spec.density_g_cm3
    return CalorieResult(
        volume_cm3=volume_cm3,
        mass_g=mass,
        calories_kcal=mass * spec.energy_kcal_g,
    )


def load_nutrition_table(path: str | Path) -> dict[str, FoodSpec]:
    """Read a replacement table: [{"label", "density_g_cm3", "energy_kcal_g", "shape"}].

    Emits a warning for any energy above ENERGY_WARN_KCAL_PER_G but keeps the
    value as given.
    """
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(raw, list):
        raise SchemaError(f"{path}: expected a list of food spec objects")

    table = {}
    for i, entry in enumerate(raw):
        try:
            spec = FoodSpec(
                label=str(entry["label"]),
                density_g_cm3=float(entry["density_g_cm3"]),
                energy_kcal_g=float(entry["energy_kcal_g"]),
                shape=ShapeModel(str(entry["shape"])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: entry [{i}]: {exc}") from exc
        table[spec.label] = spec
    _warn_implausible(table, source=str(path))
    return table


def _warn_implausible(table: dict[str, FoodSpec], source: str) -> None:
    for spec in table.values():
        if spec.energy_kcal_g > ENERGY_WARN_KCAL_PER_G:
            warnings.warn(
                f"{source}: {spec.label} energy {spec.energy_kcal_g} kcal/g exceeds "
                f"{ENERGY_WARN_KCAL_PER_G} (pure fat); value kept as given",
                stacklevel=2,
            )
