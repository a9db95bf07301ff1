"""Seeded synthetic capacity generators.

Each generator fills a data gap with randomized but bounded values; the
arithmetic identities (available = total - in_use, draws inside their
bands) hold exactly by construction. Randomness comes from a named,
documented source: a Mersenne Twister seeded with a 64-bit integer, with
child streams split off via BLAKE2 digests of (seed, label) so rows can be
generated independently and deterministically.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .geo import Geometry, intersects

SECONDS_PER_YEAR = 31_536_000

# critical densities by road class, vehicles/km/lane
ROAD_CLASS_DENSITY = {
    "Freeway": 26,
    "Expressway / Highway": 24,
    "Arterial": 20,
    "Collector": 18,
    "Ramp": 22,
    "Local / Street": 12,
    "Local / Strata": 12,
    "Local / Unknown": 12,
    "Service": 10,
    "Alleyway / Laneway": 10,
    "Resource / Recreation": 16,
    "Rapid Transit": 28,
    "Winter": 18,
}
DEFAULT_ROAD_DENSITY = 20

TRANSIT_VEHICLE_CAPACITY = {"streetcar": 130, "subway": 1000, "bus": 60}

# ratio-capacity constants per service kind: minimum ratio, its unit,
# synthetic catchment population, catchment radius (m)
RATIO_CAPACITY_CONSTANTS = {
    "supermarket": {
        "min_ratio": 0.001,
        "min_ratio_unit": "sites_per_person",
        "population": 22_139,
        "radius_m": None,  # catchment is a ~5 km^2 polygon, not a radius
        "catchment_area_km2": 5.0,
    },
    "park": {
        "min_ratio": 20.0,
        "min_ratio_unit": "square_metre_per_person",
        "population": 8_855,
        "radius_m": 800.0,
    },
    "library": {
        "min_ratio": 1.0,
        "min_ratio_unit": "square_metre_per_person",
        "population": 55_613,
        "radius_m": 2000.0,
    },
    "community_centre": {
        "total_spaces": 34_000,
        "total_spaces_spread": 0.20,
        "population": 13_903,
        "radius_m": 2000.0,
    },
}

GRAVITY_UTILIZATION_BANDS = [  # (diameter upper bound m, lo, hi)
    (0.3, 0.20, 0.50),
    (1.0, 0.30, 0.60),
    (math.inf, 0.50, 0.70),
]

PRESSURIZED_UTILIZATION_BANDS = [  # by diameter in mm
    (150, 0.20, 0.50),
    (300, 0.30, 0.60),
    (450, 0.40, 0.70),
    (800, 0.50, 0.80),
    (math.inf, 0.60, 0.90),
]

PRESSURIZED_VELOCITY_BANDS = [  # typical flow velocity m/s by diameter mm
    (150, 0.6, 1.2),
    (400, 0.8, 1.5),
    (800, 1.0, 1.8),
    (1200, 1.0, 2.0),
    (math.inf, 1.2, 2.5),
]

SCHOOL_UTILIZATION = (0.826, 0.926)  # 87.6% plus/minus 5 points
OCCUPANCY_95_100 = (0.95, 1.00)
WATER_SCALE = (1.10, 1.30)
SOLID_WASTE_SCALE = (1.10, 1.25)
ELECTRIC_TOTAL_FACTOR = (3.0, 6.0)
FIRE_POPULATION_RANGE = (15_000, 50_000)
FIRE_STAFF_RANGE = (5, 20)
FIRE_MIN_RATIO = 0.001


class Rng:
    """Seeded random source. `split(label)` derives an independent child
    stream, so per-row generation order does not disturb other rows."""

    def __init__(self, seed: int):
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self._rng = random.Random(self.seed)

    def split(self, label: str) -> "Rng":
        digest = hashlib.blake2b(
            f"{self.seed}:{label}".encode(), digest_size=8
        ).digest()
        return Rng(int.from_bytes(digest, "big"))

    def uniform(self, lo: float, hi: float) -> float:
        """Draw in the half-open interval [lo, hi)."""
        if hi < lo:
            raise ValueError("empty interval")
        if hi == lo:
            return lo
        while True:
            x = lo + (hi - lo) * self._rng.random()
            if x < hi:
                return x

    def randint(self, lo: int, hi: int) -> int:
        return self._rng.randint(lo, hi)


def _band(value: float, bands) -> tuple[float, float]:
    for upper, lo, hi in bands:
        if value < upper:
            return lo, hi
    upper, lo, hi = bands[-1]
    return lo, hi


@dataclass(frozen=True)
class CapacitySplit:
    total: float
    in_use: float

    @property
    def available(self) -> float:
        return self.total - self.in_use


@dataclass(frozen=True)
class RoadLinkParams:
    speed_limit_kmh: float
    lanes: int
    road_class: str = ""

    def __post_init__(self):
        if self.speed_limit_kmh <= 0:
            raise ValueError("speed limit must be positive")
        if self.lanes < 1:
            raise ValueError("lane count must be at least 1")


def road_capacity(
    params: RoadLinkParams, rng: Rng, diagnostics: Optional[list[str]] = None
) -> CapacitySplit:
    """Vehicles/hour: total = speed * lanes * critical density; in-use draws
    a U[0.5, 0.95) utilization."""
    density = ROAD_CLASS_DENSITY.get(params.road_class)
    if density is None:
        density = DEFAULT_ROAD_DENSITY
        if diagnostics is not None:
            diagnostics.append(
                f"road_class={params.road_class!r} unknown; default density {DEFAULT_ROAD_DENSITY}"
            )
    total = params.speed_limit_kmh * params.lanes * density
    in_use = total * rng.uniform(0.5, 0.95)
    return CapacitySplit(total, in_use)


@dataclass(frozen=True)
class SewerParams:
    diameter_m: float
    slope: float = 0.0
    manning_n: float = 0.013
    flow_velocity_ms: Optional[float] = None
    cross_section_m2: Optional[float] = None


def manning_full_flow(diameter_m: float, slope: float, manning_n: float = 0.013) -> float:
    if diameter_m <= 0 or slope <= 0:
        raise ValueError("diameter and slope must be positive")
    if manning_n <= 0:
        raise ValueError("Manning n must be positive")
    return 0.312 * (diameter_m ** (8.0 / 3.0)) * math.sqrt(slope) / manning_n


def sewer_capacity_gravity(params: SewerParams, rng: Rng) -> CapacitySplit:
    """Gravity main: Manning full-flow rate with a diameter-banded
    utilization draw. The value is tagged by the consuming mapping in the
    units its dataset uses (annual volume), matching the source tables."""
    max_flow = manning_full_flow(params.diameter_m, params.slope, params.manning_n)
    lo, hi = _band(params.diameter_m, GRAVITY_UTILIZATION_BANDS)
    in_use = max_flow * rng.uniform(lo, hi)
    return CapacitySplit(max_flow, in_use)


def sewer_capacity_pressurized(params: SewerParams, rng: Rng) -> CapacitySplit:
    """Pressurized main: annual volume = area x velocity x seconds/year,
    with diameter-banded velocity (when absent) and utilization."""
    if params.diameter_m <= 0:
        raise ValueError("diameter must be positive")
    diameter_mm = params.diameter_m * 1000.0
    area = params.cross_section_m2
    if area is None:
        area = math.pi * (params.diameter_m / 2.0) ** 2
    velocity = params.flow_velocity_ms
    if velocity is None:
        lo, hi = _band(diameter_mm, PRESSURIZED_VELOCITY_BANDS)
        velocity = rng.uniform(lo, hi)
    annual_max = area * velocity * SECONDS_PER_YEAR
    lo, hi = _band(diameter_mm, PRESSURIZED_UTILIZATION_BANDS)
    in_use = annual_max * rng.uniform(lo, hi)
    return CapacitySplit(annual_max, in_use)


def transit_capacity(route_type: str, daily_trips: int) -> int:
    """Max daily ridership: scheduled trips x vehicle capacity."""
    key = route_type.strip().lower()
    if key not in TRANSIT_VEHICLE_CAPACITY:
        raise ValueError(f"unknown transit route type: {route_type!r}")
    if daily_trips < 0:
        raise ValueError("trip count cannot be negative")
    return TRANSIT_VEHICLE_CAPACITY[key] * daily_trips


def scaled_total_capacity(in_use: float, lo: float, hi: float, rng: Rng) -> CapacitySplit:
    """Total capacity as a uniform multiple of observed use (e.g. water
    wards 1.10-1.30, solid waste 1.10-1.25)."""
    if in_use < 0:
        raise ValueError("in-use capacity cannot be negative")
    if not (1.0 < lo <= hi):
        raise ValueError("scale factors must satisfy 1 < lo <= hi")
    total = in_use * rng.uniform(lo, hi)
    return CapacitySplit(total, in_use)


def ratio_capacity(kind: str) -> dict:
    if kind not in RATIO_CAPACITY_CONSTANTS:
        raise ValueError(f"unknown ratio-capacity kind: {kind!r}")
    return dict(RATIO_CAPACITY_CONSTANTS[kind])


def occupancy(total: int, lo: float, hi: float, rng: Rng) -> int:
    """Occupied count: round(total x U[lo, hi))."""
    if not (0 <= lo <= hi):
        raise ValueError("occupancy band must satisfy 0 <= lo <= hi")
    return round(total * rng.uniform(lo, hi))


@dataclass(frozen=True)
class FireRunAreaRow:
    run_area: str
    population: int
    firefighters: int
    in_use_ratio: float
    min_ratio: float = FIRE_MIN_RATIO


def fire_capacity(run_areas: Sequence[str], rng: Rng) -> list[FireRunAreaRow]:
    """Per run area: synthetic population and staffing; capacity in use is
    the staffing ratio, the minimum constraint is 0.001 firefighters per
    person."""
    rows = []
    for run_area in run_areas:
        sub = rng.split(f"fire:{run_area}")
        population = sub.randint(*FIRE_POPULATION_RANGE)
        firefighters = sub.randint(*FIRE_STAFF_RANGE)
        rows.append(
            FireRunAreaRow(
                run_area=run_area,
                population=population,
                firefighters=firefighters,
                in_use_ratio=firefighters / population,
            )
        )
    return rows


def electric_capacity(avail_max_kva: float, rng: Rng) -> CapacitySplit:
    """Published max available capacity becomes the available figure; total
    is drawn 3-6x above it."""
    if avail_max_kva < 0:
        raise ValueError("available capacity cannot be negative")
    total = avail_max_kva * rng.uniform(*ELECTRIC_TOTAL_FACTOR)
    return CapacitySplit(total, total - avail_max_kva)


def building_parcel_join(
    buildings: Iterable[tuple[str, Geometry]],
    parcels: Iterable[tuple[str, Geometry]],
    diagnostics: Optional[list[str]] = None,
) -> list[tuple[str, str]]:
    """(building id, parcel id) for every intersecting pair; a building
    straddling several parcels occupies them all."""
    parcel_list = list(parcels)
    out = []
    for building_id, building_geom in buildings:
        if building_geom is None:
            if diagnostics is not None:
                diagnostics.append(f"building={building_id} reason=missing geometry")
            continue
        for parcel_id, parcel_geom in parcel_list:
            if parcel_geom is None:
                continue
            if intersects(building_geom, parcel_geom):
                out.append((building_id, parcel_id))
    return out


_FIRST_NAMES = [
    "Avery", "Blake", "Carmen", "Dmitri", "Elena", "Farah", "Gustavo", "Harper",
    "Imani", "Jun", "Katarzyna", "Liam", "Mei", "Noor", "Olu", "Priya",
    "Quentin", "Rosa", "Sven", "Tala", "Umar", "Vera", "Wen", "Ximena",
    "Yusuf", "Zofia",
]
_LAST_NAMES = [
    "Abara", "Bianchi", "Chen", "Dubois", "Eriksen", "Fontaine", "Garcia",
    "Hansen", "Ivanov", "Jacobs", "Kim", "Larsen", "Moreau", "Novak",
    "Okafor", "Petrov", "Quinn", "Rossi", "Silva", "Tanaka", "Ueda",
    "Visser", "Walsh", "Xu", "Yamada", "Zhang",
]


@dataclass(frozen=True)
class OwnerRow:
    parcel_id: str
    owner_name: str
    pin: str


def fake_owners(parcel_ids: Sequence[str], rng: Rng) -> list[OwnerRow]:
    """One distinct synthetic person-owner per parcel, deterministic under
    the seed. PINs are 9-digit zero-padded counter-derived strings."""
    rows = []
    used: set[str] = set()
    for index, parcel_id in enumerate(parcel_ids, start=1):
        sub = rng.split(f"owner:{parcel_id}")
        name = f"{_FIRST_NAMES[sub.randint(0, len(_FIRST_NAMES) - 1)]} {_LAST_NAMES[sub.randint(0, len(_LAST_NAMES) - 1)]}"
        while name in used:
            name = f"{name} {_LAST_NAMES[sub.randint(0, len(_LAST_NAMES) - 1)]}"
        used.add(name)
        rows.append(OwnerRow(parcel_id, name, f"{index:09d}"))
    return rows


# --- CSV emission -----------------------------------------------------------


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            count += 1
    return count


def format_number(value: float, places: int = 6) -> str:
    """Fixed-point text without trailing zeros; keeps CSVs diff-stable."""
    text = f"{value:.{places}f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-") else "0"
