"""Geocoder adapters. The engine only needs address -> point; production
deployments can plug a live service in, tests and the bundled demo use the
offline table."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Union

from .geo import Geometry, point


class GeocoderError(RuntimeError):
    """Upstream adapter failure (network, quota, malformed response)."""


@dataclass(frozen=True)
class GeocodeResult:
    normalized: str
    point: Geometry


class Geocoder(Protocol):
    def geocode(self, address: str) -> Optional[GeocodeResult]: ...


def _normalize(address: str) -> str:
    return re.sub(r"\s+", " ", address.strip()).casefold()


class OfflineGeocoder:
    """Resolves addresses from a fixture table (address, normalized display
    string, lon, lat)."""

    def __init__(self, entries: dict[str, GeocodeResult]):
        self._entries = entries

    @classmethod
    def from_csv(cls, source: Union[str, Path, io.TextIOBase]) -> "OfflineGeocoder":
        if isinstance(source, (str, Path)):
            handle = open(source, "r", encoding="utf-8", newline="")
            own = True
        else:
            handle, own = source, False
        try:
            entries = {}
            for row in csv.DictReader(handle):
                entries[_normalize(row["address"])] = GeocodeResult(
                    row["normalized"], point(float(row["lon"]), float(row["lat"]))
                )
            return cls(entries)
        finally:
            if own:
                handle.close()

    def geocode(self, address: str) -> Optional[GeocodeResult]:
        return self._entries.get(_normalize(address))
