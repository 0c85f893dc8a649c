"""Spherical distance and KD-tree radius search over document coordinates.

Distances are great-circle (haversine) on a sphere of radius 6,371,000 m.
Radius queries run in two passes: a rectangular bounding-box range query on
a 2-d KD-tree, then an exact haversine filter. Indexes are immutable after
construction, so concurrent queries are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

EARTH_RADIUS_M = 6_371_000.0

# Meters per degree of latitude used for bounding-box deltas.
METERS_PER_DEGREE = 111_320.0

# cos(latitude) is clamped below this to avoid polar blow-up of the
# longitude delta.
_MIN_COS_LAT = 1e-6

_LEAF_SIZE = 16


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 point in degrees."""

    lat_deg: float
    lon_deg: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"latitude out of range [-90, 90]: {self.lat_deg}")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ValueError(f"longitude out of range [-180, 180]: {self.lon_deg}")


class BoundingBox(NamedTuple):
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    # True when the longitude span hit ±180° and was clamped; queries near
    # the antimeridian may miss wrap-around neighbors (documented behavior).
    lon_clamped: bool = False


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points, in meters."""
    phi1 = math.radians(a.lat_deg)
    phi2 = math.radians(b.lat_deg)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon_deg - a.lon_deg)
    sin_phi = math.sin(dphi * 0.5)
    sin_lam = math.sin(dlam * 0.5)
    h = sin_phi * sin_phi + math.cos(phi1) * math.cos(phi2) * sin_lam * sin_lam
    return 2.0 * EARTH_RADIUS_M * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))


def bounding_box(center: GeoPoint, radius_m: float) -> BoundingBox:
    """Candidate-pruning rectangle with the documented deltas.

    Deltas follow radius_m / 111320 for latitude and the cos(latitude)
    correction for longitude; latitude bounds clamp to [-90, 90] and
    longitude bounds to [-180, 180] with the clamp flagged. Because the
    111320 m/degree constant slightly exceeds the spherical meridian arc
    (~111195 m/degree), this rectangle can shave a thin sliver off the rim
    of the disk; radius search therefore prunes with :func:`covering_box`.
    """
    if radius_m <= 0:
        raise ValueError(f"radius_m must be positive, got {radius_m}")
    dlat = radius_m / METERS_PER_DEGREE
    cos_lat = max(math.cos(math.radians(center.lat_deg)), _MIN_COS_LAT)
    dlon = radius_m / (METERS_PER_DEGREE * cos_lat)
    lat_min = max(center.lat_deg - dlat, -90.0)
    lat_max = min(center.lat_deg + dlat, 90.0)
    lon_min = center.lon_deg - dlon
    lon_max = center.lon_deg + dlon
    clamped = lon_min < -180.0 or lon_max > 180.0
    return BoundingBox(lat_min, lat_max, max(lon_min, -180.0), min(lon_max, 180.0), clamped)


def covering_box(center: GeoPoint, radius_m: float) -> BoundingBox:
    """Exact spherical rectangle containing every point within the radius.

    Latitude spans the angular radius exactly; the longitude half-width is
    asin(sin r / cos lat), the true extreme longitude of a spherical circle.
    A circle reaching a pole spans all longitudes. Used for index pruning so
    the subsequent exact haversine pass sees every in-radius point.
    """
    if radius_m <= 0:
        raise ValueError(f"radius_m must be positive, got {radius_m}")
    r = radius_m / EARTH_RADIUS_M
    dlat = math.degrees(r)
    lat_min = center.lat_deg - dlat
    lat_max = center.lat_deg + dlat
    if lat_min <= -90.0 or lat_max >= 90.0 or r >= math.pi / 2:
        # The circle reaches a pole: all longitudes are inside.
        return BoundingBox(max(lat_min, -90.0), min(lat_max, 90.0), -180.0, 180.0, False)
    cos_lat = math.cos(math.radians(center.lat_deg))
    dlon = math.degrees(math.asin(min(math.sin(r) / cos_lat, 1.0)))
    lon_min = center.lon_deg - dlon
    lon_max = center.lon_deg + dlon
    clamped = lon_min < -180.0 or lon_max > 180.0
    return BoundingBox(lat_min, lat_max, max(lon_min, -180.0), min(lon_max, 180.0), clamped)


class _Node(NamedTuple):
    axis: int
    split: float
    left: "_Node | _Leaf"
    right: "_Node | _Leaf"


class _Leaf(NamedTuple):
    indices: list[int]


class SpatialIndex:
    """2-d KD-tree over (lat, lon) with doc_id payloads.

    Splits alternate latitude/longitude, nodes are built on the median
    point, leaves hold up to 16 points. Build once, query many; the tree is
    never mutated after construction.
    """

    def __init__(self, entries: Iterable[tuple[str, GeoPoint]]) -> None:
        entries = list(entries)
        self._ids = [doc_id for doc_id, _ in entries]
        self._lats = [p.lat_deg for _, p in entries]
        self._lons = [p.lon_deg for _, p in entries]
        self._root = self._build(list(range(len(entries))), depth=0)

    def __len__(self) -> int:
        return len(self._ids)

    def _coord(self, index: int, axis: int) -> float:
        return self._lats[index] if axis == 0 else self._lons[index]

    def _build(self, indices: list[int], depth: int) -> _Node | _Leaf:
        if len(indices) <= _LEAF_SIZE:
            return _Leaf(indices)
        axis = depth % 2
        indices.sort(key=lambda i: self._coord(i, axis))
        mid = len(indices) // 2
        split = self._coord(indices[mid], axis)
        return _Node(
            axis,
            split,
            self._build(indices[:mid], depth + 1),
            self._build(indices[mid:], depth + 1),
        )

    def _range(self, node: _Node | _Leaf, box: BoundingBox, out: list[int]) -> None:
        if isinstance(node, _Leaf):
            for i in node.indices:
                if box.lat_min <= self._lats[i] <= box.lat_max and box.lon_min <= self._lons[i] <= box.lon_max:
                    out.append(i)
            return
        lo, hi = (box.lat_min, box.lat_max) if node.axis == 0 else (box.lon_min, box.lon_max)
        if lo <= node.split:
            self._range(node.left, box, out)
        if hi >= node.split:
            self._range(node.right, box, out)

    def range_query(self, box: BoundingBox) -> list[int]:
        """Indices of all points inside the rectangle (unordered)."""
        out: list[int] = []
        self._range(self._root, box, out)
        return out

    def query_radius(self, center: GeoPoint, radius_m: float) -> list[tuple[str, float]]:
        """All documents within ``radius_m`` of ``center``.

        Two passes: KD-tree rectangular range query on the covering box,
        then exact haversine filtering. Results sort ascending by distance
        with ties broken by doc_id.
        """
        box = covering_box(center, radius_m)
        hits: list[tuple[float, str]] = []
        for i in self.range_query(box):
            d = haversine_m(center, GeoPoint(self._lats[i], self._lons[i]))
            if d <= radius_m:
                hits.append((d, self._ids[i]))
        hits.sort()
        return [(doc_id, d) for d, doc_id in hits]


def radius_query(index: SpatialIndex, center: GeoPoint, radius_m: float) -> list[tuple[str, float]]:
    """Module-level alias for :meth:`SpatialIndex.query_radius`."""
    return index.query_radius(center, radius_m)


def build_spatial_index(documents: Sequence) -> SpatialIndex:
    """Index the coordinate-bearing documents of a corpus."""
    return SpatialIndex((doc.doc_id, doc.point) for doc in documents if doc.point is not None)
