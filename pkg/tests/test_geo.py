import math
import random
from concurrent.futures import ThreadPoolExecutor

import pytest

from toposearch import GeoPoint, SpatialIndex, bounding_box, covering_box, haversine_m, radius_query
from toposearch.geo import EARTH_RADIUS_M

from synth import random_points


def destination(start: GeoPoint, bearing_rad: float, distance_m: float) -> GeoPoint:
    """Exact spherical direct-geodesic destination point."""
    delta = distance_m / EARTH_RADIUS_M
    phi1 = math.radians(start.lat_deg)
    lam1 = math.radians(start.lon_deg)
    phi2 = math.asin(
        math.sin(phi1) * math.cos(delta) + math.cos(phi1) * math.sin(delta) * math.cos(bearing_rad)
    )
    lam2 = lam1 + math.atan2(
        math.sin(bearing_rad) * math.sin(delta) * math.cos(phi1),
        math.cos(delta) - math.sin(phi1) * math.sin(phi2),
    )
    return GeoPoint(math.degrees(phi2), math.degrees(lam2))


def law_of_cosines_m(a: GeoPoint, b: GeoPoint) -> float:
    """Independent spherical distance oracle (law of cosines, not haversine)."""
    phi1, phi2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dlam = math.radians(b.lon_deg - a.lon_deg)
    cos_angle = math.sin(phi1) * math.sin(phi2) + math.cos(phi1) * math.cos(phi2) * math.cos(dlam)
    return EARTH_RADIUS_M * math.acos(min(1.0, max(-1.0, cos_angle)))


def brute_force_radius(points, center: GeoPoint, radius_m: float):
    """Linear-scan oracle: exact haversine filter, sorted by (distance, id)."""
    hits = []
    for doc_id, lat, lon in points:
        d = haversine_m(center, GeoPoint(lat, lon))
        if d <= radius_m:
            hits.append((d, doc_id))
    hits.sort()
    return [(doc_id, d) for d, doc_id in hits]


class TestHaversine:
    def test_identity_is_zero(self):
        p = GeoPoint(55.7963, 49.1088)
        assert haversine_m(p, p) == 0.0

    def test_antipodal_equator(self):
        d = haversine_m(GeoPoint(0.0, 0.0), GeoPoint(0.0, 180.0))
        assert d == pytest.approx(math.pi * EARTH_RADIUS_M, abs=1.0)
        assert d == pytest.approx(20_015_086.8, abs=1.0)

    def test_symmetry_on_random_pairs(self):
        rng = random.Random(11)
        for _ in range(1000):
            a = GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 180))
            b = GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 180))
            assert haversine_m(a, b) == haversine_m(b, a)
            assert haversine_m(a, b) >= 0.0

    def test_agrees_with_law_of_cosines_oracle(self):
        a = GeoPoint(55.7963, 49.1088)
        b = GeoPoint(55.6000, 49.1088)
        assert haversine_m(a, b) == pytest.approx(law_of_cosines_m(a, b), abs=0.5)

    def test_validates_coordinates(self):
        with pytest.raises(ValueError):
            GeoPoint(91.0, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, 180.5)


class TestBoundingBox:
    def test_equator_deltas(self):
        box = bounding_box(GeoPoint(0.0, 0.0), 111_320.0)
        assert box.lat_max - 0.0 == pytest.approx(1.0, abs=1e-9)
        assert box.lon_max - 0.0 == pytest.approx(1.0, abs=1e-9)

    def test_sixty_degree_longitude_delta(self):
        box = bounding_box(GeoPoint(60.0, 0.0), 111_320.0)
        assert box.lat_max - 60.0 == pytest.approx(1.0, abs=1e-9)
        assert box.lon_max - 0.0 == pytest.approx(2.0, abs=1e-9)

    def test_derived_latitude_delta(self):
        box = bounding_box(GeoPoint(55.8, 49.1), 50_000.0)
        assert box.lat_max - 55.8 == pytest.approx(0.449155, abs=1e-6)

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            bounding_box(GeoPoint(0, 0), 0.0)
        with pytest.raises(ValueError):
            bounding_box(GeoPoint(0, 0), -5.0)

    def test_latitude_clamped_at_pole(self):
        box = bounding_box(GeoPoint(89.9, 0.0), 100_000.0)
        assert box.lat_max == 90.0
        assert box.lon_clamped  # cos clamp makes the lon span huge

    def test_covering_box_sound_up_to_80_degrees(self):
        rng = random.Random(23)
        for _ in range(500):
            center = GeoPoint(rng.uniform(-80, 80), rng.uniform(-150, 150))
            radius = rng.uniform(100, 200_000)
            box = covering_box(center, radius)
            # Exact points on and inside the circle must land inside the box.
            p = destination(center, rng.uniform(0, 2 * math.pi), radius * rng.choice([1.0, rng.random()]))
            assert haversine_m(center, p) <= radius * (1 + 1e-12)
            assert box.lat_min <= p.lat_deg <= box.lat_max
            if not box.lon_clamped:
                assert box.lon_min <= p.lon_deg <= box.lon_max

    def test_covering_box_contains_documented_rim_sliver(self):
        # The documented 111320 m/degree delta undercuts the spherical
        # meridian arc; the covering box must keep due-north rim points.
        center = GeoPoint(55.0, 49.0)
        radius = 134_869.0
        rim = destination(center, 0.0, radius * 0.9999)
        doc_box = bounding_box(center, radius)
        cover = covering_box(center, radius)
        assert rim.lat_deg > doc_box.lat_max  # sliver lost by the documented box
        assert cover.lat_min <= rim.lat_deg <= cover.lat_max

    def test_covering_box_spans_all_longitudes_at_pole(self):
        box = covering_box(GeoPoint(89.5, 10.0), 200_000.0)
        assert (box.lon_min, box.lon_max) == (-180.0, 180.0)


class TestRadiusQuery:
    def test_single_doc_at_center(self):
        center = GeoPoint(55.0, 49.0)
        index = SpatialIndex([("only", center)])
        assert index.query_radius(center, 1.0) == [("only", 0.0)]

    def test_corner_of_box_excluded_by_exact_pass(self):
        # Inside the bounding box (near its corner) but beyond the radius.
        center = GeoPoint(55.0, 49.0)
        radius = 50_000.0
        corner = GeoPoint(55.0 + 0.40, 49.0 + 0.70)
        box = bounding_box(center, radius)
        assert box.lat_min <= corner.lat_deg <= box.lat_max
        assert box.lon_min <= corner.lon_deg <= box.lon_max
        assert haversine_m(center, corner) > radius
        index = SpatialIndex([("corner", corner)])
        assert index.query_radius(center, radius) == []

    def test_matches_brute_force_oracle(self):
        points = random_points(1000, seed=31)
        index = SpatialIndex([(doc_id, GeoPoint(lat, lon)) for doc_id, lat, lon in points])
        rng = random.Random(32)
        for _ in range(20):
            center = GeoPoint(rng.uniform(54, 57), rng.uniform(48, 54))
            radius = rng.uniform(1_000, 120_000)
            assert index.query_radius(center, radius) == brute_force_radius(points, center, radius)

    def test_distance_ties_break_by_doc_id(self):
        p = GeoPoint(55.0, 49.0)
        index = SpatialIndex([("b", p), ("a", p)])
        assert [doc_id for doc_id, _ in index.query_radius(p, 10.0)] == ["a", "b"]

    def test_module_level_alias(self):
        p = GeoPoint(55.0, 49.0)
        index = SpatialIndex([("x", p)])
        assert radius_query(index, p, 5.0) == index.query_radius(p, 5.0)

    def test_concurrent_queries_identical(self):
        points = random_points(500, seed=41)
        index = SpatialIndex([(doc_id, GeoPoint(lat, lon)) for doc_id, lat, lon in points])
        center = GeoPoint(55.5, 50.0)
        expected = index.query_radius(center, 60_000.0)
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(lambda _: index.query_radius(center, 60_000.0), range(32)))
        assert all(result == expected for result in results)

    def test_node_count_matches_documents(self):
        points = random_points(123, seed=9)
        index = SpatialIndex([(doc_id, GeoPoint(lat, lon)) for doc_id, lat, lon in points])
        assert len(index) == 123
