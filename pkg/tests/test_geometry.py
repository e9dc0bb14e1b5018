"""Polygon kernel tests: examples, properties, and the rasterization oracle."""

import math
import random

import numpy as np
import pytest

from rulebench.geometry import (
    InvalidGeometryError,
    Polygon,
    Region,
    area_outside,
    distance_to_region,
    intersection_area,
    min_distance,
    point_to_polyline_distance,
    polygons_overlap,
    region_difference_intersection_area,
    region_intersection_area,
)

UNIT = Polygon.axis_rect(0, 0, 1, 1)


def random_convex(rng: random.Random, cx=0.0, cy=0.0, radius=1.5, n_max=8) -> Polygon:
    n = rng.randint(3, n_max)
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
    pts = [(cx + radius * rng.uniform(0.7, 1.0) * math.cos(a),
            cy + radius * rng.uniform(0.7, 1.0) * math.sin(a)) for a in angles]
    hull = _hull(pts)
    if len(hull) < 3:
        return random_convex(rng, cx, cy, radius, n_max)
    return Polygon(hull)


def _hull(points):
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def raster_intersection_area(a: Polygon, b: Polygon, res=1e-3) -> float:
    """Grid-rasterization oracle: count cell centers inside both polygons."""
    ax0, ay0, ax1, ay1 = a.bounds()
    bx0, by0, bx1, by1 = b.bounds()
    x0, y0 = max(ax0, bx0), max(ay0, by0)
    x1, y1 = min(ax1, bx1), min(ay1, by1)
    if x0 >= x1 or y0 >= y1:
        return 0.0
    xs = np.arange(x0 + res / 2, x1, res)
    ys = np.arange(y0 + res / 2, y1, res)
    gx, gy = np.meshgrid(xs, ys)
    inside = np.ones(gx.shape, dtype=bool)
    for poly in (a, b):
        v = poly.vertices
        for i in range(len(v)):
            x_a, y_a = v[i]
            x_b, y_b = v[(i + 1) % len(v)]
            inside &= (x_b - x_a) * (gy - y_a) - (y_b - y_a) * (gx - x_a) >= 0
        if not inside.any():
            return 0.0
    return float(inside.sum()) * res * res


class TestPolygon:
    def test_normalizes_to_counterclockwise(self):
        cw = Polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
        assert cw.area == pytest.approx(1.0)
        assert cw.vertices[0] == (1, 0)  # reversed

    def test_rejects_degenerate(self):
        with pytest.raises(InvalidGeometryError):
            Polygon([(0, 0), (1, 0), (2, 0)])

    def test_rejects_self_intersecting(self):
        with pytest.raises(InvalidGeometryError):
            Polygon([(0, 0), (1, 1), (1, 0), (0, 1)])

    def test_rejects_too_few_vertices(self):
        with pytest.raises(InvalidGeometryError):
            Polygon([(0, 0), (1, 0)])

    def test_centroid_and_convexity(self):
        r = Polygon.oriented_rect(3.0, -2.0, 4.5, 2.0, 0.7)
        cx, cy = r.centroid
        assert cx == pytest.approx(3.0, abs=1e-9)
        assert cy == pytest.approx(-2.0, abs=1e-9)
        assert r.is_convex
        l_shape = Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
        assert not l_shape.is_convex

    def test_contains_point(self):
        assert UNIT.contains_point(0.5, 0.5)
        assert UNIT.contains_point(0.0, 0.5)  # boundary counts
        assert not UNIT.contains_point(1.5, 0.5)


class TestIntersectionArea:
    def test_identity(self):
        assert intersection_area(UNIT, UNIT) == pytest.approx(1.0)

    def test_disjoint(self):
        assert intersection_area(UNIT, UNIT.translated(2, 0)) == 0.0

    def test_half_overlap(self):
        # hand geometry: unit squares offset by 0.5 share a 0.5 x 1 strip
        assert intersection_area(UNIT, UNIT.translated(0.5, 0)) == pytest.approx(0.5)
        oracle = raster_intersection_area(UNIT, UNIT.translated(0.5, 0))
        assert oracle == pytest.approx(0.5, rel=0.02)

    def test_symmetry(self, rng):
        for _ in range(50):
            a = random_convex(rng, rng.uniform(-1, 1), rng.uniform(-1, 1))
            b = random_convex(rng, rng.uniform(-1, 1), rng.uniform(-1, 1))
            assert intersection_area(a, b) == pytest.approx(
                intersection_area(b, a), rel=1e-9, abs=1e-12)

    def test_translation_invariance(self, rng):
        a = random_convex(rng)
        b = random_convex(rng, 0.5, 0.2)
        base = (intersection_area(a, b), min_distance(a, b))
        for _ in range(10):
            dx, dy = rng.uniform(-50, 50), rng.uniform(-50, 50)
            at, bt = a.translated(dx, dy), b.translated(dx, dy)
            assert intersection_area(at, bt) == pytest.approx(base[0], rel=1e-9,
                                                              abs=1e-9)
            assert min_distance(at, bt) == pytest.approx(base[1], rel=1e-9,
                                                         abs=1e-9)

    def test_nonconvex_subject_against_convex_clip(self):
        l_shape = Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
        clip = Polygon.axis_rect(0, 0, 2, 2)
        assert intersection_area(l_shape, clip) == pytest.approx(3.0)

    def test_rejects_two_nonconvex(self):
        l_shape = Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
        with pytest.raises(InvalidGeometryError):
            intersection_area(l_shape, l_shape)

    def test_randomized_against_rasterization(self):
        # 1000 random convex pairs vs the grid oracle at 1e-3 m resolution;
        # pairs sized so the raster noise sits well under the 2% band
        rng = random.Random(99)
        checked = 0
        while checked < 1000:
            a = random_convex(rng, rng.uniform(-0.25, 0.25),
                              rng.uniform(-0.25, 0.25), radius=0.8)
            b = random_convex(rng, rng.uniform(-0.25, 0.25),
                              rng.uniform(-0.25, 0.25), radius=0.8)
            got = intersection_area(a, b)
            if got < 0.2:
                continue
            oracle = raster_intersection_area(a, b)
            assert got == pytest.approx(oracle, rel=0.02)
            checked += 1


class TestMinDistance:
    def test_overlapping(self):
        assert min_distance(UNIT, UNIT.translated(0.5, 0.5)) == 0.0

    def test_contained(self):
        inner = Polygon.axis_rect(0.4, 0.4, 0.6, 0.6)
        assert min_distance(UNIT, inner) == 0.0

    def test_axis_gap(self):
        assert min_distance(UNIT, UNIT.translated(2, 0)) == pytest.approx(1.0)

    def test_diagonal_gap(self):
        # corner-to-corner: offset (2, 2) leaves a sqrt(2) diagonal gap
        assert min_distance(UNIT, UNIT.translated(2, 2)) == pytest.approx(
            math.sqrt(2.0))

    def test_matches_dense_sampling(self, rng):
        for _ in range(25):
            a = random_convex(rng, 0, 0)
            b = random_convex(rng, rng.uniform(2.5, 5.0), rng.uniform(-2, 2))
            got = min_distance(a, b)
            oracle = _sampled_distance(a, b)
            assert got <= oracle + 1e-9
            assert got == pytest.approx(oracle, abs=2e-2)

    def test_symmetry(self, rng):
        for _ in range(50):
            a = random_convex(rng, 0, 0)
            b = random_convex(rng, rng.uniform(-4, 4), rng.uniform(-4, 4))
            assert min_distance(a, b) == min_distance(b, a)


def _sampled_distance(a: Polygon, b: Polygon, per_edge=200) -> float:
    def boundary(p):
        pts = []
        v = p.vertices
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            for k in range(per_edge):
                t = k / per_edge
                pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
        return pts

    pa = boundary(a)
    pb = boundary(b)
    return min(math.hypot(qx - px, qy - py) for px, py in pa for qx, qy in pb)


class TestRegions:
    def test_partition_property(self, rng):
        # intersection + outside-area partitions the polygon's own area
        for _ in range(50):
            a = random_convex(rng, rng.uniform(-1, 1), rng.uniform(-1, 1))
            b = random_convex(rng, rng.uniform(-1, 1), rng.uniform(-1, 1))
            region = Region([b])
            total = intersection_area(a, b) + area_outside(a, region)
            assert total == pytest.approx(a.area, rel=1e-9)

    def test_area_outside_extremes(self):
        region = Region([Polygon.axis_rect(0, 0, 10, 10)])
        assert area_outside(Polygon.axis_rect(2, 2, 3, 3), region) == 0.0
        outside = Polygon.axis_rect(20, 20, 21, 21)
        assert area_outside(outside, region) == pytest.approx(outside.area)

    def test_half_plane_overlap(self):
        region = Region([Polygon.axis_rect(-100, -100, 0.5, 100)])
        assert area_outside(UNIT, region) == pytest.approx(0.5)
        oracle = raster_intersection_area(UNIT, Polygon.axis_rect(-5, -5, 0.5, 5))
        assert 1.0 - oracle == pytest.approx(0.5, rel=0.02)

    def test_members_must_be_disjoint(self):
        with pytest.raises(InvalidGeometryError):
            Region([UNIT, UNIT.translated(0.5, 0)])

    def test_members_must_be_convex(self):
        l_shape = Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
        with pytest.raises(InvalidGeometryError):
            Region([l_shape])

    def test_union_area_with_disjoint_members(self):
        region = Region([Polygon.axis_rect(0, 0, 1, 1),
                         Polygon.axis_rect(1, 0, 2, 1)])
        p = Polygon.axis_rect(0.5, 0, 1.5, 1)
        assert region_intersection_area(p, region) == pytest.approx(1.0)

    def test_region_difference(self):
        a = Region([Polygon.axis_rect(0, 0, 4, 4)])
        b = Region([Polygon.axis_rect(2, 0, 4, 4)])
        p = Polygon.axis_rect(1, 1, 3, 3)
        # p covers 2x2 of a, of which the x>2 half is also in b
        assert region_difference_intersection_area(p, a, b) == pytest.approx(2.0)

    def test_distance_to_region(self):
        region = Region([Polygon.axis_rect(0, 0, 1, 1),
                         Polygon.axis_rect(5, 0, 6, 1)])
        p = Polygon.axis_rect(2.5, 0, 3, 1)
        assert distance_to_region(p, region) == pytest.approx(1.5)
        assert distance_to_region(p, Region(())) == math.inf


def test_point_to_polyline_distance():
    line = [(0, 0), (10, 0), (10, 10)]
    assert point_to_polyline_distance(5, 3, line) == pytest.approx(3.0)
    assert point_to_polyline_distance(12, 12, line) == pytest.approx(math.hypot(2, 2))


def test_polygons_overlap_touching_counts():
    assert polygons_overlap(UNIT, UNIT.translated(1.0, 0.0))
    assert not polygons_overlap(UNIT, UNIT.translated(1.0 + 1e-9, 0.0))


class TestBackends:
    def test_pure_python_matches_active_backend(self, rng):
        from rulebench.geometry import _pykernels as pk
        from rulebench.geometry import packed_vertices

        try:
            from rulebench.geometry import _ckernels as ck
        except ImportError:
            pytest.skip("compiled kernels not built")
        for _ in range(200):
            a = random_convex(rng, rng.uniform(-2, 2), rng.uniform(-2, 2))
            b = random_convex(rng, rng.uniform(-2, 2), rng.uniform(-2, 2))
            pa, pb = packed_vertices(a), packed_vertices(b)
            assert pk.clip_area(pa, a.n, pb, b.n) == pytest.approx(
                ck.clip_area(pa, a.n, pb, b.n), rel=1e-12, abs=1e-12)
            assert pk.min_distance(pa, a.n, pb, b.n) == pytest.approx(
                ck.min_distance(pa, a.n, pb, b.n), rel=1e-12, abs=1e-12)
            assert pk.polygons_overlap(pa, a.n, pb, b.n) == \
                bool(ck.polygons_overlap(pa, a.n, pb, b.n))
            assert pk.poly_signed_area(pa, a.n) == pytest.approx(
                ck.poly_signed_area(pa, a.n), rel=1e-12)
