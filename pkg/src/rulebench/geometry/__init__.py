"""2D polygon and region primitives backing every rule formula.

Two interchangeable kernel backends exist: a compiled extension
(``_ckernels``) and a pure-Python fallback (``_pykernels``). The compiled
one is preferred when importable; set ``RULEBENCH_KERNELS=python`` or
``=c`` to force a choice. Both implement the same algorithms in the same
operation order.
"""

from __future__ import annotations

import math
import os
from array import array
from dataclasses import dataclass, field

__all__ = [
    "InvalidGeometryError",
    "Polygon",
    "Region",
    "active_backend",
    "intersection_area",
    "min_distance",
    "polygons_overlap",
    "area_outside",
    "region_intersection_area",
    "region_difference_intersection_area",
    "distance_to_region",
    "point_to_polyline_distance",
]


class InvalidGeometryError(ValueError):
    """Raised for degenerate or unsupported geometric inputs."""


def _load_backend():
    forced = os.environ.get("RULEBENCH_KERNELS", "").strip().lower()
    if forced == "python":
        from . import _pykernels

        return _pykernels
    if forced == "c":
        from . import _ckernels

        return _ckernels
    try:
        from . import _ckernels

        return _ckernels
    except ImportError:
        from . import _pykernels

        return _pykernels


_K = _load_backend()


def active_backend() -> str:
    """Name of the kernel backend in use: ``"c"`` or ``"python"``."""
    return _K.BACKEND_NAME


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with counterclockwise vertex order.

    Vertices are normalized to counterclockwise on construction. The ring
    is implicit: the first vertex is not repeated at the end.
    """

    vertices: tuple[tuple[float, float], ...]
    _packed: array = field(repr=False, compare=False, default=None)

    def __init__(self, vertices):
        verts = tuple((float(x), float(y)) for x, y in vertices)
        if len(verts) < 3:
            raise InvalidGeometryError(f"polygon needs >= 3 vertices, got {len(verts)}")
        packed = array("d")
        for x, y in verts:
            packed.append(x)
            packed.append(y)
        signed = _K.poly_signed_area(packed, len(verts))
        if signed < 0.0:
            verts = verts[::-1]
            packed = array("d")
            for x, y in verts:
                packed.append(x)
                packed.append(y)
            signed = -signed
        if signed <= 0.0:
            raise InvalidGeometryError("degenerate polygon: area <= 0")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_packed", packed)
        if not _is_simple(packed, len(verts)):
            raise InvalidGeometryError("polygon is self-intersecting")

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        return _K.poly_signed_area(self._packed, self.n)

    @property
    def centroid(self) -> tuple[float, float]:
        p = self._packed
        n = self.n
        a = 0.0
        cx = 0.0
        cy = 0.0
        j = n - 1
        for i in range(n):
            w = p[2 * j] * p[2 * i + 1] - p[2 * i] * p[2 * j + 1]
            a += w
            cx += (p[2 * j] + p[2 * i]) * w
            cy += (p[2 * j + 1] + p[2 * i + 1]) * w
            j = i
        a *= 0.5
        return cx / (6.0 * a), cy / (6.0 * a)

    @property
    def is_convex(self) -> bool:
        v = self.vertices
        n = len(v)
        span = max(max(abs(x), abs(y)) for x, y in v)
        tol = -1e-12 * max(1.0, span * span)
        for i in range(n):
            ax, ay = v[i]
            bx, by = v[(i + 1) % n]
            cx, cy = v[(i + 2) % n]
            if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) < tol:
                return False
        return True

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def contains_point(self, x: float, y: float) -> bool:
        return bool(_K.point_in_polygon(x, y, self._packed, self.n))

    def translated(self, dx: float, dy: float) -> "Polygon":
        return Polygon([(x + dx, y + dy) for x, y in self.vertices])

    @classmethod
    def axis_rect(cls, xmin: float, ymin: float, xmax: float, ymax: float) -> "Polygon":
        return cls([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)])

    @classmethod
    def oriented_rect(cls, cx: float, cy: float, length: float, width: float,
                      heading: float) -> "Polygon":
        """Rectangle centered at (cx, cy), long axis along ``heading`` (rad)."""
        ch = math.cos(heading)
        sh = math.sin(heading)
        hl = 0.5 * length
        hw = 0.5 * width
        corners = [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
        return cls([(cx + ch * u - sh * v, cy + sh * u + ch * v) for u, v in corners])


def _is_simple(packed, n: int) -> bool:
    # Non-adjacent edge pairs must not meet; adjacent ones share a vertex.
    for i in range(n):
        ax, ay = packed[2 * i], packed[2 * i + 1]
        bx, by = packed[2 * ((i + 1) % n)], packed[2 * ((i + 1) % n) + 1]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            cx, cy = packed[2 * j], packed[2 * j + 1]
            dx, dy = packed[2 * ((j + 1) % n)], packed[2 * ((j + 1) % n) + 1]
            if _segments_meet(ax, ay, bx, by, cx, cy, dx, dy):
                return False
    return True


def _segments_meet(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != d2 and d3 != d4:
        return True
    return False


def intersection_area(a: Polygon, b: Polygon) -> float:
    """Area of a ∩ b. At least one operand must be convex."""
    if b.is_convex:
        return _K.clip_area(a._packed, a.n, b._packed, b.n)
    if a.is_convex:
        return _K.clip_area(b._packed, b.n, a._packed, a.n)
    raise InvalidGeometryError("intersection_area needs at least one convex polygon")


def min_distance(a: Polygon, b: Polygon) -> float:
    """Minimum distance between two polygons; 0 when overlapping or touching."""
    return _K.min_distance(a._packed, a.n, b._packed, b.n)


def polygons_overlap(a: Polygon, b: Polygon) -> bool:
    """True when the polygons share at least one point (touching counts)."""
    return bool(_K.polygons_overlap(a._packed, a.n, b._packed, b.n))


def point_to_polyline_distance(x: float, y: float, polyline) -> float:
    """Distance from (x, y) to an open polyline given as [(x, y), ...]."""
    if len(polyline) < 2:
        raise InvalidGeometryError("polyline needs >= 2 points")
    packed = array("d")
    for px, py in polyline:
        packed.append(float(px))
        packed.append(float(py))
    return _K.point_to_polyline_dist(x, y, packed, len(polyline))


@dataclass(frozen=True)
class Region:
    """Union of convex polygons with pairwise interior-disjoint members.

    Disjointness keeps union areas exact: ‖p ∩ region‖ is the plain sum of
    the per-member clipped areas. Validated on construction (overlap area
    above ``tol`` raises).
    """

    members: tuple[Polygon, ...]

    def __init__(self, members, tol: float = 1e-6):
        members = tuple(members)
        for m in members:
            if not m.is_convex:
                raise InvalidGeometryError("region members must be convex")
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if _bbox_overlap(members[i], members[j]):
                    if intersection_area(members[i], members[j]) > tol:
                        raise InvalidGeometryError(
                            f"region members {i} and {j} overlap by more than {tol} m**2"
                        )
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def area(self) -> float:
        return sum(m.area for m in self.members)

    def contains_point(self, x: float, y: float) -> bool:
        return any(m.contains_point(x, y) for m in self.members)

    def is_empty(self) -> bool:
        return not self.members


def _bbox_overlap(a: Polygon, b: Polygon) -> bool:
    ax0, ay0, ax1, ay1 = a.bounds()
    bx0, by0, bx1, by1 = b.bounds()
    return ax0 <= bx1 and bx0 <= ax1 and ay0 <= by1 and by0 <= ay1


def region_intersection_area(p: Polygon, region: Region) -> float:
    """Area of p ∩ region (region members are interior-disjoint)."""
    total = 0.0
    for m in region.members:
        if _bbox_overlap(p, m):
            total += _K.clip_area(p._packed, p.n, m._packed, m.n)
    return total


def area_outside(p: Polygon, region: Region) -> float:
    """Area of p not covered by the region; equals area(p) when fully outside."""
    inside = region_intersection_area(p, region)
    out = p.area - inside
    return out if out > 0.0 else 0.0


def region_difference_intersection_area(p: Polygon, a: Region, b: Region) -> float:
    """Area of p ∩ (a \\ b)."""
    in_a = region_intersection_area(p, a)
    if in_a == 0.0 or b.is_empty():
        return in_a
    overlap = 0.0
    for ma in a.members:
        if not _bbox_overlap(p, ma):
            continue
        piece = array("d", _K.clip_polygon(p._packed, p.n, ma._packed, ma.n))
        np_ = len(piece) // 2
        if np_ < 3:
            continue
        for mb in b.members:
            overlap += _K.clip_area(piece, np_, mb._packed, mb.n)
    out = in_a - overlap
    return out if out > 0.0 else 0.0


def distance_to_region(p: Polygon, region: Region) -> float:
    """Minimum distance from polygon to region; 0 when intersecting."""
    if region.is_empty():
        return math.inf
    return min(min_distance(p, m) for m in region.members)


# Low-level packed-buffer helpers for hot sweep loops (collision scans):
# avoid re-validating Polygon invariants on every rigid translation.

def packed_vertices(p: Polygon) -> array:
    return p._packed


def translate_packed(packed: array, n: int, dx: float, dy: float) -> array:
    out = array("d", packed)
    for i in range(n):
        out[2 * i] += dx
        out[2 * i + 1] += dy
    return out


def packed_overlap(pa: array, na: int, pb: array, nb: int) -> bool:
    return bool(_K.polygons_overlap(pa, na, pb, nb))
