"""Pure-Python geometry kernels.

Reference implementation of the hot low-level primitives. The compiled
extension in ``_ckernels.pyx`` mirrors this file operation-for-operation;
keep the two in sync when touching either.

All kernels take packed coordinate buffers ``[x0, y0, x1, y1, ...]``
(any indexable float sequence) plus the vertex count.
"""

from __future__ import annotations

import math

BACKEND_NAME = "python"


def poly_signed_area(p, n: int) -> float:
    """Shoelace signed area; positive for counterclockwise rings."""
    acc = 0.0
    j = n - 1
    for i in range(n):
        acc += (p[2 * j] + p[2 * i]) * (p[2 * i + 1] - p[2 * j + 1])
        j = i
    return 0.5 * acc


def point_in_polygon(x: float, y: float, p, n: int) -> bool:
    """Ray-cast containment test; boundary points count as inside."""
    inside = False
    j = n - 1
    for i in range(n):
        xi = p[2 * i]
        yi = p[2 * i + 1]
        xj = p[2 * j]
        yj = p[2 * j + 1]
        cross = (xj - xi) * (y - yi) - (yj - yi) * (x - xi)
        if cross == 0.0:
            if min(xi, xj) <= x <= max(xi, xj) and min(yi, yj) <= y <= max(yi, yj):
                return True
        if (yi > y) != (yj > y):
            xint = xi + (y - yi) * (xj - xi) / (yj - yi)
            if x < xint:
                inside = not inside
        j = i
    return inside


def clip_area(subj, ns: int, clip, nc: int) -> float:
    """Area of subject ∩ clip via Sutherland-Hodgman.

    The clip polygon must be convex and counterclockwise; the subject may
    be any simple counterclockwise polygon.
    """
    cur = []
    for i in range(ns):
        cur.append(subj[2 * i])
        cur.append(subj[2 * i + 1])
    m = ns

    cx1 = clip[2 * (nc - 1)]
    cy1 = clip[2 * (nc - 1) + 1]
    for ci in range(nc):
        cx2 = clip[2 * ci]
        cy2 = clip[2 * ci + 1]
        ex = cx2 - cx1
        ey = cy2 - cy1

        if m == 0:
            return 0.0
        out = []
        sx = cur[2 * (m - 1)]
        sy = cur[2 * (m - 1) + 1]
        s_side = ex * (sy - cy1) - ey * (sx - cx1)
        for i in range(m):
            px = cur[2 * i]
            py = cur[2 * i + 1]
            p_side = ex * (py - cy1) - ey * (px - cx1)
            if p_side >= 0.0:
                if s_side < 0.0:
                    t = s_side / (s_side - p_side)
                    out.append(sx + t * (px - sx))
                    out.append(sy + t * (py - sy))
                out.append(px)
                out.append(py)
            elif s_side >= 0.0:
                t = s_side / (s_side - p_side)
                out.append(sx + t * (px - sx))
                out.append(sy + t * (py - sy))
            sx = px
            sy = py
            s_side = p_side
        cur = out
        m = len(out) // 2
        cx1 = cx2
        cy1 = cy2

    if m < 3:
        return 0.0
    area = poly_signed_area(cur, m)
    return area if area > 0.0 else 0.0


def clip_polygon(subj, ns: int, clip, nc: int) -> list:
    """Subject ∩ clip as a packed vertex list (may be degenerate, len < 6)."""
    cur = []
    for i in range(ns):
        cur.append(subj[2 * i])
        cur.append(subj[2 * i + 1])
    m = ns

    cx1 = clip[2 * (nc - 1)]
    cy1 = clip[2 * (nc - 1) + 1]
    for ci in range(nc):
        cx2 = clip[2 * ci]
        cy2 = clip[2 * ci + 1]
        ex = cx2 - cx1
        ey = cy2 - cy1

        if m == 0:
            return []
        out = []
        sx = cur[2 * (m - 1)]
        sy = cur[2 * (m - 1) + 1]
        s_side = ex * (sy - cy1) - ey * (sx - cx1)
        for i in range(m):
            px = cur[2 * i]
            py = cur[2 * i + 1]
            p_side = ex * (py - cy1) - ey * (px - cx1)
            if p_side >= 0.0:
                if s_side < 0.0:
                    t = s_side / (s_side - p_side)
                    out.append(sx + t * (px - sx))
                    out.append(sy + t * (py - sy))
                out.append(px)
                out.append(py)
            elif s_side >= 0.0:
                t = s_side / (s_side - p_side)
                out.append(sx + t * (px - sx))
                out.append(sy + t * (py - sy))
            sx = px
            sy = py
            s_side = p_side
        cur = out
        m = len(out) // 2
        cx1 = cx2
        cy1 = cy2
    return cur


def _seg_intersect(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    """True if segments ab and cd share at least one point (touch counts)."""
    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    if ((d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0)) and (
        (d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0)
    ):
        return True
    if d1 == 0.0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if d2 == 0.0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    if d3 == 0.0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if d4 == 0.0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    return False


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _point_seg_dist2(px, py, ax, ay, bx, by) -> float:
    vx = bx - ax
    vy = by - ay
    wx = px - ax
    wy = py - ay
    vv = vx * vx + vy * vy
    if vv > 0.0:
        t = (wx * vx + wy * vy) / vv
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    else:
        t = 0.0
    dx = wx - t * vx
    dy = wy - t * vy
    return dx * dx + dy * dy


def _seg_seg_dist2(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    if _seg_intersect(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    best = _point_seg_dist2(ax, ay, cx, cy, dx, dy)
    d = _point_seg_dist2(bx, by, cx, cy, dx, dy)
    if d < best:
        best = d
    d = _point_seg_dist2(cx, cy, ax, ay, bx, by)
    if d < best:
        best = d
    d = _point_seg_dist2(dx, dy, ax, ay, bx, by)
    if d < best:
        best = d
    return best


def polygons_overlap(a, na: int, b, nb: int) -> bool:
    """True if the closed polygons share any point (touching counts)."""
    if point_in_polygon(a[0], a[1], b, nb):
        return True
    if point_in_polygon(b[0], b[1], a, na):
        return True
    j = na - 1
    for i in range(na):
        k = nb - 1
        for l in range(nb):
            if _seg_intersect(
                a[2 * j], a[2 * j + 1], a[2 * i], a[2 * i + 1],
                b[2 * k], b[2 * k + 1], b[2 * l], b[2 * l + 1],
            ):
                return True
            k = l
        j = i
    return False


def min_distance(a, na: int, b, nb: int) -> float:
    """Minimum distance between two polygons; 0 when they overlap or touch."""
    if point_in_polygon(a[0], a[1], b, nb):
        return 0.0
    if point_in_polygon(b[0], b[1], a, na):
        return 0.0
    best = math.inf
    j = na - 1
    for i in range(na):
        k = nb - 1
        for l in range(nb):
            d = _seg_seg_dist2(
                a[2 * j], a[2 * j + 1], a[2 * i], a[2 * i + 1],
                b[2 * k], b[2 * k + 1], b[2 * l], b[2 * l + 1],
            )
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
            k = l
        j = i
    return math.sqrt(best)


def point_to_polyline_dist(x: float, y: float, line, n: int) -> float:
    """Distance from a point to an open polyline with n vertices."""
    best = math.inf
    for i in range(n - 1):
        d = _point_seg_dist2(
            x, y, line[2 * i], line[2 * i + 1], line[2 * i + 2], line[2 * i + 3]
        )
        if d < best:
            best = d
    return math.sqrt(best) if best < math.inf else math.inf
