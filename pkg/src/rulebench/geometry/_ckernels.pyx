# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels.

Operation-for-operation translation of ``_pykernels.py``; keep the two in
sync when touching either. Same IEEE double arithmetic in the same order,
so both backends agree to rounding noise.
"""

from libc.math cimport sqrt, INFINITY
from libc.stdlib cimport malloc, realloc, free

BACKEND_NAME = "c"


cdef double _signed_area(double* p, int n) nogil:
    cdef double acc = 0.0
    cdef int i, j = n - 1
    for i in range(n):
        acc += (p[2 * j] + p[2 * i]) * (p[2 * i + 1] - p[2 * j + 1])
        j = i
    return 0.5 * acc


def poly_signed_area(double[::1] p, int n):
    """Shoelace signed area; positive for counterclockwise rings."""
    return _signed_area(&p[0], n)


cdef bint _point_in(double x, double y, double* p, int n) nogil:
    cdef bint inside = False
    cdef int i, j = n - 1
    cdef double xi, yi, xj, yj, cross, xint, lo, hi
    for i in range(n):
        xi = p[2 * i]
        yi = p[2 * i + 1]
        xj = p[2 * j]
        yj = p[2 * j + 1]
        cross = (xj - xi) * (y - yi) - (yj - yi) * (x - xi)
        if cross == 0.0:
            lo = xi if xi < xj else xj
            hi = xi if xi > xj else xj
            if lo <= x <= hi:
                lo = yi if yi < yj else yj
                hi = yi if yi > yj else yj
                if lo <= y <= hi:
                    return True
        if (yi > y) != (yj > y):
            xint = xi + (y - yi) * (xj - xi) / (yj - yi)
            if x < xint:
                inside = not inside
        j = i
    return inside


def point_in_polygon(double x, double y, double[::1] p, int n):
    """Ray-cast containment test; boundary points count as inside."""
    return _point_in(x, y, &p[0], n)


def clip_area(double[::1] subj, int ns, double[::1] clip, int nc):
    """Area of subject ∩ clip via Sutherland-Hodgman.

    The clip polygon must be convex and counterclockwise; the subject may
    be any simple counterclockwise polygon.
    """
    cdef int cap = 4 * (ns + nc) + 16
    cdef double* cur = <double*> malloc(cap * sizeof(double))
    cdef double* out = <double*> malloc(cap * sizeof(double))
    cdef double* tmp
    if cur == NULL or out == NULL:
        free(cur)
        free(out)
        raise MemoryError()

    cdef int m = ns, mo, i, ci
    cdef double cx1, cy1, cx2, cy2, ex, ey
    cdef double sx, sy, px, py, s_side, p_side, t, area

    for i in range(ns):
        cur[2 * i] = subj[2 * i]
        cur[2 * i + 1] = subj[2 * i + 1]

    cx1 = clip[2 * (nc - 1)]
    cy1 = clip[2 * (nc - 1) + 1]
    for ci in range(nc):
        cx2 = clip[2 * ci]
        cy2 = clip[2 * ci + 1]
        ex = cx2 - cx1
        ey = cy2 - cy1

        if m == 0:
            free(cur)
            free(out)
            return 0.0
        if 4 * m + 8 > cap:
            cap = 4 * m + 8
            cur = <double*> realloc(cur, cap * sizeof(double))
            out = <double*> realloc(out, cap * sizeof(double))
            if cur == NULL or out == NULL:
                free(cur)
                free(out)
                raise MemoryError()
        mo = 0
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
                    out[2 * mo] = sx + t * (px - sx)
                    out[2 * mo + 1] = sy + t * (py - sy)
                    mo += 1
                out[2 * mo] = px
                out[2 * mo + 1] = py
                mo += 1
            elif s_side >= 0.0:
                t = s_side / (s_side - p_side)
                out[2 * mo] = sx + t * (px - sx)
                out[2 * mo + 1] = sy + t * (py - sy)
                mo += 1
            sx = px
            sy = py
            s_side = p_side
        tmp = cur
        cur = out
        out = tmp
        m = mo
        cx1 = cx2
        cy1 = cy2

    if m < 3:
        area = 0.0
    else:
        area = _signed_area(cur, m)
        if area < 0.0:
            area = 0.0
    free(cur)
    free(out)
    return area


def clip_polygon(double[::1] subj, int ns, double[::1] clip, int nc):
    """Subject ∩ clip as a packed vertex list (may be degenerate, len < 6)."""
    cdef int cap = 4 * (ns + nc) + 16
    cdef double* cur = <double*> malloc(cap * sizeof(double))
    cdef double* out = <double*> malloc(cap * sizeof(double))
    cdef double* tmp
    if cur == NULL or out == NULL:
        free(cur)
        free(out)
        raise MemoryError()

    cdef int m = ns, mo, i, ci
    cdef double cx1, cy1, cx2, cy2, ex, ey
    cdef double sx, sy, px, py, s_side, p_side, t

    for i in range(ns):
        cur[2 * i] = subj[2 * i]
        cur[2 * i + 1] = subj[2 * i + 1]

    cx1 = clip[2 * (nc - 1)]
    cy1 = clip[2 * (nc - 1) + 1]
    for ci in range(nc):
        cx2 = clip[2 * ci]
        cy2 = clip[2 * ci + 1]
        ex = cx2 - cx1
        ey = cy2 - cy1

        if m == 0:
            break
        if 4 * m + 8 > cap:
            cap = 4 * m + 8
            cur = <double*> realloc(cur, cap * sizeof(double))
            out = <double*> realloc(out, cap * sizeof(double))
            if cur == NULL or out == NULL:
                free(cur)
                free(out)
                raise MemoryError()
        mo = 0
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
                    out[2 * mo] = sx + t * (px - sx)
                    out[2 * mo + 1] = sy + t * (py - sy)
                    mo += 1
                out[2 * mo] = px
                out[2 * mo + 1] = py
                mo += 1
            elif s_side >= 0.0:
                t = s_side / (s_side - p_side)
                out[2 * mo] = sx + t * (px - sx)
                out[2 * mo + 1] = sy + t * (py - sy)
                mo += 1
            sx = px
            sy = py
            s_side = p_side
        tmp = cur
        cur = out
        out = tmp
        m = mo
        cx1 = cx2
        cy1 = cy2

    result = [0.0] * (2 * m)
    for i in range(2 * m):
        result[i] = cur[i]
    free(cur)
    free(out)
    return result


cdef bint _on_segment(double ax, double ay, double bx, double by,
                      double px, double py) nogil:
    cdef double lo, hi
    lo = ax if ax < bx else bx
    hi = ax if ax > bx else bx
    if not (lo <= px <= hi):
        return False
    lo = ay if ay < by else by
    hi = ay if ay > by else by
    return lo <= py <= hi


cdef bint _seg_intersect(double ax, double ay, double bx, double by,
                         double cx, double cy, double dx, double dy) nogil:
    cdef double d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    cdef double d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    cdef double d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    cdef double d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
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


cdef double _point_seg_dist2(double px, double py, double ax, double ay,
                             double bx, double by) nogil:
    cdef double vx = bx - ax
    cdef double vy = by - ay
    cdef double wx = px - ax
    cdef double wy = py - ay
    cdef double vv = vx * vx + vy * vy
    cdef double t, dx, dy
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


cdef double _seg_seg_dist2(double ax, double ay, double bx, double by,
                           double cx, double cy, double dx, double dy) nogil:
    cdef double best, d
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


def polygons_overlap(double[::1] a, int na, double[::1] b, int nb):
    """True if the closed polygons share any point (touching counts)."""
    cdef double* pa = &a[0]
    cdef double* pb = &b[0]
    cdef int i, j, k, l
    if _point_in(pa[0], pa[1], pb, nb):
        return True
    if _point_in(pb[0], pb[1], pa, na):
        return True
    j = na - 1
    for i in range(na):
        k = nb - 1
        for l in range(nb):
            if _seg_intersect(pa[2 * j], pa[2 * j + 1], pa[2 * i], pa[2 * i + 1],
                              pb[2 * k], pb[2 * k + 1], pb[2 * l], pb[2 * l + 1]):
                return True
            k = l
        j = i
    return False


def min_distance(double[::1] a, int na, double[::1] b, int nb):
    """Minimum distance between two polygons; 0 when they overlap or touch."""
    cdef double* pa = &a[0]
    cdef double* pb = &b[0]
    cdef double best = INFINITY
    cdef double d
    cdef int i, j, k, l
    if _point_in(pa[0], pa[1], pb, nb):
        return 0.0
    if _point_in(pb[0], pb[1], pa, na):
        return 0.0
    j = na - 1
    for i in range(na):
        k = nb - 1
        for l in range(nb):
            d = _seg_seg_dist2(pa[2 * j], pa[2 * j + 1], pa[2 * i], pa[2 * i + 1],
                               pb[2 * k], pb[2 * k + 1], pb[2 * l], pb[2 * l + 1])
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
            k = l
        j = i
    return sqrt(best)


def point_to_polyline_dist(double x, double y, double[::1] line, int n):
    """Distance from a point to an open polyline with n vertices."""
    cdef double best = INFINITY
    cdef double d
    cdef int i
    for i in range(n - 1):
        d = _point_seg_dist2(x, y, line[2 * i], line[2 * i + 1],
                             line[2 * i + 2], line[2 * i + 3])
        if d < best:
            best = d
    return sqrt(best) if best < INFINITY else INFINITY
