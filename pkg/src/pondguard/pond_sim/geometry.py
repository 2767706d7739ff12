"""Exact ray casting and clearance queries against the pond map."""

from __future__ import annotations

import math

from .config import Circle, PondMap, Rect


class PoseOutsidePond(ValueError):
    pass


def _ray_box_exit(x: float, y: float, dx: float, dy: float, w: float, h: float) -> float:
    t = math.inf
    if dx > 0:
        t = min(t, (w - x) / dx)
    elif dx < 0:
        t = min(t, -x / dx)
    if dy > 0:
        t = min(t, (h - y) / dy)
    elif dy < 0:
        t = min(t, -y / dy)
    return t


def _ray_circle(x: float, y: float, dx: float, dy: float, c: Circle) -> float:
    ox, oy = x - c.x, y - c.y
    b = ox * dx + oy * dy
    cc = ox * ox + oy * oy - c.r * c.r
    if cc <= 0:
        return 0.0
    disc = b * b - cc
    if disc < 0 or b > 0:
        return math.inf
    return -b - math.sqrt(disc)


def _ray_rect(x: float, y: float, dx: float, dy: float, r: Rect) -> float:
    t_enter, t_exit = -math.inf, math.inf
    for p, d, lo, hi in ((x, dx, r.xmin, r.xmax), (y, dy, r.ymin, r.ymax)):
        if d == 0:
            if p < lo or p > hi:
                return math.inf
            continue
        t0, t1 = (lo - p) / d, (hi - p) / d
        if t0 > t1:
            t0, t1 = t1, t0
        t_enter = max(t_enter, t0)
        t_exit = min(t_exit, t1)
    if t_enter > t_exit or t_exit < 0:
        return math.inf
    return max(t_enter, 0.0)


def inside_pond(m: PondMap, x: float, y: float) -> bool:
    return 0.0 <= x <= m.width and 0.0 <= y <= m.height


def ray_hit(m: PondMap, x: float, y: float, heading: float) -> float:
    """Distance from (x, y) along ``heading`` to the first wall or obstacle surface."""
    if not inside_pond(m, x, y):
        raise PoseOutsidePond(f"({x:.3f}, {y:.3f}) is outside the {m.width}x{m.height} pond")
    dx, dy = math.cos(heading), math.sin(heading)
    t = _ray_box_exit(x, y, dx, dy, m.width, m.height)
    for c in m.circles:
        t = min(t, _ray_circle(x, y, dx, dy, c))
    for r in m.rects:
        t = min(t, _ray_rect(x, y, dx, dy, r))
    return t


def raycast_distance(m: PondMap, x: float, y: float, heading: float, hull_radius: float) -> float:
    """Hull-to-surface distance along the heading ray, floored at 0."""
    return max(0.0, ray_hit(m, x, y, heading) - hull_radius)


def surface_distance(m: PondMap, x: float, y: float) -> float:
    """Signed distance from a point to the nearest wall or obstacle (negative inside)."""
    d = min(x, m.width - x, y, m.height - y)
    for c in m.circles:
        d = min(d, math.hypot(x - c.x, y - c.y) - c.r)
    for r in m.rects:
        ex = max(r.xmin - x, 0.0, x - r.xmax)
        ey = max(r.ymin - y, 0.0, y - r.ymax)
        if ex == 0.0 and ey == 0.0:
            d = min(d, -min(x - r.xmin, r.xmax - x, y - r.ymin, r.ymax - y))
        else:
            d = min(d, math.hypot(ex, ey))
    return d


def clearance(m: PondMap, x: float, y: float, hull_radius: float) -> float:
    """Gap between the hull circle and the nearest surface; <= 0 means collision."""
    return surface_distance(m, x, y) - hull_radius


def fan(m: PondMap, x: float, y: float, heading: float, half_angle: float, rays: int, hull_radius: float):
    """(bearing offset, hull distance) for ``rays`` rays spread over +-half_angle."""
    if rays == 1:
        offsets = [0.0]
    else:
        offsets = [-half_angle + 2 * half_angle * i / (rays - 1) for i in range(rays)]
    return [(o, raycast_distance(m, x, y, heading + o, hull_radius)) for o in offsets]
