"""Spacetime geometry: light-ray tubes, cubes, sampling regions, direction grid.

A tube is a cylinder of radius r around the ray x = x0 + omega (t - t0) with
|omega| = 1 and omega within pi/8 of e1 (plus tolerance for dilated covers).
Finite tubes additionally satisfy |t - t0| <= half_length; window-spanning
tubes (half_length None) run the whole time window.  Cross-sections are
measured in the torus metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

SECTOR_HALF_ANGLE = math.pi / 8.0


def unit_dir(theta: float) -> np.ndarray:
    """Unit vector at angle theta from e1."""
    return np.array([math.cos(theta), math.sin(theta)])


def dir_angle(omega) -> float:
    """Angle of a direction vector measured from e1, signed."""
    return math.atan2(omega[1], omega[0])


def wrap_delta(delta, box: float):
    return delta - box * np.round(np.asarray(delta) / box)


@dataclass(frozen=True)
class Tube:
    t0: float
    x0: tuple
    omega: tuple
    half_length: Optional[float]   # None = spans the time window
    radius: float = 1.0
    lam: float = 1.0               # dilation factor

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        if abs(np.linalg.norm(om) - 1.0) > 1e-9:
            raise ValueError("tube direction must be a unit vector")
        if abs(dir_angle(om)) > SECTOR_HALF_ANGLE + 1e-3:
            raise ValueError("tube direction outside the e1 cone")
        if self.radius < 1.0 - 1e-12:
            raise ValueError("tube radius must be >= 1")
        if self.lam < 1.0 - 1e-12:
            raise ValueError("dilation must be >= 1")
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        object.__setattr__(self, "omega", tuple(float(v) for v in om))

    @property
    def eff_radius(self) -> float:
        return self.lam * self.radius

    @property
    def eff_half_length(self) -> Optional[float]:
        # dilation stretches finite tubes in time; window-spanning tubes only widen
        if self.half_length is None:
            return None
        return self.lam * self.half_length

    def axis_at(self, t):
        t = np.asarray(t, dtype=float)
        ox, oy = self.omega
        return np.stack([self.x0[0] + ox * (t - self.t0),
                         self.x0[1] + oy * (t - self.t0)], axis=-1)

    def time_active(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.half_length is None:
            return np.ones(t.shape, dtype=bool)
        return np.abs(t - self.t0) <= self.eff_half_length + 1e-12

    def contains(self, t, x, box: float) -> np.ndarray:
        """Membership for points (t, x); x has shape (..., 2)."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        c = self.axis_at(t)
        d = wrap_delta(x - c, box)
        inside = np.sqrt((d * d).sum(axis=-1)) <= self.eff_radius + 1e-12
        return inside & self.time_active(t)

    def dilate(self, lam: float) -> "Tube":
        if lam < 1.0 - 1e-12:
            raise ValueError("dilation must be >= 1")
        return replace(self, lam=self.lam * lam)


def tube_contains(tube: Tube, point, box: float) -> bool:
    """Single-point membership; point = (t, x1, x2)."""
    t, x1, x2 = point
    return bool(tube.contains(t, np.array([x1, x2]), box))


def dilate(tube: Tube, lam: float) -> Tube:
    return tube.dilate(lam)


@dataclass(frozen=True)
class Cube:
    center: tuple      # (t, x1, x2)
    side: float

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("cube side must be positive")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    def contains(self, t, x, box: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        h = 0.5 * self.side
        ok_t = np.abs(t - self.center[0]) <= h + 1e-12
        d1 = np.abs(wrap_delta(x[..., 0] - self.center[1], box)) <= h + 1e-12
        d2 = np.abs(wrap_delta(x[..., 1] - self.center[2], box)) <= h + 1e-12
        return ok_t & d1 & d2


def shrink_cube(cube: Cube, c: float) -> Cube:
    """Same center, (1 - c) of the side length."""
    if not 0.0 < c < 1.0:
        raise ValueError("shrink factor must lie in (0, 1)")
    return Cube(cube.center, (1.0 - c) * cube.side)


def cube_touches_tube(cube: Cube, tube: Tube, box: float, dilation: float = 1.0,
                      samples_per_axis: int = 5) -> bool:
    """Sampled intersection test between a cube and a (dilated) tube."""
    probe = tube.dilate(dilation) if dilation > 1.0 else tube
    h = 0.5 * cube.side
    g = np.linspace(-h, h, samples_per_axis)
    tt, x1, x2 = np.meshgrid(g + cube.center[0], g + cube.center[1], g + cube.center[2],
                             indexing="ij")
    pts = np.stack([x1.ravel(), x2.ravel()], axis=-1)
    return bool(probe.contains(tt.ravel(), pts, box).any())


def axis_unit_cubes(tube: Tube) -> list:
    """Unit cubes centered on the tube axis at unit spacing (the cube-train
    sites; one per unit of tube length)."""
    if tube.half_length is None:
        raise ValueError("only finite tubes have an axis cube sequence")
    half = tube.eff_half_length
    n = int(math.floor(half + 0.5))
    cubes = []
    for j in range(-n, n + 1):
        t = tube.t0 + j
        x = tube.axis_at(t)
        cubes.append(Cube((t, x[0], x[1]), 1.0))
    return cubes


def cover_tube_by_unit_cubes(tube: Tube) -> list:
    """Unit cubes whose union contains the tube: a 3x3 transverse stencil
    around each axis cube (a radius-1 cross-section plus the axis drift within
    one time unit reaches 1.5 per coordinate, which side-1 cubes centered on
    the axis alone cannot contain)."""
    cubes = []
    for c in axis_unit_cubes(tube):
        t, x1, x2 = c.center
        for d1 in (-1.0, 0.0, 1.0):
            for d2 in (-1.0, 0.0, 1.0):
                cubes.append(Cube((t, x1 + d1, x2 + d2), 1.0))
    return cubes


@dataclass(frozen=True)
class Region:
    """Time slab intersected with an optional cube, minus a union of tubes."""
    t_lo: float
    t_hi: float
    excluded: tuple = ()
    cube: Optional[Cube] = None

    def time_mask(self, times: np.ndarray) -> np.ndarray:
        # half-open [t_lo, t_hi) so adjacent regions partition the window
        return (times >= self.t_lo - 1e-12) & (times < self.t_hi - 1e-12)

    def contains(self, t, x, box: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        ok = (t >= self.t_lo - 1e-12) & (t < self.t_hi - 1e-12)
        if self.cube is not None:
            ok = ok & self.cube.contains(t, x, box)
        for tube in self.excluded:
            ok = ok & ~tube.contains(t, x, box)
        return ok


def full_region(config) -> Region:
    return Region(-config.half_window, config.half_window)


def separation(t1: Tube, t2: Tube, length_scale: float, box: float) -> float:
    """|x1 - x2| + scale * |omega1 - omega2| (torus metric on anchors)."""
    dx = wrap_delta(np.asarray(t1.x0) - np.asarray(t2.x0), box)
    dw = np.asarray(t1.omega) - np.asarray(t2.omega)
    return float(np.linalg.norm(dx) + length_scale * np.linalg.norm(dw))


# ---------------------------------------------------------------------------
# dyadic direction grid (n = 2: each hemisphere is an arc, charted by angle)

@dataclass(frozen=True)
class SphereSquare:
    hemisphere: int    # 0: |angle from e1| <= pi/2, 1: the opposite arc
    level: int
    index: int         # 0 .. 2^level - 1

    @property
    def chart_width(self) -> float:
        return math.pi / (2 ** self.level)

    def angle_range(self):
        lo = -math.pi / 2 + self.hemisphere * math.pi + self.index * self.chart_width
        return lo, lo + self.chart_width

    def center_direction(self) -> np.ndarray:
        lo, hi = self.angle_range()
        return unit_dir(0.5 * (lo + hi))

    def contains_angle(self, theta: float) -> bool:
        lo, hi = self.angle_range()
        th = (theta + math.pi / 2) % (2 * math.pi) - math.pi / 2
        return lo <= th < hi

    def contains(self, other: "SphereSquare") -> bool:
        """Set inclusion: does this square contain the (deeper) other square?"""
        if other.hemisphere != self.hemisphere or other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index


def dyadic_sphere_grid(level: int) -> list:
    """All direction squares at one level; level 0 gives the two hemispheres."""
    if level < 0:
        raise ValueError("level must be >= 0")
    return [SphereSquare(h, level, i) for h in (0, 1) for i in range(2 ** level)]


def square_of_direction(theta: float, level: int) -> SphereSquare:
    """The unique square at the given level containing direction angle theta."""
    th = (theta + math.pi / 2) % (2 * math.pi)
    hemi = 0 if th < math.pi else 1
    local = th - hemi * math.pi
    width = math.pi / (2 ** level)
    idx = min(int(local / width), 2 ** level - 1)
    return SphereSquare(hemi, level, idx)
