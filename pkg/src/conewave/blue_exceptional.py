"""Exceptional tubes of a blue wave: where can its local mass concentrate?

``find_bad_cubes`` is the brute-force oracle: scan every unit spacetime cube
of the window and report those holding more than delta^2 of the (normalized)
mass.  ``exceptional_tubes_for_blue`` finds a small tube family covering all
such cubes without scanning: split the frequency support into unit cells by a
partition of unity, ride each cell's packet along its group velocity, convert
the packet's cross-section mass profile into weights on a separated family of
unit tubes tiling each length-2^k time slab, and hand the family to the greedy
cover with threshold c * delta^2.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .geometry import SECTOR_HALF_ANGLE, Cube, Tube, unit_dir
from .norms import Quadrature
from .tube_cover import WeightedTubeFamily, greedy_tube_cover
from .waves import SpectralWave, make_wave, smoothstep

PROFILE_POWER = 3.0          # cross-section weight profile (1 + d^2)^-power
PROFILE_RADIUS = 8.0         # truncation radius of the profile
# greedy threshold = factor * delta^2; calibrated so the stop level sits above
# the ambient residual of mass-spread waves (<= 0.007) and far below the
# residual at any concentration cube (>= 0.6 for packet waves)
BLUE_THRESHOLD_FACTOR = 2.0


def unit_cube_masses(psi: SpectralWave, quad: Quadrature):
    """Quadrature mass of psi in every unit spacetime cube of the window.

    Returns (t_corners, masses) with masses shaped (num t-cubes, box, box);
    cube (i, a, b) is [t_i, t_i + 1) x [a, a+1) x [b, b+1)."""
    lat = quad.lattice
    cell = int(round(1.0 / lat.spacing))
    nb = lat.size // cell
    t_corners = np.arange(-quad.config.half_window, quad.config.half_window)
    masses = np.zeros((len(t_corners), nb, nb))
    w = quad.cell_weight()
    for t in quad.times:
        i = int(math.floor(t + quad.config.half_window))
        f = psi.evaluate(t, lat)
        dens = np.square(f.real) + np.square(f.imag)
        cells = dens.reshape(nb, cell, nb, cell).sum(axis=(1, 3))
        masses[i] += quad.dt * w * cells
    return t_corners, masses


def find_bad_cubes(psi: SpectralWave, delta: float, quad: Quadrature) -> list:
    """Exhaustive scan for unit cubes q with ||psi||_{L^2(q)} > delta M^(1/2)."""
    t_corners, masses = unit_cube_masses(psi, quad)
    cut = delta * delta * psi.mass()
    out = []
    for i, a, b in zip(*np.where(masses > cut)):
        out.append(Cube((t_corners[i] + 0.5, a + 0.5, b + 0.5), 1.0))
    return out


# ---------------------------------------------------------------------------
# frequency partition of unity on unit cells

def _cell_window(u):
    """p(u) >= 0, supported on |u| <= 1, with sum_j p(u - j) = 1."""
    u = np.abs(np.asarray(u, dtype=float))
    return np.where(u >= 1.0, 0.0, smoothstep(1.0 - u))


def frequency_cells(psi: SpectralWave):
    """Integer cell centers alpha with nonzero partition weight on supp(psi),
    and per-mode square-root partition values.

    Returns list of (alpha, mode_sel, chi) where chi are the sqrt-partition
    coefficients for psi's minus-side modes selected by mode_sel."""
    modes = psi.modes_minus
    if len(modes) == 0:
        return []
    xi = modes / psi.lattice.box
    base = np.round(xi).astype(np.int64)
    alphas, weights, mode_ids = [], [], []
    ids = np.arange(len(modes))
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            alpha = base + np.array([da, db])
            p = _cell_window(xi[:, 0] - alpha[:, 0]) * _cell_window(xi[:, 1] - alpha[:, 1])
            nz = p > 0.0
            alphas.append(alpha[nz])
            weights.append(p[nz])
            mode_ids.append(ids[nz])
    alphas = np.concatenate(alphas)
    weights = np.concatenate(weights)
    mode_ids = np.concatenate(mode_ids)
    uniq, inv = np.unique(alphas, axis=0, return_inverse=True)
    inv = inv.ravel()
    order = np.argsort(inv, kind="stable")
    splits = np.searchsorted(inv[order], np.arange(1, len(uniq)))
    out = []
    for g, chunk in enumerate(np.split(order, splits)):
        out.append(((int(uniq[g, 0]), int(uniq[g, 1])),
                    mode_ids[chunk], np.sqrt(weights[chunk])))
    return out


def _snapped_direction(alpha, k: int) -> float:
    """Cell direction snapped to the angular grid of spacing 2^-k inside the
    cone (keeps distinct snapped directions separated by ~2^-k)."""
    theta = math.atan2(alpha[1], alpha[0])
    spacing = 2.0 ** (-k)
    i_max = int(math.floor(SECTOR_HALF_ANGLE / spacing))
    i = int(round(theta / spacing))
    i = max(-i_max, min(i_max, i))
    return i * spacing


def _profile_kernel(box_i: int) -> np.ndarray:
    k = np.zeros((box_i, box_i))
    r = int(PROFILE_RADIUS)
    for d1 in range(-r, r + 1):
        for d2 in range(-r, r + 1):
            d = math.sqrt(d1 * d1 + d2 * d2)
            if d <= PROFILE_RADIUS:
                k[d1 % box_i, d2 % box_i] = (1.0 + d * d) ** (-PROFILE_POWER)
    return k


def sector_weights(psi: SpectralWave, quad: Quadrature, t_center: float = 0.0) -> WeightedTubeFamily:
    """Weighted separated tube family dominating the local mass of psi near
    time t_center: unit cells of the frequency support become packet waves,
    each packet's unit-cell mass field (smoothed by the cross-section profile)
    becomes the weights of radius-1 tubes anchored on the integer grid in the
    packet's snapped travel direction.  Weights are normalized by the profile
    mass and the total mass so they sum to at most 1."""
    lat = psi.lattice
    box_i = int(round(lat.box))
    cell = int(round(1.0 / lat.spacing))
    cells = frequency_cells(psi)
    if not cells:
        return WeightedTubeFamily((), np.zeros(0), psi.k, lat.box)
    kernel = _profile_kernel(box_i)
    kernel_f = np.fft.rfft2(kernel)
    kernel_sum = float(kernel.sum())
    dir_grids: dict = {}
    for alpha, sel, chi in cells:
        part = make_wave(lat, [], [], psi.modes_minus[sel], psi.vals_minus[sel] * chi,
                         color="blue", k=psi.k)
        f = part.evaluate(t_center, lat)
        dens = np.square(f.real) + np.square(f.imag)
        cmass = dens.reshape(box_i, cell, box_i, cell).sum(axis=(1, 3)) * lat.spacing ** 2
        smoothed = np.fft.irfft2(np.fft.rfft2(cmass) * kernel_f, s=(box_i, box_i))
        theta = _snapped_direction(alpha, psi.k)
        if theta not in dir_grids:
            dir_grids[theta] = np.zeros((box_i, box_i))
        dir_grids[theta] += smoothed
    total = psi.mass() * kernel_sum * (1.0 + 1e-9)
    tubes = []
    weights = []
    half = 2.0 ** psi.k
    for theta in sorted(dir_grids):
        grid = dir_grids[theta] / total
        om = tuple(unit_dir(theta))
        for a, b in zip(*np.where(grid > 1e-14)):
            tubes.append(Tube(0.0, (float(a), float(b)), om, half_length=half))
            weights.append(grid[a, b])
    return WeightedTubeFamily(tuple(tubes), np.array(weights), psi.k, lat.box)


def exceptional_tubes_for_blue(psi: SpectralWave, delta: float, quad: Quadrature,
                               threshold_factor: float = BLUE_THRESHOLD_FACTOR) -> list:
    """Tubes whose 3-dilations cover every bad unit cube of the blue wave.

    The window splits into time slabs of length 2^k; each slab's sector-weight
    family goes through the greedy cover at threshold c * delta^2 and the
    resulting tubes are shifted back to absolute time."""
    if psi.color != "blue":
        raise ValueError("exceptional tube analysis needs a blue wave")
    half_len = 2.0 ** psi.k
    t0 = -quad.config.half_window
    out = []
    threshold = min(1.0, threshold_factor * delta * delta)
    while t0 < quad.config.half_window - 1e-9:
        t_center = t0 + 0.5 * half_len
        family = sector_weights(psi, quad, t_center)
        tubes = greedy_tube_cover(family, threshold)
        out.extend(replace(t, t0=t.t0 + t_center) for t in tubes)
        t0 += half_len
    return out
