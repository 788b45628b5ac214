import math

import numpy as np
import pytest

from conewave.blue_exceptional import (exceptional_tubes_for_blue, find_bad_cubes,
                                       frequency_cells, sector_weights,
                                       unit_cube_masses, _cell_window)
from conewave.geometry import Tube, cube_touches_tube, unit_dir, wrap_delta
from conewave.lattice import lattice_for
from conewave.norms import Quadrature
from conewave.waves import (make_blue_tube_wave, make_wave, mass,
                            random_colored_wave, zero_wave)


def test_cell_window_partition_of_unity():
    u = np.linspace(-3, 3, 601)
    total = sum(_cell_window(u - j) for j in range(-4, 5))
    assert np.allclose(total, 1.0, atol=1e-12)


def test_find_bad_cubes_zero_and_delta_one(quad0, lat0):
    z = zero_wave(lat0, color="blue")
    assert find_bad_cubes(z, 0.1, quad0) == []
    psi = make_blue_tube_wave(lat0, 0.0, (4.0, 9.0), unit_dir(0.2), 0)
    # no unit cube can hold more than the whole slice mass integrated over a
    # unit time span, which the normalization keeps at 1
    assert find_bad_cubes(psi, 1.0, quad0) == []


def test_find_bad_cubes_packet_axis(quad0, lat0, small_config):
    om = unit_dir(0.2)
    x0 = np.array([4.0, 9.0])
    psi = make_blue_tube_wave(lat0, 0.0, x0, om, 0)
    bad = find_bad_cubes(psi, 0.1, quad0)
    assert bad
    # every integer time with the packet in the window shows a bad cube near
    # the transported center
    for tc in (-2, 0, 1):
        c = x0 + om * (tc + 0.5)
        hits = [b for b in bad if abs(b.center[0] - (tc + 0.5)) < 0.6
                and np.linalg.norm(wrap_delta(np.array(b.center[1:]) - c,
                                              small_config.box)) <= 2.0]
        assert hits, f"no bad cube near the axis at t={tc}"


def test_cube_mass_table_consistency(quad0, lat0):
    psi = random_colored_wave(lat0, "blue", 0, 1 / 20, seed=3)
    t_corners, masses = unit_cube_masses(psi, quad0)
    # summing all cubes recovers the full spacetime quadrature mass
    window = 2 * quad0.config.half_window
    assert masses.sum() == pytest.approx(window * mass(psi), rel=1e-9)


def test_partition_masses_sum_exactly(quad0, lat0):
    psi = random_colored_wave(lat0, "blue", 0, 1 / 20, seed=4)
    cells = frequency_cells(psi)
    total = 0.0
    for _, sel, chi in cells:
        part = make_wave(lat0, [], [], psi.modes_minus[sel],
                         psi.vals_minus[sel] * chi, color="blue", k=0)
        total += mass(part)
    assert total == pytest.approx(mass(psi), rel=1e-12)


def test_window_localized_pieces_orthogonal(small_config):
    # multiply two far-separated frequency pieces by a band-limited window:
    # the windowed spectra stay disjoint, so the pairing vanishes exactly.
    # Cells must be separated by more than twice the piece+window broadening
    # (2 per axis each way), which needs the k=2 annulus for room.
    lat = lattice_for(small_config, 2)
    psi = random_colored_wave(lat, "blue", 2, 1 / 20, seed=5)
    cells = frequency_cells(psi)
    a0, s0, c0 = cells[0]
    pick = [(a, s, c) for (a, s, c) in cells
            if max(abs(a[0] - a0[0]), abs(a[1] - a0[1])) > 4]
    assert pick, "need two separated cells"
    a1, s1, c1 = pick[-1]
    p0 = make_wave(lat, [], [], psi.modes_minus[s0], psi.vals_minus[s0] * c0,
                   color="blue", k=2)
    p1 = make_wave(lat, [], [], psi.modes_minus[s1], psi.vals_minus[s1] * c1,
                   color="blue", k=2)
    # band-limited nonnegative window |b|^2 with b supported in |xi| <= 1/2
    half = lat.size // 2
    m = np.arange(-half, half)
    m1g, m2g = np.meshgrid(m, m, indexing="ij")
    sel = (m1g / lat.box) ** 2 + (m2g / lat.box) ** 2 <= 0.25
    bvals = np.exp(-((m1g[sel] / lat.box) ** 2 + (m2g[sel] / lat.box) ** 2))
    b = make_wave(lat, np.stack([m1g[sel], m2g[sel]], axis=1), bvals, [], [])
    eta = np.abs(b.evaluate(0.0)) ** 2
    f0 = p0.evaluate(0.3) * eta
    f1 = p1.evaluate(0.3) * eta
    ip = np.vdot(f1, f0) * lat.spacing ** 2
    scale = math.sqrt(mass(p0) * mass(p1))
    assert abs(ip) <= 1e-8 * max(scale, 1e-30)


def test_sector_weights_single_cell(quad0, small_config, lat0):
    # one-cell blue wave: all weight in one direction, total exactly 1
    lat = lat0
    half = lat.size // 2
    m = np.arange(-half, half)
    m1g, m2g = np.meshgrid(m, m, indexing="ij")
    xi1 = m1g / lat.box
    xi2 = m2g / lat.box
    sel = (np.abs(xi1 - 1.4) <= 0.4) & (np.abs(xi2) <= 0.4)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(sel.sum()) + 1j * rng.standard_normal(sel.sum())
    psi = make_wave(lat, [], [], np.stack([m1g[sel], m2g[sel]], axis=1), vals,
                    color="blue", k=0).normalize_mass(1.0)
    fam = sector_weights(psi, quad0, 0.0)
    dirs = {t.omega for t in fam.tubes}
    assert len(dirs) == 1
    assert fam.total_weight == pytest.approx(1.0, abs=1e-6)
    assert np.all(fam.weights >= 0.0)
    fam.check_separation()


def test_sector_weights_packet_concentrates(quad0, lat0, small_config):
    om = unit_dir(0.1)
    x0 = np.array([12.0, 5.0])
    psi = make_blue_tube_wave(lat0, 0.0, x0, om, 0)
    fam = sector_weights(psi, quad0, 0.0)
    anchors = fam.anchors()
    d = wrap_delta(anchors - x0[None, :], small_config.box)
    near = np.sqrt((d * d).sum(axis=1)) <= 4.0
    assert fam.weights[near].sum() >= 0.8 * fam.total_weight


def test_exceptional_tubes_zero_and_packet(quad0, lat0, small_config):
    assert exceptional_tubes_for_blue(zero_wave(lat0, color="blue"), 0.2, quad0) == []
    om = unit_dir(0.2)
    x0 = (4.0, 9.0)
    psi = make_blue_tube_wave(lat0, 0.0, x0, om, 0)
    tubes = exceptional_tubes_for_blue(psi, 0.2, quad0)
    assert tubes
    # some output tube tracks the construction ray
    good = False
    for t in tubes:
        dth = abs(math.atan2(t.omega[1], t.omega[0]) - 0.2)
        dx = np.linalg.norm(wrap_delta(np.asarray(t.x0)
                                       - (np.asarray(x0) + om * (t.t0)),
                                       small_config.box))
        if dth <= 0.2 and dx <= 4.0:
            good = True
    assert good
    # full coverage of the brute-force bad cubes
    for delta in (0.2, 0.1):
        bad = find_bad_cubes(psi, delta, quad0)
        tubes_d = exceptional_tubes_for_blue(psi, delta, quad0)
        assert all(any(cube_touches_tube(c, t, small_config.box, 3.0)
                       for t in tubes_d) for c in bad)


def test_exceptional_requires_blue(quad0, lat0):
    phi = random_colored_wave(lat0, "red", 0, 1 / 20, seed=1)
    with pytest.raises(ValueError):
        exceptional_tubes_for_blue(phi, 0.2, quad0)
