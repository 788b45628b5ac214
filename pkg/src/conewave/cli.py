"""Command line interface.

    conewave gen-wave | cover | blue-tubes | extract | profile | fungibility | sharpness

Global flags configure the torus/window/quadrature; a key=value config file
can stand in for any flag (flags win).  Exit status: 0 when every asserted
bound holds, 1 on a violation, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import constants as C
from .blue_exceptional import exceptional_tubes_for_blue, find_bad_cubes
from .config import RunConfig
from .extraction import extract_profile
from .geometry import Tube, cube_touches_tube, unit_dir
from .harness import (fungibility_partition, sharpness_experiment, standard_suite,
                      universal_tube_family, verify_fungibility, verify_profile)
from .lattice import FrequencyLattice, lattice_for
from .norms import Quadrature
from .render import field_to_ppm
from .tube_cover import WeightedTubeFamily, greedy_tube_cover, verify_pointwise_bound
from .wave_io import load_wave, save_wave
from .waves import (make_blue_tube_wave, make_red_cube_bump, make_red_cube_train,
                    random_colored_wave)


def tube_to_dict(t: Tube) -> dict:
    return {"t0": t.t0, "x0": list(t.x0), "omega": list(t.omega),
            "halflength": "window" if t.half_length is None else t.half_length,
            "radius": t.radius, "lambda": t.lam}


def tube_from_dict(d: dict) -> Tube:
    hl = d["halflength"]
    return Tube(d["t0"], tuple(d["x0"]), tuple(d["omega"]),
                None if hl == "window" else float(hl),
                d.get("radius", 1.0), d.get("lambda", 1.0))


def write_tubes(tubes, path) -> None:
    Path(path).write_text(json.dumps([tube_to_dict(t) for t in tubes], indent=1))


def read_tubes(path) -> list:
    return [tube_from_dict(d) for d in json.loads(Path(path).read_text())]


def _write_csv(path, rows, fieldnames) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for r in rows:
            w.writerow(r)


def _load_config_file(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(2)
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conewave",
                                 description="bilinear cone-wave laboratory")
    ap.add_argument("--config", help="key=value file mirroring the flags")
    ap.add_argument("--n", type=int, default=None, help="dimension (2)")
    ap.add_argument("--grid-N", type=int, default=None,
                    help="points per axis (default: auto per k)")
    ap.add_argument("--box-L", type=float, default=None, help="torus side")
    ap.add_argument("--window", type=float, default=None, help="half time window")
    ap.add_argument("--dt", type=float, default=None, help="time step")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out-dir", default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-wave", help="synthesize a wave file")
    g.add_argument("--kind", choices=("random", "bump", "packet", "train"),
                   default="random")
    g.add_argument("--color", choices=("red", "blue"), default="red")
    g.add_argument("--k", type=int, default=0)
    g.add_argument("--margin", type=float, default=1.0 / 18.0)
    g.add_argument("--theta", type=float, default=math.radians(12.0))
    g.add_argument("--x0", type=float, nargs=2, default=(10.0, 20.0))
    g.add_argument("--t0", type=float, default=0.0)
    g.add_argument("--out", default="wave.cwav")

    c = sub.add_parser("cover", help="greedy cover of a random separated family")
    c.add_argument("--delta", type=float, required=True)
    c.add_argument("--tubes", type=int, default=120)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--samples", type=int, default=100_000)
    c.add_argument("--family", help="tube-list JSON with weights sidecar")

    b = sub.add_parser("blue-tubes", help="exceptional tubes of a blue wave")
    b.add_argument("--delta", type=float, required=True)
    b.add_argument("--k", type=int, default=None)
    b.add_argument("--wave", help="CWAV1 file (default: aimed packet)")

    e = sub.add_parser("extract", help="iterative ray extraction of a red wave")
    e.add_argument("--delta", type=float, required=True)
    e.add_argument("--max-iter", type=int, default=400)
    e.add_argument("--c-dilate", type=float, default=2.0)
    e.add_argument("--wave", help="CWAV1 file (default: the standard train)")

    p = sub.add_parser("profile", help="universal family + partner suite check")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--wave", help="CWAV1 file (default: the standard train)")
    p.add_argument("--suite-size", type=int, default=3)

    f = sub.add_parser("fungibility", help="interval split + per-interval check")
    f.add_argument("--delta", type=float, required=True)
    f.add_argument("--wave")
    f.add_argument("--suite-size", type=int, default=2)

    s = sub.add_parser("sharpness", help="matched-pair ratio table over k")
    s.add_argument("--kmax", type=int, default=3)
    s.add_argument("--seeds", type=int, nargs="+", default=[42])
    return ap


def _merge_config(args) -> RunConfig:
    file_vals = _load_config_file(args.config) if args.config else {}

    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in file_vals:
            return cast(file_vals[key])
        return default

    n = pick(args.n, "n", int, 2)
    box = pick(args.box_L, "box_l", float, 40.0)
    window = pick(args.window, "window", float, 8.0)
    dt = pick(args.dt, "dt", float, 0.25)
    args.seed = pick(args.seed, "seed", int, 42)
    args.out_dir = pick(args.out_dir, "out_dir", str, ".")
    args.grid_N = pick(args.grid_N, "grid_n", int, None) if args.grid_N is None \
        else args.grid_N
    return RunConfig(box=box, half_window=window, dt=dt, dimension=n)


def _lattice(cfg: RunConfig, args, k: int) -> FrequencyLattice:
    if args.grid_N:
        return FrequencyLattice(cfg.dimension, args.grid_N, cfg.box)
    return lattice_for(cfg, k)


def _default_train(cfg, args, k: int = 3):
    theta = math.radians(12.0)
    half = min(2.0 ** k, cfg.half_window)
    tube = Tube(0.0, (10.0, 20.0), tuple(unit_dir(theta)), half_length=half)
    lat = _lattice(cfg, args, 0)
    return make_red_cube_train(lat, tube, None, seed=args.seed).normalize_mass(1.0), tube


def _out(args, name) -> Path:
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def cmd_gen_wave(cfg, args) -> int:
    lat = _lattice(cfg, args, args.k)
    if args.kind == "random":
        w = random_colored_wave(lat, args.color, args.k, args.margin, args.seed)
    elif args.kind == "bump":
        w = make_red_cube_bump(lat, (args.t0, *args.x0), args.margin)
    elif args.kind == "packet":
        w = make_blue_tube_wave(lat, args.t0, tuple(args.x0),
                                unit_dir(args.theta), args.k)
    else:
        half = min(2.0 ** args.k, cfg.half_window)
        tube = Tube(0.0, tuple(args.x0), tuple(unit_dir(args.theta)), half_length=half)
        lat0 = _lattice(cfg, args, 0)
        w = make_red_cube_train(lat0, tube, None, seed=args.seed)
    out = _out(args, args.out)
    save_wave(w, out)
    print(f"wrote {out}  mass={w.mass():.6f} modes={w.num_modes}")
    return 0


def _random_family(cfg, args) -> WeightedTubeFamily:
    rng = np.random.default_rng(args.seed)
    half = 2.0 ** args.k
    tubes = []
    while len(tubes) < args.tubes:
        x0 = rng.uniform(0.0, cfg.box, size=2)
        th = rng.uniform(-math.pi / 8, math.pi / 8)
        cand = Tube(0.0, tuple(x0), tuple(unit_dir(th)), half_length=half)
        ok = all((np.linalg.norm(np.asarray(cand.x0) - np.asarray(t.x0))
                  + half * np.linalg.norm(np.asarray(cand.omega) - np.asarray(t.omega)))
                 >= 0.5 for t in tubes)
        if ok:
            tubes.append(cand)
    w = rng.uniform(0.2, 1.0, size=len(tubes))
    w = w / w.sum()
    return WeightedTubeFamily(tuple(tubes), w, args.k, cfg.box)


def cmd_cover(cfg, args) -> int:
    if args.family:
        data = json.loads(Path(args.family).read_text())
        tubes = tuple(tube_from_dict(d) for d in data["tubes"])
        fam = WeightedTubeFamily(tubes, np.array(data["weights"]), args.k, cfg.box)
    else:
        fam = _random_family(cfg, args)
    exc = greedy_tube_cover(fam, args.delta)
    residual = verify_pointwise_bound(fam, exc, args.delta, args.samples,
                                      seed=args.seed)
    write_tubes(exc, _out(args, "cover_tubes.json"))
    budget = C.K_COV * args.delta ** -3
    print(f"family={len(fam)} exceptional={len(exc)} (budget {budget:.0f}) "
          f"residual={residual:.4f} (delta {args.delta})")
    return 0 if residual <= args.delta and len(exc) <= budget else 1


def cmd_blue_tubes(cfg, args) -> int:
    if args.wave:
        psi = load_wave(args.wave)
        k = psi.k
    else:
        k = args.k if args.k is not None else 2
        lat = _lattice(cfg, args, k)
        psi = make_blue_tube_wave(lat, 0.0, (12.0, 8.0), unit_dir(0.15), k)
    quad = Quadrature(cfg, psi.lattice)
    bad = find_bad_cubes(psi, args.delta, quad)
    tubes = exceptional_tubes_for_blue(psi, args.delta, quad)
    write_tubes(tubes, _out(args, "blue_tubes.json"))
    _write_csv(_out(args, "bad_cubes.csv"),
               [{"t": c.center[0], "x1": c.center[1], "x2": c.center[2]} for c in bad],
               ["t", "x1", "x2"])
    covered = all(any(cube_touches_tube(c, t, cfg.box, 3.0) for t in tubes)
                  for c in bad)
    budget = C.K_EXC * args.delta ** -C.K_E
    print(f"k={k} bad_cubes={len(bad)} tubes={len(tubes)} (budget {budget:.0f}) "
          f"covered={covered}")
    return 0 if covered and len(tubes) <= budget else 1


def cmd_extract(cfg, args) -> int:
    if args.wave:
        phi = load_wave(args.wave)
    else:
        phi, _ = _default_train(cfg, args)
    quad = Quadrature(cfg, phi.lattice)
    tubes, remainder, trace = extract_profile(phi, args.delta, quad,
                                              max_iter=args.max_iter,
                                              c_dilate=args.c_dilate,
                                              dilation_cap=C.LAMBDA_CAP)
    write_tubes(tubes, _out(args, "extract_tubes.json"))
    save_wave(remainder, _out(args, "remainder.cwav"))
    rows = [{"iteration": i, "value": s.value, "mu": s.mu,
             "mass_before": s.mass_before, "mass_after": s.mass_after}
            for i, s in enumerate(trace.steps)]
    _write_csv(_out(args, "extract_trace.csv"), rows,
               ["iteration", "value", "mu", "mass_before", "mass_after"])
    floor = C.C_DEC * args.delta ** 2 / math.log(1.0 / args.delta)
    ok = trace.completed and all(s.decrement >= floor for s in trace.steps)
    print(f"steps={len(trace)} remainder_mass={remainder.mass():.5f} "
          f"completed={trace.completed} decrement_floor_ok={ok}")
    return 0 if ok else 1


def _heatmap(cfg, args, phi, psi, tubes, t, name) -> None:
    lat = psi.lattice
    f = np.abs(phi.evaluate(t, lat)) * np.abs(psi.evaluate(t, lat))
    circles = [(t2.axis_at(t)[0], t2.axis_at(t)[1], t2.eff_radius)
               for t2 in tubes if t2.time_active(t)]
    field_to_ppm(f, _out(args, name), circles, box=cfg.box)


def cmd_profile(cfg, args) -> int:
    if args.wave:
        phi = load_wave(args.wave)
        axis = (0.0, (10.0, 20.0), math.radians(12.0))
    else:
        phi, tube = _default_train(cfg, args)
        axis = (0.0, tube.x0, math.radians(12.0))
    quad = Quadrature(cfg, phi.lattice)
    tubes, remainder, trace = universal_tube_family(phi, args.delta, quad)
    suite = standard_suite(seeds_per_k=args.suite_size, base_seed=args.seed,
                           adversarial_axis=axis)
    report = verify_profile(phi, tubes, args.delta, suite, cfg)
    write_tubes(tubes, _out(args, "universal_tubes.json"))
    rows = [{"kind": r.kind, "k": r.k, "seed": r.seed,
             "ratio_outside": r.ratio_outside, "ratio_full": r.ratio_full}
            for r in report.records]
    _write_csv(_out(args, "profile_report.csv"), rows,
               ["kind", "k", "seed", "ratio_outside", "ratio_full"])
    psi = next(s for s in suite if s.kind == "packet").build(cfg)
    _heatmap(cfg, args, phi.embed(psi.lattice), psi, tubes, 0.0, "profile_t0.ppm")
    bound = C.C_V * args.delta
    contrast = report.min_adversarial_full()
    ok = report.passes(bound) and contrast > C.ADVERSARIAL_MARGIN * bound
    print(f"tubes={len(tubes)} max_outside={report.max_outside():.4f} "
          f"(bound {bound:.4f}) adversarial_full={contrast:.4f} pass={ok}")
    return 0 if ok else 1


def cmd_fungibility(cfg, args) -> int:
    if args.wave:
        phi = load_wave(args.wave)
        axis = (0.0, (10.0, 20.0), math.radians(12.0))
    else:
        phi, tube = _default_train(cfg, args)
        axis = (0.0, tube.x0, math.radians(12.0))
    quad = Quadrature(cfg, phi.lattice)
    tubes, _, _ = universal_tube_family(phi, args.delta, quad)
    intervals = fungibility_partition(phi, tubes, args.delta, quad)
    suite = standard_suite(seeds_per_k=args.suite_size, base_seed=args.seed,
                           adversarial_axis=axis)
    rows = verify_fungibility(phi, intervals, suite, args.delta, cfg)
    _write_csv(_out(args, "fungibility.csv"), rows,
               ["k", "seed", "kind", "t_lo", "t_hi", "ratio"])
    worst = max(r["ratio"] for r in rows)
    budget = C.K_I * args.delta ** -C.K_P
    ok = worst <= C.C_F * args.delta and len(intervals) <= budget
    print(f"intervals={len(intervals)} (budget {budget:.0f}) "
          f"worst_ratio={worst:.4f} (bound {C.C_F * args.delta:.4f}) pass={ok}")
    return 0 if ok else 1


def cmd_sharpness(cfg, args) -> int:
    rows = sharpness_experiment(cfg, ks=tuple(range(args.kmax + 1)),
                                seeds=tuple(args.seeds))
    _write_csv(_out(args, "sharpness.csv"), rows,
               ["k", "seed", "rho", "lp_scaled", "p"])
    rhos = [r["rho"] for r in rows]
    spread = max(rhos) / min(rhos)
    ok = (min(rhos) >= C.RHO_MIN and spread <= C.RHO_SPREAD_MAX
          and max(r["lp_scaled"] for r in rows) <= C.C_LP_SCALED)
    print(f"rho range [{min(rhos):.3f}, {max(rhos):.3f}] spread={spread:.2f} "
          f"lp_scaled_max={max(r['lp_scaled'] for r in rows):.3f} pass={ok}")
    return 0 if ok else 1


_COMMANDS = {"gen-wave": cmd_gen_wave, "cover": cmd_cover,
             "blue-tubes": cmd_blue_tubes, "extract": cmd_extract,
             "profile": cmd_profile, "fungibility": cmd_fungibility,
             "sharpness": cmd_sharpness}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _merge_config(args)
    return _COMMANDS[args.command](cfg, args)


if __name__ == "__main__":
    sys.exit(main())
