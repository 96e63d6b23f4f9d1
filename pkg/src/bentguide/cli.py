"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.  Outputs go to ``--out``, else ``$BENTGUIDE_OUT/<command>``,
else ``./bentguide-out/<command>``.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import __version__
from . import io
from .config import AnyConfig, load_config, resolve
from .errors import ConfigError, NumericalError

log = logging.getLogger("bentguide")

OUT_ENV = "BENTGUIDE_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


# commands -----------------------------------------------------------------------------

def _design_range(profile_cfg, section):
    prof = profile_cfg.build()
    lo, hi = section.q1_min, section.q1_max
    if prof.perimeter is not None:
        dlo, dhi = 0.0, prof.perimeter
    elif profile_cfg.kind == "poschl_teller":
        dlo, dhi = -25.0 / profile_cfg.alpha, 25.0 / profile_cfg.alpha
    elif profile_cfg.kind == "sukumar":
        w = 10.0 / min(profile_cfg.eta)
        dlo, dhi = -w, w
    elif profile_cfg.kind == "tabulated":
        dlo, dhi = prof.domain
    else:
        dlo, dhi = -50.0, 50.0
    return prof, (dlo if lo is None else lo), (dhi if hi is None else hi)


def cmd_design(cfg, out: Path):
    from .geometry import check_validity, detect_self_intersections, integrate_frenet_serret
    from .potentials import cip_from_profile, uniform_grid

    sec = cfg.design
    prof, lo, hi = _design_range(cfg.profile, sec)
    if not hi > lo:
        raise ConfigError("design.q1_max must exceed design.q1_min")
    curve = integrate_frenet_serret(prof, lo, hi, sec.step)
    crossings = detect_self_intersections(curve)
    files = [io.write_curve(out / "curve.csv", curve),
             io.write_intersections(out / "intersections.txt", crossings)]
    rep = check_validity(prof, sigma0=sec.sigma0, domain=(lo, hi),
                         thresholds=(sec.validity_threshold,) * 3)
    (out / "validity.json").write_text(json.dumps({
        "max_k_sigma": rep.max_k_sigma, "max_kprime_ratio": rep.max_kprime_ratio,
        "max_kpp_ratio": rep.max_kpp_ratio, "evaluated_domain": rep.evaluated_domain,
        "verdict": rep.verdict, "thresholds": list(rep.thresholds)}, indent=2) + "\n")
    files.append(out / "validity.json")
    pot_q = uniform_grid(lo, hi, max(sec.step, (hi - lo) / 20000))
    files.append(io.write_potential(out / "potential.csv", cip_from_profile(prof, pot_q[:-1] if prof.perimeter else pot_q)))
    summary = {"crossings": len(crossings), "simple": not crossings}
    if sec.lift_torsion:
        lifted = integrate_frenet_serret(prof.with_torsion(sec.lift_torsion), lo, hi, sec.step)
        lc = detect_self_intersections(lifted)
        files += [io.write_curve(out / "curve_lifted.csv", lifted),
                  io.write_intersections(out / "intersections_lifted.txt", lc)]
        summary["crossings_lifted"] = len(lc)
    log.info("design: %s", summary)
    return files, summary


def _scatter_potential(cfg):
    from .potentials import PotentialGrid, cip_from_profile, uniform_grid

    sec = cfg.scatter
    if sec.potential_file:
        header, data = io.read_csv(sec.potential_file)
        if header[:2] != ["q1", "v"]:
            raise ConfigError(f"{sec.potential_file}: expected columns q1,v")
        return PotentialGrid(data[:, 0], data[:, 1]), None
    prof = cfg.profile.build()
    if prof.perimeter is not None:
        raise ConfigError("scattering needs an open guide profile")
    hw = sec.half_width or cfg.profile.default_extent()
    return cip_from_profile(prof, uniform_grid(-hw, hw, sec.dq)), cfg.profile


def cmd_scatter(cfg, out: Path):
    from .scattering import analytic_pt_transmission, bound_states, scatter

    sec = cfg.scatter
    v, pcfg = _scatter_potential(cfg)
    k = np.geomspace(sec.k.min, sec.k.max, sec.k.n)
    res = scatter(v, k)
    analytic = None
    if sec.analytic_overlay and pcfg is not None and pcfg.kind == "poschl_teller":
        analytic = analytic_pt_transmission(pcfg.nu, pcfg.alpha, k)
    files = [io.write_potential(out / "potential.csv", v),
             io.write_scattering(out / "scattering.csv", res, analytic)]
    summary = {"min_T_sq": float(res.flux_transmission.min()), "max_R_sq": float(res.reflection.max()),
               "unitarity_residual": res.unitarity_residual}
    if analytic is not None:
        summary["max_dev_analytic"] = float(np.max(np.abs(res.flux_transmission - analytic)))
    if sec.spectrum:
        spec = bound_states(v)
        files.append(io.write_spectrum(out / "spectrum.csv", spec,
                                       out / "wavefunctions.csv" if sec.wavefunctions else None))
        if sec.wavefunctions:
            files.append(out / "wavefunctions.csv")
        summary["energies"] = [float(e) for e in spec.energies]
    log.info("scatter: %s", summary)
    return files, summary


def _snapshot_every(dt, interval, n_steps):
    return max(1, min(n_steps, int(round(interval / dt))))


def cmd_propagate(cfg, out: Path):
    from .dynamics.splitstep import transmitted_flux, transmitted_fraction

    sec = cfg.propagate
    n_steps = int(math.ceil(sec.t_max / sec.dt - 1e-9))
    every = _snapshot_every(sec.dt, sec.snapshot_interval, n_steps)
    snaps = io.ensure_dir(out / "snapshots")
    files = []
    if sec.mode == "2d":
        from .dynamics.waveguide2d import bent_guide_scenario, propagate_2d, wavepacket_transmission

        p = cfg.profile
        sc = bent_guide_scenario(p.nu, p.alpha, sec.fwhm, sec.k0, tuple(sec.grid), sec.launch_q1,
                                 y_span=sec.y_span, transverse=sec.transverse.build())
        dtype = np.complex64 if sec.precision == "single" else np.complex128
        traj = propagate_2d(sc.waveguide, sc.psi0, sec.dt, n_steps, every, bin_width=sec.bin_width,
                            keep_states=True, dtype=dtype, check_budget=sec.check_budget, flux_x=sc.flux_x)
        u = sc.waveguide
        dx, dy = sc.psi0.spacing
        for i, (t, st) in enumerate(zip(traj.times, traj.states)):
            dens = np.abs(st) ** 2
            files.append(io.write_grid(snaps / f"frame_{i:04d}.bgrid", dens, dx, dy, t))
            files.append(io.write_ppm(snaps / f"frame_{i:04d}.ppm", dens.T[::-1]))
        cut = sc.q1_cut
        prediction = wavepacket_transmission(p.nu, p.alpha, sec.k0, sec.fwhm)
        extra = {"analytic_prediction": prediction, "x0": float(u.x[0]), "y0": float(u.y[0])}
    else:
        from .dynamics.splitstep import AbsorbingLayer, WaveState, gaussian_packet, propagate_1d
        from .potentials import cip_from_profile, uniform_grid

        prof = cfg.profile.build()
        sigma = sec.fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
        bend = cfg.profile.default_extent() / 8.0
        launch = sec.launch_q1 if sec.launch_q1 is not None else -(bend + 4.0 * sigma)
        layer = AbsorbingLayer.for_packet(sec.k0, sigma)
        wl, wr = layer.widths(0.0)
        # 8 sigma keeps the packet tail below 1e-13 at the periodic seam
        q = uniform_grid(launch - 8.0 * sigma - wl, bend + wr, sec.dq)
        v = cip_from_profile(prof, q)
        psi0 = WaveState(gaussian_packet(q, launch, sec.fwhm, sec.k0), (q,), boundary=layer)
        traj = propagate_1d(v, psi0, sec.dt, n_steps, every, check_budget=sec.check_budget, flux_at=bend)
        for i, t in enumerate(traj.times):
            files.append(io.write_csv(snaps / f"frame_{i:04d}.csv", ["q1", "density"],
                                      [traj.q1, traj.density[i]]))
        cut = bend
        extra = {}
        if cfg.profile.kind == "poschl_teller":
            from .dynamics.waveguide2d import wavepacket_transmission

            extra["analytic_prediction"] = wavepacket_transmission(cfg.profile.nu, cfg.profile.alpha,
                                                                   sec.k0, sec.fwhm)
    # the flux count is the primary measure; the density split also books
    # mass that wraps through the periodic seam into the right layer
    frac = np.array([transmitted_flux(traj, i) for i in range(len(traj.times))])
    split = np.array([transmitted_fraction(traj, cut, i) for i in range(len(traj.times))])
    files.append(io.write_csv(out / "transmitted.csv", ["t", "transmitted", "transmitted_density", "absorbed_left",
                                                         "absorbed_right", "norm"],
                              [traj.times, frac, split, traj.absorbed[:, 0], traj.absorbed[:, 1], traj.norms]))
    dq = traj.q1[1] - traj.q1[0]
    files.append(io.write_grid(out / "density_q1_t.bgrid", traj.density, float(traj.times[1] - traj.times[0])
                               if len(traj.times) > 1 else 0.0, dq))
    files.append(io.write_ppm(out / "density_q1_t.ppm", traj.density.T[::-1]))
    summary = {"transmitted_final": float(frac[-1]), "transmitted_density_final": float(split[-1]),
               "q1_cut": cut, "final_norm": float(traj.norms[-1]),
               **extra}
    log.info("propagate: %s", summary)
    return files, summary


def cmd_carpet(cfg, out: Path):
    from .dynamics.talbot import localized_state, revival_time, talbot_carpet
    from .geometry import ellipse_axes
    from .potentials import compensation_barrier, ellipse_cip_loop, ring_cip_loop

    sec = cfg.carpet
    L = sec.perimeter
    ring = ring_cip_loop(L, sec.n)
    if sec.shape == "ellipse":
        a, b = ellipse_axes(sec.eccentricity, L)
        v = ellipse_cip_loop(a, b, sec.n)
        if sec.compensate:
            v = v + compensation_barrier(v, ring)
    else:
        v = ring
    center = L / 4.0 if sec.center is None else sec.center
    tr = revival_time(L)
    res = talbot_carpet(v, localized_state(v, center, sec.fwhm), sec.revivals * tr, sec.n_frames, sec.dt)
    files = [io.write_grid(out / "carpet.bgrid", res.density, float(res.t_grid[1] - res.t_grid[0]),
                           v.dq),
             io.write_csv(out / "fidelity.csv", ["t", "F"], [res.t_grid, res.revival_fidelity]),
             io.write_ppm(out / "carpet.ppm", res.density.T[::-1]),
             io.write_potential(out / "potential.csv", v)]
    w0, w1 = sec.window
    summary = {"revival_time": tr, "F_revival": res.fidelity_at(tr),
               "max_F_window": res.max_fidelity(w0 * tr, w1 * tr)}
    if sec.revivals >= 2:
        summary["F_second_revival"] = res.fidelity_at(2 * tr)
    log.info("carpet: %s", summary)
    return files, summary


def cmd_compensate(cfg, out: Path):
    from .analysis import compensation_study

    sec = cfg.compensate
    study = compensation_study(sec.eccentricity, sec.perimeter, sec.n, sec.dtau, sec.tol, sec.max_steps)
    files = [io.write_csv(out / "potentials.csv", ["q1", "v_cip", "barrier", "v_compensated"],
                          [study.q1, study.v_cip, study.barrier, study.v_compensated]),
             io.write_csv(out / "ground_states.csv", ["q1", "density_uncompensated", "density_compensated"],
                          [study.q1, study.density_uncompensated, study.density_compensated])]
    summary = {"uniformity_uncompensated": study.uniformity_uncompensated,
               "uniformity_compensated": study.uniformity_compensated,
               "peaks_uncompensated": study.peaks_uncompensated,
               "energy_uncompensated": study.energy_uncompensated,
               "energy_compensated": study.energy_compensated}
    log.info("compensate: %s", summary)
    return files, summary


COMMANDS = {"design": cmd_design, "scatter": cmd_scatter, "spectrum": cmd_scatter,
            "propagate": cmd_propagate, "carpet": cmd_carpet, "compensate": cmd_compensate}


# driver -------------------------------------------------------------------------------

def output_dir(command, out_arg):
    if out_arg:
        return Path(out_arg)
    root = os.environ.get(OUT_ENV)
    return Path(root or "bentguide-out") / command


def execute(command: str, cfg: AnyConfig, out: Path, threads=None) -> dict:
    """Run a validated config and write the outputs plus ``manifest.json``."""
    io.ensure_dir(out)
    t0 = time.perf_counter()
    with sfft.set_workers(threads or 1):
        files, summary = COMMANDS[command](cfg, out)
    wall = time.perf_counter() - t0
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    files = sorted({Path(f) for f in files} | {out / "summary.json"})
    manifest = {
        "command": command,
        "tool_version": __version__,
        "config": resolve(cfg),
        "threads": threads or 1,
        "wall_time_s": wall,
        "outputs": [{"path": str(f.relative_to(out)), "sha256": io.sha256_of(f),
                     "bytes": f.stat().st_size} for f in files],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def build_parser():
    ap = argparse.ArgumentParser(prog="bentguide", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/{name})")
        p.add_argument("--threads", type=int, default=1, help="FFT worker threads")
        p.add_argument("--verbose", "-v", action="count", default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.command, args.config)
        out = output_dir(args.command, args.out)
        manifest = execute(args.command, cfg, out, args.threads)
    except ConfigError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"error[numerical]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # module preconditions (grid sizes, time-step budget, domains)
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.command}: wrote {len(manifest['outputs'])} files to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
