"""Command-line interface.

Every subcommand writes its tables as CSV into ``--out`` together with one
``<command>.manifest`` holding the resolved parameters, seeds, outputs and
timing. Exit codes: 0 success, 2 invalid arguments, 3 numerical failure,
4 escape-dominated run (partial outputs are still written).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import os
import shlex
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .attractors import (
    DIVERGENT,
    Budget,
    attractor_points,
    basin_grid,
    circle_points,
    correlation_dimension,
    correlation_sum,
    default_radii,
    grid_axes,
    prescan_window,
)
from .bifurcation import (
    SweepConfig,
    NormalFormError,
    attractor_sweep,
    branch_track,
    detect_bubbles,
    hysteresis_mask,
    ns_first_lyapunov,
    ns_self_consistent,
)
from .core import DriveSignal, MapParams, NeuronState, firing_params, firing_stats, iterate, phl_trace
from .fixed_points import DegenerateParameterError, find_fixed_points
from .io import read_manifest, write_manifest, write_table
from .network import NetworkConfig, analyze, simulate
from .presets import preset, preset_names, row_params

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC, EXIT_ESCAPE = 0, 2, 3, 4
THREADS_ENV = "MRCHIALVO_THREADS"
MAP_FIELDS = ("k0", "k1", "k2", "k", "r", "h")


class UsageError(Exception):
    pass


class EscapeDominated(Exception):
    pass


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------

def _add_map_args(sp):
    g = sp.add_argument_group("map parameters")
    for name in MAP_FIELDS:
        g.add_argument(f"--{name}", type=float, default=None)
    sp.add_argument("--preset", default=None, help="start from a named recipe; explicit flags override it")


def _add_common(sp):
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--threads", type=int, default=None,
                    help=f"worker threads (default: ${THREADS_ENV} or 1); results do not depend on it")


def _preset(args, kind=None) -> dict:
    if args.preset is None:
        return {}
    try:
        pr = preset(args.preset)
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    if kind and pr.get("kind") != kind:
        raise UsageError(f"preset {args.preset!r} is a {pr.get('kind')} recipe, not {kind}")
    return pr


def _map_params(args, pr: dict) -> MapParams:
    base = pr.get("map")
    vals = base.as_dict() if base is not None else {"h": 1.0}
    for name in MAP_FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            vals[name] = v
    missing = [n for n in MAP_FIELDS if n not in vals]
    if missing:
        raise UsageError("missing map parameters: " + ", ".join("--" + m for m in missing))
    return MapParams(**vals)


def _pick(args, name, pr, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    v = pr.get(name)
    return default if v is None else v


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        try:
            n = int(os.environ.get(THREADS_ENV, "1"))
        except ValueError:
            raise UsageError(f"${THREADS_ENV} must be an integer") from None
    if n < 1:
        raise UsageError("--threads must be >= 1")
    return n


def _seeds(spec: str) -> list[int]:
    out = []
    for part in spec.split(","):
        part = part.strip()
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError("empty seed list")
    return out


# --------------------------------------------------------------------------
# subcommands; each returns (params, tables, result summary)
# tables: list of (filename, columns, rows, schema)
# --------------------------------------------------------------------------

def cmd_phl(args):
    pr = _preset(args, "phl")
    k1 = _pick(args, "k1", pr, None)
    k2 = _pick(args, "k2", pr, None)
    if k1 is None or k2 is None:
        raise UsageError("phl needs --k1 and --k2 (or a phl preset)")
    p = MapParams(k0=0.0, k1=k1, k2=k2, k=0.0, r=0.0, h=_pick(args, "h", pr, 1.0))
    vm = _pick(args, "vm", {"vm": pr.get("v_m")}, None)
    omega = _pick(args, "omega", pr, None)
    if vm is None or omega is None:
        raise UsageError("phl needs --vm and --omega")
    drive = DriveSignal(vm, omega, args.steps)
    tr = phl_trace(drive, p, _pick(args, "phi0", pr, 0.0))
    rows = zip(range(args.steps), tr.v, tr.i, tr.phi)
    params = dict(v_m=vm, omega=omega, steps=args.steps, k1=k1, k2=k2, h=p.h, phi0=_pick(args, "phi0", pr, 0.0))
    tables = [("phl.csv", ["n", "v", "i", "phi"], rows,
               {"n": "step", "v": "drive voltage", "i": "memristor current", "phi": "flux before the step"}),
              ("phl_summary.csv", ["area", "enclosed_area"], [[tr.area, tr.enclosed_area]],
               {"area": "signed shoelace area of the phase-ordered loop",
                "enclosed_area": "total enclosed area"})]
    return params, tables, dict(area=tr.area, enclosed_area=tr.enclosed_area)


def cmd_orbit(args):
    pr = _preset(args)
    p = _map_params(args, pr)
    orbit = iterate(NeuronState(args.x0, args.phi0), p, args.transient, args.record)
    rows = ((args.transient + j + 1, s[0], s[1]) for j, s in enumerate(orbit.states))
    params = dict(map=p.as_dict(), x0=args.x0, phi0=args.phi0, transient=args.transient, record=args.record)
    res = dict(escaped=orbit.escaped, escape_index=orbit.escape_index if orbit.escaped else -1)
    tables = [("orbit.csv", ["n", "x", "phi"], rows, {"n": "iteration", "x": "membrane potential", "phi": "flux"})]
    if orbit.escaped:
        raise EscapeDominated((params, tables, res))
    return params, tables, res


def cmd_firing(args):
    pr = _preset(args, "firing")
    if args.pattern:
        pr = dict(map=firing_params(args.pattern))
    p = _map_params(args, pr)
    orbit = iterate(NeuronState(args.x0, args.phi0), p, args.transient, args.record)
    params = dict(map=p.as_dict(), x0=args.x0, phi0=args.phi0, transient=args.transient,
                  record=args.record, threshold=args.threshold if args.threshold is not None else "auto")
    if orbit.escaped:
        raise EscapeDominated((params, [], dict(escaped=True)))
    st = firing_stats(orbit, args.threshold)
    trace = ((args.transient + j + 1, x) for j, x in enumerate(orbit.x))
    tables = [("firing_trace.csv", ["n", "x"], trace, {"n": "iteration", "x": "membrane potential"}),
              ("firing_summary.csv", ["spike_count", "isi_cv", "threshold"],
               [[st.spike_count, st.isi_cv, st.threshold]],
               {"spike_count": "upward threshold crossings", "isi_cv": "std/mean of inter-spike intervals"})]
    return params, tables, dict(spike_count=st.spike_count, isi_cv=st.isi_cv)


def cmd_fixed_points(args):
    pr = _preset(args, "fixed-points")
    p = _map_params(args, pr)
    xlo, xhi = _pick(args, "xlo", {"xlo": pr.get("x_lo")}, -1.0), _pick(args, "xhi", {"xhi": pr.get("x_hi")}, 10.0)
    if not xlo < xhi or args.scan_points < 2:
        raise UsageError("need --xlo < --xhi and --scan-points >= 2")
    fps = find_fixed_points(p, xlo, xhi, args.scan_points)
    rows = []
    for fp in fps:
        l1, l2 = fp.stability.eigenvalues
        rows.append([fp.x_star, fp.phi_star, fp.residual, l1.real, l1.imag, l2.real, l2.imag,
                     fp.stability.kind, fp.degenerate])
    cols = ["x", "phi", "residual", "lam1_re", "lam1_im", "lam2_re", "lam2_im", "class", "degenerate"]
    params = dict(map=p.as_dict(), xlo=xlo, xhi=xhi, scan_points=args.scan_points)
    return params, [("fixed_points.csv", cols, rows, {"class": "stable|saddle|repeller|non_hyperbolic"})], \
        dict(count=len(fps))


def cmd_sweep(args):
    pr = _preset(args, "sweep")
    p = _map_params(args, pr)
    name = _pick(args, "param", pr, None)
    start, end = _pick(args, "start", pr, None), _pick(args, "end", pr, None)
    steps = _pick(args, "steps", pr, None)
    transient, record = _pick(args, "transient", pr, 2000), _pick(args, "record", pr, 200)
    if None in (name, start, end, steps):
        raise UsageError("sweep needs --param, --start, --end and --steps")
    seed = NeuronState(args.x0, args.phi0)
    directions = ["forward", "backward"] if args.direction == "both" else [args.direction]
    try:
        cfgs = [SweepConfig(name, start, end, steps, d, transient, record, seed) for d in directions]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with ThreadPoolExecutor(max_workers=_threads(args)) as pool:
        diagrams = list(pool.map(lambda c: attractor_sweep(c, p), cfgs))
    rows = []
    for d in diagrams:
        for i, (val, esc) in enumerate(zip(d.param_values, d.escaped)):
            for j, x in enumerate(d.samples[i]):
                rows.append([d.direction, i, val, esc, j, x])
    res = dict(escaped_fraction=float(np.mean([d.escaped.mean() for d in diagrams])))
    res["bubbles"] = len(detect_bubbles(diagrams[0]))
    if len(diagrams) == 2:
        res["hysteresis_fraction"] = float(hysteresis_mask(*diagrams).mean())
    params = dict(map=p.as_dict(), param=name, start=start, end=end, steps=steps, transient=transient,
                  record=record, direction=args.direction, x0=args.x0, phi0=args.phi0)
    tables = [("sweep.csv", ["direction", "step", "param_value", "escaped", "sample", "x"], rows,
               {"step": "index in sweep order", "sample": "index of the recorded iterate"})]
    if res["escaped_fraction"] > 0.99:
        raise EscapeDominated((params, tables, res))
    return params, tables, res


def cmd_branch(args):
    pr = _preset(args)
    p = _map_params(args, pr)
    try:
        br = branch_track(p, args.param, (args.start, args.end), args.steps, args.x_seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = []
    for val, fp in zip(br.param_values, br.points):
        l1, l2 = fp.stability.eigenvalues
        rows.append([val, fp.x_star, fp.phi_star, l1.real, l1.imag, l2.real, l2.imag, fp.stability.kind])
    crit = []
    for c in br.crit_points:
        l1, l2 = c.eigen_evidence
        crit.append([c.kind, c.param_value, c.branch_x, l1.real, l1.imag, l2.real, l2.imag])
    params = dict(map=p.as_dict(), param=args.param, start=args.start, end=args.end, steps=args.steps,
                  x_seed=args.x_seed)
    tables = [("branch.csv", ["param_value", "x", "phi", "lam1_re", "lam1_im", "lam2_re", "lam2_im", "class"], rows, {}),
              ("crit_points.csv", ["kind", "param_value", "x", "lam1_re", "lam1_im", "lam2_re", "lam2_im"], crit,
               {"kind": "LP|PD|NS"})]
    return params, tables, dict(terminated=br.terminated, crit_points=len(crit))


def cmd_ns(args):
    pr = _preset(args)
    p = _map_params(args, pr)
    q, fp, rep = ns_self_consistent(p, args.x_guess)
    if rep.eq15_ok:
        rep = ns_first_lyapunov(q, fp)
    cols = ["k_prime", "x", "phi", "trace_at_k", "eq15_ok", "resonance_ok", "theta", "alpha", "beta",
            "modulus_derivative", "supercritical_side", "L11_re", "L11_im", "L12_re", "L12_im",
            "L21_re", "L21_im", "L22_re", "L22_im"]
    row = [rep.k_prime, fp.x_star, fp.phi_star, rep.trace_at_k, rep.eq15_ok, rep.resonance_ok, rep.theta,
           rep.alpha, rep.beta, rep.modulus_derivative,
           rep.supercritical_side if rep.eq15_ok else 0]
    for L in (rep.L11, rep.L12, rep.L21, rep.L22):
        row += [L.real, L.imag]
    params = dict(map=p.as_dict(), x_guess=args.x_guess)
    return params, [("ns.csv", cols, [row], {"theta": "negative means supercritical"})], \
        dict(k_prime=rep.k_prime, theta=rep.theta, valid=rep.valid)


def cmd_basin(args):
    pr = _preset(args, "basin")
    p = _map_params(args, pr)
    threads = _threads(args)
    budget = Budget(transient=args.transient, tail=args.tail, p_max=args.pmax)
    window = (args.xmin, args.xmax, args.phimin, args.phimax)
    if any(v is None for v in window):
        if any(v is not None for v in window):
            raise UsageError("give all of --xmin --xmax --phimin --phimax or none")
        xr, phr = prescan_window(p, budget=budget, threads=threads)
    else:
        xr, phr = (args.xmin, args.xmax), (args.phimin, args.phimax)
    g = basin_grid(xr, phr, args.nx, args.nphi, p, budget, threads)
    xs, phis = grid_axes(xr, phr, args.nx, args.nphi)
    rows = ([i, j, phis[i], xs[j], int(g.cells[i, j])] for i in range(args.nphi) for j in range(args.nx))
    counts = g.label_counts()
    att = [[lid, rec.name, rec.period or 0, rec.lyap_max, counts.get(lid, 0)]
           for lid, rec in sorted(g.attractor_table.items())]
    params = dict(map=p.as_dict(), x_range=list(xr), phi_range=list(phr), nx=args.nx, nphi=args.nphi,
                  transient=args.transient, tail=args.tail, pmax=args.pmax)
    tables = [("basin.csv", ["i_phi", "i_x", "phi0", "x0", "label"], rows, {"label": "attractor id"}),
              ("attractors.csv", ["label", "kind", "period", "lyap_max", "cells"], att, {})]
    res = dict(classes=len(att), divergent_fraction=g.divergent_fraction())
    if res["divergent_fraction"] > 0.99:
        raise EscapeDominated((params, tables, res))
    return params, tables, res


def cmd_corrdim(args):
    pr = _preset(args, "corrdim")
    lo, hi = args.fit_lo, args.fit_hi
    if args.circle:
        sets = [("circle", circle_points(args.points, seed=args.seed))]
        params = dict(circle=True, points=args.points, seed=args.seed)
    else:
        p = _map_params(args, pr)
        ks = pr.get("k_values") if args.k is None and "k_values" in pr else (p.k,)
        sets = [(k, attractor_points(p.with_(k=k), args.points, args.transient)) for k in ks]
        params = dict(map=p.as_dict(), k_values=list(ks), points=args.points, transient=args.transient)
    params.update(fit_lo=lo, fit_hi=hi, radii=args.radii)
    est, curve = [], []
    for label, pts in sets:
        radii = default_radii(pts, args.radii)
        C = correlation_sum(pts, radii)
        d = correlation_dimension(pts, radii, (lo, hi))
        est.append([label, d])
        curve += [[label, rho, c] for rho, c in zip(radii, C)]
    tables = [("corrdim.csv", ["set", "dimension"], est, {}),
              ("corrsum.csv", ["set", "radius", "C"], curve, {"C": "fraction of pairs closer than radius"})]
    return params, tables, {f"dimension.{lab}": d for lab, d in est}


def cmd_network(args):
    pr = _preset(args, "network")
    rows_cfg = pr.get("rows") or [{}]
    if args.row is not None:
        if not 0 <= args.row < len(rows_cfg):
            raise UsageError(f"--row must be in 0..{len(rows_cfg) - 1}")
        rows_cfg = [rows_cfg[args.row]]
    elif len(rows_cfg) > 1:
        raise UsageError("this preset has several rows; choose one with --row")
    base_map = _map_params(args, pr) if pr.get("map") is not None or args.k0 is not None else None
    if base_map is None:
        raise UsageError("network needs map parameters or a network preset")
    p, extra = row_params(dict(map=base_map), rows_cfg[0])
    # explicit map flags beat the row overrides
    p = _map_params(args, dict(map=p))
    sigma = args.sigma if args.sigma is not None else extra.get("sigma", pr.get("sigma", 0.0))
    mu = args.mu if args.mu is not None else extra.get("mu", pr.get("mu", 0.0))
    seeds = _seeds(args.seeds)
    try:
        cfgs = [NetworkConfig(p, sigma, mu, args.nodes, args.range, s, args.init_low, args.init_high,
                              not args.hub_off_ring, args.zero_flux) for s in seeds]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    run = lambda c: simulate(c, args.transient, args.record)
    with ThreadPoolExecutor(max_workers=_threads(args)) as pool:
        hists = list(pool.map(run, cfgs))
    report_rows, snap_rows = [], []
    for s, h in zip(seeds, hists):
        if h.escaped or len(h.x) < 10:
            report_rows.append([s, True, float("nan"), 0, float("nan"), 0, 0, "escaped"])
            continue
        rep = analyze(h, args.window_radius, args.coh_tol, args.cluster_tol)
        report_rows.append([s, False, rep.sync_error, rep.coherent_groups, rep.incoherent_fraction,
                            rep.clusters, rep.n_deviating, rep.classification])
        snap_rows += [[s, m, x] for m, x in enumerate(h.final)]
    params = dict(map=p.as_dict(), sigma=sigma, mu=mu, nodes=args.nodes, range=args.range, seeds=seeds,
                  transient=args.transient, record=args.record, init_low=args.init_low,
                  init_high=args.init_high, hub_on_ring=not args.hub_off_ring, zero_flux=args.zero_flux,
                  window_radius=args.window_radius, coh_tol=args.coh_tol, cluster_tol=args.cluster_tol)
    tables = [("network_report.csv", ["seed", "escaped", "sync_error", "coherent_groups", "incoherent_fraction",
                                      "clusters", "deviating_nodes", "classification"], report_rows, {}),
              ("network_final.csv", ["seed", "node", "x"], snap_rows, {"node": "0 is the hub"})]
    escaped = sum(r[1] for r in report_rows)
    res = dict(runs=len(seeds), escaped_runs=escaped)
    if escaped / len(seeds) > 0.99:
        raise EscapeDominated((params, tables, res))
    return params, tables, res


COMMANDS = {
    "phl": cmd_phl, "orbit": cmd_orbit, "firing": cmd_firing, "fixed-points": cmd_fixed_points,
    "sweep": cmd_sweep, "branch": cmd_branch, "ns": cmd_ns, "basin": cmd_basin,
    "corrdim": cmd_corrdim, "network": cmd_network,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mrchialvo", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("phl", help="memristor response to a sinusoidal drive")
    sp.add_argument("--vm", type=float)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--k1", type=float)
    sp.add_argument("--k2", type=float)
    sp.add_argument("--h", type=float)
    sp.add_argument("--phi0", type=float)
    sp.add_argument("--steps", type=int, default=2000)
    sp.add_argument("--preset")
    _add_common(sp)

    sp = sub.add_parser("orbit", help="iterate the map")
    _add_map_args(sp)
    sp.add_argument("--x0", type=float, default=0.1)
    sp.add_argument("--phi0", type=float, default=0.0)
    sp.add_argument("--transient", type=int, default=1000)
    sp.add_argument("--record", type=int, default=1000)
    _add_common(sp)

    sp = sub.add_parser("firing", help="spike statistics of a trace")
    _add_map_args(sp)
    sp.add_argument("--pattern", choices=["regular_spiking", "tonic_spiking", "chaotic_bursting",
                                          "periodic_bursting", "phasic_bursting"])
    sp.add_argument("--x0", type=float, default=0.1)
    sp.add_argument("--phi0", type=float, default=0.0)
    sp.add_argument("--transient", type=int, default=1000)
    sp.add_argument("--record", type=int, default=1000)
    sp.add_argument("--threshold", type=float)
    _add_common(sp)

    sp = sub.add_parser("fixed-points", help="fixed points and their stability")
    _add_map_args(sp)
    sp.add_argument("--xlo", type=float)
    sp.add_argument("--xhi", type=float)
    sp.add_argument("--scan-points", type=int, default=20000)
    _add_common(sp)

    sp = sub.add_parser("sweep", help="attractor bifurcation diagram with carry-over seeding")
    _add_map_args(sp)
    sp.add_argument("--param", choices=MAP_FIELDS)
    sp.add_argument("--start", type=float)
    sp.add_argument("--end", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--direction", choices=["forward", "backward", "both"], default="both")
    sp.add_argument("--transient", type=int)
    sp.add_argument("--record", type=int)
    sp.add_argument("--x0", type=float, default=0.1)
    sp.add_argument("--phi0", type=float, default=0.0)
    _add_common(sp)

    sp = sub.add_parser("branch", help="fixed-point continuation with LP/PD/NS detection")
    _add_map_args(sp)
    sp.add_argument("--param", choices=MAP_FIELDS, required=True)
    sp.add_argument("--start", type=float, required=True)
    sp.add_argument("--end", type=float, required=True)
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--x-seed", type=float, required=True)
    _add_common(sp)

    sp = sub.add_parser("ns", help="Neimark-Sacker coupling k' and normal-form coefficient")
    _add_map_args(sp)
    sp.add_argument("--x-guess", type=float, required=True)
    _add_common(sp)

    sp = sub.add_parser("basin", help="basin-of-attraction grid")
    _add_map_args(sp)
    for name in ("xmin", "xmax", "phimin", "phimax"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--nx", type=int, default=300)
    sp.add_argument("--nphi", type=int, default=300)
    sp.add_argument("--transient", type=int, default=5000)
    sp.add_argument("--tail", type=int, default=2000)
    sp.add_argument("--pmax", type=int, default=64)
    _add_common(sp)

    sp = sub.add_parser("corrdim", help="correlation dimension of an attractor")
    _add_map_args(sp)
    sp.add_argument("--points", type=int, default=20000)
    sp.add_argument("--transient", type=int, default=5000)
    sp.add_argument("--radii", type=int, default=24)
    sp.add_argument("--fit-lo", type=float, default=0.0)
    sp.add_argument("--fit-hi", type=float, default=0.4)
    sp.add_argument("--circle", action="store_true", help="run the uniform-circle control instead")
    sp.add_argument("--seed", type=int, default=1)
    _add_common(sp)

    sp = sub.add_parser("network", help="ring-star network simulation and pattern metrics")
    _add_map_args(sp)
    sp.add_argument("--row", type=int, help="row index for multi-row presets")
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--nodes", type=int, default=100)
    sp.add_argument("--range", type=int, default=10, help="ring coupling range R")
    sp.add_argument("--seeds", default="1", help="seed list, e.g. '1-20' or '3,7'")
    sp.add_argument("--transient", type=int, default=5000)
    sp.add_argument("--record", type=int, default=200)
    sp.add_argument("--init-low", type=float, default=0.0)
    sp.add_argument("--init-high", type=float, default=1.0)
    sp.add_argument("--hub-off-ring", action="store_true", help="exclude the hub from ring coupling")
    sp.add_argument("--zero-flux", action="store_true", help="start every flux at 0")
    sp.add_argument("--window-radius", type=int, default=2)
    sp.add_argument("--coh-tol", type=float, default=0.01)
    sp.add_argument("--cluster-tol", type=float, default=0.05)
    _add_common(sp)

    sp = sub.add_parser("preset", help="list or show named recipes")
    sp.add_argument("action", choices=["list", "show"])
    sp.add_argument("name", nargs="?")

    sp = sub.add_parser("rerun", help="repeat a run from its manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", default=".")
    return ap


def _error(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _emit(args, argv, params, tables, result, t0) -> list[str]:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, cols, rows, schema in tables:
        write_table(out / name, cols, rows, schema)
        files.append(name)
    manifest = {
        "tool_version": __version__,
        "command": args.command,
        "argv": shlex.join(argv),
        "params": params,
        "result": result,
        "outputs": files,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "duration_s": round(time.perf_counter() - t0, 3),
    }
    write_manifest(out / f"{args.command}.manifest", manifest)
    return files


def _strip_out(argv: list[str]) -> list[str]:
    res, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        res.append(a)
    return res


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "preset":
        if args.action == "list":
            print("\n".join(preset_names()))
            return EXIT_OK
        if not args.name:
            return _error("preset show needs a name", EXIT_ARGS)
        try:
            print(preset(args.name))
        except KeyError as exc:
            return _error(str(exc), EXIT_ARGS)
        return EXIT_OK
    if args.command == "rerun":
        man = read_manifest(args.manifest)
        return main(shlex.split(man["argv"]) + ["--out", args.out])

    t0 = time.perf_counter()
    recorded = _strip_out(argv)
    try:
        params, tables, result = COMMANDS[args.command](args)
    except UsageError as exc:
        return _error(str(exc), EXIT_ARGS)
    except EscapeDominated as exc:
        params, tables, result = exc.args[0]
        _emit(args, recorded, params, tables, result, t0)
        return _error("run is escape-dominated; partial outputs written", EXIT_ESCAPE)
    except (DegenerateParameterError, NormalFormError, ArithmeticError) as exc:
        return _error(f"numerical failure: {exc}", EXIT_NUMERIC)
    except ValueError as exc:
        return _error(str(exc), EXIT_ARGS)
    _emit(args, recorded, params, tables, result, t0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
