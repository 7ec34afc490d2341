"""Command-line front end.

Exit status: 0 on success (a zero radius is a valid answer), 1 when a
budgeted computation does not converge, 2 for usage and precondition errors.
Every data file starts with ``#`` lines echoing the full config, and
``siegel replay FILE`` re-runs the command recorded there.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__, kernels
from .arithmetic import (RationalDetected, RotationNumber, brjuno_function, brjuno_sum,
                         classify, continued_fraction, parse_alpha)
from .herman import (CircleFamily, NearRationalError, conjugacy_samples, lock_scan,
                     rotation_number, solve_lambda)
from .io import read_table, write_table
from .linearizer import (MIN_RADIUS_TERMS, conformal_radius, export_series, linearizer_coeffs,
                         verify_conjugacy)
from .search import (RadiusOracle, SearchConfig, SearchError, linearizer_distance,
                     semicontinuity_probe, target_radius_search)

OK, NOT_CONVERGED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "json", "dump"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, summary: dict, lines: list[str]):
    if args.json:
        print(json.dumps(summary, sort_keys=True, default=_jsonable))
    else:
        print("\n".join(lines))


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    return str(obj)


def _alpha(text: str) -> RotationNumber:
    try:
        return parse_alpha(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from exc


def _oracle_alpha(rot: RotationNumber):
    return rot.fraction if rot.fraction is not None else rot.value


# --- brjuno -------------------------------------------------------------------------


def cmd_brjuno(args) -> int:
    if args.quotients:
        try:
            rot = RotationNumber.from_quotients([int(t) for t in args.quotients.split(",") if t])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    elif args.alpha:
        rot = _alpha(args.alpha)
    else:
        raise UsageError("give --alpha or --quotients")
    cf = continued_fraction(rot, args.terms, args.cutoff)
    n_sum = len(cf.quotients)
    bv = brjuno_sum(cf, n_sum) if n_sum else None
    cls = classify(rot)
    depth = max(1, args.terms if rot.source != "quotients" else min(args.terms, len(rot.quotients) + 1))
    try:
        phi = brjuno_function(rot, depth, args.cutoff)
    except RationalDetected as exc:
        phi = None
        phi_note = f"rational {exc.p}/{exc.q}"
    except ValueError as exc:
        phi, phi_note = None, str(exc)
    else:
        phi_note = ""

    partial, sums = 0.0, []
    for t in (bv.terms if bv else ()):
        partial += t
        sums.append(partial)
    rows = ["n,a_n,p_n,q_n,term,partial_sum"]
    for k, (p, q) in enumerate(cf.convergents):
        a = cf.quotients[k - 1] if k else 0
        term = bv.terms[k] if bv and k < len(bv.terms) else float("nan")
        ps = sums[k] if k < len(sums) else float("nan")
        rows.append(f"{k},{a},{p},{q},{term!r},{ps!r}")
    summary = {"alpha": rot.describe(), "value": rot.value, "quotients": list(cf.quotients),
               "terminated": cf.terminated, "brjuno_sum": bv.partial_sum if bv else 0.0,
               "divergence_flag": bv.divergence_flag if bv else True,
               "brjuno_function": phi, "classification": cls.label, "note": cls.note}
    lines = [f"alpha = {rot.describe()} = {rot.value!r}",
             f"quotients ({len(cf.quotients)}): {list(cf.quotients)}",
             f"terminated (rational): {cf.terminated}",
             "n, a_n, p_n, q_n, ln(q_{n+1})/q_n, partial sum"]
    lines += ["  " + r.replace(",", ", ") for r in rows[1:]]
    if bv:
        lines.append(f"brjuno sum over {bv.terms_used} terms = {bv.partial_sum!r}"
                     + (" (divergent/rational)" if bv.divergence_flag else ""))
    lines.append(f"brjuno function (depth {depth}) = "
                 + (repr(phi) if phi is not None else phi_note))
    lines.append(f"classification: {cls}")
    if args.out:
        write_table(args.out, "brjuno", _config(args), rows)
    _emit(args, summary, lines)
    return OK


# --- radius -------------------------------------------------------------------------


def cmd_radius(args) -> int:
    if args.N < MIN_RADIUS_TERMS:
        raise UsageError(f"N={args.N} is below the minimum of {MIN_RADIUS_TERMS} coefficients")
    rot = _alpha(args.alpha)
    lines = [f"alpha = {rot.describe()} = {rot.value!r}"]
    if rot.source == "float":
        # same grid as the scan/search oracle, so a scan row and this report agree
        snapped = RadiusOracle(N=args.N, sigma=args.sigma).quantize(rot.value)
        if snapped != rot.value:
            lines.append(f"snapped to the oracle grid: {snapped!r} (use p/q for exact rationals)")
            rot = RotationNumber.from_float(snapped)
    series = linearizer_coeffs(rot, args.N, args.sigma)
    summary = {"alpha": rot.describe(), "value": rot.value, "N": series.N, "sigma": series.sigma}
    if series.resonance is not None:
        summary.update(radius=0.0, resonance_order=series.resonance.order, uncertainty=0.0)
        lines += [f"resonance at order {series.resonance.order}: radius 0"]
    else:
        M = min(args.verify, series.N)
        residual = verify_conjugacy(series, M)
        fit = conformal_radius(series, "hadamard-fit", args.window)
        summary.update(radius=fit.value if args.method == "hadamard-fit" else fit.tail,
                       hadamard_fit=fit.hadamard, tail_slope=fit.tail,
                       uncertainty=fit.uncertainty, window=list(fit.window),
                       conjugacy_residual=residual, verify_order=M)
        lines += [f"N = {series.N}, sigma = {series.sigma!r} ({series.rescales} rescales)",
                  f"conjugacy residual through order {M}: {residual:.3e}",
                  f"hadamard-fit radius: {fit.hadamard!r}",
                  f"tail-slope radius:   {fit.tail!r}",
                  f"uncertainty: {fit.uncertainty:.3e} (window {fit.window[0]}..{fit.window[1]})"]
    if args.dump:
        export_series(series, args.dump, _config(args))
        lines.append(f"coefficients written to {args.dump}")
    _emit(args, summary, lines)
    return OK


# --- search -------------------------------------------------------------------------


def cmd_search(args) -> int:
    rot = _alpha(args.alpha0)
    if args.r_target is None and args.r_fraction is None:
        raise UsageError("give --r-target or --r-fraction")
    oracle = RadiusOracle(N=args.N0, sigma=args.sigma)
    r0 = oracle(_oracle_alpha(rot))
    r_target = args.r_target if args.r_target is not None else args.r_fraction * r0.value
    if not r_target > 0:
        raise UsageError("target radius must be positive")
    tol = args.tol if args.tol is not None else args.tol_fraction * r0.value
    cfg = SearchConfig(max_stages=args.max_stages, n_max=args.n_max, seed=args.seed)
    status = OK
    try:
        trace = target_radius_search(rot.value, r_target, args.delta, tol, oracle, cfg)
        message = "converged" if trace.converged else "stage budget exhausted"
        if not trace.converged:
            status = NOT_CONVERGED
    except SearchError as exc:
        trace, message, status = exc.trace, f"failed: {exc}", NOT_CONVERGED
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    N = trace.final_N
    d_r = cfg.dist_fraction * r_target
    dist = linearizer_distance(oracle.series(trace.final_alpha, N), oracle.series(rot.value, N),
                               d_r, cfg.dist_grid) if trace.stages else 0.0
    summary = dict(trace.summary(), message=message, distance_to_initial=dist, radius_disk=d_r,
                   violations=trace.invariant_violations())
    if args.out:
        rows = trace.rows()
        meta = {k: summary[k] for k in ("converged", "final_alpha", "final_radius",
                                        "distance_to_initial")}
        write_table(args.out, "search-trace", _config(args), rows, meta)
    lines = [f"alpha0 = {rot.describe()}, r(alpha0) = {r0.value!r}",
             f"target radius {r_target!r}, tol {tol!r}, delta {args.delta!r}",
             "i, beta, eps, r, dist"]
    lines += ["  " + r.replace(",", ", ") for r in trace.rows()[1:]]
    lines += [f"{message}: final alpha {trace.final_alpha!r} (shift {summary['alpha_shift']:.3e}), "
              f"radius {trace.final_radius!r}",
              f"distance to initial linearizer on |z| <= {d_r:.6g}: {dist:.3e}"]
    _emit(args, summary, lines)
    return status


# --- scan ---------------------------------------------------------------------------


def scan_grid(lo: float, hi: float, count: int, qmax: int) -> list:
    """``count`` equispaced points with the nearest node to each ``p/q`` (``q <= qmax``) snapped to it."""
    grid: list = list(np.linspace(lo, hi, count)) if count > 1 else [lo]
    grid = [float(x) for x in grid]
    if qmax >= 1 and count > 1:
        step = (hi - lo) / (count - 1)
        for q in range(1, qmax + 1):
            for p in range(math.ceil(lo * q), math.floor(hi * q) + 1):
                f = Fraction(p, q)
                if f.denominator != q or not lo <= f <= hi:
                    continue
                i = int(round((float(f) - lo) / step))
                grid[i] = f
    return grid


def cmd_scan(args) -> int:
    if args.count < 1:
        raise UsageError("empty grid")
    if not args.min <= args.max:
        raise UsageError("need --min <= --max")
    cost = args.count * args.N ** 2 / 2
    if cost > args.budget:
        raise UsageError(f"grid needs ~{cost:.3g} multiply-adds, budget is {args.budget:.3g}")
    oracle = RadiusOracle(N=args.N, sigma=args.sigma)
    grid = scan_grid(args.min, args.max, args.count, args.qmax)
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        ests = list(pool.map(oracle, grid))
    rows = ["alpha,r_est,uncertainty,resonant"]
    for a, e in zip(grid, ests):
        rows.append(f"{float(a)!r},{e.value!r},{e.uncertainty!r},{int(e.resonant_zero)}")
    zeros = [str(a) for a, e in zip(grid, ests) if e.resonant_zero]
    summary = {"points": len(grid), "resonant": zeros,
               "max_radius": max(e.value for e in ests), "backend": kernels.BACKEND}
    if args.probe_alpha is not None:
        scales = [float(s) for s in args.probe_scales.split(",") if s]
        probe = semicontinuity_probe(_oracle_alpha(_alpha(args.probe_alpha)), scales,
                                     args.probe_samples, oracle, seed=args.seed)
        rows.append("")
        rows.append("scale,value,max_left,max_right,usc_margin,lsc_gap")
        rows += [f"{p.scale!r},{p.value!r},{p.max_left!r},{p.max_right!r},"
                 f"{p.usc_margin!r},{p.lsc_gap!r}" for p in probe]
        summary["probe"] = [dict(scale=p.scale, usc_margin=p.usc_margin, lsc_gap=p.lsc_gap)
                            for p in probe]
    if args.out:
        write_table(args.out, "scan", _config(args), rows)
    lines = [f"{len(grid)} points on [{args.min}, {args.max}], N = {args.N}",
             f"resonant zeros at: {', '.join(zeros) or 'none'}",
             f"max radius {summary['max_radius']!r}"]
    if not args.out:
        lines += rows
    _emit(args, summary, lines)
    return OK


# --- herman -------------------------------------------------------------------------


def _family(args, lam: float = 0.0) -> CircleFamily:
    try:
        a = complex(args.a.replace(" ", "")) if isinstance(args.a, str) else args.a
        if a.imag == 0:
            a = a.real
        return CircleFamily(args.family, a, lam)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _target_rho(text: str) -> float:
    t = text.strip().lower()
    if t in ("0", "0.0"):
        return 0.0
    return _alpha(text).value


def cmd_herman_rotnum(args) -> int:
    fam = _family(args, args.lam)
    est = rotation_number(fam, args.n_iter, args.mode, args.x0)
    summary = {"lambda": args.lam, "rho": est.value, "error": est.error, "mode": est.mode,
               "convergent": list(est.convergent) if est.convergent else None}
    _emit(args, summary, [f"rho = {est.value!r} +- {est.error:.3e} ({est.mode}, {est.n_iter} steps)"])
    return OK


def cmd_herman_solve(args) -> int:
    template = _family(args)
    target = _target_rho(args.rho)
    sol = solve_lambda(template, target, args.tol, args.n_iter)
    summary = {"lambda": sol.lam, "rho": sol.rho.value, "rho_error": sol.rho.error,
               "target": target, "mode_locked": sol.mode_locked,
               "plateau": list(sol.plateau) if sol.plateau else None}
    lines = [f"lambda = {sol.lam!r}, rho = {sol.rho.value!r} (target {target!r})"]
    if sol.mode_locked:
        lines.append(f"mode-locked plateau [{sol.plateau[0]!r}, {sol.plateau[1]!r}]")
    _emit(args, summary, lines)
    return OK if abs(sol.rho.value - target) <= args.tol or sol.mode_locked else NOT_CONVERGED


def cmd_herman_conjugacy(args) -> int:
    template = _family(args)
    if args.lam is not None:
        lam = args.lam
    elif args.rho is not None:
        lam = solve_lambda(template, _target_rho(args.rho), args.tol).lam
    else:
        raise UsageError("give --lambda or --rho")
    try:
        cs = conjugacy_samples(template.at(lam), args.n)
    except NearRationalError as exc:
        raise UsageError(str(exc)) from exc
    summary = {"lambda": lam, "rho": cs.rho.value, "rho_error": cs.rho.error, "n": args.n,
               "fit_residual": cs.fit_residual, "modulus_estimate": cs.modulus}
    if args.out:
        orbit, four = cs.rows()
        meta = {"lambda": repr(lam), "rho": repr(cs.rho.value), "modulus_estimate": repr(cs.modulus)}
        write_table(args.out, "conjugacy", _config(args), orbit + [""] + four, meta)
    lines = [f"lambda = {lam!r}, rho = {cs.rho.value!r}",
             f"{args.n} orbit samples, {len(cs.freqs)} Fourier modes, "
             f"reconstruction error {cs.fit_residual:.3e}",
             f"half-modulus estimate: {cs.modulus!r}"]
    _emit(args, summary, lines)
    return OK


def cmd_herman_lockscan(args) -> int:
    if args.grid < 2:
        raise UsageError("grid must have at least 2 points")
    template = _family(args)
    scan = lock_scan(template, args.lambda_min, args.lambda_max, args.grid, args.n_iter)
    rows = ["lambda,rho,error"] + [f"{l!r},{e.value!r},{e.error!r}" for l, e in scan]
    rhos = [e.value for _, e in scan]
    monotone = all(b >= a - (ea.error + eb.error)
                   for (_, ea), (_, eb), a, b in zip(scan, scan[1:], rhos, rhos[1:]))
    if args.out:
        write_table(args.out, "lockscan", _config(args), rows)
    summary = {"points": len(scan), "nondecreasing": monotone}
    lines = rows if not args.out else []
    lines.append(f"nondecreasing: {monotone}")
    _emit(args, summary, lines)
    return OK


# --- replay -------------------------------------------------------------------------


def cmd_replay(args) -> int:
    config, _, _, _ = read_table(args.file)
    if "command" not in config:
        raise UsageError(f"{args.file} has no replayable config")
    ns = argparse.Namespace(**config)
    ns.out = args.out
    ns.json = args.json
    ns.dump = getattr(args, "out", None) if config["command"] == "radius" else None
    func = _COMMANDS[(config["command"], config.get("subcommand"))]
    return func(ns)


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="siegel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"siegel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="print a JSON summary")
        p.add_argument("--out", help="data file (relative paths go to $SIEGEL_OUTPUT_DIR)")

    p = sub.add_parser("brjuno", help="continued fraction, Brjuno sums, classification")
    p.add_argument("--alpha")
    p.add_argument("--quotients", help="comma-separated partial quotients a_1,a_2,...")
    p.add_argument("--terms", type=int, default=30)
    p.add_argument("--cutoff", type=int, default=10 ** 6)
    common(p)
    p.set_defaults(func=cmd_brjuno)

    p = sub.add_parser("radius", help="linearizer series and conformal radius")
    p.add_argument("--alpha", required=True)
    p.add_argument("--N", type=int, default=4096)
    p.add_argument("--sigma", type=float, default=0.25)
    p.add_argument("--method", choices=("hadamard-fit", "tail-slope"), default="hadamard-fit")
    p.add_argument("--window", type=float, default=0.5)
    p.add_argument("--verify", type=int, default=1024, help="order of the conjugacy check")
    p.add_argument("--dump", help="write the coefficient file here")
    common(p)
    p.set_defaults(func=cmd_radius)

    p = sub.add_parser("search", help="staged search for a prescribed radius")
    p.add_argument("--alpha0", default="golden")
    p.add_argument("--r-target", type=float)
    p.add_argument("--r-fraction", type=float)
    p.add_argument("--delta", type=float, default=1e-2)
    p.add_argument("--tol", type=float)
    p.add_argument("--tol-fraction", type=float, default=0.02)
    p.add_argument("--N0", type=int, default=4096)
    p.add_argument("--n-max", type=int, default=16384)
    p.add_argument("--sigma", type=float, default=0.25)
    p.add_argument("--max-stages", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("scan", help="radius over a parameter grid")
    p.add_argument("--min", type=float, default=0.60)
    p.add_argument("--max", type=float, default=0.64)
    p.add_argument("--count", type=int, default=512)
    p.add_argument("--N", type=int, default=4096)
    p.add_argument("--sigma", type=float, default=0.25)
    p.add_argument("--qmax", type=int, default=8,
                   help="snap grid nodes to rationals with denominator <= qmax")
    p.add_argument("--budget", type=float, default=1e11, help="max multiply-adds")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--probe-alpha")
    p.add_argument("--probe-scales", default="1e-2,1e-3,1e-4,1e-5,1e-6")
    p.add_argument("--probe-samples", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("herman", help="circle-map families")
    hsub = p.add_subparsers(dest="subcommand", required=True)

    def family(q):
        q.add_argument("--family", choices=("blaschke", "arnold"), default="blaschke")
        q.add_argument("--a", default="4")
        common(q)

    q = hsub.add_parser("rotnum")
    family(q)
    q.add_argument("--lambda", dest="lam", type=float, required=True)
    q.add_argument("--n-iter", type=int, default=2 ** 16)
    q.add_argument("--mode", choices=("birkhoff", "convergent-accelerated"), default="birkhoff")
    q.add_argument("--x0", type=float, default=0.0)
    q.set_defaults(func=cmd_herman_rotnum)

    q = hsub.add_parser("solve")
    family(q)
    q.add_argument("--rho", required=True)
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--n-iter", type=int, default=2 ** 15)
    q.set_defaults(func=cmd_herman_solve)

    q = hsub.add_parser("conjugacy")
    family(q)
    q.add_argument("--lambda", dest="lam", type=float)
    q.add_argument("--rho")
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--n", type=int, default=4096)
    q.set_defaults(func=cmd_herman_conjugacy)

    q = hsub.add_parser("lockscan")
    family(q)
    q.add_argument("--grid", type=int, default=64)
    q.add_argument("--lambda-min", type=float, default=0.0)
    q.add_argument("--lambda-max", type=float, default=1.0)
    q.add_argument("--n-iter", type=int, default=2 ** 14)
    q.set_defaults(func=cmd_herman_lockscan)

    p = sub.add_parser("replay", help="re-run the command recorded in a file header")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_replay)
    return parser


_COMMANDS = {
    ("brjuno", None): cmd_brjuno,
    ("radius", None): cmd_radius,
    ("search", None): cmd_search,
    ("scan", None): cmd_scan,
    ("herman", "rotnum"): cmd_herman_rotnum,
    ("herman", "solve"): cmd_herman_solve,
    ("herman", "conjugacy"): cmd_herman_conjugacy,
    ("herman", "lockscan"): cmd_herman_lockscan,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"siegel: error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
