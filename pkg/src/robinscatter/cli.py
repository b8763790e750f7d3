"""Command-line front end.

    robinscatter green eval|validate-images|farfield
    robinscatter probe radiation|boundary-delta
    robinscatter forward solve
    robinscatter maps build|check-identities|reduce
    robinscatter cgo build|ortho|scan

Every run writes ``<group>_<command>.json`` (summary, pass/fail per check)
and usually a CSV table into ``--out``.  Exit status: 0 all checks pass,
1 a check failed, 2 configuration error, 3 convergence failure,
4 precondition violation.
"""
import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import cgo, green, maps
from .cache import EvaluationCache, cache_key
from .config import ConfigError, ExperimentConfig, load_config
from .exceptions import ConvergenceError, PreconditionError
from .forward import LippmannSchwingerSolver
from .green import MediumSpec, SpectralKernelParams
from .periodic import GaussianBasis

log = logging.getLogger("robinscatter")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_PRECONDITION = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# output helpers
def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cplx_cols(name):
    return [f"{name}_re", f"{name}_im"]


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# ---------------------------------------------------------------------------
# green
def cmd_green_eval(cfg: ExperimentConfig, args, cache):
    med = cfg.medium
    src = cfg.get_points("run", "src")
    rcv = cfg.get_points("run", "rcv")
    if len(src) == 1:
        src = np.repeat(src, len(rcv), axis=0)
    if len(src) != len(rcv):
        raise ConfigError(f"{cfg.source}: [run] src and rcv must pair up")
    method = cfg.get_str("run", "method", "split")
    cross = cfg.get_str("run", "cross_check", "false").lower() == "true"
    params = SpectralKernelParams.for_dimension(med.d)
    sig = f"{method}:{cross}:{params.quad}"
    rows = []
    for x, y in zip(rcv, src):
        def compute(x=x, y=y):
            val = green.green_robin(x, y, med, params, method)
            if cross:
                other = "spectral" if method == "split" else "split"
                err = abs(val - green.green_robin(x, y, med, params, other))
            else:
                err = float("nan")
            return val, err
        key = cache_key(med.d, med.k, med.theta, x, y, sig)
        val, err = cache.lookup_or_compute(key, compute) if cache else compute()
        rows.append([*x, *y, val.real, val.imag, err])
    d = med.d
    header = [f"x_{i + 1}" for i in range(d)] + [f"y_{i + 1}" for i in range(d)] + ["re", "im", "err"]
    write_csv(args.out / "green_eval.csv", header, rows)
    write_json(args.out / "green_eval.json", {"count": len(rows), "method": method, "d": d,
                                              "k": med.k, "theta": med.theta, "checks": {}})
    return {}


def random_pairs(rng, d, n, lo=0.2, hi=2.0, spread=2.0, min_sep=0.3):
    out = []
    while len(out) < n:
        x = np.concatenate([rng.uniform(-spread, spread, d - 1), [rng.uniform(lo, hi)]])
        y = np.concatenate([rng.uniform(-spread, spread, d - 1), [rng.uniform(lo, hi)]])
        if np.linalg.norm(x - y) >= min_sep:
            out.append((x, y))
    return out


def validate_images(d, k=1.0, n_pairs=20, seed=0):
    """Spectral route against the Neumann image formula at theta = 0."""
    med = MediumSpec(d, k, 0.0)
    params = SpectralKernelParams.for_dimension(d)
    rng = np.random.default_rng(seed)
    rows, errs = [], []
    for x, y in random_pairs(rng, d, n_pairs):
        spec = green.green_robin(x, y, med, params, method="spectral")
        img = green.green_images(x, y, med, kind="neumann")
        e = abs(spec - img) / abs(img)
        errs.append(e)
        rows.append([*x, *y, spec.real, spec.imag, img.real, img.imag, e])
    return rows, float(max(errs))


def cmd_green_validate(cfg, args, cache):
    d = cfg.medium.d
    tol = cfg.get_float("run", "tol", 1e-6)
    rows, worst = validate_images(d, cfg.medium.k, cfg.get_int("run", "pairs", 20), args.seed)
    header = ([f"x_{i + 1}" for i in range(d)] + [f"y_{i + 1}" for i in range(d)]
              + _cplx_cols("spectral") + _cplx_cols("images") + ["rel_err"])
    write_csv(args.out / "green_validate-images.csv", header, rows)
    checks = {"spectral_vs_images": worst <= tol}
    write_json(args.out / "green_validate-images.json",
               {"max_rel_err": worst, "tol": tol, "seed": args.seed, "checks": checks})
    return checks


def surface_wave_fit(medium: MediumSpec, source_height=0.5, rho_min=50.0, rho_max=400.0, n=3501):
    """Boundary trace of G over a rho window: fitted wavenumber and remainder slope."""
    rho = np.linspace(rho_min, rho_max, n)
    y = np.zeros(medium.d)
    y[-1] = source_height
    X = np.zeros((n, medium.d))
    X[:, 0] = rho
    g = green.robin_values(medium, X, np.broadcast_to(y, X.shape))
    kfit = float(np.polyfit(rho, np.unwrap(np.angle(g)), 1)[0])
    sw = np.array([green.surface_wave_term(x, y, medium) for x in X])
    rem = np.abs(g - sw)
    return rho, g, sw, kfit, _slope(rho, rem)


def cmd_green_farfield(cfg, args, cache):
    med = cfg.medium
    if med.regime != "nonabsorbing":
        raise PreconditionError("green farfield needs a real theta > 0 (surface-wave regime)")
    rho, g, sw, kfit, slope = surface_wave_fit(
        med, cfg.get_float("run", "source_height", 0.5), cfg.get_float("run", "rho_min", 50.0),
        cfg.get_float("run", "rho_max", 400.0), cfg.get_int("run", "samples", 3501))
    kp = float(med.surface_wavenumber.real)
    rel = abs(kfit - kp) / kp
    rows = [[r, a.real, a.imag, b.real, b.imag] for r, a, b in zip(rho, g, sw)]
    write_csv(args.out / "green_farfield.csv", ["rho"] + _cplx_cols("G") + _cplx_cols("surface"), rows)
    checks = {"wavenumber": rel <= cfg.get_float("run", "wavenumber_tol", 5e-3),
              "remainder_slope": slope <= cfg.get_float("run", "slope_max", -1.0)}
    write_json(args.out / "green_farfield.json",
               {"fitted_wavenumber": kfit, "surface_wavenumber": kp, "rel_err": rel,
                "remainder_slope": slope, "checks": checks})
    return checks


# ---------------------------------------------------------------------------
# probes
RADIATION_BOUNDS = {
    2: {"volume": lambda a: -(1 + a), "surface": lambda a: -(1 + a)},
    3: {"volume": lambda a: -(2 * a + 0.5), "surface": lambda a: -(1.5 - a)},
}


def radiation_scan(medium, radii, alpha=0.3, source_height=0.5, n_angles=64):
    y = np.zeros(medium.d)
    y[-1] = source_height
    f = lambda X: green.robin_values(medium, X, np.broadcast_to(y, X.shape))
    gr = lambda X: green.robin_gradient_values(medium, X, np.broadcast_to(y, X.shape))
    return green.radiation_residual_scan(f, medium, radii, gradient=gr, alpha=alpha,
                                         n_angles=n_angles)


def cmd_probe_radiation(cfg, args, cache):
    med = cfg.medium
    alpha = cfg.get_float("run", "alpha", 0.3)
    slack = cfg.get_float("run", "slope_slack", 0.15)
    radii = cfg.get_floats("run", "radii", [25.0, 50.0, 100.0, 200.0, 400.0])
    n_ang = cfg.get_int("run", "n_angles", 64 if med.d == 2 else 32)
    scan = radiation_scan(med, radii, alpha, cfg.get_float("run", "source_height", 0.5), n_ang)
    keys = sorted(scan.residuals)
    rows = [[r, *[scan.residuals[k][i] for k in keys]] for i, r in enumerate(scan.radii)]
    write_csv(args.out / "probe_radiation.csv", ["radius"] + keys, rows)
    checks, bounds = {}, {}
    for key in keys:
        b = RADIATION_BOUNDS[med.d][key](alpha) if key in RADIATION_BOUNDS[med.d] else -(med.d - 1) / 2
        bounds[key] = b
        checks[f"{key}_slope"] = scan.slopes[key] <= b + slack
    write_json(args.out / "probe_radiation.json",
               {"alpha": alpha, "slopes": scan.slopes, "bounds": bounds, "slack": slack,
                "checks": checks})
    return checks


def delta_limit(medium, heights=(1e-1, 1e-2, 1e-3), width=0.5, convention="raw"):
    """Values along the limit sequence and a first-order Richardson extrapolation."""
    vals = [green.boundary_delta_limit(h, medium, width=width, convention=convention)
            for h in heights]
    h1, h2 = heights[-2], heights[-1]
    extra = vals[-1] + (vals[-1] - vals[-2]) * h2 / (h1 - h2)
    return vals, extra


def cmd_probe_delta(cfg, args, cache):
    med = cfg.medium
    conv = cfg.get_str("run", "convention", "raw")
    heights = cfg.get_floats("run", "heights", [1e-1, 1e-2, 1e-3])
    vals, extra = delta_limit(med, heights, cfg.get_float("run", "width", 0.5), conv)
    c, cp = green.PAPER_CONSTANTS[med.d]
    target = 2 * c * cp if conv == "raw" else -1.0
    rel = abs(extra - target) / abs(target)
    write_csv(args.out / "probe_boundary-delta.csv", ["height", "re", "im"],
              [[h, v.real, v.imag] for h, v in zip(heights, vals)])
    checks = {"delta_factor": rel <= cfg.get_float("run", "tol", 1e-3)}
    write_json(args.out / "probe_boundary-delta.json",
               {"convention": conv, "extrapolated": extra, "target": target, "rel_err": rel,
                "checks": checks})
    return checks


# ---------------------------------------------------------------------------
# forward
def born_scaling(potential, medium, f, amplitudes=(1.0, 0.5, 0.25)):
    """Second-order Born remainders ||u - u_inc - G V u_inc|| for scaled contrasts."""
    out = []
    for s in amplitudes:
        solver = LippmannSchwingerSolver(medium.d, medium.k, medium.theta).fit(
            potential.scaled(s, medium.k))
        u = solver.solve(f)
        out.append(float(np.linalg.norm(u.values - u.incident - solver.apply_volume_operator(u.incident))))
    return out


def homogeneous_ratio(potential, medium, f):
    """||u|| for zero data over ||u|| for the reference datum f."""
    solver = LippmannSchwingerSolver(medium.d, medium.k, medium.theta).fit(potential)
    ref = solver.solve(f)
    zero = solver.solve(f.with_values(np.zeros_like(f.values)))
    return float(np.linalg.norm(zero.values) / np.linalg.norm(ref.values))


def cmd_forward_solve(cfg, args, cache):
    med = cfg.medium
    pot = cfg.build_potential()
    if pot is None:
        raise ConfigError(f"{cfg.source}: forward solve needs a [potential] recipe")
    f = cfg.build_boundary()
    check = cfg.get_str("run", "check", "none")
    solver = LippmannSchwingerSolver(med.d, med.k, med.theta).fit(pot)
    u = solver.solve(f)
    trace, flux = solver.trace_and_flux(f, u)
    C = pot.centers
    write_csv(args.out / "forward_field.csv",
              [f"x_{i + 1}" for i in range(med.d)] + ["re", "im"],
              [[*c, v.real, v.imag] for c, v in zip(C, u.values)])
    write_csv(args.out / "forward_boundary.csv",
              [f"x_{i + 1}" for i in range(med.d - 1)] + _cplx_cols("trace") + _cplx_cols("flux"),
              [[*n[:-1], t.real, t.imag, q.real, q.imag] for n, t, q in zip(f.nodes, trace.values, flux.values)])
    summary = {"residual": u.residual, "condition": u.condition, "cells": pot.size}
    checks = {"solve_residual": u.residual <= cfg.get_float("run", "residual_tol", 1e-8)}
    if check == "born":
        amps = cfg.get_floats("run", "amplitudes", [1.0, 0.5, 0.25])
        rem = born_scaling(pot, med, f, amps)
        ratios = [a / b for a, b in zip(rem[:-1], rem[1:])]
        summary.update(born_remainders=rem, born_ratios=ratios)
        checks["born_scaling"] = all(abs(r / 4 - 1) <= 0.2 for r in ratios)
    elif check == "homogeneous":
        if not np.any(pot.q.imag > 0):
            raise PreconditionError("the homogeneous check needs Im q > 0 somewhere")
        ratio = homogeneous_ratio(pot, med, f)
        summary["homogeneous_ratio"] = ratio
        checks["homogeneous_trivial"] = ratio <= 1e-6
    elif check != "none":
        raise ConfigError(f"{cfg.source}: [run] check must be none, born or homogeneous")
    summary["checks"] = checks
    write_json(args.out / "forward_solve.json", summary)
    return checks


# ---------------------------------------------------------------------------
# maps
def _maps_setup(cfg):
    med = cfg.medium
    if med.d != 2:
        raise PreconditionError("boundary maps are implemented in 2D")
    basis = GaussianBasis(cfg.get_int("boundary", "nodes", 64), cfg.get_float("boundary", "spacing", 0.25))
    return med, cfg.build_potential(), basis, cfg.get_complex("run", "theta1", 0.0), \
        cfg.get_complex("run", "theta2", 1.0)


def _matrix_rows(M):
    n = M.shape[0]
    return [[i, j, M[i, j].real, M[i, j].imag] for i in range(n) for j in range(n)]


def cmd_maps_build(cfg, args, cache):
    med, pot, basis, t1, t2 = _maps_setup(cfg)
    which = cfg.get_str("run", "map", "rtr")
    if which == "rtr":
        op = maps.build_rtr(t1, t2, pot, med, basis=basis)
    elif which == "dtn":
        op = maps.build_dtn(pot, med, basis=basis, method=cfg.get_str("run", "method", "dirichlet"))
    elif which == "ntd":
        op = maps.build_ntd(pot, med, basis=basis)
    else:
        raise ConfigError(f"{cfg.source}: [run] map must be rtr, dtn or ntd")
    write_csv(args.out / f"maps_{which}.csv", ["row", "col", "re", "im"], _matrix_rows(op.entries))
    write_json(args.out / "maps_build.json", {"map": which, "nodes": basis.n, "spacing": basis.spacing,
                                              "theta_pair": op.theta_pair, "checks": {}})
    return {}


def cmd_maps_check(cfg, args, cache):
    med, pot, basis, t1, t2 = _maps_setup(cfg)
    tol = cfg.get_float("run", "tol", 1e-3)
    rep = maps.check_identities(pot, med, basis=basis, theta1=t1, theta2=t2, seed=args.seed)
    names = ["LN-I", "NL-I", "R(L+t1)-(L+t2)", "S(L+t1)-cI"]
    checks = {n: rep[n] <= tol for n in names}
    checks["c_equals_theta2_minus_theta1"] = bool(rep["c_theta2_minus_theta1"])
    write_json(args.out / "maps_check-identities.json", {"report": rep, "tol": tol, "checks": checks})
    return checks


def cmd_maps_reduce(cfg, args, cache):
    med, pot, basis, t1, t2 = _maps_setup(cfg)
    tol = cfg.get_float("run", "tol", 1e-3)
    R = maps.build_rtr(t1, t2, pot, med, basis=basis)
    L = maps.reduce_rtr_to_dtn(R, t1, t2)
    D = maps.build_dtn(pot, med, basis=basis)
    P = basis.band_projector()
    err = maps.band_norm(L.entries - D.entries, P)
    ident = maps.band_norm(R.entries @ (L.entries + t1 * np.eye(basis.n)) - (L.entries + t2 * np.eye(basis.n)), P)
    write_csv(args.out / "maps_reduced_dtn.csv", ["row", "col", "re", "im"], _matrix_rows(L.entries))
    checks = {"reduced_vs_direct": err <= tol, "rtr_identity": ident <= tol}
    write_json(args.out / "maps_reduce.json", {"reduced_vs_direct": err, "rtr_identity": ident,
                                               "lemma_sign": maps.LEMMA_SIGN, "tol": tol,
                                               "checks": checks})
    return checks


# ---------------------------------------------------------------------------
# cgo
def cgo_setup(cfg_or_dict):
    get = cfg_or_dict
    half = get("half_width", 1.1)
    h = get("h", 0.0025)
    cy = get("center_y", 1.5)
    n = int(round(2 * half / h))
    grid = cgo.ComplexPlaneGrid((-half, cy - half), 2 * half / n, (n, n))
    center = complex(0.0, cy)
    q1 = cgo.bump(grid, center, get("radius", 1.0), get("height", 1.0))
    return grid, center, q1, np.zeros_like(q1)


def _cgo_getter(cfg):
    return lambda key, default: cfg.get_float("run", key, default)


def cmd_cgo_build(cfg, args, cache):
    grid, center, q1, q2 = cgo_setup(_cgo_getter(cfg))
    conf = cgo.CGOConfig(cfg.get_float("run", "tau", 32.0), center)
    v1, v2 = cgo.build_cgo_pair(q1, q2, conf, grid)
    res = cgo.pde_residual(q1, v1, conf, grid, 1)
    growth = float(np.max(np.abs(v1.partial_sums)))
    ratios = v1.contraction_ratios
    checks = {"contraction": bool(np.all(ratios[1:] < 1)) if ratios.size > 1 else True,
              "pde_residual": res <= cfg.get_float("run", "tol", 1e-2),
              "growth_envelope": growth <= 2.0}
    write_csv(args.out / "cgo_terms.csv", ["j", "sup_norm"],
              [[j, float(np.max(np.abs(t)))] for j, t in enumerate(v1.terms)])
    write_json(args.out / "cgo_build.json",
               {"tau": conf.tau, "contraction_ratios": ratios, "pde_residual": res,
                "growth_constant": growth, "truncation_bound": v1.truncation_bound,
                "cells": grid.n, "h": grid.h, "checks": checks})
    return checks


def cmd_cgo_ortho(cfg, args, cache):
    grid, center, q1, q2 = cgo_setup(_cgo_getter(cfg))
    tau = cfg.get_float("run", "tau", 32.0)
    v1, v2 = cgo.build_cgo_pair(q1, q2, cgo.CGOConfig(tau, center), grid)
    p = cgo.orthogonality_probe(q1, q2, v1, v2, grid)
    lead = cgo.leading_term(q1, q2, tau, center, grid)
    write_json(args.out / "cgo_ortho.json", {"tau": tau, "probe": p, "leading": lead,
                                             "difference": abs(p - lead), "checks": {}})
    return {}


def cmd_cgo_scan(cfg, args, cache):
    grid, center, q1, q2 = cgo_setup(_cgo_getter(cfg))
    taus = cfg.get_floats("run", "taus", [8.0, 16.0, 32.0, 64.0])
    rep = cgo.stationary_phase_scan(q1, q2, cgo.CGOConfig(taus[0], center), taus, grid)
    write_csv(args.out / "cgo_scan.csv", ["tau"] + _cplx_cols("probe") + _cplx_cols("leading") + ["D"],
              [[t, p.real, p.imag, l.real, l.imag, d]
               for t, p, l, d in zip(rep.taus, rep.probes, rep.leading, rep.differences)])
    slack = cfg.get_float("run", "slope_slack", 0.2)
    checks = {"decay_slope": rep.slope < -1 + slack,
              "leading_halves": bool(np.all(np.abs(rep.leading_ratios / 0.5 - 1) <= 0.15))}
    write_json(args.out / "cgo_scan.json", {"slope": rep.slope, "leading_ratios": rep.leading_ratios,
                                            "differences": rep.differences, "checks": checks})
    return checks


COMMANDS = {
    ("green", "eval"): cmd_green_eval,
    ("green", "validate-images"): cmd_green_validate,
    ("green", "farfield"): cmd_green_farfield,
    ("probe", "radiation"): cmd_probe_radiation,
    ("probe", "boundary-delta"): cmd_probe_delta,
    ("forward", "solve"): cmd_forward_solve,
    ("maps", "build"): cmd_maps_build,
    ("maps", "check-identities"): cmd_maps_check,
    ("maps", "reduce"): cmd_maps_reduce,
    ("cgo", "build"): cmd_cgo_build,
    ("cgo", "ortho"): cmd_cgo_ortho,
    ("cgo", "scan"): cmd_cgo_scan,
}


def build_parser():
    p = argparse.ArgumentParser(prog="robinscatter", description=__doc__.split("\n\n")[0])
    groups = p.add_subparsers(dest="group", required=True)
    for group in sorted({g for g, _ in COMMANDS}):
        gp = groups.add_parser(group)
        sub = gp.add_subparsers(dest="command", required=True)
        for g, c in COMMANDS:
            if g != group:
                continue
            sp = sub.add_parser(c)
            sp.add_argument("--config", type=Path, help="INI file with [medium], [potential], [boundary], [run]")
            sp.add_argument("--out", type=Path, default=None, help="output directory")
            cache = sp.add_mutually_exclusive_group()
            cache.add_argument("--cache", type=Path, default=None, help="evaluation cache file")
            cache.add_argument("--no-cache", action="store_true")
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--dim", type=int, choices=(2, 3), default=None)
    return p


def run_command(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.dim)
        out = args.out or Path(cfg.output.get("dir", "out"))
        out.mkdir(parents=True, exist_ok=True)
        args.out = out
        cache = None
        if not args.no_cache:
            path = args.cache or cfg.output.get("cache")
            cache = EvaluationCache(path) if path else None
        checks = COMMANDS[(args.group, args.command)](cfg, args, cache)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    for name, ok in sorted(checks.items()):
        print(f"{'PASS' if ok else 'FAIL'} {args.group} {args.command}: {name}")
    return EXIT_OK if all(checks.values()) else EXIT_CHECK


def main():
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run_command())


if __name__ == "__main__":
    main()
