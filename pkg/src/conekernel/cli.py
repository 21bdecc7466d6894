"""Command-line front end: domain/schedule ingestion, subcommand dispatch,
and report emission (JSON + CSV + SVG).

Exit codes: 0 success, 1 verification failure (bound divergence, identity
violation, decay mismatch), 2 configuration error.  Reports are
byte-reproducible for identical configurations (seeds are always explicit
or defaulted and printed); every reported number carries its uncertainty.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import exponents as expmod
from . import oracles, spectral, svgplot, verify
from .errors import ConeKernelError, ConfigError, VerificationFailed
from .geometry import (
    FreeSpace,
    HalfSpace,
    PolyhedralCone,
    Polyhedron,
    Wedge,
    load_domain,
)
from .sde_mc import (
    CoefficientSchedule,
    estimate_green,
    heat_schedule,
    simulate_paths,
    survival_probability,
)
from .weights import WeightParams, weight

SCHEMA = "conekernel/1"
DEFAULT_SEED = 20240811


def _out_dir(args):
    out = args.out or os.environ.get("CONEKERNEL_OUT", "conekernel_out")
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path, payload):
    payload = {"schema": SCHEMA, **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def _load_domain(spec):
    try:
        return load_domain(spec)
    except FileNotFoundError:
        raise ConfigError(f"domain file {spec!r} does not exist") from None
    except (ValueError, KeyError, ConeKernelError) as exc:
        raise ConfigError(f"bad domain spec {spec!r}: {exc}") from None


def _load_schedule(spec):
    if spec is None or spec == "builtin:heat":
        return heat_schedule()
    if spec.startswith("builtin:heat(") and spec.endswith(")"):
        return heat_schedule(float(spec[len("builtin:heat("):-1]))
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            return CoefficientSchedule.from_dict(json.load(fh))
    except FileNotFoundError:
        raise ConfigError(f"schedule file {spec!r} does not exist") \
            from None
    except (ValueError, KeyError, ConeKernelError) as exc:
        raise ConfigError(f"bad schedule spec {spec!r}: {exc}") from None


def _load_lambda(spec, domain):
    """Weight parameters from inline JSON or @file."""
    try:
        if spec.startswith("@"):
            with open(spec[1:], "r", encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            data = json.loads(spec)
        if "lambda_o" in data:
            params = WeightParams.cone(data["lambda_o"], data["lambda_e"])
        else:
            params = WeightParams(vertex=data["vertex"],
                                  edge=data["edge"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad lambda spec: {exc}") from None
    if not params.matches(domain):
        raise ConfigError("lambda dimensions do not match the domain")
    return params


def _parse_vec(text, n=3, name="vector"):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise ConfigError(f"could not parse {name} {text!r}") from None
    if len(parts) != n:
        raise ConfigError(f"{name} needs {n} comma-separated components")
    return np.asarray(parts)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_exponents(args):
    domain = _load_domain(args.domain)
    if not isinstance(domain, (PolyhedralCone, Polyhedron)):
        raise ConfigError("exponents need a cone or polyhedron domain")
    report = expmod.exponent_report(domain, nu1=args.nu1, nu2=args.nu2,
                                    eigen_tol=args.tol)
    out = _out_dir(args)
    jpath = _write_json(os.path.join(out, "exponents.json"), {
        "heat": args.heat, **report.to_dict(),
        "vertex_usable": report.vertex_usable.tolist(),
        "edge_usable": report.edge_usable.tolist(),
    })
    rows = []
    for i, (ex, lo) in enumerate(zip(report.vertex_exact,
                                     report.vertex_lower)):
        rows.append(["vertex", i, ex, lo, report.eigenvalues[i],
                     report.eigen_errors[i]])
    for j, (ex, lo) in enumerate(zip(report.edge_exact,
                                     report.edge_lower)):
        rows.append(["edge", j, ex, lo, "", ""])
    cpath = _write_csv(os.path.join(out, "exponents.csv"),
                       ["feature", "index", "exact_heat", "lower_bound",
                        "eigenvalue", "eigen_error"], rows)
    print(f"exponents: {len(report.vertex_exact)} vertex, "
          f"{len(report.edge_exact)} edge values "
          f"(nu1={args.nu1}, nu2={args.nu2})")
    print(f"  vertex exact (heat): "
          f"{np.round(report.vertex_exact, 6).tolist()}")
    print(f"  edge exact (heat):   "
          f"{np.round(report.edge_exact, 6).tolist()}")
    print(f"  wrote {jpath}, {cpath}")
    return 0


def cmd_eigenvalue(args):
    domain = _load_domain(args.domain)
    if not isinstance(domain, PolyhedralCone):
        raise ConfigError("eigenvalue needs a cone domain")
    res = spectral.first_eigenvalue(domain, tol=args.tol)
    out = _out_dir(args)
    jpath = _write_json(os.path.join(out, "eigenvalue.json"), {
        "value": res.value, "error_indicator": res.error_indicator,
        "levels_used": res.levels_used, "n_nodes": res.n_nodes,
        "tol": args.tol,
    })
    print(f"first Dirichlet eigenvalue: {res.value:.6f} "
          f"(error indicator {res.error_indicator:.2e}, "
          f"{res.levels_used} levels, {res.n_nodes} nodes)")
    print(f"  wrote {jpath}")
    return 0


def cmd_weights(args):
    domain = _load_domain(args.domain)
    params = _load_lambda(args.lam, domain)
    n = args.grid
    if isinstance(domain, (PolyhedralCone, Wedge)):
        lo, hi = 0.0, args.extent
    elif isinstance(domain, Polyhedron):
        lo = float(np.min(domain.vertices))
        hi = float(np.max(domain.vertices))
    else:
        raise ConfigError("weights need a cone or polyhedron domain")
    zs = 0.35 * (hi - lo) + lo
    xs = np.linspace(lo, hi, n)
    ys = np.linspace(lo, hi, n)
    values = np.full((n, n), np.nan)
    rows = []
    for i, yv in enumerate(ys):
        pts = np.column_stack([xs, np.full(n, yv), np.full(n, zs)])
        mask = domain.contains(pts)
        if np.any(mask):
            vals = weight(domain, params, pts[mask], args.r)
            values[i, mask] = vals
        for j in range(n):
            rows.append([xs[j], yv, zs,
                         values[i, j] if np.isfinite(values[i, j])
                         else ""])
    out = _out_dir(args)
    cpath = _write_csv(os.path.join(out, "weights.csv"),
                       ["x", "y", "z", "weight"], rows)
    spath = os.path.join(out, "weights.svg")
    svgplot.heat_slice(spath, values, (lo, hi, lo, hi),
                       title=f"mixed weight at r={args.r} (slice z="
                             f"{zs:.3g})",
                       label="I(x, r)")
    finite = values[np.isfinite(values)]
    print(f"weight slice {n}x{n} at z={zs:.3g}: min {finite.min():.3g}, "
          f"max {finite.max():.3g} (must stay within [0, 1])")
    print(f"  wrote {cpath}, {spath}")
    return 0


def cmd_simulate(args):
    domain = _load_domain(args.domain)
    schedule = _load_schedule(args.schedule)
    start = _parse_vec(args.start, 4, "--from (s,y1,y2,y3)")
    s, y = float(start[0]), start[1:]
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    ens = simulate_paths(domain, schedule, s, y, args.to, args.dt,
                         args.paths, seed=seed, bridge=args.bridge,
                         n_workers=args.threads)
    p, se = survival_probability(ens)
    out = _out_dir(args)
    jpath = _write_json(os.path.join(out, "ensemble.json"),
                        ens.summary_dict())
    print(f"simulated {args.paths} paths (seed {seed}): survival "
          f"{p:.5f} +- {se:.5f}")
    print(f"  wrote {jpath}")
    return 0


class _EnsembleShim:
    """Just enough of a KilledEnsemble to window a stored summary."""

    def __init__(self, data):
        self.n_paths = int(data["n_paths"])
        self.domain = _load_domain_dict(data["domain"])
        self._survivors = np.asarray(data["surviving_terminals"],
                                     dtype=float).reshape(-1, 3)

    def survivors(self):
        return self._survivors


def _load_domain_dict(data):
    from .geometry import domain_from_dict
    return domain_from_dict(data)


def cmd_green(args):
    try:
        with open(args.ensemble, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(
            f"ensemble file {args.ensemble!r} does not exist") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad ensemble file: {exc}") from None
    for fld in ("n_paths", "domain", "surviving_terminals"):
        if fld not in data:
            raise ConfigError(f"ensemble file is missing field {fld!r}")
    ens = _EnsembleShim(data)
    x = _parse_vec(args.at, 3, "--at")
    est = estimate_green(ens, x, args.window)
    out = _out_dir(args)
    jpath = _write_json(os.path.join(out, "green.json"), {
        "at": x.tolist(), **est.to_dict()})
    print(f"G estimate at {x.tolist()}: {est.value:.6g} +- "
          f"{est.stderr:.2g} ({est.count} hits, window {args.window})")
    print(f"  wrote {jpath}")
    return 0


def cmd_oracle(args):
    t, s = args.t, args.s
    x = _parse_vec(args.x, 3, "--x")
    y = _parse_vec(args.y, 3, "--y")
    kind = args.kind
    try:
        if kind == "free":
            val = oracles.free_kernel(t, s, x, y, c=args.c)
        elif kind == "half_space":
            val = oracles.halfspace_kernel(t, s, x, y, c=args.c)
        elif kind == "orthant_wedge":
            val = oracles.orthant_wedge_kernel(args.m, t, s, x, y,
                                               c=args.c)
        elif kind == "general_wedge":
            val = oracles.general_wedge_kernel(args.kappa, t, s, x, y,
                                               tol=args.tol, c=args.c)
        elif kind == "box":
            lengths = _parse_vec(args.lengths, 3, "--lengths")
            val = oracles.box_kernel(lengths, t, s, x, y, tol=args.tol,
                                     c=args.c)
        else:
            raise ConfigError(f"unknown oracle kind {kind!r}")
    except ConeKernelError as exc:
        raise ConfigError(str(exc)) from None
    out = _out_dir(args)
    jpath = _write_json(os.path.join(out, "oracle.json"), {
        "kind": kind, "t": t, "s": s, "x": x.tolist(), "y": y.tolist(),
        "c": args.c, "value": val, "series_tol": args.tol})
    cpath = _write_csv(os.path.join(out, "oracle.csv"),
                       ["kind", "t", "s", "x1", "x2", "x3", "y1", "y2",
                        "y3", "value"],
                       [[kind, t, s, *x.tolist(), *y.tolist(), val]])
    print(f"{kind} kernel at t-s={t - s}: {val:.10g}")
    print(f"  wrote {jpath}, {cpath}")
    return 0


def cmd_verify(args):
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    mc = verify.MCParams(n_paths=args.paths, dt=args.dt, seed=seed,
                         bridge=not args.no_bridge,
                         n_workers=args.threads)
    if args.what == "bound":
        return _verify_bound(args, out, mc)
    if args.what == "decay":
        return _verify_decay(args, out, mc)
    if args.what == "identities":
        return _verify_identities(args, out, mc)
    if args.what == "longtime":
        return _verify_longtime(args, out, mc)
    raise ConfigError(f"unknown verify target {args.what!r}")


def _verify_bound(args, out, mc):
    domain = _load_domain(args.domain)
    schedule = _load_schedule(args.schedule)
    if args.lam is None:
        raise ConfigError("verify bound requires --lambda")
    params = _load_lambda(args.lam, domain)
    params_minus = _load_lambda(args.lam_minus, domain) \
        if args.lam_minus else params
    report = verify.check_upper_bound(domain, schedule, params,
                                      params_minus, mc=mc,
                                      levels=args.levels)
    jpath = _write_json(os.path.join(out, "bound_report.json"),
                        report.to_dict())
    for fam in sorted({r["family"] for r in report.ratios}):
        cells = [r for r in report.ratios if r["family"] == fam]
        svgplot.loglog_plot(
            os.path.join(out, f"bound_{fam.replace(' ', '_')}.svg"),
            [c["distance"] for c in cells],
            [max(c["ratio"], 1e-12) for c in cells],
            title=f"bound ratio toward {fam}",
            xlabel="distance to feature", ylabel="estimate / envelope",
            annotations=[f"growth {report.family_growth[fam]:.2f}"])
    print(f"bound check: sup ratio {report.sup_ratio:.4g}, fitted sigma "
          f"{report.sigma:.3g}")
    for fam, g in report.family_growth.items():
        print(f"  {fam}: growth over two refinements {g:.2f}")
    print(f"  wrote {jpath}")
    if report.divergent:
        print(f"FAIL: ratio divergence toward "
              f"{report.divergent_families}")
        return 1
    print("PASS: sup ratio stable under refinement")
    return 0


def _verify_decay(args, out, mc):
    domain = _load_domain(args.domain)
    schedule = _load_schedule(args.schedule)
    feature = args.feature
    if ":" in feature:
        name, idx = feature.split(":", 1)
        feature = (name, int(idx))
    fit = verify.fit_decay(domain, schedule, feature, mc=mc,
                           reference=args.reference, curvature=True)
    jpath = _write_json(os.path.join(out, "decay_report.json"),
                        fit.to_dict())
    svgplot.loglog_plot(
        os.path.join(out, "decay_fit.svg"),
        fit.distances.tolist(), fit.values.tolist(),
        yerrs=fit.stderrs.tolist(), fit_slope=fit.exponent,
        title=f"decay toward {fit.feature}",
        xlabel="distance to feature", ylabel="G window estimate",
        annotations=[f"exponent {fit.exponent:.3f} +- "
                     f"{fit.exponent_stderr:.3f}"])
    print(f"decay exponent toward {fit.feature}: {fit.exponent:.3f} +- "
          f"{fit.exponent_stderr:.3f}")
    print(f"  wrote {jpath}")
    if args.reference is not None and \
            abs(fit.exponent - args.reference) > args.tol_exponent:
        print(f"FAIL: |{fit.exponent:.3f} - {args.reference}| > "
              f"{args.tol_exponent}")
        return 1
    print("PASS")
    return 0


def _verify_identities(args, out, mc):
    results = {}
    failures = []
    err_free = verify.chapman_kolmogorov_error(
        "free", 1.0, 0.4, 0.0, [0.2, -0.1, 0.3], [0.0, 0.1, -0.2])
    err_hs = verify.chapman_kolmogorov_error(
        "half_space", 1.0, 0.4, 0.0, [0.2, -0.1, 0.8], [0.0, 0.1, 1.1])
    err_box = verify.chapman_kolmogorov_error(
        "box", 0.2, 0.08, 0.0, [0.4, 0.5, 0.6], [0.5, 0.5, 0.5],
        lengths=[1.0, 1.0, 1.0])
    results["chapman_kolmogorov"] = {"free": err_free,
                                     "half_space": err_hs,
                                     "box": err_box, "tolerance": 1e-6}
    if max(err_free, err_hs, err_box) > 1e-6:
        failures.append("chapman_kolmogorov")

    from .geometry import unit_cube
    from .sde_mc import make_schedule
    cube = unit_cube()
    two_piece = make_schedule([np.eye(3), 3 * np.eye(3)], [0.5])
    tr = verify.check_time_reversal(cube, two_piece, 0.0,
                                    [0.4, 0.5, 0.5], 1.0,
                                    [0.6, 0.5, 0.5], mc=mc)
    results["time_reversal"] = {
        "forward": tr.forward_value, "forward_stderr": tr.forward_stderr,
        "adjoint": tr.adjoint_value, "adjoint_stderr": tr.adjoint_stderr,
        "z_score": tr.z_score}
    if abs(tr.z_score) > 3:
        failures.append("time_reversal")

    dom = verify.check_gaussian_domination(
        cube, heat_schedule(), 0.0, [0.5, 0.5, 0.5], 0.1,
        [[0.5, 0.5, 0.5], [0.3, 0.5, 0.7], [0.7, 0.3, 0.5]], h=0.15,
        mc=mc)
    results["gaussian_domination"] = {
        "estimates": dom.estimates, "stderrs": dom.stderrs,
        "envelopes": dom.envelopes,
        "violations": len(dom.violations)}
    if dom.violations:
        failures.append("gaussian_domination")

    from .geometry import box as make_box
    chain = [make_box(1, 1, 1), make_box(2, 2, 2), make_box(4, 4, 4)]
    mono = verify.check_domain_monotonicity(
        chain, heat_schedule(), 0.0, [0.4, 0.5, 0.5], 0.3,
        [0.6, 0.5, 0.5], mc=mc)
    results["domain_monotonicity"] = {
        "estimates": mono.estimates, "stderrs": mono.stderrs,
        "violations": len(mono.violations)}
    if mono.violations:
        failures.append("domain_monotonicity")

    jpath = _write_json(os.path.join(out, "identities_report.json"),
                        {"results": results, "failures": failures})
    for name, payload in results.items():
        print(f"{name}: "
              + ("FAIL" if name in failures else "pass"))
    print(f"  wrote {jpath}")
    return 1 if failures else 0


def _verify_longtime(args, out, mc):
    lengths = _parse_vec(args.lengths, 3, "--lengths")
    oracle_res = verify.check_longtime_decay_oracle(lengths)
    results = {"oracle": {
        "fitted_rate": oracle_res.fitted_rate,
        "reference_rate": oracle_res.reference_rate,
        "rel_err": oracle_res.rel_err}}
    failed = oracle_res.rel_err > 0.02
    if args.mc_route:
        mc_res = verify.check_longtime_decay_mc(lengths, heat_schedule(),
                                                mc=mc)
        results["mc"] = {"fitted_rate": mc_res.fitted_rate,
                         "fitted_stderr": mc_res.fitted_stderr,
                         "reference_rate": mc_res.reference_rate,
                         "rel_err": mc_res.rel_err}
        failed = failed or mc_res.rel_err > 0.10
    jpath = _write_json(os.path.join(out, "longtime_report.json"),
                        results)
    print(f"long-time decay (oracle): rate "
          f"{oracle_res.fitted_rate:.4f} vs {oracle_res.reference_rate:.4f}"
          f" (rel err {oracle_res.rel_err:.2%})")
    if args.mc_route:
        print(f"long-time decay (mc): rate {mc_res.fitted_rate:.3f} +- "
              f"{mc_res.fitted_stderr:.3f} (rel err {mc_res.rel_err:.2%})")
    print(f"  wrote {jpath}")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="conekernel",
        description="Weighted Green's-function estimates on polyhedral "
                    "cones and polyhedrons: exponents, eigenvalues, "
                    "weights, killed-diffusion Monte Carlo, oracle "
                    "kernels, and verification reports.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=None,
                        help="output directory (default: $CONEKERNEL_OUT "
                             "or ./conekernel_out)")

    sp = sub.add_parser("exponents", help="critical exponents of a domain")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--nu1", type=float, default=1.0)
    sp.add_argument("--nu2", type=float, default=1.0)
    sp.add_argument("--heat", action="store_true",
                    help="annotate the report as heat-operator usage")
    sp.add_argument("--tol", type=float, default=1e-3)
    common(sp)
    sp.set_defaults(func=cmd_exponents)

    sp = sub.add_parser("eigenvalue",
                        help="first Dirichlet Laplace-Beltrami eigenvalue")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--tol", type=float, default=1e-3)
    common(sp)
    sp.set_defaults(func=cmd_eigenvalue)

    sp = sub.add_parser("weights", help="mixed weight on a grid slice")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--lambda", dest="lam", required=True,
                    help="inline JSON or @file with the weight exponents")
    sp.add_argument("--grid", type=int, default=60)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--extent", type=float, default=2.0)
    common(sp)
    sp.set_defaults(func=cmd_weights)

    sp = sub.add_parser("simulate", help="killed-diffusion ensemble")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--schedule", default=None)
    sp.add_argument("--from", dest="start", required=True,
                    help="s,y1,y2,y3")
    sp.add_argument("--to", type=float, required=True)
    sp.add_argument("--paths", type=int, default=10000)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--bridge", action="store_true")
    sp.add_argument("--threads", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("green",
                        help="window estimate from a stored ensemble")
    sp.add_argument("--ensemble", required=True)
    sp.add_argument("--at", required=True, help="x1,x2,x3")
    sp.add_argument("--window", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_green)

    sp = sub.add_parser("oracle", help="evaluate a reference kernel")
    sp.add_argument("--kind", required=True,
                    choices=["free", "half_space", "orthant_wedge",
                             "general_wedge", "box"])
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--s", type=float, default=0.0)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--kappa", type=float, default=math.pi / 2)
    sp.add_argument("--lengths", default="1,1,1")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-10)
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("verify",
                        help="bound / decay / identities / longtime")
    sp.add_argument("what",
                    choices=["bound", "decay", "identities", "longtime"])
    sp.add_argument("--domain", default="builtin:octant")
    sp.add_argument("--schedule", default=None)
    sp.add_argument("--lambda", dest="lam", default=None)
    sp.add_argument("--lambda-minus", dest="lam_minus", default=None)
    sp.add_argument("--feature", default="vertex",
                    help="vertex | edge:i | face:i")
    sp.add_argument("--reference", type=float, default=None)
    sp.add_argument("--tol-exponent", type=float, default=0.25)
    sp.add_argument("--levels", type=int, default=4)
    sp.add_argument("--lengths", default="1,1,1")
    sp.add_argument("--mc-route", action="store_true")
    sp.add_argument("--paths", type=int, default=30000)
    sp.add_argument("--dt", type=float, default=2e-3)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--no-bridge", action="store_true")
    sp.add_argument("--threads", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except ConeKernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
