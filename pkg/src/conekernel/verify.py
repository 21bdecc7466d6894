"""Verification harness: weighted-bound checks, decay-exponent fits, and
the structural kernel identities (semigroup composition, time reversal,
Gaussian domination, domain monotonicity, long-time decay).

Green's-function values near singular sets are estimated through the
time-reversal representation: paths are launched at the probe point x
(where clearances are small and counts would otherwise vanish) under the
reversed schedule, and the window sits at the far point y.  For the heat
operator this is the same caloric function of x; in general it estimates
exactly G(t, s, x, y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracles
from .errors import (
    HorizonTooShort,
    InadmissibleLambda,
    InsufficientPaths,
    QuadratureNotConverged,
    SignalBelowNoise,
)
from .geometry import PolyhedralCone, Polyhedron, Wedge, _normalize, box
from .sde_mc import (
    CoefficientSchedule,
    estimate_green,
    graded_grid,
    simulate_paths,
    survival_curve,
)
from .weights import gaussian_factor, weight


@dataclass(frozen=True)
class MCParams:
    """Monte Carlo budget shared by the verification operations."""
    n_paths: int = 200_000
    dt: float = 1e-3
    seed: int = 0
    bridge: bool = True
    n_workers: int = 1

    def reseeded(self, offset):
        return MCParams(n_paths=self.n_paths, dt=self.dt,
                        seed=self.seed + offset, bridge=self.bridge,
                        n_workers=self.n_workers)


def green_reversed(domain, schedule, s, y, t, x, h, mc, clearance=None):
    """Estimate G(t, s, x, y) from paths launched at x under the reversed
    schedule (window at y), with a clearance-graded time grid."""
    x = np.asarray(x, dtype=float)
    if clearance is None:
        clearance = float(min(domain.dist_boundary(x), 1.0))
    grid = graded_grid(-t, -s, clearance, dt_max=mc.dt * 15)
    ens = simulate_paths(domain, schedule.reversed(), -t, x, -s, mc.dt,
                         mc.n_paths, seed=mc.seed, bridge=mc.bridge,
                         n_workers=mc.n_workers, time_grid=grid)
    return estimate_green(ens, np.asarray(y, dtype=float), h)


# ---------------------------------------------------------------------------
# Approach geometry
# ---------------------------------------------------------------------------

def _approach_geometry(domain, feature):
    """Anchor point and inward unit direction for a singular feature.

    ``feature`` is "vertex", ("edge", i), or ("face", i) for cones and
    polyhedrons; a bare "edge" works for wedge domains.  Returns
    (anchor, direction, label).
    """
    if isinstance(feature, str):
        feature = (feature, 0)
    name, idx = feature
    if isinstance(domain, Wedge):
        if name != "edge":
            raise ValueError("wedges only have an edge feature")
        half = domain.kappa / 2.0
        u = domain.spec.to_world(np.array([math.cos(half), math.sin(half),
                                           0.0]))
        return np.zeros(3), u, "edge"
    if isinstance(domain, PolyhedralCone):
        if name == "vertex":
            return np.zeros(3), domain.polygon.interior_point(), "vertex"
        if name == "edge":
            spec = domain.wedge_spec(idx)
            half = spec.kappa / 2.0
            u = spec.to_world(np.array([math.cos(half), math.sin(half),
                                        0.0]))
            return domain.vertex_dirs[idx].copy(), u, f"edge {idx}"
        if name == "face":
            a = domain.vertex_dirs[idx]
            b = domain.vertex_dirs[(idx + 1) % domain.n_edges]
            anchor = _normalize(a + b)
            n = domain._face_normals[idx]
            u = n if domain.contains(anchor + 1e-3 * n) else -n
            return anchor, u, f"face {idx}"
    if isinstance(domain, Polyhedron):
        if name == "vertex":
            cone = domain.vertex_cones[idx]
            return (domain.vertices[idx].copy(),
                    cone.polygon.interior_point(), f"vertex {idx}")
        if name == "edge":
            a, b = domain.edges[idx]
            mid = 0.5 * (domain.vertices[a] + domain.vertices[b])
            e = _normalize(domain.vertices[b] - domain.vertices[a])
            # inward bisector: average of the two adjacent in-face tangents
            ts = []
            for f in domain.edge_face_pairs[idx]:
                cen = np.mean(domain.vertices[domain.faces[f]], axis=0)
                tv = cen - mid
                tv = tv - np.dot(tv, e) * e
                ts.append(_normalize(tv))
            u = _normalize(ts[0] + ts[1])
            if not domain.contains(mid + 1e-6 * u):
                u = -u
            return mid, u, f"edge {idx}"
        if name == "face":
            cen = np.mean(domain.vertices[domain.faces[idx]], axis=0)
            n = domain._face_normals[idx]
            u = n if domain.contains(cen + 1e-6 * n) else -n
            return cen, u, f"face {idx}"
    raise ValueError(f"unsupported feature {feature!r} for "
                     f"{type(domain).__name__}")


# ---------------------------------------------------------------------------
# Decay-exponent fits
# ---------------------------------------------------------------------------

@dataclass
class DecayFit:
    """Least-squares boundary-decay exponent along an approach sequence."""
    feature: str
    distances: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray
    used: np.ndarray
    exponent: float
    exponent_stderr: float
    reference: float | None = None

    @property
    def ci(self):
        return (self.exponent - 1.96 * self.exponent_stderr,
                self.exponent + 1.96 * self.exponent_stderr)

    def to_dict(self):
        return {"feature": self.feature,
                "distances": self.distances.tolist(),
                "values": self.values.tolist(),
                "stderrs": self.stderrs.tolist(),
                "used": self.used.tolist(),
                "exponent": self.exponent,
                "exponent_stderr": self.exponent_stderr,
                "ci": list(self.ci),
                "reference": self.reference}


def _weighted_slope(x, y, w):
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    return slope, math.sqrt(1.0 / sxx)


def _curvature_slope(d, logv, w):
    """WLS of log v = a + lambda log d + beta d^2.

    The d^2 nuisance term absorbs the subleading caloric correction
    (next cone mode / time-derivative ladder), which is O(d^2) relative.
    """
    x_mat = np.column_stack([np.ones_like(d), np.log(d), d ** 2])
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(sw[:, None] * x_mat, sw * logv, rcond=None)
    cov = np.linalg.inv(x_mat.T @ (w[:, None] * x_mat))
    return float(beta[1]), math.sqrt(cov[1, 1])


def fit_decay(domain, schedule, feature, t=0.5, s=0.0, distances=None,
              y=None, h=None, mc=MCParams(), reference=None,
              drop_rel_err=0.3, values=None, stderrs=None,
              curvature=False):
    """Fit the decay exponent of u(x) = G(t, s, x, y) toward a feature.

    Probe points march geometrically toward the feature along its inward
    direction; u is estimated at each by ``green_reversed``.  The two
    nearest points are dropped when their relative MC error exceeds
    ``drop_rel_err``.  The slope of log u against log distance is fitted
    by weighted least squares with binomial weights; with
    ``curvature=True`` a d^2 nuisance term absorbs the subleading caloric
    correction so shallower (cheaper) ladders stay unbiased.

    ``values``/``stderrs`` may be supplied to fit externally computed
    (e.g. oracle) data on the same ladder, bypassing the MC runs.
    """
    anchor, u_dir, label = _approach_geometry(domain, feature)
    if distances is None:
        distances = 0.5 * 0.72 ** np.arange(7)
    distances = np.asarray(distances, dtype=float)
    if np.any(np.diff(distances) >= 0):
        raise ValueError("distances must be strictly decreasing")
    if y is None:
        y = anchor + 0.9 * u_dir
    y = np.asarray(y, dtype=float)
    if h is None:
        h = 0.8 * float(np.linalg.norm(y - anchor))

    if values is None:
        vals, errs = [], []
        for k, d in enumerate(distances):
            xk = anchor + d * u_dir
            est = green_reversed(domain, schedule, s, y, t, xk, h,
                                 mc.reseeded(1000 * k), clearance=d)
            vals.append(est.value)
            errs.append(est.stderr)
        values = np.asarray(vals)
        stderrs = np.asarray(errs)
    else:
        values = np.asarray(values, dtype=float)
        stderrs = np.asarray(stderrs, dtype=float)

    used = values > 0
    rel = np.divide(stderrs, values, out=np.full_like(values, np.inf),
                    where=values > 0)
    # drop the two nearest points if too noisy
    for j in np.argsort(distances)[:2]:
        if rel[j] > drop_rel_err:
            used[j] = False
    if np.count_nonzero(used) < (4 if curvature else 3):
        raise SignalBelowNoise("fewer than 3 usable approach points")
    yv = np.log(values[used])
    w = 1.0 / np.maximum(rel[used], 1e-6) ** 2
    if curvature:
        slope, se = _curvature_slope(distances[used], yv, w)
    else:
        slope, se = _weighted_slope(np.log(distances[used]), yv, w)
    return DecayFit(feature=label, distances=distances, values=values,
                    stderrs=stderrs, used=used, exponent=float(slope),
                    exponent_stderr=float(se), reference=reference)


# ---------------------------------------------------------------------------
# Weighted upper-bound check
# ---------------------------------------------------------------------------

@dataclass
class BoundCell:
    family: str
    level: int
    x: np.ndarray
    distance: float
    value: float
    stderr: float


@dataclass
class BoundGrid:
    """Cached MC estimates on the dyadic approach grid (independent of
    the weight parameters)."""
    domain: object
    schedule: CoefficientSchedule
    s: float
    t: float
    y: np.ndarray
    h: float
    cells: list


def bound_grid_estimates(domain, schedule, t=0.25, s=0.0, y=None, h=None,
                         families=None, levels=4, base_distance=0.64,
                         mc=MCParams()):
    """Estimate G toward each singular family on dyadic distance levels.

    One reversed-start ensemble per grid point; estimates are reusable
    across different weight parameters.
    """
    if families is None:
        families = ["vertex"]
        if isinstance(domain, PolyhedralCone):
            families += [("edge", 0), ("face", 0)]
    if y is None:
        anchor, u_dir, _ = _approach_geometry(domain, families[0])
        y = anchor + 0.9 * u_dir
    y = np.asarray(y, dtype=float)
    if h is None:
        h = 0.6
    cells = []
    for fam in families:
        anchor, u_dir, label = _approach_geometry(domain, fam)
        for lev in range(levels):
            d = base_distance * 2.0 ** (-lev)
            xk = anchor + d * u_dir
            est = green_reversed(domain, schedule, s, y, t, xk, h,
                                 mc.reseeded(7919 * (len(cells) + 1)),
                                 clearance=d)
            cells.append(BoundCell(family=label, level=lev, x=xk,
                                   distance=d, value=est.value,
                                   stderr=est.stderr))
    return BoundGrid(domain=domain, schedule=schedule, s=s, t=t, y=y, h=h,
                     cells=cells)


def fit_sigma(grid):
    """Largest Gaussian decay rate consistent with the estimates.

    Least squares on the upper envelope of log(G * tau^{3/2}) against
    |x - y|^2 / tau, binned over that variable; conservative because the
    target inequality is an upper bound.
    """
    tau = grid.t - grid.s
    xi, logv = [], []
    for c in grid.cells:
        if c.value > 0:
            xi.append(float(np.sum((c.x - grid.y) ** 2)) / tau)
            logv.append(math.log(c.value * tau ** 1.5))
    if len(xi) < 2:
        return 1e-3
    xi = np.asarray(xi)
    logv = np.asarray(logv)
    edges = np.quantile(xi, np.linspace(0, 1, min(6, len(xi))))
    bx, by = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (xi >= lo) & (xi <= hi)
        if np.any(m):
            bx.append(xi[m].mean())
            by.append(logv[m].max())
    if len(bx) < 2:
        return 1e-3
    slope = np.polyfit(bx, by, 1)[0]
    return max(-float(slope), 1e-3)


@dataclass
class BoundReport:
    """Outcome of the weighted upper-bound check on one domain."""
    domain_kind: str
    lambda_plus: object
    lambda_minus: object
    sigma: float
    sup_ratio: float
    ratios: list
    family_growth: dict
    divergent_families: list
    divergent: bool
    admissible: bool | None
    mc_max_rel_err: float

    def to_dict(self):
        return {"domain_kind": self.domain_kind,
                "lambda_plus": self.lambda_plus.to_dict(),
                "lambda_minus": self.lambda_minus.to_dict(),
                "sigma": self.sigma,
                "sup_ratio": self.sup_ratio,
                "ratios": self.ratios,
                "family_growth": self.family_growth,
                "divergent_families": self.divergent_families,
                "divergent": self.divergent,
                "admissible": self.admissible,
                "mc_max_rel_err": self.mc_max_rel_err}


def check_upper_bound(domain, schedule, params_plus, params_minus,
                      grid=None, sigma=None, growth_threshold=1.5,
                      admissibility=None, require_admissible=False,
                      **grid_kwargs):
    """Check G <= N * I(x) * I(y) * gaussian_factor on a dyadic grid.

    Ratios of the MC estimates to the claimed envelope are tracked level
    by level toward each singular family; the report flags divergence
    when the running sup grows by ``growth_threshold`` or more over the
    last two dyadic refinements.  ``grid`` may carry cached estimates so
    several parameter choices can be evaluated from one MC run.
    """
    if require_admissible and admissibility is not None and \
            not admissibility.admissible:
        raise InadmissibleLambda("weight parameters outside the "
                                 "admissible ranges")
    if grid is None:
        grid = bound_grid_estimates(domain, schedule, **grid_kwargs)
    if sigma is None:
        sigma = fit_sigma(grid)
    tau = grid.t - grid.s
    r = math.sqrt(tau)
    iy = float(weight(domain, params_minus, grid.y, r))
    ratios = []
    max_rel = 0.0
    for c in grid.cells:
        ix = float(weight(domain, params_plus, c.x, r))
        envelope = ix * iy * float(gaussian_factor(tau, c.x - grid.y,
                                                   sigma))
        if c.value > 0:
            max_rel = max(max_rel, c.stderr / c.value)
        ratios.append({"family": c.family, "level": c.level,
                       "distance": c.distance, "estimate": c.value,
                       "stderr": c.stderr, "weight_x": ix,
                       "envelope": envelope,
                       "ratio": c.value / envelope if envelope > 0
                       else math.inf})
    families = sorted({r_["family"] for r_ in ratios})
    growth = {}
    divergent_families = []
    sup_ratio = 0.0
    for fam in families:
        fam_cells = sorted([r_ for r_ in ratios if r_["family"] == fam],
                           key=lambda r_: r_["level"])
        running = []
        best = 0.0
        for r_ in fam_cells:
            best = max(best, r_["ratio"])
            running.append(best)
        sup_ratio = max(sup_ratio, best)
        if len(running) >= 3 and running[-3] > 0:
            g = running[-1] / running[-3]
        else:
            g = math.inf
        growth[fam] = g
        if g >= growth_threshold:
            divergent_families.append(fam)
    if max_rel > 0.5:
        raise InsufficientPaths(
            f"max relative MC error {max_rel:.2f} dominates the signal")
    return BoundReport(
        domain_kind=getattr(domain, "kind", "domain"),
        lambda_plus=params_plus, lambda_minus=params_minus,
        sigma=float(sigma), sup_ratio=float(sup_ratio), ratios=ratios,
        family_growth=growth, divergent_families=divergent_families,
        divergent=bool(divergent_families),
        admissible=None if admissibility is None
        else admissibility.admissible,
        mc_max_rel_err=float(max_rel))


# ---------------------------------------------------------------------------
# Structural identities
# ---------------------------------------------------------------------------

def _gauss_legendre(lo, hi, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def chapman_kolmogorov_error(kind, t, r, s, x, y, c=1.0, lengths=None,
                             n_nodes=240):
    """Relative error of the semigroup composition through time r.

    ``kind`` is "free", "half_space", or "box" (with ``lengths``); these
    kernels factor per coordinate, so the composition is a product of 1d
    Gauss-Legendre quadratures over each coordinate's effective support.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tau_u = c * (t - r)
    tau_l = c * (r - s)
    tau_f = c * (t - s)
    if tau_u <= 0 or tau_l <= 0:
        raise ValueError("need s < r < t")
    spread = 8.0 * math.sqrt(2.0 * max(tau_u, tau_l))
    composed, direct = 1.0, 1.0
    for i in range(3):
        if kind == "free" or (kind == "half_space" and i < 2):
            lo = min(x[i], y[i]) - spread
            hi = max(x[i], y[i]) + spread
            upper = lambda z, i=i: oracles.gauss1d(2 * tau_u, x[i] - z)
            lower = lambda z, i=i: oracles.gauss1d(2 * tau_l, z - y[i])
            dire = float(oracles.gauss1d(2 * tau_f, x[i] - y[i]))
        elif kind == "half_space":
            lo = 0.0
            hi = max(x[i], y[i]) + spread
            upper = lambda z, i=i: oracles.halfline_kernel_1d(
                tau_u, x[i], z)
            lower = lambda z, i=i: oracles.halfline_kernel_1d(
                tau_l, z, y[i])
            dire = float(oracles.halfline_kernel_1d(tau_f, x[i], y[i]))
        elif kind == "box":
            length = lengths[i]
            lo, hi = 0.0, length
            upper = lambda z, i=i, L=length: oracles.interval_kernel_1d(
                L, tau_u, x[i], z)
            lower = lambda z, i=i, L=length: oracles.interval_kernel_1d(
                L, tau_l, z, y[i])
            dire = float(oracles.interval_kernel_1d(length, tau_f,
                                                    x[i], y[i]))
        else:
            raise ValueError(f"unknown kernel kind {kind!r}")
        z, w = _gauss_legendre(lo, hi, n_nodes)
        composed *= float(np.sum(w * upper(z) * lower(z)))
        direct *= dire
    if direct == 0:
        raise QuadratureNotConverged("direct kernel vanished")
    return abs(composed - direct) / abs(direct)


@dataclass
class CompositionMC:
    composed: float
    composed_stderr: float
    direct: float
    direct_stderr: float

    @property
    def z_score(self):
        return (self.composed - self.direct) / math.hypot(
            self.composed_stderr, self.direct_stderr)


def chapman_kolmogorov_mc(domain, schedule, t, r, s, x, y, h=0.25,
                          bins=6, mc=MCParams()):
    """MC-vs-MC semigroup composition on a box-like polyhedron.

    Uses the heat-operator symmetry G(t, r, x, z) = G(t, r, z, x): one
    ensemble from x over [r, t] and one from y over [s, r], composed on a
    histogram partition; compared against a direct window estimate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo = np.min(domain.vertices, axis=0)
    hi = np.max(domain.vertices, axis=0)
    edges = [np.linspace(lo[i], hi[i], bins + 1) for i in range(3)]
    vol_cell = float(np.prod((hi - lo) / bins))

    ens_b = simulate_paths(domain, schedule, r, x, t, mc.dt, mc.n_paths,
                           seed=mc.seed + 1, bridge=mc.bridge,
                           n_workers=mc.n_workers)
    ens_a = simulate_paths(domain, schedule, s, y, r, mc.dt, mc.n_paths,
                           seed=mc.seed + 2, bridge=mc.bridge,
                           n_workers=mc.n_workers)

    def density(ens):
        pts = ens.survivors()
        hist, _ = np.histogramdd(pts, bins=edges)
        dens = hist / (ens.n_paths * vol_cell)
        err = np.sqrt(np.maximum(hist, 1.0)) / (ens.n_paths * vol_cell)
        return dens, err

    db, eb = density(ens_b)
    da, ea = density(ens_a)
    composed = float(np.sum(db * da) * vol_cell)
    comp_var = float(np.sum((db * ea) ** 2 + (da * eb) ** 2)
                     * vol_cell ** 2)

    ens_d = simulate_paths(domain, schedule, s, y, t, mc.dt, mc.n_paths,
                           seed=mc.seed + 3, bridge=mc.bridge,
                           n_workers=mc.n_workers)
    direct = estimate_green(ens_d, x, h)
    return CompositionMC(composed=composed,
                         composed_stderr=math.sqrt(comp_var),
                         direct=direct.value,
                         direct_stderr=direct.stderr)


@dataclass
class TimeReversalResult:
    forward_value: float
    forward_stderr: float
    adjoint_value: float
    adjoint_stderr: float

    @property
    def z_score(self):
        return (self.forward_value - self.adjoint_value) / math.hypot(
            self.forward_stderr, self.adjoint_stderr)


def check_time_reversal(domain, schedule, s, y, t, x, h=0.3,
                        mc=MCParams(), adjoint_schedule=None):
    """Compare the forward estimate of G(t,s,x,y) with the adjoint run.

    The adjoint process starts at x at time -t under the reversed
    schedule and is windowed at y at time -s.  ``adjoint_schedule``
    overrides the reversal (a deliberately un-reversed schedule makes a
    negative control).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fwd_ens = simulate_paths(domain, schedule, s, y, t, mc.dt, mc.n_paths,
                             seed=mc.seed + 11, bridge=mc.bridge,
                             n_workers=mc.n_workers)
    fwd = estimate_green(fwd_ens, x, h)
    adj_sched = schedule.reversed() if adjoint_schedule is None \
        else adjoint_schedule
    adj_ens = simulate_paths(domain, adj_sched, -t, x, -s, mc.dt,
                             mc.n_paths, seed=mc.seed + 12,
                             bridge=mc.bridge, n_workers=mc.n_workers)
    adj = estimate_green(adj_ens, y, h)
    return TimeReversalResult(forward_value=fwd.value,
                              forward_stderr=fwd.stderr,
                              adjoint_value=adj.value,
                              adjoint_stderr=adj.stderr)


@dataclass
class MonotonicityResult:
    estimates: list
    stderrs: list
    violations: list


def check_domain_monotonicity(domains, schedule, s, y, t, x, h=0.3,
                              mc=MCParams()):
    """G must be non-decreasing along an increasing chain of domains."""
    x = np.asarray(x, dtype=float)
    values, errs = [], []
    for k, dom in enumerate(domains):
        ens = simulate_paths(dom, schedule, s, y, t, mc.dt, mc.n_paths,
                             seed=mc.seed + 31 * (k + 1), bridge=mc.bridge,
                             n_workers=mc.n_workers)
        est = estimate_green(ens, x, h)
        values.append(est.value)
        errs.append(est.stderr)
    violations = []
    for k in range(len(values) - 1):
        gap = values[k] - values[k + 1]
        tol = 3.0 * math.hypot(errs[k], errs[k + 1])
        if gap > tol:
            violations.append((k, gap, tol))
    return MonotonicityResult(estimates=values, stderrs=errs,
                              violations=violations)


@dataclass
class DominationResult:
    points: list
    estimates: list
    stderrs: list
    envelopes: list
    violations: list


def check_gaussian_domination(domain, schedule, s, y, t, xs, h=0.3,
                              mc=MCParams()):
    """Estimates must stay below the free-space Gaussian envelopes.

    Two true upper bounds are enforced (up to 3 standard errors): the
    exact free kernel of the schedule by domain monotonicity against R^3,
    and the closed-form envelope
    (4 pi nu1 tau)^{-3/2} exp(-|x-y|^2 / (4 nu2 tau)) that dominates it.
    """
    y = np.asarray(y, dtype=float)
    ens = simulate_paths(domain, schedule, s, y, t, mc.dt, mc.n_paths,
                         seed=mc.seed + 77, bridge=mc.bridge,
                         n_workers=mc.n_workers)
    tau = t - s
    points, values, errs, envs, violations = [], [], [], [], []
    for x in xs:
        x = np.asarray(x, dtype=float)
        est = estimate_green(ens, x, h)
        free = oracles.gaussian_kernel(schedule, t, s, x, y)
        closed = (4.0 * math.pi * schedule.nu1 * tau) ** -1.5 * math.exp(
            -float(np.sum((x - y) ** 2)) / (4.0 * schedule.nu2 * tau))
        env = min(free, closed)
        points.append(x.tolist())
        values.append(est.value)
        errs.append(est.stderr)
        envs.append(env)
        if est.value > env + 3.0 * est.stderr:
            violations.append((x.tolist(), est.value, env))
    return DominationResult(points=points, estimates=values, stderrs=errs,
                            envelopes=envs, violations=violations)


# ---------------------------------------------------------------------------
# Long-time decay
# ---------------------------------------------------------------------------

@dataclass
class LongtimeDecayResult:
    route: str
    fitted_rate: float
    fitted_stderr: float
    reference_rate: float

    @property
    def rel_err(self):
        return abs(self.fitted_rate - self.reference_rate) \
            / self.reference_rate


def check_longtime_decay_oracle(lengths, c=1.0, window=(0.5, 1.0),
                                n_times=8):
    """Fitted decay rate of the box kernel at its center vs nu1*lambda."""
    lengths = np.asarray(lengths, dtype=float)
    center = lengths / 2.0
    ts = np.linspace(window[0], window[1], n_times)
    vals = [oracles.box_kernel(lengths, t, 0.0, center, center, c=c)
            for t in ts]
    slope = np.polyfit(ts, np.log(vals), 1)[0]
    ref = c * oracles.cube_eigen_decay(lengths)
    return LongtimeDecayResult(route="oracle", fitted_rate=-float(slope),
                               fitted_stderr=0.0, reference_rate=ref)


def check_longtime_decay_mc(lengths, schedule, t_max=0.4,
                            fit_start=0.15, min_alive=60, mc=MCParams()):
    """Fitted decay rate of the MC survival curve vs nu1 * lambda.

    One long-horizon ensemble from the box center; the fit window starts
    at ``fit_start`` (transients decayed) and ends where fewer than
    ``min_alive`` paths remain.
    """
    lengths = np.asarray(lengths, dtype=float)
    domain = box(*lengths)
    center = lengths / 2.0
    ens = simulate_paths(domain, schedule, 0.0, center, t_max, mc.dt,
                         mc.n_paths, seed=mc.seed + 5, bridge=mc.bridge,
                         n_workers=mc.n_workers)
    ts = np.linspace(fit_start, t_max, 40)
    p, se = survival_curve(ens, ts)
    alive = p * ens.n_paths
    usable = (alive >= min_alive) & (p > 0)
    if np.count_nonzero(usable) < 5:
        raise HorizonTooShort(
            f"only {np.count_nonzero(usable)} usable times with >= "
            f"{min_alive} alive paths")
    x = ts[usable]
    yv = np.log(p[usable])
    w = (p[usable] / se[usable]) ** 2
    slope, slope_se = _weighted_slope(x, yv, w)
    ref = schedule.nu1 * oracles.cube_eigen_decay(lengths)
    return LongtimeDecayResult(route="mc", fitted_rate=-float(slope),
                               fitted_stderr=float(slope_se),
                               reference_rate=ref)
