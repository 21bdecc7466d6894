"""Killed-diffusion Monte Carlo estimation of parabolic Green's functions.

Paths follow ``xi_{k+1} = xi_k + sigma(t_k) sqrt(dt) Z_k`` with
``sigma sigma^T = 2 a(t)`` and piecewise-constant-in-time symmetric
coefficient matrices a(t), so increments are exact within each piece
(steps are aligned to the schedule breakpoints).  A path is killed when a
step endpoint leaves the domain, when the step segment crosses the
boundary (nonconvex domains), or, optionally, by the half-space
Brownian-bridge crossing probability against the nearest face.

Randomness is drawn from counter-based Philox streams keyed by
``(seed, path index)``: ensembles are bit-identical for identical inputs,
regardless of batching or thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import (
    EmptyWindowVolume,
    NonSymmetric,
    NotPositiveDefinite,
    StartOnBoundary,
    StepTooLarge,
)

_SYM_TOL = 1e-12
_SQRT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Coefficient schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientSchedule:
    """Piecewise-constant symmetric coefficient matrices a(t).

    Piece j applies on [breakpoints[j-1], breakpoints[j]) with implicit
    -inf and +inf at the ends; ``matrices`` has one entry more than
    ``breakpoints``.  ``sigmas`` are the symmetric square roots of 2 a.
    """
    breakpoints: np.ndarray
    matrices: np.ndarray          # (k+1, 3, 3)
    nu1: float = field(init=False)
    nu2: float = field(init=False)
    sigmas: np.ndarray = field(init=False)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        mats = np.asarray(self.matrices, dtype=float)
        if mats.ndim == 2:
            mats = mats[None, :, :]
        if mats.shape[0] != bp.size + 1 or mats.shape[1:] != (3, 3):
            raise ValueError("need len(breakpoints) + 1 matrices of "
                             "shape (3, 3)")
        if bp.size and np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        eigs = []
        sigmas = np.empty_like(mats)
        for k, a in enumerate(mats):
            if np.max(np.abs(a - a.T)) > _SYM_TOL:
                raise NonSymmetric(f"piece {k} is not symmetric")
            w, v = np.linalg.eigh(a)
            if w.min() <= 0:
                raise NotPositiveDefinite(
                    f"piece {k} has eigenvalue {w.min():.3e}")
            eigs.append(w)
            sigmas[k] = (v * np.sqrt(2.0 * w)) @ v.T
            assert np.max(np.abs(sigmas[k] @ sigmas[k].T - 2 * a)) \
                < _SQRT_TOL
        eigs = np.concatenate(eigs)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "sigmas", sigmas)
        object.__setattr__(self, "nu1", float(eigs.min()))
        object.__setattr__(self, "nu2", float(eigs.max()))

    @property
    def is_constant(self):
        return self.matrices.shape[0] == 1

    def piece_index(self, t):
        return int(np.searchsorted(self.breakpoints, t, side="right"))

    def a_at(self, t):
        return self.matrices[self.piece_index(t)]

    def sigma_at(self, t):
        return self.sigmas[self.piece_index(t)]

    def integrate(self, s, t):
        """Matrix integral of a(u) over [s, t]."""
        if t < s:
            raise ValueError("need t >= s")
        cuts = np.concatenate([[s], self.breakpoints[
            (self.breakpoints > s) & (self.breakpoints < t)], [t]])
        total = np.zeros((3, 3))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            total += (hi - lo) * self.a_at(0.5 * (lo + hi))
        return total

    def reversed(self):
        """Schedule of the time-reversed operator: a~(u) = a(-u)."""
        return CoefficientSchedule(-self.breakpoints[::-1],
                                   self.matrices[::-1])

    def to_dict(self):
        return {"breakpoints": self.breakpoints.tolist(),
                "matrices": self.matrices.tolist()}

    @classmethod
    def from_dict(cls, data):
        if "constant" in data:
            return cls(np.array([]), np.asarray(data["constant"],
                                                dtype=float))
        return cls(np.asarray(data.get("breakpoints", []), dtype=float),
                   np.asarray(data["matrices"], dtype=float))


def make_schedule(pieces, breakpoints=()):
    """Build a CoefficientSchedule from matrices and interior breakpoints.

    ``make_schedule(np.eye(3))`` is the constant heat schedule;
    ``make_schedule([a0, a1], [0.5])`` applies a0 before time 0.5 and a1
    after.  Raises NonSymmetric / NotPositiveDefinite on bad pieces.
    """
    pieces = np.asarray(pieces, dtype=float)
    if pieces.ndim == 2:
        pieces = pieces[None, :, :]
    return CoefficientSchedule(np.asarray(breakpoints, dtype=float), pieces)


def heat_schedule(c=1.0):
    """Constant isotropic schedule a = c * I."""
    return make_schedule(c * np.eye(3))


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------

@dataclass
class KilledEnsemble:
    """Raw material of the Green's-function estimator.

    ``kill_time`` is +inf for surviving paths; for killed paths it is the
    right endpoint of the step in which the exit was detected, so it lies
    in (s, t].  ``terminal`` holds the position at time t for survivors
    and the exit-step position for killed paths.
    """
    n_paths: int
    survived: np.ndarray
    terminal: np.ndarray
    kill_time: np.ndarray
    s: float
    t: float
    y: np.ndarray
    dt: float
    seed: int
    bridge: bool
    domain: object = field(repr=False)
    schedule: CoefficientSchedule = field(repr=False)

    def survivors(self):
        return self.terminal[self.survived]

    def summary_dict(self):
        p, se = survival_probability(self)
        return {
            "n_paths": self.n_paths,
            "s": self.s, "t": self.t, "y": np.asarray(self.y).tolist(),
            "dt": self.dt, "seed": self.seed, "bridge": self.bridge,
            "survival": p, "survival_stderr": se,
            "domain": self.domain.to_dict(),
            "schedule": self.schedule.to_dict(),
            "surviving_terminals": self.survivors().tolist(),
        }


def _time_grid(schedule, s, t, dt):
    edges = np.arange(s, t, dt)
    inner = schedule.breakpoints[(schedule.breakpoints > s)
                                 & (schedule.breakpoints < t)]
    grid = np.unique(np.concatenate([edges, inner, [t]]))
    return grid


def graded_grid(s, t, clearance, growth=0.04, fine_factor=25.0,
                dt_max=None):
    """Time grid with steps growing linearly in elapsed time.

    Starts at ``clearance^2 / fine_factor`` (resolving the killing of
    paths launched at distance ``clearance`` from the boundary) and grows
    by a factor (1 + growth) per step: surviving paths drift away from
    the walls, so the required resolution relaxes proportionally.
    """
    if t <= s:
        raise ValueError("need t > s")
    dt0 = clearance ** 2 / fine_factor
    dt_max = (t - s) / 20.0 if dt_max is None else dt_max
    out = [s]
    step = min(dt0, dt_max)
    while out[-1] < t:
        out.append(min(out[-1] + step, t))
        step = min(step * (1.0 + growth), dt_max)
    return np.asarray(out)


def _path_block_normals(seed, lo, hi, n_steps, want_uniforms):
    """Draws from the per-path stream Philox(key=(seed << 64) | path).

    One Philox instance is re-keyed in place per path (bit-identical to
    fresh construction, without its per-path entropy-pull overhead).
    """
    normals = np.empty((hi - lo, n_steps, 3))
    uniforms = np.empty((hi - lo, n_steps)) if want_uniforms else None
    bitgen = np.random.Philox(key=0)
    gen = np.random.Generator(bitgen)
    state = bitgen.state
    state["state"]["key"][1] = seed & 0xFFFFFFFFFFFFFFFF
    for i in range(lo, hi):
        state["state"]["key"][0] = i & 0xFFFFFFFFFFFFFFFF
        state["state"]["counter"][:] = 0
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        bitgen.state = state
        normals[i - lo] = gen.standard_normal((n_steps, 3))
        if want_uniforms:
            uniforms[i - lo] = gen.random(n_steps)
    return normals, uniforms


def _simulate_block(domain, schedule, grid, y, seed, lo, hi, bridge):
    n_steps = grid.size - 1
    deltas = np.diff(grid)
    normals, uniforms = _path_block_normals(seed, lo, hi, n_steps, bridge)
    b = hi - lo
    # exact per-piece increments: sigma is constant between grid points
    increments = normals
    increments *= np.sqrt(deltas)[None, :, None]
    piece = np.searchsorted(schedule.breakpoints, grid[:-1], side="right")
    for p in np.unique(piece):
        cols = piece == p
        sig = schedule.sigmas[p]
        if np.count_nonzero(sig - np.diag(np.diagonal(sig))) == 0:
            increments[:, cols, :] *= np.diagonal(sig)
        else:
            increments[:, cols, :] = increments[:, cols, :] @ sig.T
    traj = np.empty((b, n_steps + 1, 3))
    traj[:, 0, :] = y
    np.cumsum(increments, axis=1, out=increments)
    traj[:, 1:, :] = y + increments

    flat = traj.reshape(-1, 3)
    inside = domain.contains(flat).reshape(b, n_steps + 1)
    outside_any = ~inside
    outside_any[:, 0] = False
    first_out = np.where(outside_any.any(axis=1),
                         outside_any.argmax(axis=1), n_steps + 1)

    kill_step = first_out    # step index k means killed during (k-1, k]
    if not domain.is_convex:
        seg_kill = np.full(b, n_steps + 1)
        for k in range(n_steps):
            live = (kill_step > k + 1) & inside[:, k] & inside[:, k + 1]
            if not np.any(live):
                continue
            crosses = domain.segment_crosses(traj[live, k, :],
                                             traj[live, k + 1, :])
            idx = np.flatnonzero(live)[crosses]
            seg_kill[idx] = np.minimum(seg_kill[idx], k + 1)
        kill_step = np.minimum(kill_step, seg_kill)

    if bridge:
        kill_step = _bridge_kills(domain, schedule, grid, traj, inside,
                                  kill_step, uniforms)

    killed = kill_step <= n_steps
    survived = ~killed
    terminal = traj[:, -1, :].copy()
    exit_idx = np.minimum(kill_step, n_steps)
    terminal[killed] = traj[killed, exit_idx[killed], :]
    kill_time = np.full(b, np.inf)
    kill_time[killed] = grid[exit_idx[killed]]
    return survived, terminal, kill_time


def _bridge_kills(domain, schedule, grid, traj, inside, kill_step, uniforms):
    """Half-space bridge crossing against the nearest face per step."""
    b, n_nodes, _ = traj.shape
    n_steps = n_nodes - 1
    flat = traj.reshape(-1, 3)
    face_idx, face_dist, face_normal, foot_ok = domain.nearest_face(flat)
    face_idx = face_idx.reshape(b, n_nodes)
    face_dist = face_dist.reshape(b, n_nodes)
    foot_ok = foot_ok.reshape(b, n_nodes)
    face_normal = face_normal.reshape(b, n_nodes, 3)

    usable = (inside[:, :-1] & inside[:, 1:]
              & foot_ok[:, :-1] & foot_ok[:, 1:]
              & (face_idx[:, :-1] == face_idx[:, 1:]))
    n_vec = face_normal[:, :-1, :]
    piece = np.searchsorted(schedule.breakpoints, grid[:-1], side="right")
    rate = np.empty((b, n_steps))
    for p in np.unique(piece):
        cols = piece == p
        a_mat = schedule.matrices[p]
        iso = a_mat[0, 0]
        if np.count_nonzero(a_mat - iso * np.eye(3)) == 0:
            rate[:, cols] = iso      # face normals are unit vectors
        else:
            rate[:, cols] = np.einsum("bkj,jl,bkl->bk", n_vec[:, cols, :],
                                      a_mat, n_vec[:, cols, :])
    log_p = -face_dist[:, :-1] * face_dist[:, 1:] / (rate
                                                     * np.diff(grid))
    hit = usable & (np.log(np.maximum(uniforms, 1e-300)) < log_p)
    any_hit = hit.any(axis=1)
    first_hit = np.where(any_hit, hit.argmax(axis=1) + 1, n_steps + 1)
    # hits after an earlier kill are irrelevant; min() keeps the earliest
    return np.minimum(kill_step, first_hit)


def simulate_paths(domain, schedule, s, y, t, dt, n_paths, seed=0,
                   bridge=False, n_workers=1, time_grid=None):
    """Simulate killed diffusion paths from (s, y) to time t.

    Parameters
    ----------
    domain : geometry domain
        Provides containment, nearest-face, and segment-crossing queries.
    schedule : CoefficientSchedule
        Piecewise-constant coefficients; steps align to its breakpoints.
    dt : float
        Maximum step; must not exceed t - s.
    bridge : bool
        Apply the half-space Brownian-bridge kill correction against the
        nearest face when both step endpoints are inside and their nearest
        boundary feature is the same face interior.
    n_workers : int
        Thread pool size for path blocks; results are identical for any
        value.
    time_grid : array, optional
        Explicit step times from s to t (e.g. from ``graded_grid``);
        overrides ``dt``.  Schedule breakpoints are merged in either way.

    Returns
    -------
    KilledEnsemble
    """
    y = np.asarray(y, dtype=float).reshape(3)
    if t < s:
        raise ValueError("need t >= s")
    if not domain.contains(y):
        raise StartOnBoundary(f"start point {y} is not strictly inside")
    if t == s:
        return KilledEnsemble(
            n_paths=n_paths, survived=np.ones(n_paths, dtype=bool),
            terminal=np.tile(y, (n_paths, 1)),
            kill_time=np.full(n_paths, np.inf), s=s, t=t, y=y, dt=dt,
            seed=seed, bridge=bridge, domain=domain, schedule=schedule)
    if dt <= 0 or dt > t - s:
        raise StepTooLarge(f"dt = {dt} outside (0, t - s = {t - s}]")

    if time_grid is not None:
        time_grid = np.asarray(time_grid, dtype=float)
        if time_grid[0] != s or time_grid[-1] != t or \
                np.any(np.diff(time_grid) <= 0):
            raise ValueError("time_grid must increase from s to t")
        inner = schedule.breakpoints[(schedule.breakpoints > s)
                                     & (schedule.breakpoints < t)]
        grid = np.unique(np.concatenate([time_grid, inner]))
    else:
        grid = _time_grid(schedule, s, t, dt)
    n_steps = grid.size - 1
    block = max(64, min(8192, int(3_000_000 // max(n_steps, 1))))
    bounds = [(lo, min(lo + block, n_paths))
              for lo in range(0, n_paths, block)]

    def run(b):
        return _simulate_block(domain, schedule, grid, y, seed, b[0], b[1],
                               bridge)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, bounds))
    else:
        results = [run(b) for b in bounds]

    survived = np.concatenate([r[0] for r in results])
    terminal = np.vstack([r[1] for r in results])
    kill_time = np.concatenate([r[2] for r in results])
    return KilledEnsemble(n_paths=n_paths, survived=survived,
                          terminal=terminal, kill_time=kill_time,
                          s=float(s), t=float(t), y=y, dt=float(dt),
                          seed=int(seed), bridge=bool(bridge),
                          domain=domain, schedule=schedule)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GreenEstimate:
    """Window estimate of the Green's function (units 1/length^3)."""
    value: float
    stderr: float
    window: float
    count: int
    volume: float

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr,
                "window": self.window, "count": self.count,
                "volume": self.volume}


def window_volume(domain, x, h, n_qmc=20_000, seed=7):
    """Volume of B_h(x) intersected with the domain.

    Uses the closed ball formula when the ball is interior, otherwise a
    deterministic Halton estimate.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    full = 4.0 / 3.0 * np.pi * h ** 3
    if domain.dist_boundary(x) >= h:
        return full if domain.contains(x) else _qmc_volume(
            domain, x, h, n_qmc, seed)
    return _qmc_volume(domain, x, h, n_qmc, seed)


def _qmc_volume(domain, x, h, n_qmc, seed):
    pts = (2.0 * qmc.Halton(3, seed=seed).random(n_qmc) - 1.0) * h + x
    in_ball = np.linalg.norm(pts - x, axis=1) <= h
    frac = np.count_nonzero(in_ball & domain.contains(pts)) / n_qmc
    return frac * (2.0 * h) ** 3


def estimate_green(ensemble, x, h):
    """Box-kernel density estimate of G(t, s, x, y) from an ensemble.

    value = #{surviving terminals in B_h(x)} / (n * |B_h(x) n domain|),
    with a binomial standard error.  Raises EmptyWindowVolume when the
    window misses the domain.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    vol = window_volume(ensemble.domain, x, h)
    if vol <= 0:
        raise EmptyWindowVolume(f"window B_{h}({x}) misses the domain")
    surv = ensemble.survivors()
    count = int(np.count_nonzero(
        np.linalg.norm(surv - x, axis=1) <= h)) if surv.size else 0
    n = ensemble.n_paths
    p_hat = count / n
    stderr = np.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / n) / n) / vol
    return GreenEstimate(value=p_hat / vol, stderr=float(stderr),
                         window=float(h), count=count, volume=float(vol))


def survival_probability(ensemble):
    """Fraction of surviving paths with its binomial standard error."""
    p = float(np.count_nonzero(ensemble.survived)) / ensemble.n_paths
    se = float(np.sqrt(max(p * (1.0 - p), 1.0 / ensemble.n_paths)
                       / ensemble.n_paths))
    return p, se


def survival_curve(ensemble, times):
    """P(tau > t) along a time grid, from the recorded kill times."""
    times = np.asarray(times, dtype=float)
    alive = ensemble.kill_time[None, :] > times[:, None]
    p = alive.mean(axis=1)
    se = np.sqrt(np.maximum(p * (1 - p), 1.0 / ensemble.n_paths)
                 / ensemble.n_paths)
    return p, se
