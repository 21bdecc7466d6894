"""Exact and series reference kernels for killed diffusions.

All Dirichlet kernels here are for isotropic constant coefficients
``a = c * I`` (generator ``c * Laplace``); the free-space kernel also
handles anisotropic piecewise-constant schedules.  With ``tau = c (t-s)``
each 1d factor is a Gaussian of variance ``2 tau``.  Kernels are
nonnegative, symmetric in (x, y), dominated by the free kernel, and
vanish on the boundary.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .errors import (
    NonpositiveInterval,
    PointOutsideDomain,
    SeriesNotConverged,
    UnsupportedAngle,
)

_IV_CAP = 600
_WEDGE_CAP = 500


def _tau(t, s, c):
    if t <= s:
        raise NonpositiveInterval(f"need t > s, got t - s = {t - s}")
    return c * (t - s)


def gauss1d(v, u):
    """Centered 1d Gaussian density with variance v."""
    u = np.asarray(u, dtype=float)
    return np.exp(-u * u / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)


def gaussian_kernel(schedule, t, s, x, y):
    """Free-space kernel of the schedule: Gaussian with covariance
    ``2 * integral of a(u) over [s, t]``."""
    if t <= s:
        raise NonpositiveInterval(f"need t > s, got t - s = {t - s}")
    cov = 2.0 * schedule.integrate(s, t)
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    det = np.linalg.det(cov)
    sol = np.linalg.solve(cov, d)
    return float((2.0 * math.pi) ** -1.5 / math.sqrt(det)
                 * math.exp(-0.5 * float(d @ sol)))


def free_kernel(t, s, x, y, c=1.0):
    """Isotropic free-space kernel (a = c I)."""
    tau = _tau(t, s, c)
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(np.prod(gauss1d(2.0 * tau, d)))


def halfline_kernel_1d(tau, x, y):
    """Dirichlet kernel of (0, inf) at diffusion time tau (variance
    2 tau): reflection difference.  Broadcasts over x and y."""
    v = 2.0 * tau
    return gauss1d(v, np.subtract(x, y)) - gauss1d(v, np.add(x, y))


def halfspace_kernel(t, s, x, y, c=1.0):
    """Dirichlet kernel of the canonical half-space {x3 > 0}."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x[2] < 0 or y[2] < 0:
        raise PointOutsideDomain("points must lie in {x3 >= 0}")
    tau = _tau(t, s, c)
    v = 2.0 * tau
    return float(gauss1d(v, x[0] - y[0]) * gauss1d(v, x[1] - y[1])
                 * halfline_kernel_1d(tau, x[2], y[2]))


def halfspace_survival(t, s, depth, c=1.0):
    """P(tau > t) for a start at distance ``depth`` from the wall."""
    tau = _tau(t, s, c)
    return float(math.erf(depth / (2.0 * math.sqrt(tau))))


def _cyl(x):
    rho = math.hypot(x[0], x[1])
    theta = math.atan2(x[1], x[0])
    return rho, theta, x[2]


def orthant_wedge_kernel(m, t, s, x, y, c=1.0):
    """Dirichlet kernel of the wedge {0 < theta < pi/m} x R by the
    2m-image dihedral reflection method.  m must be a positive integer
    (quadrant: m = 2)."""
    if int(m) != m or m < 1:
        raise UnsupportedAngle(f"image method needs angle pi/m, got m={m}")
    m = int(m)
    beta = math.pi / m
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho_x, th_x, _ = _cyl(x)
    rho_y, th_y, _ = _cyl(y)
    for th in (th_x, th_y):
        if th < -1e-12 or th > beta + 1e-12:
            raise PointOutsideDomain(
                f"angle {th} outside the wedge [0, {beta}]")
    tau = _tau(t, s, c)
    v = 2.0 * tau
    total = 0.0
    for j in range(m):
        for angle, sign in ((2 * j * beta + th_y, 1.0),
                            (2 * j * beta - th_y, -1.0)):
            img = np.array([rho_y * math.cos(angle),
                            rho_y * math.sin(angle)])
            d = x[:2] - img
            total += sign * math.exp(-float(d @ d) / (2.0 * v)) \
                / (2.0 * math.pi * v)
    return float(total * gauss1d(v, x[2] - y[2]))


def modified_bessel_iv(nu, z, tol=1e-14):
    """I_nu(z) for nu >= 0, z >= 0 by the ascending power series.

    Terminates when the geometric tail bound drops below ``tol`` times
    the accumulated sum; raises SeriesNotConverged at the term cap.
    """
    if z < 0 or nu < 0:
        raise ValueError("need nu >= 0 and z >= 0")
    if z == 0.0:
        return 1.0 if nu == 0 else 0.0
    log_half_z = math.log(z / 2.0)
    total = 0.0
    for k in range(_IV_CAP):
        log_term = (nu + 2 * k) * log_half_z - gammaln(k + 1) \
            - gammaln(nu + k + 1)
        term = math.exp(log_term)
        total += term
        ratio = (z / 2.0) ** 2 / ((k + 1) * (nu + k + 1))
        if ratio < 1.0 and term * ratio / (1.0 - ratio) < tol * max(
                total, 1e-300):
            return total
    raise SeriesNotConverged(f"I_nu series cap hit (nu={nu}, z={z})")


def general_wedge_kernel(kappa, t, s, x, y, tol=1e-10, c=1.0):
    """Dirichlet kernel of a wedge with arbitrary angle kappa in (0, 2 pi)
    by the Bessel sine series in the plane times a free 1d factor."""
    if not 0.0 < kappa < 2.0 * math.pi:
        raise UnsupportedAngle(f"kappa = {kappa} outside (0, 2*pi)")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho_x, th_x, _ = _cyl(x)
    rho_y, th_y, _ = _cyl(y)
    for th in (th_x, th_y):
        th_mod = th if th >= 0 else th + 2.0 * math.pi
        if th_mod < -1e-12 or th_mod > kappa + 1e-12:
            raise PointOutsideDomain(
                f"angle {th_mod} outside the wedge [0, {kappa}]")
    th_x = th_x if th_x >= 0 else th_x + 2.0 * math.pi
    th_y = th_y if th_y >= 0 else th_y + 2.0 * math.pi
    tau = _tau(t, s, c)
    z = rho_x * rho_y / (2.0 * tau)
    series = 0.0
    small = 0
    for n in range(1, _WEDGE_CAP + 1):
        nu = n * math.pi / kappa
        term = modified_bessel_iv(nu, z, tol=tol * 1e-2)
        series += term * math.sin(nu * th_x) * math.sin(nu * th_y)
        if term < tol * max(abs(series), 1e-300):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        raise SeriesNotConverged(f"wedge series cap hit (kappa={kappa})")
    planar = (2.0 / kappa) * series \
        * math.exp(-(rho_x ** 2 + rho_y ** 2) / (4.0 * tau)) / (2.0 * tau)
    return float(planar * gauss1d(2.0 * tau, x[2] - y[2]))


# ---------------------------------------------------------------------------
# Boxes
# ---------------------------------------------------------------------------

_SERIES_SWITCH = 0.1     # tau / L^2 threshold between image and sine series


def interval_kernel_1d(length, tau, x, y, tol=1e-12):
    """Dirichlet kernel of (0, length) at diffusion time tau.

    Image series for short times (tau/L^2 <= 0.1), eigenfunction sine
    series otherwise.  Broadcasts over x and y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < -1e-12) or np.any(x > length + 1e-12) or \
            np.any(y < -1e-12) or np.any(y > length + 1e-12):
        raise PointOutsideDomain(f"points outside [0, {length}]")
    v = 2.0 * tau
    if tau / length ** 2 <= _SERIES_SWITCH:
        n_img = int(math.ceil(math.sqrt(
            max(2.0 * v * math.log(1.0 / tol), 0.0)) / (2.0 * length))) + 2
        total = np.zeros(np.broadcast(x, y).shape)
        for n in range(-n_img, n_img + 1):
            total = total + gauss1d(v, x - y - 2.0 * n * length) \
                - gauss1d(v, x + y - 2.0 * n * length)
        return total if total.ndim else float(total)
    k_max = int(math.ceil(length / math.pi * math.sqrt(
        math.log(1.0 / tol) / tau))) + 1
    total = np.zeros(np.broadcast(x, y).shape)
    for k in range(1, k_max + 1):
        total = total + (2.0 / length) * np.sin(k * math.pi * x / length) \
            * np.sin(k * math.pi * y / length) \
            * math.exp(-k * k * math.pi ** 2 * tau / length ** 2)
    return total if total.ndim else float(total)


def box_kernel(lengths, t, s, x, y, tol=1e-12, c=1.0):
    """Dirichlet kernel of the box prod_i (0, L_i): product of interval
    kernels."""
    tau = _tau(t, s, c)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = 1.0
    for i, length in enumerate(lengths):
        out *= interval_kernel_1d(length, tau, x[i], y[i], tol=tol)
    return float(out)


def cube_eigen_decay(lengths):
    """First Dirichlet Laplace eigenvalue of the box:
    pi^2 * sum(1/L_i^2)."""
    lengths = np.asarray(lengths, dtype=float).reshape(-1)
    if np.any(lengths <= 0):
        raise ValueError("box side lengths must be positive")
    return float(np.pi ** 2 * np.sum(1.0 / lengths ** 2))
