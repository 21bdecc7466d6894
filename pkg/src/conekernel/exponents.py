"""Critical boundary-decay exponents and admissible weight ranges.

For the heat operator the vertex exponent is
``-1/2 + sqrt(E0 + 1/4)`` with E0 the first Dirichlet eigenvalue of the
spherical cross-section, and the edge exponent at inner angle kappa is
``pi / kappa``.  For operators with parabolicity constants nu1 <= nu2 only
lower bounds are available; when a lower bound is nonpositive the usable
range collapses to the bare positivity statement and no quantitative
admissibility can be certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParabolicity,
    DimensionMismatch,
    NonpositiveEigenvalue,
    StraightEdge,
    UnknownSolid,
)
from .geometry import PolyhedralCone, Polyhedron
from .spectral import first_eigenvalue


def vertex_exponent_heat(e0):
    """Exact vertex exponent for the heat operator: -1/2 + sqrt(E0+1/4)."""
    if e0 <= 0:
        raise NonpositiveEigenvalue(f"E0 = {e0} must be positive")
    return -0.5 + math.sqrt(e0 + 0.25)


def vertex_exponent_lower(e0, nu1, nu2):
    """General-operator vertex lower bound
    ``-3/2 + sqrt(nu1/nu2) * sqrt(E0+1/4)``; may be nonpositive."""
    if e0 <= 0:
        raise NonpositiveEigenvalue(f"E0 = {e0} must be positive")
    _check_parabolicity(nu1, nu2)
    return -1.5 + math.sqrt(nu1 / nu2) * math.sqrt(e0 + 0.25)


def edge_exponent_heat(kappa):
    """Exact edge exponent for the heat operator: pi / kappa."""
    _check_kappa(kappa)
    return math.pi / kappa


def edge_exponent_lower(kappa, nu1, nu2):
    """General-operator edge lower bound
    ``-1 + sqrt(nu1/nu2) * pi/kappa``; may be nonpositive."""
    _check_kappa(kappa)
    _check_parabolicity(nu1, nu2)
    return -1.0 + math.sqrt(nu1 / nu2) * math.pi / kappa


def _check_kappa(kappa):
    if not 0.0 < kappa < 2.0 * math.pi or abs(kappa - math.pi) < 1e-9:
        raise StraightEdge(f"kappa = {kappa} outside (0, 2*pi) \\ {{pi}}")


def _check_parabolicity(nu1, nu2):
    if not 0.0 < nu1 <= nu2:
        raise BadParabolicity(f"need 0 < nu1 <= nu2, got ({nu1}, {nu2})")


@dataclass
class ExponentReport:
    """Critical exponents of a domain for heat and general operators.

    ``*_exact`` are the heat-operator values; ``*_lower`` the general
    bounds for the given (nu1, nu2).  The +/- slots of the time-reversed
    operator carry the same values: the formulas depend only on
    (nu1, nu2, geometry), which time reversal preserves.  ``*_usable``
    floors nonpositive lower bounds at 0 (range becomes empty: positivity
    is guaranteed but not quantified).
    """
    domain_kind: str
    nu1: float
    nu2: float
    vertex_exact: np.ndarray          # one entry per vertex (cone: one)
    vertex_lower: np.ndarray
    edge_exact: np.ndarray            # one entry per edge
    edge_lower: np.ndarray
    eigenvalues: np.ndarray           # E0 per vertex cross-section
    eigen_errors: np.ndarray

    @property
    def vertex_usable(self):
        return np.maximum(self.vertex_lower, 0.0)

    @property
    def edge_usable(self):
        return np.maximum(self.edge_lower, 0.0)

    def to_dict(self):
        return {
            "domain_kind": self.domain_kind,
            "nu1": self.nu1,
            "nu2": self.nu2,
            "vertex_exact": self.vertex_exact.tolist(),
            "vertex_lower": self.vertex_lower.tolist(),
            "edge_exact": self.edge_exact.tolist(),
            "edge_lower": self.edge_lower.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "eigen_errors": self.eigen_errors.tolist(),
        }


def exponent_report(domain, nu1=1.0, nu2=1.0, eigen_tol=1e-3):
    """Compute the full exponent report for a cone or polyhedron.

    Vertex exponents require the first Dirichlet eigenvalue of each vertex
    cross-section, computed by ``spectral.first_eigenvalue`` at relative
    tolerance ``eigen_tol``.
    """
    _check_parabolicity(nu1, nu2)
    if isinstance(domain, PolyhedralCone):
        res = first_eigenvalue(domain, tol=eigen_tol)
        e0s = np.array([res.value])
        errs = np.array([res.error_indicator])
        kappas = np.asarray(domain.inner_angles)
        kind = "cone"
    elif isinstance(domain, Polyhedron):
        e0s, errs = [], []
        for cone in domain.vertex_cones:
            res = first_eigenvalue(cone, tol=eigen_tol)
            e0s.append(res.value)
            errs.append(res.error_indicator)
        e0s, errs = np.array(e0s), np.array(errs)
        kappas = np.asarray(domain.edge_angles)
        kind = "polyhedron"
    else:
        raise TypeError(f"unsupported domain {type(domain)!r}")
    return ExponentReport(
        domain_kind=kind, nu1=nu1, nu2=nu2,
        vertex_exact=np.array([vertex_exponent_heat(e) for e in e0s]),
        vertex_lower=np.array([vertex_exponent_lower(e, nu1, nu2)
                               for e in e0s]),
        edge_exact=np.array([edge_exponent_heat(k) for k in kappas]),
        edge_lower=np.array([edge_exponent_lower(k, nu1, nu2)
                             for k in kappas]),
        eigenvalues=e0s, eigen_errors=errs)


@dataclass
class AdmissibilityDiagnostics:
    admissible: bool
    vertex_ok: np.ndarray
    edge_ok: np.ndarray
    vertex_limits: np.ndarray
    edge_limits: np.ndarray


def admissible(params, report, heat=True):
    """Check weight parameters against the open intervals (0, lambda_hat).

    ``params`` is a ``weights.WeightParams``; exact heat values are used
    when ``heat`` is True, otherwise the (possibly empty) floored lower
    bounds.  Returns AdmissibilityDiagnostics; endpoints are excluded.
    """
    vertex = np.asarray(params.vertex, dtype=float)
    edge = np.asarray(params.edge, dtype=float)
    v_lim = report.vertex_exact if heat else report.vertex_usable
    e_lim = report.edge_exact if heat else report.edge_usable
    if vertex.shape != v_lim.shape:
        raise DimensionMismatch(
            f"{vertex.size} vertex exponents for {v_lim.size} vertices")
    if edge.shape != e_lim.shape:
        raise DimensionMismatch(
            f"{edge.size} edge exponents for {e_lim.size} edges")
    v_ok = (vertex > 0) & (vertex < v_lim)
    e_ok = (edge > 0) & (edge < e_lim)
    return AdmissibilityDiagnostics(
        admissible=bool(np.all(v_ok) and np.all(e_ok)),
        vertex_ok=v_ok, edge_ok=e_ok,
        vertex_limits=v_lim, edge_limits=e_lim)


_PLATONIC_TABLE = {
    "tetrahedron": (lambda: math.atan(2.0 * math.sqrt(2.0)),
                    lambda: math.acos(23.0 / 27.0)),
    "cube": (lambda: math.pi / 2.0, lambda: math.pi / 2.0),
    "octahedron": (lambda: math.pi - math.atan(2.0 * math.sqrt(2.0)),
                   lambda: 4.0 * math.asin(1.0 / 3.0)),
    "dodecahedron": (lambda: math.pi - math.atan(2.0),
                     lambda: math.pi - math.atan(2.0 / 11.0)),
    "icosahedron": (lambda: math.pi - math.atan(2.0 * math.sqrt(5.0) / 5.0),
                    lambda: 2.0 * math.pi - 5.0 * math.asin(2.0 / 3.0)),
}


def platonic_reference(name):
    """Closed-form (edge inner angle, vertex solid angle) of a Platonic
    solid."""
    try:
        kappa, omega = _PLATONIC_TABLE[name]
    except KeyError:
        raise UnknownSolid(f"unknown Platonic solid {name!r}") from None
    return kappa(), omega()
