"""Mixed distance-power weight functions and the Gaussian envelope factor.

The cone weight is

    (d(x,V)/r ^ 1)^l0 * prod_i ((d(x,E_i)^r)/(d(x,V)^r))^le_i
        * (d(x,bdry)^r)/(d(x,edges)^r)

with ``a ^ b = min(a, b)``; the polyhedron weight replaces the single
vertex factor by one per vertex and normalizes each edge factor by the
distance to that edge's endpoint vertices.  Values lie in [0, 1] and
vanish on the boundary; the 0/0 cases on the singular sets are resolved
by continuity (boundary points evaluate to 0, ratios of vanishing capped
distances to 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    ModeInapplicable,
    NonpositiveRadius,
    NonpositiveTime,
    PointOutsideDomain,
)
from .geometry import PolyhedralCone, Polyhedron, _as_points

_TIE = 1e-12


@dataclass(frozen=True)
class WeightParams:
    """Strictly positive weight exponents.

    ``vertex`` holds one exponent for a cone (the vertex at the origin) or
    one per polyhedron vertex; ``edge`` holds one exponent per edge.
    """
    vertex: tuple
    edge: tuple

    def __post_init__(self):
        v = tuple(float(a) for a in np.atleast_1d(self.vertex))
        e = tuple(float(a) for a in np.atleast_1d(self.edge))
        if any(a <= 0 for a in v) or any(a <= 0 for a in e):
            raise ValueError("all weight exponents must be positive")
        object.__setattr__(self, "vertex", v)
        object.__setattr__(self, "edge", e)

    @classmethod
    def cone(cls, lambda_o, lambda_e):
        return cls(vertex=(lambda_o,), edge=tuple(np.atleast_1d(lambda_e)))

    def matches(self, domain):
        if isinstance(domain, PolyhedralCone):
            return len(self.vertex) == 1 and \
                len(self.edge) == domain.n_edges
        if isinstance(domain, Polyhedron):
            return len(self.vertex) == domain.vertices.shape[0] and \
                len(self.edge) == len(domain.edges)
        return False

    def to_dict(self):
        return {"vertex": list(self.vertex), "edge": list(self.edge)}


def _check_inputs(domain, params, x, r):
    if r is not None and r <= 0:
        raise NonpositiveRadius(f"r = {r} must be positive")
    if not params.matches(domain):
        raise DimensionMismatch(
            f"params ({len(params.vertex)} vertex, {len(params.edge)} edge "
            f"exponents) do not match the domain")
    p, single = _as_points(x)
    on_closure = domain.contains(p) | (domain.dist_boundary(p) <= 1e-9)
    if not np.all(on_closure):
        k = int(np.flatnonzero(~on_closure)[0])
        raise PointOutsideDomain(f"point {p[k]} is outside the closed "
                                 "domain")
    return p, single


def weight_cone(cone, params, x, r):
    """Mixed weight I(x, r) on a polyhedral cone; values in [0, 1]."""
    p, single = _check_inputs(cone, params, x, r)
    lam_o = params.vertex[0]
    lam_e = np.asarray(params.edge)
    d_v = cone.dist_vertex(p)
    d_e = cone.edge_distances(p)
    d_b = cone.dist_boundary(p)
    d_hat = np.min(d_e, axis=1)
    out = np.zeros(p.shape[0])
    inner = d_b > _TIE          # weight vanishes on the boundary
    if np.any(inner):
        dv = d_v[inner]
        vertex_factor = np.minimum(dv / r, 1.0) ** lam_o
        ratios = np.minimum(d_e[inner], r) / np.minimum(dv, r)[:, None]
        edge_factor = np.prod(ratios ** lam_e, axis=1)
        boundary_factor = np.minimum(d_b[inner], r) / \
            np.minimum(d_hat[inner], r)
        out[inner] = vertex_factor * edge_factor * boundary_factor
    return float(out[0]) if single else out


def weight_poly(poly, params, x, r):
    """Mixed weight I(x, r) on a polyhedron; values in [0, 1]."""
    p, single = _check_inputs(poly, params, x, r)
    out = _poly_weight_capped(poly, params, p, r)
    return float(out[0]) if single else out


def _poly_weight_capped(poly, params, p, r):
    lam_v = np.asarray(params.vertex)
    lam_e = np.asarray(params.edge)
    d_vs = np.linalg.norm(p[:, None, :] - poly.vertices[None, :, :], axis=2)
    d_es = poly.edge_distances(p)
    d_b = poly.dist_boundary(p)
    d_hat = np.min(d_es, axis=1)
    endpoint = np.stack([np.minimum(d_vs[:, a], d_vs[:, b])
                         for a, b in poly.edges], axis=1)
    out = np.zeros(p.shape[0])
    inner = d_b > _TIE
    if np.any(inner):
        vertex_factor = np.prod(
            np.minimum(d_vs[inner] / r, 1.0) ** lam_v, axis=1)
        ratios = np.minimum(d_es[inner], r) / np.minimum(endpoint[inner], r)
        edge_factor = np.prod(ratios ** lam_e, axis=1)
        boundary_factor = np.minimum(d_b[inner], r) / \
            np.minimum(d_hat[inner], r)
        out[inner] = vertex_factor * edge_factor * boundary_factor
    return out


def weight_poly_inf(poly, params, x):
    """Long-time weight I_inf(x): uncapped vertex powers times the edge
    and boundary ratios; equals diam(P)^(sum of vertex exponents) times
    I(x, diam(P))."""
    p, single = _check_inputs(poly, params, x, None)
    lam_v = np.asarray(params.vertex)
    lam_e = np.asarray(params.edge)
    d_vs = np.linalg.norm(p[:, None, :] - poly.vertices[None, :, :], axis=2)
    d_es = poly.edge_distances(p)
    d_b = poly.dist_boundary(p)
    d_hat = np.min(d_es, axis=1)
    endpoint = np.stack([np.minimum(d_vs[:, a], d_vs[:, b])
                         for a, b in poly.edges], axis=1)
    out = np.zeros(p.shape[0])
    inner = d_b > _TIE
    if np.any(inner):
        vertex_factor = np.prod(d_vs[inner] ** lam_v, axis=1)
        edge_factor = np.prod((d_es[inner] / endpoint[inner]) ** lam_e,
                              axis=1)
        out[inner] = vertex_factor * edge_factor * \
            d_b[inner] / d_hat[inner]
    return float(out[0]) if single else out


def weight(domain, params, x, r):
    """Dispatch to the cone or polyhedron weight."""
    if isinstance(domain, PolyhedralCone):
        return weight_cone(domain, params, x, r)
    if isinstance(domain, Polyhedron):
        return weight_poly(domain, params, x, r)
    raise TypeError(f"no weight defined for {type(domain)!r}")


def gaussian_factor(dt, dx, sigma):
    """Parabolic envelope dt^(-3/2) * exp(-sigma * |dx|^2 / dt)."""
    if np.any(np.asarray(dt) <= 0):
        raise NonpositiveTime("dt must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    dx = np.asarray(dx, dtype=float)
    sq = np.sum(dx * dx, axis=-1)
    return dt ** -1.5 * np.exp(-sigma * sq / dt)


def simplified_weight(domain, params, x, r, mode, delta=0.2):
    """Asymptotic simplifications of the weight in separated regimes.

    Modes for cones:

    - ``nearest_edge``: drop all edge factors except the closest edge k;
      needs d(x/|x|, E_i) >= delta for every other edge i.
    - ``away_from_edges``: ``(d(x,V)/r ^ 1)^(l0-1) * (d(x,bdry)/r ^ 1)``;
      needs d(x, edges) / d(x, V) >= delta.
    - ``away_from_boundary``: ``(d(x,V)/r ^ 1)^l0``;
      needs d(x, bdry) / d(x, V) >= delta.

    For polyhedrons, ``nearest_features`` keeps the closest vertex k and
    closest edge l only; needs all other vertex/edge distances >= delta.
    """
    p, single = _check_inputs(domain, params, x, r)
    if isinstance(domain, PolyhedralCone):
        out = _simplified_cone(domain, params, p, r, mode, delta)
    elif isinstance(domain, Polyhedron):
        out = _simplified_poly(domain, params, p, r, mode, delta)
    else:
        raise TypeError(f"no weight defined for {type(domain)!r}")
    return float(out[0]) if single else out


def _simplified_cone(cone, params, p, r, mode, delta):
    lam_o = params.vertex[0]
    lam_e = np.asarray(params.edge)
    d_v = cone.dist_vertex(p)
    d_e = cone.edge_distances(p)
    d_b = cone.dist_boundary(p)
    if mode == "nearest_edge":
        k = np.argmin(d_e, axis=1)
        rows = np.arange(p.shape[0])
        scaled = d_e / np.maximum(d_v, _TIE)[:, None]
        others = scaled.copy()
        others[rows, k] = np.inf
        if np.any(np.min(others, axis=1) < delta):
            raise ModeInapplicable(
                "a second edge is within delta of x/|x|")
        dek = d_e[rows, k]
        return (np.minimum(d_v / r, 1.0) ** lam_o
                * (np.minimum(dek, r) / np.minimum(d_v, r)) ** lam_e[k]
                * np.minimum(d_b, r) / np.minimum(dek, r))
    if mode == "away_from_edges":
        if np.any(np.min(d_e, axis=1) < delta * d_v):
            raise ModeInapplicable("x is within delta of an edge")
        return np.minimum(d_v / r, 1.0) ** (lam_o - 1.0) * \
            np.minimum(d_b / r, 1.0)
    if mode == "away_from_boundary":
        if np.any(d_b < delta * d_v):
            raise ModeInapplicable("x is within delta of the boundary")
        return np.minimum(d_v / r, 1.0) ** lam_o
    raise ValueError(f"unknown cone mode {mode!r}")


def _simplified_poly(poly, params, p, r, mode, delta):
    if mode != "nearest_features":
        raise ValueError(f"unknown polyhedron mode {mode!r}")
    lam_v = np.asarray(params.vertex)
    lam_e = np.asarray(params.edge)
    d_vs = np.linalg.norm(p[:, None, :] - poly.vertices[None, :, :], axis=2)
    d_es = poly.edge_distances(p)
    d_b = poly.dist_boundary(p)
    k = np.argmin(d_vs, axis=1)
    ell = np.argmin(d_es, axis=1)
    rows = np.arange(p.shape[0])
    others_v = d_vs.copy()
    others_v[rows, k] = np.inf
    others_e = d_es.copy()
    others_e[rows, ell] = np.inf
    if np.any(np.min(others_v, axis=1) < delta) or \
            np.any(np.min(others_e, axis=1) < delta):
        raise ModeInapplicable("a second vertex or edge is within delta")
    dvk = d_vs[rows, k]
    del_ = d_es[rows, ell]
    return (np.minimum(dvk / r, 1.0) ** lam_v[k]
            * (np.minimum(del_, r) / np.minimum(dvk, r)) ** lam_e[ell]
            * np.minimum(d_b, r) / np.minimum(del_, r))
