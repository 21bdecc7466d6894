"""Polyhedral cones, polyhedrons, and wedge domains in R^3.

Cones are stored by their ordered unit vertex directions; faces, edges and
inner angles are derived.  All distance queries accept a single point of
shape (3,) or a batch of shape (n, 3) and are pure functions, safe for
concurrent use.  Lengths are in the units of the input coordinates; angles
in radians; spherical areas in steradians.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull
from scipy.stats import qmc

from .errors import (
    AssumptionViolated,
    DegenerateFace,
    InvalidPolyhedron,
    NonUnitDirection,
    PointOutsideDomain,
    SelfIntersectingPolygon,
    StraightEdge,
)

UNIT_TOL = 1e-12
ANGLE_TOL = 1e-9
BOUNDARY_TIE_TOL = 1e-12
PROBE_RADIUS = 1e-3


def _normalize(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def _as_points(x):
    """Coerce to (n, 3); report whether the input was a single point."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        return a.reshape(1, 3), True
    return a, False


def _scalar_or_array(values, single):
    return float(values[0]) if single else values


def _angle_between(u, v):
    cr = np.linalg.norm(np.cross(u, v), axis=-1)
    dt = np.sum(u * v, axis=-1)
    return np.arctan2(cr, dt)


def _rotate_about(v, axis, angle):
    """Rodrigues rotation of v about a unit axis."""
    k = np.asarray(axis, dtype=float)
    v = np.asarray(v, dtype=float)
    return (v * np.cos(angle)
            + np.cross(k, v) * np.sin(angle)
            + k * np.dot(k, v) * (1.0 - np.cos(angle)))


def _ray_distance(p, x):
    """Distance from points x to the closed half-line {t*p : t >= 0}."""
    t = np.maximum(np.einsum("ij,j->i", x, p), 0.0)
    return np.linalg.norm(x - t[:, None] * p, axis=1)


def _segment_distance(a, b, x):
    """Distance from points x (n,3) to the closed segment [a, b]."""
    ab = b - a
    denom = float(np.dot(ab, ab))
    t = np.clip(np.einsum("ij,j->i", x - a, ab) / denom, 0.0, 1.0)
    return np.linalg.norm(x - a - t[:, None] * ab, axis=1)


# ---------------------------------------------------------------------------
# Spherical polygons
# ---------------------------------------------------------------------------

def _on_arc(p, a, b, tol=1e-9, strict=True):
    """Whether p lies on the minor great-circle arc from a to b."""
    n = np.cross(a, b)
    nn = np.linalg.norm(n)
    if nn < 1e-14:
        return False
    if abs(np.dot(p, n) / nn) > tol:
        return False
    total = _angle_between(a, b)
    if _angle_between(a, p) + _angle_between(p, b) > total + tol:
        return False
    if strict and (_angle_between(a, p) < tol or _angle_between(p, b) < tol):
        return False
    return True


def _arcs_cross(a, b, c, d):
    """Whether the open arcs (a,b) and (c,d) share an interior point."""
    n1 = np.cross(a, b)
    n2 = np.cross(c, d)
    t = np.cross(n1, n2)
    nt = np.linalg.norm(t)
    if nt < 1e-12:
        # same great circle: overlap iff some endpoint is interior to the
        # other arc
        return (_on_arc(c, a, b) or _on_arc(d, a, b)
                or _on_arc(a, c, d) or _on_arc(b, c, d))
    t = t / nt
    for s in (t, -t):
        if _on_arc(s, a, b) and _on_arc(s, c, d):
            return True
    return False


class SphericalPolygon:
    """Simple polygon on the unit sphere bounded by great-circle arcs.

    Vertices are ordered counterclockwise as seen from inside the polygon;
    the reversed order describes the complementary region (a closed curve
    separates the sphere into two polygons and the orientation picks one).
    Interior angles may equal pi here; the polyhedral-cone constructor
    rejects collinear vertices separately.  Containment uses the signed
    winding number of the boundary: +2*pi inside, -2*pi on the other side.
    """

    def __init__(self, vertices, check_simple=True):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 3:
            raise ValueError("need at least 3 vertices of shape (n, 3)")
        norms = np.linalg.norm(v, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise NonUnitDirection(
                f"direction norms deviate from 1 by up to "
                f"{np.max(np.abs(norms - 1.0)):.3e}")
        n = v.shape[0]
        for i in range(n):
            j = (i + 1) % n
            c = np.linalg.norm(np.cross(v[i], v[j]))
            if c < 1e-12:
                raise DegenerateFace(
                    f"consecutive directions {i} and {j} are parallel "
                    f"or antipodal")
        self.vertices = v
        self.n = n
        if check_simple:
            self._check_simple()

    def _check_simple(self):
        # shared endpoints of adjacent arcs do not count: _arcs_cross only
        # reports points strictly interior to both arcs
        v, n = self.vertices, self.n
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            for j in range(i + 1, n):
                c, d = v[j], v[(j + 1) % n]
                if _arcs_cross(a, b, c, d):
                    raise SelfIntersectingPolygon(
                        f"boundary arcs {i} and {j} intersect")
        for k in range(n):
            for i in range(n):
                if k == i or k == (i + 1) % n:
                    continue
                if _on_arc(v[k], v[i], v[(i + 1) % n]):
                    raise SelfIntersectingPolygon(
                        f"vertex {k} lies on arc {i}")

    def _apex_candidate(self):
        v = self.vertices
        s = np.sum(np.cross(v, np.roll(v, -1, axis=0)), axis=0)
        ns = np.linalg.norm(s)
        if ns < 1e-12:
            s = np.sum(v, axis=0)
            ns = np.linalg.norm(s)
            if ns < 1e-12:
                raise DegenerateFace("cannot locate an interior direction")
        return s / ns

    def _search_interior(self):
        v, n = self.vertices, self.n
        for i in range(n):
            s = v[(i - 1) % n] + v[i] + v[(i + 1) % n]
            if np.linalg.norm(s) < 1e-12:
                continue
            m = _normalize(s)
            if self._winding(m.reshape(1, 3))[0] > np.pi:
                return m
        raise DegenerateFace("no interior direction found")

    def _winding(self, q):
        """Summed signed angles of boundary arcs seen from unit points q."""
        v = self.vertices
        total = np.zeros(q.shape[0])
        for i in range(self.n):
            a, b = v[i], v[(i + 1) % self.n]
            det = np.einsum("ij,j->i", q, np.cross(a, b))
            cos = np.dot(a, b) - np.einsum("ij,j->i", q, a) * \
                np.einsum("ij,j->i", q, b)
            total += np.arctan2(det, cos)
        return total

    def contains_direction(self, q):
        """Whether unit directions q (n,3) point into the open polygon."""
        q, single = _as_points(q)
        inside = self._winding(q) > np.pi
        return bool(inside[0]) if single else inside

    def interior_point(self):
        """A unit direction strictly inside the polygon."""
        c = self._apex_candidate()
        if self.contains_direction(c):
            return c
        return self._search_interior()

    def interior_angles(self):
        """Interior angle at each vertex, measured inside the polygon."""
        v, n = self.vertices, self.n
        angles = np.empty(n)
        for i in range(n):
            p = v[i]
            t_prev = _normalize(v[(i - 1) % n] - np.dot(v[(i - 1) % n], p) * p)
            t_next = _normalize(v[(i + 1) % n] - np.dot(v[(i + 1) % n], p) * p)
            base = float(_angle_between(t_prev, t_next))
            if abs(base - np.pi) < ANGLE_TOL:
                angles[i] = np.pi
                continue
            bis = _normalize(t_prev + t_next)
            probe = np.cos(PROBE_RADIUS) * p + np.sin(PROBE_RADIUS) * bis
            angles[i] = base if self.contains_direction(probe) else \
                2.0 * np.pi - base
        return angles

    def area(self):
        """Spherical area by excess: sum of angles minus (n-2)*pi."""
        return float(np.sum(self.interior_angles()) - (self.n - 2) * np.pi)

    def boundary_distance_direction(self, q):
        """Geodesic distance from unit directions q to the boundary arcs."""
        q, single = _as_points(q)
        v, n = self.vertices, self.n
        best = np.full(q.shape[0], np.inf)
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            nrm = _normalize(np.cross(a, b))
            # foot of the geodesic projection onto the great circle
            perp = np.abs(np.arcsin(np.clip(q @ nrm, -1, 1)))
            foot = _normalize(q - np.outer(q @ nrm, nrm))
            on = (_angle_between(foot, a) + _angle_between(foot, b)
                  <= _angle_between(a, b) + 1e-9)
            d = np.where(on, perp,
                         np.minimum(_angle_between(q, a), _angle_between(q, b)))
            best = np.minimum(best, d)
        return _scalar_or_array(best, single)


# ---------------------------------------------------------------------------
# Wedges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WedgeSpec:
    """Canonical wedge {0 < theta < kappa} x R mapped by a rotation.

    ``rotation`` carries the canonical frame to world coordinates: its
    columns are the images of x (theta = 0 wall), y, and z (the edge).
    """
    kappa: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        if not (0.0 < self.kappa < 2.0 * np.pi) or \
                abs(self.kappa - np.pi) < ANGLE_TOL:
            raise StraightEdge(f"wedge angle {self.kappa} outside "
                               "(0, 2*pi) \\ {pi}")
        r = np.asarray(self.rotation, dtype=float)
        if np.max(np.abs(r.T @ r - np.eye(3))) > UNIT_TOL * 100:
            raise ValueError("rotation is not orthogonal")
        if np.linalg.det(r) < 0:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", r)

    def to_local(self, x):
        return np.asarray(x, dtype=float) @ self.rotation

    def to_world(self, x):
        return np.asarray(x, dtype=float) @ self.rotation.T


class Wedge:
    """Infinite wedge domain with inner angle kappa about its edge line."""

    kind = "wedge"

    def __init__(self, kappa, rotation=None):
        self.spec = WedgeSpec(float(kappa),
                              np.eye(3) if rotation is None else rotation)
        self.kappa = float(kappa)
        self.is_convex = self.kappa <= np.pi

    def contains(self, x):
        p, single = _as_points(x)
        loc = self.spec.to_local(p)
        theta = np.arctan2(loc[:, 1], loc[:, 0])
        rho = np.hypot(loc[:, 0], loc[:, 1])
        inside = (rho > BOUNDARY_TIE_TOL) & (theta > 0) & (theta < self.kappa)
        return bool(inside[0]) if single else inside

    def _wall_distances(self, loc):
        d0 = np.sqrt(loc[:, 1] ** 2 + np.minimum(loc[:, 0], 0.0) ** 2)
        c, s = np.cos(self.kappa), np.sin(self.kappa)
        u = loc[:, 0] * c + loc[:, 1] * s      # along the theta=kappa wall
        w = -loc[:, 0] * s + loc[:, 1] * c     # off-wall component
        d1 = np.sqrt(w ** 2 + np.minimum(u, 0.0) ** 2)
        return d0, d1

    def dist_boundary(self, x):
        p, single = _as_points(x)
        d0, d1 = self._wall_distances(self.spec.to_local(p))
        return _scalar_or_array(np.minimum(d0, d1), single)

    def dist_edges(self, x):
        p, single = _as_points(x)
        loc = self.spec.to_local(p)
        return _scalar_or_array(np.hypot(loc[:, 0], loc[:, 1]), single)

    def nearest_face(self, x):
        p, _ = _as_points(x)
        loc = self.spec.to_local(p)
        d0, d1 = self._wall_distances(loc)
        idx = (d1 < d0).astype(int)
        dist = np.minimum(d0, d1)
        n0 = self.spec.to_world(np.array([0.0, 1.0, 0.0]))
        n1 = self.spec.to_world(
            np.array([np.sin(self.kappa), -np.cos(self.kappa), 0.0]))
        normals = np.where(idx[:, None] == 0, n0, n1)
        c, s = np.cos(self.kappa), np.sin(self.kappa)
        interior = np.where(idx == 0, loc[:, 0] > 0,
                            loc[:, 0] * c + loc[:, 1] * s > 0)
        return idx, dist, normals, interior

    def segment_crosses(self, a, b):
        if self.is_convex:
            return np.zeros(_as_points(a)[0].shape[0], dtype=bool)
        # reflex wedge: a chord with both ends inside can cross the two
        # walls; detect by wall-plane crossings landing on a wall
        pa, _ = _as_points(a)
        pb, _ = _as_points(b)
        la, lb = self.spec.to_local(pa), self.spec.to_local(pb)
        out = np.zeros(pa.shape[0], dtype=bool)
        for u, w in ((np.array([1.0, 0.0]), np.array([0.0, 1.0])),
                     (np.array([np.cos(self.kappa), np.sin(self.kappa)]),
                      np.array([-np.sin(self.kappa), np.cos(self.kappa)]))):
            fa = la[:, :2] @ w
            fb = lb[:, :2] @ w
            crossing = (fa > 0) != (fb > 0)
            t = np.where(crossing, fa / np.where(fa != fb, fa - fb, 1.0), -1.0)
            q = la[:, :2] + t[:, None] * (lb[:, :2] - la[:, :2])
            out |= crossing & (q @ u >= 0) & (t >= 0) & (t <= 1)
        return out

    def sample_interior(self, n, rng, radius=1.0, z_halfwidth=1.0):
        theta = rng.uniform(0.0, self.kappa, n)
        rho = radius * np.sqrt(rng.uniform(0.05, 1.0, n))
        z = rng.uniform(-z_halfwidth, z_halfwidth, n)
        loc = np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])
        return self.spec.to_world(loc)

    def to_dict(self):
        return {"type": "wedge", "kappa": self.kappa}


class HalfSpace:
    """Open half-space {x : n . x > c}; the canonical one is {x3 > 0}."""

    kind = "half_space"
    is_convex = True

    def __init__(self, normal=(0.0, 0.0, 1.0), offset=0.0):
        self.normal = _normalize(np.asarray(normal, dtype=float))
        self.offset = float(offset)

    def contains(self, x):
        p, single = _as_points(x)
        inside = p @ self.normal - self.offset > BOUNDARY_TIE_TOL
        return bool(inside[0]) if single else inside

    def dist_boundary(self, x):
        p, single = _as_points(x)
        return _scalar_or_array(np.abs(p @ self.normal - self.offset), single)

    def dist_edges(self, x):
        p, single = _as_points(x)
        return _scalar_or_array(np.full(p.shape[0], np.inf), single)

    def nearest_face(self, x):
        p, _ = _as_points(x)
        d = np.abs(p @ self.normal - self.offset)
        return (np.zeros(p.shape[0], dtype=int), d,
                np.broadcast_to(self.normal, p.shape),
                np.ones(p.shape[0], dtype=bool))

    def segment_crosses(self, a, b):
        return np.zeros(_as_points(a)[0].shape[0], dtype=bool)

    def sample_interior(self, n, rng, radius=1.0):
        base = rng.uniform(-radius, radius, (n, 3))
        depth = rng.uniform(0.02 * radius, radius, n)
        base = base - np.outer(base @ self.normal, self.normal)
        return base + self.normal * (self.offset + depth)[:, None]

    def to_dict(self):
        return {"type": "half_space", "normal": self.normal.tolist(),
                "offset": self.offset}


class FreeSpace:
    """All of R^3 (no killing); useful for free-diffusion benchmarks."""

    kind = "free_space"
    is_convex = True

    def contains(self, x):
        p, single = _as_points(x)
        inside = np.ones(p.shape[0], dtype=bool)
        return True if single else inside

    def dist_boundary(self, x):
        p, single = _as_points(x)
        return _scalar_or_array(np.full(p.shape[0], np.inf), single)

    dist_edges = dist_boundary

    def nearest_face(self, x):
        p, _ = _as_points(x)
        return (np.full(p.shape[0], -1, dtype=int),
                np.full(p.shape[0], np.inf),
                np.zeros_like(p), np.zeros(p.shape[0], dtype=bool))

    def segment_crosses(self, a, b):
        return np.zeros(_as_points(a)[0].shape[0], dtype=bool)

    def sample_interior(self, n, rng, radius=1.0):
        return rng.uniform(-radius, radius, (n, 3))

    def to_dict(self):
        return {"type": "free_space"}


# ---------------------------------------------------------------------------
# Polyhedral cones
# ---------------------------------------------------------------------------

class PolyhedralCone:
    """Infinite cone over a simple spherical polygon, vertex at the origin.

    Attributes
    ----------
    vertex_dirs : (n0, 3) array
        Ordered unit directions p_i of the edges.
    inner_angles : (n0,) array
        Inner dihedral angle kappa_i at edge i, in (0, 2*pi) \\ {pi}.
    convex : bool
        Whether containment reduces to face half-space tests.
    """

    kind = "cone"

    def __init__(self, vertex_dirs):
        self.polygon = SphericalPolygon(vertex_dirs)
        self.vertex_dirs = self.polygon.vertices
        self.n_edges = self.polygon.n
        angles = self.polygon.interior_angles()
        bad = np.abs(angles - np.pi) < ANGLE_TOL
        if np.any(bad):
            raise StraightEdge(
                f"inner angle at edge {int(np.argmax(bad))} equals pi")
        self.inner_angles = angles
        v = self.vertex_dirs
        self._face_normals = _normalize(np.cross(v, np.roll(v, -1, axis=0)))
        apex = self.polygon.interior_point()
        self._interior_dir = apex
        half = np.all(v @ self._face_normals.T >= -1e-12)
        self.convex = bool(half and np.all(angles < np.pi)
                           and self.polygon.area() < 2.0 * np.pi
                           and np.all(self._face_normals @ apex > 0))

    # -- queries ------------------------------------------------------------

    @property
    def is_convex(self):
        return self.convex

    def dist_vertex(self, x):
        p, single = _as_points(x)
        return _scalar_or_array(np.linalg.norm(p, axis=1), single)

    def dist_edge(self, i, x):
        if not 0 <= i < self.n_edges:
            raise IndexError(f"edge index {i} out of range")
        p, single = _as_points(x)
        return _scalar_or_array(_ray_distance(self.vertex_dirs[i], p), single)

    def edge_distances(self, x):
        """Distances to every edge half-line, shape (n_points, n_edges)."""
        p, _ = _as_points(x)
        return np.stack([_ray_distance(d, p) for d in self.vertex_dirs],
                        axis=1)

    def dist_edges(self, x):
        p, single = _as_points(x)
        d = np.min(self.edge_distances(p), axis=1)
        return _scalar_or_array(d, single)

    def _face_sector_distance(self, i, p, with_foot=False):
        """Distance from points p to the closed sector of face i."""
        u = self.vertex_dirs[i]
        v = self.vertex_dirs[(i + 1) % self.n_edges]
        c = float(np.dot(u, v))
        det = 1.0 - c * c
        du = p @ u
        dv = p @ v
        alpha = (du - c * dv) / det
        beta = (dv - c * du) / det
        inside = (alpha >= 0) & (beta >= 0)
        d = np.abs(p @ self._face_normals[i])
        out = np.flatnonzero(~inside)
        if out.size:
            q = p[out]
            d[out] = np.minimum(_ray_distance(u, q), _ray_distance(v, q))
        if with_foot:
            return d, inside & (alpha > 1e-12) & (beta > 1e-12)
        return d

    def dist_boundary(self, x):
        p, single = _as_points(x)
        best = np.full(p.shape[0], np.inf)
        for i in range(self.n_edges):
            best = np.minimum(best, self._face_sector_distance(i, p))
        return _scalar_or_array(best, single)

    def contains(self, x):
        p, single = _as_points(x)
        r = np.linalg.norm(p, axis=1)
        ok = r > BOUNDARY_TIE_TOL
        inside = np.zeros(p.shape[0], dtype=bool)
        if np.any(ok):
            if self.convex:
                side = p[ok] @ self._face_normals.T
                inside[ok] = np.all(side > BOUNDARY_TIE_TOL, axis=1)
            else:
                q = p[ok] / r[ok, None]
                inside[ok] = self.polygon.contains_direction(q)
                near = self.dist_boundary(p[ok]) <= BOUNDARY_TIE_TOL
                inside_ok = inside[ok]
                inside_ok[near] = False
                inside[ok] = inside_ok
        return bool(inside[0]) if single else inside

    def nearest_face(self, x):
        """Per point: (face index, distance, unit normal, foot interior)."""
        p, _ = _as_points(x)
        dists = np.empty((p.shape[0], self.n_edges))
        feet = np.empty((p.shape[0], self.n_edges), dtype=bool)
        for i in range(self.n_edges):
            dists[:, i], feet[:, i] = self._face_sector_distance(
                i, p, with_foot=True)
        idx = np.argmin(dists, axis=1)
        rows = np.arange(p.shape[0])
        return (idx, dists[rows, idx], self._face_normals[idx],
                feet[rows, idx])

    def segment_crosses(self, a, b):
        pa, _ = _as_points(a)
        pb, _ = _as_points(b)
        if self.convex:
            return np.zeros(pa.shape[0], dtype=bool)
        out = np.zeros(pa.shape[0], dtype=bool)
        for i in range(self.n_edges):
            n = self._face_normals[i]
            fa, fb = pa @ n, pb @ n
            crossing = (fa > 0) != (fb > 0)
            t = np.where(crossing, fa / np.where(fa != fb, fa - fb, 1.0), -1.0)
            q = pa + t[:, None] * (pb - pa)
            hit = crossing & (t >= 0) & (t <= 1)
            if np.any(hit):
                d = self._face_sector_distance(i, q[hit])
                sub = np.zeros(pa.shape[0], dtype=bool)
                sub[np.flatnonzero(hit)] = d < 1e-9
                out |= sub
        return out

    def wedge_spec(self, i):
        """WedgeSpec of the edge-i neighborhood (rotation maps W_k there)."""
        if not 0 <= i < self.n_edges:
            raise IndexError(f"edge index {i} out of range")
        p = self.vertex_dirs[i]
        kappa = float(self.inner_angles[i])
        prev = self.vertex_dirs[(i - 1) % self.n_edges]
        nxt = self.vertex_dirs[(i + 1) % self.n_edges]
        for wall in (_normalize(nxt - np.dot(nxt, p) * p),
                     _normalize(prev - np.dot(prev, p) * p)):
            mid = _rotate_about(wall, p, kappa / 2.0)
            probe = _normalize(p + 1e-3 * mid)
            if self.polygon.contains_direction(probe):
                rot = np.column_stack([wall, np.cross(p, wall), p])
                return WedgeSpec(kappa, rot)
        raise StraightEdge(f"could not orient the wedge at edge {i}")

    def sample_interior(self, n, rng, radius=1.0):
        """Deterministic-for-seed interior samples with |x| <= radius."""
        out = np.empty((n, 3))
        got = 0
        while got < n:
            cand = rng.normal(size=(4 * (n - got), 3))
            cand = _normalize(cand)
            keep = self.polygon.contains_direction(cand)
            cand = cand[keep]
            take = min(n - got, cand.shape[0])
            out[got:got + take] = cand[:take]
            got += take
        radii = radius * rng.uniform(0.05, 1.0, n) ** (1.0 / 3.0)
        return out * radii[:, None]

    def to_dict(self):
        return {"type": "cone", "vertex_dirs": self.vertex_dirs.tolist()}


def make_cone(vertex_dirs):
    """Build a polyhedral cone from ordered unit edge directions.

    Directions are ordered counterclockwise as seen from inside the cone;
    the reversed order yields the complementary cone.  Raises
    NonUnitDirection, DegenerateFace, SelfIntersectingPolygon, or
    StraightEdge when the directions violate the domain assumptions.
    """
    return PolyhedralCone(vertex_dirs)


# ---------------------------------------------------------------------------
# Polyhedrons
# ---------------------------------------------------------------------------

def _face_basis(normal):
    n = _normalize(normal)
    a = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(a, n)) > 0.9:
        a = np.array([0.0, 1.0, 0.0])
    u = _normalize(a - np.dot(a, n) * n)
    return u, np.cross(n, u)


def _point_in_polygon_2d(pts, poly):
    """Winding-number containment of 2d points in a closed polygon."""
    total = np.zeros(pts.shape[0])
    n = poly.shape[0]
    for i in range(n):
        a = poly[i] - pts
        b = poly[(i + 1) % n] - pts
        det = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = np.sum(a * b, axis=1)
        total += np.arctan2(det, dot)
    return np.abs(total) > np.pi


class Polyhedron:
    """Bounded polyhedron given by vertices and planar face loops.

    Edges are derived from the faces; each must be shared by exactly two
    faces.  Per-edge inner angles and per-vertex tangent cones are computed
    at construction.
    """

    kind = "polyhedron"

    def __init__(self, vertices, faces):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise InvalidPolyhedron("vertices must have shape (m, 3)")
        self.faces = [list(map(int, f)) for f in faces]
        self._validate_faces()
        self._orient_faces()
        self._derive_edges()
        self._face_geometry()
        self.is_convex = self._convexity()
        self.edge_angles = np.array(
            [self._edge_inner_angle(j) for j in range(len(self.edges))])
        if np.any(np.abs(self.edge_angles - np.pi) < ANGLE_TOL):
            j = int(np.argmin(np.abs(self.edge_angles - np.pi)))
            raise StraightEdge(f"edge {j} has inner angle pi")
        self.vertex_cones = [self._tangent_cone(i)
                             for i in range(self.vertices.shape[0])]
        self.diameter = float(np.max(
            np.linalg.norm(self.vertices[:, None, :]
                           - self.vertices[None, :, :], axis=2)))

    # -- construction internals ---------------------------------------------

    def _validate_faces(self):
        m = self.vertices.shape[0]
        for k, f in enumerate(self.faces):
            if len(f) < 3 or len(set(f)) != len(f):
                raise InvalidPolyhedron(f"face {k} is degenerate")
            if min(f) < 0 or max(f) >= m:
                raise InvalidPolyhedron(f"face {k} references a missing "
                                        "vertex")
            pts = self.vertices[f]
            n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
            nn = np.linalg.norm(n)
            if nn < 1e-14:
                raise InvalidPolyhedron(f"face {k} has collinear leading "
                                        "vertices")
            n = n / nn
            off = np.abs((pts - pts[0]) @ n)
            if np.max(off) > 1e-9 * max(1.0, np.max(np.abs(pts))):
                raise InvalidPolyhedron(f"face {k} is not planar")

    def _orient_faces(self):
        # propagate a consistent winding, then flip globally for outward
        # normals (positive enclosed volume)
        directed = {}
        for k, f in enumerate(self.faces):
            for a, b in zip(f, f[1:] + f[:1]):
                directed.setdefault(frozenset((a, b)), []).append(k)
        adjacency = {}
        for key, ks in directed.items():
            if len(ks) != 2:
                raise InvalidPolyhedron(
                    f"edge {tuple(sorted(key))} is shared by {len(ks)} "
                    "faces, expected 2")
            adjacency[key] = ks
        seen = {0}
        stack = [0]
        while stack:
            k = stack.pop()
            fk = self.faces[k]
            dir_edges = set(zip(fk, fk[1:] + fk[:1]))
            for a, b in list(dir_edges):
                other = [j for j in adjacency[frozenset((a, b))] if j != k]
                j = other[0] if other else k
                if j in seen:
                    continue
                fj = self.faces[j]
                if (a, b) in set(zip(fj, fj[1:] + fj[:1])):
                    self.faces[j] = fj[::-1]
                seen.add(j)
                stack.append(j)
        if len(seen) != len(self.faces):
            raise InvalidPolyhedron("face graph is not connected")
        if self._signed_volume() < 0:
            self.faces = [f[::-1] for f in self.faces]

    def _signed_volume(self):
        vol = 0.0
        for f in self.faces:
            pts = self.vertices[f]
            for i in range(1, len(f) - 1):
                vol += np.linalg.det(np.stack([pts[0], pts[i], pts[i + 1]]))
        return vol / 6.0

    def _derive_edges(self):
        edge_faces = {}
        for k, f in enumerate(self.faces):
            for a, b in zip(f, f[1:] + f[:1]):
                edge_faces.setdefault(tuple(sorted((a, b))), []).append(k)
        self.edges = sorted(edge_faces)
        self.edge_face_pairs = [tuple(edge_faces[e]) for e in self.edges]
        # edges must meet only at shared vertices
        for i, (a, b) in enumerate(self.edges):
            for j in range(i + 1, len(self.edges)):
                c, d = self.edges[j]
                if {a, b} & {c, d}:
                    continue
                d_ij = self._segment_segment_distance(
                    self.vertices[a], self.vertices[b],
                    self.vertices[c], self.vertices[d])
                if d_ij < 1e-12 * max(1.0, self.diameter_estimate()):
                    raise InvalidPolyhedron(
                        f"edges {(a, b)} and {(c, d)} intersect")

    def diameter_estimate(self):
        return float(np.max(np.abs(self.vertices)))

    @staticmethod
    def _segment_segment_distance(p1, p2, q1, q2):
        u, v, w = p2 - p1, q2 - q1, p1 - q1
        a, b, c = np.dot(u, u), np.dot(u, v), np.dot(v, v)
        d, e = np.dot(u, w), np.dot(v, w)
        denom = a * c - b * b
        s = np.clip((b * e - c * d) / denom, 0, 1) if denom > 1e-14 else 0.0
        t = np.clip((a * e - b * d) / denom, 0, 1) if denom > 1e-14 else \
            np.clip(e / c, 0, 1)
        return float(np.linalg.norm(w + s * u - t * v))

    def _face_geometry(self):
        self._face_normals = []
        self._face_offsets = []
        self._face_loops2d = []
        self._face_bases = []
        for f in self.faces:
            pts = self.vertices[f]
            n = np.zeros(3)
            for i in range(1, len(f) - 1):
                n += np.cross(pts[i] - pts[0], pts[i + 1] - pts[0])
            n = _normalize(n)   # outward after _orient_faces
            u, w = _face_basis(n)
            self._face_normals.append(n)
            self._face_offsets.append(float(np.dot(n, pts[0])))
            self._face_bases.append((u, w, pts[0]))
            self._face_loops2d.append(
                np.column_stack([(pts - pts[0]) @ u, (pts - pts[0]) @ w]))
        self._face_normals = np.array(self._face_normals)
        self._face_offsets = np.array(self._face_offsets)

    def _convexity(self):
        side = self.vertices @ self._face_normals.T - self._face_offsets
        return bool(np.all(side <= 1e-9 * max(1.0, self.diameter_estimate())))

    def _edge_inner_angle(self, j):
        a, b = self.edges[j]
        f1, f2 = self.edge_face_pairs[j]
        e = _normalize(self.vertices[b] - self.vertices[a])
        mid = 0.5 * (self.vertices[a] + self.vertices[b])
        tangents = []
        for f in (f1, f2):
            cen = np.mean(self.vertices[self.faces[f]], axis=0)
            t = cen - mid
            t = t - np.dot(t, e) * e
            tangents.append(_normalize(t))
        t1, t2 = tangents
        base = float(_angle_between(t1, t2))
        if abs(base - np.pi) < ANGLE_TOL:
            return np.pi
        bis = _normalize(t1 + t2)
        scale = 1e-3 * max(1.0, self.diameter_estimate())
        probe = mid + scale * bis
        return base if self._contains_winding(probe.reshape(1, 3))[0] \
            else 2.0 * np.pi - base

    def _edge_ring(self, i):
        """Incident edge endpoints in cyclic face order around vertex i."""
        incident = {}
        for k, f in enumerate(self.faces):
            if i in f:
                pos = f.index(i)
                incident[k] = (f[pos - 1], f[(pos + 1) % len(f)])
        if not incident:
            raise InvalidPolyhedron(f"vertex {i} belongs to no face")
        start = next(iter(incident))
        ring = [incident[start][1]]
        k = start
        for _ in range(len(incident)):
            nxt = ring[-1]
            candidates = [kk for kk, (a, b) in incident.items()
                          if a == nxt and kk != k]
            if not candidates:
                break
            k = candidates[0]
            nb = incident[k][1]
            if nb == ring[0]:
                break
            ring.append(nb)
        if len(ring) != len(incident):
            raise InvalidPolyhedron(f"vertex {i} star is not a single cycle")
        return ring

    def _tangent_cone(self, i):
        ring = self._edge_ring(i)
        dirs = _normalize(self.vertices[ring] - self.vertices[i])
        cone = PolyhedralCone(dirs)
        # the ring orientation depends on the face winding; flip if the
        # cone disagrees with the solid near the vertex
        delta = 1e-3 * min(np.linalg.norm(self.vertices[r]
                                          - self.vertices[i])
                           for r in ring)
        probes = _normalize(np.random.default_rng(0).normal(size=(32, 3)))
        want = self.contains(self.vertices[i] + delta * probes)
        got = cone.contains(probes)
        agree = np.count_nonzero(want == got)
        if agree < 16:
            cone = PolyhedralCone(dirs[::-1])
            got = cone.contains(probes)
            agree = np.count_nonzero(want == got)
        if agree < 30:
            raise InvalidPolyhedron(
                f"tangent cone at vertex {i} disagrees with the solid")
        return cone

    # -- queries ------------------------------------------------------------

    def dist_vertex_set(self, x):
        p, single = _as_points(x)
        d = np.min(np.linalg.norm(
            p[:, None, :] - self.vertices[None, :, :], axis=2), axis=1)
        return _scalar_or_array(d, single)

    def dist_edge(self, j, x):
        if not 0 <= j < len(self.edges):
            raise IndexError(f"edge index {j} out of range")
        a, b = self.edges[j]
        p, single = _as_points(x)
        return _scalar_or_array(
            _segment_distance(self.vertices[a], self.vertices[b], p), single)

    def edge_distances(self, x):
        p, _ = _as_points(x)
        return np.stack(
            [_segment_distance(self.vertices[a], self.vertices[b], p)
             for a, b in self.edges], axis=1)

    def dist_edges(self, x):
        p, single = _as_points(x)
        return _scalar_or_array(np.min(self.edge_distances(p), axis=1),
                                single)

    def dist_vertices_on_edge(self, j, x):
        """Distance to the two endpoint vertices of edge j."""
        a, b = self.edges[j]
        p, single = _as_points(x)
        d = np.minimum(np.linalg.norm(p - self.vertices[a], axis=1),
                       np.linalg.norm(p - self.vertices[b], axis=1))
        return _scalar_or_array(d, single)

    def _face_distance(self, k, p, with_foot=False):
        n = self._face_normals[k]
        u, w, origin = self._face_bases[k]
        loop = self._face_loops2d[k]
        rel = p - origin
        plane = rel @ n
        foot2d = np.column_stack([rel @ u, rel @ w])
        inside = _point_in_polygon_2d(foot2d, loop)
        d = np.where(inside, np.abs(plane), np.inf)
        if not np.all(inside):
            f = self.faces[k]
            edge_d = np.full(p.shape[0], np.inf)
            for a, b in zip(f, f[1:] + f[:1]):
                edge_d = np.minimum(edge_d, _segment_distance(
                    self.vertices[a], self.vertices[b], p))
            d = np.where(inside, d, edge_d)
        if with_foot:
            return d, inside
        return d

    def dist_boundary(self, x):
        p, single = _as_points(x)
        best = np.full(p.shape[0], np.inf)
        for k in range(len(self.faces)):
            best = np.minimum(best, self._face_distance(k, p))
        return _scalar_or_array(best, single)

    def _contains_winding(self, p):
        total = np.zeros(p.shape[0])
        for f in self.faces:
            pts = self.vertices[f]
            for i in range(1, len(f) - 1):
                a = pts[0] - p
                b = pts[i] - p
                c = pts[i + 1] - p
                la = np.linalg.norm(a, axis=1)
                lb = np.linalg.norm(b, axis=1)
                lc = np.linalg.norm(c, axis=1)
                det = np.einsum("ij,ij->i", a, np.cross(b, c))
                den = (la * lb * lc + np.einsum("ij,ij->i", a, b) * lc
                       + np.einsum("ij,ij->i", b, c) * la
                       + np.einsum("ij,ij->i", c, a) * lb)
                total += 2.0 * np.arctan2(det, den)
        return np.abs(total) > 2.0 * np.pi

    def contains(self, x):
        p, single = _as_points(x)
        if self.is_convex:
            side = p @ self._face_normals.T - self._face_offsets
            inside = np.all(side < -BOUNDARY_TIE_TOL, axis=1)
        else:
            inside = self._contains_winding(p)
            inside &= self.dist_boundary(p) > BOUNDARY_TIE_TOL
        return bool(inside[0]) if single else inside

    def nearest_face(self, x):
        p, _ = _as_points(x)
        nf = len(self.faces)
        dists = np.empty((p.shape[0], nf))
        feet = np.empty((p.shape[0], nf), dtype=bool)
        for k in range(nf):
            dists[:, k], feet[:, k] = self._face_distance(k, p,
                                                          with_foot=True)
        idx = np.argmin(dists, axis=1)
        rows = np.arange(p.shape[0])
        return (idx, dists[rows, idx], self._face_normals[idx],
                feet[rows, idx])

    def segment_crosses(self, a, b):
        pa, _ = _as_points(a)
        pb, _ = _as_points(b)
        if self.is_convex:
            return np.zeros(pa.shape[0], dtype=bool)
        out = np.zeros(pa.shape[0], dtype=bool)
        for k in range(len(self.faces)):
            n = self._face_normals[k]
            fa = pa @ n - self._face_offsets[k]
            fb = pb @ n - self._face_offsets[k]
            crossing = (fa > 0) != (fb > 0)
            t = np.where(crossing, fa / np.where(fa != fb, fa - fb, 1.0), -1.0)
            q = pa + t[:, None] * (pb - pa)
            hit = crossing & (t >= 0) & (t <= 1)
            if np.any(hit):
                d = self._face_distance(k, q[hit])
                sub = np.zeros(pa.shape[0], dtype=bool)
                sub[np.flatnonzero(hit)] = d < 1e-9
                out |= sub
        return out

    def sample_interior(self, n, rng):
        lo = np.min(self.vertices, axis=0)
        hi = np.max(self.vertices, axis=0)
        out = np.empty((n, 3))
        got = 0
        while got < n:
            cand = rng.uniform(lo, hi, (4 * (n - got), 3))
            cand = cand[self.contains(cand)]
            take = min(n - got, cand.shape[0])
            out[got:got + take] = cand[:take]
            got += take
        return out

    def to_dict(self):
        return {"type": "polyhedron", "vertices": self.vertices.tolist(),
                "faces": [list(f) for f in self.faces]}


# ---------------------------------------------------------------------------
# Spec-level distance operations (shared signatures over domain kinds)
# ---------------------------------------------------------------------------

def dist_vertex(cone, x):
    """Distance from x to the cone vertex at the origin: |x|."""
    return cone.dist_vertex(x)


def dist_edge(domain, i, x):
    """Distance from x to edge i (half-line for cones, segment else)."""
    return domain.dist_edge(i, x)


def dist_boundary(domain, x):
    """Distance from x to the domain boundary; 0 on the boundary."""
    return domain.dist_boundary(x)


def dist_edge_set(domain, x):
    """Distance from x to the union of all edges."""
    return domain.dist_edges(x)


def dist_vertex_set(poly, x):
    """Distance from x to the nearest polyhedron vertex."""
    return poly.dist_vertex_set(x)


def inner_angle(domain, i):
    """Inner dihedral angle at edge i, measured inside the domain."""
    if isinstance(domain, PolyhedralCone):
        if not 0 <= i < domain.n_edges:
            raise IndexError(f"edge index {i} out of range")
        return float(domain.inner_angles[i])
    if not 0 <= i < len(domain.edges):
        raise IndexError(f"edge index {i} out of range")
    return float(domain.edge_angles[i])


def solid_angle(poly, i):
    """Solid angle at vertex i: spherical area of its tangent-cone polygon."""
    return poly.vertex_cones[i].polygon.area()


# ---------------------------------------------------------------------------
# Builtin domains and the JSON domain-spec format
# ---------------------------------------------------------------------------

def _hull_polyhedron(points):
    """Polyhedron from a convex point cloud, merging coplanar hull facets."""
    pts = np.asarray(points, dtype=float)
    hull = ConvexHull(pts)
    groups = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq, 9))
        groups.setdefault(key, set()).update(int(i) for i in simplex)
    faces = []
    for key, idx in groups.items():
        n = np.array(key[:3])
        u, w = _face_basis(n)
        members = sorted(idx)
        rel = pts[members] - np.mean(pts[members], axis=0)
        ang = np.arctan2(rel @ w, rel @ u)
        faces.append([members[k] for k in np.argsort(ang)])
    return Polyhedron(pts, faces)


def octant_cone():
    return make_cone(np.eye(3))


def unit_cube():
    verts = np.array([[x, y, z] for x in (0.0, 1.0)
                      for y in (0.0, 1.0) for z in (0.0, 1.0)])
    return _hull_polyhedron(verts)


def box(lx, ly, lz):
    """Axis-aligned box [0,lx] x [0,ly] x [0,lz]."""
    verts = np.array([[x, y, z] for x in (0.0, lx)
                      for y in (0.0, ly) for z in (0.0, lz)])
    return _hull_polyhedron(verts)


def platonic_solid(name):
    """One of the five Platonic solids, centered at the origin."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    if name == "tetrahedron":
        pts = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif name == "cube":
        pts = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    elif name == "octahedron":
        pts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
               (0, 0, 1), (0, 0, -1)]
    elif name == "dodecahedron":
        pts = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
        pts += [(0, s / phi, t * phi) for s in (-1, 1) for t in (-1, 1)]
        pts += [(s / phi, t * phi, 0) for s in (-1, 1) for t in (-1, 1)]
        pts += [(s * phi, 0, t / phi) for s in (-1, 1) for t in (-1, 1)]
    elif name == "icosahedron":
        pts = [(0, s, t * phi) for s in (-1, 1) for t in (-1, 1)]
        pts += [(s, t * phi, 0) for s in (-1, 1) for t in (-1, 1)]
        pts += [(s * phi, 0, t) for s in (-1, 1) for t in (-1, 1)]
    else:
        from .errors import UnknownSolid
        raise UnknownSolid(f"unknown Platonic solid {name!r}")
    return _hull_polyhedron(np.array(pts, dtype=float))


def quarter_space_wedge(kappa=np.pi / 2.0):
    return Wedge(kappa)


def builtin_domain(name):
    """Resolve a builtin domain name, e.g. 'octant' or
    'quarter_space_wedge(1.2)'."""
    name = name.strip()
    if name == "octant":
        return octant_cone()
    if name == "cube":
        return unit_cube()
    if name in ("tetrahedron", "octahedron", "dodecahedron", "icosahedron"):
        return platonic_solid(name)
    if name == "half_space":
        return HalfSpace()
    if name == "free_space":
        return FreeSpace()
    if name.startswith("quarter_space_wedge"):
        if "(" in name:
            arg = name[name.index("(") + 1:name.rindex(")")]
            return quarter_space_wedge(float(arg))
        return quarter_space_wedge()
    if name.startswith("box(") and name.endswith(")"):
        parts = [float(s) for s in name[4:-1].split(",")]
        return box(*parts)
    raise KeyError(f"unknown builtin domain {name!r}")


def domain_from_dict(data):
    """Build a domain from the JSON-shaped spec dictionary."""
    if not isinstance(data, dict) or "type" not in data:
        raise ValueError("domain spec must be an object with a 'type' field")
    kind = data["type"]
    if kind == "cone":
        if "vertex_dirs" not in data:
            raise ValueError("cone spec is missing field 'vertex_dirs'")
        return make_cone(np.asarray(data["vertex_dirs"], dtype=float))
    if kind == "polyhedron":
        for fld in ("vertices", "faces"):
            if fld not in data:
                raise ValueError(f"polyhedron spec is missing field {fld!r}")
        return Polyhedron(np.asarray(data["vertices"], dtype=float),
                          data["faces"])
    if kind == "wedge":
        if "kappa" not in data:
            raise ValueError("wedge spec is missing field 'kappa'")
        return Wedge(float(data["kappa"]))
    if kind == "half_space":
        return HalfSpace(data.get("normal", (0, 0, 1)),
                         data.get("offset", 0.0))
    if kind == "free_space":
        return FreeSpace()
    raise ValueError(f"unknown domain type {kind!r}")


def load_domain(path_or_name):
    """Load a domain from a JSON file or a 'builtin:<name>' reference."""
    s = str(path_or_name)
    if s.startswith("builtin:"):
        return builtin_domain(s[len("builtin:"):])
    with open(s, "r", encoding="utf-8") as fh:
        return domain_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Assumption validation
# ---------------------------------------------------------------------------

@dataclass
class AssumptionReport:
    """Witnesses found by sampled checks of the domain assumptions."""
    domain_kind: str
    passed: bool
    r0: float
    r1: float
    r2: float | None
    n_samples: int
    detail: str = ""


def _ball_points(n, seed=0):
    h = qmc.Halton(3, seed=seed).random(2 * n)
    pts = 2.0 * h - 1.0
    pts = pts[np.linalg.norm(pts, axis=1) <= 1.0]
    return pts[:n]


def _check_local_model(domain, centers, radii, model_contains, n_pts=160):
    """Largest radius factor at which B_r(c) n D matches the local model."""
    ball = _ball_points(n_pts)
    for c, r, model in zip(centers, radii, model_contains):
        pts = c + r * ball
        want = model(pts)
        got = domain.contains(pts)
        # skip points too close to either boundary to classify robustly
        safe = np.abs(domain.dist_boundary(pts)) > 1e-9
        if np.any(want[safe] != got[safe]):
            k = int(np.flatnonzero(want[safe] != got[safe])[0])
            return pts[safe][k]
    return None


def validate_assumptions(domain, seed=0):
    """Sampled verification of the cone/polyhedron local-structure
    assumptions.

    Finds witness radii (r0 for vertex/edge wedge neighborhoods, r1 for
    face half-balls, r2 for polyhedron faces) by shrinking candidates until
    the sampled checks pass.  Raises AssumptionViolated with a
    counterexample point when no candidate works.  The witnesses are not
    claimed to be maximal.
    """
    rng = np.random.default_rng(seed)
    if isinstance(domain, PolyhedralCone):
        return _validate_cone(domain, rng)
    if isinstance(domain, Polyhedron):
        return _validate_polyhedron(domain, rng)
    if isinstance(domain, (Wedge, HalfSpace, FreeSpace)):
        return AssumptionReport(domain.kind, True, 1.0, 1.0, None, 0,
                                "trivial domain")
    raise TypeError(f"unsupported domain {type(domain)!r}")


def _wedge_contains_fn(spec, origin):
    def fn(pts):
        loc = spec.to_local(pts - origin)
        theta = np.arctan2(loc[:, 1], loc[:, 0])
        return (theta > 0) & (theta < spec.kappa) & \
            (np.hypot(loc[:, 0], loc[:, 1]) > 0)
    return fn


def _halfball_contains_fn(normal, origin):
    def fn(pts):
        return (pts - origin) @ normal > 0
    return fn


def _validate_cone(cone, rng, n_edge_samples=6, n_face_samples=24):
    total = 0
    # (i) wedge neighborhoods around edge points at |xi| = 1
    r0 = None
    for cand in (0.9, 0.7, 0.5, 0.35, 0.25, 0.15, 0.1, 0.05):
        centers, radii, models = [], [], []
        for i in range(cone.n_edges):
            spec = cone.wedge_spec(i)
            for t in np.linspace(0.5, 2.0, n_edge_samples):
                xi = t * cone.vertex_dirs[i]
                centers.append(xi)
                radii.append(cand * t)
                models.append(_wedge_contains_fn(spec, xi))
        bad = _check_local_model(cone, centers, radii, models)
        total += len(centers)
        if bad is None:
            r0 = cand
            break
    if r0 is None:
        raise AssumptionViolated(bad, "no wedge neighborhood radius found")
    # (ii) half-balls at face points, radius r1 * d(p, edges)
    r1 = None
    samples = cone.sample_interior(4 * n_face_samples, rng, radius=2.0)
    idx, dist, normals, feet = cone.nearest_face(samples)
    plane_gap = np.einsum("ij,ij->i", samples, normals)
    face_pts = samples - plane_gap[:, None] * normals
    keep = feet & (cone.dist_edges(face_pts) > 1e-6)
    face_pts, normals = face_pts[keep][:n_face_samples], \
        normals[keep][:n_face_samples]
    inward = np.where(np.einsum("ij,ij->i",
                                cone._interior_dir - face_pts,
                                normals)[:, None] > 0, normals, -normals)
    for cand in (0.9, 0.7, 0.5, 0.35, 0.25, 0.15, 0.1, 0.05):
        centers, radii, models = [], [], []
        for p, n in zip(face_pts, inward):
            dp = cone.dist_edges(p)
            centers.append(p)
            radii.append(cand * dp)
            models.append(_halfball_contains_fn(n, p))
        bad = _check_local_model(cone, centers, radii, models)
        total += len(centers)
        if bad is None:
            r1 = cand
            break
    if r1 is None:
        raise AssumptionViolated(bad, "no face half-ball radius found")
    return AssumptionReport("cone", True, r0, r1, None, total)


def _validate_polyhedron(poly, rng, n_edge_samples=4, n_face_samples=16):
    total = 0
    # (a) vertex balls match the tangent cones
    r0 = None
    for cand in (0.9, 0.7, 0.5, 0.35, 0.25, 0.15, 0.1, 0.05):
        scale = cand * min(1.0, poly.diameter / 2.0)
        ok = True
        for i, cone in enumerate(poly.vertex_cones):
            vi = poly.vertices[i]

            def model(pts, cone=cone, vi=vi):
                return cone.contains(pts - vi)
            bad = _check_local_model(poly, [vi], [scale], [model])
            total += 1
            if bad is not None:
                ok = False
                break
        if ok:
            r0 = scale
            break
    if r0 is None:
        raise AssumptionViolated(bad, "no vertex tangent-cone radius found")
    # (b) wedge neighborhoods along edges, radius r1 * d(p, vertices)
    r1 = None
    for cand in (0.9, 0.7, 0.5, 0.35, 0.25, 0.15, 0.1, 0.05):
        centers, radii, models = [], [], []
        for j, (a, b) in enumerate(poly.edges):
            va, vb = poly.vertices[a], poly.vertices[b]
            spec = _polyhedron_edge_wedge(poly, j)
            for t in np.linspace(0.25, 0.75, n_edge_samples):
                p = (1 - t) * va + t * vb
                centers.append(p)
                radii.append(cand * poly.dist_vertex_set(p))
                models.append(_wedge_contains_fn(spec, p))
        bad = _check_local_model(poly, centers, radii, models)
        total += len(centers)
        if bad is None:
            r1 = cand
            break
    if r1 is None:
        raise AssumptionViolated(bad, "no edge wedge radius found")
    # (c) half-balls on faces, radius r2 * d(xi, edges)
    r2 = None
    interior = poly.sample_interior(4 * n_face_samples, rng)
    idx, dist, normals, feet = poly.nearest_face(interior)
    plane_gap = np.einsum("ij,ij->i", interior, normals) \
        - poly._face_offsets[idx]
    face_pts = interior - plane_gap[:, None] * normals
    keep = feet & (poly.dist_edges(face_pts) > 1e-6 * poly.diameter)
    face_pts = face_pts[keep][:n_face_samples]
    norms = normals[keep][:n_face_samples]
    for cand in (0.9, 0.7, 0.5, 0.35, 0.25, 0.15, 0.1, 0.05):
        centers, radii, models = [], [], []
        for p, n in zip(face_pts, norms):
            centers.append(p)
            radii.append(cand * poly.dist_edges(p))
            models.append(_halfball_contains_fn(-n, p))   # n is outward
        bad = _check_local_model(poly, centers, radii, models)
        total += len(centers)
        if bad is None:
            r2 = cand
            break
    if r2 is None:
        raise AssumptionViolated(bad, "no face half-ball radius found")
    return AssumptionReport("polyhedron", True, r0, r1, r2, total)


def _polyhedron_edge_wedge(poly, j):
    """WedgeSpec for edge j of a polyhedron (edge direction is local z)."""
    a, b = poly.edges[j]
    e = _normalize(poly.vertices[b] - poly.vertices[a])
    kappa = float(poly.edge_angles[j])
    f1, f2 = poly.edge_face_pairs[j]
    mid = 0.5 * (poly.vertices[a] + poly.vertices[b])
    walls = []
    for f in (f1, f2):
        cen = np.mean(poly.vertices[poly.faces[f]], axis=0)
        t = cen - mid
        t = t - np.dot(t, e) * e
        walls.append(_normalize(t))
    scale = 1e-3 * max(1.0, poly.diameter)
    for wall in walls:
        for axis in (e, -e):
            middir = _rotate_about(wall, axis, kappa / 2.0)
            if poly.contains(mid + scale * middir):
                rot = np.column_stack([wall, np.cross(axis, wall), axis])
                return WedgeSpec(kappa, rot)
    raise AssumptionViolated(mid, f"could not orient wedge at edge {j}")
