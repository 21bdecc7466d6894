"""First Dirichlet eigenvalue of the Laplace-Beltrami operator on spherical
polygons, spherical areas, and equal-area cap lower bounds.

The discretization is linear FEM on geodesic triangulations: cotangent
stiffness on the flat triangles, mass lumped with the spherical triangle
areas.  The geometric consistency error vanishes under midpoint refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg

from .errors import (
    AreaOutOfRange,
    CentroidOutside,
    IterationStall,
    MeshTooLarge,
    NoInteriorNodes,
)
from .geometry import PolyhedralCone, SphericalPolygon, _normalize

NODE_CAP = 200_000


def _as_polygon(m):
    if isinstance(m, PolyhedralCone):
        return m.polygon
    if isinstance(m, SphericalPolygon):
        return m
    return SphericalPolygon(np.asarray(m, dtype=float))


# ---------------------------------------------------------------------------
# Meshing
# ---------------------------------------------------------------------------

@dataclass
class SphericalMesh:
    """Geodesic triangulation of a spherical polygon.

    ``boundary_nodes`` are exactly the nodes lying on the polygon's
    boundary arcs; ``boundary_edges`` tracks the boundary segments so
    midpoint refinement keeps classifying new nodes correctly.
    """
    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray          # sorted int indices
    refinement_level: int
    boundary_edges: set = field(default_factory=set, repr=False)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def interior_mask(self):
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return mask


def _spherical_triangle_areas(nodes, triangles):
    a = nodes[triangles[:, 0]]
    b = nodes[triangles[:, 1]]
    c = nodes[triangles[:, 2]]
    det = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = (1.0 + np.einsum("ij,ij->i", a, b)
           + np.einsum("ij,ij->i", b, c)
           + np.einsum("ij,ij->i", c, a))
    return 2.0 * np.arctan2(det, den)


def _ear_clip(polygon):
    """Spherical ear clipping; returns triangles as vertex-index triples."""
    verts = list(range(polygon.n))
    v = polygon.vertices
    triangles = []
    guard = 0
    while len(verts) > 3:
        guard += 1
        if guard > 10 * polygon.n:
            raise CentroidOutside("ear clipping failed to terminate")
        clipped = False
        for k in range(len(verts)):
            i0 = verts[(k - 1) % len(verts)]
            i1 = verts[k]
            i2 = verts[(k + 1) % len(verts)]
            mid = v[i0] + v[i2]
            if np.linalg.norm(mid) < 1e-12:
                continue
            mid = _normalize(mid)
            if not polygon.contains_direction(mid):
                continue
            try:
                tri = SphericalPolygon(v[[i0, i1, i2]], check_simple=False)
            except Exception:
                continue
            others = [j for j in verts if j not in (i0, i1, i2)]
            if others and np.any(tri.contains_direction(v[others])):
                continue
            triangles.append((i0, i1, i2))
            verts.pop(k)
            clipped = True
            break
        if not clipped:
            raise CentroidOutside("no clippable ear found")
    triangles.append(tuple(verts))
    return triangles


def _initial_triangulation(polygon):
    """Fan from an interior apex; single triangle for convex 3-gons."""
    v = polygon.vertices
    n = polygon.n
    if n == 3 and polygon.area() < 2.0 * np.pi:
        return v.copy(), [(0, 1, 2)]
    apex = polygon.interior_point()
    fan_ok = True
    for i in range(n):
        mid = apex + v[i]
        if np.linalg.norm(mid) < 1e-12 or not polygon.contains_direction(
                _normalize(mid)):
            fan_ok = False
            break
    if fan_ok:
        nodes = np.vstack([v, apex])
        tris = [(i, (i + 1) % n, n) for i in range(n)]
        return nodes, tris
    return v.copy(), _ear_clip(polygon)


def mesh_spherical_polygon(m, level, node_cap=NODE_CAP):
    """Triangulate a spherical polygon and refine ``level`` times.

    Each refinement round splits every triangle into four by geodesic
    midpoints (projected back to the sphere); boundary nodes always lie on
    the polygon's boundary arcs.  Raises MeshTooLarge above ``node_cap``.
    """
    polygon = _as_polygon(m)
    if level < 0:
        raise ValueError("level must be >= 0")
    nodes, tris = _initial_triangulation(polygon)
    n_poly = polygon.n
    boundary_edges = {frozenset((i, (i + 1) % n_poly))
                      for i in range(n_poly)}
    boundary_nodes = set(range(n_poly))
    triangles = np.asarray(tris, dtype=np.int64)

    est = nodes.shape[0] + triangles.shape[0] * 2 * 4 ** level
    if est > 4 * node_cap:
        raise MeshTooLarge(f"refinement level {level} would exceed the "
                           f"node cap {node_cap}")

    for _ in range(level):
        nodes, triangles, boundary_edges, boundary_nodes = _subdivide(
            nodes, triangles, boundary_edges, boundary_nodes)
        if nodes.shape[0] > node_cap:
            raise MeshTooLarge(f"mesh has {nodes.shape[0]} nodes, cap is "
                               f"{node_cap}")
    return SphericalMesh(nodes=nodes, triangles=triangles,
                         boundary_nodes=np.array(sorted(boundary_nodes),
                                                 dtype=np.int64),
                         refinement_level=level,
                         boundary_edges=boundary_edges)


def _subdivide(nodes, triangles, boundary_edges, boundary_nodes):
    node_list = [nodes]
    next_index = nodes.shape[0]
    midpoint = {}
    new_boundary_edges = set()
    new_boundary_nodes = set(boundary_nodes)

    def mid(i, j):
        nonlocal next_index
        key = frozenset((i, j))
        if key in midpoint:
            return midpoint[key]
        p = _normalize(nodes[i] + nodes[j])
        node_list.append(p.reshape(1, 3))
        midpoint[key] = next_index
        if key in boundary_edges:
            new_boundary_nodes.add(next_index)
            new_boundary_edges.add(frozenset((i, next_index)))
            new_boundary_edges.add(frozenset((next_index, j)))
        next_index += 1
        return midpoint[key]

    new_tris = np.empty((4 * triangles.shape[0], 3), dtype=np.int64)
    for k, (a, b, c) in enumerate(triangles):
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        new_tris[4 * k:4 * k + 4] = [(a, ab, ca), (ab, b, bc),
                                     (ca, bc, c), (ab, bc, ca)]
    return (np.vstack(node_list), new_tris, new_boundary_edges,
            new_boundary_nodes)


# ---------------------------------------------------------------------------
# FEM eigenvalue
# ---------------------------------------------------------------------------

def _assemble(mesh):
    """Cotangent stiffness and spherical-area lumped mass."""
    t = mesh.triangles
    v1 = mesh.nodes[t[:, 0]]
    v2 = mesh.nodes[t[:, 1]]
    v3 = mesh.nodes[t[:, 2]]
    e12, e23, e31 = v2 - v1, v3 - v2, v1 - v3
    cr = np.cross(e23, e31)
    quad_area = 2.0 * np.sqrt(np.sum(cr * cr, axis=1))   # 4 * flat area
    a12 = np.einsum("ij,ij->i", e23, e31) / quad_area
    a23 = np.einsum("ij,ij->i", e31, e12) / quad_area
    a31 = np.einsum("ij,ij->i", e12, e23) / quad_area
    a11 = -a12 - a31
    a22 = -a12 - a23
    a33 = -a31 - a23
    data = np.column_stack([a12, a12, a23, a23, a31, a31,
                            a11, a22, a33]).ravel()
    i = np.column_stack([t[:, 0], t[:, 1], t[:, 1], t[:, 2], t[:, 2],
                         t[:, 0], t[:, 0], t[:, 1], t[:, 2]]).ravel()
    j = np.column_stack([t[:, 1], t[:, 0], t[:, 2], t[:, 1], t[:, 0],
                         t[:, 2], t[:, 0], t[:, 1], t[:, 2]]).ravel()
    n = mesh.n_nodes
    stiffness = sparse.csr_matrix((data, (i, j)), shape=(n, n))
    s_area = _spherical_triangle_areas(mesh.nodes, t)
    lumped = np.zeros(n)
    np.add.at(lumped, t[:, 0], s_area / 3.0)
    np.add.at(lumped, t[:, 1], s_area / 3.0)
    np.add.at(lumped, t[:, 2], s_area / 3.0)
    return stiffness, lumped


@dataclass
class EigenResult:
    """Estimated first Dirichlet eigenvalue with a refinement indicator."""
    value: float
    error_indicator: float
    levels_used: int
    n_nodes: int = 0
    mesh: SphericalMesh | None = field(default=None, repr=False)
    vector: np.ndarray | None = field(default=None, repr=False)


def eigenvalue_on_mesh(mesh, cg_rtol=1e-10, max_iter=400):
    """Smallest Dirichlet eigenvalue on one mesh by inverse power
    iteration with conjugate-gradient inner solves."""
    stiffness, lumped = _assemble(mesh)
    interior = mesh.interior_mask()
    if not np.any(interior):
        raise NoInteriorNodes(
            f"mesh at level {mesh.refinement_level} has no interior nodes")
    idx = np.flatnonzero(interior)
    a = stiffness[np.ix_(idx, idx)].tocsr()
    m = lumped[idx]
    diag = a.diagonal()
    precond = LinearOperator(a.shape, matvec=lambda x: x / diag)

    x = np.ones(idx.size)
    x /= math.sqrt(float(x @ (m * x)))
    lam_old = float(x @ (a @ x))
    for _ in range(max_iter):
        rhs = m * x
        z, info = cg(a, rhs, x0=x / lam_old, rtol=cg_rtol, atol=0.0,
                     M=precond, maxiter=20_000)
        if info != 0:
            raise IterationStall(f"inner CG failed to converge (info={info})")
        z /= math.sqrt(float(z @ (m * z)))
        lam = float(z @ (a @ z))
        x = z
        if abs(lam - lam_old) <= 1e-12 * lam + 1e-14:
            break
        lam_old = lam
    else:
        raise IterationStall("inverse power iteration did not converge")
    full = np.zeros(mesh.n_nodes)
    full[idx] = x
    return lam, full


def rayleigh_quotient(mesh, vector):
    """Discrete Rayleigh quotient of a vector on the mesh."""
    stiffness, lumped = _assemble(mesh)
    num = float(vector @ (stiffness @ vector))
    den = float(vector @ (lumped * vector))
    return num / den


def first_eigenvalue(m, tol=1e-3, start_level=None, max_level=12,
                     node_cap=60_000, cg_rtol=1e-10):
    """First Dirichlet Laplace-Beltrami eigenvalue of a spherical polygon.

    Builds a refinement sequence of meshes and iterates until two
    successive levels agree to relative ``tol`` or the node cap is
    reached; the error indicator is the last inter-level difference.

    Parameters
    ----------
    m : SphericalPolygon | PolyhedralCone | array of unit vertices
        The polygon (a cone contributes its spherical cross-section).
    tol : float
        Relative tolerance between successive refinement levels.
    """
    polygon = _as_polygon(m)
    values = []
    level = start_level if start_level is not None else 0
    result = None
    while level <= max_level:
        try:
            mesh = mesh_spherical_polygon(polygon, level, node_cap=node_cap)
        except MeshTooLarge:
            break
        try:
            lam, vec = eigenvalue_on_mesh(mesh, cg_rtol=cg_rtol)
        except NoInteriorNodes:
            level += 1
            continue
        values.append(lam)
        indicator = abs(values[-1] - values[-2]) if len(values) > 1 \
            else float("inf")
        result = EigenResult(value=lam, error_indicator=indicator,
                             levels_used=len(values), n_nodes=mesh.n_nodes,
                             mesh=mesh, vector=vec)
        if len(values) > 1 and indicator <= tol * abs(lam):
            break
        level += 1
    if result is None:
        raise NoInteriorNodes("no refinement level produced interior nodes")
    if result.levels_used < 2:
        raise IterationStall("fewer than two refinement levels evaluated")
    return result


# ---------------------------------------------------------------------------
# Areas and cap bounds
# ---------------------------------------------------------------------------

def polygon_area(m):
    """Spherical area (steradians) by excess: sum of angles - (n-2)*pi."""
    return _as_polygon(m).area()


def cap_angle(area):
    """Opening angle of the spherical cap with the given area."""
    if not 0.0 < area < 4.0 * np.pi:
        raise AreaOutOfRange(f"area {area} outside (0, 4*pi)")
    return float(np.arccos(1.0 - area / (2.0 * np.pi)))


def bessel_j0(x, terms=60):
    """J0 by its power series; adequate on the scale of its first zero."""
    x = np.asarray(x, dtype=float)
    z = -(x / 2.0) ** 2
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, terms):
        term = term * z / (k * k)
        total = total + term
    return total if total.ndim else float(total)


def bessel_j1(x, terms=60):
    """J1 by its power series (J0' = -J1)."""
    x = np.asarray(x, dtype=float)
    z = -(x / 2.0) ** 2
    term = x / 2.0
    total = np.array(term, copy=True)
    for k in range(1, terms):
        term = term * z / (k * (k + 1))
        total = total + term
    return total if total.ndim else float(total)


def bessel_j0_first_zero(seed=2.4, tol=1e-14, max_iter=60):
    """First positive zero of J0 by Newton iteration on the series."""
    x = float(seed)
    for _ in range(max_iter):
        step = bessel_j0(x) / bessel_j1(x)
        x += step
        if abs(step) < tol:
            return x
    raise IterationStall("Newton iteration for j0 did not converge")


@dataclass(frozen=True)
class FaberKrahnBounds:
    """Equal-area-cap lower bounds for the first Dirichlet eigenvalue."""
    log_bound: float
    bessel_bound: float | None

    @property
    def usable(self):
        if self.bessel_bound is None:
            return self.log_bound
        return max(self.log_bound, self.bessel_bound)


def faber_krahn_lower_bounds(area):
    """Cap lower bounds for the first eigenvalue at the given area.

    The logarithmic bound ``1 / log(4*pi / (4*pi - area))`` holds for all
    areas in (0, 4*pi); the Bessel-zero bound
    ``j0^2/4 * (4*pi/area - 1/2) - 1/4`` additionally requires the cap to
    fit a hemisphere (area <= 2*pi, closed at 2*pi by continuity).
    """
    if not 0.0 < area < 4.0 * np.pi:
        raise AreaOutOfRange(f"area {area} outside (0, 4*pi)")
    log_bound = 1.0 / math.log(4.0 * np.pi / (4.0 * np.pi - area))
    bessel_bound = None
    if area <= 2.0 * np.pi:
        j0 = bessel_j0_first_zero()
        bessel_bound = (j0 * j0 / 4.0) * (4.0 * np.pi / area - 0.5) - 0.25
    return FaberKrahnBounds(log_bound=log_bound, bessel_bound=bessel_bound)


def hemisphere_polygon(n=64):
    """Regular n-gon with vertices on the equator: the upper hemisphere."""
    ang = 2.0 * np.pi * np.arange(n) / n
    verts = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(n)])
    return SphericalPolygon(verts, check_simple=False)


def spherical_cap_polygon(theta, n=48):
    """Geodesic n-gon inscribed in the cap of opening angle theta about
    +z."""
    ang = 2.0 * np.pi * np.arange(n) / n
    s, c = np.sin(theta), np.cos(theta)
    verts = np.column_stack([s * np.cos(ang), s * np.sin(ang),
                             np.full(n, c)])
    return SphericalPolygon(verts, check_simple=False)
