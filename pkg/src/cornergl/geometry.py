"""Truncated sectors, convex polygons, corner frames, neighborhoods.

Plane geometry for magnetic energy minimization on domains with corners.
Every corner of opening ``alpha`` is aligned to the canonical wedge
``{0 < theta < alpha}`` by a rigid motion.  The symmetric-gauge vector
potential picks up only a constant shift under such a motion, which is
recorded in :class:`RigidMotionGauge` and later absorbed as a linear
gauge phase.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

TWO_PI = 2.0 * math.pi


def symmetric_potential(points):
    """Vector potential A(x1, x2) = (-x2, x1)/2 with unit curl.

    ``points`` is an array of shape (..., 2); the result has the same shape.
    """
    pts = np.asarray(points, dtype=float)
    out = np.empty_like(pts)
    out[..., 0] = -0.5 * pts[..., 1]
    out[..., 1] = 0.5 * pts[..., 0]
    return out


@dataclass(frozen=True)
class SectorGeometry:
    """Wedge {0 < theta < alpha} truncated at r = radius, grid pitch step.

    ``theta`` is the principal value of atan2 in (-pi, pi], so openings
    above pi keep only the principal branch of the angle.  Convex-corner
    work only ever needs alpha < pi, where this matches the geometric
    wedge exactly.
    """

    alpha: float
    radius: float
    step: float

    def inside(self, x, y):
        """Vectorized point classification by r < radius, 0 < theta < alpha."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = x * x + y * y
        th = np.arctan2(y, x)
        return (r2 < self.radius * self.radius) & (th > 0.0) & (th < self.alpha)

    def bounding_box(self):
        """Tight axis-aligned box [lo, hi] containing the wedge."""
        a = min(self.alpha, math.pi)  # principal branch only
        cands = [0.0, a] + [t for t in (0.5 * math.pi,) if t < a]
        cos_v = [math.cos(t) for t in cands]
        sin_v = [math.sin(t) for t in cands]
        R = self.radius
        lo = np.array([min(0.0, R * min(cos_v)), min(0.0, R * min(sin_v))])
        hi = np.array([max(0.0, R * max(cos_v)), max(0.0, R * max(sin_v))])
        return lo, hi


def make_sector(alpha, radius, step):
    """Validated SectorGeometry; requires alpha in (0, 2pi), radius/step >= 8."""
    alpha = float(alpha)
    radius = float(radius)
    step = float(step)
    if not 0.0 < alpha < TWO_PI:
        raise GeometryError(f"opening angle {alpha} outside (0, 2*pi)")
    if radius <= 0.0 or step <= 0.0:
        raise GeometryError("radius and step must be positive")
    if radius / step < 8.0:
        raise GeometryError(
            f"degenerate resolution: radius/step = {radius / step:.2f} < 8")
    return SectorGeometry(alpha=alpha, radius=radius, step=step)


@dataclass(frozen=True)
class PolygonDomain:
    """Convex polygon, counterclockwise vertex order, with interior angles."""

    vertices: np.ndarray          # (m, 2)
    angles: np.ndarray            # (m,) interior angle at each vertex
    edges: np.ndarray = field(repr=False, default=None)  # (m, 2, 2) segments

    @property
    def n_vertices(self):
        return len(self.vertices)

    def inside(self, x, y):
        """Strict interior test: on the positive side of every edge."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = np.ones(np.broadcast(x, y).shape, dtype=bool)
        v = self.vertices
        m = len(v)
        for k in range(m):
            a = v[k]
            e = v[(k + 1) % m] - a
            ok &= e[0] * (y - a[1]) - e[1] * (x - a[0]) > 0.0
        return ok

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def min_vertex_distance(self):
        v = self.vertices
        d = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
        d[np.diag_indices(len(v))] = np.inf
        return float(d.min())


def make_polygon(vertices):
    """Build a PolygonDomain from an ordered vertex list.

    Rejects fewer than 3 vertices, repeated points, clockwise orientation,
    collinear triples, and non-convex chains.  Convex + counterclockwise +
    distinct vertices already implies the polygon is simple.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise GeometryError("vertices must be an (m, 2) array of points")
    m = len(v)
    if m < 3:
        raise GeometryError("a polygon needs at least 3 vertices")
    scale = float(np.abs(v).max()) or 1.0
    d = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
    d[np.diag_indices(m)] = np.inf
    if d.min() <= 1e-12 * scale:
        raise GeometryError("repeated vertex")
    area2 = float(np.sum(v[:, 0] * np.roll(v[:, 1], -1)
                         - np.roll(v[:, 0], -1) * v[:, 1]))
    if area2 <= 0.0:
        raise GeometryError("clockwise or degenerate vertex order "
                            "(signed area must be positive)")
    e = np.roll(v, -1, axis=0) - v                     # edge k: v_k -> v_{k+1}
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    if np.any(np.abs(cross) <= 1e-12 * scale * scale):
        raise GeometryError("collinear vertex")
    if np.any(cross < 0.0):
        raise GeometryError("non-convex polygon")
    # interior angle between the two edges leaving each vertex
    e_out = e
    e_in = -np.roll(e, 1, axis=0)                      # toward previous vertex
    cr = e_out[:, 0] * e_in[:, 1] - e_out[:, 1] * e_in[:, 0]
    dt = np.sum(e_out * e_in, axis=1)
    angles = np.arctan2(cr, dt)                        # in (0, pi) for convex
    segs = np.stack([v, np.roll(v, -1, axis=0)], axis=1)
    return PolygonDomain(vertices=v, angles=angles, edges=segs)


def polygon_to_json(domain):
    """Vertices as a JSON array of [x, y] pairs."""
    return json.dumps([[float(x), float(y)] for x, y in domain.vertices])


def polygon_from_json(text_or_list):
    """Inverse of polygon_to_json; accepts a JSON string or a nested list."""
    if isinstance(text_or_list, str):
        text_or_list = json.loads(text_or_list)
    return make_polygon(text_or_list)


@dataclass(frozen=True)
class RigidMotionGauge:
    """Rotation + translation aligning a corner to the canonical wedge.

    Corner coordinates are y = rotation @ (x - translation).  In these
    coordinates the pulled-back potential is exactly
    A~(y) = A(y) + phase_gradient, so a linear gauge phase
    chi(y) = phase_gradient . y restores the canonical potential.
    """

    rotation: np.ndarray          # (2, 2), proper orthogonal
    translation: np.ndarray       # (2,) the vertex
    phase_gradient: np.ndarray    # (2,) constant shift c = Q A(s)

    def __post_init__(self):
        Q = self.rotation
        if abs(np.linalg.det(Q) - 1.0) > 1e-12:
            raise GeometryError("rotation must have determinant +1")
        if np.abs(Q @ Q.T - np.eye(2)).max() > 1e-12:
            raise GeometryError("rotation must be orthogonal")

    def to_corner(self, points):
        pts = np.asarray(points, dtype=float)
        return (pts - self.translation) @ self.rotation.T

    def from_corner(self, points):
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation + self.translation

    def pulled_back_potential(self, y):
        """Potential seen in corner coordinates: A(y) + phase_gradient."""
        return symmetric_potential(y) + self.phase_gradient

    def gauge_phase(self, y):
        """chi(y) = phase_gradient . y (the aligning gauge function)."""
        y = np.asarray(y, dtype=float)
        return y @ self.phase_gradient


def corner_frame(domain, k):
    """Rigid motion + gauge shift aligning vertex k to the canonical wedge.

    The edge leaving vertex k maps onto {theta = 0} and the edge arriving
    at k maps onto {theta = alpha_k}.
    """
    v = domain.vertices
    m = len(v)
    if not 0 <= k < m:
        raise GeometryError(f"vertex index {k} out of range")
    s = v[k]
    e_out = v[(k + 1) % m] - s
    e_out = e_out / np.linalg.norm(e_out)
    Q = np.array([[e_out[0], e_out[1]],
                  [-e_out[1], e_out[0]]])
    c = Q @ symmetric_potential(s)
    return RigidMotionGauge(rotation=Q, translation=s.copy(), phase_gradient=c)


def corner_neighborhood(domain, k, ell, points):
    """Membership mask of the ball B(s_k, ell) over given sample points.

    ``points`` is an (n, 2) array (typically grid node centers already
    restricted to the domain).  Returns (mask, overlap) where ``overlap``
    flags that balls of this radius at two vertices would intersect, i.e.
    2*ell exceeds the minimal vertex distance.  Overlap is a warning
    state, not an error: callers probing large ell get the mask anyway.
    """
    if ell <= 0.0:
        raise GeometryError("neighborhood radius must be positive")
    s = domain.vertices[k]
    pts = np.asarray(points, dtype=float)
    d2 = (pts[:, 0] - s[0]) ** 2 + (pts[:, 1] - s[1]) ** 2
    overlap = bool(2.0 * ell > domain.min_vertex_distance())
    return d2 < ell * ell, overlap


def regular_polygon(n, circumradius=1.0, center=(0.0, 0.0), phase=None):
    """Regular n-gon, counterclockwise, with a horizontal bottom edge."""
    if phase is None:
        phase = -0.5 * math.pi + math.pi / n  # puts one edge flat at the bottom
    ang = phase + TWO_PI * np.arange(n) / n
    v = np.stack([center[0] + circumradius * np.cos(ang),
                  center[1] + circumradius * np.sin(ang)], axis=1)
    return make_polygon(v)
