"""Target geometry and boolean point visibility.

A target is a point cloud of points of interest (POIs) in its body frame.
Cameras sit at fixed Hill-frame stations, always pointing at the origin.
Visibility of each POI is the conjunction of a field-of-view cone filter and
hidden-point removal by spherical flipping plus a convex hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .attitude import rotation_matrix

__all__ = [
    "PointCloud",
    "ViewpointSet",
    "CameraModel",
    "DegenerateCamera",
    "fibonacci_viewpoints",
    "transform_cloud",
    "fov_filter",
    "hidden_point_removal",
    "visible_points",
    "synthetic_cloud",
]

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


class DegenerateCamera(ValueError):
    """Camera placed where the visibility model is undefined."""


@dataclass
class PointCloud:
    """POI positions in the target body frame, meters."""

    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if len(self.points) < 1:
            raise ValueError("point cloud must contain at least one point")
        if not np.isfinite(self.points).all():
            raise ValueError("point cloud coordinates must be finite")

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class ViewpointSet:
    """Static Hill-frame camera stations forming the high-level action space."""

    positions: np.ndarray
    radius: float

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if len(self.positions) < 2:
            raise ValueError("need at least two viewpoints")
        norms = np.linalg.norm(self.positions, axis=1)
        if np.any(np.abs(norms - self.radius) > 1e-9):
            raise ValueError("all viewpoints must sit at the configured radius")
        unit = self.positions / norms[:, None]
        cosang = np.clip(unit @ unit.T, -1.0, 1.0)
        np.fill_diagonal(cosang, -1.0)
        angles = np.arccos(cosang)
        if angles.min() < 1e-9:
            raise ValueError("viewpoints must be pairwise distinct")
        # Nearest-neighbor angle per viewpoint; the global minimum drives the
        # parking TOF rule.
        self.nearest_neighbor_angles = angles.min(axis=1)
        self.min_pairwise_angle = float(self.nearest_neighbor_angles.min())

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class CameraModel:
    """Sensor cone half-angle and the hidden-point-removal projection sphere.

    The removal method is parametrized by the flip-sphere radius; the
    configured value is a diameter, halved internally.
    """

    fov_half_angle_deg: float = 7.5
    hpr_diameter: float = 208874.855

    def __post_init__(self):
        if not 0.0 < self.fov_half_angle_deg <= 180.0:
            raise ValueError("fov_half_angle_deg must be in (0, 180]")
        if not self.hpr_diameter > 0:
            raise ValueError("hpr_diameter must be positive")

    @property
    def hpr_radius(self) -> float:
        return 0.5 * self.hpr_diameter


def fibonacci_viewpoints(count: int, radius: float) -> ViewpointSet:
    """Projected Fibonacci lattice: count stations pseudo-uniform on a sphere.

    Latitudes step uniformly in z while the azimuth advances by the golden
    angle 2*pi*(1 - 1/phi) per point.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    if not radius > 0:
        raise ValueError("radius must be positive")
    i = np.arange(count, dtype=float)
    z = 1.0 - 2.0 * (i + 0.5) / count
    azimuth = 2.0 * math.pi * i * (1.0 - 1.0 / GOLDEN_RATIO)
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    unit = np.column_stack([rho * np.cos(azimuth), rho * np.sin(azimuth), z])
    return ViewpointSet(positions=radius * unit, radius=radius)


def transform_cloud(cloud: PointCloud, q_bf_hill) -> np.ndarray:
    """Body-frame POIs expressed in Hill coordinates for a target attitude.

    The target is centered at the Hill origin with zero relative translation,
    so the transform is the pure rotation by ``q_bf_hill``.
    """
    return cloud.points @ rotation_matrix(q_bf_hill).T


def fov_filter(points: np.ndarray, camera_pos, camera: CameraModel) -> np.ndarray:
    """Cone test about the target-pointing boresight.

    A point passes when the angle between (point - camera) and the boresight
    (origin - camera) is within the half-angle.
    """
    camera_pos = np.asarray(camera_pos, dtype=float).reshape(3)
    if np.linalg.norm(camera_pos) < 1e-6:
        raise DegenerateCamera("camera at the Hill origin has no target-pointing boresight")
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    boresight = -camera_pos / np.linalg.norm(camera_pos)
    rel = points - camera_pos
    dist = np.linalg.norm(rel, axis=1)
    cos_angle = np.ones(len(points))
    nz = dist > 0.0
    cos_angle[nz] = (rel[nz] @ boresight) / dist[nz]
    return cos_angle >= math.cos(math.radians(camera.fov_half_angle_deg))


def _hull_vertices(pts: np.ndarray) -> np.ndarray:
    """Convex hull vertex indices with rank fallbacks for degenerate input."""
    if len(pts) >= 4:
        try:
            return ConvexHull(pts).vertices
        except QhullError:
            pass
    # Coplanar/collinear or tiny input: project onto the principal subspace
    # and redo the hull there.  Rank cutoff is scale-free (fraction of the
    # bounding-box diagonal).
    center = pts.mean(axis=0)
    centered = pts - center
    diag = np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))
    _, sing, vt = np.linalg.svd(centered, full_matrices=False)
    tol = 1e-9 * max(diag, 1e-300)
    rank = int(np.sum(sing > tol))
    if rank >= 2:
        if len(pts) == 3:
            return np.arange(3)  # non-collinear triangle
        try:
            return ConvexHull(centered @ vt[:2].T).vertices
        except QhullError:
            rank = 1
    if rank == 1:
        coords = centered @ vt[0]
        return np.unique([int(np.argmin(coords)), int(np.argmax(coords))])
    return np.arange(len(pts))  # all points coincide


def hidden_point_removal(points: np.ndarray, camera_pos, camera: CameraModel) -> np.ndarray:
    """Occlusion mask by spherical flipping about the camera.

    Each point is reflected to ``p' = p_rel + 2 (R - |p_rel|) p_rel / |p_rel|``
    with R the flip-sphere radius; a point is visible exactly when its image
    is a vertex of the convex hull of all images plus the camera's own image
    (the origin of the camera-centered frame).
    """
    camera_pos = np.asarray(camera_pos, dtype=float).reshape(3)
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    rel = points - camera_pos
    dist = np.linalg.norm(rel, axis=1)
    if dist.min() < 1e-9:
        raise DegenerateCamera("a point coincides with the camera position")
    radius = camera.hpr_radius
    if radius <= dist.max():
        raise ValueError(
            f"hpr radius {radius} must exceed the camera range to every point "
            f"(max {dist.max():.3g} m)")
    flipped = rel * (2.0 * radius / dist - 1.0)[:, None]
    hull_input = np.vstack([flipped, np.zeros(3)])
    vertices = _hull_vertices(hull_input)
    mask = np.zeros(len(points), dtype=bool)
    mask[vertices[vertices < len(points)]] = True
    return mask


def visible_points(cloud: PointCloud, q_bf_hill, camera_pos,
                   camera: CameraModel) -> np.ndarray:
    """Boolean visibility of every POI for one camera and target attitude."""
    hill_points = transform_cloud(cloud, q_bf_hill)
    return hidden_point_removal(hill_points, camera_pos, camera) & \
        fov_filter(hill_points, camera_pos, camera)


def _sample_box_surface(rng, count, center, half_extents):
    """Uniform area-weighted samples over the surface of an axis-aligned box."""
    hx, hy, hz = half_extents
    face_areas = np.array([hy * hz, hy * hz, hx * hz, hx * hz, hx * hy, hx * hy])
    face = rng.choice(6, size=count, p=face_areas / face_areas.sum())
    uv = rng.uniform(-1.0, 1.0, size=(count, 2))
    pts = np.empty((count, 3))
    axis = face // 2
    sign = np.where(face % 2 == 0, 1.0, -1.0)
    half = np.array([hx, hy, hz])
    for k in range(count):
        a = axis[k]
        others = [i for i in range(3) if i != a]
        pts[k, a] = sign[k] * half[a]
        pts[k, others[0]] = uv[k, 0] * half[others[0]]
        pts[k, others[1]] = uv[k, 1] * half[others[1]]
    return center + pts


def synthetic_cloud(shape: str, point_count: int, scale: float = 1.0,
                    seed: int = 0) -> PointCloud:
    """Deterministic desk-scale target stand-ins.

    Shapes: ``sphere`` (uniform on a sphere of radius ``scale``), ``box``
    (surface of a cube with half-extent ``scale/2``), and ``panel-satellite``
    (a box body with two thin protruding panels, giving the self-occlusion of
    a realistic satellite silhouette).
    """
    if point_count < 4:
        raise ValueError("point_count must be at least 4")
    rng = np.random.default_rng(seed)
    meta = {"shape": shape, "point_count": point_count, "scale": scale, "seed": seed}
    if shape == "sphere":
        v = rng.normal(size=(point_count, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        return PointCloud(scale * v, meta)
    if shape == "box":
        h = scale / 2.0
        return PointCloud(_sample_box_surface(rng, point_count, np.zeros(3), (h, h, h)), meta)
    if shape == "panel-satellite":
        # Body cube plus two thin solar panels along +/- y.  scale is the
        # half-span of the full stack along y.
        body_half = 0.35 * scale
        panel_half = np.array([0.25 * scale, 0.3 * scale, 0.015 * scale])
        panel_center = 0.35 * scale + 0.3 * scale  # gap-free against the body
        areas = np.array([
            6 * (2 * body_half) ** 2,
            2 * (2 * panel_half[0]) * (2 * panel_half[1]),
            2 * (2 * panel_half[0]) * (2 * panel_half[1]),
        ])
        counts = np.maximum(1, np.round(point_count * areas / areas.sum()).astype(int))
        counts[0] += point_count - counts.sum()
        parts = [
            _sample_box_surface(rng, counts[0], np.zeros(3), (body_half,) * 3),
            _sample_box_surface(rng, counts[1], np.array([0.0, panel_center, 0.0]), panel_half),
            _sample_box_surface(rng, counts[2], np.array([0.0, -panel_center, 0.0]), panel_half),
        ]
        return PointCloud(np.vstack(parts), meta)
    raise ValueError(f"unknown synthetic shape {shape!r}")
