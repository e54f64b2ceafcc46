"""Hidden-point removal and field-of-view filtering on a synthetic satellite.

Renders which points of interest one camera sees: the full cloud, the
FOV-only mask, and the composed mask where self-occlusion by the panels and
the body hides the far side.
"""

import matplotlib.pyplot as plt
import numpy as np

from orbitinspect import (
    CameraModel,
    fibonacci_viewpoints,
    fov_filter,
    hidden_point_removal,
    synthetic_cloud,
    transform_cloud,
)

cloud = synthetic_cloud("panel-satellite", 1200, scale=1.0, seed=3)
camera = CameraModel()
lattice = fibonacci_viewpoints(20, 200.0)
camera_pos = lattice.positions[4]

q_identity = np.array([1.0, 0.0, 0.0, 0.0])
pts = transform_cloud(cloud, q_identity)
fov = fov_filter(pts, camera_pos, camera)
hpr = hidden_point_removal(pts, camera_pos, camera)
mask = fov & hpr
print(f"camera at viewpoint 4: {len(pts)} POIs, fov-only {fov.sum()}, "
      f"hpr-only {hpr.sum()}, visible {mask.sum()} ({100 * mask.mean():.1f}%)")

fig, axes = plt.subplots(1, 2, figsize=(12, 6), subplot_kw={"projection": "3d"})
axes[0].scatter(*pts[~mask].T, s=4, c="lightgray", label="hidden")
axes[0].scatter(*pts[mask].T, s=6, c="tab:red", label="visible")
axes[0].set_title("one camera, self-occluding target")
axes[0].legend()

# Sweep every lattice station and count how often each POI is seen.
counts = np.zeros(len(pts))
for vp in lattice.positions:
    counts += (hidden_point_removal(pts, vp, camera) & fov_filter(pts, vp, camera))
sc = axes[1].scatter(*pts.T, s=6, c=counts, cmap="viridis")
axes[1].set_title("coverage count over all 20 stations")
fig.colorbar(sc, ax=axes[1], shrink=0.6, label="stations seeing the POI")
never = int((counts == 0).sum())
print(f"POIs visible from no station at this attitude: {never} "
      f"({100 * never / len(pts):.1f}%)")

for ax in axes:
    ax.set_xlim(-1, 1), ax.set_ylim(-1, 1), ax.set_zlim(-1, 1)
plt.tight_layout()
plt.savefig("demo03_visibility.png", dpi=130)
print("wrote demo03_visibility.png")
