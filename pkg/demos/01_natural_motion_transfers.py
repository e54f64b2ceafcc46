"""Natural motion transfers between viewpoints in Hill's frame.

Solves the two-point transfer velocity for a few viewpoint pairs, propagates
them under zero thrust, and plots the resulting arcs around the target.  Also
shows a parking loop: the free trajectory that leaves a viewpoint and returns
to it after the half-nearest-neighbor transfer time.
"""

import matplotlib.pyplot as plt
import numpy as np

from orbitinspect import (
    HillState,
    OrbitParams,
    ThrustCommand,
    TransferSpec,
    fibonacci_viewpoints,
    nmt_initial_velocity,
    propagate,
    transfer_tof,
)

params = OrbitParams()
lattice = fibonacci_viewpoints(20, 200.0)

fig = plt.figure(figsize=(9, 8))
ax = fig.add_subplot(projection="3d")
ax.scatter(*lattice.positions.T, s=40, c="k", marker="^", label="viewpoints")

for i, j, color in [(0, 13, "tab:blue"), (4, 16, "tab:orange"), (7, 2, "tab:green")]:
    start, goal = lattice.positions[i], lattice.positions[j]
    tof = transfer_tof(start, goal, lattice, params)
    v0 = nmt_initial_velocity(TransferSpec(start, goal, tof), params)
    state = HillState(start, v0)
    points = [start]
    for _ in range(200):
        state = propagate(state, ThrustCommand.zero(), tof / 200, params)
        points.append(state.position.copy())
    arc = np.array(points)
    ax.plot(*arc.T, color=color, label=f"transfer {i} -> {j} ({tof:.0f} s)")
    print(f"transfer {i}->{j}: tof {tof:7.1f} s, arrival miss "
          f"{np.linalg.norm(arc[-1] - goal):.2e} m")

# parking loop at viewpoint 5
park = lattice.positions[5]
tof = transfer_tof(park, park, lattice, params)
v0 = nmt_initial_velocity(TransferSpec(park, park, tof), params)
state = HillState(park, v0)
loop = [park]
for _ in range(200):
    state = propagate(state, ThrustCommand.zero(), tof / 200, params)
    loop.append(state.position.copy())
loop = np.array(loop)
ax.plot(*loop.T, color="tab:red", label=f"parking loop ({tof:.0f} s)")
excursion = np.linalg.norm(loop - park, axis=1).max()
print(f"parking loop: tof {tof:.1f} s, max excursion {excursion:.2f} m, "
      f"return miss {np.linalg.norm(loop[-1] - park):.2e} m")

ax.scatter([0], [0], [0], s=120, c="tab:purple", marker="*", label="target")
ax.set_xlabel("x radial [m]")
ax.set_ylabel("y along-track [m]")
ax.set_zlabel("z cross-track [m]")
ax.legend(loc="upper left", fontsize=8)
ax.set_title("Zero-thrust transfer arcs between inspection viewpoints")
plt.tight_layout()
plt.savefig("demo01_transfers.png", dpi=130)
print("wrote demo01_transfers.png")
