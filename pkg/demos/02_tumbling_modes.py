"""Target rotation presets seen from Hill's frame.

Propagates the five dynamic modes over one orbit and plots the trace of a
body-fixed axis in Hill coordinates: a fixed dot for the Hill-static mode, a
slow circle for the ECI-static mode, and increasingly rich curves for the
single-axis spin and the two tumbles.  Conservation of rotational energy and
angular-momentum magnitude is printed for each mode.
"""

import matplotlib.pyplot as plt
import numpy as np

from orbitinspect import (
    AttitudeState,
    DynamicMode,
    InertiaDiag,
    OrbitParams,
    attitude_in_hill,
    step_attitude,
)
from orbitinspect.attitude import momentum_magnitude, quat_rotate, rotational_energy

params = OrbitParams()
inertia = InertiaDiag()
steps = int(params.period)

fig, axes = plt.subplots(1, 5, figsize=(18, 4), subplot_kw={"projection": "3d"})
for ax, mode in zip(axes, DynamicMode):
    state = AttitudeState.from_mode(mode, params)
    e0 = rotational_energy(state.omega_bf, inertia)
    h0 = momentum_magnitude(state.omega_bf, inertia)
    trace = []
    for k in range(steps):
        state = step_attitude(state, 1.0, inertia)
        if k % 20 == 0:
            q_bh, _ = attitude_in_hill(state, float(k + 1), params)
            trace.append(quat_rotate(q_bh, [1.0, 0.0, 0.0]))
    trace = np.array(trace)
    ax.plot(*trace.T, lw=0.8)
    ax.scatter(*trace[0], c="g", s=30)
    ax.set_title(mode.value, fontsize=10)
    ax.set_xlim(-1, 1), ax.set_ylim(-1, 1), ax.set_zlim(-1, 1)
    if e0 > 0:
        de = abs(rotational_energy(state.omega_bf, inertia) - e0) / e0
        dh = abs(momentum_magnitude(state.omega_bf, inertia) - h0) / h0
        print(f"{mode.value:15s} energy drift {de:.2e}  |H| drift {dh:.2e} over one orbit")
    else:
        print(f"{mode.value:15s} inertial rest")

plt.suptitle("Body x-axis traced in Hill's frame over one orbit")
plt.tight_layout()
plt.savefig("demo02_modes.png", dpi=130)
print("wrote demo02_modes.png")
