"""Low-level controller fidelity against the high-level fuel model.

Flies a sample of viewpoint transfers with the per-step thrust solver and
compares integrated fuel against the instantaneous delta-v estimate the
high-level planner budgets, then plots the thrust profile of one transfer:
one dominant burn followed by whisper-level corrections.
"""

import matplotlib.pyplot as plt
import numpy as np

from orbitinspect import (
    ControllerConfig,
    HillState,
    OrbitParams,
    TransferCommand,
    fibonacci_viewpoints,
    navigate,
    transfer_delta_v,
    transfer_tof,
)

params = OrbitParams()
lattice = fibonacci_viewpoints(20, 200.0)
ctrl = ControllerConfig()

print("pair    tof[s]   est dV   flown dV   error   arrival[m]  timing[s]")
rng = np.random.default_rng(1)
ratios = []
for _ in range(12):
    i, j = rng.choice(20, size=2, replace=False)
    start, goal = lattice.positions[i], lattice.positions[j]
    tof = transfer_tof(start, goal, lattice, params)
    est = transfer_delta_v(start, goal, np.zeros(3), lattice, params)
    cmd = TransferCommand(goal=goal, departure_time=0.0, planned_arrival=tof)
    res = navigate(HillState(start, np.zeros(3)), cmd, ctrl, params)
    ratios.append(res.fuel_used / est)
    print(f"{i:2d}->{j:2d} {tof:8.1f}  {est:7.4f}  {res.fuel_used:8.4f}  "
          f"{100 * (res.fuel_used / est - 1):+6.2f}%  {res.position_error:9.3f}  "
          f"{res.timing_error:8.1f}")
print(f"\nfuel ratio over sample: mean {np.mean(ratios):.4f}, "
      f"max deviation {100 * np.abs(np.array(ratios) - 1).max():.2f}% "
      "(high-level budget is trustworthy)")

# Thrust profile of one transfer
i, j = 0, 13
start, goal = lattice.positions[i], lattice.positions[j]
tof = transfer_tof(start, goal, lattice, params)
cmd = TransferCommand(goal=goal, departure_time=0.0, planned_arrival=tof)
res = navigate(HillState(start, np.zeros(3)), cmd, ctrl, params, record_steps=True)
times = [s[0] for s in res.steps]
thrust = [np.linalg.norm(s[3]) for s in res.steps]
plt.figure(figsize=(8, 4))
plt.semilogy(times, np.maximum(thrust, 1e-16))
plt.xlabel("time [s]")
plt.ylabel("|thrust| [N] (log)")
plt.title(f"Thrust profile, transfer {i} -> {j}: impulsive burn then coast")
plt.tight_layout()
plt.savefig("demo05_thrust.png", dpi=130)
print("wrote demo05_thrust.png")
