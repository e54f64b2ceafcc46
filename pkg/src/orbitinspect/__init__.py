"""Multi-agent on-orbit inspection simulator.

Building blocks: Hill-frame relative dynamics and NMT transfers, torque-free
target attitude propagation, viewpoint lattices and point-cloud visibility,
the high-level inspection environment, a low-level navigation controller with
a hierarchical rollout engine, viewpoint-selection policies, and a batch
metrics harness.
"""

from .orbital import (
    OrbitParams,
    HillState,
    ThrustCommand,
    TransferSpec,
    SingularTransfer,
    cwh_system_matrices,
    cwh_derivative,
    cwh_stm,
    cwh_thrust_matrix,
    propagate,
    nmt_initial_velocity,
    nmt_final_velocity,
    check_tof_singularity,
    transfer_tof,
    transfer_delta_v,
)
from .attitude import (
    InertiaDiag,
    AttitudeState,
    DynamicMode,
    euler_derivative,
    quat_derivative,
    step_attitude,
    propagate_attitude,
    hill_from_eci,
    attitude_in_hill,
)
from .geometry import (
    PointCloud,
    ViewpointSet,
    CameraModel,
    DegenerateCamera,
    fibonacci_viewpoints,
    transform_cloud,
    fov_filter,
    hidden_point_removal,
    visible_points,
    synthetic_cloud,
)
from .ply import load_ply
from .envs import (
    EnvConfig,
    InspectionEnv,
    InspectionLedger,
    InspectionWorld,
    info_gain,
    coverage_ratio,
    observation_slices,
)
from .mpc import (
    ControllerConfig,
    TransferCommand,
    required_velocity,
    solve_step_thrust,
    navigate,
    hierarchical_rollout,
    HierarchicalEngine,
    EpisodeRecord,
)
from .policies import (
    RecurrentQWeights,
    save_weights,
    load_weights,
    random_weights,
    recurrent_forward,
    make_policy,
    RandomPolicy,
    ParkPolicy,
    GreedyPolicy,
    RecurrentQPolicy,
    ObservationNormalizer,
)
from .harness import PolicySpec, EpisodeMetrics, BatchReport, run_episode, run_batch, export

__version__ = "0.1.0"
