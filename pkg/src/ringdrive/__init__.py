"""Ring-road traffic microsimulator with a haptic shared-control pedal stack."""

from .config import ScenarioConfig, TrafficConfig, config_from_dict, load_config
from .driver import IidmAccParams, cah_accel, cah_blend, equilibrium_gap, iidm_accel
from .follower_stopper import FollowerStopperParams, command_speed, gap_thresholds
from .human import (
    EgoObs,
    HumanParams,
    SyntheticHuman,
    equilibrium_depression,
    intent_to_pedals,
    neuromuscular_force,
    ou_path,
)
from .log import SessionLog, load_log
from .metrics import (
    SessionMetrics,
    braking_instances,
    ego_speed_std,
    jam_lifetime,
    min_gap_after_failure,
    platoon_speed_std,
    session_metrics,
    throughput,
)
from .pedals import (
    Action,
    Condition,
    HapticGains,
    PedalConfig,
    PedalRig,
    PedalState,
    PidController,
    PidGains,
    PowertrainParams,
    haptic_stiffness,
    pedal_dynamics_step,
    pedal_force,
    powertrain_accel,
    select_action,
    servo_step,
)
from .scenario import (
    HeldInput,
    ReplayInput,
    SessionEngine,
    participant_config,
    run_cohort,
    run_session,
)
from .stats import StatResult, mcnemar, paired_t, student_t_sf
from .world import (
    CollisionEvent,
    RingRoad,
    VehicleState,
    WorldConfig,
    WorldState,
    advance_world,
    detect_collision,
    gap_to_leader,
    init_scenario,
)

__version__ = "0.1.0"
