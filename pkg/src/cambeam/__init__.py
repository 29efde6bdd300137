"""Camera-primed double-directional mmWave beam alignment simulator."""

from .channel import ChannelConfig, LinkState, measure_snr, realize_channel
from .codebook import (Beambook, UlaConfig, make_uniform_beambook,
                       opposite_azimuth_beam, quantize_to_beam, steering_vector)
from .detection import Detection, DetectorConfig, ReplayDetector, SyntheticDetector, detect
from .geometry import (CameraIntrinsics, MountConfig, Pose, ccs_angle_to_pixel,
                       ccs_to_rcs, los_angle_wcs, pixel_to_ccs_angle,
                       true_rcs_angles, wrap_angle)
from .mobility import (Trajectory, angular_rate_at, linear_path_trajectory,
                       pose_at, rotation_trajectory, waypoint_trajectory)
from .policy import (MeasurementPort, PolicyDecision, SessionMemory,
                     camera_only_select, exhaustive_oracle,
                     local_beam_refinement, ma_select, mlp_select,
                     nr_hierarchical_select)
from .simulation import (AlignmentRecord, ScenarioConfig, TimingModel,
                         compute_quantile_thresholds, run_scenario, summarize)

__version__ = "0.1.0"
