"""Scenario files: TOML with strict key checking (unknown keys are errors)."""

from __future__ import annotations

import math
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channel import ChannelConfig
from .codebook import UlaConfig
from .detection import CameraIntrinsics, DetectorConfig, ReplayDetector
from .errors import ConfigError
from .geometry import MountConfig, Pose
from .mlp import load_model
from .mobility import (Trajectory, linear_path_trajectory, load_waypoints,
                       rotation_trajectory)
from .simulation import ScenarioConfig, TimingModel

_SECTIONS = {
    "scenario": {"id", "seed", "mode", "decision_period_s", "policy",
                 "delta_max", "memory_window", "n_sectors"},
    "trajectory": {"kind", "x", "y", "start_yaw_deg", "angular_speed_deg_s",
                   "arc_deg", "speed_mps", "path_length_m", "heading_deg",
                   "waypoint_file"},
    "bs": {"x", "y", "yaw_deg", "antiparallel"},
    "ue_array": {"n_elements", "spacing_wavelengths", "n_beams", "span_deg"},
    "bs_array": {"n_elements", "spacing_wavelengths", "n_beams", "span_deg"},
    "channel": {"carrier_frequency_hz", "tx_power_dbm", "noise_power_dbm",
                "rician_k_db"},
    "camera": {"fov_deg", "image_width_px", "focal_length_m",
               "max_angular_error_deg", "pixel_noise_std_px",
               "miss_probability", "camera_yaw_in_mcs_deg",
               "radio_yaw_in_mcs_deg", "replay_file"},
    "timing": {"image_processing_s", "beam_config_s", "stabilize_measure_s",
               "fixed_overhead_s"},
    "threshold": {"kind", "value", "calibration_seed"},
    "mlp": {"model_file"},
}


def _check_keys(path: str, section: str, table: dict[str, Any]) -> None:
    allowed = _SECTIONS[section]
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{path}: unknown key [{section}].{key}")


def _trajectory_from(table: dict[str, Any], path: str) -> Trajectory:
    kind = table.get("kind", "rotation")
    start = Pose(table.get("x", 0.0), table.get("y", 0.0),
                 math.radians(table.get("start_yaw_deg", 0.0)))
    if kind == "rotation":
        return rotation_trajectory(start, table.get("angular_speed_deg_s", 1.0),
                                   table.get("arc_deg", 60.0))
    if kind == "linear_path":
        heading = table.get("heading_deg")
        return linear_path_trajectory(
            start, table.get("speed_mps", 2.2352), table.get("path_length_m", 80.0),
            heading=None if heading is None else math.radians(heading))
    if kind == "waypoint_list":
        if "waypoint_file" not in table:
            raise ConfigError(f"{path}: waypoint_list needs waypoint_file")
        return load_waypoints(table["waypoint_file"])
    raise ConfigError(f"{path}: unknown trajectory kind {kind!r}")


def load_scenario(path: str, **overrides: Any) -> ScenarioConfig:
    """Parse a scenario file; keyword overrides beat file values."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")

    for section in doc:
        if section not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        _check_keys(path, section, doc[section])

    sc = doc.get("scenario", {})
    cam = doc.get("camera", {})
    ch = doc.get("channel", {})
    th = doc.get("threshold", {})
    tm = doc.get("timing", {})
    bs = doc.get("bs", {"x": 0.0, "y": 5.0, "yaw_deg": 180.0})

    def arr(table: dict[str, Any]) -> tuple[UlaConfig, int, float]:
        ula = UlaConfig(table.get("n_elements", 64),
                        table.get("spacing_wavelengths", 0.5))
        return ula, table.get("n_beams", 64), table.get("span_deg", 45.0)

    ue_ula, ue_beams, ue_span = arr(doc.get("ue_array", {}))
    bs_ula, bs_beams, bs_span = arr(doc.get("bs_array", {}))
    if ue_span != bs_span:
        raise ConfigError(f"{path}: ue/bs span_deg must match (shared span model)")

    intr = CameraIntrinsics.from_fov(cam.get("fov_deg", 60.0),
                                     cam.get("image_width_px", 1280),
                                     cam.get("focal_length_m", 0.003))
    detector_config = DetectorConfig(
        intrinsics=intr,
        max_angular_error=math.radians(cam.get("max_angular_error_deg", 2.0)),
        pixel_noise_std=cam.get("pixel_noise_std_px", 0.0),
        miss_probability=cam.get("miss_probability", 0.0),
    )
    detector = None
    if "replay_file" in cam:
        detector = ReplayDetector(cam["replay_file"],
                                  sc.get("decision_period_s", 0.25))

    mlp_model = None
    if "mlp" in doc and "model_file" in doc["mlp"]:
        mlp_model = load_model(doc["mlp"]["model_file"])

    kwargs: dict[str, Any] = dict(
        scenario_id=sc.get("id", "scenario"),
        trajectory=_trajectory_from(doc.get("trajectory", {}), path),
        bs_pose=Pose(bs.get("x", 0.0), bs.get("y", 5.0),
                     math.radians(bs.get("yaw_deg", 180.0))),
        bs_antiparallel=bs.get("antiparallel", False),
        detector_config=detector_config,
        seed=sc.get("seed", 0),
        mode=sc.get("mode", "online"),
        decision_period_s=sc.get("decision_period_s", 0.25),
        policy=sc.get("policy", "ma"),
        delta_max=sc.get("delta_max", 5),
        memory_window=sc.get("memory_window", 5),
        n_sectors=sc.get("n_sectors", 8),
        ue_ula=ue_ula, bs_ula=bs_ula,
        ue_beams=ue_beams, bs_beams=bs_beams, span_deg=ue_span,
        channel=ChannelConfig(
            carrier_frequency_hz=ch.get("carrier_frequency_hz", 60e9),
            tx_power_dbm=ch.get("tx_power_dbm", 20.0),
            noise_power_dbm=ch.get("noise_power_dbm", -84.0),
            rician_k_db=ch.get("rician_k_db", math.inf),
        ),
        mounts=MountConfig(
            camera_yaw_in_mcs=math.radians(cam.get("camera_yaw_in_mcs_deg", 0.0)),
            radio_yaw_in_mcs=math.radians(cam.get("radio_yaw_in_mcs_deg", 0.0)),
        ),
        timing=TimingModel(
            image_processing_s=tm.get("image_processing_s", 0.075),
            beam_config_s=tm.get("beam_config_s", 0.050),
            stabilize_measure_s=tm.get("stabilize_measure_s", 0.050),
            fixed_overhead_s=tm.get("fixed_overhead_s", 0.056),
        ),
        threshold_kind=th.get("kind", "quantile"),
        threshold_value=th.get("value", 0.90),
        calibration_seed=th.get("calibration_seed", 1000),
        mlp_model=mlp_model,
        detector=detector,
    )
    kwargs.update(overrides)
    return ScenarioConfig(**kwargs)
