"""Camera priming stage: synthetic geometric detector and file replay.

The synthetic detector stands in for a vision model. It projects the true
BS bearing through the pinhole model, adds bounded angular error plus pixel
jitter, and gates on the camera field of view. The recovered angle error is
clipped so it never exceeds the configured bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .errors import ConfigError
from .geometry import (CameraIntrinsics, Pose, ccs_angle_to_pixel,
                       pixel_to_ccs_angle, true_ccs_angle)

LABELS = ("radio", "small_cell", "streetlight", "other")


@dataclass(frozen=True)
class Detection:
    center_px: tuple[float, float]
    label: str = "radio"
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ConfigError("confidence must be in [0, 1]")
        if self.label not in LABELS:
            raise ConfigError(f"unknown label {self.label!r}")


@dataclass(frozen=True)
class DetectorConfig:
    intrinsics: CameraIntrinsics
    max_angular_error: float = math.radians(2.0)  # delta_c, calibration default
    pixel_noise_std: float = 0.0
    miss_probability: float = 0.0
    nominal_y_px: float = field(default=0.0)

    def __post_init__(self) -> None:
        if self.max_angular_error < 0:
            raise ConfigError("max_angular_error must be >= 0")
        if not (0.0 <= self.miss_probability <= 1.0):
            raise ConfigError("miss_probability must be in [0, 1]")


class Detector(Protocol):
    def detect(self, ue_pose: Pose, bs_position: tuple[float, float],
               camera_yaw_in_mcs: float, t: float,
               rng: np.random.Generator) -> Optional[Detection]: ...


def detect(ue_pose: Pose, bs_position: tuple[float, float],
           camera_yaw_in_mcs: float, config: DetectorConfig,
           rng: np.random.Generator, t: float = 0.0) -> Optional[Detection]:
    """One simulated detection, or None on FOV exit / missed frame."""
    intr = config.intrinsics
    theta_true = true_ccs_angle(ue_pose, bs_position, camera_yaw_in_mcs)
    if abs(theta_true) > intr.fov_half_angle:
        return None
    if config.miss_probability > 0.0 and rng.random() < config.miss_probability:
        return None

    eps = rng.uniform(-config.max_angular_error, config.max_angular_error)
    x = ccs_angle_to_pixel(theta_true + eps, intr)
    if config.pixel_noise_std > 0.0:
        x += rng.normal(0.0, config.pixel_noise_std)

    # Snap to the pixel grid, then clamp so the recovered angle stays within
    # max_angular_error of the truth (and inside the frame).
    lo = ccs_angle_to_pixel(max(theta_true - config.max_angular_error, -intr.fov_half_angle), intr)
    hi = ccs_angle_to_pixel(min(theta_true + config.max_angular_error, intr.fov_half_angle), intr)
    lo = max(lo, 0.0)
    hi = min(hi, intr.image_width_px - 1.0)
    xi = float(round(x))
    if math.ceil(lo) <= math.floor(hi):
        x = min(max(xi, math.ceil(lo)), math.floor(hi))
    else:
        x = min(max(x, lo), hi)  # band narrower than a pixel: keep subpixel value

    confidence = rng.uniform(0.5, 1.0)
    return Detection((float(x), config.nominal_y_px), "radio", float(confidence))


class SyntheticDetector:
    """Default detector: geometric synthesis with bounded angular noise."""

    def __init__(self, config: DetectorConfig):
        self.config = config

    def detect(self, ue_pose: Pose, bs_position: tuple[float, float],
               camera_yaw_in_mcs: float, t: float,
               rng: np.random.Generator) -> Optional[Detection]:
        return detect(ue_pose, bs_position, camera_yaw_in_mcs, self.config, rng, t)


class ReplayDetector:
    """Replays logged pixel centers from a plain-text table.

    Format: one row per frame, whitespace separated:
        time_s  x_px  y_px  label  confidence
    Frames absent from the table are misses. Lookups match the nearest
    logged time within half the replay frame period.
    """

    def __init__(self, path: str, frame_period_s: float = 0.25):
        self.frame_period_s = frame_period_s
        self._rows: list[tuple[float, Detection]] = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 5:
                    raise ConfigError(f"{path}:{lineno}: expected 5 columns, got {len(parts)}")
                t, x, y, label, conf = parts
                self._rows.append((float(t), Detection((float(x), float(y)), label, float(conf))))
        self._rows.sort(key=lambda r: r[0])

    def detect(self, ue_pose: Pose, bs_position: tuple[float, float],
               camera_yaw_in_mcs: float, t: float,
               rng: np.random.Generator) -> Optional[Detection]:
        best: Optional[Detection] = None
        best_dt = self.frame_period_s / 2.0
        for row_t, det in self._rows:
            dt = abs(row_t - t)
            if dt <= best_dt:
                best, best_dt = det, dt
        return best


def recovered_rcs_angle(det: Detection, intrinsics: CameraIntrinsics,
                        camera_yaw_in_mcs: float, radio_yaw_in_mcs: float) -> float:
    """Project a detection's center pixel into the vehicle radio frame."""
    theta_ccs = pixel_to_ccs_angle(det.center_px[0], intrinsics)
    return theta_ccs + camera_yaw_in_mcs - radio_yaw_in_mcs
