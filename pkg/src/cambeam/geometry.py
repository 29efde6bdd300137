"""Planar coordinate frames and the camera-to-radio angle pipeline.

Frames and conventions used throughout the package:

* WCS (world): X points East, Y points North. Positions are meters.
* Yaw is measured from the Y (North) axis, positive clockwise toward X
  (East). All angles are radians, wrapped to (-pi, pi].
* MCS (vehicle): camera and radio are mounted with fixed yaw offsets.
* CCS (camera): azimuth of a ray relative to the optical axis, same sign
  convention as yaw.
* RCS (radio): azimuth relative to the array boresight. The vehicle radio
  uses the yaw convention above. The infrastructure (BS) radio faces the
  vehicle, i.e. its array is flipped about the vertical axis, so its
  azimuth axis runs opposite: a world direction d seen by a BS with
  boresight yaw psi sits at wrap(psi - d) in the BS radio frame. With
  anti-parallel boresights this makes the facing link mirror-symmetric
  (UE beam at +a pairs with BS beam at -a).

Elevation is ignored; everything is azimuth-plane only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BehindCamera, ConfigError, DegenerateGeometry, OutOfFrame

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]. Idempotent."""
    return math.pi - (math.pi - theta) % TWO_PI


@dataclass(frozen=True)
class Pose:
    """Position plus yaw of an entity in a named planar frame."""

    x: float
    y: float
    yaw: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera parameters; fov_half_angle is derived."""

    focal_length_m: float
    pixel_pitch_m: float
    principal_point_px: float
    image_width_px: int
    fov_half_angle: float = field(init=False)

    def __post_init__(self) -> None:
        if self.focal_length_m <= 0 or self.pixel_pitch_m <= 0:
            raise ConfigError("focal length and pixel pitch must be positive")
        if not (0 <= self.principal_point_px < self.image_width_px):
            raise ConfigError("principal point must lie inside the image")
        half = math.atan(self.image_width_px * self.pixel_pitch_m / (2.0 * self.focal_length_m))
        object.__setattr__(self, "fov_half_angle", half)

    @classmethod
    def from_fov(cls, fov_deg: float, image_width_px: int,
                 focal_length_m: float = 0.003) -> "CameraIntrinsics":
        """Build intrinsics from a full horizontal FOV; pixel pitch is derived."""
        if not (0.0 < fov_deg < 180.0):
            raise ConfigError("fov_deg must be in (0, 180)")
        pitch = 2.0 * focal_length_m * math.tan(math.radians(fov_deg) / 2.0) / image_width_px
        return cls(focal_length_m, pitch, image_width_px / 2.0, image_width_px)


@dataclass(frozen=True)
class MountConfig:
    """Yaw of camera and radio in the vehicle frame."""

    camera_yaw_in_mcs: float = 0.0
    radio_yaw_in_mcs: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "camera_yaw_in_mcs", wrap_angle(self.camera_yaw_in_mcs))
        object.__setattr__(self, "radio_yaw_in_mcs", wrap_angle(self.radio_yaw_in_mcs))


def bearing(from_xy: tuple[float, float], to_xy: tuple[float, float]) -> float:
    """World-frame bearing from one point to another (clockwise from North)."""
    dx = to_xy[0] - from_xy[0]
    dy = to_xy[1] - from_xy[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("coincident positions have no bearing")
    return wrap_angle(math.atan2(dx, dy))


def los_angle_wcs(ue_pose: Pose, bs_position: tuple[float, float]) -> float:
    """Bearing from the UE to the BS in the world frame."""
    return bearing(ue_pose.position, bs_position)


def pixel_to_ccs_angle(x_center_px: float, intrinsics: CameraIntrinsics) -> float:
    """Azimuth of a pixel column relative to the optical axis (pinhole model)."""
    if not (0 <= x_center_px < intrinsics.image_width_px):
        raise OutOfFrame(f"pixel {x_center_px} outside [0, {intrinsics.image_width_px})")
    return math.atan2(
        (x_center_px - intrinsics.principal_point_px) * intrinsics.pixel_pitch_m,
        intrinsics.focal_length_m,
    )


def ccs_angle_to_pixel(theta_ccs: float, intrinsics: CameraIntrinsics) -> float:
    """Inverse pinhole projection; may return a coordinate outside the frame."""
    if abs(theta_ccs) >= math.pi / 2.0:
        raise BehindCamera(f"angle {theta_ccs} rad is not in front of the camera")
    return (intrinsics.principal_point_px
            + intrinsics.focal_length_m * math.tan(theta_ccs) / intrinsics.pixel_pitch_m)


def ccs_to_rcs(theta_ccs: float, mounts: MountConfig) -> float:
    """Shift a camera-frame azimuth into the vehicle radio frame."""
    return wrap_angle(theta_ccs + mounts.camera_yaw_in_mcs - mounts.radio_yaw_in_mcs)


def true_rcs_angles(ue_pose: Pose, bs_pose: Pose,
                    mounts: MountConfig) -> tuple[float, float]:
    """Ground-truth azimuths of the link in both radio frames.

    Returns (theta_ue_rcs, theta_bs_rcs): bearing of the BS in the UE radio
    frame, and bearing of the UE in the (mirrored) BS radio frame. bs_pose.yaw
    is the BS array boresight in the world frame.
    """
    b_ue = bearing(ue_pose.position, bs_pose.position)
    ue_radio_yaw = wrap_angle(ue_pose.yaw + mounts.radio_yaw_in_mcs)
    theta_ue = wrap_angle(b_ue - ue_radio_yaw)
    b_bs = wrap_angle(b_ue + math.pi)  # bearing from BS back to UE
    theta_bs = wrap_angle(bs_pose.yaw - b_bs)  # mirrored BS frame, see module docstring
    return theta_ue, theta_bs


def true_ccs_angle(ue_pose: Pose, bs_position: tuple[float, float],
                   camera_yaw_in_mcs: float) -> float:
    """Ground-truth azimuth of the BS in the camera frame."""
    b = bearing(ue_pose.position, bs_position)
    return wrap_angle(b - ue_pose.yaw - camera_yaw_in_mcs)
