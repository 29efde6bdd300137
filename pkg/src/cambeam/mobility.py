"""Time-parameterized UE trajectories: in-place rotation, straight road
segments, and replayed waypoint traces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError, DegenerateGeometry, OutOfRange
from .geometry import Pose, bearing, wrap_angle

MPH_TO_MPS = 0.44704


@dataclass(frozen=True)
class Trajectory:
    kind: str  # rotation | linear_path | waypoint_list
    duration_s: float
    # rotation
    start_pose: Pose | None = None
    angular_speed_deg_s: float = 0.0
    arc_deg: float = 0.0
    # linear_path
    speed_mps: float = 0.0
    heading: float = 0.0  # direction of travel (world yaw convention)
    # waypoint_list: (t, x, y, yaw) rows, time ascending
    waypoints: tuple[tuple[float, float, float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ConfigError("duration must be positive")
        if self.kind not in ("rotation", "linear_path", "waypoint_list"):
            raise ConfigError(f"unknown trajectory kind {self.kind!r}")


def rotation_trajectory(start_pose: Pose, angular_speed_deg_s: float,
                        arc_deg: float) -> Trajectory:
    """Fixed position, yaw swept clockwise at constant speed over arc_deg."""
    if angular_speed_deg_s <= 0 or arc_deg <= 0:
        raise ConfigError("rotation needs positive speed and arc")
    return Trajectory(kind="rotation", duration_s=arc_deg / angular_speed_deg_s,
                      start_pose=start_pose, angular_speed_deg_s=angular_speed_deg_s,
                      arc_deg=arc_deg)


def linear_path_trajectory(start_pose: Pose, speed_mps: float, path_length_m: float,
                           heading: float | None = None) -> Trajectory:
    """Constant-speed straight segment with fixed yaw (boresight does not turn)."""
    if speed_mps <= 0 or path_length_m <= 0:
        raise ConfigError("linear path needs positive speed and length")
    h = start_pose.yaw if heading is None else wrap_angle(heading)
    return Trajectory(kind="linear_path", duration_s=path_length_m / speed_mps,
                      start_pose=start_pose, speed_mps=speed_mps, heading=h)


def linear_path_for_peak_rate(peak_rate_deg_s: float, speed_mps: float,
                              path_length_m: float = 80.0,
                              boresight_offset_deg: float = 90.0) -> tuple[Trajectory, tuple[float, float]]:
    """Road segment sized so the peak BS bearing rate equals peak_rate_deg_s.

    The standoff distance follows from rate = v / d at closest approach.
    Returns the trajectory plus the BS position; the UE drives North with
    boresight rotated boresight_offset_deg (perpendicular road setup), and
    the BS sits abeam the path midpoint.
    """
    if peak_rate_deg_s <= 0:
        raise ConfigError("peak rate must be positive")
    standoff = speed_mps / math.radians(peak_rate_deg_s)
    start = Pose(0.0, -path_length_m / 2.0, math.radians(boresight_offset_deg))
    traj = linear_path_trajectory(start, speed_mps, path_length_m, heading=0.0)
    return traj, (standoff, 0.0)


def waypoint_trajectory(rows: Sequence[tuple[float, float, float, float]]) -> Trajectory:
    if len(rows) < 2:
        raise ConfigError("need at least two waypoints")
    rows = tuple(sorted(rows, key=lambda r: r[0]))
    if rows[0][0] != 0.0:
        raise ConfigError("first waypoint must be at t=0")
    return Trajectory(kind="waypoint_list", duration_s=rows[-1][0], waypoints=rows)


def load_waypoints(path: str) -> Trajectory:
    """Read a plain-text table: time_s x_m y_m yaw_deg (one row per sample)."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ConfigError(f"{path}:{lineno}: expected 4 columns")
            t, x, y, yaw_deg = (float(p) for p in parts)
            rows.append((t, x, y, math.radians(yaw_deg)))
    return waypoint_trajectory(rows)


def pose_at(traj: Trajectory, t: float) -> Pose:
    """Closed-form pose at time t in [0, duration]."""
    if not (0.0 <= t <= traj.duration_s):
        raise OutOfRange(f"t={t} outside [0, {traj.duration_s}]")
    if traj.kind == "rotation":
        p = traj.start_pose
        return Pose(p.x, p.y, p.yaw + math.radians(traj.angular_speed_deg_s) * t)
    if traj.kind == "linear_path":
        p = traj.start_pose
        dx = math.sin(traj.heading) * traj.speed_mps * t
        dy = math.cos(traj.heading) * traj.speed_mps * t
        return Pose(p.x + dx, p.y + dy, p.yaw)
    # waypoint_list: linear interpolation between bracketing samples
    rows = traj.waypoints
    for i in range(len(rows) - 1):
        t0, x0, y0, a0 = rows[i]
        t1, x1, y1, a1 = rows[i + 1]
        if t0 <= t <= t1:
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            da = wrap_angle(a1 - a0)
            return Pose(x0 + f * (x1 - x0), y0 + f * (y1 - y0), a0 + f * da)
    return Pose(rows[-1][1], rows[-1][2], rows[-1][3])


def angular_rate_at(traj: Trajectory, t: float, bs_position: tuple[float, float]) -> float:
    """Instantaneous |d/dt| of the BS bearing in the UE radio frame, deg/s."""
    if traj.kind == "rotation":
        pose_at(traj, t)  # range check
        p = traj.start_pose
        if p.position == tuple(bs_position):
            raise DegenerateGeometry("UE coincides with BS")
        return traj.angular_speed_deg_s
    if traj.kind == "linear_path":
        pose = pose_at(traj, t)
        dx = bs_position[0] - pose.x
        dy = bs_position[1] - pose.y
        if dx == 0.0 and dy == 0.0:
            raise DegenerateGeometry("UE coincides with BS")
        vx = math.sin(traj.heading) * traj.speed_mps
        vy = math.cos(traj.heading) * traj.speed_mps
        # bearing = atan2(dx, dy); d(dx)/dt = -vx, d(dy)/dt = -vy
        rate = (-vx * dy + vy * dx) / (dx * dx + dy * dy)
        return abs(math.degrees(rate))
    # waypoint traces: central difference on the relative bearing
    h = min(1e-3, traj.duration_s / 100.0)
    t0 = max(0.0, t - h)
    t1 = min(traj.duration_s, t + h)
    p0 = pose_at(traj, t0)
    p1 = pose_at(traj, t1)
    b0 = wrap_angle(bearing(p0.position, tuple(bs_position)) - p0.yaw)
    b1 = wrap_angle(bearing(p1.position, tuple(bs_position)) - p1.yaw)
    return abs(math.degrees(wrap_angle(b1 - b0) / (t1 - t0)))
