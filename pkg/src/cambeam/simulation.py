"""Closed-loop engine: per-epoch detection, projection, initialization,
policy execution, timing charges, and offline/online evaluation modes.

Offline mode freezes the channel and geometry for the whole decision while
still charging alignment time. Online mode advances the clock before every
measurement and re-realizes geometry and fading, so stale predictions decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .channel import ChannelConfig, LinkState, measure_snr, realize_channel
from .codebook import Beambook, UlaConfig, make_uniform_beambook, quantize_to_beam
from .detection import Detector, DetectorConfig, SyntheticDetector, recovered_rcs_angle
from .errors import ConfigError
from .geometry import MountConfig, Pose, true_rcs_angles, wrap_angle
from .mlp import MlpModel
from .mobility import Trajectory, pose_at
from .policy import (MeasurementPort, PolicyDecision, SessionMemory,
                     build_features, camera_only_select, exhaustive_oracle,
                     ma_select, make_pairer, mlp_select, nr_hierarchical_select)

POLICIES = ("ma", "mlp", "camera-only", "nr-hier", "exhaustive")

RECORDS_SCHEMA = "cambeam-records-v1"
SUMMARY_SCHEMA = "cambeam-summary-v1"
RECORDS_HEADER = "t_s,policy,gamma_th_db,k_ue,k_bs,snr_db,margin_db,n_beams,T_b_s,outage"

MARGIN_GRID_DB = np.arange(-40.0, 40.5, 0.5)


@dataclass(frozen=True)
class TimingModel:
    """Latency charges; defaults make a 1-measurement decision total 0.231 s."""

    image_processing_s: float = 0.075
    beam_config_s: float = 0.050
    stabilize_measure_s: float = 0.050
    fixed_overhead_s: float = 0.056

    def __post_init__(self) -> None:
        for v in (self.image_processing_s, self.beam_config_s,
                  self.stabilize_measure_s, self.fixed_overhead_s):
            if v < 0:
                raise ConfigError("timing charges must be >= 0")

    @property
    def per_measurement_s(self) -> float:
        return self.beam_config_s + self.stabilize_measure_s

    def decision_time(self, n_beams: int) -> float:
        return (self.fixed_overhead_s + self.image_processing_s
                + n_beams * self.per_measurement_s)


@dataclass
class ScenarioConfig:
    scenario_id: str
    trajectory: Trajectory
    bs_pose: Pose
    detector_config: DetectorConfig
    seed: int = 0
    mode: str = "online"
    decision_period_s: float = 0.25
    policy: str = "ma"
    delta_max: int = 5
    memory_window: int = 5
    n_sectors: int = 8
    ue_ula: UlaConfig = UlaConfig(64)
    bs_ula: UlaConfig = UlaConfig(64)
    ue_beams: int = 64
    bs_beams: int = 64
    span_deg: float = 45.0  # beambooks cover +/- span_deg
    channel: ChannelConfig = ChannelConfig()
    mounts: MountConfig = MountConfig()
    timing: TimingModel = TimingModel()
    # keep the BS boresight anti-parallel to the UE's instantaneous radio
    # boresight (drive-by-equivalent geometry for in-place rotation sweeps,
    # where the opposite-azimuth pairing theta_bs = -theta_ue is exact)
    bs_antiparallel: bool = False
    threshold_kind: str = "quantile"  # quantile | absolute
    threshold_value: float = 0.90
    calibration_seed: int = 1000
    mlp_model: Optional[MlpModel] = None
    detector: Optional[Detector] = None  # defaults to the synthetic detector

    def __post_init__(self) -> None:
        if self.mode not in ("offline", "online"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}; choose from {POLICIES}")
        if self.threshold_kind not in ("quantile", "absolute"):
            raise ConfigError(f"unknown threshold kind {self.threshold_kind!r}")
        if self.threshold_kind == "quantile" and not (0.0 < self.threshold_value < 1.0):
            raise ConfigError("quantile must be in (0, 1)")
        if self.mode == "online" and self.decision_period_s < self.timing.decision_time(1):
            raise ConfigError("decision period below the minimum decision latency")

    def effective_bs_pose(self, ue_pose: Pose) -> Pose:
        if not self.bs_antiparallel:
            return self.bs_pose
        yaw = wrap_angle(ue_pose.yaw + self.mounts.radio_yaw_in_mcs + math.pi)
        return Pose(self.bs_pose.x, self.bs_pose.y, yaw)

    def build_books(self) -> tuple[Beambook, Beambook]:
        span = math.radians(self.span_deg)
        ue = make_uniform_beambook(self.ue_beams, -span, span, self.ue_ula)
        bs = make_uniform_beambook(self.bs_beams, -span, span, self.bs_ula)
        return ue, bs


@dataclass(frozen=True)
class AlignmentRecord:
    t: float
    policy: str
    decision: PolicyDecision
    gamma_th_db: float
    t_b: float
    outage: bool
    snr_margin_db: float


@dataclass(frozen=True)
class RunSummary:
    n_records: int
    outage_pct: float
    mean_tb_s: float
    median_tb_s: float
    mean_n_beams: float
    margin_grid_db: np.ndarray
    margin_cdf: np.ndarray


@dataclass
class RunResult:
    scenario_id: str
    policy: str
    seed: int
    gamma_th_db: float
    records: list[AlignmentRecord]
    summary: RunSummary
    total_measurements: int


class ScenarioPort:
    """MeasurementPort wired to a scenario's geometry and channel."""

    def __init__(self, scenario: ScenarioConfig, ue_book: Beambook,
                 bs_book: Beambook, rng: np.random.Generator):
        self.s = scenario
        self.ue_book = ue_book
        self.bs_book = bs_book
        self.rng = rng
        self.counter = 0
        self.clock = 0.0
        self._frozen: Optional[LinkState] = None

    def _link_at(self, t: float) -> LinkState:
        traj = self.s.trajectory
        pose = pose_at(traj, min(max(t, 0.0), traj.duration_s))
        bs_pose = self.s.effective_bs_pose(pose)
        theta_ue, theta_bs = true_rcs_angles(pose, bs_pose, self.s.mounts)
        d = math.dist(pose.position, bs_pose.position)
        return realize_channel(theta_ue, theta_bs, d, self.s.channel,
                               self.s.bs_ula, self.s.ue_ula, self.rng, timestamp=t)

    def begin_decision(self, t_epoch: float) -> None:
        self.clock = t_epoch
        if self.s.mode == "online":
            self.clock += self.s.timing.fixed_overhead_s + self.s.timing.image_processing_s
            self._frozen = None
        else:
            self._frozen = self._link_at(t_epoch)

    def measure_weights(self, w_ue: np.ndarray, w_bs: np.ndarray) -> float:
        self.counter += 1
        if self.s.mode == "online":
            self.clock += self.s.timing.per_measurement_s
            link = self._link_at(self.clock)
        else:
            link = self._frozen
        return measure_snr(link, w_ue, w_bs, self.s.channel)

    def measure(self, k_ue: int, k_bs: int) -> float:
        return self.measure_weights(self.ue_book.weights[k_ue],
                                    self.bs_book.weights[k_bs])


def _best_pair_snr(link: LinkState, ue_book: Beambook, bs_book: Beambook,
                   channel: ChannelConfig) -> float:
    """Vectorized best-pair SNR over the full beam grid (oracle equivalent)."""
    m = bs_book.weights.conj() @ link.h_matrix @ ue_book.weights.T
    amp = max(float(np.abs(m).max()), 1e-150)
    return channel.tx_power_dbm + 20.0 * math.log10(amp) - channel.noise_power_dbm


def compute_quantile_thresholds(scenario: ScenarioConfig,
                                quantiles: list[float]) -> list[float]:
    """Ground-truth SNR quantiles from a frozen-epoch exhaustive calibration pass."""
    for q in quantiles:
        if not (0.0 < q < 1.0):
            raise ConfigError(f"quantile {q} outside (0, 1)")
    ue_book, bs_book = scenario.build_books()
    rng = np.random.default_rng(scenario.calibration_seed)
    traj = scenario.trajectory
    times = np.arange(0.0, traj.duration_s + 1e-9, scenario.decision_period_s)
    if len(times) < 2:
        raise ConfigError("trajectory too short for calibration (need >= 2 epochs)")
    best: list[float] = []
    for t in times:
        pose = pose_at(traj, min(float(t), traj.duration_s))
        bs_pose = scenario.effective_bs_pose(pose)
        theta_ue, theta_bs = true_rcs_angles(pose, bs_pose, scenario.mounts)
        d = math.dist(pose.position, bs_pose.position)
        link = realize_channel(theta_ue, theta_bs, d, scenario.channel,
                               scenario.bs_ula, scenario.ue_ula, rng, timestamp=float(t))
        best.append(_best_pair_snr(link, ue_book, bs_book, scenario.channel))
    arr = np.array(best)
    return [float(np.quantile(arr, q)) for q in quantiles]


def resolve_threshold(scenario: ScenarioConfig) -> float:
    """gamma_th for the scenario's threshold spec.

    A quantile spec q is an availability target: gamma_th is set where a
    fraction q of the calibrated best-pair SNRs lies above it, so an ideal
    policy sees outage 1 - q by construction.
    """
    if scenario.threshold_kind == "absolute":
        return float(scenario.threshold_value)
    return quantile_threshold(scenario, scenario.threshold_value)


def quantile_threshold(scenario: ScenarioConfig, q: float) -> float:
    """Availability-q threshold (the 1-q empirical quantile)."""
    return compute_quantile_thresholds(scenario, [1.0 - q])[0]


def run_scenario(scenario: ScenarioConfig,
                 gamma_th_db: Optional[float] = None,
                 offset_log: Optional[list] = None) -> RunResult:
    """Execute the closed loop over the whole trajectory.

    gamma_th_db overrides threshold resolution (used when the caller already
    calibrated quantiles once for several runs). offset_log, when given,
    collects (features, realized beam offset) pairs for regressor training.
    """
    if gamma_th_db is None:
        gamma_th_db = resolve_threshold(scenario)
    ue_book, bs_book = scenario.build_books()
    pair = make_pairer(ue_book, bs_book)
    rng = np.random.default_rng(scenario.seed)
    detector = scenario.detector or SyntheticDetector(scenario.detector_config)
    port = ScenarioPort(scenario, ue_book, bs_book, rng)
    memory = SessionMemory(window=scenario.memory_window)
    intr = scenario.detector_config.intrinsics
    records: list[AlignmentRecord] = []
    prev_obs: Optional[tuple[float, float]] = None  # (t, theta_rcs)
    traj = scenario.trajectory

    t = 0.0
    while t <= traj.duration_s + 1e-9:
        t_epoch = min(t, traj.duration_s)
        pose = pose_at(traj, t_epoch)
        det = detector.detect(pose, scenario.bs_pose.position,
                              scenario.mounts.camera_yaw_in_mcs, t_epoch, rng)
        b_pred: Optional[int] = None
        rate_deg_s = 0.0
        if det is not None:
            theta_rcs = recovered_rcs_angle(det, intr,
                                            scenario.mounts.camera_yaw_in_mcs,
                                            scenario.mounts.radio_yaw_in_mcs)
            b_pred = quantize_to_beam(theta_rcs, ue_book)
            if prev_obs is not None and t_epoch > prev_obs[0]:
                rate_deg_s = math.degrees(
                    wrap_angle(theta_rcs - prev_obs[1])) / (t_epoch - prev_obs[0])
            prev_obs = (t_epoch, theta_rcs)

        features = None
        if b_pred is not None:
            features = build_features(b_pred, len(ue_book), memory, rate_deg_s)
        port.begin_decision(t_epoch)
        decision = _dispatch(scenario, b_pred, gamma_th_db, memory, port, pair,
                             ue_book, bs_book, rate_deg_s)
        if offset_log is not None and features is not None:
            offset_log.append((features, float(decision.k_ue - b_pred)))
        memory.last_pair = (decision.k_ue, decision.k_bs)
        t_b = scenario.timing.decision_time(decision.n_beams)
        records.append(AlignmentRecord(
            t=t_epoch, policy=scenario.policy, decision=decision,
            gamma_th_db=gamma_th_db, t_b=t_b,
            outage=not decision.met_threshold,
            snr_margin_db=gamma_th_db - decision.snr_db))
        t_next = t + scenario.decision_period_s
        if scenario.mode == "online":
            t_next = max(t_next, t_epoch + t_b)
        if t >= traj.duration_s:
            break
        t = t_next

    summary = summarize(records)
    return RunResult(scenario.scenario_id, scenario.policy, scenario.seed,
                     gamma_th_db, records, summary, port.counter)


def _dispatch(scenario: ScenarioConfig, b_pred: Optional[int], gamma_th: float,
              memory: SessionMemory, port: ScenarioPort, pair,
              ue_book: Beambook, bs_book: Beambook,
              rate_deg_s: float) -> PolicyDecision:
    policy = scenario.policy
    if policy == "exhaustive":
        return exhaustive_oracle(port, len(ue_book), len(bs_book), gamma_th)
    if policy == "nr-hier":
        return nr_hierarchical_select(port, ue_book, bs_book,
                                      scenario.n_sectors, gamma_th)
    if b_pred is None:
        if memory.last_pair is not None:
            # camera missed this frame: hold the previous decision's beam
            b_pred = memory.last_pair[0]
        else:
            # cold start with no detection: full hierarchical sweep, flagged
            dec = nr_hierarchical_select(port, ue_book, bs_book,
                                         scenario.n_sectors, gamma_th)
            return replace(dec, fallback=True)
    if policy == "camera-only":
        return camera_only_select(b_pred, gamma_th, port, pair)
    if policy == "ma":
        return ma_select(b_pred, gamma_th, memory, port, pair, len(ue_book),
                         scenario.delta_max)
    if policy == "mlp":
        if scenario.mlp_model is None:
            raise ConfigError("policy 'mlp' requires a trained model")
        features = build_features(b_pred, len(ue_book), memory, rate_deg_s)
        return mlp_select(b_pred, gamma_th, scenario.mlp_model, features, port,
                          pair, len(ue_book), scenario.delta_max, memory)
    raise ConfigError(f"unhandled policy {policy!r}")


def summarize(records: list[AlignmentRecord]) -> RunSummary:
    if not records:
        raise ConfigError("cannot summarize an empty record list")
    tb = np.array([r.t_b for r in records])
    margins = np.array([r.snr_margin_db for r in records])
    outage = np.array([r.outage for r in records])
    cdf = np.array([(margins <= x).mean() for x in MARGIN_GRID_DB])
    return RunSummary(
        n_records=len(records),
        outage_pct=100.0 * float(outage.mean()),
        mean_tb_s=float(tb.mean()),
        median_tb_s=float(np.median(tb)),
        mean_n_beams=float(np.mean([r.decision.n_beams for r in records])),
        margin_grid_db=MARGIN_GRID_DB.copy(),
        margin_cdf=cdf,
    )


def records_csv_lines(result: RunResult) -> list[str]:
    lines = [
        f"# schema={RECORDS_SCHEMA}",
        f"# scenario={result.scenario_id} seed={result.seed} policy={result.policy}",
        RECORDS_HEADER,
    ]
    for r in result.records:
        d = r.decision
        lines.append(",".join([
            repr(r.t), r.policy, repr(r.gamma_th_db), str(d.k_ue), str(d.k_bs),
            repr(d.snr_db), repr(r.snr_margin_db), str(d.n_beams), repr(r.t_b),
            "1" if r.outage else "0",
        ]))
    return lines


def write_records_csv(result: RunResult, path: str) -> None:
    # streamed line by line so long runs stay inspectable mid-flight
    with open(path, "w") as fh:
        for line in records_csv_lines(result):
            fh.write(line + "\n")
            fh.flush()


def write_summary_csv(results: list[RunResult], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"# schema={SUMMARY_SCHEMA}\n")
        fh.write("scenario,policy,seed,gamma_th_db,n_records,outage_pct,"
                 "mean_tb_s,median_tb_s,mean_n_beams\n")
        for res in results:
            s = res.summary
            fh.write(",".join([
                res.scenario_id, res.policy, str(res.seed), repr(res.gamma_th_db),
                str(s.n_records), repr(s.outage_pct), repr(s.mean_tb_s),
                repr(s.median_tb_s), repr(s.mean_n_beams),
            ]) + "\n")
