"""Beam-pair selection policies over a shared measurement interface.

All policies steer the UE beam index; the BS partner beam is implied by a
pairing function (opposite-azimuth by default) and every call to the port
measures the pair. Beam indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from collections import deque
from typing import Callable, Optional, Protocol

import numpy as np

from .codebook import Beambook, UlaConfig, opposite_azimuth_beam, quantize_to_beam, steering_vector
from .errors import ConfigError, ModelNotReady
from .mlp import MlpModel, mlp_forward


class MeasurementPort(Protocol):
    """Capability to measure the SNR of one beam pair.

    Every call increments the beams-measured counter by exactly one and, in
    online operation, advances simulated time by the per-measurement cost.
    """

    def measure(self, k_ue: int, k_bs: int) -> float: ...

    def measure_weights(self, w_ue: np.ndarray, w_bs: np.ndarray) -> float: ...


@dataclass
class SessionMemory:
    """Bounded FIFO of signed beam offsets from past successful refinements."""

    window: int = 5
    offsets: deque = field(default_factory=deque)
    last_pair: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        self.offsets = deque(self.offsets, maxlen=self.window)

    def append(self, offset: int) -> None:
        self.offsets.append(offset)

    def mean_offset(self) -> float:
        return sum(self.offsets) / len(self.offsets)

    def __len__(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class PolicyDecision:
    k_ue: int
    k_bs: int
    snr_db: float
    n_beams: int
    met_threshold: bool
    fallback: bool = False


PairFn = Callable[[int], int]


def make_pairer(ue_book: Beambook, bs_book: Beambook) -> PairFn:
    return lambda k_ue: opposite_azimuth_beam(k_ue, ue_book, bs_book)


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def camera_only_select(b_pred: int, gamma_th: float, port: MeasurementPort,
                       pair: PairFn) -> PolicyDecision:
    """Accept the camera-primed beam unconditionally after one measurement."""
    k_bs = pair(b_pred)
    gamma = port.measure(b_pred, k_bs)
    return PolicyDecision(b_pred, k_bs, gamma, 1, gamma >= gamma_th)


def local_beam_refinement(b_c: int, gamma_th: float, port: MeasurementPort,
                          pair: PairFn, n_beams_total: int, delta_max: int,
                          memory: SessionMemory) -> PolicyDecision:
    """Alternating +1, -1, +2, -2, ... sweep around b_c.

    Stops at the first candidate meeting the threshold and records its signed
    offset; otherwise returns the best candidate seen without touching the
    offset history. Candidates off the beambook edge are skipped unmeasured.
    """
    if delta_max < 1:
        raise ConfigError("delta_max must be >= 1")
    best_b: Optional[int] = None
    best_gamma = -math.inf
    n = 0
    for delta in range(1, delta_max + 1):
        for d in (+1, -1):
            b = b_c + d * delta
            if not (0 <= b < n_beams_total):
                continue
            gamma = port.measure(b, pair(b))
            n += 1
            if gamma >= gamma_th:
                memory.append(d * delta)
                return PolicyDecision(b, pair(b), gamma, n, True)
            if gamma > best_gamma:
                best_b, best_gamma = b, gamma
    if best_b is None:
        # every candidate was off the edge; fall back to the centre beam
        b = min(max(b_c, 0), n_beams_total - 1)
        gamma = port.measure(b, pair(b))
        return PolicyDecision(b, pair(b), gamma, n + 1, gamma >= gamma_th)
    return PolicyDecision(best_b, pair(best_b), best_gamma, n, False)


def ma_select(b_pred: Optional[int], gamma_th: float, memory: SessionMemory,
              port: MeasurementPort, pair: PairFn, n_beams_total: int,
              delta_max: int = 5) -> PolicyDecision:
    """Moving-average closed-loop selection.

    Measure the predicted beam and accept on threshold; otherwise try the
    history-adjusted beam, then local refinement. A missing prediction with
    empty memory is the caller's fallback case (raises ConfigError here).
    """
    if delta_max < 1:
        raise ConfigError("delta_max must be >= 1")
    if b_pred is None:
        raise ConfigError("no predicted beam; caller must handle the fallback")
    b_pred = min(max(b_pred, 0), n_beams_total - 1)
    gamma = port.measure(b_pred, pair(b_pred))
    n = 1
    if gamma >= gamma_th:
        return PolicyDecision(b_pred, pair(b_pred), gamma, n, True)
    if len(memory) > 0:
        b_adj = b_pred + round_half_away(memory.mean_offset())
        b_adj = min(max(b_adj, 0), n_beams_total - 1)
        gamma = port.measure(b_adj, pair(b_adj))
        n = 2
        if gamma >= gamma_th:
            return PolicyDecision(b_adj, pair(b_adj), gamma, n, True)
        inner = local_beam_refinement(b_adj, gamma_th, port, pair,
                                      n_beams_total, delta_max, memory)
    else:
        inner = local_beam_refinement(b_pred, gamma_th, port, pair,
                                      n_beams_total, delta_max, memory)
    return PolicyDecision(inner.k_ue, inner.k_bs, inner.snr_db,
                          n + inner.n_beams, inner.met_threshold)


def build_features(b_pred: int, n_beams_total: int, memory: SessionMemory,
                   angular_rate_deg_s: float) -> np.ndarray:
    """Default regressor inputs: normalized prediction, last three offsets
    (zero-padded, newest first), and the estimated bearing rate."""
    recent = list(memory.offsets)[-3:][::-1]
    recent += [0.0] * (3 - len(recent))
    center = (n_beams_total - 1) / 2.0
    return np.array([(b_pred - center) / max(center, 1.0), *recent, angular_rate_deg_s])


def mlp_select(b_pred: int, gamma_th: float, model: MlpModel,
               features: np.ndarray, port: MeasurementPort, pair: PairFn,
               n_beams_total: int, delta_max: int = 5,
               memory: Optional[SessionMemory] = None) -> PolicyDecision:
    """Learned-offset variant: on threshold failure apply the regressor's
    rounded offset, then fall back to local refinement."""
    if not model.trained:
        raise ModelNotReady("offset regressor is not trained")
    if memory is None:
        memory = SessionMemory()
    b_pred = min(max(b_pred, 0), n_beams_total - 1)
    gamma = port.measure(b_pred, pair(b_pred))
    n = 1
    if gamma >= gamma_th:
        return PolicyDecision(b_pred, pair(b_pred), gamma, n, True)
    offset = round_half_away(mlp_forward(features, model))
    b_adj = min(max(b_pred + offset, 0), n_beams_total - 1)
    if b_adj != b_pred:
        gamma = port.measure(b_adj, pair(b_adj))
        n += 1
        if gamma >= gamma_th:
            return PolicyDecision(b_adj, pair(b_adj), gamma, n, True)
    inner = local_beam_refinement(b_adj, gamma_th, port, pair,
                                  n_beams_total, delta_max, memory)
    return PolicyDecision(inner.k_ue, inner.k_bs, inner.snr_db,
                          n + inner.n_beams, inner.met_threshold)


def exhaustive_oracle(port: MeasurementPort, n_ue: int, n_bs: int,
                      gamma_th: float = -math.inf) -> PolicyDecision:
    """Measure every pair, return the argmax (lowest lexicographic on ties)."""
    best = (-math.inf, 0, 0)
    n = 0
    for k_ue in range(n_ue):
        for k_bs in range(n_bs):
            gamma = port.measure(k_ue, k_bs)
            n += 1
            if gamma > best[0]:
                best = (gamma, k_ue, k_bs)
    gamma, k_ue, k_bs = best
    return PolicyDecision(k_ue, k_bs, gamma, n, gamma >= gamma_th)


def sector_weights(book: Beambook, n_sectors: int) -> list[np.ndarray]:
    """Wide sector beams: subarray steered at each sector's centre angle.

    Using only N/n_sectors elements widens the main lobe by the same factor,
    giving genuine sector coverage rather than a renamed narrow beam.
    """
    n_beams = len(book)
    if n_beams % n_sectors != 0:
        raise ConfigError("n_sectors must divide the beam count")
    per = n_beams // n_sectors
    n_sub = max(1, book.ula.n_elements // n_sectors)
    sub = UlaConfig(n_sub, book.ula.element_spacing_wavelengths)
    out = []
    for s in range(n_sectors):
        center = float(book.angles[s * per:(s + 1) * per].mean())
        w = np.zeros(book.ula.n_elements, dtype=complex)
        w[:n_sub] = steering_vector(center, sub)
        out.append(w)
    return out


def nr_hierarchical_select(port: MeasurementPort, ue_book: Beambook,
                           bs_book: Beambook, n_sectors: int,
                           gamma_th: float) -> PolicyDecision:
    """Two-phase sweep: wide sector beams first, then every narrow pair
    inside the winning sector at both ends."""
    n_ue, n_bs = len(ue_book), len(bs_book)
    if n_ue % n_sectors or n_bs % n_sectors:
        raise ConfigError("n_sectors must divide both beam counts")
    per_ue = n_ue // n_sectors
    per_bs = n_bs // n_sectors
    ue_wide = sector_weights(ue_book, n_sectors)
    bs_wide = sector_weights(bs_book, n_sectors)

    def bs_sector_for(s_ue: int) -> int:
        center = float(ue_book.angles[s_ue * per_ue:(s_ue + 1) * per_ue].mean())
        k = quantize_to_beam(-center, bs_book)  # mirrored BS frame
        return k // per_bs

    best_sector = (-math.inf, 0)
    n = 0
    for s in range(n_sectors):
        gamma = port.measure_weights(ue_wide[s], bs_wide[bs_sector_for(s)])
        n += 1
        if gamma > best_sector[0]:
            best_sector = (gamma, s)
    s = best_sector[1]
    s_bs = bs_sector_for(s)
    best = (-math.inf, 0, 0)
    for k_ue in range(s * per_ue, (s + 1) * per_ue):
        for k_bs in range(s_bs * per_bs, (s_bs + 1) * per_bs):
            gamma = port.measure(k_ue, k_bs)
            n += 1
            if gamma > best[0]:
                best = (gamma, k_ue, k_bs)
    gamma, k_ue, k_bs = best
    return PolicyDecision(k_ue, k_bs, gamma, n, gamma >= gamma_th)
