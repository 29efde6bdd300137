"""LoS uplink channel, received-signal model, and beam-pair SNR.

The channel is rank-1 line-of-sight with free-space path loss, optionally
perturbed by Rician small-scale fading. The pilot is unit power; transmit
power enters the SNR as a dB offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebook import UlaConfig, steering_vector
from .errors import DegenerateGeometry, ShapeError

SPEED_OF_LIGHT = 299_792_458.0

# |w^H H w| can be exactly zero for orthogonal on-grid beams; floor before log.
_AMPLITUDE_FLOOR = 1e-150


@dataclass(frozen=True)
class ChannelConfig:
    carrier_frequency_hz: float = 60e9
    tx_power_dbm: float = 20.0
    noise_power_dbm: float = -84.0
    rician_k_db: float = math.inf  # +inf disables fading
    seed: int = 0


@dataclass(frozen=True)
class LinkState:
    h_matrix: np.ndarray  # (N_B, N_U)
    theta_ue_true: float
    theta_bs_true: float
    path_gain: complex
    timestamp: float = 0.0


def friis_amplitude(distance_m: float, carrier_frequency_hz: float) -> float:
    """Free-space amplitude gain lambda / (4 pi d)."""
    lam = SPEED_OF_LIGHT / carrier_frequency_hz
    return lam / (4.0 * math.pi * distance_m)


def realize_channel(theta_ue: float, theta_bs: float, distance_m: float,
                    config: ChannelConfig, ula_bs: UlaConfig, ula_ue: UlaConfig,
                    rng: np.random.Generator, timestamp: float = 0.0) -> LinkState:
    """Draw one channel realization for the given geometry.

    With fading disabled the matrix is exactly the rank-1 outer product
    sqrt(N_B*N_U) * alpha * a_B(theta_bs) a_U(theta_ue)^H.
    """
    if distance_m <= 0:
        raise DegenerateGeometry("distance must be positive")
    alpha = complex(friis_amplitude(distance_m, config.carrier_frequency_hz))
    a_bs = steering_vector(theta_bs, ula_bs)
    a_ue = steering_vector(theta_ue, ula_ue)
    scale = math.sqrt(ula_bs.n_elements * ula_ue.n_elements)
    h_los = scale * alpha * np.outer(a_bs, a_ue.conj())
    if math.isinf(config.rician_k_db):
        h = h_los
    else:
        k_lin = 10.0 ** (config.rician_k_db / 10.0)
        shape = (ula_bs.n_elements, ula_ue.n_elements)
        # per-entry variance |alpha|^2 keeps E||H_nlos||_F^2 == ||H_los||_F^2
        h_nlos = abs(alpha) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
        h = math.sqrt(k_lin / (k_lin + 1.0)) * h_los + math.sqrt(1.0 / (k_lin + 1.0)) * h_nlos
    return LinkState(h, theta_ue, theta_bs, alpha, timestamp)


def measure_snr(link: LinkState, w_ue: np.ndarray, w_bs: np.ndarray,
                config: ChannelConfig) -> float:
    """Beam-pair SNR in dB: tx power plus combining gain minus noise power."""
    n_bs, n_ue = link.h_matrix.shape
    if w_bs.shape != (n_bs,) or w_ue.shape != (n_ue,):
        raise ShapeError(f"weights {w_bs.shape}/{w_ue.shape} do not match channel {link.h_matrix.shape}")
    amp = abs(np.vdot(w_bs, link.h_matrix @ w_ue))
    amp = max(amp, _AMPLITUDE_FLOOR)
    return config.tx_power_dbm + 20.0 * math.log10(amp) - config.noise_power_dbm
