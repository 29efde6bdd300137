"""ULA steering vectors and fixed overlapping beambooks for both link ends."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import wrap_angle


@dataclass(frozen=True)
class UlaConfig:
    n_elements: int
    element_spacing_wavelengths: float = 0.5

    def __post_init__(self) -> None:
        if self.n_elements < 1:
            raise ConfigError("n_elements must be >= 1")
        if self.element_spacing_wavelengths <= 0:
            raise ConfigError("element spacing must be positive")


def steering_vector(theta: float, ula: UlaConfig) -> np.ndarray:
    """Unit-norm ULA response at azimuth theta (broadside convention).

    Element n carries phase 2*pi*spacing*n*sin(theta); magnitude 1/sqrt(N).
    """
    n = np.arange(ula.n_elements)
    phase = 2.0 * np.pi * ula.element_spacing_wavelengths * n * math.sin(theta)
    return np.exp(1j * phase) / math.sqrt(ula.n_elements)


@dataclass(frozen=True)
class Beambook:
    """Ordered steering angles plus matched beamforming weights for a ULA.

    Weights are applied through a Hermitian inner product (w^H a), so the
    matched weight for angle theta is the steering vector itself.
    """

    angles: np.ndarray
    weights: np.ndarray  # shape (n_beams, n_elements)
    theta_min: float
    theta_max: float
    ula: UlaConfig = field(compare=False, default=UlaConfig(1))

    def __post_init__(self) -> None:
        if len(self.angles) != len(self.weights):
            raise ConfigError("angles and weights must have equal length")
        if np.any(np.diff(self.angles) <= 0):
            raise ConfigError("beambook angles must be strictly increasing")
        if np.any(self.angles < self.theta_min) or np.any(self.angles > self.theta_max):
            raise ConfigError("beambook angles must lie within [theta_min, theta_max]")
        norms = np.linalg.norm(self.weights, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ConfigError("beam weights must be unit norm")

    def __len__(self) -> int:
        return len(self.angles)


def make_uniform_beambook(count: int, theta_min: float, theta_max: float,
                          ula: UlaConfig) -> Beambook:
    """Uniform angle grid inclusive of both endpoints, matched weights per beam."""
    if count < 2:
        raise ConfigError("a beambook needs at least 2 beams")
    if theta_min >= theta_max:
        raise ConfigError("theta_min must be below theta_max")
    angles = np.linspace(theta_min, theta_max, count)
    weights = np.stack([steering_vector(a, ula) for a in angles])
    return Beambook(angles, weights, theta_min, theta_max, ula)


def quantize_to_beam(theta_rcs: float, book: Beambook) -> int:
    """Index of the beam closest in angle; ties and out-of-span inputs go to
    the lower / nearer endpoint index."""
    return int(np.argmin(np.abs(book.angles - theta_rcs)))


def opposite_azimuth_beam(k_ue: int, ue_book: Beambook, bs_book: Beambook) -> int:
    """BS beam paired with a UE beam under anti-parallel, facing boresights.

    The UE beam angle shifted by pi and expressed in the mirrored BS radio
    frame is simply its negation, which is then quantized onto the BS book.
    For identical symmetric books this is the mirrored index.
    """
    theta_bs_est = wrap_angle(-float(ue_book.angles[k_ue]))
    return quantize_to_beam(theta_bs_est, bs_book)
