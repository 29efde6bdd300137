import math

import numpy as np
import pytest

from cambeam.codebook import (Beambook, UlaConfig, make_uniform_beambook,
                              opposite_azimuth_beam, quantize_to_beam,
                              steering_vector)
from cambeam.errors import ConfigError

ULA16 = UlaConfig(16)
SPAN = math.radians(45.0)


def test_steering_broadside_uniform():
    v = steering_vector(0.0, UlaConfig(4))
    assert np.allclose(v, np.full(4, 0.5))


def test_steering_single_element():
    assert np.allclose(steering_vector(1.2, UlaConfig(1)), [1.0])


def test_steering_unit_norm_random_angles():
    rng = np.random.default_rng(0)
    for theta in rng.uniform(-math.pi / 2, math.pi / 2, 100):
        v = steering_vector(theta, ULA16)
        assert abs(np.vdot(v, v).real - 1.0) < 1e-12


def test_uniform_book_three_beams():
    book = make_uniform_beambook(3, -SPAN, SPAN, ULA16)
    assert np.allclose(np.degrees(book.angles), [-45.0, 0.0, 45.0])


def test_uniform_book_64_spacing():
    # 64 beams over +/-45 deg => 90/63 deg spacing (step is derived, not fixed)
    book = make_uniform_beambook(64, -SPAN, SPAN, UlaConfig(64))
    steps = np.degrees(np.diff(book.angles))
    assert np.allclose(steps, 90.0 / 63.0)
    assert len(book) == 64


def test_book_invariants():
    book = make_uniform_beambook(16, -SPAN, SPAN, ULA16)
    assert np.all(np.diff(book.angles) > 0)
    assert np.allclose(np.linalg.norm(book.weights, axis=1), 1.0, atol=1e-12)
    with pytest.raises(ConfigError):
        make_uniform_beambook(1, -SPAN, SPAN, ULA16)
    with pytest.raises(ConfigError):
        Beambook(np.array([0.2, 0.1]), np.eye(2, dtype=complex), -1, 1)


def test_adjacent_beam_crossover_below_peak():
    # the gain at the midpoint between two adjacent beams stays below either peak
    book = make_uniform_beambook(16, -SPAN, SPAN, ULA16)
    for k in range(len(book) - 1):
        mid = 0.5 * (book.angles[k] + book.angles[k + 1])
        a_mid = steering_vector(mid, ULA16)
        peak = abs(np.vdot(book.weights[k], steering_vector(book.angles[k], ULA16)))
        cross = abs(np.vdot(book.weights[k], a_mid))
        assert cross < peak


def test_quantize_exact_and_midpoint_tiebreak():
    book = make_uniform_beambook(5, -1.0, 1.0, ULA16)  # angles -1,-.5,0,.5,1
    for k, a in enumerate(book.angles):
        assert quantize_to_beam(float(a), book) == k
    assert quantize_to_beam(0.25, book) == 2  # midpoint of beams 2,3 -> lower index
    assert quantize_to_beam(5.0, book) == 4  # clamps to endpoint
    assert quantize_to_beam(-5.0, book) == 0


def test_quantize_matches_linear_scan_oracle():
    book = make_uniform_beambook(64, -SPAN, SPAN, ULA16)
    rng = np.random.default_rng(1)
    for theta in rng.uniform(-1.2, 1.2, 10_000):
        best, best_d = 0, math.inf
        for k, a in enumerate(book.angles):
            d = abs(a - theta)
            if d < best_d:
                best, best_d = k, d
        assert quantize_to_beam(theta, book) == best


def test_quantization_error_bounded_by_half_spacing():
    book = make_uniform_beambook(64, -SPAN, SPAN, ULA16)
    half = (book.angles[1] - book.angles[0]) / 2
    rng = np.random.default_rng(2)
    for theta in rng.uniform(-SPAN, SPAN, 2000):
        k = quantize_to_beam(theta, book)
        assert abs(book.angles[k] - theta) <= half + 1e-12


def test_opposite_azimuth_symmetric_books():
    book = make_uniform_beambook(64, -SPAN, SPAN, UlaConfig(64))
    # boresight beams sit either side of zero in an even-count book
    assert opposite_azimuth_beam(31, book, book) == 32
    assert opposite_azimuth_beam(32, book, book) == 31
    assert opposite_azimuth_beam(0, book, book) == 63  # leftmost -> rightmost
    assert opposite_azimuth_beam(63, book, book) == 0
    for k in range(64):
        assert opposite_azimuth_beam(k, book, book) == 63 - k


def test_opposite_azimuth_asymmetric_books_vs_geometric_oracle():
    ue_book = make_uniform_beambook(32, -SPAN, SPAN, UlaConfig(32))
    bs_book = make_uniform_beambook(64, -SPAN, SPAN, UlaConfig(64))
    for k in range(32):
        # oracle: compute the BS-frame angle explicitly (negation under the
        # mirrored facing frame), then argmin-quantize
        theta_bs = -float(ue_book.angles[k])
        oracle = int(np.argmin(np.abs(bs_book.angles - theta_bs)))
        assert opposite_azimuth_beam(k, ue_book, bs_book) == oracle


def test_matched_pair_array_gain_identity():
    # |w_bs^H H w_ue|^2 == N_B * N_U for H with unit path gain at true angles
    for n_bs, n_ue in [(4, 4), (16, 8), (64, 64)]:
        ula_bs, ula_ue = UlaConfig(n_bs), UlaConfig(n_ue)
        theta_bs, theta_ue = 0.3, -0.2
        a_bs = steering_vector(theta_bs, ula_bs)
        a_ue = steering_vector(theta_ue, ula_ue)
        h = math.sqrt(n_bs * n_ue) * np.outer(a_bs, a_ue.conj())
        gain = abs(np.vdot(a_bs, h @ a_ue)) ** 2
        assert gain == pytest.approx(n_bs * n_ue, rel=1e-9)
