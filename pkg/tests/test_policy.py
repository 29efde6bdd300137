import math

import numpy as np
import pytest

from cambeam.channel import ChannelConfig, LinkState, measure_snr
from cambeam.codebook import UlaConfig, make_uniform_beambook, steering_vector
from cambeam.errors import ConfigError, ModelNotReady
from cambeam.mlp import TrainConfig, init_model, train_mlp
from cambeam.policy import (SessionMemory, build_features, camera_only_select,
                            exhaustive_oracle, local_beam_refinement,
                            ma_select, make_pairer, mlp_select,
                            nr_hierarchical_select, round_half_away,
                            sector_weights)

IDENT = lambda k: k  # noqa: E731  identity pairing for scripted ports


class ScriptPort:
    """Measurement port driven by a {k_ue: snr} table; logs the visit order."""

    def __init__(self, table, default=-100.0):
        self.table = dict(table)
        self.default = default
        self.calls = []

    def measure(self, k_ue, k_bs):
        self.calls.append(k_ue)
        return self.table.get(k_ue, self.default)

    def measure_weights(self, w_ue, w_bs):  # pragma: no cover - not scripted
        raise AssertionError("scripted port only supports indexed measurements")


class LinkPort:
    """Port backed by a fixed deterministic channel realization."""

    def __init__(self, link, ue_book, bs_book, cfg):
        self.link, self.ue_book, self.bs_book, self.cfg = link, ue_book, bs_book, cfg
        self.count = 0

    def measure_weights(self, w_ue, w_bs):
        self.count += 1
        return measure_snr(self.link, w_ue, w_bs, self.cfg)

    def measure(self, k_ue, k_bs):
        return self.measure_weights(self.ue_book.weights[k_ue],
                                    self.bs_book.weights[k_bs])


def _los_link(theta_ue, theta_bs, ula_bs, ula_ue, gain=1.0):
    a_bs = steering_vector(theta_bs, ula_bs)
    a_ue = steering_vector(theta_ue, ula_ue)
    h = gain * math.sqrt(ula_bs.n_elements * ula_ue.n_elements) * np.outer(
        a_bs, a_ue.conj())
    return LinkState(h, theta_ue, theta_bs, 1.0)


def test_round_half_away():
    assert round_half_away(0.5) == 1
    assert round_half_away(-0.5) == -1
    assert round_half_away(1.5) == 2
    assert round_half_away(-1.5) == -2
    assert round_half_away(2.4) == 2
    assert round_half_away(-2.4) == -2
    assert round_half_away(0.0) == 0


def test_session_memory_window_and_mean():
    mem = SessionMemory(window=3)
    for o in (1, 2, 3, 4):
        mem.append(o)
    assert list(mem.offsets) == [2, 3, 4]
    assert mem.mean_offset() == pytest.approx(3.0)
    assert len(mem) == 3


def test_camera_only_single_measurement():
    port = ScriptPort({5: 12.0})
    dec = camera_only_select(5, 10.0, port, IDENT)
    assert (dec.k_ue, dec.n_beams, dec.met_threshold) == (5, 1, True)
    dec = camera_only_select(5, 20.0, ScriptPort({5: 12.0}), IDENT)
    assert dec.n_beams == 1 and not dec.met_threshold  # accepts anyway


def test_ma_accepts_predicted_beam_first():
    mem = SessionMemory()
    port = ScriptPort({7: 15.0})
    dec = ma_select(7, 10.0, mem, port, IDENT, 16)
    assert (dec.k_ue, dec.n_beams, dec.met_threshold) == (7, 1, True)
    assert port.calls == [7]
    assert len(mem) == 0  # no refinement happened, no offset recorded


def test_ma_empty_history_goes_straight_to_refinement():
    mem = SessionMemory()
    # predicted beam 8 fails; +1 fails; -1 fails; +2 succeeds
    port = ScriptPort({8: 0.0, 9: 1.0, 7: 2.0, 10: 30.0})
    dec = ma_select(8, 10.0, mem, port, IDENT, 16)
    assert port.calls == [8, 9, 7, 10]
    assert (dec.k_ue, dec.n_beams, dec.met_threshold) == (10, 4, True)
    assert list(mem.offsets) == [2]  # signed offset from the sweep centre


def test_ma_history_adjustment_second():
    mem = SessionMemory(offsets=[2, 2, 1])  # mean 5/3 -> rounds to 2
    port = ScriptPort({8: 0.0, 10: 25.0})
    dec = ma_select(8, 10.0, mem, port, IDENT, 16)
    assert port.calls == [8, 10]
    assert (dec.k_ue, dec.n_beams, dec.met_threshold) == (10, 2, True)
    assert list(mem.offsets) == [2, 2, 1]  # adjustment success adds nothing


def test_ma_refinement_centers_on_adjusted_beam():
    mem = SessionMemory(offsets=[-1])
    # b_pred=8, b_adj=7 fails, sweep around 7: 8, 6, 9 (succeeds)
    port = ScriptPort({8: 0.0, 7: 1.0, 6: 2.0, 9: 40.0})
    dec = ma_select(8, 10.0, mem, port, IDENT, 16)
    assert port.calls == [8, 7, 8, 6, 9]
    assert dec.k_ue == 9 and dec.n_beams == 5 and dec.met_threshold
    assert list(mem.offsets) == [-1, 2]  # offset relative to the sweep centre


def test_ma_returns_best_seen_on_total_failure():
    mem = SessionMemory()
    table = {k: float(-k) for k in range(16)}  # all below threshold
    port = ScriptPort(table)
    dec = ma_select(8, 100.0, mem, port, IDENT, 16, delta_max=3)
    # sweep visits 9,7,10,6,11,5; best (largest -k) is 5
    assert dec.k_ue == 5 and not dec.met_threshold
    assert dec.n_beams == 1 + 6
    assert len(mem) == 0  # failures never pollute the history


def test_ma_worst_case_measurement_budget():
    mem = SessionMemory(offsets=[1])
    port = ScriptPort({}, default=-100.0)
    for delta_max in (1, 3, 5):
        p = ScriptPort({}, default=-100.0)
        ma_select(8, 100.0, SessionMemory(offsets=[1]), p, IDENT, 32, delta_max)
        assert len(p.calls) <= 2 + 2 * delta_max


def test_refinement_skips_edge_candidates():
    mem = SessionMemory()
    port = ScriptPort({}, default=-100.0)
    dec = local_beam_refinement(0, 10.0, port, IDENT, 16, 2, mem)
    assert port.calls == [1, 2]  # -1 and -2 are off the low edge
    assert dec.n_beams == 2 and not dec.met_threshold


def test_refinement_all_off_edge_measures_centre():
    mem = SessionMemory()
    port = ScriptPort({0: 5.0})
    dec = local_beam_refinement(0, 1.0, port, IDENT, 1, 3, mem)
    assert port.calls == [0]
    assert dec.k_ue == 0 and dec.met_threshold and dec.n_beams == 1


def test_refinement_invalid_delta_max():
    with pytest.raises(ConfigError):
        local_beam_refinement(0, 0.0, ScriptPort({}), IDENT, 8, 0, SessionMemory())


def test_ma_rejects_missing_prediction():
    with pytest.raises(ConfigError):
        ma_select(None, 0.0, SessionMemory(), ScriptPort({}), IDENT, 8)


def test_mlp_select_requires_trained_model():
    model = init_model((5, 8, 8), 0.0, seed=0)
    with pytest.raises(ModelNotReady):
        mlp_select(3, 0.0, model, np.zeros(5), ScriptPort({}), IDENT, 8)


def _offset_model(offset):
    """Train a tiny regressor that always predicts a constant offset."""
    rng = np.random.default_rng(0)
    data = [(rng.uniform(-1, 1, 5), float(offset)) for _ in range(64)]
    return train_mlp(data, TrainConfig(lr=5e-3, epochs=300, batch=64,
                                       dropout_p=0.0, seed=0, hidden=(8, 8)))


def test_mlp_select_applies_learned_offset():
    model = _offset_model(2.0)
    port = ScriptPort({8: 0.0, 10: 30.0})
    mem = SessionMemory()
    dec = mlp_select(8, 10.0, model, np.zeros(5), port, IDENT, 16, memory=mem)
    assert port.calls == [8, 10]
    assert dec.k_ue == 10 and dec.n_beams == 2 and dec.met_threshold


def test_mlp_select_zero_offset_skips_remeasure():
    model = _offset_model(0.0)
    port = ScriptPort({8: 0.0, 9: 30.0})
    dec = mlp_select(8, 10.0, model, np.zeros(5), port, IDENT, 16)
    # b_adj == b_pred, so refinement starts immediately with +1
    assert port.calls == [8, 9]
    assert dec.k_ue == 9 and dec.n_beams == 2


def test_exhaustive_measures_all_pairs_and_breaks_ties_low():
    table = {}
    port = ScriptPort(table, default=7.5)  # every pair identical
    dec = exhaustive_oracle(port, 4, 3)
    assert len(port.calls) == 12
    assert (dec.k_ue, dec.k_bs) == (0, 0)
    assert dec.n_beams == 12


def test_exhaustive_finds_unique_peak():
    class PairPort:
        def __init__(self):
            self.count = 0

        def measure(self, k_ue, k_bs):
            self.count += 1
            return 20.0 if (k_ue, k_bs) == (2, 5) else -5.0

        def measure_weights(self, w_ue, w_bs):  # pragma: no cover
            raise AssertionError

    port = PairPort()
    dec = exhaustive_oracle(port, 4, 8, gamma_th=0.0)
    assert (dec.k_ue, dec.k_bs, dec.met_threshold) == (2, 5, True)
    assert port.count == 32


def test_sector_weights_subarray_width():
    book = make_uniform_beambook(64, -0.8, 0.8, UlaConfig(64))
    ws = sector_weights(book, 8)
    assert len(ws) == 8
    for w in ws:
        assert np.count_nonzero(w) == 8  # 64/8-element subarray
        assert np.vdot(w, w).real == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        sector_weights(book, 7)


def test_nr_hierarchical_count_and_agreement_with_exhaustive():
    span = math.radians(45.0)
    ula = UlaConfig(64)
    book = make_uniform_beambook(64, -span, span, ula)
    cfg = ChannelConfig()
    # generic angles (exact beam midpoints would tie and break arbitrarily)
    for theta in (0.05, 0.2, -0.35, 0.6):
        link = _los_link(theta, -theta, ula, ula)
        port = LinkPort(link, book, book, cfg)
        dec = nr_hierarchical_select(port, book, book, 8, gamma_th=1e9)
        assert port.count == 8 + 8 * 8  # sector sweep + full narrow sweep
        ex = exhaustive_oracle(LinkPort(link, book, book, cfg), 64, 64)
        assert (dec.k_ue, dec.k_bs) == (ex.k_ue, ex.k_bs)
        assert dec.snr_db == pytest.approx(ex.snr_db)


def test_nr_hierarchical_rejects_bad_sector_count():
    book = make_uniform_beambook(64, -0.8, 0.8, UlaConfig(64))
    with pytest.raises(ConfigError):
        nr_hierarchical_select(ScriptPort({}), book, book, 7, 0.0)


def test_make_pairer_mirrors_indices():
    book = make_uniform_beambook(16, -0.7, 0.7, UlaConfig(16))
    pair = make_pairer(book, book)
    for k in range(16):
        assert pair(k) == 15 - k


def test_build_features_layout():
    mem = SessionMemory(offsets=[3, -1])
    f = build_features(10, 64, mem, 4.5)
    center = 31.5
    assert f.shape == (5,)
    assert f[0] == pytest.approx((10 - center) / center)
    assert list(f[1:4]) == [-1.0, 3.0, 0.0]  # newest first, zero padded
    assert f[4] == 4.5
