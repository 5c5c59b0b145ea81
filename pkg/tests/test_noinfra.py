import math
from dataclasses import replace

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc

from gsdst.denoise import SimilarityKind
from gsdst.noinfra import (
    Association,
    Receiver,
    SimConfig,
    clean_sequence,
    component_arrays,
    constellation,
    draw_scenario,
    received_sequence,
    run_denoise_experiment,
    run_detection_experiment,
    run_ser_experiment,
)
from gsdst.noinfra.experiments import run_trials, trial_rng
from gsdst.noinfra.qam import qam_demodulate, qam_modulate
from gsdst.noinfra.receivers import LOST, noinfra_receive, ora_sic_receive


def _min_phase_gap(txs, cfg):
    _, r = component_arrays(txs, cfg)
    if r.size < 2:
        return np.inf
    gaps = np.abs(np.angle(r[:, None] / r[None, :])) + 10 * np.eye(r.size)
    return gaps.min()


class TestQAM:
    @pytest.mark.parametrize("M", [2, 4, 8, 16, 32, 64, 256])
    def test_unit_energy(self, M):
        assert np.mean(np.abs(constellation(M)) ** 2) == pytest.approx(1)
        assert np.unique(np.round(constellation(M), 12)).size == M

    def test_sixteen_qam_levels(self):
        points = constellation(16) * np.sqrt(10)
        npt.assert_allclose(sorted(set(np.round(points.real, 9))), [-3, -1, 1, 3])
        npt.assert_allclose(sorted(set(np.round(points.imag, 9))), [-3, -1, 1, 3])

    def test_rectangular_for_odd_bits(self):
        points = constellation(8)
        assert np.unique(np.round(points.real, 9)).size == 4
        assert np.unique(np.round(points.imag, 9)).size == 2

    @pytest.mark.parametrize("M", [4, 16, 64])
    def test_gray_neighbours_differ_in_one_bit(self, M):
        points = constellation(M)
        d = np.abs(points[:, None] - points[None, :])
        dmin = d[d > 1e-12].min()
        for i, j in zip(*np.nonzero(np.abs(d - dmin) < 1e-9)):
            assert bin(i ^ j).count("1") == 1

    @pytest.mark.parametrize("M", [2, 4, 16, 64])
    def test_round_trip(self, M):
        idx = np.arange(M)
        npt.assert_array_equal(qam_demodulate(qam_modulate(idx, M), M), idx)

    def test_scalar_forms(self):
        assert isinstance(qam_modulate(3, 16), complex)
        assert qam_demodulate(qam_modulate(3, 16), 16) == 3

    def test_invalid(self):
        with pytest.raises(ValueError):
            constellation(12)
        with pytest.raises(ValueError):
            qam_modulate(16, 16)
        with pytest.raises(TypeError):
            qam_modulate(1.5, 16)

    def test_awgn_ser_matches_closed_form(self):
        # square M-QAM: Pe = 1 - (1 - p)^2, p = 2(1 - 1/sqrt(M)) Q(sqrt(3 Es/N0 / (M-1)))
        M, snr_db, n = 16, 14.0, 200_000
        rng = np.random.default_rng(0)
        idx = rng.integers(M, size=n)
        es_n0 = 10 ** (snr_db / 10)
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(0.5 / es_n0)
        ser = np.mean(qam_demodulate(qam_modulate(idx, M) + noise, M) != idx)
        q = 0.5 * erfc(np.sqrt(3 * es_n0 / (M - 1)) / np.sqrt(2))
        p = 2 * (1 - 1 / np.sqrt(M)) * q
        expected = 1 - (1 - p) ** 2
        assert ser == pytest.approx(expected, rel=0.05)


class TestSimConfig:
    def test_defaults(self):
        cfg = SimConfig()
        assert cfg.sample_interval == pytest.approx(1e-6)
        assert cfg.samples_per_symbol == 30 and cfg.modulation_order == 16

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"modulation_order": 12},
            {"k": 0},
            {"trials": 0},
            {"sigma_db": -1},
            {"doppler_range": (1, -1)},
            {"bandwidth": 1e4},
            {"similarity": "nope"},
            {"epsilon": 0},
            {"noise_variance": -1},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)

    def test_dict_round_trip(self):
        cfg = SimConfig(k=3, similarity="full", receiver="orasic")
        assert SimConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_field(self):
        with pytest.raises(ValueError, match="unknown"):
            SimConfig.from_dict({"gamma": 3})


class TestScenario:
    def test_ranges(self):
        cfg = SimConfig(k=4, sigma_db=10)
        rng = np.random.default_rng(0)
        for _ in range(200):
            txs, nv = draw_scenario(cfg, rng)
            assert nv == 1.0
            for tx in txs:
                assert 1 / cfg.symbol_duration <= tx.f <= cfg.bandwidth
                assert abs(tx.f_tilde - tx.f) <= 1e3
                assert 0 <= tx.theta < 2 * np.pi
                assert tx.beta == pytest.approx(10 ** (tx.snr_db / 20))
                assert tx.subcarrier is None

    def test_grid_for_orthogonal_baseline(self):
        cfg = SimConfig(k=3)
        rng = np.random.default_rng(1)
        for _ in range(100):
            txs, _ = draw_scenario(cfg, rng, Receiver.ORA_SIC)
            for tx in txs:
                assert 1 <= tx.subcarrier <= cfg.samples_per_symbol
                assert tx.f == pytest.approx(tx.subcarrier / cfg.symbol_duration)

    def test_receivers_share_random_draws(self):
        cfg = SimConfig(k=3, sigma_db=5)
        a, _ = draw_scenario(cfg, np.random.default_rng(9), Receiver.NO_INFRA)
        b, _ = draw_scenario(cfg, np.random.default_rng(9), Receiver.ORA_SIC)
        for x, y in zip(a, b):
            assert (x.beta, x.symbol_index) == (y.beta, y.symbol_index)
            assert x.f_tilde - x.f == pytest.approx(y.f_tilde - y.f, abs=1e-6)

    def test_snr_statistics(self):
        cfg = SimConfig(k=2, gamma_db=20, sigma_db=10)
        rng = np.random.default_rng(2)
        snr = np.concatenate([[t.snr_db for t in draw_scenario(cfg, rng)[0]] for _ in range(20_000)])
        assert np.mean(snr) == pytest.approx(20, abs=0.2)
        assert np.std(snr) == pytest.approx(10, rel=0.02)

    def test_component_power_and_noise_variance(self):
        # averaged over many symbol periods the per-component power is beta^2
        cfg = SimConfig(k=1, gamma_db=10, doppler_range=(0, 0))
        rng = np.random.default_rng(3)
        powers, noise = [], []
        for _ in range(3400):  # > 1e5 samples
            txs, nv = draw_scenario(cfg, rng)
            clean = clean_sequence(txs, cfg)
            powers.append(np.mean(np.abs(clean) ** 2) / txs[0].beta ** 2)
            noise.append(np.mean(np.abs(received_sequence(txs, nv, cfg, rng) - clean) ** 2))
        assert np.mean(powers) == pytest.approx(1, rel=0.02)
        assert np.mean(noise) == pytest.approx(1, rel=0.02)

    def test_sequence_is_sum_of_geometric_components(self):
        cfg = SimConfig(k=3)
        txs, _ = draw_scenario(cfg, np.random.default_rng(4))
        a, r = component_arrays(txs, cfg)
        l = np.arange(cfg.samples_per_symbol)
        expected = sum(
            tx.beta * np.exp(1j * tx.theta) * tx.x * np.exp(2j * np.pi * tx.f_tilde * l * cfg.sample_interval)
            for tx in txs
        )
        npt.assert_allclose(clean_sequence(txs, cfg), expected, rtol=1e-12)


class TestNoInfraReceiver:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 5))
    def test_zero_noise_identity(self, seed, k):
        cfg = SimConfig(k=k, gamma_db=20, sigma_db=5)
        rng = np.random.default_rng(seed)
        while True:
            txs, _ = draw_scenario(cfg, rng)
            if _min_phase_gap(txs, cfg) > 0.2:
                break
        s = received_sequence(txs, 0.0, cfg, rng)
        decided = noinfra_receive(s, [(t.beta, t.theta) for t in txs], k, cfg)
        assert decided == [t.symbol_index for t in txs]

    def test_association_handles_equal_powers(self):
        cfg = SimConfig(k=3, gamma_db=30, sigma_db=0)
        rng = np.random.default_rng(5)
        for _ in range(50):
            txs, _ = draw_scenario(cfg, rng)
            if _min_phase_gap(txs, cfg) < 0.2:
                continue
            s = received_sequence(txs, 0.0, cfg, rng)
            assert noinfra_receive(s, [(t.beta, t.theta) for t in txs], 3, cfg) == [
                t.symbol_index for t in txs
            ]

    def test_magnitude_rule_available(self):
        cfg = SimConfig(k=2, gamma_db=30, sigma_db=10, association=Association.MAGNITUDE)
        txs, _ = draw_scenario(cfg, np.random.default_rng(6))
        s = received_sequence(txs, 0.0, cfg, np.random.default_rng(7))
        out = noinfra_receive(s, [(t.beta, t.theta) for t in txs], 2, cfg)
        assert len(out) == 2 and all(0 <= x < 16 for x in out)

    def test_failure_reports_lost(self):
        cfg = SimConfig(k=2)
        assert noinfra_receive(np.zeros(30), [(1.0, 0.0), (1.0, 0.0)], 2, cfg) == [LOST, LOST]


class TestOraSicReceiver:
    def _cfg(self, **kw):
        return SimConfig(doppler_range=(0, 0), **kw)

    def test_grid_subcarrier_has_no_leakage(self):
        cfg = self._cfg(k=1)
        txs, _ = draw_scenario(cfg, np.random.default_rng(0), Receiver.ORA_SIC)
        spectrum = np.fft.fft(clean_sequence(txs, cfg))
        own = txs[0].subcarrier % cfg.samples_per_symbol
        leak = np.delete(np.abs(spectrum), own)
        assert leak.max() < 1e-10 * np.abs(spectrum[own])

    def test_zero_noise_without_collision(self):
        cfg = self._cfg(k=3, gamma_db=10, sigma_db=3)
        rng = np.random.default_rng(1)
        for _ in range(200):
            txs, _ = draw_scenario(cfg, rng, Receiver.ORA_SIC)
            s = received_sequence(txs, 0.0, cfg, rng)
            if len({t.subcarrier for t in txs}) < 3:
                continue
            assert ora_sic_receive(s, txs, cfg) == [t.symbol_index for t in txs]

    def test_sic_resolves_collision_with_power_gap(self):
        cfg = self._cfg(k=2)
        rng = np.random.default_rng(2)
        txs, _ = draw_scenario(cfg, rng, Receiver.ORA_SIC)
        strong = replace(txs[0], subcarrier=5, f=5 / cfg.symbol_duration, f_tilde=5 / cfg.symbol_duration,
                         beta=1000.0, snr_db=60.0)
        weak = replace(txs[1], subcarrier=5, f=strong.f, f_tilde=strong.f_tilde, beta=10.0, snr_db=20.0)
        s = clean_sequence([strong, weak], cfg)
        assert ora_sic_receive(s, [strong, weak], cfg) == [strong.symbol_index, weak.symbol_index]

    def test_needs_grid(self):
        cfg = SimConfig(k=1)
        txs, _ = draw_scenario(cfg, np.random.default_rng(0), Receiver.NO_INFRA)
        with pytest.raises(ValueError):
            ora_sic_receive(np.zeros(30), txs, cfg)


def _square(t):
    return [t, t * t]


class TestExperiments:
    def test_run_trials_ordering_and_workers(self):
        npt.assert_array_equal(run_trials(_square, 7, workers=1), run_trials(_square, 7, workers=3))
        npt.assert_array_equal(run_trials(_square, 3)[:, 1], [0, 1, 4])

    def test_trial_streams_are_independent_of_point(self):
        a = trial_rng(SimConfig(gamma_db=10), 4).random()
        b = trial_rng(SimConfig(gamma_db=60), 4).random()
        assert a == b != trial_rng(SimConfig(), 5).random()

    def test_single_trial_ser_is_a_fraction_of_k(self):
        cfg = SimConfig(k=3, trials=1, gamma_db=5)
        table = run_ser_experiment(cfg, "gamma_db", [0, 5, 10]).table()
        for col in ("noinfra_ser", "orasic_ser"):
            for v in table.column(col):
                assert v * 3 == pytest.approx(round(v * 3))

    def test_ser_experiment_is_reproducible(self, tmp_path):
        cfg = SimConfig(k=2, trials=40, sigma_db=10)
        a = run_ser_experiment(cfg, "gamma_db", [20, 40])
        b = run_ser_experiment(cfg, "gamma_db", [20, 40], workers=2)
        a.table().write_csv(tmp_path / "a.csv")
        b.table().write_csv(tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert a.table().columns == ("gamma_db", "noinfra_ser", "orasic_ser")

    def test_ora_sic_zero_noise_zero_doppler(self):
        cfg = SimConfig(k=1, trials=200, doppler_range=(0, 0), noise_variance=0.0)
        table = run_ser_experiment(cfg, "gamma_db", [0, 30], [Receiver.ORA_SIC]).table()
        assert table.column("orasic_ser") == [0.0, 0.0]

    def test_detection_single_component(self):
        cfg = SimConfig(trials=100)
        table = run_detection_experiment(cfg, ks=[1], gammas=[30], sigmas=[0], kinds=[SimilarityKind.DIAGONAL]).table()
        assert table.columns == ("k", "gamma_db", "sigma_db", "kind", "rate")
        assert table.rows[0][-1] >= 0.99

    def test_denoise_experiment_ordering(self):
        cfg = SimConfig(k=2, trials=100)
        report = run_denoise_experiment(cfg, gammas=[20, 40])
        t = report.table()
        observed = t.column("nmse_observed")
        assert observed[0] > observed[1]
        for raw, den in zip(t.column("nmse_raw"), t.column("nmse_denoised")):
            assert den < raw
        hist = report.table("iterations")
        assert sum(r[2] for r in hist.rows) == 2 * 100
