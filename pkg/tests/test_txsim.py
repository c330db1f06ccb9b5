import math

import numpy as np
import pytest

from coop_cdma_sim.detect import conventional_sic, gl_sic
from coop_cdma_sim.exceptions import SystemModelException
from coop_cdma_sim.sysmodel import (
    BPSK,
    SystemConfig,
    apply_amplitudes,
    effective_matrix,
    generate_channels,
    generate_codes,
    power_normalize
)
from coop_cdma_sim.txsim import (
    RelayDecisions,
    complex_noise,
    generate_symbols,
    relay_process,
    snr_to_sigma2,
    stack_destination,
    stacked_signatures,
    synth_phase1,
    synth_phase2
)


def test_snr_to_sigma2():
    assert snr_to_sigma2(0.0) == 1.0
    assert snr_to_sigma2(10.0) == pytest.approx(0.1)
    assert snr_to_sigma2(-10.0) == pytest.approx(10.0)

    with pytest.raises(SystemModelException, match='SNR must be finite'):
        snr_to_sigma2(math.nan)


def test_complex_noise_variance():
    noise = complex_noise(np.random.default_rng(2), (200000,), 0.5)

    assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.5, rel=0.02)
    assert np.var(noise.real) == pytest.approx(0.25, rel=0.02)


def test_generate_symbols():
    config = SystemConfig(users=3, packet_length=50, modulation='qpsk')
    frame = generate_symbols(config, np.random.default_rng(4))

    assert frame.symbols.shape == (3, 50)
    assert frame.users == 3
    assert frame.packet_length == 50
    assert np.allclose(np.abs(frame.symbols), 1.0)


class TestTwoPhaseModel(object):
    """K = 2 users, L = 2 relays, N = 4 chips."""

    def setup_class(self):
        self.config = SystemConfig(
            users=2,
            relays=2,
            spreading_gain=4,
            paths=2,
            group_size=1,
            packet_length=8
        )
        rng = np.random.default_rng(11)
        self.codes = generate_codes(self.config, rng)
        self.channels = apply_amplitudes(
            generate_channels(self.config, rng),
            power_normalize(self.config, [0, 1])
        )
        self.symbols = generate_symbols(self.config, rng).symbols

    def test_noiseless_phase1(self):
        y_sd, y_sr = synth_phase1(
            self.codes,
            self.channels,
            self.symbols,
            0.0,
            np.random.default_rng(0)
        )

        assert y_sd.shape == (5, 8)
        assert y_sr.shape == (2, 5, 8)

        direct = effective_matrix(self.codes, self.channels.sd)
        assert np.allclose(y_sd, direct @ self.symbols)

        relayed = effective_matrix(self.codes, self.channels.sr[1])
        assert np.allclose(y_sr[1], relayed @ self.symbols)

    def test_single_instant(self):
        y_sd, y_sr = synth_phase1(
            self.codes,
            self.channels,
            self.symbols[:, 0],
            0.0,
            np.random.default_rng(0)
        )

        assert y_sd.shape == (5,)
        assert y_sr.shape == (2, 5)

    def test_composite_model(self):
        """Error free relays reproduce y = H b on the stacked window."""
        y_sd, y_sr = synth_phase1(
            self.codes,
            self.channels,
            self.symbols,
            0.0,
            np.random.default_rng(0)
        )
        decisions = RelayDecisions(
            decided={0: self.symbols, 1: self.symbols}
        )
        y_rd = synth_phase2(
            self.codes,
            self.channels.rd,
            decisions,
            [0, 1],
            0.0,
            np.random.default_rng(0)
        )
        stacked = stack_destination(y_sd, y_rd)
        H = stacked_signatures(self.codes, self.channels, [0, 1])

        assert H.shape == (10, 2)
        assert np.allclose(stacked, H @ self.symbols)

    def test_inactive_relays_are_silent(self):
        decisions = RelayDecisions(decided={0: self.symbols})
        y_rd = synth_phase2(
            self.codes,
            self.channels.rd,
            decisions,
            [],
            0.0,
            np.random.default_rng(0),
            shape=(5, 8)
        )

        assert np.array_equal(y_rd, np.zeros((5, 8)))

    def test_active_relay_without_decisions(self):
        with pytest.raises(SystemModelException, match='Relay 1 is active'):
            synth_phase2(
                self.codes,
                self.channels.rd,
                RelayDecisions(decided={0: self.symbols}),
                [0, 1],
                0.0,
                np.random.default_rng(0)
            )

    def test_relay_process(self):
        y_sd, y_sr = synth_phase1(
            self.codes,
            self.channels,
            self.symbols,
            0.0,
            np.random.default_rng(0)
        )
        decisions = relay_process(
            y_sr,
            self.codes,
            self.channels.sr,
            conventional_sic,
            0.0,
            BPSK,
            0.25,
            1,
            relays=[1]
        )

        assert decisions.relays == (1,)
        assert decisions.decided[1].shape == (2, 8)
        assert set(np.unique(decisions.decided[1])) <= {1.0, -1.0}

    def test_phase1_symbol_mismatch(self):
        with pytest.raises(SystemModelException, match='3 symbol rows'):
            synth_phase1(
                self.codes,
                self.channels,
                np.ones((3, 2)),
                0.0,
                np.random.default_rng(0)
            )


def test_relay_symbol_error_rate():
    config = SystemConfig(
        users=4,
        relays=1,
        spreading_gain=8,
        packet_length=2500
    )
    rng = np.random.default_rng(31)
    codes = generate_codes(config, rng)
    channels = generate_channels(config, rng)
    symbols = generate_symbols(config, rng).symbols
    noise_variance = snr_to_sigma2(10.0)

    _, y_sr = synth_phase1(codes, channels, symbols, noise_variance, rng)
    decisions = relay_process(
        y_sr,
        codes,
        channels.sr,
        gl_sic,
        noise_variance,
        BPSK,
        config.d_th,
        config.group_size
    )

    assert symbols.size == 10000
    assert np.mean(decisions.decided[0] != symbols) < 0.5
