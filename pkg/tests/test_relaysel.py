import math

import numpy as np
import pytest

from coop_cdma_sim.exceptions import RelaySelectionException
from coop_cdma_sim.relaysel import (
    Selector,
    all_relays,
    get_selector,
    path_power,
    select_exhaustive,
    select_proposed_greedy,
    select_standard_greedy,
    subset_sinr
)
from coop_cdma_sim.sysmodel import (
    AmplitudeAssignment,
    ChannelRealization,
    LinkChannel,
    SystemConfig,
    generate_channels,
    generate_codes,
    power_normalize,
    signature_matrix
)
from coop_cdma_sim.txsim import snr_to_sigma2


def unit_code(chips, index):
    code = np.zeros(chips)
    code[index] = 1.0
    return signature_matrix(code, 1)


def direct_only(taps):
    return ChannelRealization(
        sd=tuple(LinkChannel(np.array([tap])) for tap in taps),
        sr=(),
        rd=()
    )


def test_path_power():
    assert path_power(LinkChannel(np.array([1.0, 0.0, 0.0]))) == 1.0

    taps = np.array([0.6, 0.8j])
    assert path_power(LinkChannel(2 * taps)) == pytest.approx(4.0)


def test_subset_sinr_single_user():
    channels = direct_only([1.0])
    report = subset_sinr(
        (),
        [unit_code(4, 0)],
        channels,
        AmplitudeAssignment(source=1.0),
        0.1
    )

    assert report.per_user == pytest.approx((10.0,))
    assert report.min_value == pytest.approx(10.0)

    halved = subset_sinr(
        (),
        [unit_code(4, 0)],
        channels,
        AmplitudeAssignment(source=1.0),
        0.2
    )
    assert halved.min_value == pytest.approx(5.0)


def test_subset_sinr_orthogonal_pair():
    channels = direct_only([1.0, 1.0])
    codes = [unit_code(4, 0), unit_code(4, 1)]
    report = subset_sinr(
        (),
        codes,
        channels,
        AmplitudeAssignment(source=1.0),
        0.1
    )

    # |h|^4 / (|h_other|^2 + 0.1 |h|^2)
    assert report.per_user == pytest.approx((1 / 1.1, 1 / 1.1))


def test_subset_sinr_matches_dense_formula():
    config = SystemConfig(users=3, relays=2, spreading_gain=8)
    rng = np.random.default_rng(6)
    codes = generate_codes(config, rng)
    channels = generate_channels(config, rng)
    amplitude = 1 / math.sqrt(2)
    amplitudes = AmplitudeAssignment(source=amplitude, relays={1: amplitude})

    report = subset_sinr((1,), codes, channels, amplitudes, 0.05)

    def column(link, code, scale):
        return scale * (code.matrix @ link.taps)

    H = np.column_stack([
        np.concatenate([
            column(channels.sd[k], codes[k], amplitude),
            column(channels.rd[1][k], codes[k], amplitude)
        ])
        for k in range(3)
    ])

    for q in range(3):
        h = H[:, q]
        others = np.delete(H, q, axis=1)
        numerator = np.real(h.conj() @ H @ H.conj().T @ h)
        denominator = np.real(
            np.trace(others @ others.conj().T) + 0.05 * h.conj() @ h
        )
        assert report.per_user[q] == pytest.approx(numerator / denominator)


class TestSelection(object):
    def setup_class(self):
        self.config = SystemConfig(users=10, relays=6, spreading_gain=16)
        self.noise_variance = snr_to_sigma2(15.0)
        rng = np.random.default_rng(2024)
        self.instances = [
            (generate_codes(self.config, rng),
             generate_channels(self.config, rng))
            for _ in range(40)
        ]

    def run(self, select, codes, channels):
        return select(codes, channels, self.noise_variance, self.config)

    def test_exhaustive_evaluates_every_subset(self):
        codes, channels = self.instances[0]
        result = self.run(select_exhaustive, codes, channels)

        assert result.evaluations == 63
        assert 1 <= len(result.members) <= 6

    def test_dominance_and_complexity(self):
        for codes, channels in self.instances:
            best = self.run(select_exhaustive, codes, channels)
            proposed = self.run(select_proposed_greedy, codes, channels)
            standard = self.run(select_standard_greedy, codes, channels)

            assert best.sinr >= proposed.sinr
            assert best.sinr >= standard.sinr
            assert proposed.evaluations <= 21
            assert standard.evaluations <= 6
            assert proposed.sinr == proposed.accepted[-1]
            assert standard.sinr == standard.accepted[-1]

            for result in (proposed, standard):
                for previous, current in zip(
                    result.accepted,
                    result.accepted[1:]
                ):
                    assert current > previous

    def test_greedy_members_sorted(self):
        codes, channels = self.instances[1]

        for select in (select_standard_greedy, select_proposed_greedy):
            members = self.run(select, codes, channels).members
            assert list(members) == sorted(set(members))
            assert members

    def test_all_relays(self):
        codes, channels = self.instances[2]
        result = self.run(all_relays, codes, channels)

        assert result.members == (0, 1, 2, 3, 4, 5)
        assert result.evaluations == 1

    def test_greedy_starts_from_all_relays(self):
        codes, channels = self.instances[3]
        everyone = self.run(all_relays, codes, channels)

        for select in (select_standard_greedy, select_proposed_greedy):
            result = self.run(select, codes, channels)
            assert result.accepted[0] == everyone.sinr
            assert result.sinr >= everyone.sinr


def test_single_relay_needs_no_search():
    config = SystemConfig(users=2, relays=1, spreading_gain=8)
    rng = np.random.default_rng(0)
    codes = generate_codes(config, rng)
    channels = generate_channels(config, rng)

    result = select_proposed_greedy(codes, channels, 0.1, config)
    assert result.members == (0,)
    assert result.evaluations == 1


def test_selection_requires_relays():
    config = SystemConfig(users=2, relays=0, spreading_gain=8)
    rng = np.random.default_rng(0)
    codes = generate_codes(config, rng)
    channels = generate_channels(config, rng)

    with pytest.raises(RelaySelectionException, match='at least one relay'):
        select_exhaustive(codes, channels, 0.1, config)


def test_get_selector():
    assert get_selector('proposed') is select_proposed_greedy
    assert get_selector(Selector.NONE) is all_relays

    with pytest.raises(RelaySelectionException, match='Unknown selector'):
        get_selector('random')


def random_instance(seed, users, relays):
    config = SystemConfig(users=users, relays=relays, spreading_gain=8)
    rng = np.random.default_rng(seed)
    return (
        config,
        generate_codes(config, rng),
        generate_channels(config, rng)
    )


def silence_relay(channels, relay):
    """Zero every relay-to-destination link of relay."""
    silent = tuple(
        LinkChannel(np.zeros_like(link.taps)) for link in channels.rd[relay]
    )
    rd = channels.rd[:relay] + (silent,) + channels.rd[relay + 1:]
    return ChannelRealization(sd=channels.sd, sr=channels.sr, rd=rd)


def min_sinr(subset, config, codes, channels, noise_variance):
    return subset_sinr(
        subset,
        codes,
        channels,
        power_normalize(config, subset),
        noise_variance
    ).min_value


def test_standard_greedy_drops_silent_relay_first():
    config, codes, channels = random_instance(9, 3, 3)
    channels = silence_relay(channels, 1)

    result = select_standard_greedy(codes, channels, 0.1, config)

    assert 1 not in result.members
    assert result.evaluations >= 2
    assert result.accepted[1] == pytest.approx(
        min_sinr((0, 2), config, codes, channels, 0.1)
    )


def test_proposed_greedy_two_relays():
    config, codes, channels = random_instance(21, 3, 2)
    channels = silence_relay(channels, 1)

    result = select_proposed_greedy(codes, channels, 0.1, config)
    sinr = {
        subset: min_sinr(subset, config, codes, channels, 0.1)
        for subset in ((0, 1), (0,), (1,))
    }

    assert result.evaluations == 3
    assert result.sinr == pytest.approx(max(sinr.values()))
    assert result.sinr > sinr[(0, 1)]
    assert len(result.members) == 1


def test_subset_sinr_permutation_equivariant():
    config, codes, channels = random_instance(4, 4, 3)
    order = [2, 0, 3, 1]
    permuted = ChannelRealization(
        sd=tuple(channels.sd[k] for k in order),
        sr=tuple(tuple(links[k] for k in order) for links in channels.sr),
        rd=tuple(tuple(links[k] for k in order) for links in channels.rd)
    )
    subset = (0, 2)
    amplitudes = power_normalize(config, subset)

    report = subset_sinr(subset, codes, channels, amplitudes, 0.05)
    shuffled = subset_sinr(
        subset,
        [codes[k] for k in order],
        permuted,
        amplitudes,
        0.05
    )

    assert shuffled.per_user == pytest.approx(
        tuple(report.per_user[k] for k in order)
    )
    assert shuffled.min_value == pytest.approx(report.min_value)


@pytest.mark.slow
class TestGreedyAgainstOptimum(object):
    """K = 10, L = 6, N = 16 at 15 dB over 200 random instances."""

    def setup_class(self):
        config = SystemConfig(users=10, relays=6, spreading_gain=16)
        noise_variance = snr_to_sigma2(15.0)
        rng = np.random.default_rng(77)
        self.results = []

        for _ in range(200):
            codes = generate_codes(config, rng)
            channels = generate_channels(config, rng)
            self.results.append(tuple(
                select(codes, channels, noise_variance, config)
                for select in (
                    select_exhaustive,
                    select_proposed_greedy,
                    select_standard_greedy
                )
            ))

    def gaps_db(self):
        return np.array([
            10 * math.log10(best.sinr / proposed.sinr)
            for best, proposed, _ in self.results
        ])

    def test_optimum_is_mostly_one_relay(self):
        singles = sum(
            len(best.members) == 1 for best, _, _ in self.results
        )
        assert singles > len(self.results) / 2

    def test_proposed_beats_standard_on_average(self):
        proposed = np.mean([
            10 * math.log10(result.sinr) for _, result, _ in self.results
        ])
        standard = np.mean([
            10 * math.log10(result.sinr) for _, _, result in self.results
        ])
        assert proposed >= standard
        assert np.all(self.gaps_db() >= 0)

    @pytest.mark.xfail(
        reason='leave-one-out removal stalls on 4 or 5 relays, '
               'see DESIGN.md',
        strict=False
    )
    def test_proposed_reaches_optimum(self):
        gaps = self.gaps_db()

        assert np.mean(gaps == 0) >= 0.8
        assert np.mean(gaps <= 1.0) >= 0.95
