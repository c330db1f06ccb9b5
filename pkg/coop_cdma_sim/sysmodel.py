# -*- coding: utf-8 -*-

"""Scenario configuration, spreading codes and channel realizations."""

# Copyright (c) 2024 SUSE LLC
#
# This file is part of coop_cdma_sim. coop_cdma_sim provides an
# api and command line utilities for simulating the uplink of
# cooperative DS-CDMA systems.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

import math

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from coop_cdma_sim.exceptions import ConfigException, SystemModelException


class Modulation(str, Enum):
    BPSK = 'bpsk'
    QPSK = 'qpsk'


@dataclass(frozen=True)
class Constellation:
    """
    Unit-energy symbol alphabet with its decision boundaries.

    Points are kept in canonical order; every tie-break in the
    package resolves to the point with the smallest index.
    """
    points: np.ndarray
    min_distance: float
    real_boundaries: Tuple[float, ...]
    imag_boundaries: Tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.size))

    def bit_errors(self, sent: np.ndarray, received: np.ndarray) -> int:
        """
        Count bit errors between two arrays of constellation points.

        Bits are Gray mapped per axis: one bit per real boundary
        and one per imaginary boundary.
        """
        sent = np.asarray(sent)
        received = np.asarray(received)
        errors = 0

        for boundary in self.real_boundaries:
            errors += np.count_nonzero(
                (sent.real < boundary) != (received.real < boundary)
            )

        for boundary in self.imag_boundaries:
            errors += np.count_nonzero(
                (sent.imag < boundary) != (received.imag < boundary)
            )

        return int(errors)


BPSK = Constellation(
    points=np.array([1.0 + 0j, -1.0 + 0j]),
    min_distance=2.0,
    real_boundaries=(0.0,),
    imag_boundaries=()
)

QPSK = Constellation(
    points=np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2),
    min_distance=math.sqrt(2),
    real_boundaries=(0.0,),
    imag_boundaries=(0.0,)
)

CONSTELLATIONS = {
    Modulation.BPSK: BPSK,
    Modulation.QPSK: QPSK
}


def default_power_profile(paths: int) -> Tuple[float, ...]:
    """Return 0, -3, -6, ... dB for the given number of taps."""
    return tuple(-3.0 * tap for tap in range(paths))


@dataclass(frozen=True)
class SystemConfig:
    """
    All parameters of one simulated scenario.

    users (K), relays (L), spreading_gain (N), paths (L_p),
    d_th, group_size (n), packet_length (P).
    """
    users: int = 10
    relays: int = 6
    spreading_gain: int = 16
    paths: int = 3
    modulation: Modulation = Modulation.BPSK
    d_th: float = 0.25
    group_size: int = 2
    packet_length: int = 1000
    snr_db: float = 15.0
    trials: int = 300
    master_seed: int = 0
    power_profile_db: Optional[Tuple[float, ...]] = None
    fixed_codes: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'modulation', Modulation(self.modulation))

        if self.power_profile_db is None:
            object.__setattr__(
                self,
                'power_profile_db',
                default_power_profile(self.paths)
            )
        else:
            object.__setattr__(
                self,
                'power_profile_db',
                tuple(float(value) for value in self.power_profile_db)
            )

        if self.users < 1:
            raise ConfigException(
                f'At least one user is required, {self.users} provided.'
            )

        if self.relays < 0:
            raise ConfigException(
                f'Relay count must be >= 0, {self.relays} provided.'
            )

        if self.spreading_gain < 2:
            raise ConfigException(
                f'Spreading gain must be >= 2, '
                f'{self.spreading_gain} provided.'
            )

        if not 1 <= self.paths < self.spreading_gain:
            raise ConfigException(
                f'Path count must satisfy 1 <= paths < spreading gain, '
                f'{self.paths} provided.'
            )

        if len(self.power_profile_db) != self.paths:
            raise ConfigException(
                f'Power profile has {len(self.power_profile_db)} entries '
                f'but {self.paths} paths are configured.'
            )

        if not self.d_th >= 0:
            raise ConfigException(
                f'Reliability threshold must be >= 0, {self.d_th} provided.'
            )

        if not 1 <= self.group_size <= self.users:
            raise ConfigException(
                f'Group size must satisfy 1 <= group <= users, '
                f'{self.group_size} provided.'
            )

        if self.packet_length < 1:
            raise ConfigException(
                f'Packet length must be >= 1, '
                f'{self.packet_length} provided.'
            )

        if self.trials < 1:
            raise ConfigException(
                f'Trial count must be >= 1, {self.trials} provided.'
            )

        if not math.isfinite(self.snr_db):
            raise ConfigException(
                f'SNR must be finite, {self.snr_db} provided.'
            )

    @property
    def chips(self) -> int:
        """Received window length M = N + L_p - 1."""
        return self.spreading_gain + self.paths - 1

    @property
    def constellation(self) -> Constellation:
        return CONSTELLATIONS[self.modulation]

    def stages(self) -> List[int]:
        """Group sizes of the detection stages, remainder last."""
        full, remainder = divmod(self.users, self.group_size)
        sizes = [self.group_size] * full

        if remainder:
            sizes.append(remainder)

        return sizes

    def evolve(self, **changes) -> 'SystemConfig':
        return replace(self, **changes)


@dataclass(frozen=True)
class SignatureMatrix:
    """Spreading code of one user and its M x L_p shifted matrix."""
    code: np.ndarray
    matrix: np.ndarray


def signature_matrix(code: np.ndarray, paths: int) -> SignatureMatrix:
    """
    Build S_k: column j holds the code shifted down by j chips.
    """
    code = np.asarray(code, dtype=float)
    chips = len(code) + paths - 1
    matrix = np.zeros((chips, paths))

    for column in range(paths):
        matrix[column:column + len(code), column] = code

    return SignatureMatrix(code=code, matrix=matrix)


def generate_codes(
    config: SystemConfig,
    rng: np.random.Generator
) -> List[SignatureMatrix]:
    """
    Draw K random antipodal codes with chips +-1/sqrt(N).
    """
    chips = rng.choice(
        np.array([1.0, -1.0]),
        size=(config.users, config.spreading_gain)
    )
    chips /= math.sqrt(config.spreading_gain)

    return [signature_matrix(code, config.paths) for code in chips]


@dataclass(frozen=True)
class LinkChannel:
    taps: np.ndarray
    amplitude: float = 1.0

    def with_amplitude(self, amplitude: float) -> 'LinkChannel':
        return replace(self, amplitude=amplitude)


@dataclass(frozen=True)
class ChannelRealization:
    """
    Block fading state of every link for one packet.

    sd[k], sr[l][k] and rd[l][k] index users and relays from 0.
    """
    sd: Tuple[LinkChannel, ...]
    sr: Tuple[Tuple[LinkChannel, ...], ...]
    rd: Tuple[Tuple[LinkChannel, ...], ...]

    @property
    def users(self) -> int:
        return len(self.sd)

    @property
    def relays(self) -> int:
        return len(self.rd)


def _random_links(
    rng: np.random.Generator,
    shape: Tuple[int, ...],
    profile_db: Tuple[float, ...]
) -> np.ndarray:
    paths = len(profile_db)
    profile = np.sqrt(10.0 ** (np.asarray(profile_db) / 10.0))

    # 1 - U[0, 1) keeps the magnitude factor in (0, 1]
    magnitude = profile * (1.0 - rng.random(shape + (paths,)))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=shape + (paths,))
    taps = magnitude * np.exp(1j * phase)

    return taps / np.linalg.norm(taps, axis=-1, keepdims=True)


def generate_channels(
    config: SystemConfig,
    rng: np.random.Generator
) -> ChannelRealization:
    """
    Draw a fresh unit-power multipath realization for every link.

    Draw order is sd, sr, rd so identical seeds reproduce identical
    realizations.
    """
    profile = config.power_profile_db
    sd = _random_links(rng, (config.users,), profile)
    sr = _random_links(rng, (config.relays, config.users), profile)
    rd = _random_links(rng, (config.relays, config.users), profile)

    return ChannelRealization(
        sd=tuple(LinkChannel(taps) for taps in sd),
        sr=tuple(tuple(LinkChannel(taps) for taps in row) for row in sr),
        rd=tuple(tuple(LinkChannel(taps) for taps in row) for row in rd)
    )


def effective_signature(S: SignatureMatrix, ch: LinkChannel) -> np.ndarray:
    """Return amplitude * S h, the receive-side column of one link."""
    taps = np.asarray(ch.taps)

    if S.matrix.shape[1] != taps.shape[0]:
        raise SystemModelException(
            f'Signature matrix has {S.matrix.shape[1]} columns but the '
            f'channel has {taps.shape[0]} taps.'
        )

    return ch.amplitude * (S.matrix @ taps)


def effective_matrix(
    codes: List[SignatureMatrix],
    links: Iterable[LinkChannel]
) -> np.ndarray:
    """Stack the effective signatures of all users as columns."""
    links = list(links)

    if len(links) != len(codes):
        raise SystemModelException(
            f'{len(codes)} codes provided for {len(links)} links.'
        )

    return np.column_stack([
        effective_signature(code, link) for code, link in zip(codes, links)
    ])


@dataclass(frozen=True)
class AmplitudeAssignment:
    """Equal split of one unit of per-user power."""
    source: float
    relays: Dict[int, float] = field(default_factory=dict)

    @property
    def total_power(self) -> float:
        return self.source ** 2 + sum(a ** 2 for a in self.relays.values())


def power_normalize(
    config: SystemConfig,
    active_relays: Iterable[int]
) -> AmplitudeAssignment:
    """
    Assign a = 1/sqrt(1 + |active|) to the source and each active relay.
    """
    active = sorted(set(active_relays))

    for relay in active:
        if not 0 <= relay < config.relays:
            raise SystemModelException(
                f'Relay index {relay} outside 0..{config.relays - 1}.'
            )

    amplitude = 1.0 / math.sqrt(1 + len(active))

    return AmplitudeAssignment(
        source=amplitude,
        relays={relay: amplitude for relay in active}
    )


def apply_amplitudes(
    channels: ChannelRealization,
    amplitudes: AmplitudeAssignment
) -> ChannelRealization:
    """
    Return the realization scaled by an amplitude assignment.

    The source amplitude applies to both broadcast links (sd and sr);
    relay links outside the assignment are silenced.
    """
    return ChannelRealization(
        sd=tuple(
            link.with_amplitude(amplitudes.source) for link in channels.sd
        ),
        sr=tuple(
            tuple(link.with_amplitude(amplitudes.source) for link in row)
            for row in channels.sr
        ),
        rd=tuple(
            tuple(
                link.with_amplitude(amplitudes.relays.get(relay, 0.0))
                for link in row
            )
            for relay, row in enumerate(channels.rd)
        )
    )
