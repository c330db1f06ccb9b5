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

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from coop_cdma_sim.detect import DetectorContext
from coop_cdma_sim.exceptions import SystemModelException
from coop_cdma_sim.sysmodel import (
    ChannelRealization,
    Constellation,
    LinkChannel,
    SignatureMatrix,
    SystemConfig,
    effective_matrix
)


@dataclass(frozen=True)
class SymbolFrame:
    """K x P matrix of transmitted constellation points."""
    symbols: np.ndarray

    @property
    def users(self) -> int:
        return self.symbols.shape[0]

    @property
    def packet_length(self) -> int:
        return self.symbols.shape[1]


@dataclass(frozen=True)
class ReceivedFrame:
    """
    Received chip windows for a whole packet.

    Each array carries one column per symbol instant: y_sd and y_rd
    are M x P, y_sr is L x M x P.
    """
    y_sd: np.ndarray
    y_sr: np.ndarray
    y_rd: np.ndarray
    noise_variance: float

    @property
    def y_stacked(self) -> np.ndarray:
        return stack_destination(self.y_sd, self.y_rd)


@dataclass(frozen=True)
class RelayDecisions:
    """Hard decisions (K x P) forwarded by each relay that decoded."""
    decided: Dict[int, np.ndarray]

    @property
    def relays(self) -> Tuple[int, ...]:
        return tuple(sorted(self.decided))


def generate_symbols(
    config: SystemConfig,
    rng: np.random.Generator
) -> SymbolFrame:
    """Draw i.i.d. equiprobable points for every user and instant."""
    points = config.constellation.points
    indices = rng.integers(
        0,
        len(points),
        size=(config.users, config.packet_length)
    )
    return SymbolFrame(symbols=points[indices])


def snr_to_sigma2(
    snr_db: float,
    config: Optional[SystemConfig] = None
) -> float:
    """
    Return the noise variance for a per-user SNR in dB.

    Codes, channels and the total per-user power are all unit energy
    so no further scaling is required.
    """
    if not math.isfinite(snr_db):
        raise SystemModelException(f'SNR must be finite, {snr_db} provided.')

    return 10.0 ** (-snr_db / 10.0)


def complex_noise(
    rng: np.random.Generator,
    shape: Tuple[int, ...],
    noise_variance: float
) -> np.ndarray:
    """Circular complex Gaussian samples with total variance sigma^2."""
    scale = math.sqrt(noise_variance / 2.0)
    real = rng.standard_normal(shape)
    imag = rng.standard_normal(shape)
    return scale * (real + 1j * imag)


def _superpose(eff: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    return eff @ np.asarray(symbols)


def synth_phase1(
    codes: List[SignatureMatrix],
    channels: ChannelRealization,
    symbols: np.ndarray,
    noise_variance: float,
    rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Broadcast phase: sources to destination and to every relay.

    symbols is either a K vector (one instant) or a K x P matrix.
    Returns y_sd (M or M x P) and y_sr (L x M or L x M x P).
    """
    symbols = np.asarray(symbols)

    if symbols.shape[0] != len(codes):
        raise SystemModelException(
            f'{symbols.shape[0]} symbol rows provided for '
            f'{len(codes)} users.'
        )

    clean_sd = _superpose(effective_matrix(codes, channels.sd), symbols)
    y_sd = clean_sd + complex_noise(rng, clean_sd.shape, noise_variance)

    y_sr = np.zeros((channels.relays,) + clean_sd.shape, dtype=complex)
    for relay, links in enumerate(channels.sr):
        clean = _superpose(effective_matrix(codes, links), symbols)
        y_sr[relay] = clean + complex_noise(rng, clean.shape, noise_variance)

    return y_sd, y_sr


def relay_process(
    y_sr: np.ndarray,
    codes: List[SignatureMatrix],
    sr_channels: Sequence[Sequence[LinkChannel]],
    detector: Callable,
    noise_variance: float,
    constellation: Constellation,
    d_th: float,
    group_size: int,
    relays: Optional[Iterable[int]] = None
) -> RelayDecisions:
    """
    Decode-and-forward: detect every symbol instant at each relay.

    Decisions are forwarded whether or not they are correct. Only the
    relays listed in relays are decoded (default all).
    """
    if relays is None:
        relays = range(len(sr_channels))

    decided = {}
    for relay in relays:
        context = DetectorContext(
            eff=effective_matrix(codes, sr_channels[relay]),
            constellation=constellation,
            d_th=d_th,
            n_group=group_size,
            noise_variance=noise_variance
        )
        observations = y_sr[relay]

        if observations.ndim == 1:
            decided[relay] = detector(observations, context).decisions
        else:
            decided[relay] = np.column_stack([
                detector(observations[:, instant], context).decisions
                for instant in range(observations.shape[1])
            ])

    return RelayDecisions(decided=decided)


def synth_phase2(
    codes: List[SignatureMatrix],
    rd_channels: Sequence[Sequence[LinkChannel]],
    relay_decisions: RelayDecisions,
    active_relays: Iterable[int],
    noise_variance: float,
    rng: np.random.Generator,
    shape: Optional[Tuple[int, ...]] = None
) -> np.ndarray:
    """
    Relay phase: superposition of the active relays' re-spread decisions.

    Inactive relays transmit nothing. shape is the observation shape
    used when no relay is active.
    """
    active = sorted(set(active_relays))

    if shape is None:
        chips = codes[0].matrix.shape[0]
        if active:
            shape = (chips,) + relay_decisions.decided[active[0]].shape[1:]
        else:
            shape = (chips,)

    y_rd = np.zeros(shape, dtype=complex)
    for relay in active:
        if relay not in relay_decisions.decided:
            raise SystemModelException(
                f'Relay {relay} is active but has no decisions to forward.'
            )

        eff = effective_matrix(codes, rd_channels[relay])
        y_rd = y_rd + _superpose(eff, relay_decisions.decided[relay])

    return y_rd + complex_noise(rng, shape, noise_variance)


def stack_destination(y_sd: np.ndarray, y_rd: np.ndarray) -> np.ndarray:
    """Stack both phases into the 2M destination observation."""
    return np.concatenate([np.asarray(y_sd), np.asarray(y_rd)], axis=0)


def stacked_signatures(
    codes: List[SignatureMatrix],
    channels: ChannelRealization,
    active_relays: Iterable[int]
) -> np.ndarray:
    """
    Return the 2M x K composite signatures seen by the destination.

    Rows 0..M-1 hold the direct link, rows M..2M-1 the sum over the
    active relays of each user's relay-to-destination signature.
    """
    direct = effective_matrix(codes, channels.sd)
    relayed = np.zeros_like(direct, dtype=complex)

    for relay in sorted(set(active_relays)):
        relayed = relayed + effective_matrix(codes, channels.rd[relay])

    return stack_destination(direct, relayed)
