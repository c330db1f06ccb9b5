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

import itertools
import logging

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Tuple

import numpy as np

from coop_cdma_sim.exceptions import RelaySelectionException
from coop_cdma_sim.sysmodel import (
    AmplitudeAssignment,
    ChannelRealization,
    LinkChannel,
    SignatureMatrix,
    SystemConfig,
    apply_amplitudes,
    effective_signature,
    power_normalize
)
from coop_cdma_sim.txsim import stacked_signatures

EXHAUSTIVE_LIMIT = 20

log = logging.getLogger('coop_cdma_sim')


class Selector(str, Enum):
    NONE = 'none'
    ALL_RELAYS = 'all'
    STANDARD_GREEDY = 'standard'
    PROPOSED_GREEDY = 'proposed'
    EXHAUSTIVE = 'exhaustive'


@dataclass(frozen=True)
class SinrReport:
    per_user: Tuple[float, ...]
    min_value: float
    evaluations: int = 1


@dataclass(frozen=True)
class RelaySubset:
    """
    Outcome of a selection run.

    members are sorted relay indices, sinr the max-min SINR (linear),
    accepted the sequence of accepted SINR_pre values.
    """
    members: Tuple[int, ...]
    sinr: float
    evaluations: int
    accepted: Tuple[float, ...] = ()


def subset_sinr(
    subset: Iterable[int],
    codes: List[SignatureMatrix],
    channels: ChannelRealization,
    amplitudes: AmplitudeAssignment,
    noise_variance: float
) -> SinrReport:
    """
    Evaluate the RAKE SINR of every user for one relay subset.

    SINR_q = h_q^H H H^H h_q / (trace(H_q' H_q'^H) + sigma^2 h_q^H h_q)
    with H the stacked 2M x K composite signatures and H_q' the same
    matrix without column q. Relays forward error free.
    """
    subset = sorted(set(subset))
    scaled = apply_amplitudes(channels, amplitudes)
    H = stacked_signatures(codes, scaled, subset)

    energies = np.sum(np.abs(H) ** 2, axis=0)
    total = float(np.sum(energies))
    # row q holds h_q^H H
    correlations = H.conj().T @ H
    numerators = np.sum(np.abs(correlations) ** 2, axis=1)

    per_user = []
    for q in range(H.shape[1]):
        denominator = (total - energies[q]) + noise_variance * energies[q]

        if denominator > 0:
            per_user.append(float(numerators[q] / denominator))
        elif numerators[q] > 0:
            per_user.append(float('inf'))
        else:
            per_user.append(0.0)

    return SinrReport(per_user=tuple(per_user), min_value=min(per_user))


def path_power(ch: LinkChannel) -> float:
    """Channel path power h^H h of one link."""
    taps = np.asarray(ch.taps)
    return float(np.vdot(taps, taps).real)


class _Evaluator(object):
    """Counts max-min SINR evaluations of one selection run."""

    def __init__(self, config, codes, channels, noise_variance):
        self.config = config
        self.codes = codes
        self.channels = channels
        self.noise_variance = noise_variance
        self.evaluations = 0

    def __call__(self, subset: Tuple[int, ...]) -> float:
        self.evaluations += 1
        report = subset_sinr(
            subset,
            self.codes,
            self.channels,
            power_normalize(self.config, subset),
            self.noise_variance
        )
        return report.min_value


def _check_relays(channels: ChannelRealization, limit: int = None):
    if channels.relays < 1:
        raise RelaySelectionException(
            'Relay selection requires at least one relay.'
        )

    if limit is not None and channels.relays > limit:
        raise RelaySelectionException(
            f'Exhaustive search over {channels.relays} relays exceeds '
            f'the limit of {limit}.'
        )


def select_exhaustive(
    codes: List[SignatureMatrix],
    channels: ChannelRealization,
    noise_variance: float,
    config: SystemConfig
) -> RelaySubset:
    """
    Evaluate all 2^L - 1 nonempty subsets and return the best one.

    Subsets are scanned by cardinality then lexicographically and
    only a strictly better SINR replaces the incumbent.
    """
    _check_relays(channels, EXHAUSTIVE_LIMIT)
    evaluate = _Evaluator(config, codes, channels, noise_variance)

    best_members = None
    best_sinr = -np.inf

    for size in range(1, channels.relays + 1):
        for members in itertools.combinations(range(channels.relays), size):
            sinr = evaluate(members)

            if sinr > best_sinr:
                best_members, best_sinr = members, sinr

    return RelaySubset(
        members=best_members,
        sinr=best_sinr,
        evaluations=evaluate.evaluations,
        accepted=(best_sinr,)
    )


def _relay_rank(
    codes: List[SignatureMatrix],
    channels: ChannelRealization,
    relay: int
) -> Tuple[float, float, int]:
    links = channels.rd[relay]
    power = sum(path_power(link) for link in links)
    energy = sum(
        float(np.sum(np.abs(effective_signature(code, link)) ** 2))
        for code, link in zip(codes, links)
    )
    return power, energy, relay


def select_standard_greedy(
    codes: List[SignatureMatrix],
    channels: ChannelRealization,
    noise_variance: float,
    config: SystemConfig
) -> RelaySubset:
    """
    Drop the poorest relay-to-destination link stage by stage.

    The poorest relay has the smallest summed path power over its
    user links; exact ties fall back to the summed effective
    signature energy, then to the relay index.
    """
    _check_relays(channels)
    evaluate = _Evaluator(config, codes, channels, noise_variance)

    current = tuple(range(channels.relays))
    sinr_pre = evaluate(current)
    accepted = [sinr_pre]

    while len(current) > 1:
        poorest = min(
            current,
            key=lambda relay: _relay_rank(codes, channels, relay)
        )
        candidate = tuple(relay for relay in current if relay != poorest)
        sinr_cur = evaluate(candidate)

        if sinr_cur > sinr_pre:
            current, sinr_pre = candidate, sinr_cur
            accepted.append(sinr_pre)
        else:
            break

    log.debug(
        f'Standard greedy kept relays {current} after '
        f'{evaluate.evaluations} evaluations'
    )

    return RelaySubset(
        members=current,
        sinr=sinr_pre,
        evaluations=evaluate.evaluations,
        accepted=tuple(accepted)
    )


def select_proposed_greedy(
    codes: List[SignatureMatrix],
    channels: ChannelRealization,
    noise_variance: float,
    config: SystemConfig
) -> RelaySubset:
    """
    Drop each relay in turn and keep the best leave-one-out subset.

    Stops when no leave-one-out subset strictly improves the max-min
    SINR or when a single relay is left.
    """
    _check_relays(channels)
    evaluate = _Evaluator(config, codes, channels, noise_variance)

    current = tuple(range(channels.relays))
    sinr_pre = evaluate(current)
    accepted = [sinr_pre]

    while len(current) > 1:
        sinr_cur = -np.inf
        best = None

        # dropping in ascending relay order, ties keep the smallest drop
        for dropped in current:
            candidate = tuple(relay for relay in current if relay != dropped)
            sinr = evaluate(candidate)

            if sinr > sinr_cur:
                sinr_cur, best = sinr, candidate

        if sinr_cur > sinr_pre:
            current, sinr_pre = best, sinr_cur
            accepted.append(sinr_pre)
        else:
            break

    log.debug(
        f'Proposed greedy kept relays {current} after '
        f'{evaluate.evaluations} evaluations'
    )

    return RelaySubset(
        members=current,
        sinr=sinr_pre,
        evaluations=evaluate.evaluations,
        accepted=tuple(accepted)
    )


def all_relays(
    codes: List[SignatureMatrix],
    channels: ChannelRealization,
    noise_variance: float,
    config: SystemConfig
) -> RelaySubset:
    """Every relay forwards, no selection is performed."""
    evaluate = _Evaluator(config, codes, channels, noise_variance)
    members = tuple(range(channels.relays))
    sinr = evaluate(members)

    return RelaySubset(
        members=members,
        sinr=sinr,
        evaluations=evaluate.evaluations,
        accepted=(sinr,)
    )


SELECTORS = {
    Selector.NONE: all_relays,
    Selector.ALL_RELAYS: all_relays,
    Selector.STANDARD_GREEDY: select_standard_greedy,
    Selector.PROPOSED_GREEDY: select_proposed_greedy,
    Selector.EXHAUSTIVE: select_exhaustive
}


def get_selector(name):
    """Return the selection callable registered for name."""
    try:
        return SELECTORS[Selector(name)]
    except ValueError:
        raise RelaySelectionException(
            f'Unknown selector {name}. Expected one of: '
            f'{", ".join(s.value for s in Selector)}.'
        )
