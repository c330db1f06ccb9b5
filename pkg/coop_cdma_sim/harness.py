# -*- coding: utf-8 -*-

"""Monte Carlo experiment engine."""

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

import csv
import logging
import math
import os

from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from enum import Enum
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from coop_cdma_sim.detect import (
    Detector,
    DetectorContext,
    get_detector,
    ml_guard_ok
)
from coop_cdma_sim.exceptions import HarnessException
from coop_cdma_sim.relaysel import (
    Selector,
    get_selector,
    subset_sinr
)
from coop_cdma_sim.sysmodel import (
    SystemConfig,
    apply_amplitudes,
    effective_matrix,
    generate_channels,
    generate_codes,
    power_normalize
)
from coop_cdma_sim.txsim import (
    generate_symbols,
    relay_process,
    snr_to_sigma2,
    stack_destination,
    stacked_signatures,
    synth_phase1,
    synth_phase2
)

MASK64 = (1 << 64) - 1
SIGNIFICANT_DIGITS = 10
CSV_HEADER = [
    'sweep',
    'detector',
    'selector',
    'bit_errors',
    'bits',
    'ber',
    'mean_set_size',
    'mean_minmax_sinr_db',
    'trials',
    'seed'
]


class SweepParameter(str, Enum):
    SNR = 'snr'
    USERS = 'users'


def splitmix64(value: int) -> int:
    """One SplitMix64 step, the published 64-bit integer mixer."""
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Seed of one trial, independent of execution order."""
    mixed = splitmix64(master_seed & MASK64)
    return splitmix64(mixed ^ (trial_index & MASK64))


@dataclass(frozen=True)
class ExperimentSpec:
    """
    One curve: a detector/selector pair swept over SNR or user count.

    relay_detector defaults to the destination detector.
    """
    config: SystemConfig
    sweep_values: Tuple[float, ...] = ()
    sweep_parameter: SweepParameter = SweepParameter.SNR
    detector: Detector = Detector.GLSIC
    selector: Selector = Selector.NONE
    cooperative: bool = True
    relay_detector: Optional[Detector] = None

    def __post_init__(self):
        object.__setattr__(self, 'detector', Detector(self.detector))
        object.__setattr__(self, 'selector', Selector(self.selector))
        object.__setattr__(
            self,
            'sweep_parameter',
            SweepParameter(self.sweep_parameter)
        )
        object.__setattr__(self, 'sweep_values', tuple(self.sweep_values))

        if self.relay_detector is not None:
            object.__setattr__(
                self,
                'relay_detector',
                Detector(self.relay_detector)
            )

        if self.selector is not Selector.NONE and not self.cooperative:
            raise HarnessException(
                f'Selector {self.selector.value} requires a cooperative '
                f'experiment.'
            )

        if self.cooperative and self.config.relays < 1:
            raise HarnessException(
                'A cooperative experiment requires at least one relay.'
            )

        users = [self.config.users]
        if self.sweep_parameter is SweepParameter.USERS:
            users.extend(int(value) for value in self.sweep_values)

        guarded = [self.detector]
        if self.cooperative:
            guarded.append(self.relay_detector or self.detector)

        if Detector.MLORACLE in guarded and not all(
            ml_guard_ok(k, self.config.constellation) for k in users
        ):
            raise HarnessException(
                f'The ML oracle is limited to 20 enumerated bits, '
                f'{max(users)} users requested.'
            )

    def at(self, value) -> 'ExperimentSpec':
        """Return the spec of a single sweep point."""
        if self.sweep_parameter is SweepParameter.USERS:
            config = self.config.evolve(users=int(value))
        else:
            config = self.config.evolve(snr_db=float(value))

        return replace(self, config=config, sweep_values=(value,))


@dataclass(frozen=True)
class TrialOutcome:
    bit_errors: int
    bits: int
    set_size: int
    minmax_sinr_db: float


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    detector: str
    selector: str
    bit_errors: int
    bits: int
    ber: float
    mean_selected_set_size: float
    mean_minmax_sinr_db: float
    trials: int
    seed: int


def _to_db(value: float) -> float:
    if value <= 0:
        return -math.inf

    return 10.0 * math.log10(value)


def run_trial(spec: ExperimentSpec, trial_index: int) -> TrialOutcome:
    """
    Simulate one packet and count its bit errors at the destination.

    Codes, channels and symbols are drawn first, relay selection runs
    once, then the packet goes through both phases with DF relays.
    """
    config = spec.config
    constellation = config.constellation
    rng = np.random.default_rng(trial_seed(config.master_seed, trial_index))

    if config.fixed_codes:
        code_rng = np.random.default_rng(splitmix64(config.master_seed))
        codes = generate_codes(config, code_rng)
    else:
        codes = generate_codes(config, rng)

    channels = generate_channels(config, rng)
    frame = generate_symbols(config, rng)
    noise_variance = snr_to_sigma2(config.snr_db, config)
    detector = get_detector(spec.detector)

    if spec.cooperative:
        selection = get_selector(spec.selector)(
            codes,
            channels,
            noise_variance,
            config
        )
        active = selection.members
        sinr = selection.sinr
    else:
        active = ()
        sinr = subset_sinr(
            active,
            codes,
            channels,
            power_normalize(config, active),
            noise_variance
        ).min_value

    scaled = apply_amplitudes(channels, power_normalize(config, active))
    y_sd, y_sr = synth_phase1(
        codes,
        scaled,
        frame.symbols,
        noise_variance,
        rng
    )

    if spec.cooperative:
        decisions = relay_process(
            y_sr,
            codes,
            scaled.sr,
            get_detector(spec.relay_detector or spec.detector),
            noise_variance,
            constellation,
            config.d_th,
            config.group_size,
            relays=active
        )
        y_rd = synth_phase2(
            codes,
            scaled.rd,
            decisions,
            active,
            noise_variance,
            rng,
            shape=y_sd.shape
        )
        observations = stack_destination(y_sd, y_rd)
        eff = stacked_signatures(codes, scaled, active)
    else:
        observations = y_sd
        eff = effective_matrix(codes, scaled.sd)

    context = DetectorContext(
        eff=eff,
        constellation=constellation,
        d_th=config.d_th,
        n_group=config.group_size,
        noise_variance=noise_variance
    )
    detected = np.column_stack([
        detector(observations[:, instant], context).decisions
        for instant in range(config.packet_length)
    ])

    return TrialOutcome(
        bit_errors=constellation.bit_errors(frame.symbols, detected),
        bits=frame.symbols.size * constellation.bits_per_symbol,
        set_size=len(active),
        minmax_sinr_db=_to_db(sinr)
    )


class ExperimentRunner(object):
    """
    Runs experiment specs trial by trial, optionally in parallel.

    Trials are reduced in index order so the result does not depend
    on the number of workers.
    """

    def __init__(
        self,
        workers: int = 1,
        log_level=logging.INFO,
        log_callback=None
    ):
        """Initialize class and setup logging."""
        if workers < 0:
            raise HarnessException(
                f'Worker count has to be >= 0, {workers} provided.'
            )

        self.workers = workers or os.cpu_count() or 1

        if log_callback:
            self.log = log_callback
        else:
            self.log = logging.getLogger('coop_cdma_sim')
            self.log.setLevel(log_level)

    @contextmanager
    def _pool(self):
        """One executor shared by every sweep point of a run."""
        if self.workers == 1:
            yield None
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                yield executor

    def _outcomes(
        self,
        point: ExperimentSpec,
        executor: Optional[ProcessPoolExecutor] = None
    ) -> List[TrialOutcome]:
        trials = range(point.config.trials)
        work = partial(run_trial, point)

        if executor is None:
            return [work(index) for index in trials]

        return list(executor.map(work, trials))

    def run_point(
        self,
        spec: ExperimentSpec,
        value,
        executor: Optional[ProcessPoolExecutor] = None
    ) -> ResultRow:
        point = spec.at(value)
        outcomes = self._outcomes(point, executor)

        bit_errors = sum(outcome.bit_errors for outcome in outcomes)
        bits = sum(outcome.bits for outcome in outcomes)
        row = ResultRow(
            sweep_value=value,
            detector=spec.detector.value,
            selector=spec.selector.value,
            bit_errors=bit_errors,
            bits=bits,
            ber=bit_errors / bits,
            mean_selected_set_size=float(
                np.mean([outcome.set_size for outcome in outcomes])
            ),
            mean_minmax_sinr_db=float(
                np.mean([outcome.minmax_sinr_db for outcome in outcomes])
            ),
            trials=len(outcomes),
            seed=point.config.master_seed
        )

        self.log.info(
            f'{spec.sweep_parameter.value}={value} '
            f'detector={row.detector} selector={row.selector} '
            f'ber={row.ber:.3e}'
        )
        return row

    def run_experiment(self, spec: ExperimentSpec) -> List[ResultRow]:
        """Aggregate trials per sweep point, rows sorted by sweep value."""
        return self.run_experiments([spec])

    def run_experiments(
        self,
        specs: Iterable[ExperimentSpec]
    ) -> List[ResultRow]:
        rows = []

        with self._pool() as executor:
            for spec in specs:
                rows.extend(
                    self.run_point(spec, value, executor)
                    for value in sorted(spec.sweep_values)
                )

        return rows


def run_experiment(
    spec: ExperimentSpec,
    workers: int = 1,
    log_callback=None
) -> List[ResultRow]:
    runner = ExperimentRunner(workers=workers, log_callback=log_callback)
    return runner.run_experiment(spec)


def format_number(value) -> str:
    """
    Render integers as is and reals with ten significant digits.
    """
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))

    value = float(value)

    if not math.isfinite(value):
        return str(value)

    if value == 0:
        return f'{0.0:.{SIGNIFICANT_DIGITS - 1}f}'

    # exponent of the value after rounding to the kept digits
    exponent = int(f'{value:.{SIGNIFICANT_DIGITS - 1}e}'.split('e')[1])
    decimals = max(SIGNIFICANT_DIGITS - 1 - exponent, 0)
    return f'{value:.{decimals}f}'


def write_csv(rows: Sequence[ResultRow], path: str):
    """Write result rows as UTF-8 CSV with a fixed header."""
    try:
        with open(path, 'w', encoding='utf-8', newline='') as csv_file:
            writer = csv.writer(csv_file, lineterminator='\n')
            writer.writerow(CSV_HEADER)

            for row in rows:
                writer.writerow([
                    format_number(row.sweep_value),
                    row.detector,
                    row.selector,
                    format_number(row.bit_errors),
                    format_number(row.bits),
                    format_number(row.ber),
                    format_number(row.mean_selected_set_size),
                    format_number(row.mean_minmax_sinr_db),
                    format_number(row.trials),
                    format_number(row.seed)
                ])
    except OSError as error:
        raise HarnessException(
            f'Unable to write results to {path}: {error}'
        ) from error


def read_csv(path: str) -> List[ResultRow]:
    """Parse a file produced by write_csv."""
    rows = []

    with open(path, encoding='utf-8', newline='') as csv_file:
        for record in csv.DictReader(csv_file):
            sweep = record['sweep']
            rows.append(ResultRow(
                sweep_value=float(sweep) if '.' in sweep else int(sweep),
                detector=record['detector'],
                selector=record['selector'],
                bit_errors=int(record['bit_errors']),
                bits=int(record['bits']),
                ber=float(record['ber']),
                mean_selected_set_size=float(record['mean_set_size']),
                mean_minmax_sinr_db=float(record['mean_minmax_sinr_db']),
                trials=int(record['trials']),
                seed=int(record['seed'])
            ))

    return rows


def inclusive_range(start: float, step: float, stop: float) -> List[float]:
    """start:step:stop with both ends included."""
    if step == 0 or (stop - start) * step < 0:
        raise HarnessException(
            f'Range {start}:{step}:{stop} does not progress.'
        )

    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(start) + index * step for index in range(count)]


DETECTOR_CURVES = (
    Detector.MMSE,
    Detector.SIC,
    Detector.MBSIC,
    Detector.GLSIC,
    Detector.MBGLSIC
)
SELECTOR_CURVES = (
    Selector.NONE,
    Selector.STANDARD_GREEDY,
    Selector.PROPOSED_GREEDY,
    Selector.EXHAUSTIVE
)

PRESETS: Dict[str, dict] = {
    'fig3': {
        'config': {'users': 20, 'relays': 0, 'spreading_gain': 32},
        'sweep_parameter': SweepParameter.SNR,
        'sweep_values': inclusive_range(0, 2, 14),
        'curves': [
            {'detector': detector, 'selector': Selector.NONE}
            for detector in DETECTOR_CURVES
        ],
        'cooperative': False
    },
    'fig4a': {
        'config': {'users': 10, 'relays': 6, 'spreading_gain': 16},
        'sweep_parameter': SweepParameter.SNR,
        'sweep_values': inclusive_range(0, 2, 20),
        'curves': [
            {'detector': Detector.GLSIC, 'selector': selector}
            for selector in SELECTOR_CURVES
        ],
        'cooperative': True
    },
    'fig4b': {
        'config': {
            'users': 10,
            'relays': 6,
            'spreading_gain': 16,
            'snr_db': 15.0
        },
        'sweep_parameter': SweepParameter.USERS,
        'sweep_values': [int(k) for k in inclusive_range(4, 2, 16)],
        'curves': [
            {'detector': Detector.GLSIC, 'selector': selector}
            for selector in SELECTOR_CURVES
        ],
        'cooperative': True
    },
    'fig5': {
        'config': {'users': 10, 'relays': 6, 'spreading_gain': 16},
        'sweep_parameter': SweepParameter.SNR,
        'sweep_values': inclusive_range(0, 2, 20),
        'curves': [
            {'detector': detector, 'selector': Selector.PROPOSED_GREEDY}
            for detector in (
                Detector.SIC,
                Detector.MMSE,
                Detector.MBSIC,
                Detector.GLSIC,
                Detector.MBGLSIC
            )
        ],
        'cooperative': True
    }
}


def preset_specs(
    name: str,
    sweep_values: Optional[Sequence[float]] = None,
    **overrides
) -> List[ExperimentSpec]:
    """
    Return the experiment specs of a named preset, one per curve.

    overrides replace SystemConfig fields of the preset scenario.
    """
    try:
        preset = PRESETS[name]
    except KeyError:
        raise HarnessException(
            f'Unknown preset {name}. Expected one of: '
            f'{", ".join(sorted(PRESETS))}.'
        )

    config = SystemConfig(**{**preset['config'], **overrides})

    if sweep_values is None:
        sweep_values = preset['sweep_values']

    return [
        ExperimentSpec(
            config=config,
            sweep_values=tuple(sweep_values),
            sweep_parameter=preset['sweep_parameter'],
            cooperative=preset['cooperative'],
            **curve
        )
        for curve in preset['curves']
    ]
