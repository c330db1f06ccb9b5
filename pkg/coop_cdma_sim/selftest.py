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

import logging

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from coop_cdma_sim.detect import (
    DETECTORS,
    Detector,
    DetectorContext,
    conventional_sic,
    gl_sic,
    list_metric,
    ml_oracle
)
from coop_cdma_sim.exceptions import CoopCdmaSimException
from coop_cdma_sim.harness import ExperimentSpec, run_trial
from coop_cdma_sim.relaysel import (
    select_exhaustive,
    select_proposed_greedy,
    select_standard_greedy
)
from coop_cdma_sim.sysmodel import (
    BPSK,
    LinkChannel,
    SystemConfig,
    effective_matrix,
    generate_channels,
    generate_codes,
    signature_matrix
)
from coop_cdma_sim.txsim import complex_noise, snr_to_sigma2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ''


def _hadamard(order: int) -> np.ndarray:
    matrix = np.array([[1.0]])

    while matrix.shape[0] < order:
        matrix = np.kron(matrix, np.array([[1.0, 1.0], [1.0, -1.0]]))

    return matrix


def _unit_links(rng: np.random.Generator, users: int):
    phases = rng.uniform(0.0, 2.0 * np.pi, size=users)
    return [LinkChannel(taps=np.array([np.exp(1j * p)])) for p in phases]


def _random_symbols(rng, users, count):
    return BPSK.points[rng.integers(0, 2, size=(users, count))]


def check_orthogonal_exactness(rng: np.random.Generator) -> str:
    """Every detector is error free on noiseless orthogonal codes."""
    users, spreading = 4, 8
    codes = [
        signature_matrix(row / np.sqrt(spreading), 1)
        for row in _hadamard(spreading)[1:users + 1]
    ]
    eff = effective_matrix(codes, _unit_links(rng, users))
    context = DetectorContext(eff, BPSK, 0.25, 2, 0.0)
    symbols = _random_symbols(rng, users, 100)

    for detector, detect in DETECTORS.items():
        for instant in range(symbols.shape[1]):
            sent = symbols[:, instant]
            decided = detect(eff @ sent, context).decisions

            if BPSK.bit_errors(sent, decided):
                raise CoopCdmaSimException(
                    f'{detector.value} erred on a noiseless frame.'
                )

    return f'{len(DETECTORS)} detectors, {symbols.size} symbols'


def check_decorrelating_exactness(rng: np.random.Generator) -> str:
    """MMSE at zero noise and the ML oracle invert random codes."""
    config = SystemConfig(users=4, relays=0, spreading_gain=8, paths=1)

    while True:
        codes = generate_codes(config, rng)
        eff = effective_matrix(codes, _unit_links(rng, config.users))

        if np.linalg.matrix_rank(eff) == config.users:
            break

    context = DetectorContext(eff, BPSK, config.d_th, 2, 0.0)
    symbols = _random_symbols(rng, config.users, 100)

    for detect in (DETECTORS[Detector.MMSE], ml_oracle):
        for instant in range(symbols.shape[1]):
            sent = symbols[:, instant]

            if BPSK.bit_errors(sent, detect(eff @ sent, context).decisions):
                raise CoopCdmaSimException(
                    f'{detect.__name__} erred on a noiseless frame.'
                )

    return f'{symbols.size} symbols'


def check_reliable_path(rng: np.random.Generator) -> str:
    """GL-SIC collapses to conventional SIC when d_th is zero."""
    config = SystemConfig(users=6, relays=0, spreading_gain=16)
    noise_variance = snr_to_sigma2(6.0)
    frames = 100

    for _ in range(frames):
        codes = generate_codes(config, rng)
        eff = effective_matrix(codes, generate_channels(config, rng).sd)
        context = DetectorContext(eff, BPSK, 0.0, 2, noise_variance)
        sent = _random_symbols(rng, config.users, 1)[:, 0]
        y = eff @ sent + complex_noise(rng, (eff.shape[0],), noise_variance)

        listed = gl_sic(y, context)
        conventional = conventional_sic(y, context)

        if not np.array_equal(listed.decisions, conventional.decisions):
            raise CoopCdmaSimException(
                'GL-SIC differs from conventional SIC with d_th = 0.'
            )

        if list_metric(y, context, listed.decisions) < list_metric(
            y, context, ml_oracle(y, context).decisions
        ):
            raise CoopCdmaSimException(
                'A GL-SIC list beat the ML metric.'
            )

    return f'{frames} frames'


def check_selection(rng: np.random.Generator) -> str:
    """Exhaustive dominates greedy and evaluation counts stay bounded."""
    config = SystemConfig(users=10, relays=6, spreading_gain=16)
    noise_variance = snr_to_sigma2(15.0)
    relays = config.relays
    instances = 10

    for _ in range(instances):
        codes = generate_codes(config, rng)
        channels = generate_channels(config, rng)
        args = (codes, channels, noise_variance, config)

        best = select_exhaustive(*args)
        proposed = select_proposed_greedy(*args)
        standard = select_standard_greedy(*args)

        if best.evaluations != 2 ** relays - 1:
            raise CoopCdmaSimException(
                f'Exhaustive search ran {best.evaluations} evaluations.'
            )

        if proposed.evaluations > relays * (relays + 1) // 2:
            raise CoopCdmaSimException(
                f'Proposed greedy ran {proposed.evaluations} evaluations.'
            )

        if standard.evaluations > relays:
            raise CoopCdmaSimException(
                f'Standard greedy ran {standard.evaluations} evaluations.'
            )

        if best.sinr < proposed.sinr or best.sinr < standard.sinr:
            raise CoopCdmaSimException('A greedy subset beat exhaustive.')

        accepted = proposed.accepted
        if any(b <= a for a, b in zip(accepted, accepted[1:])):
            raise CoopCdmaSimException(
                'Accepted SINR sequence is not increasing.'
            )

    return f'{instances} instances'


def check_determinism(rng: np.random.Generator) -> str:
    """Identical seeds reproduce identical trials."""
    config = SystemConfig(
        users=4,
        relays=2,
        spreading_gain=8,
        packet_length=20,
        trials=2,
        master_seed=int(rng.integers(0, 2 ** 32))
    )
    spec = ExperimentSpec(
        config=config,
        sweep_values=(10.0,),
        detector=Detector.GLSIC,
        selector='proposed'
    )

    for trial in range(config.trials):
        if run_trial(spec, trial) != run_trial(spec, trial):
            raise CoopCdmaSimException(f'Trial {trial} is not reproducible.')

    return f'{config.trials} trials'


CHECKS: List[Callable[[np.random.Generator], str]] = [
    check_orthogonal_exactness,
    check_decorrelating_exactness,
    check_reliable_path,
    check_selection,
    check_determinism
]


def run_selftest(seed: int = 0, log_callback=None) -> List[CheckResult]:
    """Run the fast acceptance checks and report each one."""
    log = log_callback or logging.getLogger('coop_cdma_sim')
    results = []

    for check in CHECKS:
        name = check.__name__[len('check_'):]
        rng = np.random.default_rng(seed)

        try:
            detail = check(rng)
        except CoopCdmaSimException as error:
            results.append(CheckResult(name, False, str(error)))
        else:
            results.append(CheckResult(name, True, detail))

        log.debug(f'Self test {name}: {results[-1]}')

    return results
