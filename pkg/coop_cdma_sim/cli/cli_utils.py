# -*- coding: utf-8 -*-

"""Cooperative DS-CDMA simulator cli module utils."""

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

import click
import logging
import os
import sys
import yaml

from collections import namedtuple, ChainMap

from coop_cdma_sim.detect import Detector
from coop_cdma_sim.exceptions import ConfigException, HarnessException
from coop_cdma_sim.harness import (
    ExperimentSpec,
    SweepParameter,
    format_number,
    inclusive_range,
    preset_specs
)
from coop_cdma_sim.relaysel import Selector
from coop_cdma_sim.sysmodel import Modulation, SystemConfig


default_config_dir = os.path.expanduser('~/.config/coop_cdma_sim/')
default_profile = 'default'

config_defaults = {
    'config_dir': default_config_dir,
    'profile': default_profile,
    'log_level': logging.INFO,
    'no_color': False,
    'threads': 1,
    'out': 'results.csv',
    'users': 10,
    'relays': 6,
    'spreading': 16,
    'paths': 3,
    'modulation': Modulation.BPSK.value,
    'dth': 0.25,
    'group': 2,
    'packet': 1000,
    'snr': '15',
    'trials': 300,
    'seed': 0,
    'detector': Detector.GLSIC.value,
    'selector': Selector.PROPOSED_GREEDY.value,
    'relay_detector': None,
    'power_profile': None,
    'fixed_codes': False
}

coop_cdma_sim_config = namedtuple(
    'coop_cdma_sim_config',
    sorted(config_defaults)
)


def parse_sweep(value):
    """
    Expand a sweep given as a list, a number, a comma separated list
    or an inclusive start:step:stop range.
    """
    if isinstance(value, (list, tuple)):
        return [float(item) for item in value]

    if isinstance(value, (int, float)):
        return [float(value)]

    text = str(value).strip()

    if not text:
        return []

    try:
        if ':' in text:
            parts = text.split(':')

            if len(parts) != 3:
                raise HarnessException(
                    f'Malformed range {text}, expected start:step:stop.'
                )

            start, step, stop = (float(part) for part in parts)
            return inclusive_range(start, step, stop)

        return [float(part) for part in text.split(',')]
    except ValueError:
        raise HarnessException(f'Malformed sweep {text}.')


class SweepType(click.ParamType):
    name = 'sweep'

    def convert(self, value, param, ctx):
        try:
            return parse_sweep(value)
        except HarnessException as error:
            self.fail(str(error), param, ctx)


# -----------------------------------------------------------------------------
# Shared options
log_options = [
    click.option(
        '-C',
        '--config-dir',
        type=click.Path(exists=True),
        help='Simulator config directory to use. Default: '
             '~/.config/coop_cdma_sim/'
    ),
    click.option(
        '--profile',
        help='The configuration profile to use. Expected to match '
             'a config file in config directory. Example: fig4, '
             'for ~/.config/coop_cdma_sim/fig4.yaml. The default '
             'value is default: ~/.config/coop_cdma_sim/default.yaml'
    ),
    click.option(
        '--no-color',
        is_flag=True,
        help='Remove ANSI color and styling from output.'
    ),
    click.option(
        '--verbose',
        'log_level',
        flag_value=logging.DEBUG,
        help='Display debug level logging to console.'
    ),
    click.option(
        '--info',
        'log_level',
        flag_value=logging.INFO,
        default=True,
        help='Display logging info to console. (Default)'
    ),
    click.option(
        '--quiet',
        'log_level',
        flag_value=logging.ERROR,
        help='Display only errors to console.'
    )
]

shared_options = log_options + [
    click.option(
        '--threads',
        type=click.IntRange(min=0),
        envvar='SIM_THREADS',
        help='Worker processes for the trials, 0 uses every cpu. '
             'Also read from SIM_THREADS.'
    ),
    click.option(
        '--out',
        type=click.Path(dir_okay=False),
        help='CSV file receiving the results. Default: results.csv'
    )
]

run_size_options = [
    click.option(
        '--modulation',
        type=click.Choice([m.value for m in Modulation]),
        help='Symbol alphabet of every user.'
    ),
    click.option(
        '--dth',
        type=click.FloatRange(min=0),
        help='Half width of the grey region around decision boundaries.'
    ),
    click.option(
        '--group',
        type=click.IntRange(min=1),
        help='Users examined per detection stage.'
    ),
    click.option(
        '--packet',
        type=click.IntRange(min=1),
        help='Symbols per packet.'
    ),
    click.option(
        '--trials',
        type=click.IntRange(min=1),
        help='Monte Carlo trials (packets) per sweep point.'
    ),
    click.option(
        '--seed',
        type=click.IntRange(min=0),
        help='Master seed of the experiment.'
    )
]

scenario_options = [
    click.option(
        '--users',
        type=click.IntRange(min=1),
        help='Number of active users.'
    ),
    click.option(
        '--relays',
        type=click.IntRange(min=0),
        help='Number of relays, 0 disables cooperation.'
    ),
    click.option(
        '--spreading',
        type=click.IntRange(min=2),
        help='Spreading gain in chips per symbol.'
    ),
    click.option(
        '--paths',
        type=click.IntRange(min=1),
        help='Multipath taps per link.'
    ),
    click.option(
        '--snr',
        type=SweepType(),
        help='SNR points in dB, comma separated or start:step:stop.'
    ),
    click.option(
        '--detector',
        type=click.Choice([d.value for d in Detector]),
        help='Detector at the destination.'
    ),
    click.option(
        '--relay-detector',
        type=click.Choice([d.value for d in Detector]),
        help='Detector at the relays. Defaults to --detector.'
    ),
    click.option(
        '--selector',
        type=click.Choice([s.value for s in Selector]),
        help='Relay selection algorithm.'
    )
] + run_size_options


def add_options(options):
    def _add_options(func):
        for option in reversed(options):
            func = option(func)
        return func
    return _add_options


# -------------------------------------------------
# Get Config
def get_config(cli_context):
    """
    Process simulator config.
    Use ChainMap to build config values based on
    command line args, config and defaults.
    """
    config_dir = cli_context.get('config_dir') or default_config_dir
    profile = cli_context.get('profile') or default_profile

    config_values = {}
    config_file_path = os.path.join(config_dir, profile + '.yaml')

    try:
        with open(config_file_path) as config_file:
            config_values = yaml.safe_load(config_file) or {}
    except FileNotFoundError:
        echo_style(
            f'Config file: {config_file_path} not found. Using default '
            f'configuration values.',
            no_color=True
        )

    cli_values = {
        key: value for key, value in cli_context.items() if value is not None
    }
    data = ChainMap(cli_values, config_values, config_defaults)

    try:
        config_data = coop_cdma_sim_config(**data)
    except TypeError as e:
        echo_style(
            f'Found unknown keyword in config file {config_file_path}',
            no_color=True
        )
        echo_style(str(e), no_color=True)
        sys.exit(1)

    return config_data


# -----------------------------------------------------------------------------
# Printing options
def echo_style(message, no_color, fg='yellow'):
    """
    Echo stylized output to terminal depending on no_color.
    """
    if no_color:
        click.echo(message)
    else:
        click.secho(message, fg=fg)


def echo_rows(rows, no_color):
    """Print one summary line per result row."""
    for row in rows:
        echo_style(
            f'sweep={format_number(row.sweep_value)} '
            f'detector={row.detector} '
            f'selector={row.selector} '
            f'ber={row.ber:.6e}',
            no_color,
            fg='green'
        )


# -----------------------------------------------------------------------------
# Process shared options to all commands
def process_shared_options(context_obj, kwargs):
    """
    Update context with values for shared options.
    """
    context_obj['config_dir'] = kwargs.get('config_dir')
    context_obj['log_level'] = kwargs.get('log_level')
    context_obj['no_color'] = kwargs.get('no_color')
    context_obj['profile'] = kwargs.get('profile')
    context_obj['threads'] = kwargs.get('threads')
    context_obj['out'] = kwargs.get('out')


def process_scenario_options(context_obj, kwargs):
    """
    Update context with values for the scenario options.
    """
    for key in (
        'users',
        'relays',
        'spreading',
        'paths',
        'snr',
        'detector',
        'relay_detector',
        'selector',
        'modulation',
        'dth',
        'group',
        'packet',
        'trials',
        'seed'
    ):
        context_obj[key] = kwargs.get(key)


# -----------------------------------------------------------------------------
# Build api objects from the merged config
def run_size_overrides(config_data):
    """SystemConfig fields every command lets the user override."""
    return {
        'modulation': config_data.modulation,
        'd_th': config_data.dth,
        'group_size': config_data.group,
        'packet_length': config_data.packet,
        'trials': config_data.trials,
        'master_seed': config_data.seed,
        'fixed_codes': config_data.fixed_codes
    }


def build_config(config_data):
    """
    Return the SystemConfig described by the merged config.

    snr_db holds the first sweep point, the sweep overrides it per row.
    """
    sweep = parse_sweep(config_data.snr)

    return SystemConfig(
        users=config_data.users,
        relays=config_data.relays,
        spreading_gain=config_data.spreading,
        paths=config_data.paths,
        snr_db=sweep[0] if sweep else 0.0,
        power_profile_db=config_data.power_profile,
        **run_size_overrides(config_data)
    )


def build_spec(config_data):
    """
    Return the ExperimentSpec of the run command.

    Without relays the run is direct only and no selection happens.
    Conflicting scenario values are reported as usage errors.
    """
    cooperative = config_data.relays > 0

    try:
        return ExperimentSpec(
            config=build_config(config_data),
            sweep_values=tuple(parse_sweep(config_data.snr)),
            sweep_parameter=SweepParameter.SNR,
            detector=config_data.detector,
            selector=(
                config_data.selector if cooperative else Selector.NONE
            ),
            cooperative=cooperative,
            relay_detector=config_data.relay_detector
        )
    except (ConfigException, HarnessException) as error:
        raise click.UsageError(str(error))


def build_preset_specs(name, config_data):
    """Preset specs with the run size overrides of config_data."""
    try:
        return preset_specs(name, **run_size_overrides(config_data))
    except (ConfigException, HarnessException) as error:
        raise click.UsageError(str(error))


def format_sweep(values):
    return ','.join(str(float(value)) for value in values)


def spec_arguments(spec):
    """
    Return the run command flags that rebuild spec.

    Profile only settings (power_profile, fixed_codes) are not
    part of the result.
    """
    config = spec.config
    arguments = [
        '--users', str(config.users),
        '--relays', str(config.relays),
        '--spreading', str(config.spreading_gain),
        '--paths', str(config.paths),
        '--snr', format_sweep(spec.sweep_values),
        '--detector', spec.detector.value,
        '--selector', spec.selector.value,
        '--modulation', config.modulation.value,
        '--dth', str(float(config.d_th)),
        '--group', str(config.group_size),
        '--packet', str(config.packet_length),
        '--trials', str(config.trials),
        '--seed', str(config.master_seed)
    ]

    if spec.relay_detector is not None:
        arguments += ['--relay-detector', spec.relay_detector.value]

    return arguments
