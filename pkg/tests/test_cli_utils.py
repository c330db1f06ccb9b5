import logging

import click
import pytest

from unittest.mock import patch

from coop_cdma_sim.cli.cli_utils import (
    SweepType,
    build_config,
    build_preset_specs,
    build_spec,
    config_defaults,
    echo_style,
    get_config,
    parse_sweep,
    spec_arguments
)
from coop_cdma_sim.detect import Detector
from coop_cdma_sim.exceptions import HarnessException
from coop_cdma_sim.relaysel import Selector


def test_parse_sweep():
    assert parse_sweep('0:2:6') == [0.0, 2.0, 4.0, 6.0]
    assert parse_sweep('15') == [15.0]
    assert parse_sweep('1, 3,5') == [1.0, 3.0, 5.0]
    assert parse_sweep(12) == [12.0]
    assert parse_sweep([2, 4]) == [2.0, 4.0]
    assert parse_sweep('') == []


@pytest.mark.parametrize(
    'value,msg',
    [
        ('0:2', 'Malformed range 0:2'),
        ('a:1:2', 'Malformed sweep a:1:2'),
        ('1,,2', 'Malformed sweep 1,,2'),
        ('0:0:4', 'does not progress')
    ]
)
def test_parse_sweep_errors(value, msg):
    with pytest.raises(HarnessException, match=msg):
        parse_sweep(value)


def test_sweep_type_usage_error():
    with pytest.raises(click.BadParameter, match='Malformed range'):
        SweepType().convert('1:2:3:4', None, None)


def test_get_config_defaults():
    context = {'config_dir': 'tests', 'profile': 'missing', 'users': None}
    config_data = get_config(context)

    assert config_data.users == config_defaults['users']
    assert config_data.log_level == logging.INFO
    assert config_data.threads == 1


def test_get_config_precedence():
    context = {'config_dir': 'tests', 'profile': 'default2', 'users': 5}
    config_data = get_config(context)

    assert config_data.users == 5
    assert config_data.relays == 2
    assert config_data.detector == 'mbglsic'
    assert config_data.trials == 2


def test_build_spec_from_profile():
    context = {'config_dir': 'tests', 'profile': 'default2'}
    config_data = get_config(context)
    spec = build_spec(config_data)

    assert spec.detector is Detector.MBGLSIC
    assert spec.selector is Selector.EXHAUSTIVE
    assert spec.cooperative
    assert spec.sweep_values == (0.0, 10.0)
    assert spec.config.users == 3
    assert spec.config.packet_length == 20
    assert spec.config.spreading_gain == 8


def test_build_spec_without_relays():
    context = {'config_dir': 'tests', 'profile': 'default2', 'relays': 0}
    spec = build_spec(get_config(context))

    assert not spec.cooperative
    assert spec.selector is Selector.NONE


def test_build_config_power_profile():
    context = {
        'config_dir': 'tests',
        'profile': 'missing',
        'paths': 2,
        'power_profile': [0, -1]
    }
    config = build_config(get_config(context))

    assert config.power_profile_db == (0.0, -1.0)
    assert config.paths == 2
    assert config.snr_db == 15.0


@patch('coop_cdma_sim.cli.cli_utils.click')
def test_echo_style(click_mock):
    echo_style('message', no_color=True)
    click_mock.echo.assert_called_once_with('message')

    echo_style('message', no_color=False, fg='red')
    click_mock.secho.assert_called_once_with('message', fg='red')


def test_build_spec_conflicting_values():
    context = {
        'config_dir': 'tests',
        'profile': 'default2',
        'paths': 8
    }

    with pytest.raises(click.UsageError, match='Path count must satisfy'):
        build_spec(get_config(context))


def test_build_preset_specs_conflicting_values():
    context = {'config_dir': 'tests', 'profile': 'missing', 'group': 11}

    with pytest.raises(click.UsageError, match='Group size must satisfy'):
        build_preset_specs('fig4a', get_config(context))


def test_spec_arguments():
    context = {'config_dir': 'tests', 'profile': 'default2'}
    arguments = spec_arguments(build_spec(get_config(context)))

    assert arguments[arguments.index('--snr') + 1] == '0.0,10.0'
    assert arguments[arguments.index('--selector') + 1] == 'exhaustive'
    assert '--relay-detector' not in arguments
