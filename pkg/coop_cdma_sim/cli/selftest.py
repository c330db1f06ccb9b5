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
import sys

from coop_cdma_sim.cli.cli_utils import (
    add_options,
    get_config,
    log_options,
    process_shared_options,
    echo_style
)
from coop_cdma_sim.selftest import run_selftest


# -----------------------------------------------------------------------------
# selftest command function
@click.command()
@click.option(
    '--seed',
    type=click.IntRange(min=0),
    default=0,
    help='Seed of the random instances.'
)
@add_options(log_options)
@click.pass_context
def selftest(context, seed, **kwargs):
    """
    Runs the fast acceptance checks and reports pass or fail.
    """
    process_shared_options(context.obj, kwargs)
    config_data = get_config(context.obj)
    logger = logging.getLogger('coop_cdma_sim')
    logger.setLevel(config_data.log_level)

    try:
        results = run_selftest(seed=seed)
    except Exception as e:
        echo_style('Unable to run self test', config_data.no_color, fg='red')
        echo_style(str(e), config_data.no_color, fg='red')
        sys.exit(1)

    for result in results:
        if result.passed:
            echo_style(
                f'PASS {result.name}: {result.detail}',
                config_data.no_color,
                fg='green'
            )
        else:
            echo_style(
                f'FAIL {result.name}: {result.detail}',
                config_data.no_color,
                fg='red'
            )

    if not all(result.passed for result in results):
        sys.exit(1)
