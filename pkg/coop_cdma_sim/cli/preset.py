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
    build_preset_specs,
    echo_rows,
    get_config,
    process_scenario_options,
    process_shared_options,
    run_size_options,
    shared_options,
    echo_style
)
from coop_cdma_sim.harness import (
    PRESETS,
    ExperimentRunner,
    write_csv
)


# -----------------------------------------------------------------------------
# preset command function
@click.command()
@click.argument(
    'name',
    type=click.Choice(sorted(PRESETS))
)
@add_options(run_size_options)
@add_options(shared_options)
@click.pass_context
def preset(context, name, **kwargs):
    """
    Runs a predefined experiment, one CSV block per curve.

    fig3 compares detectors without relays, fig4a and fig4b compare
    relay selectors over SNR and user count, fig5 compares detectors
    under the proposed greedy selection.
    """
    process_shared_options(context.obj, kwargs)
    process_scenario_options(context.obj, kwargs)
    config_data = get_config(context.obj)
    logger = logging.getLogger('coop_cdma_sim')
    logger.setLevel(config_data.log_level)

    specs = build_preset_specs(name, config_data)

    try:
        runner = ExperimentRunner(
            workers=config_data.threads,
            log_level=config_data.log_level
        )
        rows = runner.run_experiments(specs)
        write_csv(rows, config_data.out)
        echo_rows(rows, config_data.no_color)

    except Exception as e:
        echo_style(
            f'Unable to run preset {name}',
            config_data.no_color,
            fg='red'
        )
        echo_style(str(e), config_data.no_color, fg='red')
        sys.exit(1)
