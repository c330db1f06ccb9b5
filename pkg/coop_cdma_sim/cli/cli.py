# -*- coding: utf-8 -*-

"""Cooperative DS-CDMA simulator cli module."""

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

from coop_cdma_sim.cli.preset import preset
from coop_cdma_sim.cli.run import run
from coop_cdma_sim.cli.selftest import selftest


# -----------------------------------------------------------------------------
# license function
def print_license(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo('GPLv3+')
    ctx.exit()


# -----------------------------------------------------------------------------
# Main function
@click.group()
@click.version_option()
@click.option(
    '--license',
    is_flag=True,
    callback=print_license,
    expose_value=False,
    is_eager=True,
    help='Show license information.'
)
@click.pass_context
def coop_cdma_sim(context):
    """
    The command line interface provides cooperative DS-CDMA simulations.

    This includes custom BER experiments, the predefined detector and
    relay selection experiments and a quick self test.
    """
    if context.obj is None:
        context.obj = {}
    pass


coop_cdma_sim.add_command(run)
coop_cdma_sim.add_command(preset)
coop_cdma_sim.add_command(selftest)
