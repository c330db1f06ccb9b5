# -*- coding: utf-8 -*-

"""coop-cdma-sim cooperative DS-CDMA link-level simulator."""

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

__author__ = """SUSE"""
__email__ = 'public-cloud-dev@susecloud.net'
__version__ = '0.1.0'
