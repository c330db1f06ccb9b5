# -*- coding: utf-8 -*-

"""Cooperative CDMA simulator exceptions module."""

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


class CoopCdmaSimException(Exception):
    """Generic exception for the coop_cdma_sim package."""


class ConfigException(CoopCdmaSimException):
    """Exception for invalid scenario configuration."""


class SystemModelException(CoopCdmaSimException):
    """Exception for codes, channels and signal dimensions."""


class DetectorException(CoopCdmaSimException):
    """Exception for multiuser detection processes."""


class RelaySelectionException(CoopCdmaSimException):
    """Exception for relay selection processes."""


class HarnessException(CoopCdmaSimException):
    """Exception for Monte Carlo experiment processes."""
