# -*- coding: utf-8 -*-
#
# Copyright © 2024 The netmark authors. All rights reserved.
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

from enum import Enum, unique


@unique
class TestFunctionId(Enum):
    """The pointwise test functions. Member values are the statistic names
    accepted on the command line."""
    __test__ = False

    T1_StoyanCorr = "markcorr"
    T2_BeisbartKerscher = "beisbart"
    T3_RMarkLeft = "rmark-left"
    T4_RMarkRight = "rmark-right"
    T5_MarkVariogram = "variogram"
    T6_StoyanCov = "cov"
    T7_IshamCorr = "isham"
    T8_SchlatherI = "schlather"
    T9_ShimantaniI = "shimantani"


@unique
class Scenario(Enum):
    One = 1
    Two = 2
    Three = 3


@unique
class RunState(Enum):
    STARTED = "Run has started"
    SUCCEEDED = "Run completed successfully"
    FAILED = "Run has failed"


@unique
class ExportFormat(Enum):
    CSV = "csv"
    JSON = "json"


@unique
class NetworkFormat(Enum):
    CSV = "csv"
    GEOJSON = "geojson"
