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

import hashlib
from argparse import ArgumentTypeError
from datetime import datetime
from pathlib import Path
from typing import Tuple, Union

from netmark.enums import Scenario, TestFunctionId


def is_builtins_module(module_name: str) -> bool:
    """Returns true if the named module is the builtins module."""
    # Refer to the builtin object class
    return module_name == object.__class__.__module__


def qualified_class_name(cls: type) -> str:
    """Returns the qualified class name of a class."""
    module = cls.__module__
    name = cls.__name__

    if module is None:
        return name

    if is_builtins_module(module):
        return name

    return ".".join([module, name])


def format_float(x: float) -> str:
    """Renders a float with 17 significant digits, which round-trips any
    IEEE double exactly."""
    return format(float(x), ".17g")


def format_bool(b: bool) -> str:
    return "true" if b else "false"


def file_digest(path: Union[Path, str]) -> str:
    """Returns the SHA-256 hex digest of a file's contents."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def month_label(dt: datetime) -> str:
    """Returns the YYYY-MM month label of a datetime."""
    return "{:04d}-{:02d}".format(dt.year, dt.month)


def parse_month(s: str) -> Tuple[int, int]:
    """Parses a YYYY-MM month label into a year, month tuple."""
    try:
        dt = datetime.strptime(s, "%Y-%m")
    except ValueError:
        raise ValueError("Invalid month: '{}', expected YYYY-MM".format(s))
    return dt.year, dt.month


def valid_month(s: str) -> str:
    """Parse a YYYY-MM month label or raise an ArgumentTypeError."""
    try:
        parse_month(s)
    except ValueError as e:
        raise ArgumentTypeError(str(e))
    return s


def valid_stat(s: str) -> TestFunctionId:
    """Parse a statistic name or raise an ArgumentTypeError.

    Args:
        s: A statistic name e.g. "variogram".

    Returns: a TestFunctionId enum member.
    """
    try:
        return TestFunctionId(s)
    except ValueError:
        avail = [tf.value for tf in TestFunctionId]
        raise ArgumentTypeError("Unknown statistic: '{}'. "
                                "Available statistics are: {}".format(s,
                                                                      avail))


def valid_scenario(s: str) -> Scenario:
    """Parse a simulation scenario number or raise an ArgumentTypeError."""
    try:
        return Scenario(int(s))
    except ValueError:
        avail = [sc.value for sc in Scenario]
        raise ArgumentTypeError("Unknown scenario: '{}'. "
                                "Available scenarios are: {}".format(s,
                                                                     avail))


def valid_seed(s: str) -> int:
    """Parse an unsigned 64-bit seed or raise an ArgumentTypeError."""
    try:
        seed = int(s, 0)
    except ValueError:
        raise ArgumentTypeError("Invalid seed: '{}'.".format(s))
    if not 0 <= seed < 2 ** 64:
        raise ArgumentTypeError("Seed {} is outside the unsigned 64-bit "
                                "range".format(seed))
    return seed


def positive_float(s: str) -> float:
    """Parse a strictly positive float or raise an ArgumentTypeError."""
    try:
        v = float(s)
    except ValueError:
        raise ArgumentTypeError("Invalid number: '{}'.".format(s))
    if not v > 0:
        raise ArgumentTypeError("Expected a positive number, "
                                "got {}".format(s))
    return v


def non_negative_float(s: str) -> float:
    """Parse a float >= 0 or raise an ArgumentTypeError."""
    try:
        v = float(s)
    except ValueError:
        raise ArgumentTypeError("Invalid number: '{}'.".format(s))
    if not v >= 0:
        raise ArgumentTypeError("Expected a non-negative number, "
                                "got {}".format(s))
    return v


def positive_int(s: str) -> int:
    """Parse a strictly positive integer or raise an ArgumentTypeError."""
    try:
        v = int(s)
    except ValueError:
        raise ArgumentTypeError("Invalid integer: '{}'.".format(s))
    if v < 1:
        raise ArgumentTypeError("Expected a positive integer, "
                                "got {}".format(s))
    return v


def valid_alpha(s: str) -> float:
    """Parse a significance level in the open interval (0, 1) or raise an
    ArgumentTypeError."""
    try:
        v = float(s)
    except ValueError:
        raise ArgumentTypeError("Invalid number: '{}'.".format(s))
    if not 0 < v < 1:
        raise ArgumentTypeError("Expected a significance level between 0 "
                                "and 1, got {}".format(s))
    return v
