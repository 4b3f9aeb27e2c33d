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

import configparser
import logging
import os
import pwd
from pathlib import Path
from typing import List, Optional

log = logging.getLogger(__package__)

DEFAULTS = {
    "network": {"snap_tol": "1e-6"},
    "estimate": {"nr": "100",
                 "rmax_fraction": "0.25",
                 "bandwidth_factor": "0.15"},
    "envelope": {"nperm": "500",
                 "alpha": "0.05"},
    "profiles": {"snap_threshold": "250.0"},
    "runtime": {"threads": "1"},
}
"""Built-in values used for any key not set in a netmark.ini file."""


def get_config_paths() -> List[str]:
    """Returns a list of paths to be searched for a netmark.ini
    configuration file. These are, in order of priority:

    1. If the environment variable NETMARK_CONFIG is set, the path
    specified by ${NETMARK_CONFIG}

    2. In the current working directory  ${CWD}/netmark.ini

    3. ${XDG_DATA_HOME}/netmark/netmark.ini, where XDG_DATA_HOME defaults
    to ${HOME}/.local/share

    4. ${HOME}/.netmark/netmark.ini
    """
    config_file = "netmark.ini"
    config_dir = "netmark"
    dot_config_dir = "." + config_dir

    user = pwd.getpwuid(os.getuid()).pw_name
    home = os.getenv("HOME", os.path.join("home", user))
    xdg_data_home = os.getenv("XDG_DATA_HOME",
                              os.path.join(home, ".local", "share"))

    override_path = os.environ.get("NETMARK_CONFIG")

    paths = []
    if override_path:
        paths.append(override_path)

    paths.append(os.path.join(os.getcwd(), config_file))

    if xdg_data_home:
        paths.append(os.path.join(xdg_data_home, config_dir, config_file))
    if home:
        paths.append(os.path.join(home, dot_config_dir, config_file))

    return paths


def default_config() -> configparser.ConfigParser:
    """Returns a configuration holding only the built-in defaults."""
    conf = configparser.ConfigParser()
    conf.read_dict(DEFAULTS)
    return conf


def read_config(path: Optional[str] = None) -> configparser.ConfigParser:
    """Reads the first config file available from the list of paths
    returned by get_config_paths() (or the explicit path, if given) over the
    built-in defaults, returning the configuration. If no file is found, the
    defaults are returned.

    Args:
        path: An explicit configuration file path. Optional.

    Returns: configparser.ConfigParser
    """
    conf = default_config()

    search = [path] if path else get_config_paths()
    for p in search:
        f = Path(p)
        if f.is_file():
            log.debug("Reading configuration from {}".format(f))
            conf.read(f)
            return conf

    if path:
        raise FileNotFoundError("No configuration file found "
                                "in: {}".format(search))

    log.debug("No configuration file found in {}; "
              "using defaults".format(search))
    return conf


def resolve_threads(conf: configparser.ConfigParser,
                    threads: Optional[int] = None) -> int:
    """Returns the worker thread count. An explicit value takes precedence
    over the NETMARK_THREADS environment variable, which takes precedence
    over the [runtime] threads configuration key.

    Args:
        conf: A configuration.
        threads: An explicit thread count. Optional.

    Returns: int
    """
    if threads is None:
        env = os.environ.get("NETMARK_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ValueError("Invalid NETMARK_THREADS value "
                                 "'{}'".format(env))
        else:
            threads = conf.getint("runtime", "threads")

    if threads < 1:
        raise ValueError("The thread count must be at least 1, "
                         "was {}".format(threads))
    return threads
