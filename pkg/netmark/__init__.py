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

import os
import threading

from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from netmark.schema import NetmarkDBBase

__version__ = "0.1.0"


class ConfigurationError(Exception):
    """Exception raised for errors in the configuration or environment."""

    def __init__(self, message: str):
        self.message = message

    def __str__(self):
        return self.message


class NetmarkError(Exception):
    """Base exception for netmark domain errors.

    The exit_code is the process exit status the command line front end
    uses when the error reaches it.
    """
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return self.message


def make_session_factory(uri: str) -> sessionmaker:
    """Returns a session factory bound to a new engine for uri, creating any
    missing tables."""
    engine = create_engine(uri, echo=False)
    NetmarkDBBase.metadata.create_all(engine)

    return sessionmaker(bind=engine)


def _init_netmark_db():
    uri = os.environ.get("NETMARK_DB_URI")
    if not uri:
        return None

    return make_session_factory(uri)


db_lock = threading.Lock()
DBSession = _init_netmark_db()


def has_db_session() -> bool:
    """Returns true if a run registry database has been configured."""
    return DBSession is not None


def get_db_session() -> Session:
    """Get a new SQL session for the netmark database from the factory. This
    function ensures thread safe access to the SQLAlchemy database engine.

    Returns: Session
    """
    if DBSession is None:
        raise ConfigurationError("The NETMARK_DB_URI environment variable is "
                                 "not set. This should be set to the "
                                 "database connection URI of the netmark "
                                 "run registry")
    with db_lock:
        return DBSession()
