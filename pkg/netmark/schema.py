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

import logging
import os
from datetime import date, datetime
from pathlib import Path, PurePath
from typing import List, Union

import sqlalchemy
from sqlalchemy import Column, Date, DateTime, Enum, Float, ForeignKey, \
    Integer, String, Text
from sqlalchemy.orm import Session, declarative_base, relationship
from sqlalchemy.sql import func

from netmark.enums import RunState

log = logging.getLogger(__name__)

NetmarkDBBase = declarative_base()


class PathString(sqlalchemy.types.TypeDecorator):
    impl = sqlalchemy.types.String
    cache_ok = True

    @property
    def python_type(self):
        return Path

    def process_literal_param(self, value, dialect):
        return os.fspath(value)

    def process_bind_param(self, value, dialect):
        return os.fspath(value)

    def process_result_value(self, value, dialect):
        return PurePath(value)

    def coerce_compared_value(self, op, value):
        if isinstance(value, PurePath):
            return os.fspath(value)
        else:
            return self


class StateTransitionError(Exception):
    def __init__(self, current: RunState, new: RunState):
        """Exception raised for errors moving a Run from one state to
        another.

        Args:
            current: A RunState the Run is in.
            new: A RunState the Run is moving to.
        """
        self.current = current
        self.new = new
        self.message = "An error occurred changing state: " \
                       "invalid transition " \
                       "from {} to {}".format(self.current.name, self.new.name)

    def __repr__(self):
        return "<StateTransitionError: {}>".format(self.message)

    def __str__(self):
        return self.message


class Trip(NetmarkDBBase):
    """A single bike-share trip, attributed to its departure station."""
    __tablename__ = 'trip'

    id = Column(Integer, autoincrement=True, primary_key=True)
    station_id = Column(String(128), nullable=False, index=True)
    departure_time = Column(DateTime, nullable=False)
    month = Column(String(7), nullable=False, index=True)
    day = Column(Date, nullable=False)
    distance = Column(Float, nullable=False)

    def __init__(self, station_id: str, departure_time: datetime,
                 distance: float):
        self.station_id = station_id
        self.departure_time = departure_time
        self.month = "{:04d}-{:02d}".format(departure_time.year,
                                            departure_time.month)
        self.day = date(departure_time.year, departure_time.month,
                        departure_time.day)
        self.distance = distance

    def __repr__(self):
        return "<Trip: station={}, departure={}, " \
               "distance={}>".format(self.station_id, self.departure_time,
                                     self.distance)


class Run(NetmarkDBBase):
    """A record of one command line run and its manifest."""
    __tablename__ = 'run'

    id = Column(Integer, autoincrement=True, primary_key=True)
    command = Column(String(64), nullable=False, index=True)
    seed = Column(String(32), nullable=True)
    version = Column(String(32), nullable=False)
    state = Column(Enum(RunState,
                        create_constraint=True,
                        validate_strings=True), nullable=False)
    manifest = Column(Text, nullable=True)
    output_digest = Column(String(64), nullable=True)

    created = Column(DateTime(timezone=True), nullable=False,
                     default=func.now())
    last_updated = Column(DateTime(timezone=True), nullable=False,
                          default=func.now())

    files = relationship("RunFile", back_populates="run")

    def __init__(self, command: str, version: str, seed: int = None):
        """Create a new Run in the STARTED state.

        Args:
            command: The subcommand name.
            version: The netmark version.
            seed: The random seed, if the command takes one.
        """
        self.command = command
        self.version = version
        self.seed = None if seed is None else str(seed)
        self.state = RunState.STARTED

    def __repr__(self):
        return "<Run: id={}, command={}, seed={}, " \
               "state={}, created={} " \
               "updated={}>".format(self.id, self.command, self.seed,
                                    self.state.name, self.created,
                                    self.last_updated)

    def succeeded(self, session: Session, manifest: str, output_digest: str):
        """Changes the current state to Succeeded, recording the manifest.

        Raises:
            StateTransitionError: The run was not in the Started state.
        """
        if self.state != RunState.STARTED:
            raise StateTransitionError(self.state, RunState.SUCCEEDED)

        self.manifest = manifest
        self.output_digest = output_digest
        self._update_state(session, RunState.SUCCEEDED)

    def failed(self, session: Session):
        """Changes the current state to Failed.

        Raises:
            StateTransitionError: The run was not in the Started state.
        """
        if self.state != RunState.STARTED:
            raise StateTransitionError(self.state, RunState.FAILED)

        self._update_state(session, RunState.FAILED)

    def is_started(self):
        return self.state == RunState.STARTED

    def is_succeeded(self):
        return self.state == RunState.SUCCEEDED

    def is_failed(self):
        return self.state == RunState.FAILED

    def _update_state(self, session: Session, state: RunState):
        self.state = state
        self.last_updated = func.now()
        session.flush()


class RunFile(NetmarkDBBase):
    """An input or output file of a Run."""
    __tablename__ = 'runfile'

    id = Column(Integer, autoincrement=True, primary_key=True)
    run_id = Column(Integer, ForeignKey('run.id'), nullable=False)
    run = relationship("Run", back_populates="files")
    role = Column(String(16), nullable=False)
    path = Column(PathString(2048), nullable=False)
    digest = Column(String(64), nullable=False)

    def __init__(self, run: Run, role: str, path: Union[Path, str],
                 digest: str):
        self.run = run
        self.role = role
        self.path = Path(os.fspath(path))
        self.digest = digest

    def __repr__(self):
        return "<RunFile: {} {} {}>".format(self.role, self.path, self.digest)


def find_runs(session: Session, command: str = None,
              states: List[RunState] = None) -> List[Run]:
    """Returns recorded runs, optionally limited to a command and states.

    Args:
        session: An open Session.
        command: A subcommand name. Optional.
        states: A list of states the runs must have. Optional.

    Returns: List[Run]
    """
    q = session.query(Run)
    if command:
        q = q.filter(Run.command == command)
    if states:
        q = q.filter(Run.state.in_(states))

    return q.order_by(Run.id).all()
