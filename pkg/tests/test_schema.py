from datetime import date, datetime
from pathlib import PurePath

import pytest
from pytest import mark as m

from netmark.enums import RunState
from netmark.schema import Run, RunFile, StateTransitionError, Trip, \
    find_runs
from tests.schema_fixture import nm_session

#  Stop IDEs "optimizing" away these imports
_ = nm_session


def make_run(session, command="analyze", seed=None) -> Run:
    run = Run(command, "0.1.0", seed)
    session.add(run)
    session.flush()
    return run


@m.describe("Run state transitions")
class TestStateTransitions(object):
    @m.context("When new")
    @m.it("Is started")
    def test_started(self, nm_session):
        run = make_run(nm_session, seed=7)
        assert run.is_started()
        assert run.seed == "7"

    @m.context("When started")
    @m.it("Can succeed, recording its manifest")
    def test_started_to_succeeded(self, nm_session):
        run = make_run(nm_session)
        run.succeeded(nm_session, "{}", "abc")
        assert run.is_succeeded()
        assert run.manifest == "{}"
        assert run.output_digest == "abc"

    @m.it("Can fail")
    def test_started_to_failed(self, nm_session):
        run = make_run(nm_session)
        run.failed(nm_session)
        assert run.is_failed()

    @m.context("When finished")
    @m.it("Raises exceptions on further transitions")
    def test_finished_transition_except(self, nm_session):
        run = make_run(nm_session)
        run.succeeded(nm_session, "{}", "abc")

        with pytest.raises(StateTransitionError):
            run.failed(nm_session)
        with pytest.raises(StateTransitionError):
            run.succeeded(nm_session, "{}", "abc")

        other = make_run(nm_session)
        other.failed(nm_session)
        with pytest.raises(StateTransitionError):
            other.succeeded(nm_session, "{}", "abc")


@m.describe("Run registry")
class TestFindRuns(object):
    @m.context("When runs are recorded")
    @m.it("Finds them by command and state")
    def test_find(self, nm_session):
        a = make_run(nm_session, "simulate", 1)
        b = make_run(nm_session, "analyze")
        c = make_run(nm_session, "analyze")
        a.succeeded(nm_session, "{}", "x")
        b.failed(nm_session)
        nm_session.commit()

        assert find_runs(nm_session) == [a, b, c]
        assert find_runs(nm_session, command="analyze") == [b, c]
        assert find_runs(nm_session, states=[RunState.FAILED,
                                             RunState.STARTED]) == [b, c]
        assert find_runs(nm_session, command="envelope") == []

    @m.context("When files are recorded")
    @m.it("Keeps their paths and digests")
    def test_files(self, nm_session):
        run = make_run(nm_session)
        nm_session.add(RunFile(run, "output", "/tmp/curve.csv", "d1"))
        nm_session.commit()

        found = find_runs(nm_session)[0]
        assert [(f.role, f.path, f.digest) for f in found.files] == \
               [("output", PurePath("/tmp/curve.csv"), "d1")]


@m.describe("Trips")
class TestTrip(object):
    @m.context("When created")
    @m.it("Records its month and day")
    def test_month_day(self, nm_session):
        trip = Trip("A", datetime(2022, 6, 30, 23, 59), 1200.0)
        nm_session.add(trip)
        nm_session.commit()

        found = nm_session.query(Trip).one()
        assert found.month == "2022-06"
        assert found.day == date(2022, 6, 30)
        assert found.distance == 1200.0
