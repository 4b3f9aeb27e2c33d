import json
from pathlib import Path

import numpy as np
import pytest
from pytest import mark as m

from netmark.cli import main
from netmark.dataio import load_marked_pattern, load_network
from netmark.enums import TestFunctionId
from netmark.netgeom import NetworkPoint
from netmark.utilities import file_digest
from tests.network_fixture import augmented_distances, grid_segments
from tests.test_estim import oracle_curve, oracle_surface

test_ini = str(Path(__file__).parent / "test.ini")


def write_network(path: Path, segments) -> Path:
    lines = ["seg_id,x1,y1,x2,y2"]
    for i, ((x1, y1), (x2, y2)) in enumerate(segments):
        lines.append("{},{!r},{!r},{!r},{!r}".format(i, x1, y1, x2, y2))
    path.write_text("\n".join(lines) + "\n")
    return path


def run(*argv) -> int:
    return main(["-c", test_ini] + [str(a) for a in argv])


@pytest.fixture(scope="function")
def grid_csv(tmp_path):
    yield write_network(tmp_path / "grid.csv", grid_segments())


@pytest.fixture(scope="function")
def simulated(tmp_path, grid_csv):
    """A simulated pattern written to points.csv and marks.csv."""
    points, marks = tmp_path / "points.csv", tmp_path / "marks.csv"
    assert run("simulate", "--network", grid_csv, "--lambda", "0.02",
               "--timestamps", "6", "--seed", "17",
               "--out-points", points, "--out-marks", marks) == 0
    yield grid_csv, points, marks


def read_curve(path: Path):
    rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
    return [(row[0], float(row[1]), float(row[2]), row[3]) for row in rows]


@m.describe("Command line")
class TestSimulate(object):
    @m.context("When simulating twice with a seed")
    @m.it("Writes identical files and a manifest")
    def test_deterministic(self, tmp_path, grid_csv):
        digests = []
        for name in ("a", "b"):
            points = tmp_path / (name + "_points.csv")
            marks = tmp_path / (name + "_marks.csv")
            assert run("simulate", "--network", grid_csv, "--lambda", "0.02",
                       "--scenario", "3", "--radius", "150", "--seed", "5",
                       "--out-points", points, "--out-marks", marks) == 0
            digests.append((file_digest(points), file_digest(marks)))
        assert digests[0] == digests[1]

        manifest = json.loads(
            (tmp_path / "a_points.csv.manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 5
        assert manifest["parameters"]["scenario"] == 3
        assert manifest["outputs"][str(tmp_path / "a_points.csv")] == \
               digests[0][0]
        assert str(grid_csv) in manifest["inputs"]

    @m.context("When Scenario Two has no border")
    @m.it("Exits with status 2")
    def test_no_border(self, tmp_path):
        ring = write_network(tmp_path / "ring.csv",
                             [((0.0, 0.0), (100.0, 0.0)),
                              ((100.0, 0.0), (100.0, 100.0)),
                              ((100.0, 100.0), (0.0, 100.0)),
                              ((0.0, 100.0), (0.0, 0.0))])
        assert run("simulate", "--network", ring, "--lambda", "0.5",
                   "--scenario", "2", "--seed", "1",
                   "--out-points", tmp_path / "p.csv",
                   "--out-marks", tmp_path / "m.csv") == 2

    @m.context("When the network file is missing")
    @m.it("Exits with status 1")
    def test_missing_input(self, tmp_path):
        assert run("simulate", "--network", tmp_path / "none.csv",
                   "--lambda", "0.5", "--seed", "1",
                   "--out-points", tmp_path / "p.csv",
                   "--out-marks", tmp_path / "m.csv") == 1


@m.describe("Command line")
class TestAnalyze(object):
    @m.context("When the statistic is unknown")
    @m.it("Exits with status 2")
    def test_unknown_stat(self, simulated, tmp_path):
        network, points, marks = simulated
        with pytest.raises(SystemExit) as info:
            run("analyze", "--network", network, "--pattern", points,
                "--marks", marks, "--stat", "nonesuch",
                "--out", tmp_path / "c.csv")
        assert info.value.code == 2

    @m.context("When estimating a curve")
    @m.it("Matches a pair-loop estimate")
    def test_markcorr(self, grid_csv, tmp_path):
        locations = [(0, 20.0), (1, 35.0), (2, 80.0), (5, 10.0), (9, 55.0),
                     (14, 90.0)]
        values = [[1.0, 2.5, 0.5], [3.0, 1.0, 2.0], [2.0, 2.0, 4.0],
                  [0.5, 4.0, 1.5], [5.0, 0.5, 3.0], [1.5, 3.5, 2.5]]
        points, marks = tmp_path / "points.csv", tmp_path / "marks.csv"
        points.write_text("point_id,seg_id,offset\n" + "".join(
            "p{},{},{!r}\n".format(i, s, o)
            for i, (s, o) in enumerate(locations)))
        marks.write_text("point_id,t_1,t_2,t_3\n" + "".join(
            "p{},{!r},{!r},{!r}\n".format(i, *row)
            for i, row in enumerate(values)))

        out = tmp_path / "curve.csv"
        assert run("analyze", "--network", grid_csv, "--pattern", points,
                   "--marks", marks, "--stat", "markcorr", "--nr", "8",
                   "--rmax", "200", "--bandwidth", "50", "--out", out,
                   "--out-surface", tmp_path / "surface.csv") == 0

        net = load_network(grid_csv)
        dm = augmented_distances(net, [NetworkPoint(s, o)
                                       for s, o in locations])
        r_values = [200.0 * i / 7 for i in range(8)]
        surface, weight_ok, time_ok = oracle_surface(
            values, dm.tolist(), TestFunctionId.T1_StoyanCorr, r_values, 50.0)
        expected = oracle_curve(surface, weight_ok, time_ok, [1.0, 2.0, 3.0],
                                1.0)

        rows = read_curve(out)
        assert [row[0] for row in rows] == ["markcorr"] * 8
        assert [row[1] for row in rows] == pytest.approx(r_values, abs=1e-12)
        assert [row[2] for row in rows] == pytest.approx(list(expected),
                                                         abs=1e-10)
        assert [row[3] == "true" for row in rows] == \
               [not ok for ok in weight_ok]
        assert len((tmp_path / "surface.csv").read_text().splitlines()) == \
               1 + 8 * 3
        assert (tmp_path / "curve.csv.manifest.json").exists()

    @m.context("When the pattern has a single point")
    @m.it("Exits with status 1 for too few points")
    def test_single_point(self, grid_csv, tmp_path, caplog):
        points, marks = tmp_path / "points.csv", tmp_path / "marks.csv"
        points.write_text("point_id,seg_id,offset\np0,0,20.0\n")
        marks.write_text("point_id,t_1\np0,1.0\n")
        for command in ("analyze", "envelope"):
            extra = ["--seed", "1"] if command == "envelope" else []
            assert run(command, "--network", grid_csv, "--pattern", points,
                       "--marks", marks, "--stat", "markcorr",
                       "--out", tmp_path / "c.csv", *extra) == 1
            assert "At least two points are required" in caplog.text
            caplog.clear()

    @m.context("When r grid options are not given")
    @m.it("Uses the configured number of r values")
    def test_configured_nr(self, simulated, tmp_path):
        network, points, marks = simulated
        out = tmp_path / "curve.csv"
        assert run("analyze", "--network", network, "--pattern", points,
                   "--marks", marks, "--stat", "shimantani",
                   "--out", out) == 0
        assert len(read_curve(out)) == 12

    @m.context("When marks are constant")
    @m.it("Writes a neutral, fully masked variogram")
    def test_constant_marks(self, simulated, tmp_path):
        network, points, marks = simulated
        ids = [line.split(",")[0]
               for line in points.read_text().splitlines()[1:]]
        constant = tmp_path / "constant.csv"
        constant.write_text("point_id,t_1,t_2\n" +
                            "".join("{},3,3\n".format(i) for i in ids))

        out = tmp_path / "curve.csv"
        assert run("analyze", "--network", network, "--pattern", points,
                   "--marks", constant, "--stat", "variogram",
                   "--out", out) == 0
        rows = read_curve(out)
        assert all(row[2] == 1.0 for row in rows)
        assert all(row[3] == "true" for row in rows)

    @m.context("When run with more threads")
    @m.it("Writes identical files")
    def test_threads(self, simulated, tmp_path):
        network, points, marks = simulated
        digests = []
        for threads in ("1", "4"):
            out = tmp_path / "curve{}.csv".format(threads)
            assert run("--threads", threads, "analyze", "--network", network,
                       "--pattern", points, "--marks", marks, "--stat",
                       "schlather", "--nr", "40", "--out", out) == 0
            digests.append(file_digest(out))
        assert digests[0] == digests[1]


@m.describe("Command line")
class TestEnvelope(object):
    @m.context("When one permutation is run")
    @m.it("Prints a p-value of 1/2 or 1")
    def test_one_permutation(self, simulated, tmp_path, capsys):
        network, points, marks = simulated
        out = tmp_path / "env.csv"
        assert run("envelope", "--network", network, "--pattern", points,
                   "--marks", marks, "--stat", "markcorr", "--nperm", "1",
                   "--seed", "3", "--out", out) == 0

        printed = capsys.readouterr().out.strip()
        assert printed in ("p_value=0.5", "p_value=1")
        assert out.read_text().splitlines()[0] == "# " + printed

    @m.context("When run with more threads")
    @m.it("Writes identical files")
    def test_threads(self, simulated, tmp_path):
        network, points, marks = simulated
        digests = []
        for threads in ("1", "4"):
            out = tmp_path / "env{}.csv".format(threads)
            assert run("--threads", threads, "envelope", "--network",
                       network, "--pattern", points, "--marks", marks,
                       "--stat", "isham", "--seed", "9", "--out", out) == 0
            digests.append(file_digest(out))
        assert digests[0] == digests[1]

    @m.context("When alpha is outside (0, 1)")
    @m.it("Exits with status 2")
    def test_invalid_alpha(self, simulated, tmp_path):
        network, points, marks = simulated
        for alpha in ("1.5", "1", "0"):
            with pytest.raises(SystemExit) as info:
                run("envelope", "--network", network, "--pattern", points,
                    "--marks", marks, "--stat", "markcorr", "--alpha", alpha,
                    "--seed", "3", "--out", tmp_path / "env.csv")
            assert info.value.code == 2

    @m.context("When enveloping surfaces")
    @m.it("Writes one row per (r, t)")
    def test_surface(self, simulated, tmp_path):
        network, points, marks = simulated
        out = tmp_path / "env.csv"
        assert run("envelope", "--network", network, "--pattern", points,
                   "--marks", marks, "--stat", "cov", "--nperm", "4",
                   "--nr", "5", "--surface", "--seed", "3",
                   "--out", out) == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "r,t,observed,lower,upper,outside"
        assert len(lines) == 2 + 5 * 6


@m.describe("Command line")
class TestAggregate(object):
    @pytest.fixture(scope="function")
    def trips_csv(self, tmp_path):
        lines = ["station_id,departure_time,distance_m"]
        for d in range(1, 31):
            lines.append("A,2022-06-{:02d}T08:00:00,{}".format(d, 1000 + d))
        lines += ["B,2022-06-01T08:00:00,1000",
                  "B,2022-06-01T09:00:00,3000",
                  "C,2022-05-31T23:00:00,700"]
        path = tmp_path / "trips.csv"
        path.write_text("\n".join(lines) + "\n")
        yield path

    @m.context("When writing profiles")
    @m.it("Writes one mark column per day")
    def test_profiles(self, tmp_path, trips_csv):
        network = write_network(tmp_path / "line.csv",
                                [((0.0, 0.0), (1000.0, 0.0))])
        stations = tmp_path / "stations.csv"
        stations.write_text("station_id,x,y\nA,100,5\nB,500,-10\nC,900,0\n")

        points, marks = tmp_path / "p.csv", tmp_path / "m.csv"
        summary = tmp_path / "summary.csv"
        assert run("aggregate", "--trips", trips_csv, "--month", "2022-06",
                   "--network", network, "--stations", stations,
                   "--summary", summary, "--out-points", points,
                   "--out-marks", marks) == 0

        net = load_network(network)
        p = load_marked_pattern(net, points, marks)
        assert p.values.shape == (2, 30)
        assert np.all(p.values[1] == 2000.0)
        assert summary.read_text().splitlines()[1] == "2022-06,2,32," \
                                                      "1077.03125"

    @m.context("When summarising every month")
    @m.it("Writes one row per month")
    def test_summary(self, tmp_path, trips_csv):
        summary = tmp_path / "summary.csv"
        assert run("aggregate", "--trips", trips_csv,
                   "--summary", summary) == 0
        months = [line.split(",")[0]
                  for line in summary.read_text().splitlines()[1:]]
        assert months == ["2022-05", "2022-06"]

    @m.context("When profile options are incomplete")
    @m.it("Exits with status 2")
    def test_usage(self, tmp_path, trips_csv):
        assert run("aggregate", "--trips", trips_csv, "--month", "2022-06",
                   "--out-points", tmp_path / "p.csv") == 2
        assert run("aggregate", "--trips", trips_csv) == 2

    @m.context("When the month has no trips")
    @m.it("Exits with status 1")
    def test_empty_month(self, tmp_path, trips_csv):
        assert run("aggregate", "--trips", trips_csv, "--month", "2023-01",
                   "--summary", tmp_path / "s.csv") == 1


@m.describe("Command line")
class TestValidate(object):
    @m.context("When validating a network")
    @m.it("Prints its summary")
    def test_validate(self, grid_csv, capsys):
        assert run("validate", "--network", grid_csv) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[:4] == ["nodes=20", "segments=28", "components=1",
                             "border_nodes=4"]
        assert lines[4].startswith("total_length=")
