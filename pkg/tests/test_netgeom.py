import math
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from pytest import mark as m
from scipy.sparse.csgraph import dijkstra

from netmark import netgeom
from netmark.netgeom import CrossingSegments, DegenerateSegment, \
    EmptyNetwork, InvalidPoint, NetworkPoint, NoBorder, border_distances, \
    build_network, distance_matrix, distance_to_border, neighbor_counts, \
    point_distance, snap_point, summarize
from tests.network_fixture import augmented_distances, ell_network, \
    grid_network, line_network, random_network, random_points, \
    ring_network, star_network

#  Stop IDEs "optimizing" away these imports
_ = ell_network
_ = grid_network
_ = line_network
_ = ring_network
_ = star_network


def h_network():
    """Two 200 m uprights joined in their middles by a 100 m bar."""
    return build_network([((0.0, 0.0), (0.0, 100.0)),
                          ((0.0, 100.0), (0.0, 200.0)),
                          ((100.0, 0.0), (100.0, 100.0)),
                          ((100.0, 100.0), (100.0, 200.0)),
                          ((0.0, 100.0), (100.0, 100.0))])


@m.describe("Network construction")
class TestBuildNetwork(object):
    @m.context("When segments share an endpoint")
    @m.it("Merges the endpoint into one node")
    def test_shared_endpoint(self):
        net = build_network([((0.0, 0.0), (1.0, 0.0)),
                             ((1.0, 0.0), (1.0, 1.0))])
        assert len(net.nodes) == 3
        assert net.total_length == 2.0
        assert net.is_connected()
        assert net.border_nodes() == [0, 2]

    @m.it("Merges endpoints within the snap tolerance")
    def test_snap_tolerance(self):
        net = build_network([((0.0, 0.0), (1.0, 0.0)),
                             ((1.0 + 1e-8, 0.0), (1.0, 1.0))])
        assert len(net.nodes) == 3
        assert net.degree(1) == 2

    @m.context("When there is a single segment")
    @m.it("Has two border nodes")
    def test_single_segment(self):
        net = build_network([((0.0, 0.0), (3.0, 4.0))])
        assert net.total_length == 5.0
        assert len(net.nodes) == 2
        assert [net.degree(n) for n in range(2)] == [1, 1]

    @m.context("When segments cross in their interiors")
    @m.it("Raises CrossingSegments naming the pair")
    def test_crossing(self):
        with pytest.raises(CrossingSegments) as info:
            build_network([((0.0, 0.0), (2.0, 0.0)),
                           ((1.0, -1.0), (1.0, 1.0))])
        assert info.value.pairs == [(0, 1)]

    @m.it("Rejects a T-junction without a shared node")
    def test_t_junction(self):
        with pytest.raises(CrossingSegments):
            build_network([((0.0, 0.0), (2.0, 0.0)),
                           ((1.0, 0.0), (1.0, 1.0))])

    @m.it("Rejects overlapping collinear segments")
    def test_overlap(self):
        with pytest.raises(CrossingSegments):
            build_network([((0.0, 0.0), (2.0, 0.0)),
                           ((1.0, 0.0), (3.0, 0.0))])

    @m.context("When a segment has zero length")
    @m.it("Raises DegenerateSegment")
    def test_degenerate(self):
        with pytest.raises(DegenerateSegment):
            build_network([((0.0, 0.0), (0.0, 0.0))])

        with pytest.raises(DegenerateSegment):
            build_network([((0.0, 0.0), (1e-9, 0.0))])

    @m.context("When there are no segments")
    @m.it("Raises EmptyNetwork")
    def test_empty(self):
        with pytest.raises(EmptyNetwork):
            build_network([])

    @m.context("When segment ids are given")
    @m.it("Uses them")
    def test_segment_ids(self):
        net = build_network([((0.0, 0.0), (1.0, 0.0)),
                             ((1.0, 0.0), (1.0, 1.0))], segment_ids=[7, 3])
        assert [s.id for s in net.segments] == [7, 3]
        assert net.segment(3).length == 1.0

    @m.context("When the network is disconnected")
    @m.it("Is accepted, reporting its components")
    def test_disconnected(self):
        net = build_network([((0.0, 0.0), (1.0, 0.0)),
                             ((5.0, 0.0), (6.0, 0.0))])
        assert not net.is_connected()
        assert len(net.components) == 2

    @m.it("Summarises nodes, segments, components and borders")
    def test_summary(self, grid_network):
        s = summarize(grid_network)
        assert s.nodes == 20
        assert s.segments == 28
        assert s.components == 1
        assert s.border_nodes == 4
        assert s.total_length == pytest.approx(2400 + 4 * 50 * math.sqrt(2))


@m.describe("Shortest-path distance")
class TestPointDistance(object):
    @m.context("When points share a segment")
    @m.it("Is the offset difference")
    def test_same_segment(self, line_network):
        x = NetworkPoint(0, 2.0)
        y = NetworkPoint(0, 5.0)
        assert point_distance(line_network, x, y) == 3.0
        assert point_distance(line_network, x, x) == 0.0

    @m.it("Takes the shorter way round a cycle")
    def test_cycle(self, ring_network):
        x = NetworkPoint(0, 10.0)
        y = NetworkPoint(0, 90.0)
        assert point_distance(ring_network, x, y) == 80.0

        # Around the ring through the other three sides is 320 m
        y = NetworkPoint(3, 95.0)
        assert point_distance(ring_network, x, y) == pytest.approx(15.0)

    @m.context("When points are on different branches")
    @m.it("Goes through the hub")
    def test_star(self, star_network):
        x = NetworkPoint(0, 40.0)
        y = NetworkPoint(1, 150.0)
        assert point_distance(star_network, x, y) == pytest.approx(190.0)

    @m.context("When points are in different components")
    @m.it("Is infinite")
    def test_disconnected(self):
        net = build_network([((0.0, 0.0), (1.0, 0.0)),
                             ((5.0, 0.0), (6.0, 0.0))])
        d = point_distance(net, NetworkPoint(0, 0.5), NetworkPoint(1, 0.5))
        assert math.isinf(d)

    @m.context("When a point is off the network")
    @m.it("Raises InvalidPoint")
    def test_invalid(self, line_network):
        with pytest.raises(InvalidPoint):
            point_distance(line_network, NetworkPoint(0, 101.0),
                           NetworkPoint(0, 1.0))
        with pytest.raises(InvalidPoint):
            point_distance(line_network, NetworkPoint(9, 1.0),
                           NetworkPoint(0, 1.0))

    @m.context("When compared with the augmented graph")
    @m.it("Agrees on random networks")
    def test_oracle(self):
        rng = np.random.default_rng(20240501)
        for _ in range(20):
            net = random_network(rng)
            pts = random_points(net, rng, 50)
            oracle = augmented_distances(net, pts)
            for _ in range(25):
                i, j = rng.integers(len(pts), size=2)
                d = point_distance(net, pts[i], pts[j])
                assert d == pytest.approx(oracle[i, j], rel=1e-9, abs=1e-9)

    @m.it("Agrees on disconnected networks")
    def test_oracle_disconnected(self):
        rng = np.random.default_rng(7)
        net = random_network(rng, connected=False, extra=0.0)
        pts = random_points(net, rng, 20)
        oracle = augmented_distances(net, pts)
        dm = distance_matrix(net, pts)

        assert np.array_equal(np.isinf(dm), np.isinf(oracle))
        finite = np.isfinite(oracle)
        np.testing.assert_allclose(dm[finite], oracle[finite],
                                   rtol=1e-9, atol=1e-9)

    @m.it("Is a metric on connected networks")
    def test_metric(self):
        rng = np.random.default_rng(11)
        net = random_network(rng)
        pts = random_points(net, rng, 15, at_nodes=0.0)
        dm = distance_matrix(net, pts)

        assert np.array_equal(dm, dm.T)
        assert np.all(np.diag(dm) == 0)
        n = len(pts)
        for i in range(n):
            for j in range(n):
                assert np.all(dm[i, j] <= dm[i, :] + dm[:, j] + 1e-9)


@m.describe("Distance matrix")
class TestDistanceMatrix(object):
    @m.context("When there is one point")
    @m.it("Is a 1 x 1 zero matrix")
    def test_one_point(self, line_network):
        dm = distance_matrix(line_network, [NetworkPoint(0, 3.0)])
        assert dm.shape == (1, 1)
        assert dm[0, 0] == 0.0

    @m.context("When points are collinear")
    @m.it("Holds the offset differences")
    def test_collinear(self, line_network):
        pts = [NetworkPoint(0, o) for o in (0.0, 1.0, 4.0)]
        dm = distance_matrix(line_network, pts)
        assert dm[0, 1] == 1.0
        assert dm[1, 2] == 3.0
        assert dm[0, 2] == 4.0

    @m.context("When compared with pairwise distances")
    @m.it("Is exactly equal")
    def test_bitwise(self):
        rng = np.random.default_rng(3)
        net = random_network(rng)
        pts = random_points(net, rng, 10)
        dm = distance_matrix(net, pts)

        for i in range(len(pts)):
            for j in range(len(pts)):
                assert dm[i, j] == point_distance(net, pts[i], pts[j])

    @m.context("When computed with several threads")
    @m.it("Is independent of the thread count")
    def test_threads(self):
        rng = np.random.default_rng(5)
        net = random_network(rng)
        pts = random_points(net, rng, 60)
        assert np.array_equal(distance_matrix(net, pts, threads=1),
                              distance_matrix(net, pts, threads=4))

    @m.context("When threads compute different sources")
    @m.it("Runs their passes concurrently")
    def test_concurrent_passes(self, grid_network, monkeypatch):
        barrier = threading.Barrier(2, timeout=10)

        def meeting_dijkstra(*args, **kwargs):
            barrier.wait()
            return dijkstra(*args, **kwargs)

        monkeypatch.setattr(netgeom, "dijkstra", meeting_dijkstra)
        with ThreadPoolExecutor(max_workers=2) as executor:
            rows = list(executor.map(grid_network.node_distances,
                                     [[0, 1], [2, 3]]))

        monkeypatch.undo()
        assert np.array_equal(np.vstack(rows),
                              grid_network.node_distances([0, 1, 2, 3]))


@m.describe("Distance to the border")
class TestBorderDistance(object):
    @m.context("When the network is a single segment")
    @m.it("Is the distance to the nearer end")
    def test_single_segment(self):
        net = build_network([((0.0, 0.0), (10.0, 0.0))])
        assert distance_to_border(net, NetworkPoint(0, 3.0)) == 3.0
        assert distance_to_border(net, NetworkPoint(0, 0.0)) == 0.0
        assert distance_to_border(net, NetworkPoint(0, 10.0)) == 0.0

    @m.context("When the network is H-shaped")
    @m.it("Is the minimum over the leaves")
    def test_h_network(self):
        net = h_network()
        x = NetworkPoint(4, 30.0)
        leaves = [net.node_point(n) for n in net.border_nodes()]
        assert len(leaves) == 4

        expected = min(point_distance(net, x, b) for b in leaves)
        assert distance_to_border(net, x) == pytest.approx(expected)
        assert distance_to_border(net, x) == pytest.approx(130.0)

    @m.it("Never exceeds the distance to any border node")
    def test_bound(self, grid_network):
        rng = np.random.default_rng(13)
        pts = random_points(grid_network, rng, 25)
        borders = [grid_network.node_point(n)
                   for n in grid_network.border_nodes()]
        d = border_distances(grid_network, pts)
        for x, dx in zip(pts, d):
            for b in borders:
                assert dx <= point_distance(grid_network, x, b) + 1e-9

    @m.context("When there is no border node")
    @m.it("Raises NoBorder")
    def test_no_border(self, ring_network):
        with pytest.raises(NoBorder) as info:
            distance_to_border(ring_network, NetworkPoint(0, 1.0))
        assert info.value.exit_code == 2


@m.describe("Neighbour counts")
class TestNeighborCounts(object):
    @m.context("When a neighbour is exactly at the radius")
    @m.it("Counts it")
    def test_inclusive(self, line_network):
        pts = [NetworkPoint(0, 10.0), NetworkPoint(0, 15.0)]
        assert list(neighbor_counts(line_network, pts, 5.0)) == [1, 1]
        assert list(neighbor_counts(line_network, pts, 4.99)) == [0, 0]

    @m.context("When there is one point")
    @m.it("Excludes the point itself")
    def test_self(self, line_network):
        pts = [NetworkPoint(0, 10.0)]
        assert list(neighbor_counts(line_network, pts, 1000.0)) == [0]

    @m.context("When compared with the distance matrix")
    @m.it("Equals the thresholded row sums")
    def test_matrix(self, grid_network):
        rng = np.random.default_rng(17)
        pts = random_points(grid_network, rng, 30)
        dm = distance_matrix(grid_network, pts)
        expected = (dm <= 150.0).sum(axis=1) - 1
        assert np.array_equal(neighbor_counts(grid_network, pts, 150.0),
                              expected)


@m.describe("Snapping")
class TestSnapPoint(object):
    @m.context("When a coordinate is on a segment")
    @m.it("Snaps at distance zero")
    def test_on_segment(self, line_network):
        pt, d = snap_point(line_network, (40.0, 0.0))
        assert pt == NetworkPoint(0, 40.0)
        assert d == 0.0

    @m.context("When a coordinate is off the network")
    @m.it("Snaps to the foot of the perpendicular")
    def test_perpendicular(self, line_network):
        pt, d = snap_point(line_network, (40.0, 10.0))
        assert pt.segment_id == 0
        assert pt.offset == pytest.approx(40.0)
        assert d == pytest.approx(10.0)

    @m.it("Snaps beyond an end to the endpoint")
    def test_beyond_end(self, line_network):
        pt, d = snap_point(line_network, (103.0, 4.0))
        assert pt.offset == pytest.approx(100.0)
        assert d == pytest.approx(5.0)

    @m.context("When a point is already on the network")
    @m.it("Is idempotent")
    def test_idempotent(self, grid_network):
        rng = np.random.default_rng(19)
        for x in random_points(grid_network, rng, 20, at_nodes=0.0):
            xy = grid_network.xy(x)
            pt, d = snap_point(grid_network, xy)
            assert d == pytest.approx(0.0, abs=1e-9)
            assert grid_network.xy(pt) == pytest.approx(xy, abs=1e-9)
