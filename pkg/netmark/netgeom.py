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

"""Linear networks: validated segment graphs and their shortest-path metric.

Locations on a network are NetworkPoints, a segment id and an arc-length
offset measured from the segment's first endpoint u. Distances between
locations are shortest-path lengths along the network.
"""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, \
    Tuple

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree
from shapely.geometry import LineString, Point
from shapely.strtree import STRtree

from netmark import NetmarkError

log = logging.getLogger(__name__)

DEFAULT_SNAP_TOL = 1e-6
"""Endpoints closer than this (meters) are merged into one node."""

Coordinate = Tuple[float, float]


class NetworkError(NetmarkError):
    """Exception raised for errors in network construction or queries."""
    pass


class DegenerateSegment(NetworkError):
    """Exception raised when a segment has zero length after snapping."""

    def __init__(self, segment_ids: Sequence[int]):
        self.segment_ids = list(segment_ids)
        super().__init__("Degenerate (zero length) segments: "
                         "{}".format(self.segment_ids))


class CrossingSegments(NetworkError):
    """Exception raised when segments intersect other than at a shared
    node."""

    def __init__(self, pairs: Sequence[Tuple[int, int]]):
        self.pairs = list(pairs)
        super().__init__("Segments intersect away from a shared node: "
                         "{}".format(self.pairs))


class InvalidPoint(NetworkError):
    """Exception raised for a location that does not lie on the network."""
    pass


class NoBorder(NetworkError):
    """Exception raised when a network has no degree-1 (border) node."""
    exit_code = 2


class EmptyNetwork(NetworkError):
    """Exception raised when a network has no length."""
    pass


@dataclass(frozen=True)
class Segment(object):
    """A straight line segment from u to v."""
    id: int
    u: Coordinate
    v: Coordinate
    length: float

    def __post_init__(self):
        if self.u == self.v:
            raise DegenerateSegment([self.id])

        d = math.hypot(self.v[0] - self.u[0], self.v[1] - self.u[1])
        if not self.length > 0:
            raise DegenerateSegment([self.id])
        if not math.isclose(self.length, d, rel_tol=1e-9):
            raise NetworkError("Segment {} length {} does not match its "
                               "endpoint distance {}".format(self.id,
                                                             self.length, d))


@dataclass(frozen=True)
class NetworkPoint(object):
    """A location on a network; offset is measured from the segment's u
    endpoint."""
    segment_id: int
    offset: float


@dataclass(frozen=True)
class Incidence(object):
    """A segment incident to a node and the node at its far end."""
    segment_id: int
    far_node: int
    length: float


class LinearNetwork(object):
    """A validated, immutable linear network.

    Node-to-node shortest-path distances are computed on demand, one
    single-source pass per node, and cached. The cache is guarded so that a
    network may be shared between threads.
    """

    def __init__(self, segments: Sequence[Segment],
                 nodes: Sequence[Coordinate],
                 segment_nodes: Sequence[Tuple[int, int]]):
        """
        Args:
            segments: The segments.
            nodes: Node coordinates.
            segment_nodes: For each segment, the indices of the nodes at its
                           u and v endpoints.
        """
        if not segments:
            raise EmptyNetwork("A network must have at least one segment")

        self._segments = tuple(segments)
        self._nodes = tuple(nodes)
        self._ends = np.array(segment_nodes, dtype=np.int64).reshape(-1, 2)
        self._lengths = np.array([s.length for s in self._segments],
                                 dtype=np.float64)
        self._index = {}
        for i, s in enumerate(self._segments):
            if s.id in self._index:
                raise NetworkError("Duplicate segment id {}".format(s.id))
            self._index[s.id] = i

        self._graph = nx.Graph()
        self._graph.add_nodes_from(range(len(self._nodes)))
        adjacency = {n: [] for n in range(len(self._nodes))}
        for s, (a, b) in zip(self._segments, self._ends.tolist()):
            self._graph.add_edge(a, b, weight=s.length, segment=s.id)
            adjacency[a].append(Incidence(s.id, b, s.length))
            adjacency[b].append(Incidence(s.id, a, s.length))
        self._adjacency = {n: tuple(inc) for n, inc in adjacency.items()}

        for n, inc in self._adjacency.items():
            if not inc:
                raise NetworkError("Node {} has no incident "
                                   "segments".format(n))

        self._components = tuple(sorted((frozenset(c) for c in
                                         nx.connected_components(self._graph)),
                                        key=min))
        self._csgraph = csr_matrix(nx.to_scipy_sparse_array(
            self._graph, nodelist=range(len(self._nodes)),
            weight="weight", format="csr"))

        self._distance_cache: Dict[int, np.ndarray] = {}
        self._cache_lock = threading.Lock()
        self._index_lock = threading.Lock()
        self._lines = None
        self._tree = None

    def __repr__(self):
        return "<LinearNetwork: nodes={}, segments={}, components={}, " \
               "length={}>".format(len(self._nodes), len(self._segments),
                                   len(self._components), self.total_length)

    @property
    def segments(self) -> Tuple[Segment, ...]:
        return self._segments

    @property
    def nodes(self) -> Tuple[Coordinate, ...]:
        return self._nodes

    @property
    def adjacency(self) -> Dict[int, Tuple[Incidence, ...]]:
        """Map of node index to its incident segments."""
        return self._adjacency

    @property
    def graph(self) -> nx.Graph:
        """The node graph. Edges carry 'weight' (length) and 'segment'
        attributes. Callers must not modify it."""
        return self._graph

    @property
    def total_length(self) -> float:
        return math.fsum(s.length for s in self._segments)

    @property
    def lengths(self) -> np.ndarray:
        return self._lengths

    @property
    def segment_ends(self) -> np.ndarray:
        """S x 2 array of the node indices at each segment's u and v
        endpoints, in segment order."""
        return self._ends

    @property
    def components(self) -> Tuple[FrozenSet[int], ...]:
        """Connected components as sets of node indices."""
        return self._components

    def is_connected(self) -> bool:
        return len(self._components) == 1

    def degree(self, node: int) -> int:
        return len(self._adjacency[node])

    def border_nodes(self) -> List[int]:
        """Returns the degree-1 nodes in ascending order."""
        return [n for n in range(len(self._nodes)) if self.degree(n) == 1]

    def segment(self, segment_id: int) -> Segment:
        try:
            return self._segments[self._index[segment_id]]
        except KeyError:
            raise InvalidPoint("Segment id {} is not in the "
                               "network".format(segment_id))

    def segment_nodes(self, segment_id: int) -> Tuple[int, int]:
        """Returns the node indices of a segment's u and v endpoints."""
        self.segment(segment_id)
        a, b = self._ends[self._index[segment_id]]
        return int(a), int(b)

    def node_point(self, node: int) -> NetworkPoint:
        """Returns a NetworkPoint located exactly at a node."""
        inc = self._adjacency[node][0]
        a, _ = self.segment_nodes(inc.segment_id)
        offset = 0.0 if a == node else inc.length
        return NetworkPoint(inc.segment_id, offset)

    def locate(self, x: NetworkPoint) -> Tuple[int, float]:
        """Validates a NetworkPoint, returning its segment index and offset.

        Raises:
            InvalidPoint: The segment is unknown or the offset out of range.
        """
        try:
            i = self._index[x.segment_id]
        except (KeyError, TypeError):
            raise InvalidPoint("Segment id {} is not in the "
                               "network".format(x.segment_id))

        offset = float(x.offset)
        if not 0.0 <= offset <= self._lengths[i]:
            raise InvalidPoint("Offset {} is outside segment {} of length "
                               "{}".format(offset, x.segment_id,
                                           self._lengths[i]))
        return i, offset

    def xy(self, x: NetworkPoint) -> Coordinate:
        """Returns the planar coordinate of a NetworkPoint."""
        i, offset = self.locate(x)
        s = self._segments[i]
        f = offset / s.length
        return (s.u[0] + f * (s.v[0] - s.u[0]),
                s.u[1] + f * (s.v[1] - s.u[1]))

    def node_distances(self, sources: Sequence[int]) -> np.ndarray:
        """Returns the shortest-path distances from each source node to every
        node, as a len(sources) x n_nodes array. Unreachable nodes are at
        +inf. Rows are cached after first computation.
        """
        sources = [int(n) for n in sources]
        with self._cache_lock:
            missing = sorted({n for n in sources
                              if n not in self._distance_cache})

        # Rows are computed unlocked; a source's row is identical whichever
        # thread publishes it.
        if missing:
            log.debug("Computing single-source distances "
                      "for {} nodes".format(len(missing)))
            rows = dijkstra(self._csgraph, directed=False, indices=missing)
            with self._cache_lock:
                for n, row in zip(missing, np.atleast_2d(rows)):
                    row.setflags(write=False)
                    self._distance_cache.setdefault(n, row)

        if not sources:
            return np.empty((0, len(self._nodes)))
        with self._cache_lock:
            return np.vstack([self._distance_cache[n] for n in sources])

    def node_distance(self, p: int, q: int) -> float:
        """Returns the shortest-path distance between two nodes. The value
        is always read from the pass of the lower-numbered node, so that it
        is exactly symmetric."""
        if p == q:
            return 0.0
        lo, hi = (p, q) if p < q else (q, p)
        return float(self.node_distances([lo])[0, hi])

    def segment_lines(self) -> Tuple[LineString, ...]:
        self._ensure_index()
        return self._lines

    def segment_index(self) -> STRtree:
        """Returns a spatial index over the segments, in segment order."""
        self._ensure_index()
        return self._tree

    def _ensure_index(self):
        with self._index_lock:
            if self._tree is None:
                self._lines = tuple(LineString([s.u, s.v])
                                    for s in self._segments)
                self._tree = STRtree(self._lines)


def build_network(raw_segments: Sequence[Tuple[Coordinate, Coordinate]],
                  snap_tol: float = DEFAULT_SNAP_TOL,
                  segment_ids: Optional[Sequence[int]] = None) \
        -> LinearNetwork:
    """Builds and validates a linear network from raw segments.

    Endpoints within snap_tol of each other are merged into one node, whose
    coordinate is that of the first merged endpoint in input order. Segments
    may touch only at shared nodes.

    Args:
        raw_segments: Segments as ((x1, y1), (x2, y2)) coordinate pairs.
        snap_tol: The endpoint merge tolerance in meters.
        segment_ids: Segment ids. Optional, defaults to 0..S-1.

    Returns: LinearNetwork

    Raises:
        DegenerateSegment: Segments of zero length after snapping.
        CrossingSegments: Segments intersecting away from shared nodes.
    """
    if not raw_segments:
        raise EmptyNetwork("At least one raw segment is required")
    if not snap_tol >= 0:
        raise ValueError("snap_tol must be >= 0, was {}".format(snap_tol))

    n_seg = len(raw_segments)
    ids = list(range(n_seg)) if segment_ids is None else \
        [int(i) for i in segment_ids]
    if len(ids) != n_seg:
        raise NetworkError("Expected {} segment ids, got {}".format(n_seg,
                                                                    len(ids)))

    coords = np.asarray(raw_segments, dtype=np.float64).reshape(-1, 2)
    if coords.shape[0] != 2 * n_seg:
        raise NetworkError("Raw segments must be coordinate pairs")
    if not np.all(np.isfinite(coords)):
        raise NetworkError("Raw segment coordinates must be finite")

    label = _snap_endpoints(coords, snap_tol)

    node_of = {}
    nodes = []
    for rep in label.tolist():
        if rep not in node_of:
            node_of[rep] = len(nodes)
            nodes.append((float(coords[rep, 0]), float(coords[rep, 1])))

    segment_nodes = [(node_of[int(label[2 * k])],
                      node_of[int(label[2 * k + 1])]) for k in range(n_seg)]

    degenerate = [ids[k] for k, (a, b) in enumerate(segment_nodes) if a == b]
    if degenerate:
        log.error("Degenerate segments after snapping: {}".format(degenerate))
        raise DegenerateSegment(degenerate)

    segments = []
    for k, (a, b) in enumerate(segment_nodes):
        u, v = nodes[a], nodes[b]
        segments.append(Segment(ids[k], u, v,
                                math.hypot(v[0] - u[0], v[1] - u[1])))

    crossings = _find_crossings(segments, segment_nodes, nodes, snap_tol)
    if crossings:
        log.error("Crossing segments: {}".format(crossings))
        raise CrossingSegments(crossings)

    net = LinearNetwork(segments, nodes, segment_nodes)
    if not net.is_connected():
        log.warning("Network has {} connected components; distances "
                    "between components are infinite".format(
                     len(net.components)))

    log.info("Built network with {} nodes, {} segments, {} components and "
             "total length {}".format(len(net.nodes), len(net.segments),
                                      len(net.components), net.total_length))
    return net


def _snap_endpoints(coords: np.ndarray, snap_tol: float) -> np.ndarray:
    """Returns for each endpoint the index of the representative (first)
    endpoint of its cluster of endpoints within snap_tol."""
    n = coords.shape[0]
    g = nx.Graph()
    g.add_nodes_from(range(n))

    if snap_tol > 0:
        pairs = cKDTree(coords).query_pairs(snap_tol, output_type="ndarray")
        g.add_edges_from(pairs.tolist())
    else:
        first = {}
        for k, xy in enumerate(map(tuple, coords.tolist())):
            if xy in first:
                g.add_edge(first[xy], k)
            else:
                first[xy] = k

    label = np.empty(n, dtype=np.int64)
    for comp in nx.connected_components(g):
        members = list(comp)
        label[members] = min(members)
    return label


def _find_crossings(segments: Sequence[Segment],
                    segment_nodes: Sequence[Tuple[int, int]],
                    nodes: Sequence[Coordinate],
                    snap_tol: float) -> List[Tuple[int, int]]:
    lines = [LineString([s.u, s.v]) for s in segments]
    tree = STRtree(lines)
    left, right = tree.query(lines, predicate="intersects")

    crossings = []
    for i, j in zip(left.tolist(), right.tolist()):
        if i >= j:
            continue
        inter = lines[i].intersection(lines[j])
        if inter.is_empty:
            continue

        shared = set(segment_nodes[i]) & set(segment_nodes[j])
        if inter.geom_type == "Point" and \
                any(Point(nodes[n]).distance(inter) <= snap_tol
                    for n in shared):
            continue
        crossings.append((segments[i].id, segments[j].id))

    return sorted(crossings)


def point_distance(net: LinearNetwork, x: NetworkPoint,
                   y: NetworkPoint) -> float:
    """Returns the shortest-path distance between two locations on a network,
    or +inf if they lie in different components.

    Raises:
        InvalidPoint: A location is not on the network.
    """
    ix, ox = net.locate(x)
    iy, oy = net.locate(y)
    lengths = net.lengths
    a, b = net.segment_nodes(x.segment_id)
    c, d = net.segment_nodes(y.segment_id)

    best = math.inf
    for p, dp in ((a, ox), (b, float(lengths[ix] - ox))):
        for q, dq in ((c, oy), (d, float(lengths[iy] - oy))):
            best = min(best, (dp + dq) + net.node_distance(p, q))

    if ix == iy:
        best = min(best, abs(ox - oy))

    return best


def distance_matrix(net: LinearNetwork, pts: Sequence[NetworkPoint],
                    threads: int = 1) -> np.ndarray:
    """Returns the symmetric matrix of shortest-path distances between
    locations. Entry (i, j) equals point_distance(net, pts[i], pts[j])
    exactly.

    One single-source pass is made per distinct node touched by the
    locations' segments; the remaining work is offset arithmetic.

    Args:
        net: A network.
        pts: Locations on the network.
        threads: Worker threads for the single-source passes.

    Returns: ndarray

    Raises:
        InvalidPoint: A location is not on the network.
    """
    n = len(pts)
    if n == 0:
        return np.zeros((0, 0))

    located = [net.locate(x) for x in pts]
    idx = np.array([i for i, _ in located], dtype=np.int64)
    off = np.array([o for _, o in located], dtype=np.float64)

    ends = net.segment_ends[idx]
    a, b = ends[:, 0], ends[:, 1]
    da = off
    db = net.lengths[idx] - off

    touched = np.unique(np.concatenate([a, b]))
    if threads > 1 and touched.size > 1:
        chunks = np.array_split(touched, min(threads, touched.size))
        with ThreadPoolExecutor(max_workers=threads) as executor:
            list(executor.map(net.node_distances, chunks))

    rows = net.node_distances(touched)[:, touched]
    k = touched.size
    upper = np.arange(k)[:, None] <= np.arange(k)[None, :]
    nd = np.where(upper, rows, rows.T)

    la = np.searchsorted(touched, a)
    lb = np.searchsorted(touched, b)

    m = np.full((n, n), np.inf)
    for ni, di in ((la, da), (lb, db)):
        for nj, dj in ((la, da), (lb, db)):
            cand = (di[:, None] + dj[None, :]) + nd[ni[:, None], nj[None, :]]
            m = np.minimum(m, cand)

    same = idx[:, None] == idx[None, :]
    along = np.abs(off[:, None] - off[None, :])
    m = np.where(same, np.minimum(m, along), m)

    return m


def border_distances(net: LinearNetwork,
                     pts: Sequence[NetworkPoint]) -> np.ndarray:
    """Returns for each location the distance to the nearest degree-1 node.

    Raises:
        NoBorder: The network has no degree-1 node.
    """
    border = net.border_nodes()
    if not border:
        raise NoBorder("The network has no degree-1 (border) node")

    targets = [net.node_point(b) for b in border]
    m = distance_matrix(net, list(pts) + targets)

    return m[:len(pts), len(pts):].min(axis=1)


def distance_to_border(net: LinearNetwork, x: NetworkPoint) -> float:
    """Returns the shortest-path distance from a location to the nearest
    degree-1 node.

    Raises:
        NoBorder: The network has no degree-1 node.
    """
    return float(border_distances(net, [x])[0])


def neighbor_counts(net: LinearNetwork, pts: Sequence[NetworkPoint],
                    radius: float, dm: np.ndarray = None) -> np.ndarray:
    """Returns for each location the number of other locations within
    radius (inclusive).

    Args:
        net: A network.
        pts: Locations on the network.
        radius: The neighbourhood radius in meters.
        dm: A precomputed distance matrix for pts. Optional.

    Returns: ndarray of int
    """
    if not radius >= 0:
        raise ValueError("radius must be >= 0, was {}".format(radius))
    if dm is None:
        dm = distance_matrix(net, pts)

    return (dm <= radius).sum(axis=1).astype(np.int64) - 1


def snap_point(net: LinearNetwork,
               xy: Coordinate) -> Tuple[NetworkPoint, float]:
    """Returns the nearest network location to a planar coordinate and the
    distance to it.

    Args:
        net: A network.
        xy: A planar coordinate.

    Returns: Tuple[NetworkPoint, float]
    """
    p = Point(float(xy[0]), float(xy[1]))
    i = int(net.segment_index().nearest(p))
    line = net.segment_lines()[i]
    s = net.segments[i]

    offset = min(max(line.project(p), 0.0), s.length)
    dist = line.distance(p)
    log.debug("Snapped {} to segment {} offset {} "
              "at distance {}".format(xy, s.id, offset, dist))

    return NetworkPoint(s.id, offset), dist


class NetworkSummary(NamedTuple):
    nodes: int
    segments: int
    components: int
    border_nodes: int
    total_length: float


def summarize(net: LinearNetwork) -> NetworkSummary:
    """Returns the node, segment, component and border node counts and the
    total length of a network."""
    return NetworkSummary(len(net.nodes), len(net.segments),
                          len(net.components), len(net.border_nodes()),
                          net.total_length)
