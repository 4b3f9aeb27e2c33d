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

"""Homogeneous Poisson patterns on a linear network with function-valued
marks under three scenarios:

  One:   marks are iid Uniform(0, 1), independent of location.
  Two:   Scenario One marks scaled by the distance of each point to the
         network border (its nearest degree-1 node).
  Three: the marks of point i are iid Uniform(a_i / 2, 3 a_i / 2), where a_i
         is the number of other points within a network radius.

Every draw comes from a counter-based Philox stream keyed by the seed and a
purpose tag, so placement, each scenario and each permutation replay
independently.
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from netmark import NetmarkError
from netmark.enums import Scenario
from netmark.marks import FunctionalMark, MarkedPattern, TimeGrid
from netmark.netgeom import LinearNetwork, NetworkPoint, border_distances, \
    neighbor_counts

log = logging.getLogger(__name__)

PLACEMENT = "placement"
SCENARIO_ONE = "scenario-one"
SCENARIO_THREE = "scenario-three"
PERMUTATION = "permutation"

MAX_SEED = 2 ** 64


class SimulationError(NetmarkError):
    """Exception raised for errors in simulation."""
    pass


def purpose_tag(purpose: str) -> int:
    """Returns the 64-bit tag of a stream purpose."""
    digest = hashlib.blake2b(purpose.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def rng_stream(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Returns the random stream for a purpose.

    The Philox key is (seed XOR tag(purpose), index), so distinct purposes
    and indices never share a stream.

    Args:
        seed: A 64-bit unsigned seed.
        purpose: The stream purpose, e.g. "placement".
        index: A sub-stream index, e.g. the permutation number.

    Returns: Generator
    """
    if not 0 <= seed < MAX_SEED:
        raise SimulationError("The seed must be an unsigned 64-bit integer, "
                              "was {}".format(seed))
    if not 0 <= index < MAX_SEED:
        raise SimulationError("The stream index must be an unsigned 64-bit "
                              "integer, was {}".format(index))

    key = np.array([seed ^ purpose_tag(purpose), index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SimConfig(object):
    """Parameters of a simulated pattern."""
    intensity: float
    n_timestamps: int = 30
    scenario: Scenario = Scenario.One
    neighbor_radius: float = 876.0
    seed: int = 0

    def __post_init__(self):
        if not self.intensity > 0:
            raise SimulationError("The intensity must be > 0, "
                                  "was {}".format(self.intensity))
        if self.n_timestamps < 1:
            raise SimulationError("n_timestamps must be >= 1, "
                                  "was {}".format(self.n_timestamps))
        if not self.neighbor_radius >= 0:
            raise SimulationError("neighbor_radius must be >= 0, "
                                  "was {}".format(self.neighbor_radius))
        if not 0 <= self.seed < MAX_SEED:
            raise SimulationError("The seed must be an unsigned 64-bit "
                                  "integer, was {}".format(self.seed))


def simulate_poisson_network(net: LinearNetwork, intensity: float,
                             seed: int) -> List[NetworkPoint]:
    """Returns a realisation of a homogeneous Poisson process on a network.

    The count is Poisson(intensity * |L|); each point falls on a segment
    with probability proportional to its length, at a uniform offset.
    """
    if not intensity > 0:
        raise SimulationError("The intensity must be > 0, "
                              "was {}".format(intensity))

    rng = rng_stream(seed, PLACEMENT)
    lengths = net.lengths
    total = net.total_length

    n = int(rng.poisson(intensity * total))
    index = rng.choice(lengths.size, size=n, p=lengths / lengths.sum())
    offsets = rng.uniform(0.0, lengths[index])

    segments = net.segments
    pts = [NetworkPoint(segments[i].id, float(min(o, segments[i].length)))
           for i, o in zip(index, offsets)]

    log.info("Simulated {} points at intensity {} on "
             "length {}".format(n, intensity, total))
    return pts


def marks_scenario_one(n: int, n_timestamps: int,
                       seed: int) -> List[FunctionalMark]:
    """Returns n marks of n_timestamps iid Uniform(0, 1) values, drawn point
    by point."""
    if n < 1 or n_timestamps < 1:
        raise SimulationError("n and n_timestamps must be >= 1, were "
                              "{} and {}".format(n, n_timestamps))

    values = rng_stream(seed, SCENARIO_ONE).random((n, n_timestamps))
    return [FunctionalMark(row) for row in values]


def marks_scenario_two(net: LinearNetwork, pts: Sequence[NetworkPoint],
                       base_marks: Sequence[FunctionalMark]) \
        -> List[FunctionalMark]:
    """Returns the base marks, each scaled by the distance of its point to
    the network border.

    Raises:
        NoBorder: The network has no degree-1 node.
    """
    if len(pts) != len(base_marks):
        raise SimulationError("{} points but {} base marks".format(
            len(pts), len(base_marks)))

    d = border_distances(net, pts)
    return [FunctionalMark(m.values * d_i) for m, d_i in zip(base_marks, d)]


def marks_scenario_three(net: LinearNetwork, pts: Sequence[NetworkPoint],
                         radius: float, n_timestamps: int, seed: int,
                         dm: Optional[np.ndarray] = None) \
        -> List[FunctionalMark]:
    """Returns marks driven by local point density.

    The values of mark i are iid Uniform(a_i / 2, 3 a_i / 2), where a_i is
    the number of other points within radius of point i. An isolated point
    has the zero curve.

    Args:
        net: A network.
        pts: The points.
        radius: The neighbourhood radius in meters.
        n_timestamps: Values per mark.
        seed: The seed.
        dm: A precomputed distance matrix of the points. Optional.

    Returns: List[FunctionalMark]
    """
    if n_timestamps < 1:
        raise SimulationError("n_timestamps must be >= 1, "
                              "was {}".format(n_timestamps))

    alpha = neighbor_counts(net, pts, radius, dm=dm).astype(np.float64)
    rng = rng_stream(seed, SCENARIO_THREE)
    values = rng.uniform(alpha[:, None] / 2, 1.5 * alpha[:, None],
                         size=(alpha.size, n_timestamps))

    log.debug("Neighbour counts within {}: min {}, max {}".format(
        radius, alpha.min() if alpha.size else 0,
        alpha.max() if alpha.size else 0))
    return [FunctionalMark(row) for row in values]


def simulate_pattern(net: LinearNetwork, cfg: SimConfig) -> MarkedPattern:
    """Simulates a marked pattern: points are placed once, then the marks of
    the configured scenario are attached.

    Scenario Two scales the Scenario One marks of the same seed, so the
    three scenarios share their points and Scenarios One and Two share
    their uniform draws.

    Raises:
        SimulationError: The realisation has no points.
        NoBorder: Scenario Two on a network without degree-1 nodes.
    """
    pts = simulate_poisson_network(net, cfg.intensity, cfg.seed)
    if not pts:
        raise SimulationError("The realisation has no points; increase the "
                              "intensity or change the seed")

    if cfg.scenario == Scenario.Three:
        marks = marks_scenario_three(net, pts, cfg.neighbor_radius,
                                     cfg.n_timestamps, cfg.seed)
    else:
        marks = marks_scenario_one(len(pts), cfg.n_timestamps, cfg.seed)
        if cfg.scenario == Scenario.Two:
            marks = marks_scenario_two(net, pts, marks)

    return MarkedPattern(net, pts, marks, TimeGrid.regular(cfg.n_timestamps))
