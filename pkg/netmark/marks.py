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

"""Function-valued marks on a shared time grid and their moment fields."""

import logging
from typing import NamedTuple, Sequence

import numpy as np

from netmark import NetmarkError
from netmark.kernel import kernel_weight
from netmark.netgeom import LinearNetwork, NetworkPoint

log = logging.getLogger(__name__)


class MarkError(NetmarkError):
    """Exception raised for invalid marks or patterns."""
    pass


class GridMismatch(MarkError):
    """Exception raised when curves do not share a grid."""
    pass


class TimeGrid(object):
    """A strictly increasing grid of T >= 1 timestamps."""

    def __init__(self, timestamps: Sequence[float]):
        t = np.array(timestamps, dtype=np.float64).reshape(-1)
        if t.size < 1:
            raise MarkError("A time grid must have at least one timestamp")
        if not np.all(np.isfinite(t)):
            raise MarkError("Timestamps must be finite")
        if np.any(np.diff(t) <= 0):
            raise MarkError("Timestamps must be strictly increasing")

        t.setflags(write=False)
        self._t = t

    @classmethod
    def regular(cls, n: int, start: float = 1.0, step: float = 1.0):
        """Returns a grid of n evenly spaced timestamps."""
        return cls(start + step * np.arange(n))

    @property
    def timestamps(self) -> np.ndarray:
        return self._t

    def __len__(self):
        return self._t.size

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and \
               np.array_equal(self._t, other._t)

    def __hash__(self):
        return hash(self._t.tobytes())

    def __repr__(self):
        return "<TimeGrid: T={}, [{}, {}]>".format(len(self), self._t[0],
                                                  self._t[-1])


class FunctionalMark(object):
    """A curve h(x)(t_k) sampled on a time grid."""

    def __init__(self, values: Sequence[float]):
        v = np.array(values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise MarkError("Mark values must be finite")

        v.setflags(write=False)
        self._v = v

    @property
    def values(self) -> np.ndarray:
        return self._v

    def __len__(self):
        return self._v.size

    def __eq__(self, other):
        return isinstance(other, FunctionalMark) and \
               np.array_equal(self._v, other._v)

    def __hash__(self):
        return hash(self._v.tobytes())

    def __repr__(self):
        return "<FunctionalMark: T={}>".format(len(self))


class MarkedPattern(object):
    """N >= 1 network locations, each carrying a function-valued mark on a
    shared time grid.

    Marks are held as an N x T matrix whose row i is the curve of point i.
    """

    def __init__(self, network: LinearNetwork,
                 points: Sequence[NetworkPoint],
                 values, grid: TimeGrid):
        """
        Args:
            network: The network the points lie on.
            points: N locations.
            values: N x T mark values, or a sequence of FunctionalMarks.
            grid: The shared time grid.
        """
        points = tuple(points)
        if len(points) < 1:
            raise MarkError("A pattern must have at least one point")

        if len(values) and isinstance(values[0], FunctionalMark):
            lengths = {len(m) for m in values}
            if len(lengths) > 1:
                raise GridMismatch("Marks have differing lengths "
                                   "{}".format(sorted(lengths)))
            values = [m.values for m in values]

        v = np.array(values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != len(points):
            raise MarkError("Expected {} mark curves, got array of shape "
                            "{}".format(len(points), v.shape))
        if v.shape[1] != len(grid):
            raise GridMismatch("Mark length {} does not match the time grid "
                               "length {}".format(v.shape[1], len(grid)))
        if not np.all(np.isfinite(v)):
            raise MarkError("Mark values must be finite")

        for x in points:
            network.locate(x)

        v.setflags(write=False)
        self._network = network
        self._points = points
        self._values = v
        self._grid = grid

    def __repr__(self):
        return "<MarkedPattern: N={}, T={}>".format(self.n, len(self._grid))

    @property
    def network(self) -> LinearNetwork:
        return self._network

    @property
    def points(self):
        return self._points

    @property
    def values(self) -> np.ndarray:
        """The N x T mark matrix (read-only)."""
        return self._values

    @property
    def marks(self):
        return tuple(FunctionalMark(row) for row in self._values)

    @property
    def grid(self) -> TimeGrid:
        return self._grid

    @property
    def n(self) -> int:
        return len(self._points)

    def with_values(self, values) -> "MarkedPattern":
        """Returns a pattern on the same points with new mark values."""
        return MarkedPattern(self._network, self._points, values, self._grid)


class ConditionalMean(NamedTuple):
    values: np.ndarray
    degenerate: bool


def pointwise_mean(p: MarkedPattern) -> np.ndarray:
    """Returns the mean mark mu_h(t_k) at each timestamp."""
    return p.values.mean(axis=0)


def pointwise_variance(p: MarkedPattern) -> np.ndarray:
    """Returns the population (divide by N) variance of the marks at each
    timestamp."""
    dev = p.values - pointwise_mean(p)
    return (dev * dev).mean(axis=0)


def conditional_mean_at_r(p: MarkedPattern, dm: np.ndarray, r: float,
                          bw: float) -> ConditionalMean:
    """Returns the kernel-weighted mean mark mu_h(r)(t_k) over ordered pairs
    of distinct points at distance about r.

    Each ordered pair (i, j) contributes the mark of i with weight
    K(d_ij - r); since the kernel is symmetric, both marks of a pair count.
    If no pair has positive weight, the unconditional mean is returned with
    the degenerate flag set.

    Args:
        p: A marked pattern.
        dm: The N x N distance matrix of its points.
        r: The distance in meters.
        bw: The kernel bandwidth in meters.

    Returns: ConditionalMean
    """
    if not r >= 0:
        raise ValueError("r must be >= 0, was {}".format(r))

    w = kernel_weight(dm, r, bw)
    np.fill_diagonal(w, 0.0)
    row_weight = w.sum(axis=1)
    total = row_weight.sum()

    if total <= 0:
        log.debug("No pair weight at r={}; using the unconditional "
                  "mean".format(r))
        return ConditionalMean(pointwise_mean(p), True)

    return ConditionalMean((row_weight @ p.values) / total, False)
