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

"""Random-labelling permutation tests with global envelopes ordered by the
extreme rank length (ERL) measure.

The points of a pattern stay fixed while whole mark curves are permuted
among them; the observed characteristic is ranked against those of the
permuted patterns.
"""

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.stats import rankdata

from netmark import NetmarkError
from netmark.enums import TestFunctionId
from netmark.estim import RGrid, SummaryCurve, SummaryEstimator, \
    SummarySurface, global_kappa
from netmark.marks import GridMismatch, MarkedPattern
from netmark.netgeom import distance_matrix
from netmark.sim import MAX_SEED, PERMUTATION, rng_stream
from netmark.testfun import neutral_value

log = logging.getLogger(__name__)


class EnvelopeError(NetmarkError):
    """Exception raised for errors in envelope tests."""
    pass


@dataclass(frozen=True)
class EnvelopeConfig(object):
    n_perm: int = 500
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n_perm < 1:
            raise EnvelopeError("n_perm must be >= 1, "
                                "was {}".format(self.n_perm))
        if not 0 < self.alpha < 1:
            raise EnvelopeError("alpha must be in (0, 1), "
                                "was {}".format(self.alpha))
        if not 0 <= self.seed < MAX_SEED:
            raise EnvelopeError("The seed must be an unsigned 64-bit "
                                "integer, was {}".format(self.seed))


class Envelope(NamedTuple):
    lower: np.ndarray
    upper: np.ndarray
    p_value: float


class EnvelopeResult(object):
    """The observed characteristic, its global envelope and the p-value of
    the test.

    For curve envelopes lower and upper have one entry per r value; for
    surface envelopes they are R x T matrices. Masked entries carry the
    neutral value in all three.
    """

    def __init__(self, observed: Union[SummaryCurve, SummarySurface],
                 lower: np.ndarray, upper: np.ndarray, p_value: float,
                 cfg: EnvelopeConfig, curves: np.ndarray,
                 distance_digest: str):
        self.observed = observed
        self.lower = lower
        self.upper = upper
        self.p_value = p_value
        self.n_perm = cfg.n_perm
        self.alpha = cfg.alpha
        self.seed = cfg.seed
        self.curves = curves
        """The (n_perm + 1) x M ranked curves, observed first, over the
        unmasked entries."""
        self.distance_digest = distance_digest

    @property
    def surface(self) -> bool:
        return isinstance(self.observed, SummarySurface)

    @property
    def outside(self) -> np.ndarray:
        """True where the observed value leaves the envelope."""
        v = self.observed.values
        return ~self.observed.masked & ((v < self.lower) | (v > self.upper))

    def __repr__(self):
        return "<EnvelopeResult: {} n_perm={} alpha={} " \
               "p={}>".format(self.observed.stat_id.value, self.n_perm,
                              self.alpha, self.p_value)


def permute_marks(p: MarkedPattern, seed: int, k: int) -> MarkedPattern:
    """Returns the pattern with its mark curves reassigned among the points
    by the k-th uniform random permutation of the seed."""
    if p.n < 2:
        log.warning("A pattern of {} point cannot be permuted; returning "
                    "it unchanged".format(p.n))
        return p

    perm = rng_stream(seed, PERMUTATION, k).permutation(p.n)
    return p.with_values(p.values[perm])


def _as_curves(curves) -> np.ndarray:
    try:
        c = np.array(curves, dtype=np.float64)
    except ValueError as e:
        raise GridMismatch("Curves do not share an r grid: {}".format(e))
    if c.ndim != 2:
        raise GridMismatch("Curves must form a 2-dimensional matrix, "
                           "got {} dimensions".format(c.ndim))
    if c.shape[0] < 2:
        raise EnvelopeError("At least two curves are required, "
                            "got {}".format(c.shape[0]))
    return c


def erl_vectors(curves) -> np.ndarray:
    """Returns the extreme rank length vector of each curve.

    At each column every curve is ranked from below and from above, ties
    sharing the minimum rank; the two-sided rank is the smaller of the two.
    A curve's vector is its two-sided ranks in ascending order.
    """
    c = _as_curves(curves)
    below = rankdata(c, method="min", axis=0)
    above = rankdata(-c, method="min", axis=0)
    return np.sort(np.minimum(below, above), axis=1)


def erl_order(curves) -> np.ndarray:
    """Returns the curve indices ordered from most to least extreme.

    Curves compare lexicographically by their ERL vectors, smaller being
    more extreme. Equal vectors keep their input order.

    Raises:
        GridMismatch: The curves are of different lengths.
    """
    v = erl_vectors(curves)
    # lexsort treats its last key as the primary one
    return np.lexsort(v.T[::-1])


def _lex_le(a: np.ndarray, b: np.ndarray) -> bool:
    diff = np.flatnonzero(a != b)
    return diff.size == 0 or a[diff[0]] < b[diff[0]]


def erl_envelope(curves, alpha: float) -> Envelope:
    """Returns the global envelope of a set of curves, the first of which
    is the observed one.

    The p-value is (1 + the number of other curves at least as extreme as
    the observed) / (number of curves). The bounds are the pointwise
    extremes of the curves left after removing the floor(alpha * number of
    curves) most extreme.
    """
    c = _as_curves(curves)
    n_curves = c.shape[0]

    if c.shape[1] == 0:
        return Envelope(np.empty(0), np.empty(0), 1.0)

    v = erl_vectors(c)
    count = sum(1 for k in range(1, n_curves) if _lex_le(v[k], v[0]))
    p_value = (1 + count) / n_curves

    n_remove = int(math.floor(alpha * n_curves))
    keep = erl_order(c)[n_remove:]

    return Envelope(c[keep].min(axis=0), c[keep].max(axis=0), p_value)


def distance_digest(dm: np.ndarray) -> str:
    """Returns the SHA-256 hex digest of a distance matrix."""
    return hashlib.sha256(np.ascontiguousarray(dm).tobytes()).hexdigest()


def global_envelope(p: MarkedPattern, stat_id: TestFunctionId,
                    rgrid: Optional[RGrid] = None,
                    cfg: EnvelopeConfig = EnvelopeConfig(),
                    dm: Optional[np.ndarray] = None, threads: int = 1,
                    surface: bool = False) -> EnvelopeResult:
    """Performs a random-labelling test of a pattern's marks.

    The distance matrix and kernel weights are computed once; the n_perm
    permuted patterns differ from the observed one in their marks only.
    Permutation k draws from its own stream, so the result does not depend
    on the number of threads.

    Args:
        p: A marked pattern.
        stat_id: The statistic.
        rgrid: The r grid. Optional, defaults to default_rgrid().
        cfg: Permutation count, significance level and seed.
        dm: The distance matrix of the points. Optional.
        threads: Worker threads for permutations.
        surface: Envelope the pointwise (r, t) surfaces instead of the
                 global curves.

    Returns: EnvelopeResult
    """
    if dm is None:
        dm = distance_matrix(p.network, p.points, threads=threads)
    digest = distance_digest(dm)

    estimator = SummaryEstimator(p, stat_id, rgrid, dm=dm)
    denominator = estimator.denominator(p)

    def characteristic(pattern: MarkedPattern):
        s = estimator.surface(pattern, denominator)
        if surface:
            return s
        return global_kappa(s, strict=False)

    observed = characteristic(p)
    keep = ~observed.masked.reshape(-1)

    def permuted(k: int) -> np.ndarray:
        pk = permute_marks(p, cfg.seed, k)
        return characteristic(pk).values.reshape(-1)[keep]

    log.info("Running {} permutations of {} on {} "
             "thread(s)".format(cfg.n_perm, stat_id.value, threads))
    if not keep.any():
        log.warning("{}: every entry of the observed characteristic is "
                    "masked; the test is void".format(stat_id.value))
        perms = [np.empty(0)] * cfg.n_perm
    elif threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            perms = list(executor.map(permuted, range(cfg.n_perm)))
    else:
        perms = [permuted(k) for k in range(cfg.n_perm)]

    if distance_digest(dm) != digest:
        raise EnvelopeError("The distance matrix changed during the "
                            "permutation test")

    curves = np.vstack([observed.values.reshape(-1)[keep]] + perms)
    env = erl_envelope(curves, cfg.alpha)

    neutral = neutral_value(stat_id)
    shape = observed.values.shape
    lower = np.full(shape, neutral)
    upper = np.full(shape, neutral)
    lower.reshape(-1)[keep] = env.lower
    upper.reshape(-1)[keep] = env.upper

    log.info("{}: p = {} from {} permutations at alpha "
             "{}".format(stat_id.value, env.p_value, cfg.n_perm, cfg.alpha))

    return EnvelopeResult(observed, lower, upper, env.p_value, cfg, curves,
                          digest)
