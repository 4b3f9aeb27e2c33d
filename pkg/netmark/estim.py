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

"""Kernel estimation of the pointwise tau_f-correlation surface and its
time-integrated global curve.

For a test function tau_f the pointwise estimate at (r, t) is the ratio of

  c(r)(t) = sum_{i != j} tau_f(h_i(t), h_j(t)) K(d_ij - r)
            / sum_{i != j} K(d_ij - r)

to a normalising factor c(t). For the non-centred test functions c(t) is
the empirical sum_{i != j} tau_f(h_i(t), h_j(t)) / N^2; the centred ones use
their closed-form factor. Sums run over ordered pairs of distinct points.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.sparse import csr_matrix

from netmark import NetmarkError
from netmark.enums import TestFunctionId
from netmark.kernel import kernel_weight
from netmark.marks import MarkedPattern, TimeGrid, conditional_mean_at_r, \
    pointwise_mean, pointwise_variance
from netmark.netgeom import distance_matrix
from netmark.testfun import MomentContext, TestFunction, make_test_function

log = logging.getLogger(__name__)

DEFAULT_NR = 100
DEFAULT_RMAX_FRACTION = 0.25
DEFAULT_BANDWIDTH_FACTOR = 0.15

DEGENERACY_EPS = 1e-12
"""Relative size below which a normalising factor is treated as zero."""

ROW_BLOCK = 16
"""Rows of the r grid evaluated per task. Fixed so that results do not
depend on the number of threads."""


class EstimationError(NetmarkError):
    """Exception raised for errors in estimation."""
    pass


class TooFewPoints(EstimationError):
    """Exception raised when a pattern has fewer than two points."""
    pass


class AllTimesDegenerate(EstimationError):
    """Exception raised when every timestamp has a vanishing normalising
    factor."""
    pass


class RGrid(object):
    """The distances r at which characteristics are estimated, with the
    kernel bandwidth."""

    def __init__(self, r_values, bandwidth: float):
        r = np.array(r_values, dtype=np.float64).reshape(-1)
        if r.size < 1:
            raise EstimationError("An r grid must have at least one value")
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise EstimationError("r values must be finite and >= 0")
        if np.any(np.diff(r) <= 0):
            raise EstimationError("r values must be increasing")
        if not bandwidth > 0 or not math.isfinite(bandwidth):
            raise EstimationError("The bandwidth must be > 0, "
                                  "was {}".format(bandwidth))

        r.setflags(write=False)
        self._r = r
        self._bandwidth = float(bandwidth)

    @classmethod
    def regular(cls, r_max: float, nr: int, bandwidth: float):
        """Returns a grid of nr evenly spaced values from 0 to r_max."""
        if nr < 1:
            raise EstimationError("nr must be >= 1, was {}".format(nr))
        if not r_max > 0 and nr > 1:
            raise EstimationError("r_max must be > 0, was {}".format(r_max))
        return cls(np.linspace(0.0, r_max, nr), bandwidth)

    @property
    def r_values(self) -> np.ndarray:
        return self._r

    @property
    def r_max(self) -> float:
        return float(self._r[-1])

    @property
    def bandwidth(self) -> float:
        return self._bandwidth

    def __len__(self):
        return self._r.size

    def __eq__(self, other):
        return isinstance(other, RGrid) and \
               np.array_equal(self._r, other._r) and \
               self._bandwidth == other._bandwidth

    def __hash__(self):
        return hash((self._r.tobytes(), self._bandwidth))

    def __repr__(self):
        return "<RGrid: R={}, r_max={}, bandwidth={}>".format(
            len(self), self.r_max, self._bandwidth)


class SummarySurface(object):
    """The pointwise estimates kappa(r_i)(t_k) as an R x T matrix.

    Rows with no kernel weight (weight_ok false) and columns whose
    normalising factor vanished (time_ok false) carry the neutral value.
    """

    def __init__(self, stat_id: TestFunctionId, grid: TimeGrid, rgrid: RGrid,
                 values: np.ndarray, weight_ok: np.ndarray,
                 time_ok: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(rgrid), len(grid)):
            raise EstimationError("Surface shape {} does not match the grids "
                                  "({}, {})".format(values.shape, len(rgrid),
                                                    len(grid)))
        self.stat_id = stat_id
        self.grid = grid
        self.rgrid = rgrid
        self.values = values
        self.weight_ok = np.asarray(weight_ok, dtype=bool)
        self.time_ok = np.asarray(time_ok, dtype=bool)

    @property
    def masked(self) -> np.ndarray:
        """R x T boolean matrix, true where an entry carries the neutral
        value."""
        return ~(self.weight_ok[:, None] & self.time_ok[None, :])

    def __repr__(self):
        return "<SummarySurface: {} R={} T={}>".format(self.stat_id.value,
                                                      len(self.rgrid),
                                                      len(self.grid))


class SummaryCurve(object):
    """The global estimates kappa(r_i), time-integrated from a surface."""

    def __init__(self, stat_id: TestFunctionId, rgrid: RGrid,
                 values: np.ndarray, weight_ok: np.ndarray,
                 raw: bool = False):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(rgrid),):
            raise EstimationError("Curve length {} does not match the r grid "
                                  "length {}".format(values.shape,
                                                     len(rgrid)))
        self.stat_id = stat_id
        self.rgrid = rgrid
        self.values = values
        self.weight_ok = np.asarray(weight_ok, dtype=bool)
        self.raw = raw

    @property
    def masked(self) -> np.ndarray:
        return ~self.weight_ok

    def __repr__(self):
        return "<SummaryCurve: {} R={}>".format(self.stat_id.value,
                                               len(self.rgrid))


class PairRatio(NamedTuple):
    value: float
    total_weight: float


def default_bandwidth(n: int, total_length: float,
                      factor: float = DEFAULT_BANDWIDTH_FACTOR) -> float:
    """Returns the rule-of-thumb bandwidth factor / sqrt(lambda), where
    lambda = n / total_length is the intensity of points per meter."""
    if n < 1 or not total_length > 0:
        raise EstimationError("Cannot choose a bandwidth for {} points on "
                              "length {}".format(n, total_length))
    return factor / math.sqrt(n / total_length)


def default_rgrid(dm: np.ndarray, total_length: float,
                  nr: int = DEFAULT_NR,
                  r_max: Optional[float] = None,
                  bandwidth: Optional[float] = None,
                  rmax_fraction: float = DEFAULT_RMAX_FRACTION,
                  bandwidth_factor: float = DEFAULT_BANDWIDTH_FACTOR) \
        -> RGrid:
    """Returns an r grid of nr values from 0 to r_max.

    r_max defaults to rmax_fraction times the largest finite interpoint
    distance and the bandwidth to default_bandwidth().

    Args:
        dm: The distance matrix of the pattern.
        total_length: The network length in meters.
        nr: Number of r values.
        r_max: Largest r. Optional.
        bandwidth: Kernel bandwidth. Optional.
        rmax_fraction: Fraction of the largest distance used for r_max.
        bandwidth_factor: The rule-of-thumb factor.

    Returns: RGrid

    Raises:
        TooFewPoints: The pattern has fewer than two points.
    """
    n = dm.shape[0]
    if n < 2:
        raise TooFewPoints("At least two points are required, "
                           "got {}".format(n))
    if r_max is None:
        finite = dm[np.isfinite(dm)]
        d_max = float(finite.max()) if finite.size else 0.0
        r_max = rmax_fraction * d_max
        if not r_max > 0:
            raise EstimationError("Cannot choose r_max: the largest finite "
                                  "interpoint distance is "
                                  "{}".format(d_max))
    if bandwidth is None:
        bandwidth = default_bandwidth(n, total_length, bandwidth_factor)

    return RGrid.regular(r_max, nr, bandwidth)


def moment_context(p: MarkedPattern) -> MomentContext:
    """Returns the pointwise mean and variance of a pattern's marks over all
    timestamps."""
    return MomentContext(pointwise_mean(p), pointwise_variance(p))


def _context_at(ctx: MomentContext, k: int) -> MomentContext:
    return MomentContext(ctx.mu_t[k], ctx.sigma2_t[k])


def _chat_t_column(h: np.ndarray, tf: TestFunction,
                   ctx: MomentContext) -> float:
    """Returns the normalising factor for one timestamp from its column of
    marks h and the moments at that timestamp."""
    if tf.centred:
        return float(tf.normalizer(ctx))

    n = h.size
    tau = np.asarray(tf.evaluate(h[:, None], h[None, :], ctx),
                     dtype=np.float64)
    np.fill_diagonal(tau, 0.0)
    return float(tau.sum() / (n * n))


def chat_rt(p: MarkedPattern, dm: np.ndarray, stat_id: TestFunctionId,
            r: float, bw: float, t_index: int) -> PairRatio:
    """Returns the kernel-weighted mean of tau_f over ordered pairs of
    distinct points at distance about r, at one timestamp, and the total
    kernel weight. The value is NaN when the total weight is zero.

    Raises:
        TooFewPoints: The pattern has fewer than two points.
    """
    if p.n < 2:
        raise TooFewPoints("At least two points are required, "
                           "got {}".format(p.n))
    tf = make_test_function(stat_id)

    w = kernel_weight(dm, r, bw)
    np.fill_diagonal(w, 0.0)
    total = float(w.sum())
    if total <= 0:
        return PairRatio(math.nan, 0.0)

    mu_rt = None
    if stat_id == TestFunctionId.T8_SchlatherI:
        mu_rt = float(conditional_mean_at_r(p, dm, r, bw).values[t_index])

    ctx = MomentContext(pointwise_mean(p)[t_index],
                        pointwise_variance(p)[t_index], mu_rt)
    h = p.values[:, t_index]
    tau = tf.evaluate(h[:, None], h[None, :], ctx)

    return PairRatio(float((tau * w).sum() / total), total)


def chat_t(p: MarkedPattern, stat_id: TestFunctionId, t_index: int) -> float:
    """Returns the normalising factor c(t) at one timestamp.

    For the non-centred test functions this is the empirical
    sum_{i != j} tau_f / N^2 (N^2, not N(N - 1)). For the centred ones it is
    the closed-form factor: 1 for Stoyan's covariance, the variance
    sigma^2(t) otherwise.

    Raises:
        TooFewPoints: The pattern has fewer than two points.
    """
    if p.n < 2:
        raise TooFewPoints("At least two points are required, "
                           "got {}".format(p.n))
    tf = make_test_function(stat_id)
    ctx = moment_context(p)

    return _chat_t_column(p.values[:, t_index], tf, _context_at(ctx, t_index))


class PairKernel(object):
    """Kernel weights of the ordered pairs of distinct points against the r
    grid, as a sparse R x P matrix.

    Only pairs within bandwidth of some r are kept; pairs are in ascending
    (i, j) order.
    """

    def __init__(self, dm: np.ndarray, rgrid: RGrid):
        n = dm.shape[0]
        r = rgrid.r_values
        bw = rgrid.bandwidth

        in_range = (dm >= r[0] - bw) & (dm <= r[-1] + bw)
        np.fill_diagonal(in_range, False)
        self.i, self.j = np.nonzero(in_range)
        d = dm[self.i, self.j]

        indptr = [0]
        indices = []
        data = []
        for r_k in r:
            cols = np.flatnonzero(np.abs(d - r_k) <= bw)
            w = kernel_weight(d[cols], r_k, bw)
            keep = w > 0
            indices.append(cols[keep])
            data.append(w[keep])
            indptr.append(indptr[-1] + int(keep.sum()))

        self.weights = csr_matrix(
            (np.concatenate(data) if data else np.empty(0),
             np.concatenate(indices) if indices else np.empty(0, np.int64),
             np.array(indptr)),
            shape=(r.size, self.i.size))
        self.total = np.asarray(self.weights.sum(axis=1)).reshape(-1)
        self.n = n

        log.debug("Kernel pairs: {} of {} ordered pairs in range, "
                  "{} nonzero weights".format(self.i.size, n * (n - 1),
                                              self.weights.nnz))


class SummaryEstimator(object):
    """Estimates a characteristic for one point set under any number of mark
    assignments. The distances and kernel weights are computed once."""

    def __init__(self, p: MarkedPattern, stat_id: TestFunctionId,
                 rgrid: Optional[RGrid] = None, dm: Optional[np.ndarray] = None,
                 threads: int = 1):
        """
        Args:
            p: A marked pattern; its points are shared by every estimate.
            stat_id: The statistic.
            rgrid: The r grid. Optional, defaults to default_rgrid().
            dm: The distance matrix of the points. Optional.
            threads: Worker threads for r grid rows.
        """
        if p.n < 2:
            raise TooFewPoints("At least two points are required, "
                               "got {}".format(p.n))
        if dm is None:
            dm = distance_matrix(p.network, p.points)
        if rgrid is None:
            rgrid = default_rgrid(dm, p.network.total_length)

        self.pattern = p
        self.stat_id = stat_id
        self.test_function = make_test_function(stat_id)
        self.dm = dm
        self.rgrid = rgrid
        self.threads = threads
        self.pairs = PairKernel(dm, rgrid)

        empty = ~(self.pairs.total > 0)
        if np.any(empty):
            log.warning("No kernel weight at {} of {} r values; these carry "
                        "the neutral value".format(int(empty.sum()),
                                                   len(rgrid)))

    def denominator(self, p: MarkedPattern) -> np.ndarray:
        """Returns the normalising factors c(t_k) for all timestamps."""
        ctx = moment_context(p)
        return np.array([_chat_t_column(p.values[:, k], self.test_function,
                                        _context_at(ctx, k))
                         for k in range(len(p.grid))])

    def numerator(self, p: MarkedPattern) -> np.ndarray:
        """Returns the R x T matrix of c(r_i)(t_k) numerators, i.e. the
        kernel-weighted sums of tau_f (not yet divided by the weights)."""
        ctx = moment_context(p)
        h = p.values
        hi, hj = h[self.pairs.i], h[self.pairs.j]
        w = self.pairs.weights
        n_rows = len(self.rgrid)

        blocks = [(start, min(start + ROW_BLOCK, n_rows))
                  for start in range(0, n_rows, ROW_BLOCK)]

        if self.stat_id == TestFunctionId.T8_SchlatherI:
            def block_numerator(bounds):
                start, end = bounds
                out = np.zeros((end - start, h.shape[1]))
                for k in range(start, end):
                    row = w[k]
                    total = self.pairs.total[k]
                    if not total > 0:
                        continue
                    mu_rt = np.asarray(row @ hi).reshape(-1) / total
                    rctx = MomentContext(ctx.mu_t, ctx.sigma2_t, mu_rt)
                    tau = self.test_function.evaluate(hi, hj, rctx)
                    out[k - start] = np.asarray(row @ tau).reshape(-1)
                return out
        else:
            tau = np.asarray(self.test_function.evaluate(hi, hj, ctx),
                             dtype=np.float64).reshape(hi.shape)

            def block_numerator(bounds):
                start, end = bounds
                return w[start:end] @ tau

        if self.threads > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                parts = list(executor.map(block_numerator, blocks))
        else:
            parts = [block_numerator(b) for b in blocks]

        return np.vstack([np.asarray(part).reshape(-1, h.shape[1])
                          for part in parts])

    def surface(self, p: Optional[MarkedPattern] = None,
                denominator: Optional[np.ndarray] = None) -> SummarySurface:
        """Returns the pointwise surface for a mark assignment on the
        estimator's points.

        Args:
            p: A pattern on the same points. Optional, defaults to the
               pattern the estimator was made with.
            denominator: Precomputed normalising factors. Optional; these
                         are invariant under permutation of the marks.

        Returns: SummarySurface
        """
        if p is None:
            p = self.pattern
        if denominator is None:
            denominator = self.denominator(p)

        neutral = self.test_function.neutral
        scale = float(np.max(np.abs(denominator)))
        time_ok = np.abs(denominator) > DEGENERACY_EPS * (1.0 + scale)
        weight_ok = self.pairs.total > 0

        values = np.full((len(self.rgrid), len(p.grid)), neutral)
        rows = np.flatnonzero(weight_ok)
        cols = np.flatnonzero(time_ok)
        if rows.size and cols.size:
            num = self.numerator(p)
            ratio = num[rows][:, cols] / self.pairs.total[rows, None]
            values[np.ix_(rows, cols)] = ratio / denominator[cols]

        return SummarySurface(self.stat_id, p.grid, self.rgrid, values,
                              weight_ok, time_ok)


def pointwise_kappa(p: MarkedPattern, dm: np.ndarray,
                    stat_id: TestFunctionId, rgrid: RGrid,
                    threads: int = 1) -> SummarySurface:
    """Returns the pointwise surface kappa(r)(t) of a statistic.

    Entries where the kernel weight at r vanishes, or the normalising factor
    at t is degenerate, carry the statistic's neutral value.

    Raises:
        TooFewPoints: The pattern has fewer than two points.
    """
    estimator = SummaryEstimator(p, stat_id, rgrid, dm=dm, threads=threads)
    surface = estimator.surface()

    degenerate = int((~surface.time_ok).sum())
    if degenerate:
        log.warning("{}: {} of {} timestamps have a degenerate normalising "
                    "factor and carry the neutral "
                    "value".format(stat_id.value, degenerate,
                                   len(surface.grid)))
    return surface


def global_kappa(s: SummarySurface, raw: bool = False,
                 strict: bool = True) -> SummaryCurve:
    """Returns the global curve kappa(r), the trapezoid-rule integral of the
    surface over the non-degenerate timestamps.

    The integral is divided by the time span of the retained timestamps so
    that the neutral value is preserved; raw=True returns the plain
    integral. With a single retained timestamp its value is returned.

    Args:
        s: A surface.
        raw: Return the unnormalised integral.
        strict: Raise AllTimesDegenerate if no timestamp is retained;
                otherwise return an all-masked neutral curve.

    Returns: SummaryCurve
    """
    neutral = make_test_function(s.stat_id).neutral
    cols = np.flatnonzero(s.time_ok)
    if cols.size == 0:
        if strict:
            raise AllTimesDegenerate("{}: every timestamp has a degenerate "
                                     "normalising "
                                     "factor".format(s.stat_id.value))
        log.warning("{}: every timestamp is degenerate; the curve is "
                    "neutral".format(s.stat_id.value))
        return SummaryCurve(s.stat_id, s.rgrid, np.full(len(s.rgrid), neutral),
                            np.zeros(len(s.rgrid), dtype=bool), raw=raw)

    t = s.grid.timestamps[cols]
    v = s.values[:, cols]
    if cols.size == 1:
        integral = v[:, 0].copy()
    else:
        integral = trapezoid(v, t, axis=1)
        if not raw:
            integral = integral / (t[-1] - t[0])

    values = np.where(s.weight_ok, integral, neutral)
    return SummaryCurve(s.stat_id, s.rgrid, values, s.weight_ok.copy(),
                        raw=raw)


def estimate_summary(p: MarkedPattern, stat_id: TestFunctionId,
                     rgrid: Optional[RGrid] = None,
                     dm: Optional[np.ndarray] = None,
                     threads: int = 1, raw: bool = False,
                     strict: bool = True) \
        -> Tuple[SummarySurface, SummaryCurve]:
    """Estimates the pointwise surface and global curve of a statistic.

    The distance matrix is computed once (unless given) and the r grid
    defaults to default_rgrid().

    Returns: Tuple[SummarySurface, SummaryCurve]
    """
    if p.n < 2:
        raise TooFewPoints("At least two points are required, "
                           "got {}".format(p.n))
    if dm is None:
        dm = distance_matrix(p.network, p.points, threads=threads)
    if rgrid is None:
        rgrid = default_rgrid(dm, p.network.total_length)

    log.info("Estimating {} for {} points, R={}, T={}, "
             "bandwidth={}".format(stat_id.value, p.n, len(rgrid),
                                   len(p.grid), rgrid.bandwidth))

    surface = pointwise_kappa(p, dm, stat_id, rgrid, threads=threads)
    curve = global_kappa(surface, raw=raw, strict=strict)

    return surface, curve
