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

"""The pointwise test functions of the mark summary characteristics.

Each test function is a registered class keyed by its TestFunctionId. All
methods accept scalars or numpy arrays, which are broadcast, so the same
definitions serve single pairs and whole pair lists.
"""

import logging
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from netmark import NetmarkError
from netmark.enums import TestFunctionId
from netmark.utilities import qualified_class_name

log = logging.getLogger(__name__)

test_function_registry = {}


class MissingContext(NetmarkError):
    """Exception raised when a test function needs a moment the context does
    not provide."""
    pass


def register(cls: type) -> type:
    """Class decorator to register TestFunction classes for the
    make_test_function factory function."""
    if cls.stat_id in test_function_registry:
        raise ValueError("A test function for {} is already "
                         "registered".format(cls.stat_id))
    log.debug("Registering test function class {} "
              "for {}".format(qualified_class_name(cls), cls.stat_id))
    test_function_registry[cls.stat_id] = cls
    return cls


@dataclass(frozen=True)
class MomentContext(object):
    """Mark moments at a timestamp (or arrays of them over timestamps).

    mu_rt, the conditional mean at the current r, is only needed by
    Schlather's I.
    """
    mu_t: Any
    sigma2_t: Any
    mu_rt: Optional[Any] = None

    def __post_init__(self):
        if np.any(np.asarray(self.sigma2_t) < 0):
            raise ValueError("sigma2_t must be >= 0")


class TestFunction(object, metaclass=ABCMeta):
    """A pointwise test function tau_f(h1, h2) with its normalising
    factor."""
    __test__ = False

    stat_id: TestFunctionId
    description: str

    neutral: float
    """The value of the normalised characteristic for independent marks."""

    centred: bool = False
    """Centred test functions are normalised by their closed-form factor,
    since their empirical pair sums are fixed by the centring."""

    symmetric: bool = True

    @abstractmethod
    def evaluate(self, h1, h2, ctx: MomentContext):
        """Returns tau_f(h1, h2)."""
        pass

    @abstractmethod
    def normalizer(self, ctx: MomentContext):
        """Returns the closed-form normalising factor c(t)."""
        pass

    def __repr__(self):
        return "<{}: {}>".format(self.__class__.__name__, self.stat_id.value)


@register
class StoyanCorrelation(TestFunction):
    stat_id = TestFunctionId.T1_StoyanCorr
    description = "Stoyan's mark correlation function"
    neutral = 1.0

    def evaluate(self, h1, h2, ctx):
        return h1 * h2

    def normalizer(self, ctx):
        return ctx.mu_t * ctx.mu_t


@register
class BeisbartKerscherCorrelation(TestFunction):
    stat_id = TestFunctionId.T2_BeisbartKerscher
    description = "Beisbart and Kerscher's mark correlation function"
    neutral = 1.0

    def evaluate(self, h1, h2, ctx):
        return h1 + h2

    def normalizer(self, ctx):
        return 2 * ctx.mu_t


@register
class RMarkLeft(TestFunction):
    stat_id = TestFunctionId.T3_RMarkLeft
    description = "r-mark correlation function of the first mark"
    neutral = 1.0
    symmetric = False

    def evaluate(self, h1, h2, ctx):
        # Broadcast to the pair shape
        return h1 + 0.0 * h2

    def normalizer(self, ctx):
        return ctx.mu_t


@register
class RMarkRight(TestFunction):
    stat_id = TestFunctionId.T4_RMarkRight
    description = "r-mark correlation function of the second mark"
    neutral = 1.0
    symmetric = False

    def evaluate(self, h1, h2, ctx):
        return 0.0 * h1 + h2

    def normalizer(self, ctx):
        return ctx.mu_t


@register
class MarkVariogram(TestFunction):
    stat_id = TestFunctionId.T5_MarkVariogram
    description = "Mark variogram"
    neutral = 1.0

    def evaluate(self, h1, h2, ctx):
        d = h1 - h2
        return 0.5 * (d * d)

    def normalizer(self, ctx):
        return ctx.sigma2_t


@register
class StoyanCovariance(TestFunction):
    stat_id = TestFunctionId.T6_StoyanCov
    description = "Stoyan's covariance function"
    neutral = 0.0
    centred = True

    def evaluate(self, h1, h2, ctx):
        return h1 * h2 - ctx.mu_t * ctx.mu_t

    def normalizer(self, ctx):
        return 1.0


@register
class IshamCorrelation(TestFunction):
    stat_id = TestFunctionId.T7_IshamCorr
    description = "Isham's mark correlation function"
    neutral = 0.0
    centred = True

    def evaluate(self, h1, h2, ctx):
        return h1 * h2 - ctx.mu_t * ctx.mu_t

    def normalizer(self, ctx):
        return ctx.sigma2_t


@register
class SchlatherI(TestFunction):
    stat_id = TestFunctionId.T8_SchlatherI
    description = "Schlather's I function"
    neutral = 0.0
    centred = True

    def evaluate(self, h1, h2, ctx):
        if ctx.mu_rt is None:
            raise MissingContext("Schlather's I requires the conditional "
                                 "mean mu_h(r)(t)")
        return (h1 - ctx.mu_rt) * (h2 - ctx.mu_rt)

    def normalizer(self, ctx):
        return ctx.sigma2_t


@register
class ShimataniI(TestFunction):
    stat_id = TestFunctionId.T9_ShimantaniI
    description = "Shimatani's I function"
    neutral = 0.0
    centred = True

    def evaluate(self, h1, h2, ctx):
        return (h1 - ctx.mu_t) * (h2 - ctx.mu_t)

    def normalizer(self, ctx):
        return ctx.sigma2_t


def make_test_function(stat_id: TestFunctionId) -> TestFunction:
    """Returns the TestFunction registered for a statistic.

    Args:
        stat_id: A TestFunctionId.

    Returns: TestFunction
    """
    if stat_id not in test_function_registry:
        raise ValueError("No test function is registered for {}. "
                         "Known are: {}".format(stat_id,
                                                list(test_function_registry)))
    return test_function_registry[stat_id]()


def evaluate(stat_id: TestFunctionId, h1, h2, ctx: MomentContext):
    """Returns the pointwise test function value tau_f(h1, h2).

    Raises:
        MissingContext: Schlather's I without mu_rt in the context.
    """
    return make_test_function(stat_id).evaluate(h1, h2, ctx)


def normalizer(stat_id: TestFunctionId, ctx: MomentContext):
    """Returns the closed-form normalising factor of a test function."""
    return make_test_function(stat_id).normalizer(ctx)


def neutral_value(stat_id: TestFunctionId) -> float:
    """Returns the value of the normalised characteristic under independent
    marks: 1 for the ratio-type statistics and 0 for the centred ones."""
    return make_test_function(stat_id).neutral
