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

import numpy as np


def kernel_weight(d, r, bw: float):
    """Returns the Epanechnikov kernel weight of distance(s) d about r.

    K(d - r) = 3 / (4 bw) * (1 - ((d - r) / bw)^2) where |d - r| <= bw and 0
    elsewhere. Infinite distances have weight 0. Accepts scalars or arrays,
    which are broadcast.

    Args:
        d: Distance(s) in meters.
        r: The kernel centre(s) in meters.
        bw: The bandwidth in meters, > 0.

    Returns: float or ndarray
    """
    if not bw > 0:
        raise ValueError("The bandwidth must be > 0, was {}".format(bw))

    with np.errstate(invalid="ignore", over="ignore"):
        u = (np.asarray(d, dtype=np.float64) - r) / bw
        w = np.where(np.abs(u) <= 1.0, (0.75 / bw) * (1.0 - u * u), 0.0)

    if w.ndim == 0:
        return float(w)
    return w
