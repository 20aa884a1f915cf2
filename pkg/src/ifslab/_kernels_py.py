"""Pure-numpy implementations of the hot kernels.

The compiled module ifslab._kernels implements the same two functions with
identical arithmetic (the extension is built with -ffp-contract=off so the C
code rounds exactly like the numpy expression below).  ifslab.backend picks
whichever is available at import.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def transfer_apply(weights, idx, frac, values, out=None):
    """One application of the discretized transfer operator.

    ``weights``, ``idx``, ``frac`` have shape (m, n): for branch j and node i
    the stencil reads the input at cell ``idx[j, i]`` with linear fraction
    ``frac[j, i]`` and multiplies by ``weights[j, i]``.  Output node i is

        sum_j weights[j,i] * ((1 - frac[j,i]) * values[idx[j,i]]
                              + frac[j,i] * values[idx[j,i] + 1])
    """
    m, n = weights.shape
    if out is None:
        out = np.zeros(n, dtype=np.float64)
    else:
        out[:] = 0.0
    for j in range(m):
        k = idx[j]
        lo = values[k]
        hi = values[k + 1]
        out += weights[j] * ((1.0 - frac[j]) * lo + frac[j] * hi)
    return out


def segment_sums(values, starts):
    """Compensated per-segment sums.

    ``starts`` holds the start offset of each segment of ``values``; the last
    segment ends at ``len(values)``.  Each segment is summed with exact
    (correctly rounded) accumulation.
    """
    n_seg = len(starts)
    out = np.empty(n_seg, dtype=np.float64)
    bounds = list(starts) + [len(values)]
    for s in range(n_seg):
        out[s] = math.fsum(values[bounds[s]:bounds[s + 1]])
    return out
