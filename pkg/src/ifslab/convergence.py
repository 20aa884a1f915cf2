"""Empirical check of the convergence claim: rho^-n T^n f -> <mu, f> h.

For each test function the normalized iterates are compared against the
predicted limit and the sup-norm errors e_n recorded.  On a finite grid the
errors flatten at a discretization floor (the atom measure and the grid
operator disagree at that order); the geometric rate is fitted on the last
half of the pre-floor segment, in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operator import TransferOperator

__all__ = ["FunctionTrace", "ConvergenceReport", "convergence_experiment"]


@dataclass(frozen=True)
class FunctionTrace:
    label: str
    errors: np.ndarray          # e_n for n = 0..n_max
    limit_coefficient: float    # <mu, f>
    rate: float | None          # fitted b; None when the trace sits at floor
    fit_residual: float | None  # rms residual of the log-linear fit
    fit_window: tuple           # (n_first, n_last) inclusive; (0, -1) if none
    floor: float
    at_floor: bool
    monotone_tail: bool


@dataclass(frozen=True)
class ConvergenceReport:
    rho: float
    n_max: int
    traces: tuple


def _fit_rate(errors, floor_factor=2.0):
    """Fit log e_n = log C + n log b on the last half of the pre-floor part."""
    e = np.asarray(errors, dtype=np.float64)
    n_max = e.size - 1
    floor = float(e[1:].min())  # n = 0 can be exactly zero (f = h)
    cutoff = floor * floor_factor + 1e-300
    n_floor = n_max + 1
    for n in range(1, n_max + 1):
        if e[n] <= cutoff:
            n_floor = n
            break
    pre = n_floor - 1          # last index before the floor zone
    first = max(1, pre // 2 + 1)
    window = np.arange(first, pre + 1)
    if window.size < 3:
        return None, None, (0, -1), floor, True
    ys = np.log(e[window])
    slope, intercept = np.polyfit(window, ys, 1)
    resid = float(np.sqrt(np.mean((intercept + slope * window - ys) ** 2)))
    return float(math.exp(slope)), resid, (int(window[0]), int(window[-1])), floor, False


def convergence_experiment(system, h, mu, rho, f_list, n_max=48,
                           labels=None):
    """Measure e_n = ||rho^-n T^n f - <mu, f> h||_inf for each f.

    ``h`` must be pair-normalized against ``mu`` (<mu, h> = 1) and ``rho``
    taken from the same eigen computation.  Iteration is renormalized with
    log-norm bookkeeping, so no overflow occurs for any n_max.  Divergence
    shows up as a non-decaying trace, reported as data.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    op = TransferOperator(system, (h.lo, h.hi), h.n)
    log_rho = math.log(rho)
    traces = []
    if labels is None:
        labels = [getattr(f, "label", f"f{i}") for i, f in enumerate(f_list)]
    for label, f in zip(labels, f_list):
        if not h.same_grid(f):
            raise ValueError(f"test function {label!r} not on h's grid")
        coeff = mu.integrate(f)
        target = coeff * h.values
        v = f.values.copy()
        errors = np.empty(n_max + 1)
        errors[0] = float(np.abs(v - target).max())
        log_norm = 0.0
        for n in range(1, n_max + 1):
            v = op.apply_values(v)
            s = float(np.abs(v).max())
            v /= s
            log_norm += math.log(s)
            scale = math.exp(log_norm - n * log_rho)
            errors[n] = float(np.abs(scale * v - target).max())
        rate, resid, window, floor, at_floor = _fit_rate(errors)
        if window[1] >= window[0]:
            seg = errors[window[0] - 1:window[1] + 1]
            monotone = bool(np.all(np.diff(seg) <= 1e-9 + 0.05 * seg[:-1]))
        else:
            monotone = True
        traces.append(FunctionTrace(label, errors, float(coeff), rate, resid,
                                    window, floor, at_floor, monotone))
    return ConvergenceReport(float(rho), int(n_max), tuple(traces))
