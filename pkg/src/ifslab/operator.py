"""The transfer operator on grid functions.

T f(x) = sum_j p_j(x) f(w_j(x)) is discretized on N equispaced nodes over a
hull interval: the branch images w_j(x_i) and weights p_j(x_i) are fixed per
(system, hull, N), so one application is a sparse two-point stencil per
branch.  The stencil form (1-t) f[k] + t f[k+1] with nonnegative t keeps the
discrete operator exactly linear, monotone and positivity-preserving in the
node values.

Spectral quantities come from normalized power iteration of the constant
function 1: per-step sup-norm ratios give the point estimate of the spectral
radius, the running geometric means ||T^n 1||^(1/n) are kept as a
consistency trace, and min_x sum_j p_j(x) is an exact-on-grid lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .gridfn import GridFunction

__all__ = [
    "OperatorRangeError",
    "IrreducibilityError",
    "TransferOperator",
    "IterationTrace",
    "SpectralEstimate",
    "EigenPair",
    "SandwichReport",
    "apply_T",
    "iterate_T",
    "spectral_radius",
    "sandwich_check",
    "power_eigenfunction",
]


class OperatorRangeError(ValueError):
    """A branch image leaves the ambient interval: the map-range audit failed."""


class IrreducibilityError(RuntimeError):
    """Power iteration lost strict positivity, which a positive operator forbids."""


class TransferOperator:
    """Discretization of T on a fixed uniform grid.

    ``hull`` defaults to the system's ambient interval.  Branch images are
    validated against the ambient interval (tolerance ``range_tol`` times the
    diameter) and clamped to the hull: inputs off the hull read the clamped
    end value, consistent with GridFunction evaluation.
    """

    def __init__(self, system, hull=None, n_nodes=4096, range_tol=1e-9):
        if n_nodes < 2:
            raise ValueError("need at least 2 grid nodes")
        lo, hi = hull if hull is not None else (system.lo, system.hi)
        if not (system.lo <= lo < hi <= system.hi):
            raise ValueError(f"hull [{lo}, {hi}] not inside X "
                             f"[{system.lo}, {system.hi}]")
        self.system = system
        self.lo, self.hi = float(lo), float(hi)
        self.n = int(n_nodes)
        xs = np.linspace(self.lo, self.hi, self.n)
        self.nodes = xs

        m = system.m
        self.weights = np.empty((m, self.n), dtype=np.float64)
        self.idx = np.empty((m, self.n), dtype=np.int64)
        self.frac = np.empty((m, self.n), dtype=np.float64)
        tol = range_tol * system.diameter
        for j in range(m):
            p = np.asarray(system.potentials[j](xs), dtype=np.float64)
            if p.min() <= 0:
                raise ValueError(f"potential {j + 1} not positive on grid")
            q = np.asarray(system.maps[j](xs), dtype=np.float64)
            if q.min() < system.lo - tol or q.max() > system.hi + tol:
                raise OperatorRangeError(
                    f"map {j + 1} image [{q.min()}, {q.max()}] leaves X "
                    f"[{system.lo}, {system.hi}] beyond tolerance")
            q = np.clip(q, self.lo, self.hi)
            k = np.clip(np.searchsorted(xs, q, side="right") - 1, 0, self.n - 2)
            with np.errstate(invalid="ignore"):
                t = (q - xs[k]) / (xs[k + 1] - xs[k])
            t = np.clip(t, 0.0, 1.0)
            t[q >= self.hi] = 1.0
            k[q >= self.hi] = self.n - 2
            self.weights[j] = p
            self.idx[j] = k
            self.frac[j] = t
        self.row_sums = self.weights.sum(axis=0)

    @property
    def hull(self):
        return (self.lo, self.hi)

    def weight_lower_bound(self):
        """min over grid nodes of sum_j p_j(x): exact-on-grid lower bound
        for the spectral radius."""
        return float(self.row_sums.min())

    def grid_function(self, values):
        return GridFunction(self.lo, self.hi, values)

    def ones(self):
        return np.ones(self.n, dtype=np.float64)

    def apply_values(self, values, out=None):
        return backend.transfer_apply(self.weights, self.idx, self.frac,
                                      np.ascontiguousarray(values, dtype=np.float64),
                                      out)

    def apply(self, f):
        if not (f.lo == self.lo and f.hi == self.hi and f.n == self.n):
            raise ValueError("grid function does not match operator grid")
        return self.grid_function(self.apply_values(f.values))


@dataclass(frozen=True)
class IterationTrace:
    """Per-step sup norms of an operator iteration.

    In renormalized mode the iterate is divided by its sup norm each step and
    ``log_norm`` accumulates the logs, so the true iterate is
    exp(log_norm) * (returned function).
    """

    sup_norms: np.ndarray
    renormalized: bool
    log_norm: float


@dataclass(frozen=True)
class SpectralEstimate:
    """Spectral radius estimate from power iteration of 1.

    ``ratios[k]`` is ||T g_k|| for the normalized iterate g_k (the ratio
    estimate); ``gelfand[k]`` is ||T^(k+1) 1||^(1/(k+1)).  The bracket is
    [max(L, rho - spread), rho + spread] where L is the exact-on-grid lower
    bound min_x sum_j p_j and spread measures the tail oscillation of the
    ratio sequence; the Gelfand trace converges to the same limit from above
    and is reported for consistency checking.
    """

    rho: float
    lower_bound: float
    bracket: tuple
    ratios: np.ndarray
    gelfand: np.ndarray
    converged: bool
    n_used: int

    @property
    def width(self):
        return self.bracket[1] - self.bracket[0]


@dataclass(frozen=True)
class EigenPair:
    """Normalized eigenfunction candidate h with its residual.

    ``converged`` false means the iteration cap was reached; for systems
    where the positive eigenfunction does not exist this is the expected
    diagnostic, not an error.
    """

    h: GridFunction
    rho: float
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SandwichRow:
    n: int
    low: float
    high: float
    eps: float
    ok: bool


@dataclass(frozen=True)
class SandwichReport:
    rho: float
    rows: tuple
    passed: bool


def _operator_for(system, f=None, grid_n=4096, hull=None):
    if f is not None:
        return TransferOperator(system, (f.lo, f.hi), f.n)
    return TransferOperator(system, hull, grid_n)


def apply_T(system, f):
    """T f on f's own grid."""
    return _operator_for(system, f).apply(f)


def iterate_T(system, f, n, renormalize="auto", overflow_guard=1e120):
    """n-fold application of T.

    Returns (GridFunction, IterationTrace).  With ``renormalize=False`` the
    raw iterate is returned (semigroup-exact); "auto" switches to normalized
    mode only if a step's sup norm exceeds the overflow guard, and the switch
    is recorded in the trace.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    op = _operator_for(system, f)
    vals = f.values.copy()
    norms = np.empty(n, dtype=np.float64)
    renorm = renormalize is True
    log_norm = 0.0
    for k in range(n):
        vals = op.apply_values(vals)
        s = float(np.abs(vals).max())
        norms[k] = s
        if renormalize == "auto" and not renorm and s > overflow_guard:
            renorm = True
        if renorm:
            if s == 0.0:
                raise ZeroDivisionError("iterate vanished; cannot renormalize")
            vals /= s
            log_norm += math.log(s)
    return op.grid_function(vals), IterationTrace(norms, renorm, log_norm)


def spectral_radius(system, n_max=80, grid_n=4096, hull=None,
                    tail=10, osc_tol=1e-6):
    """Estimate the spectral radius by normalized power iteration of 1."""
    if n_max < 10:
        raise ValueError("n_max must be >= 10")
    op = _operator_for(system, grid_n=grid_n, hull=hull)
    v = op.ones()
    ratios = np.empty(n_max)
    gelfand = np.empty(n_max)
    log_sum = 0.0
    for k in range(n_max):
        v = op.apply_values(v)
        r = float(np.abs(v).max())
        ratios[k] = r
        log_sum += math.log(r)
        gelfand[k] = math.exp(log_sum / (k + 1))
        v /= r
    rho = float(ratios[-1])
    osc = float(np.abs(ratios[-tail:] - rho).max())
    converged = osc <= osc_tol * max(1.0, rho)
    pad = 64 * np.finfo(float).eps * max(1.0, rho)
    lower = op.weight_lower_bound()
    spread = osc + pad
    bracket = (float(max(lower, rho - spread)), float(rho + spread))
    return SpectralEstimate(rho, lower, bracket, ratios, gelfand,
                            converged, n_max)


def sandwich_check(system, rho, n_list, grid_n=4096, hull=None,
                   eps0=1e-6, eps_slope=1e-3):
    """Check min_x rho^-n T^n 1 <= 1 <= max_x rho^-n T^n 1 for each n.

    The tolerance eps_n = eps0 + eps_slope * n grows linearly to absorb a
    slightly wrong rho, whose effect drifts like (true/rho)^n; a rho
    corrupted by several percent fails by moderate n.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list or n_list[0] < 1:
        raise ValueError("n_list must contain positive integers")
    op = _operator_for(system, grid_n=grid_n, hull=hull)
    v = op.ones()
    log_norm = 0.0
    log_rho = math.log(rho)
    rows = []
    targets = set(n_list)
    for n in range(1, n_list[-1] + 1):
        v = op.apply_values(v)
        s = float(np.abs(v).max())
        v /= s
        log_norm += math.log(s)
        if n in targets:
            scale = math.exp(log_norm - n * log_rho)
            low = scale * float(v.min())
            high = scale * float(v.max())
            eps = eps0 + eps_slope * n
            ok = (low <= 1.0 + eps) and (high >= 1.0 - eps)
            rows.append(SandwichRow(n, low, high, eps, ok))
    return SandwichReport(float(rho), tuple(rows), all(r.ok for r in rows))


def power_eigenfunction(system, tol=1e-13, n_max=5000, grid_n=4096, hull=None):
    """Normalized power iteration f <- Tf/||Tf|| from f = 1.

    Stops when successive normalized iterates differ by at most ``tol`` in
    sup norm; hitting ``n_max`` first returns converged=False (a diagnostic:
    the eigenfunction may genuinely not exist for the system).  The estimate
    rho is the final norm ratio and the residual is ||Th - rho h|| on the
    grid.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = _operator_for(system, grid_n=grid_n, hull=hull)
    v = op.ones()
    rho = float("nan")
    converged = False
    iterations = 0
    for k in range(1, n_max + 1):
        w = op.apply_values(v)
        rho = float(np.abs(w).max())
        w /= rho
        diff = float(np.abs(w - v).max())
        v = w
        iterations = k
        if v.min() <= 0.0:
            raise IrreducibilityError(
                "iterate lost strict positivity; the operator is not "
                "behaving as an irreducible positive operator")
        if diff <= tol:
            converged = True
            break
    h = op.grid_function(v)
    residual = float(np.abs(op.apply_values(v) - rho * v).max())
    return EigenPair(h, rho, residual, iterations, converged)
