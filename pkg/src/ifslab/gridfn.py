"""Piecewise-linear functions on a uniform grid.

A :class:`GridFunction` stores values at N equispaced nodes over a hull
interval and evaluates anywhere by linear interpolation, clamped to the end
values outside the hull.  Linear interpolation keeps the discretized
transfer operator exactly linear and monotone in the node values.
"""

from __future__ import annotations

import numpy as np

__all__ = ["GridFunction"]


class GridFunction:
    def __init__(self, lo, hi, values):
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("need at least 2 node values")
        if not np.all(np.isfinite(values)):
            raise ValueError("node values must be finite")
        if not lo < hi:
            raise ValueError(f"empty hull [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        self.values = values

    @classmethod
    def constant(cls, lo, hi, n, value):
        return cls(lo, hi, np.full(n, float(value)))

    @classmethod
    def from_callable(cls, lo, hi, n, fn):
        xs = np.linspace(lo, hi, n)
        return cls(lo, hi, np.asarray(fn(xs), dtype=np.float64) * np.ones(n))

    @property
    def n(self):
        return self.values.size

    @property
    def nodes(self):
        return np.linspace(self.lo, self.hi, self.n)

    @property
    def hull(self):
        return (self.lo, self.hi)

    def __call__(self, x):
        return np.interp(x, self.nodes, self.values)

    def sup_norm(self):
        return float(np.abs(self.values).max())

    def copy(self):
        return GridFunction(self.lo, self.hi, self.values.copy())

    def with_values(self, values):
        return GridFunction(self.lo, self.hi, values)

    def same_grid(self, other):
        return self.lo == other.lo and self.hi == other.hi and self.n == other.n

    def __add__(self, other):
        if isinstance(other, GridFunction):
            if not self.same_grid(other):
                raise ValueError("grid mismatch")
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            if not self.same_grid(other):
                raise ValueError("grid mismatch")
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return (f"GridFunction([{self.lo}, {self.hi}], n={self.n}, "
                f"range=[{self.values.min():.6g}, {self.values.max():.6g}])")
