"""Callable wrappers for the maps, potentials and stretch factors of a system.

Everything here is a plain callable accepting either a float or a numpy
array; systems hold these objects and never care which concrete kind they
got.  :class:`ExprFunc` wraps a parsed expression; :class:`TentFunc` is the
built-in piecewise-linear bump used by the worked two-branch example (the
expression language has no conditionals).
"""

from __future__ import annotations

import numpy as np

from . import exprlang

__all__ = ["ExprFunc", "TentFunc", "BumpedComplement", "as_func"]


class ExprFunc:
    """A real function of ``x`` given by an expression string."""

    def __init__(self, source):
        self.source = source
        self.ast = exprlang.parse(source)

    def __call__(self, x):
        return exprlang.evaluate(self.ast, x)

    def __repr__(self):
        return f"ExprFunc({self.source!r})"


class TentFunc:
    """Piecewise-linear bump of height ``delta`` centered at 1/2.

    Zero outside ``(1/2 - delta, 1/2 + delta)``, rising with slope 1 to peak
    ``delta`` at 1/2 and falling with slope -1 after it.
    """

    def __init__(self, delta):
        if not 0 < delta < 0.5:
            raise ValueError(f"tent height must be in (0, 1/2), got {delta}")
        self.delta = float(delta)

    def __call__(self, x):
        d = self.delta
        xs = np.asarray(x, dtype=np.float64)
        rising = (xs > 0.5 - d) & (xs <= 0.5)
        falling = (xs > 0.5) & (xs < 0.5 + d)
        out = np.where(rising, d - 0.5 + xs, np.where(falling, d + 0.5 - xs, 0.0))
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out

    @property
    def source(self):
        return f"tent(delta={self.delta!r})"

    def __repr__(self):
        return f"TentFunc(delta={self.delta!r})"


class BumpedComplement:
    """The potential ``1 - base(x) + bump(x)``."""

    def __init__(self, base, bump):
        self.base = base
        self.bump = bump

    def __call__(self, x):
        return 1.0 - self.base(x) + self.bump(x)

    @property
    def source(self):
        return f"1 - ({self.base.source}) + {self.bump.source}"

    def __repr__(self):
        return f"BumpedComplement({self.base!r}, {self.bump!r})"


def as_func(obj):
    """Coerce an expression string, a number, or a callable into a callable."""
    if isinstance(obj, str):
        return ExprFunc(obj)
    if isinstance(obj, (int, float)):
        return ExprFunc(repr(float(obj)))
    if callable(obj):
        return obj
    raise TypeError(f"cannot interpret {obj!r} as a function of x")
