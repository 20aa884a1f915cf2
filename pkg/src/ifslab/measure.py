"""Finitely-supported measures and the dual transfer operator.

The dual operator acts exactly on atom lists: each atom (x, mass) spawns one
atom (w_j(x), p_j(x) * mass) per branch, so the atom count multiplies by m
per step.  Coarsening onto width-r cells (mass-weighted centroid per
occupied cell, compensated mass sums) is the only approximation and is
applied once per iteration when computing the eigenmeasure.

The pairing <mu, f> = sum_a mass_a f(x_a) with f interpolated the same way
on both sides makes the duality identity <T* mu, f> = <mu, Tf> a finite
algebraic identity, used as this module's master self-test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .gridfn import GridFunction

__all__ = [
    "DiscreteMeasure",
    "PairingError",
    "apply_T_star",
    "coarsen",
    "duality_gap",
    "pair_normalize",
    "power_eigenmeasure",
    "w1_distance",
    "EigenMeasureResult",
]


class PairingError(ValueError):
    """A pairing that must be positive was not."""


class DiscreteMeasure:
    """A finite list of weighted atoms with strictly positive masses."""

    def __init__(self, positions, masses, resolution=None):
        positions = np.ascontiguousarray(positions, dtype=np.float64)
        masses = np.ascontiguousarray(masses, dtype=np.float64)
        if positions.ndim != 1 or positions.shape != masses.shape:
            raise ValueError("positions and masses must be 1-D and aligned")
        if positions.size == 0:
            raise ValueError("a measure needs at least one atom")
        if not np.all(np.isfinite(positions)):
            raise ValueError("atom positions must be finite")
        if not (np.all(masses > 0) and np.all(np.isfinite(masses))):
            raise ValueError("atom masses must be strictly positive and finite")
        self.positions = positions
        self.masses = masses
        self.resolution = resolution

    @classmethod
    def point_mass(cls, x, mass=1.0):
        return cls(np.array([float(x)]), np.array([float(mass)]))

    @classmethod
    def uniform(cls, positions):
        positions = np.asarray(positions, dtype=np.float64)
        n = positions.size
        return cls(positions, np.full(n, 1.0 / n))

    @property
    def n_atoms(self):
        return self.positions.size

    def total_mass(self):
        """Correctly rounded total (compensated summation)."""
        return math.fsum(self.masses)

    def integrate(self, f):
        """<mu, f> for a callable or GridFunction f."""
        return float(np.dot(self.masses, np.asarray(f(self.positions), dtype=np.float64)))

    def normalized(self):
        return DiscreteMeasure(self.positions, self.masses / self.total_mass(),
                               self.resolution)

    def __repr__(self):
        return (f"DiscreteMeasure({self.n_atoms} atoms, "
                f"mass={self.total_mass():.6g})")


def apply_T_star(system, mu):
    """T* mu = sum_j (w_j)_* (p_j mu): exact pushforward of the atom list."""
    positions = np.concatenate([w(mu.positions) for w in system.maps])
    masses = np.concatenate([p(mu.positions) * mu.masses for p in system.potentials])
    return DiscreteMeasure(positions, masses)


def coarsen(mu, resolution, anchor=0.0):
    """Merge atoms cell-by-cell at width ``resolution``.

    Each occupied cell is replaced by one atom at the mass-weighted centroid
    carrying the cell's total mass (compensated sums), clamped to the span of
    its member atoms so no atom leaves its cell.  Cells holding a single atom
    pass through untouched.  Deterministic and independent of input order.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    cells = np.floor((mu.positions - anchor) / resolution).astype(np.int64)
    order = np.lexsort((mu.masses, mu.positions, cells))
    cells = cells[order]
    pos = mu.positions[order]
    mass = mu.masses[order]

    starts = np.flatnonzero(np.concatenate(([True], cells[1:] != cells[:-1])))
    if starts.size == mu.n_atoms:
        return DiscreteMeasure(pos, mass, resolution)

    ends = np.concatenate((starts[1:], [cells.size]))
    cell_mass = backend.segment_sums(mass, starts.astype(np.int64))
    moments = backend.segment_sums(mass * pos, starts.astype(np.int64))
    centroid = moments / cell_mass
    # positions are sorted within each cell: clamp to member span
    centroid = np.clip(centroid, pos[starts], pos[ends - 1])
    single = (ends - starts) == 1
    centroid[single] = pos[starts[single]]
    cell_mass[single] = mass[starts[single]]
    return DiscreteMeasure(centroid, cell_mass, resolution)


def duality_gap(system, mu, f):
    """|<T* mu, f> - <mu, Tf>| with Tf evaluated exactly at each atom.

    Both sides interpolate f identically and expand to the same finite sum,
    so the gap is pure rounding noise (~1e-16 relative) before coarsening.
    """
    if not isinstance(f, GridFunction):
        raise TypeError("f must be a GridFunction")
    lhs = apply_T_star(system, mu).integrate(f)
    tf_at_atoms = np.zeros(mu.n_atoms)
    for w, p in zip(system.maps, system.potentials):
        tf_at_atoms += p(mu.positions) * f(w(mu.positions))
    rhs = float(np.dot(mu.masses, tf_at_atoms))
    return abs(lhs - rhs)


def pair_normalize(h, mu):
    """Rescale h so that <mu, h> = 1."""
    pairing = mu.integrate(h)
    if not pairing > 0:
        raise PairingError(f"<mu, h> = {pairing} is not positive")
    return h * (1.0 / pairing)


def _cdf_breaks(mu):
    order = np.argsort(mu.positions, kind="stable")
    pos = mu.positions[order]
    cum = np.cumsum(mu.masses[order])
    return pos, cum


def w1_distance(mu, nu):
    """L1 distance between the CDFs of two measures (Wasserstein-1 for
    probability measures): exact for atom lists."""
    pa, ca = _cdf_breaks(mu)
    pb, cb = _cdf_breaks(nu)
    grid = np.union1d(pa, pb)
    if grid.size < 2:
        return 0.0  # common single support point
    fa = np.concatenate(([0.0], ca))[np.searchsorted(pa, grid, side="right")]
    fb = np.concatenate(([0.0], cb))[np.searchsorted(pb, grid, side="right")]
    return float(np.sum(np.abs(fa[:-1] - fb[:-1]) * np.diff(grid)))


@dataclass(frozen=True)
class EigenMeasureResult:
    mu: DiscreteMeasure
    rho: float
    iterations: int
    converged: bool
    distance_trace: np.ndarray


def power_eigenmeasure(system, tol=1e-10, n_max=400, resolution=None,
                       hull=None, mesh=None):
    """Iterate mu <- coarsen(T* mu) / mass toward the eigenmeasure.

    Starts from uniform atoms on the mesh points (or a uniform grid over the
    hull).  The eigenvalue estimate is the pre-coarsening mass ratio of the
    final step; convergence is measured by the CDF distance between
    successive normalized measures.  Non-convergence is reported, not raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if mesh is not None:
        start = mesh.points
        lo, hi = mesh.hull
        if resolution is None:
            resolution = mesh.resolution
    else:
        lo, hi = hull if hull is not None else (system.lo, system.hi)
        if resolution is None:
            resolution = (hi - lo) / 1024
        start = np.linspace(lo, hi, max(2, int(round((hi - lo) / resolution)) + 1))
    mu = DiscreteMeasure.uniform(start)
    rho = float("nan")
    dists = []
    converged = False
    iterations = 0
    for k in range(1, n_max + 1):
        pushed = apply_T_star(system, mu)
        rho = pushed.total_mass() / mu.total_mass()
        nxt = coarsen(pushed, resolution, anchor=lo).normalized()
        d = w1_distance(nxt, mu)
        dists.append(d)
        mu = nxt
        iterations = k
        if d <= tol:
            converged = True
            break
    return EigenMeasureResult(mu, float(rho), iterations, converged,
                              np.asarray(dists))
