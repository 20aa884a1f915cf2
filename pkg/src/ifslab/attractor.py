"""Construction of the invariant set and its grid approximation.

The invariant set K of a nonexpansive IFS with at least one weakly
contractive branch is approximated by the depth-n images of a coarse seed
grid, deduplicated onto cells of a fixed resolution.  The cell frame is
anchored at the ambient interval's left end, so point sets produced at the
same resolution are directly comparable (invariance gap, orbit coverage).

When no branch is weakly contractive the smallest invariant set need not be
unique; construction still proceeds but the mesh is flagged as not
certified minimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .system import SystemDefinitionError

__all__ = [
    "AttractorMesh",
    "dedup_points",
    "build_attractor",
    "invariance_gap",
    "orbit_density_probe",
]

WORD_IMAGES = "word-images"
CHAOS_GAME = "chaos-game"


@dataclass(frozen=True)
class AttractorMesh:
    """Finite approximation of the invariant set at a stated resolution."""

    points: np.ndarray          # sorted cell midpoints of occupied cells
    hull: tuple                 # span of the raw (pre-dedup) image points
    resolution: float
    depth: int
    anchor: float               # cell frame origin (ambient lo)
    n_cells: int
    method: str                 # word-images | chaos-game
    minimal_certified: bool     # some branch audited weakly contractive

    @property
    def size(self):
        return self.points.size

    def cells(self):
        return _cell_index(self.points, self.anchor, self.resolution, self.n_cells)


def _cell_index(x, anchor, r, n_cells):
    k = np.floor((np.asarray(x, dtype=np.float64) - anchor) / r).astype(np.int64)
    return np.clip(k, 0, n_cells - 1)


def _frame(system, resolution):
    n_cells = max(1, int(math.ceil(system.diameter / resolution - 1e-12)))
    return system.lo, n_cells


def dedup_points(points, anchor, resolution, n_cells):
    """Snap points to width-r cells and keep one midpoint per occupied cell.

    Deterministic and independent of input order; idempotent because a cell
    midpoint snaps back to its own cell.
    """
    cells = np.unique(_cell_index(points, anchor, resolution, n_cells))
    return anchor + (cells + 0.5) * resolution


def _enumerate_images(system, depth, seeds):
    arr = seeds
    for _ in range(depth):
        arr = np.concatenate([w(arr) for w in system.maps])
    return arr


def _chaos_orbit(system, x0, n_chains, n_steps, burn_in, seed):
    rng = np.random.default_rng(seed)
    xs = np.full(n_chains, float(x0))
    kept = []
    for step in range(burn_in + n_steps):
        js = rng.integers(0, system.m, size=n_chains)
        nxt = np.empty_like(xs)
        for j, w in enumerate(system.maps):
            mask = js == j
            if mask.any():
                nxt[mask] = w(xs[mask])
        xs = nxt
        if step >= burn_in:
            kept.append(xs.copy())
    return np.concatenate(kept)


def build_attractor(system, depth=12, resolution=None, seeds=33,
                    budget=4_000_000, seed=0):
    """Approximate K by depth-n word images of a seed grid, deduplicated.

    If the full enumeration (m^depth * seeds points) exceeds ``budget`` the
    construction falls back to a seeded chaos game (10^6 samples after a
    burn-in of 10^3 per chain) and reports the fallback in ``method``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if resolution is None:
        resolution = system.diameter / 1024
    if not 0 < resolution <= system.diameter:
        raise ValueError(f"resolution must be in (0, diameter], got {resolution}")
    if not system.all_nonexpansive():
        raise SystemDefinitionError(
            "attractor construction requires all maps audited nonexpansive")
    minimal_certified = bool(system.weakly_contractive_letters())

    anchor, n_cells = _frame(system, resolution)
    try:
        n_raw = system.m ** depth * seeds
    except OverflowError:
        n_raw = budget + 1
    if n_raw <= budget:
        raw = _enumerate_images(system, depth, np.linspace(system.lo, system.hi, seeds))
        method = WORD_IMAGES
    else:
        n_chains = 1000
        raw = _chaos_orbit(system, 0.5 * (system.lo + system.hi),
                           n_chains=n_chains, n_steps=1000, burn_in=1000, seed=seed)
        method = CHAOS_GAME
    hull = (float(raw.min()), float(raw.max()))
    points = dedup_points(raw, anchor, resolution, n_cells)
    return AttractorMesh(points, hull, float(resolution), depth, anchor,
                         n_cells, method, minimal_certified)


def _directed_dist(a, b):
    """max over a of the distance to the nearest point of sorted b."""
    idx = np.searchsorted(b, a)
    left = b[np.clip(idx - 1, 0, b.size - 1)]
    right = b[np.clip(idx, 0, b.size - 1)]
    return float(np.minimum(np.abs(a - left), np.abs(a - right)).max())


def hausdorff_distance(a, b):
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty point set")
    return max(_directed_dist(a, b), _directed_dist(b, a))


def invariance_gap(system, mesh):
    """Symmetric Hausdorff distance between the mesh and its one-step image.

    The image set union_j w_j(mesh) is deduplicated in the same cell frame
    before comparing, so a mesh equal to its image at resolution r reports 0.
    """
    if mesh.size == 0:
        raise ValueError("empty mesh")
    imgs = np.concatenate([w(mesh.points) for w in system.maps])
    imgs = dedup_points(imgs, mesh.anchor, mesh.resolution, mesh.n_cells)
    return hausdorff_distance(mesh.points, imgs)


def orbit_density_probe(system, x, depth, mesh, budget=4_000_000, seed=0):
    """Fraction of mesh cells visited by {w_J(x) : |J| <= depth}.

    Falls back to seeded random words when the full enumeration exceeds the
    budget.  Density of the orbit in K drives this toward 1 as depth grows.
    """
    pad = mesh.resolution  # mesh midpoints may sit up to r/2 beyond the raw hull
    if not mesh.hull[0] - pad <= x <= mesh.hull[1] + pad:
        raise ValueError(f"x={x} outside mesh hull {mesh.hull}")
    total = 0
    full = True
    count = 1
    for _ in range(depth):
        count *= system.m
        total += count
        if total > budget:
            full = False
            break

    if full:
        pts = [np.array([float(x)])]
        frontier = pts[0]
        for _ in range(depth):
            frontier = np.concatenate([w(frontier) for w in system.maps])
            pts.append(frontier)
        orbit = np.concatenate(pts)
    else:
        n_chains = max(1, min(4096, budget // max(depth, 1)))
        orbit = _chaos_orbit(system, x, n_chains=n_chains, n_steps=depth,
                             burn_in=0, seed=seed)
        orbit = np.concatenate([np.array([float(x)]), orbit])

    occupied = np.unique(mesh.cells())
    hit = np.unique(_cell_index(orbit, mesh.anchor, mesh.resolution, mesh.n_cells))
    covered = np.intersect1d(hit, occupied, assume_unique=True).size
    return covered / occupied.size
