"""Iterated function systems with positive potentials.

An :class:`IfsSystem` bundles a closed interval X = [lo, hi], maps
w_1..w_m of X into itself, strictly positive potentials p_1..p_m, and
optionally closed-form local stretch factors for the maps.  Words over the
alphabet {1..m} select compositions and weight products; sampled moduli of
continuity classify maps as nonexpansive or weakly contractive and decide
whether a potential is Dini (its modulus sums along geometric scales).

All sampled suprema are lower bounds of the true suprema; reports carry a
``sampled`` flag to say so.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .funcs import as_func

__all__ = [
    "SystemDefinitionError",
    "LetterRangeError",
    "IfsSystem",
    "ModulusTable",
    "DiniReport",
    "compose_word",
    "weight_product",
    "modulus_audit",
    "dini_sum",
    "default_scale_grid",
]


class SystemDefinitionError(ValueError):
    """The system violates a construction invariant (range or positivity)."""


class LetterRangeError(ValueError):
    """A word contains a letter outside 1..m."""


NONEXPANSIVE = "nonexpansive"
WEAKLY_CONTRACTIVE = "weakly-contractive"
NEITHER = "neither"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ModulusTable:
    """Sampled modulus of continuity on a decreasing grid of scales.

    ``values[i]`` is the largest |w(x) - w(y)| found over sampled pairs with
    |x - y| <= scales[i]; a lower bound of the true supremum.
    """

    scales: np.ndarray
    values: np.ndarray
    classification: str
    samples_used: int
    sampled: bool = True

    def is_nonexpansive(self):
        return self.classification in (NONEXPANSIVE, WEAKLY_CONTRACTIVE)

    def is_weakly_contractive(self):
        return self.classification == WEAKLY_CONTRACTIVE


@dataclass(frozen=True)
class DiniReport:
    """Partial sums of a potential's modulus along geometric scales."""

    label: str
    theta: float
    diameter: float
    terms: np.ndarray
    partial_sums: np.ndarray
    last_term: float
    verdict: str  # "converged" | "inconclusive"

    @property
    def total(self):
        return float(self.partial_sums[-1])


class IfsSystem:
    """An IFS with potentials on a closed interval.

    Construction audits, on a sample grid, that every map sends X into X and
    that every potential is strictly positive; violations raise
    :class:`SystemDefinitionError`.  Instances are immutable by convention
    and safe to share; all operations on them are pure.
    """

    def __init__(self, interval, maps, potentials, stretches=None, label="",
                 audit_points=257, range_tol=1e-9):
        lo, hi = float(interval[0]), float(interval[1])
        if not lo < hi:
            raise SystemDefinitionError(f"empty interval [{lo}, {hi}]")
        if len(maps) < 1:
            raise SystemDefinitionError("need at least one map")
        if len(potentials) != len(maps):
            raise SystemDefinitionError(
                f"{len(maps)} maps but {len(potentials)} potentials")
        if stretches is not None and len(stretches) != len(maps):
            raise SystemDefinitionError(
                f"{len(maps)} maps but {len(stretches)} stretch functions")
        self.lo = lo
        self.hi = hi
        self.maps = tuple(as_func(w) for w in maps)
        self.potentials = tuple(as_func(p) for p in potentials)
        self.stretches = None if stretches is None else tuple(as_func(g) for g in stretches)
        self.label = label
        self._moduli = None

        xs = np.linspace(lo, hi, audit_points)
        tol = range_tol * (hi - lo)
        for j, w in enumerate(self.maps, start=1):
            img = np.asarray(w(xs), dtype=np.float64)
            if img.min() < lo - tol or img.max() > hi + tol:
                raise SystemDefinitionError(
                    f"map {j} leaves X on the audit grid: "
                    f"image span [{img.min()}, {img.max()}] vs [{lo}, {hi}]")
        for j, p in enumerate(self.potentials, start=1):
            vals = np.asarray(p(xs), dtype=np.float64)
            if vals.min() <= 0:
                raise SystemDefinitionError(
                    f"potential {j} is not strictly positive on the audit grid "
                    f"(min sampled value {vals.min()})")

    @property
    def m(self):
        return len(self.maps)

    @property
    def interval(self):
        return (self.lo, self.hi)

    @property
    def diameter(self):
        return self.hi - self.lo

    def audit_moduli(self, scales=None, budget=6000):
        """Sampled modulus tables for all maps (cached on first call)."""
        if self._moduli is None or scales is not None:
            tables = tuple(
                modulus_audit(w, self.lo, self.hi, scales=scales, budget=budget)
                for w in self.maps
            )
            if scales is not None:
                return tables
            self._moduli = tables
        return self._moduli

    def weakly_contractive_letters(self):
        return [j for j, t in enumerate(self.audit_moduli(), start=1)
                if t.is_weakly_contractive()]

    def all_nonexpansive(self):
        return all(t.is_nonexpansive() for t in self.audit_moduli())

    def __repr__(self):
        names = ", ".join(getattr(w, "source", repr(w)) for w in self.maps)
        return f"IfsSystem([{self.lo}, {self.hi}]; {names})"


def _check_word(system, word):
    for j in word:
        if not 1 <= j <= system.m:
            raise LetterRangeError(f"letter {j} outside 1..{system.m}")


def compose_word(system, word, x):
    """w_J(x) for J = (j_1 ... j_n): w_{j_1}(w_{j_2}(... w_{j_n}(x)))).

    The empty word is the identity.  ``x`` may be a scalar or an array.
    """
    _check_word(system, word)
    cur = x
    for j in reversed(word):
        cur = system.maps[j - 1](cur)
    return cur


def weight_product(system, word, x):
    """The weight of the word map at x:

        p_{j_1}(w_{j_2} o ... o w_{j_n}(x)) ... p_{j_{n-1}}(w_{j_n}(x)) p_{j_n}(x)

    The empty word gives 1.
    """
    _check_word(system, word)
    acc = np.ones_like(np.asarray(x, dtype=np.float64)) if np.ndim(x) else 1.0
    cur = x
    for j in reversed(word):
        acc = acc * system.potentials[j - 1](cur)
        cur = system.maps[j - 1](cur)
    return acc


def default_scale_grid(diameter, n=12):
    """Decreasing geometric scales diameter * 2^-k, k = 0..n-1."""
    return diameter * 0.5 ** np.arange(n)


def _pair_sup(func, lo, hi, t, n_coarse, refine=10):
    """Largest |func(x+s) - func(x)| over sampled pairs with s <= t.

    Deterministic stratified sampling: an s-ladder below t, a uniform x grid
    for each s, then a 10x finer sweep around the coarse maximizer.
    """
    best = 0.0
    for s in (t, 0.5 * t, 0.25 * t):
        span = hi - lo - s
        if span < 0 or s <= 0:
            continue
        n = max(2, n_coarse)
        xs = np.linspace(lo, lo + span, n)
        diffs = np.abs(np.asarray(func(xs + s)) - np.asarray(func(xs)))
        i = int(np.argmax(diffs))
        if diffs[i] > best:
            best = float(diffs[i])
        step = span / (n - 1)
        if step > 0:
            xr = np.linspace(max(lo, xs[i] - step), min(lo + span, xs[i] + step),
                             2 * refine + 1)
            diffs_r = np.abs(np.asarray(func(xr + s)) - np.asarray(func(xr)))
            best = max(best, float(diffs_r.max()))
    return best


def modulus_audit(func, lo, hi, scales=None, budget=6000,
                  nonexp_tol=1e-9, contract_margin=1e-5):
    """Sample the modulus of continuity of ``func`` on [lo, hi].

    Classification:
      * ``neither`` if some sampled value exceeds t(1 + nonexp_tol) (the
        sampled value is a lower bound, so this is conclusive);
      * ``weakly-contractive`` if every value stays below t(1 - contract_margin);
      * ``nonexpansive`` otherwise;
      * ``inconclusive`` when the budget is too small to say anything.
    """
    diameter = hi - lo
    if scales is None:
        scales = default_scale_grid(diameter)
    scales = np.sort(np.asarray(scales, dtype=np.float64))
    if scales.size == 0:
        raise ValueError("empty scale grid")
    if scales[0] <= 0 or scales[-1] > diameter * (1 + 1e-12):
        raise ValueError("scales must lie in (0, diameter]")

    n_coarse = max(8, budget // (scales.size * 3 * 2))
    values = np.array([_pair_sup(func, lo, hi, t, n_coarse) for t in scales])
    values = np.maximum.accumulate(values)  # any pair at distance s <= t counts for t
    samples = int(scales.size * 3 * (n_coarse + 21))

    if samples < 100:
        tag = INCONCLUSIVE
    elif np.any(values > scales * (1 + nonexp_tol)):
        tag = NEITHER
    elif np.all(values <= scales * (1 - contract_margin)):
        tag = WEAKLY_CONTRACTIVE
    else:
        tag = NONEXPANSIVE
    # report scales in decreasing order, values aligned
    return ModulusTable(scales[::-1].copy(), values[::-1].copy(), tag, samples)


def dini_sum(func, lo, hi, theta=0.5, depth=40, tol=1e-10, label="",
             n_coarse=96):
    """Partial sums of the sampled modulus of ``func`` at scales theta^n * a.

    ``a`` is the diameter of [lo, hi].  The verdict is ``converged`` only if
    the last ten sampled terms are each below ``tol``.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must be in (0, 1), got {theta}")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    a = hi - lo
    terms = np.array([
        _pair_sup(func, lo, hi, a * theta ** n, n_coarse) for n in range(depth)
    ])
    partial = np.cumsum(terms)
    tail = terms[-min(10, depth):]
    verdict = "converged" if np.all(tail < tol) else "inconclusive"
    return DiniReport(label, float(theta), float(a), terms, partial,
                      float(terms[-1]), verdict)
