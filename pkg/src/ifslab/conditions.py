"""Executable sufficient conditions for the transfer-operator convergence
theorem, plus the worked two-branch example with indifferent fixed points.

The central quantity is the local stretch of a word map,

    gamma_J(x) = sup_{y != x} |w_J(x) - w_J(y)| / |x - y|,

estimated three ways: closed-form expressions supplied with the system
(exact), sampled difference quotients (lower bounds of the true sup), and
chain bounds multiplying single-letter stretches along the orbit (upper
bounds of gamma_J given exact single-letter values).  Conditions compare an
upper estimate of sum_J p_{w_J} gamma_J against the spectral radius, so a
HOLDS verdict is sound; when only sampled single-letter values exist they
are inflated by a documented safety factor and the verdict is flagged
uncertified.

Verdicts require clearance beyond the comparator's bracket width: strict
inequalities cannot be certified at machine precision without margin, so
near-equality reports INCONCLUSIVE.  A FAILS verdict uses the non-strict
boundary (a lower estimate of the left side reaching the comparator already
refutes the strict inequality).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .funcs import ExprFunc, TentFunc, BumpedComplement, as_func
from .operator import TransferOperator
from .system import IfsSystem, SystemDefinitionError, compose_word, weight_product, _pair_sup

__all__ = [
    "StretchEstimate",
    "ConditionReport",
    "DistortionReport",
    "ProbeResult",
    "ExampleSpec",
    "HOLDS",
    "FAILS",
    "INCONCLUSIVE",
    "local_stretch",
    "chain_stretch_bound",
    "main_theorem_check",
    "corollary_check",
    "depth_k_check",
    "single_branch_check",
    "distortion_audit",
    "irreducibility_probe",
    "build_paper_example",
]

HOLDS = "HOLDS"
FAILS = "FAILS"
INCONCLUSIVE = "INCONCLUSIVE"

#: multiplier applied to sampled (lower-bound) stretch values when they are
#: used where an upper bound is required; such verdicts are uncertified.
SAMPLED_INFLATION = 1.02

DEFAULT_OFFSETS = (1e-3, 1e-4, 1e-5)


@dataclass(frozen=True)
class StretchEstimate:
    """Per-grid-point stretch values for one word.

    ``method`` is one of closed-form (exact), sampled (lower bounds) or
    chain-bound (upper bounds when built from closed forms).
    """

    word: tuple
    xs: np.ndarray
    values: np.ndarray
    method: str
    certified_upper: bool

    @property
    def sup(self):
        return float(self.values.max())


@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    lhs: float
    comparator: float
    comparator_bracket: tuple
    margin: float
    width: float
    verdict: str
    certified: bool
    method_note: str
    grid_n: int


@dataclass(frozen=True)
class DistortionReport:
    word: tuple
    theta: float
    premise_ok: bool
    premise_rows: tuple      # (suffix length, distance, allowed)
    ratio: float             # p_{w_J}(x) / p_{w_J}(y); nan if premise failed
    log_modulus_sum: float
    bound: float
    holds: bool


@dataclass(frozen=True)
class ProbeResult:
    found: bool
    n: int
    value: float
    trace: np.ndarray


@dataclass(frozen=True)
class ExampleSpec:
    p1: object
    delta: float
    tent: TentFunc
    p2: object
    system: IfsSystem
    grid_n: int


def _grid(system, grid_n, hull):
    lo, hi = hull if hull is not None else (system.lo, system.hi)
    return np.linspace(lo, hi, grid_n), (lo, hi)


def _sampled_word_stretch(system, word, xs, hull, offsets=DEFAULT_OFFSETS):
    """Max difference quotient of w_J over grid pairs and an offset ladder."""
    wv = np.asarray(compose_word(system, word, xs), dtype=np.float64)
    seps = np.abs(xs[:, None] - xs[None, :])
    diffs = np.abs(wv[:, None] - wv[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = np.where(seps > 0, diffs / seps, 0.0)
    best = quot.max(axis=1)
    for d in offsets:
        for sign in (1.0, -1.0):
            ys = np.clip(xs + sign * d, hull[0], hull[1])
            sep = np.abs(ys - xs)
            ok = sep > 0
            if not ok.any():
                continue
            wy = np.asarray(compose_word(system, word, ys), dtype=np.float64)
            q = np.zeros_like(best)
            q[ok] = np.abs(wv - wy)[ok] / sep[ok]
            best = np.maximum(best, q)
    return best


class _LetterStretch:
    """Per-letter stretch provider used by chain bounds.

    Closed forms evaluate exactly anywhere; otherwise a sampled per-letter
    table is interpolated and inflated by SAMPLED_INFLATION (uncertified).
    """

    def __init__(self, system, grid_n, hull, offsets=DEFAULT_OFFSETS):
        self.system = system
        self.certified = system.stretches is not None
        if not self.certified:
            self.xs, self.hull = _grid(system, grid_n, hull)
            self.tables = [
                _sampled_word_stretch(system, (j,), self.xs, self.hull, offsets)
                for j in range(1, system.m + 1)
            ]

    def __call__(self, j, pts):
        if self.certified:
            return np.asarray(self.system.stretches[j - 1](pts), dtype=np.float64) \
                * np.ones_like(np.asarray(pts, dtype=np.float64))
        return np.interp(pts, self.xs, self.tables[j - 1]) * SAMPLED_INFLATION


def local_stretch(system, word, method="sampled", grid_n=1025, hull=None,
                  offsets=DEFAULT_OFFSETS):
    """Stretch estimate for one word on the condition grid."""
    if len(word) == 0:
        raise ValueError("word must be non-empty")
    xs, hull = _grid(system, grid_n, hull)
    if method == "closed-form":
        if system.stretches is None:
            raise ValueError("system carries no closed-form stretch functions")
        if len(word) != 1:
            raise ValueError("closed forms are per letter; use chain-bound for words")
        vals = np.asarray(system.stretches[word[0] - 1](xs), dtype=np.float64) \
            * np.ones_like(xs)
        return StretchEstimate(tuple(word), xs, vals, "closed-form", True)
    if method == "sampled":
        vals = _sampled_word_stretch(system, word, xs, hull, offsets)
        return StretchEstimate(tuple(word), xs, vals, "sampled", False)
    if method == "chain-bound":
        provider = _LetterStretch(system, grid_n, hull, offsets)
        vals = chain_stretch_bound(system, word, xs, provider=provider)
        return StretchEstimate(tuple(word), xs, vals, "chain-bound",
                               provider.certified)
    raise ValueError(f"unknown method {method!r}")


def chain_stretch_bound(system, word, x, provider=None, grid_n=1025, hull=None):
    """Upper bound for gamma_J: the product of single-letter stretches along
    the orbit of x under the successive suffix compositions."""
    if len(word) == 0:
        raise ValueError("word must be non-empty")
    if provider is None:
        provider = _LetterStretch(system, grid_n, hull)
    cur = np.asarray(x, dtype=np.float64)
    prod = np.ones_like(cur)
    for j in reversed(word):
        prod = prod * provider(j, cur)
        cur = system.maps[j - 1](cur)
    return prod


def _verdict(lhs, comparator, bracket, certified, grid_n, condition_id, note):
    """Compare lhs < comparator with bracket-width clearance.

    HOLDS needs the margin to clear the bracket width plus an absolute slack;
    FAILS uses the non-strict boundary, since lhs reaching the bracket top
    already refutes the strict inequality.
    """
    width = max(comparator - bracket[0], bracket[1] - comparator)
    slack = 1e-12 * max(1.0, abs(comparator), abs(lhs))
    margin = comparator - lhs
    if margin > width + slack:
        verdict = HOLDS
    elif margin <= -width:
        verdict = FAILS
    else:
        verdict = INCONCLUSIVE
    return ConditionReport(condition_id, float(lhs), float(comparator),
                           (float(bracket[0]), float(bracket[1])),
                           float(margin), float(width), verdict, certified,
                           note, grid_n)


def _potential_values(system, xs):
    return np.stack([np.asarray(p(xs), dtype=np.float64) * np.ones_like(xs)
                     for p in system.potentials])


def depth_k_check(system, k, spectral, grid_n=1025, hull=None,
                  word_budget=4096):
    """sup_x sum_{|J|=k} p_{w_J}(x) gamma_J(x) < rho^k, with gamma_J from
    chain bounds (upper bounds, so HOLDS is sound)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if system.m ** k > word_budget:
        raise ValueError(f"m^k = {system.m ** k} words exceed budget {word_budget}")
    xs, hull = _grid(system, grid_n, hull)
    provider = _LetterStretch(system, grid_n, hull)
    total = np.zeros_like(xs)
    for word in product(range(1, system.m + 1), repeat=k):
        cur = xs
        wgt = np.ones_like(xs)
        stretch = np.ones_like(xs)
        for j in reversed(word):
            wgt = wgt * system.potentials[j - 1](cur)
            stretch = stretch * provider(j, cur)
            cur = system.maps[j - 1](cur)
        total += wgt * stretch
    lhs = float(total.max())
    comp = spectral.rho ** k
    bracket = (spectral.bracket[0] ** k, spectral.bracket[1] ** k)
    note = ("chain bounds from closed-form stretches" if provider.certified
            else f"sampled stretches inflated by {SAMPLED_INFLATION}")
    return _verdict(lhs, comp, bracket, provider.certified, grid_n,
                    f"depth-{k}", note)


def main_theorem_check(system, spectral, grid_n=1025, hull=None,
                       variant="local"):
    """sup_x sum_j p_j(x) gamma_j(x) < rho.

    ``variant="local"`` uses the x-local stretch (the sharp form, identical
    code path to depth_k_check at k=1); ``variant="global"`` replaces each
    gamma_j(x) by its global supremum, the looser reading that fails for
    systems whose branches all have global stretch 1.
    """
    if variant == "local":
        report = depth_k_check(system, 1, spectral, grid_n=grid_n, hull=hull)
        return ConditionReport("main", report.lhs, report.comparator,
                               report.comparator_bracket, report.margin,
                               report.width, report.verdict, report.certified,
                               report.method_note, report.grid_n)
    if variant != "global":
        raise ValueError(f"unknown variant {variant!r}")
    xs, hull = _grid(system, grid_n, hull)
    provider = _LetterStretch(system, grid_n, hull)
    pv = _potential_values(system, xs)
    global_stretch = np.array([
        float(np.max(provider(j, xs))) for j in range(1, system.m + 1)
    ])
    lhs = float((pv * global_stretch[:, None]).sum(axis=0).max())
    note = ("global per-branch stretch constants"
            + ("" if provider.certified
               else f"; sampled, inflated by {SAMPLED_INFLATION}"))
    return _verdict(lhs, spectral.rho, spectral.bracket, provider.certified,
                    grid_n, "main-global", note)


def corollary_check(system, grid_n=1025, hull=None):
    """sup_x sum_j p_j(x) gamma_j(x) < min_x sum_j p_j(x).

    No spectral radius needed: the right side is its exact-on-grid lower
    bound."""
    xs, hull = _grid(system, grid_n, hull)
    provider = _LetterStretch(system, grid_n, hull)
    pv = _potential_values(system, xs)
    stretches = np.stack([provider(j, xs) for j in range(1, system.m + 1)])
    lhs = float((pv * stretches).sum(axis=0).max())
    comp = float(pv.sum(axis=0).min())
    note = ("closed-form stretches" if provider.certified
            else f"sampled stretches inflated by {SAMPLED_INFLATION}")
    return _verdict(lhs, comp, (comp, comp), provider.certified, grid_n,
                    "corollary", note)


def single_branch_check(system, grid_n=1025, hull=None):
    """sup_x min_j gamma_j(x) < 1: somewhere-contracting branch condition."""
    xs, hull = _grid(system, grid_n, hull)
    provider = _LetterStretch(system, grid_n, hull)
    stretches = np.stack([provider(j, xs) for j in range(1, system.m + 1)])
    lhs = float(stretches.min(axis=0).max())
    note = ("closed-form stretches" if provider.certified
            else f"sampled stretches inflated by {SAMPLED_INFLATION}")
    return _verdict(lhs, 1.0, (1.0, 1.0), provider.certified, grid_n,
                    "single-branch-r", note)


def distortion_audit(system, word, x, y, theta, depth=40, n_coarse=96):
    """Check the weight-distortion inequality along a shadowing word.

    Premise (verified, not assumed): the suffix compositions keep x and y
    within theta^t * diam(X) of each other for every proper suffix length t.
    Conclusion: p_{w_J}(x) <= e^a p_{w_J}(y) with a the geometric-scale sum
    of the largest log-potential modulus.
    """
    if not 0 < theta < 1:
        raise ValueError("theta must be in (0, 1)")
    n = len(word)
    if n == 0:
        raise ValueError("word must be non-empty")
    a_diam = system.diameter
    cx, cy = float(x), float(y)
    rows = []
    premise_ok = True
    for t, j in enumerate(reversed(word), start=1):
        cx = float(system.maps[j - 1](cx))
        cy = float(system.maps[j - 1](cy))
        if t <= n - 1:
            allowed = theta ** t * a_diam
            d = abs(cx - cy)
            rows.append((t, d, allowed))
            if d > allowed:
                premise_ok = False

    log_pots = [
        (lambda xs, p=p: np.log(np.asarray(p(xs), dtype=np.float64)))
        for p in system.potentials
    ]
    a_hat = 0.0
    for k in range(depth):
        scale = a_diam * theta ** k
        a_hat += max(_pair_sup(lp, system.lo, system.hi, scale, n_coarse)
                     for lp in log_pots)
    bound = math.exp(a_hat)

    if not premise_ok:
        return DistortionReport(tuple(word), float(theta), False, tuple(rows),
                                float("nan"), a_hat, bound, False)
    ratio = weight_product(system, word, float(x)) / weight_product(system, word, float(y))
    holds = ratio <= bound * (1 + 1e-9)
    return DistortionReport(tuple(word), float(theta), True, tuple(rows),
                            float(ratio), a_hat, bound, holds)


def irreducibility_probe(system, f, x, n_max, tol=1e-14):
    """Smallest n <= n_max with T^n f(x) above tolerance, for f >= 0.

    Not finding one is a diagnostic outcome (``found=False``), expected e.g.
    when the orbit of x never meets the support of f.
    """
    if np.any(f.values < 0) or not np.any(f.values > 0):
        raise ValueError("f must be nonnegative and not identically zero")
    op = TransferOperator(system, (f.lo, f.hi), f.n)
    if not f.lo <= x <= f.hi:
        raise ValueError(f"x={x} outside hull [{f.lo}, {f.hi}]")
    vals = f.values.copy()
    trace = np.empty(n_max)
    for n in range(1, n_max + 1):
        vals = op.apply_values(vals)
        v = float(np.interp(x, op.nodes, vals))
        trace[n - 1] = v
        if v > tol:
            return ProbeResult(True, n, v, trace[:n].copy())
    return ProbeResult(False, n_max, float(trace[-1]) if n_max else 0.0, trace)


def build_paper_example(p1="0.5 + sqrt(x)/10", grid_n=4096):
    """Assemble the two-branch system with indifferent fixed points at 0 and 1.

    w_1(x) = x - x^2/2 and w_2(x) = 1/2 + x^2/2 on [0, 1], with closed-form
    stretches 1 - x/2 and (1 + x)/2.  From a base potential p_1 with values
    in (0, 1), the bump height is delta = min(p_1, 1 - p_1)/5 on the grid,
    and p_2 = 1 - p_1 + tent.  The construction validates that the bump
    stays below a quarter of each potential on the grid; a violation would
    indicate a bug, since it holds for every admissible p_1.
    """
    p1f = as_func(p1)
    xs = np.linspace(0.0, 1.0, grid_n)
    v1 = np.asarray(p1f(xs), dtype=np.float64) * np.ones_like(xs)
    if v1.min() <= 0.0 or v1.max() >= 1.0:
        raise SystemDefinitionError(
            f"p1 must take values strictly inside (0, 1) on the grid; "
            f"sampled range [{v1.min()}, {v1.max()}]")
    delta = 0.2 * float(np.minimum(v1, 1.0 - v1).min())
    tent = TentFunc(delta)
    p2f = BumpedComplement(p1f, tent)
    v2 = np.asarray(p2f(xs), dtype=np.float64)
    if v2.min() <= 0.0:
        raise SystemDefinitionError("derived p2 is not strictly positive on the grid")
    g = np.asarray(tent(xs), dtype=np.float64)
    if not (np.all(g - 0.25 * v1 < 0) and np.all(g - 0.25 * v2 < 0)):
        raise SystemDefinitionError(
            "bump dominates a quarter of a potential; construction is broken")
    sys_ = IfsSystem(
        (0.0, 1.0),
        [ExprFunc("x - x^2/2"), ExprFunc("0.5 + x^2/2")],
        [p1f, p2f],
        stretches=[ExprFunc("1 - x/2"), ExprFunc("(1 + x)/2")],
        label="two-branch-indifferent",
    )
    return ExampleSpec(p1f, delta, tent, p2f, sys_, grid_n)
