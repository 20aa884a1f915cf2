"""Shared fixtures: reference systems and the brute-force word oracle."""

from itertools import product

import numpy as np
import pytest

from ifslab import IfsSystem, build_paper_example, compose_word, weight_product


@pytest.fixture(scope="session")
def binary_system():
    """Inverse branches of the doubling map, weights 1/2: rho = 1, h = 1."""
    return IfsSystem((0, 1), ["x/2", "(x + 1)/2"], ["0.5", "0.5"],
                     stretches=["0.5", "0.5"], label="doubling")


@pytest.fixture(scope="session")
def constant_system():
    """Same maps with constant weights 0.3 and 0.5: everything exact."""
    return IfsSystem((0, 1), ["x/2", "(x + 1)/2"], ["0.3", "0.5"],
                     stretches=["0.5", "0.5"], label="constant-weights")


@pytest.fixture(scope="session")
def isometry_system():
    """Identity and reflection, weights 1/2: the negative control."""
    return IfsSystem((0, 1), ["x", "1 - x"], ["0.5", "0.5"],
                     stretches=["1", "1"], label="isometry-pair")


@pytest.fixture(scope="session")
def example_spec():
    """The two-branch indifferent example with the default base potential."""
    return build_paper_example("0.5 + sqrt(x)/10", grid_n=4096)


def word_sum(system, f, n, xs):
    """Brute-force sum over all words of length n:
    sum_{|J|=n} p_{w_J}(x) f(w_J(x)), with f the same interpolant."""
    xs = np.asarray(xs, dtype=np.float64)
    total = np.zeros_like(xs)
    for word in product(range(1, system.m + 1), repeat=n):
        total += weight_product(system, word, xs) * f(compose_word(system, word, xs))
    return total


def random_linear_system(rng, m=2):
    """A random strictly-contractive linear IFS with smooth positive weights."""
    maps = []
    stretches = []
    for _ in range(m):
        a = rng.uniform(0.2, 0.6)
        b = rng.uniform(0.0, 1.0 - a)
        maps.append(f"{a!r}*x + {b!r}")
        stretches.append(repr(a))
    pots = []
    for _ in range(m):
        c = rng.uniform(0.3, 0.9)
        d = rng.uniform(-0.15, 0.15)
        e = rng.uniform(-0.1, 0.1)
        pots.append(f"{c!r} + {d!r}*x + {e!r}*x^2")
    return IfsSystem((0, 1), maps, pots, stretches=stretches)
