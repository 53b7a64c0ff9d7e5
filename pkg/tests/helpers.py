"""Shared test fixtures: forest enumeration and smooth sample paths."""

import itertools
import random
from fractions import Fraction

import numpy as np

from roughlift.hopf import Character
from roughlift.trees import DecoratedForest


def all_forests(n, distinct_labels=True):
    """Every decorated forest on n vertices (parent < child parent maps,
    vertex j decorated j), deduplicated by canonical form.  With distinct
    labels this enumerates exactly the order-compatible bijectively decorated
    forests on n vertices.
    """
    seen = {}
    choices = [range(0, j + 1) for j in range(1, n)]
    for combo in itertools.product(*choices):
        parent = {j + 2: p for j, p in enumerate(combo) if p != 0}
        labels = {v: v if distinct_labels else 1 for v in range(1, n + 1)}
        f = DecoratedForest(range(1, n + 1), parent, labels)
        seen.setdefault(f.canonical_key(), f)
    return list(seen.values())


def forests_up_to(n, **kw):
    out = []
    for m in range(1, n + 1):
        out.extend(all_forests(m, **kw))
    return out


def cherry():
    return DecoratedForest([1, 2, 3], {2: 1, 3: 1}, {1: 1, 2: 2, 3: 3})


def random_rational_character(seed):
    """A character with independent random rational values per decorated tree."""
    rng = random.Random(seed)
    memo = {}

    def tree_value(tree):
        key = tree.canonical_key()
        if key not in memo:
            memo[key] = Fraction(rng.randint(1, 30), rng.randint(1, 30))
        return memo[key]

    return Character(tree_value)


def trig_channels(n_channels, m_points, length=2.0 * np.pi):
    """Smooth trigonometric channels sin((i+1)x) on a closed uniform grid."""
    x = np.linspace(0.0, length, m_points + 1)
    return x, [np.sin((i + 1) * x) for i in range(n_channels)]
