"""Permutation graphs: signed forests encoding reordered iterated integrals.

Reordering the n nested integrations of a trunk-tree integral so the
variables appear in a prescribed order, then splitting every two-sided bound
into differences of one-sided ones, rewrites the integral as a signed sum of
tree integrals.  Each resulting forest keeps its vertices named 1..n in the
new integration order (the natural order, compatible with the tree order by
construction); vertex m is decorated by the channel of the original slot
sigma(m).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .quadrature import iterated_integral_quad, tree_integral_quad
from .trees import DecoratedForest, TotalOrder, TreeError, natural_order


@dataclass(frozen=True)
class IntegrationState:
    """Upper bounds after splitting: tau[j] is 0 for t or the position whose
    variable bounds position j+1 from above.  tau[0] is always 0 (= t)."""

    tau: tuple[int, ...]

    def __post_init__(self):
        if self.tau and self.tau[0] != 0:
            raise TreeError("outermost variable must run up to t")


@dataclass(frozen=True)
class PermTerm:
    sign: int
    forest: DecoratedForest
    state: IntegrationState

    def order(self) -> TotalOrder:
        return natural_order(self.forest)


@dataclass(frozen=True)
class SignedOrderedForestSum:
    """The permutation graph: a signed sum of totally ordered forests.

    ``slot_of_vertex[m-1]`` is the original integration slot sigma(m) held by
    vertex m, the explicit form of the variable/vertex renaming.
    """

    n: int
    sigma: tuple[int, ...]
    terms: tuple[PermTerm, ...]

    @property
    def slot_of_vertex(self) -> tuple[int, ...]:
        return self.sigma

    def as_hopf(self):
        from .hopf import HopfVector
        out = HopfVector.zero()
        for term in self.terms:
            out = out + HopfVector.of(term.forest, term.sign)
        return out


def _check_permutation(n: int, sigma: Sequence[int]) -> tuple[int, ...]:
    sig = tuple(int(x) for x in sigma)
    if sorted(sig) != list(range(1, n + 1)):
        raise TreeError(f"{sigma!r} is not a permutation of 1..{n}")
    return sig


def permutation_graph(n: int, sigma: Sequence[int], decoration: Sequence[int],
                      expand_order: str = "upper-first") -> SignedOrderedForestSum:
    """Construct the signed forest sum for one permutation.

    ``decoration[i-1]`` is the channel of original slot i; vertex m of every
    term is decorated ``decoration[sigma(m)-1]``.  ``expand_order`` only
    affects the order in which split branches are emitted, not the resulting
    sum (asserted in tests via canonical forms).
    """
    if n < 1:
        raise TreeError("need at least one integration variable")
    if len(decoration) != n:
        raise TreeError("need one channel per slot")
    sig = _check_permutation(n, sigma)
    position_of = {idx: j for j, idx in enumerate(sig, start=1)}

    # per position: list of (sign, tau) choices; tau = 0 means t
    options: list[list[tuple[int, int]]] = []
    for j in range(1, n + 1):
        idx = sig[j - 1]
        fixed = set(sig[: j - 1])
        below = [i for i in fixed if i < idx]
        above = [i for i in fixed if i > idx]
        upper = position_of[max(below)] if below else 0
        choices = [(1, upper)]
        if above:
            lower = position_of[min(above)]
            choices.append((-1, lower))
        if expand_order == "lower-first":
            choices = choices[::-1]
        elif expand_order != "upper-first":
            raise TreeError(f"unknown expand_order {expand_order!r}")
        options.append(choices)

    labels = {m: decoration[sig[m - 1] - 1] for m in range(1, n + 1)}
    terms = []
    for combo in itertools.product(*options):
        sign = 1
        tau = []
        for s, bound in combo:
            sign *= s
            tau.append(bound)
        parent = {j: tau[j - 1] for j in range(2, n + 1) if tau[j - 1] != 0}
        forest = DecoratedForest(range(1, n + 1), parent, labels)
        terms.append(PermTerm(sign, forest, IntegrationState(tuple(tau))))
    return SignedOrderedForestSum(n=n, sigma=sig, terms=tuple(terms))


def verify_fubini(channels: Sequence[np.ndarray], n: int, sigma: Sequence[int],
                  decoration: Sequence[int], s: int, t: int,
                  rule: str = "simpson") -> float:
    """Residual of the reordering identity, by nested quadrature on both sides.

    Left side: the plain iterated integral of the decorated slots.  Right
    side: the signed sum of tree integrals of the permutation graph.  Returns
    |difference| / (1 + |left side|); channels are sample arrays and s, t
    grid indices.
    """
    graph = permutation_graph(n, sigma, decoration)
    lhs = iterated_integral_quad([channels[decoration[i] - 1] for i in range(n)],
                                 s, t, rule=rule)
    rhs = 0.0
    for term in graph.terms:
        samples: Mapping[int, np.ndarray] = {
            m: channels[term.forest.label(m) - 1] for m in term.forest.vertices}
        rhs += term.sign * tree_integral_quad(term.forest, samples, s, t, rule=rule)
    return abs(lhs - rhs) / (1.0 + abs(lhs))
