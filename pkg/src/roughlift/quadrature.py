"""Time-domain quadrature oracles for nested path integrals.

These are deliberately independent of the spectral machinery: plain
cumulative rules against sampled path increments, used as the reference side
of cross-checks.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .trees import DecoratedForest


def cumulative_stieltjes(g: np.ndarray, gamma: np.ndarray, rule: str = "simpson") -> np.ndarray:
    """Cumulative integral C[j] = int_{x_0}^{x_j} g dGamma on a uniform grid.

    ``rule='trapezoid'`` is the plain product-trapezoid rule (second order);
    ``rule='simpson'`` integrates the local quadratic interpolants of both g
    and Gamma exactly over panel pairs (fourth order).
    """
    g = np.asarray(g)
    gamma = np.asarray(gamma)
    n = g.shape[0]
    if gamma.shape[0] != n:
        raise ValueError("integrand and integrator need equal lengths")
    dtype = np.result_type(g.dtype, gamma.dtype, float)
    out = np.zeros(n, dtype=dtype)
    if n < 2:
        return out
    if rule == "trapezoid":
        out[1:] = np.cumsum(0.5 * (g[:-1] + g[1:]) * np.diff(gamma))
        return out
    if rule != "simpson":
        raise ValueError(f"unknown rule {rule!r}")
    if n == 2:
        out[1] = 0.5 * (g[0] + g[1]) * (gamma[1] - gamma[0])
        return out
    npairs = (n - 1) // 2
    i0 = 2 * np.arange(npairs)
    g0, g1, g2 = g[i0], g[i0 + 1], g[i0 + 2]
    G0, G1, G2 = gamma[i0], gamma[i0 + 1], gamma[i0 + 2]
    # local quadratics on u in [-1, 1]: g = a + b u + c u^2, Gamma' = p + q u
    a, b, c = g1, (g2 - g0) / 2.0, (g2 - 2.0 * g1 + g0) / 2.0
    p, q = (G2 - G0) / 2.0, G2 - 2.0 * G1 + G0
    full = 2.0 * a * p + (2.0 / 3.0) * (b * q + c * p)
    half = a * p - a * q / 2.0 - b * p / 2.0 + b * q / 3.0 + c * p / 3.0 - c * q / 4.0
    pair_cum = np.concatenate([[0.0], np.cumsum(full)])
    out[i0 + 1] = pair_cum[:-1] + half
    out[i0 + 2] = pair_cum[1:]
    if (n - 1) % 2 == 1:
        # one trailing interval: integrate the quadratic through the last
        # three points over its second half (u in [0, 1])
        g0, g1, g2 = g[n - 3], g[n - 2], g[n - 1]
        G0, G1, G2 = gamma[n - 3], gamma[n - 2], gamma[n - 1]
        a, b, c = g1, (g2 - g0) / 2.0, (g2 - 2.0 * g1 + g0) / 2.0
        p, q = (G2 - G0) / 2.0, G2 - 2.0 * G1 + G0
        tail = a * p + a * q / 2.0 + b * p / 2.0 + b * q / 3.0 + c * p / 3.0 + c * q / 4.0
        out[n - 1] = out[n - 2] + tail
    return out


def _oriented_indices(s: int, t: int) -> np.ndarray:
    return np.arange(s, t + 1) if t >= s else np.arange(s, t - 1, -1)


def tree_integral_quad(forest: DecoratedForest,
                       vertex_samples: Mapping[int, np.ndarray],
                       s: int, t: int, rule: str = "simpson") -> float:
    """Nested tree integral over grid indices [s, t] by cumulative quadrature.

    ``vertex_samples[v]`` holds the full sample array of the channel decorating
    vertex v.  Every vertex integrates its channel from s up to its parent's
    integration variable; the root runs from s to t.  Forests multiply their
    component values.
    """
    idx = _oriented_indices(s, t)

    def component_value(comp: DecoratedForest, v: int) -> np.ndarray:
        g = np.ones(len(idx))
        for child in comp.children(v):
            g = g * component_value(comp, child)
        return cumulative_stieltjes(g, np.asarray(vertex_samples[v])[idx], rule)

    value = 1.0
    for comp in forest.components():
        value *= component_value(comp, comp.roots[0])[-1]
    return float(value)


def iterated_integral_quad(channels: Sequence[np.ndarray], s: int, t: int,
                           rule: str = "simpson") -> float:
    """Plain iterated integral of the given channel stack (outermost first)."""
    idx = _oriented_indices(s, t)
    g = np.ones(len(idx))
    for samples in reversed(channels):
        g = cumulative_stieltjes(g, np.asarray(samples)[idx], rule)
    return float(g[-1])
