"""Assembly and verification of the regularized rough path.

Each level-n tensor entry is the permutation sum of signed regularized tree
integrals of the permutation-graph forests, each summed over order-monotone
block tuples of the channel bands.  Levels are tabulated on all ordered
pairs of a coarse time grid placed inside the window plateau.
"""

from __future__ import annotations

import itertools
import math
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .besov import (BandDecomposition, SampledPath, make_partition,
                    plateau_slice)
from .hopf import shuffle_product
from .permgraph import permutation_graph
from .quadrature import iterated_integral_quad
from .regularize import (RegScheme, SchemeError, SkeletonEngine,
                         enumerate_tuples, forest_integral_outer_terms,
                         tie_weight)
from .trees import natural_order

Word = tuple[int, ...]


class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class LiftConfig:
    """Configuration of one lift run.

    ``levels`` defaults to floor(1/alpha); an integer 1/alpha is rejected
    unless ``allow_integer_inv_alpha`` nudges alpha down by 1e-3 (recorded in
    the lift metadata).
    """

    alpha: float
    levels: int | None = None
    k_max: int = 10
    coarse_points: int = 33
    scheme: str = "regularized"
    tie_weights: bool = True
    partition: str = "sharp"
    channels: tuple[int, ...] | None = None
    window_margin: float = 0.25
    coarse_step: int | None = None
    allow_integer_inv_alpha: bool = False
    threads: int = 1

    def resolve_alpha(self) -> tuple[float, bool]:
        if not 0.0 < self.alpha < 1.0:
            raise LiftError("alpha must lie in (0, 1)")
        inv = 1.0 / self.alpha
        if abs(inv - round(inv)) < 1e-9:
            if not self.allow_integer_inv_alpha:
                raise LiftError(
                    f"1/alpha = {inv:.6f} is an integer; pass "
                    "allow_integer_inv_alpha to nudge alpha down by 1e-3")
            return self.alpha - 1e-3, True
        return self.alpha, False

    def n_levels(self) -> int:
        alpha, _ = self.resolve_alpha()
        cap = int(math.floor(1.0 / alpha))
        if self.levels is None:
            return cap
        if self.levels < 1 or self.levels > cap:
            raise LiftError(f"levels must lie in 1..{cap} for alpha={alpha}")
        return self.levels


@dataclass
class RoughPath:
    """Levels 1..N of the lift on a coarse grid: word -> all-pairs matrix,
    entry [i, j] covering the pair (t = times[i], s = times[j])."""

    alpha: float
    n_levels: int
    channels: int
    times: np.ndarray
    indices: np.ndarray
    levels: dict[int, dict[Word, np.ndarray]]
    meta: dict = field(default_factory=dict)

    def words(self, n: int) -> list[Word]:
        return sorted(self.levels[n])

    def max_magnitude(self) -> float:
        out = 0.0
        for level in self.levels.values():
            for mat in level.values():
                out = max(out, float(np.max(np.abs(mat))))
        return out


def coarse_indices(m: int, margin: float, count: int,
                   step: int | None = None) -> np.ndarray:
    """Evenly spaced fine-grid indices inside the window plateau.

    Without an explicit ``step`` the grid spans the plateau.  Scaling-exponent
    fits want a small step instead, so the dyadic gap ladder stays well below
    the path's outermost oscillation scale.
    """
    lo, hi = plateau_slice(m, margin)
    if hi - lo < count:
        raise LiftError("fine grid too small for the requested coarse grid")
    if step is None:
        step = (hi - 1 - lo) // (count - 1)
    if step < 1 or lo + step * (count - 1) >= hi:
        raise LiftError("coarse grid does not fit inside the window plateau")
    return lo + step * np.arange(count)


def lift(path: SampledPath, cfg: LiftConfig) -> RoughPath:
    """Assemble the rough path over a windowed sampled path."""
    if not path.windowed:
        raise LiftError("lift expects a windowed path (see besov.window_path)")
    alpha, nudged = cfg.resolve_alpha()
    n_levels = cfg.n_levels()
    channels = cfg.channels or tuple(range(1, path.d + 1))
    if any(not 1 <= c <= path.d for c in channels):
        raise LiftError(f"channel subset {channels} outside 1..{path.d}")
    t0 = _time.time()
    partition = make_partition(cfg.partition, cfg.k_max)
    bands = BandDecomposition(path, partition)
    scheme = RegScheme(kind=cfg.scheme, k_max=cfg.k_max,
                       tie_weights=cfg.tie_weights, partition=cfg.partition)
    idx = coarse_indices(path.m, cfg.window_margin, cfg.coarse_points,
                         step=cfg.coarse_step)
    times = path.times[idx]
    g = len(idx)

    shared_engine = SkeletonEngine(bands, scheme, coarse_idx=idx)

    def word_items(word: Word):
        n = len(word)
        items = []
        for sigma in itertools.permutations(range(1, n + 1)):
            graph = permutation_graph(n, sigma, list(word))
            for term in graph.terms:
                items.append((term.sign, term.forest))
        return items

    chunk_cols = 4096

    def eval_item(args):
        sign, forest, engine = args
        order = natural_order(forest)
        ranked = order.sorted_vertices()
        total = np.zeros((g, g), dtype=complex)
        increment = np.zeros(g, dtype=complex)
        top_shell = 0.0
        u_cols: list[np.ndarray] = []
        v_rows: list[np.ndarray] = []

        def flush():
            nonlocal total
            if u_cols:
                total += np.asarray(u_cols).T @ np.asarray(v_rows)
                u_cols.clear()
                v_rows.clear()

        for blocks in enumerate_tuples(forest, order, scheme, filtered=False):
            w = tie_weight([blocks[v] for v in ranked]) if scheme.tie_weights else 1.0
            coeff = sign * w
            shell_tuple = max(abs(blocks[v]) for v in ranked) >= cfg.k_max - 1
            for u, v in forest_integral_outer_terms(forest, order, blocks, engine):
                u_cols.append(coeff * u)
                v_rows.append(v)
                if shell_tuple:
                    top_shell = max(top_shell,
                                    w * float(np.max(np.abs(u)) * np.max(np.abs(v))))
                if len(u_cols) >= chunk_cols:
                    flush()
            sk = engine.forest_samples(forest, order, blocks)
            if sk is not None:
                increment += coeff * sk
        flush()
        return total, increment, top_shell

    levels: dict[int, dict[Word, np.ndarray]] = {}
    inc_parts: dict[int, dict[Word, np.ndarray]] = {}
    imag_max = 0.0
    top_shell_report: dict[int, float] = {}
    for n in range(1, n_levels + 1):
        level: dict[Word, np.ndarray] = {}
        incs: dict[Word, np.ndarray] = {}
        shell = 0.0
        for word in itertools.product(channels, repeat=n):
            items = word_items(word)
            if cfg.threads > 1:
                with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                    results = list(pool.map(
                        eval_item,
                        [(s, f, SkeletonEngine(bands, scheme, coarse_idx=idx))
                         for s, f in items]))
            else:
                results = [eval_item((s, f, shared_engine)) for s, f in items]
            acc = np.zeros((g, g), dtype=complex)
            inc = np.zeros(g, dtype=complex)
            for total, increment, ts in results:
                acc += total
                inc += increment
                shell = max(shell, ts)
            imag_max = max(imag_max, float(np.max(np.abs(acc.imag))))
            level[word] = acc.real.copy()
            incs[word] = inc
        levels[n] = level
        inc_parts[n] = incs
        top_shell_report[n] = shell
    meta = {
        "scheme": cfg.scheme,
        "partition": cfg.partition,
        "k_max": cfg.k_max,
        "tie_weights": cfg.tie_weights,
        "window_margin": cfg.window_margin,
        "alpha_nudged": nudged,
        "band_tail_energy": bands.tail_energy,
        "imag_max": imag_max,
        "top_shell_contribution": top_shell_report,
        "lift_seconds": _time.time() - t0,
    }
    rp = RoughPath(alpha=alpha, n_levels=n_levels, channels=len(channels),
                   times=np.asarray(times, dtype=float), indices=idx,
                   levels=levels, meta=meta)
    rp.meta["increment_parts"] = {
        n: {w: v.copy() for w, v in incs.items()} for n, incs in inc_parts.items()}
    return rp


# -- canonical lift oracle ---------------------------------------------------------

def canonical_lift(path: SampledPath, word: Sequence[int], s: int, t: int,
                   rule: str = "simpson") -> float:
    """Nested-quadrature iterated integral of the sampled path (the oracle
    side of the smooth-path equivalence checks)."""
    chans = [path.channels[c - 1] for c in word]
    return iterated_integral_quad(chans, s, t, rule=rule)


# -- verification -------------------------------------------------------------------

def chen_defect(rp: RoughPath) -> float:
    """Largest multiplicativity residual over all words and coarse triples,
    relative to (1 + the largest level magnitude)."""
    scale = 1.0 + rp.max_magnitude()
    worst = 0.0
    for n in range(1, rp.n_levels + 1):
        for word, mat in rp.levels[n].items():
            # delta[t,u,s] = M[t,s] - M[t,u] - M[u,s]
            delta = mat[:, None, :] - mat[:, :, None] - mat[None, :, :]
            conv = np.zeros_like(delta)
            for j in range(1, n):
                left = rp.levels[j][word[:j]]
                right = rp.levels[n - j][word[j:]]
                conv += left[:, :, None] * right[None, :, :]
            worst = max(worst, float(np.max(np.abs(delta - conv))))
    return worst / scale


def shuffle_defect(rp: RoughPath) -> float:
    """Largest shuffle residual over word pairs with combined level <= N."""
    scale = 1.0 + rp.max_magnitude()
    worst = 0.0
    for n1 in range(1, rp.n_levels + 1):
        for n2 in range(n1, rp.n_levels + 1 - n1):
            for w1 in rp.levels[n1]:
                for w2 in rp.levels[n2]:
                    lhs = rp.levels[n1][w1] * rp.levels[n2][w2]
                    rhs = np.zeros_like(lhs)
                    for word, coeff in shuffle_product(w1, w2).terms.items():
                        rhs += coeff * rp.levels[n1 + n2][word]
                    worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst / scale


def hoelder_slope(rp: RoughPath, n: int, octaves: int = 4) -> tuple[float, float]:
    """Fitted scaling exponent of level n over dyadic time gaps.

    Fits log sup_s |entry(s+h, s)| against log h for h = base gap times
    2^0..2^octaves; returns (slope, rms fit residual).
    """
    gaps = [2 ** j for j in range(octaves + 1)]
    if len(rp.times) <= gaps[-1]:
        raise LiftError("coarse grid too short for the requested octaves")
    if len(gaps) < 4:
        raise LiftError("need at least 4 ladder points")
    hs, sups = [], []
    for gsteps in gaps:
        best = 0.0
        for word, mat in rp.levels[n].items():
            vals = np.abs(np.diagonal(mat, offset=-gsteps))
            best = max(best, float(np.max(vals)))
        hs.append(rp.times[gsteps] - rp.times[0])
        sups.append(best)
    logs_h = np.log(hs)
    logs_v = np.log(sups)
    coeffs, res = np.polyfit(logs_h, logs_v, 1, full=True)[:2]
    rms = float(np.sqrt(res[0] / len(hs))) if len(res) else 0.0
    return float(coeffs[0]), rms


def increment_part(rp: RoughPath, word: Word) -> np.ndarray:
    """Increment (skeleton) part of one word's matrix as stored by the lift."""
    incs = rp.meta.get("increment_parts")
    if incs is None:
        raise LiftError("this rough path carries no increment diagnostics")
    vec = incs[len(word)][word]
    return (vec[:, None] - vec[None, :]).real


# -- serialization -------------------------------------------------------------------

SCHEMA = "roughlift-roughpath/1"


def to_document(rp: RoughPath) -> dict:
    doc = {
        "format": SCHEMA,
        "alpha": rp.alpha,
        "n_levels": rp.n_levels,
        "channels": rp.channels,
        "times": [float(t) for t in rp.times],
        "indices": [int(i) for i in rp.indices],
        "levels": {
            str(n): {",".join(map(str, w)): [[float(x) for x in row] for row in mat]
                     for w, mat in level.items()}
            for n, level in rp.levels.items()
        },
        "meta": {k: v for k, v in rp.meta.items() if k != "increment_parts"},
    }
    return doc


def from_document(doc: Mapping) -> RoughPath:
    if doc.get("format") != SCHEMA:
        raise LiftError(f"unknown rough path format {doc.get('format')!r}")
    levels: dict[int, dict[Word, np.ndarray]] = {}
    for n_str, words in doc["levels"].items():
        n = int(n_str)
        levels[n] = {}
        for key, mat in words.items():
            word = tuple(int(x) for x in key.split(","))
            levels[n][word] = np.asarray(mat, dtype=float)
    if not levels or any(not words for words in levels.values()):
        raise LiftError("rough path document has empty levels")
    return RoughPath(alpha=float(doc["alpha"]), n_levels=int(doc["n_levels"]),
                     channels=int(doc["channels"]),
                     times=np.asarray(doc["times"], dtype=float),
                     indices=np.asarray(doc["indices"], dtype=int),
                     levels=levels, meta=dict(doc.get("meta", {})))
