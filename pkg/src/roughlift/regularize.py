"""Blockwise regularization of skeleton and tree integrals.

Per block tuple, a skeleton integral is evaluated leaf-to-root: multiply the
children's values into the band derivative at each vertex and take a spectral
antiderivative.  Values live in the algebra {sum_d x^d * (band-limited
periodic)}: products and antiderivatives stay inside it, so any
zero-frequency mass produced by colliding blocks (possible outside the
regularized tuple set) turns into an explicit polynomial part instead of a
division by zero.  Every numerator is stored as (i xi) times the path band,
so each ratio against a vanishing denominator stays well conditioned.

Tree integrals follow the recursive increment/boundary decomposition; the
recursion is expanded once per tree shape into its flat chain-of-cuts form
and evaluated from memoized per-piece skeleton values.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Iterator, Mapping, Sequence

import numpy as np

from .besov import BandDecomposition, synthesize
from .trees import (Cut, DecoratedForest, TotalOrder, TreeError,
                    admissible_cuts, natural_order, split, structure_queries)


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class RegScheme:
    """Regularization configuration.

    ``kind='regularized'`` keeps only block tuples inside the per-tree
    regularized set; ``kind='full'`` keeps every order-monotone tuple (the
    unregularized scheme, exact on smooth paths).  ``tie_weights`` applies
    the 1/(number of order-preserving permutations) factor that makes the
    sharp splitting an exact partition.
    """

    kind: str = "regularized"
    k_max: int = 10
    tie_weights: bool = True
    partition: str = "sharp"

    def __post_init__(self):
        if self.kind not in ("regularized", "full"):
            raise SchemeError(f"unknown scheme kind {self.kind!r}")
        if self.k_max < 0:
            raise SchemeError("k_max must be nonnegative")
        if self.partition not in ("sharp", "smooth"):
            raise SchemeError(f"unknown partition {self.partition!r}")

    def full(self) -> RegScheme:
        return replace(self, kind="full")


# -- membership ----------------------------------------------------------------

def _margin_ok(small_abs: int, big_abs: int, n_vertices: int) -> bool:
    # |k_small| <= |k_big| - log2(10) - log2(n)  <=>  2^(|k_big|-|k_small|) >= 10 n
    dk = big_abs - small_abs
    if dk < 0:
        return False
    return (1 << dk) >= 10 * n_vertices


def _same_sign(a: int, b: int) -> bool:
    """True only for two nonzero indices of equal sign.

    The 0 block mixes both frequency signs, so it never counts as
    sign-aligned; the margin conditions treat it like an opposite sign."""
    return (a > 0 and b > 0) or (a < 0 and b < 0)


_STRUCT_MEMO: dict[tuple, object] = {}


def _structure(tree: DecoratedForest, order: TotalOrder):
    key = (tuple(sorted((v, tree.parent.get(v, 0)) for v in tree.vertices)),
           tuple(sorted(order.rank.items())))
    out = _STRUCT_MEMO.get(key)
    if out is None:
        out = structure_queries(tree, order)
        _STRUCT_MEMO[key] = out
    return out


def zreg_contains(tree: DecoratedForest, order: TotalOrder,
                  blocks: Mapping[int, int]) -> bool:
    """Membership in the regularized tuple set of one tree.

    (i) block magnitudes follow the total order; (ii) every vertex below a
    leaf of misaligned sign keeps the 10 |V| dyadic margin to it; (iii) at a
    node, sign-misaligned branch tops keep the same margin to the node's
    order-maximal vertex.  A single vertex is never constrained.
    """
    n = tree.n
    if n == 1:
        return True
    ranked = order.sorted_vertices()
    prev = 0
    for v in ranked:
        a = abs(blocks[v])
        if a < prev:
            return False
        prev = a
    s = _structure(tree, order)
    for v in tree.vertices:
        kv = blocks[v]
        for w in s.leaf_sets[v]:
            kw = blocks[w]
            if not _same_sign(kv, kw):
                if not _margin_ok(abs(kv), abs(kw), n):
                    return False
    for nd in s.nodes:
        top = blocks[s.w_max[nd]]
        for child in tree.children(nd):
            kw = blocks[s.w_max[child]]
            if not _same_sign(kw, top):
                if not _margin_ok(abs(kw), abs(top), n):
                    return False
    return True


def forest_tuple_allowed(forest: DecoratedForest, order: TotalOrder,
                         blocks: Mapping[int, int], scheme: RegScheme) -> bool:
    """Per-component membership (forests filter each tree on its own)."""
    if scheme.kind == "full":
        return True
    return all(zreg_contains(comp, order.restrict(comp.vertices),
                             {v: blocks[v] for v in comp.vertices})
               for comp in forest.components())


def enumerate_tuples(forest: DecoratedForest, order: TotalOrder,
                     scheme: RegScheme, filtered: bool = True) -> Iterator[dict[int, int]]:
    """Order-monotone block tuples with |k| <= k_max, lexicographic in the
    order-sorted index sequence.  With ``filtered`` only tuples passing the
    scheme's per-component membership are emitted; tree-integral sums
    enumerate unfiltered, because a tuple cut out of the whole tree still
    contributes through its admissible pieces."""
    ranked = order.sorted_vertices()
    k_max = scheme.k_max
    values = list(range(-k_max, k_max + 1))

    def rec(i: int, prev_abs: int, acc: dict[int, int]) -> Iterator[dict[int, int]]:
        if i == len(ranked):
            if not filtered or forest_tuple_allowed(forest, order, acc, scheme):
                yield dict(acc)
            return
        v = ranked[i]
        for k in values:
            if abs(k) < prev_abs:
                continue
            acc[v] = k
            yield from rec(i + 1, abs(k), acc)
        acc.pop(v, None)

    yield from rec(0, 0, {})


def zreg_enumerate(tree: DecoratedForest, order: TotalOrder,
                   scheme: RegScheme) -> Iterator[dict[int, int]]:
    if not tree.is_tree():
        raise TreeError("zreg_enumerate takes a tree; see enumerate_tuples")
    yield from enumerate_tuples(tree, order, scheme)


def tie_weight(blocks: Sequence[int]) -> float:
    """1 / |{permutations preserving the |k| sequence}| = 1 / prod(mult!)."""
    counts: dict[int, int] = {}
    for k in blocks:
        counts[abs(k)] = counts.get(abs(k), 0) + 1
    denom = 1
    for c in counts.values():
        denom *= math.factorial(c)
    return 1.0 / denom


def sigma_k_size(blocks: Sequence[int]) -> int:
    counts: dict[int, int] = {}
    for k in blocks:
        counts[abs(k)] = counts.get(abs(k), 0) + 1
    out = 1
    for c in counts.values():
        out *= math.factorial(c)
    return out


# -- cone bound -----------------------------------------------------------------

def check_cone_bound(tree: DecoratedForest, order: TotalOrder,
                     blocks: Mapping[int, int], xi: Mapping[int, float],
                     width_ratio: float = 2.0) -> bool:
    """Check, at concrete in-block frequencies, that every subtree frequency
    sum is pinned to its top frequency:

        width_ratio * |V| * |xi_wmax(v)| >= |xi_v + sum over w above v| > |xi_wmax(v)| / 2.

    ``width_ratio`` accounts for the magnitude spread inside one block (2 for
    sharp blocks, 5 for the smooth family); with unit-width blocks it would
    be 1, which is the idealized constant.  Used as a property test of the
    regularized tuple set, never assumed by the evaluators.
    """
    s = _structure(tree, order)
    n = tree.n
    for v in tree.vertices:
        total = xi[v] + sum(xi[w] for w in tree.above(v))
        top = abs(xi[s.w_max[v]])
        if not (width_ratio * n * top >= abs(total) > 0.5 * top):
            return False
    return True


def cone_bound_counterexample(k0: int = 5) -> tuple[DecoratedForest, TotalOrder, dict, dict]:
    """A documented violation outside the regularized set: opposite-sign
    blocks of equal magnitude cancel, breaking the lower bound."""
    from .trees import trunk
    t = trunk(2, [1, 1])
    order = natural_order(t)
    blocks = {1: -k0, 2: k0}
    xi = {1: -(2.0 ** (k0 - 1)) - 0.25, 2: 2.0 ** (k0 - 1)}
    return t, order, blocks, xi


# -- grid context and the polynomial band algebra --------------------------------

@dataclass(frozen=True)
class GridCtx:
    m: int
    length: float
    x: np.ndarray
    xi: np.ndarray

    @classmethod
    def for_path(cls, m: int, length: float) -> GridCtx:
        x = np.arange(m) * (length / m)
        xi = 2.0 * np.pi * np.fft.fftfreq(m, d=length / m)
        return cls(m=m, length=length, x=x, xi=xi)


PolyBand = dict  # degree -> complex time samples


def _pb_mul(a: PolyBand, b: PolyBand) -> PolyBand:
    out: PolyBand = {}
    for d1, p1 in a.items():
        for d2, p2 in b.items():
            d = d1 + d2
            prod = p1 * p2
            if d in out:
                out[d] = out[d] + prod
            else:
                out[d] = prod
    return out


def _pb_antiderivative(pb: PolyBand, ctx: GridCtx) -> PolyBand:
    """Antiderivative within the algebra: spectral division on the zero-mean
    part, an explicit monomial for any mean, integration by parts downward."""
    inv = np.zeros(ctx.m, dtype=complex)
    inv[1:] = 1.0 / (1j * ctx.xi[1:])
    work: dict[int, np.ndarray] = {d: np.fft.fft(p) / ctx.m for d, p in pb.items()}
    out_spec: dict[int, np.ndarray] = {}
    out_poly: dict[int, complex] = {}
    top = max(work)
    for d in range(top, -1, -1):
        s = work.get(d)
        if s is None:
            continue
        mean = s[0]
        if mean != 0:
            out_poly[d + 1] = out_poly.get(d + 1, 0.0) + mean / (d + 1)
        q = s * inv  # zero-mean antiderivative; bin 0 is dropped by inv
        if d in out_spec:
            out_spec[d] = out_spec[d] + q
        else:
            out_spec[d] = q
        if d > 0:
            prev = work.get(d - 1)
            work[d - 1] = (prev - d * q) if prev is not None else (-d) * q
    out: PolyBand = {}
    for d, s in out_spec.items():
        out[d] = synthesize(s)
    for d, c in out_poly.items():
        if d in out:
            out[d] = out[d] + c
        else:
            out[d] = np.full(ctx.m, c, dtype=complex)
    return out


def _pb_values(pb: PolyBand, ctx: GridCtx, idx: np.ndarray | None = None) -> np.ndarray:
    x = ctx.x if idx is None else ctx.x[idx]
    total = np.zeros(len(x), dtype=complex)
    for d, p in pb.items():
        samples = p if idx is None else p[idx]
        if d:
            samples = (x ** d) * samples
        total = total + samples
    return total


# -- the public formal integral ----------------------------------------------------

def formal_integral(samples: np.ndarray, length: float,
                    dc_value: complex | None = None,
                    mean_tol: float = 1e-10) -> np.ndarray:
    """Spectral antiderivative of a zero-mean band signal.

    The difference of two evaluations is the oriented integral of the
    trigonometric interpolant.  A nonzero mean (beyond ``mean_tol`` relative)
    is rejected unless the zero-frequency value of the antiderivative is
    supplied directly (the convention used at single-band vertices, where the
    numerator i xi cancels the division and the band's own mean survives).
    """
    samples = np.asarray(samples, dtype=complex)
    m = samples.shape[0]
    coeffs = np.fft.fft(samples) / m
    scale = float(np.max(np.abs(coeffs))) or 1.0
    if dc_value is None and abs(coeffs[0]) > mean_tol * scale:
        raise SchemeError(f"nonzero mean {coeffs[0]:.3e} (relative tolerance {mean_tol})")
    xi = 2.0 * np.pi * np.fft.fftfreq(m, d=length / m)
    out = np.zeros(m, dtype=complex)
    out[1:] = coeffs[1:] / (1j * xi[1:])
    out[0] = 0.0 if dc_value is None else dc_value
    return synthesize(out)


# -- skeleton values ---------------------------------------------------------------

@dataclass(frozen=True)
class SkeletonValue:
    """A (regularized) skeleton integral as a function of one time."""

    times: np.ndarray
    values: np.ndarray


def _piece_key(forest: DecoratedForest, order: TotalOrder,
               blocks: Mapping[int, int]) -> tuple:
    ranked = order.restrict(forest.vertices).sorted_vertices()
    pos = {v: i for i, v in enumerate(ranked)}
    return tuple((pos.get(forest.parent.get(v, None), -1),
                  forest.label(v), blocks[v]) for v in ranked)


class SkeletonEngine:
    """Per-tuple skeleton evaluation over one band decomposition, with
    memoized subtree values (fine grid, LRU-capped) and piece samples."""

    def __init__(self, bands: BandDecomposition, scheme: RegScheme,
                 coarse_idx: np.ndarray | None = None):
        path = bands.path
        self.bands = bands
        self.scheme = scheme
        self.ctx = GridCtx.for_path(path.m, path.length)
        self.coarse_idx = (np.asarray(coarse_idx, dtype=int)
                          if coarse_idx is not None else np.arange(path.m))
        self.ones = np.ones(len(self.coarse_idx), dtype=complex)
        self._deriv: dict[tuple[int, int], np.ndarray | None] = {}
        self._band_time: dict[tuple[int, int], np.ndarray | None] = {}
        self._fine: OrderedDict[tuple, PolyBand | None] = OrderedDict()
        bytes_per_entry = 32 * path.m
        self._fine_cap = max(16, (1 << 26) // bytes_per_entry)
        self._samples: dict[tuple, np.ndarray | None] = {}
        self._membership: dict[tuple, bool] = {}

    # band access ----------------------------------------------------------

    def band_time(self, channel: int, k: int) -> np.ndarray | None:
        key = (channel, k)
        if key not in self._band_time:
            sig = self.bands.band(channel, k)
            self._band_time[key] = None if sig is None else sig.time
        return self._band_time[key]

    def deriv_time(self, channel: int, k: int) -> np.ndarray | None:
        key = (channel, k)
        if key not in self._deriv:
            sig = self.bands.band(channel, k)
            if sig is None:
                self._deriv[key] = None
            else:
                self._deriv[key] = synthesize(1j * self.ctx.xi * sig.coeffs)
        return self._deriv[key]

    # fine-grid subtree values ----------------------------------------------

    def _subtree_value(self, tree: DecoratedForest, v: int,
                       blocks: Mapping[int, int]) -> PolyBand | None:
        sub = tree.restrict(tree.subtree_vertices(v))
        key = _piece_key(sub, natural_order_safe(sub), blocks)
        if key in self._fine:
            self._fine.move_to_end(key)
            return self._fine[key]
        kids = tree.children(v)
        if not kids:
            base = self.band_time(tree.label(v), blocks[v])
            value = None if base is None else {0: base}
        else:
            value: PolyBand | None = None
            prod: PolyBand | None = None
            for c in kids:
                cv = self._subtree_value(tree, c, blocks)
                if cv is None:
                    prod = None
                    break
                prod = cv if prod is None else _pb_mul(prod, cv)
            if prod is not None:
                deriv = self.deriv_time(tree.label(v), blocks[v])
                if deriv is not None:
                    value = _pb_antiderivative(_pb_mul({0: deriv}, prod), self.ctx)
        self._fine[key] = value
        if len(self._fine) > self._fine_cap:
            self._fine.popitem(last=False)
        return value

    def tree_value(self, tree: DecoratedForest, blocks: Mapping[int, int]) -> PolyBand | None:
        """Skeleton value of one tree at the given blocks (no membership
        filter); None when any required band is empty."""
        return self._subtree_value(tree, tree.roots[0], blocks)

    # piece samples with membership -------------------------------------------

    def piece_samples(self, tree: DecoratedForest, order: TotalOrder,
                      blocks: Mapping[int, int]) -> np.ndarray | None:
        """Coarse samples of one tree piece's regularized skeleton value;
        None when the piece's tuple is filtered out or a band is empty."""
        key = _piece_key(tree, order, blocks)
        if key in self._samples:
            return self._samples[key]
        ok = key in self._membership and self._membership[key]
        if key not in self._membership:
            ok = (self.scheme.kind == "full"
                  or zreg_contains(tree, order.restrict(tree.vertices),
                                   {v: blocks[v] for v in tree.vertices}))
            self._membership[key] = ok
        if not ok:
            out = None
        else:
            pb = self.tree_value(tree, blocks)
            out = None if pb is None else _pb_values(pb, self.ctx, self.coarse_idx)
        self._samples[key] = out
        return out

    def forest_samples(self, forest: DecoratedForest, order: TotalOrder,
                       blocks: Mapping[int, int]) -> np.ndarray | None:
        total = np.ones(len(self.coarse_idx), dtype=complex)
        for comp in forest.components():
            piece = self.piece_samples(comp, order, blocks)
            if piece is None:
                return None
            total = total * piece
        return total


def natural_order_safe(forest: DecoratedForest) -> TotalOrder:
    """Natural order when compatible, else any compatible order (stable)."""
    try:
        return natural_order(forest)
    except TreeError:
        placed: dict[int, int] = {}
        rank = 1
        remaining = set(forest.vertices)
        while remaining:
            v = min(u for u in remaining
                    if forest.parent.get(u) is None or forest.parent[u] in placed)
            placed[v] = rank
            rank += 1
            remaining.remove(v)
        return TotalOrder(placed)


# -- public skeleton evaluators -----------------------------------------------------

def skeleton_eval_recursive(forest: DecoratedForest, order: TotalOrder,
                            blocks: Mapping[int, int], bands: BandDecomposition,
                            engine: SkeletonEngine | None = None) -> SkeletonValue:
    """Leaf-to-root evaluation of the skeleton integral of one block tuple.

    Forests multiply their component values pointwise.  Missing bands yield
    the zero function.
    """
    eng = engine or SkeletonEngine(bands, RegScheme(kind="full", k_max=0))
    ctx = eng.ctx
    total = np.ones(ctx.m, dtype=complex)
    for comp in forest.components():
        pb = eng.tree_value(comp, blocks)
        if pb is None:
            return SkeletonValue(times=ctx.x, values=np.zeros(ctx.m, dtype=complex))
        total = total * _pb_values(pb, ctx)
    return SkeletonValue(times=ctx.x, values=total)


def skeleton_eval_fourier(forest: DecoratedForest, order: TotalOrder,
                          blocks: Mapping[int, int], bands: BandDecomposition,
                          times: np.ndarray | None = None) -> SkeletonValue:
    """Direct frequency-domain sum over all mode combinations of the blocks.

    The independent cross-check of the recursive evaluator: cost is the
    product of the block mode counts, so components are limited to three
    vertices.  Ratios pair each vertex's numerator with its own subtree
    denominator; a leaf's 0/0 is 1 by the band-value convention, and any
    other vanishing denominator is rejected (those tuples are exactly what
    the regularized set excludes).
    """
    path = bands.path
    ctx = GridCtx.for_path(path.m, path.length)
    t = ctx.x if times is None else np.asarray(times)
    total = np.ones(len(t), dtype=complex)
    for comp in forest.components():
        if comp.n > 3:
            raise SchemeError("frequency-sum oracle is limited to 3 vertices per tree")
        vs = list(comp.vertices)
        mode_idx = []
        for v in vs:
            sig = bands.band(comp.label(v), blocks[v])
            if sig is None:
                return SkeletonValue(times=t, values=np.zeros(len(t), dtype=complex))
            mode_idx.append(np.nonzero(sig.coeffs)[0])
        grids = np.meshgrid(*mode_idx, indexing="ij", sparse=False)
        xi_of = {v: ctx.xi[g] for v, g in zip(vs, grids)}
        coef = np.ones(grids[0].shape, dtype=complex)
        for v, g in zip(vs, grids):
            sig = bands.band(comp.label(v), blocks[v])
            coef = coef * sig.coeffs[g]
        ratio = np.ones(grids[0].shape, dtype=float)
        for v in vs:
            denom = xi_of[v] + sum(xi_of[w] for w in comp.above(v))
            if comp.is_leaf(v):
                r = np.ones(grids[0].shape)
            else:
                if np.any(denom == 0.0):
                    raise SchemeError("vanishing subtree frequency sum; "
                                      "tuple outside the oracle's domain")
                r = xi_of[v] / denom
            ratio = ratio * r
        xi_tot = sum(xi_of[v] for v in vs)
        weights = (coef * ratio).ravel()
        phases = np.exp(1j * np.outer(t, xi_tot.ravel()))
        total = total * (phases @ weights)
    return SkeletonValue(times=t, values=total)


def regularized_skeleton(forest: DecoratedForest, order: TotalOrder,
                         bands: BandDecomposition, scheme: RegScheme,
                         times_idx: np.ndarray | None = None,
                         engine: SkeletonEngine | None = None) -> SkeletonValue:
    """Sum of filtered per-tuple skeleton values with tie weights, in the
    deterministic enumeration order."""
    eng = engine or SkeletonEngine(bands, scheme, coarse_idx=times_idx)
    idx = eng.coarse_idx
    total = np.zeros(len(idx), dtype=complex)
    ranked = order.sorted_vertices()
    for blocks in enumerate_tuples(forest, order, scheme):
        val = eng.forest_samples(forest, order, blocks)
        if val is None:
            continue
        w = tie_weight([blocks[v] for v in ranked]) if scheme.tie_weights else 1.0
        total = total + w * val
    return SkeletonValue(times=eng.ctx.x[idx], values=total)


# -- tree integrals -----------------------------------------------------------------

_EXPANSION_MEMO: dict[tuple, tuple] = {}


def _shape_key(tree: DecoratedForest) -> tuple:
    return tuple(sorted((v, tree.parent.get(v, 0)) for v in tree.vertices))


def cut_chain_expansion(tree: DecoratedForest) -> tuple:
    """Flat form of the recursive increment/boundary decomposition:

        I_T = sum over chains of nested cuts of
              (-1)^(chain length) * delta Sk(root part) * prod Sk(pieces at s)

    including the empty chain (the pure increment term).  Pieces are vertex
    id sets so callers can restrict block tuples.
    """
    key = _shape_key(tree)
    got = _EXPANSION_MEMO.get(key)
    if got is not None:
        return got
    terms: list[tuple[int, frozenset, tuple[frozenset, ...]]] = []

    def expand(current: DecoratedForest, sign: int, pieces: tuple) -> None:
        terms.append((sign, frozenset(current.vertices), pieces))
        for cut in admissible_cuts(current):
            roo, lea = split(current, cut)
            expand(roo, -sign, pieces + (frozenset(lea.vertices),))

    expand(tree, 1, ())
    out = tuple(terms)
    _EXPANSION_MEMO[key] = out
    return out


def tree_integral_matrix(tree: DecoratedForest, order: TotalOrder,
                         blocks: Mapping[int, int], engine: SkeletonEngine,
                         parts: bool = False):
    """All-pairs values of one tree's regularized integral at one block tuple.

    Entry [i, j] is the integral from coarse time j to coarse time i.  With
    ``parts`` the (increment, boundary) split is returned as well.
    """
    g = len(engine.coarse_idx)
    increment = np.zeros((g, g), dtype=complex)
    boundary = np.zeros((g, g), dtype=complex)
    for sign, roo_ids, piece_ids in cut_chain_expansion(tree):
        roo = tree.restrict(roo_ids)
        weight_s: np.ndarray | None = None
        ok = True
        for ids in piece_ids:
            piece_val = engine.forest_samples(tree.restrict(ids), order, blocks)
            if piece_val is None:
                ok = False
                break
            weight_s = piece_val if weight_s is None else weight_s * piece_val
        if not ok:
            continue
        vroo = engine.forest_samples(roo, order, blocks)
        if vroo is None:
            continue
        delta = vroo[:, None] - vroo[None, :]
        term = sign * delta if weight_s is None else sign * delta * weight_s[None, :]
        if not piece_ids:
            increment = increment + term
        else:
            boundary = boundary + term
    total = increment + boundary
    if parts:
        return total, increment, boundary
    return total


def forest_integral_matrix(forest: DecoratedForest, order: TotalOrder,
                           blocks: Mapping[int, int], engine: SkeletonEngine) -> np.ndarray:
    """Product over tree components of the per-component integral matrices."""
    g = len(engine.coarse_idx)
    total = np.ones((g, g), dtype=complex)
    for comp in forest.components():
        total = total * tree_integral_matrix(comp, order, blocks, engine)
    return total


def tree_integral_outer_terms(tree: DecoratedForest, order: TotalOrder,
                              blocks: Mapping[int, int],
                              engine: SkeletonEngine) -> list[tuple[np.ndarray, np.ndarray]]:
    """The integral matrix as a short list of rank-one terms u (x) v.

    Each chain term delta(a)[t,s] * w[s] splits into a (x) w - 1 (x) (a w);
    summing many tuples then reduces to one tall matrix product per chunk
    instead of per-tuple dense outer products.
    """
    ones = engine.ones
    out: list[tuple[np.ndarray, np.ndarray]] = []
    for sign, roo_ids, piece_ids in cut_chain_expansion(tree):
        weight_s: np.ndarray | None = None
        ok = True
        for ids in piece_ids:
            piece_val = engine.forest_samples(tree.restrict(ids), order, blocks)
            if piece_val is None:
                ok = False
                break
            weight_s = piece_val if weight_s is None else weight_s * piece_val
        if not ok:
            continue
        vroo = engine.forest_samples(tree.restrict(roo_ids), order, blocks)
        if vroo is None:
            continue
        if weight_s is None:
            out.append((sign * vroo, ones))
            out.append(((-sign) * ones, vroo))
        else:
            out.append((sign * vroo, weight_s))
            out.append(((-sign) * ones, vroo * weight_s))
    return out


def forest_integral_outer_terms(forest: DecoratedForest, order: TotalOrder,
                                blocks: Mapping[int, int],
                                engine: SkeletonEngine) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rank-one expansion of the component product: the pointwise product of
    two outer products is the outer product of the pointwise factor products."""
    comps = forest.components()
    acc: list[tuple[np.ndarray, np.ndarray]] | None = None
    for comp in comps:
        terms = tree_integral_outer_terms(comp, order, blocks, engine)
        if not terms:
            return []
        if acc is None:
            acc = terms
        else:
            acc = [(u1 * u2, v1 * v2) for u1, v1 in acc for u2, v2 in terms]
    return acc or []


def regularized_tree_integral(forest: DecoratedForest, order: TotalOrder,
                              bands: BandDecomposition, scheme: RegScheme,
                              s: int, t: int, parts: bool = False):
    """The regularized integral of one forest between fine-grid indices s, t:
    the tuple sum of the recursive skeleton decomposition, with tie weights.

    With ``parts`` returns (value, increment part, boundary part); for a
    multi-component forest the split applies to single components only.
    """
    coarse = np.array([s, t], dtype=int)
    engine = SkeletonEngine(bands, scheme, coarse_idx=coarse)
    ranked = order.sorted_vertices()
    comps = forest.components()
    total = 0.0 + 0.0j
    inc = 0.0 + 0.0j
    for blocks in enumerate_tuples(forest, order, scheme, filtered=False):
        w = tie_weight([blocks[v] for v in ranked]) if scheme.tie_weights else 1.0
        if len(comps) == 1:
            m = tree_integral_matrix(comps[0], order, blocks, engine)
        else:
            m = forest_integral_matrix(forest, order, blocks, engine)
        total += w * m[1, 0]
        if parts:
            sk = engine.forest_samples(forest, order, blocks)
            if sk is not None:
                inc += w * (sk[1] - sk[0])
    if parts:
        return total, inc, total - inc
    return total
