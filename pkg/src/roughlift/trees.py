"""Decorated rooted trees and forests.

Trees grow upward: every edge is oriented from a child toward its parent and
each connected component has a unique root.  Vertices carry stable integer
ids (so cuts and renamings stay traceable) plus a positive integer
decoration.  All values are immutable after construction and every function
here is pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence


class TreeError(ValueError):
    """Raised for malformed forests, orders, or cuts."""


class DecoratedForest:
    """A finite rooted forest with per-vertex integer decorations.

    Vertices are arbitrary integer ids; ``parent`` maps each non-root vertex
    to the vertex it connects to.  ``v -> w`` (w = parent of v) points toward
    the root; the transitive closure ``connects_to`` is a strict partial
    order.  Equality and hashing go through a canonical form that forgets
    vertex ids and component order, matching the free *commutative* algebra
    the forests generate.
    """

    __slots__ = ("_vertices", "_parent", "_decoration", "_children",
                 "_roots", "_key")

    def __init__(self, vertices: Iterable[int], parent: Mapping[int, int],
                 decoration: Mapping[int, int], _allow_empty: bool = False):
        vs = tuple(sorted(int(v) for v in vertices))
        if len(set(vs)) != len(vs):
            raise TreeError("duplicate vertex ids")
        if not vs and not _allow_empty:
            raise TreeError("empty forest (the algebra unit lives in hopf, not here)")
        vset = set(vs)
        par = {int(v): int(p) for v, p in parent.items()}
        dec = {int(v): int(decoration[v]) for v in vs}
        for v, p in par.items():
            if v not in vset or p not in vset:
                raise TreeError(f"edge ({v},{p}) uses unknown vertex")
        for v, lab in dec.items():
            if lab <= 0:
                raise TreeError(f"decoration of vertex {v} must be a positive integer")
        if set(dec) != vset:
            raise TreeError("every vertex needs a decoration")
        self._vertices = vs
        self._parent = par
        self._decoration = dec
        children: dict[int, list[int]] = {v: [] for v in vs}
        for v, p in par.items():
            children[p].append(v)
        self._children = {v: tuple(sorted(c)) for v, c in children.items()}
        self._roots = tuple(sorted(v for v in vs if v not in par))
        if vs and not self._roots:
            raise TreeError("parent relation has no root (cycle)")
        # acyclicity: walking to a root must terminate within n steps
        n = len(vs)
        for v in vs:
            w, steps = v, 0
            while w in par:
                w = par[w]
                steps += 1
                if steps > n:
                    raise TreeError("parent relation contains a cycle")
        self._key: tuple | None = None

    # -- basic queries ----------------------------------------------------

    @property
    def vertices(self) -> tuple[int, ...]:
        return self._vertices

    @property
    def parent(self) -> Mapping[int, int]:
        return self._parent

    @property
    def decoration(self) -> Mapping[int, int]:
        return self._decoration

    @property
    def roots(self) -> tuple[int, ...]:
        return self._roots

    def __len__(self) -> int:
        return len(self._vertices)

    @property
    def n(self) -> int:
        return len(self._vertices)

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def is_tree(self) -> bool:
        return len(self._roots) == 1

    def is_leaf(self, v: int) -> bool:
        return not self._children[v]

    def label(self, v: int) -> int:
        return self._decoration[v]

    def connects_to(self, v: int, w: int) -> bool:
        """True iff v connects to w through the parent chain (v != w)."""
        u = v
        while u in self._parent:
            u = self._parent[u]
            if u == w:
                return True
        return False

    def above(self, v: int) -> frozenset[int]:
        """Vertices that connect to v, i.e. the strict subtree over v."""
        out: set[int] = set()
        stack = list(self._children[v])
        while stack:
            u = stack.pop()
            out.add(u)
            stack.extend(self._children[u])
        return frozenset(out)

    def subtree_vertices(self, v: int) -> frozenset[int]:
        return self.above(v) | {v}

    def component_of(self, v: int) -> frozenset[int]:
        u = v
        while u in self._parent:
            u = self._parent[u]
        return self.subtree_vertices(u)

    def components(self) -> tuple[DecoratedForest, ...]:
        """Tree components, as sub-forests with vertex ids preserved."""
        return tuple(self.restrict(self.subtree_vertices(r)) for r in self._roots)

    def restrict(self, keep: Iterable[int]) -> DecoratedForest:
        """Sub-forest on ``keep``; edges survive iff both endpoints survive."""
        ks = set(keep)
        par = {v: p for v, p in self._parent.items() if v in ks and p in ks}
        dec = {v: self._decoration[v] for v in ks}
        return DecoratedForest(ks, par, dec)

    def relabel(self, mapping: Mapping[int, int]) -> DecoratedForest:
        """Rename vertex ids through a bijection."""
        par = {mapping[v]: mapping[p] for v, p in self._parent.items()}
        dec = {mapping[v]: self._decoration[v] for v in self._vertices}
        return DecoratedForest([mapping[v] for v in self._vertices], par, dec)

    # -- canonical form ----------------------------------------------------

    def _tree_key(self, v: int) -> tuple:
        return (self._decoration[v],
                tuple(sorted(self._tree_key(c) for c in self._children[v])))

    def canonical_key(self) -> tuple:
        """Hashable form invariant under vertex renaming and component order."""
        if self._key is None:
            self._key = tuple(sorted(self._tree_key(r) for r in self._roots))
        return self._key

    def canonical(self) -> DecoratedForest:
        """Equal forest with vertices renamed 1..n in canonical traversal order."""
        order: list[tuple] = []

        def walk(v: int) -> None:
            order.append(v)
            for c in sorted(self._children[v], key=self._tree_key):
                walk(c)

        for r in sorted(self._roots, key=self._tree_key):
            walk(r)
        mapping = {v: i + 1 for i, v in enumerate(order)}
        return self.relabel(mapping)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecoratedForest):
            return NotImplemented
        return self.canonical_key() == other.canonical_key()

    def __hash__(self) -> int:
        return hash(self.canonical_key())

    def __repr__(self) -> str:
        return f"DecoratedForest({format_forest(self)!r})"


@dataclass(frozen=True)
class TotalOrder:
    """A total order on the vertices of one forest, as vertex -> rank (1-based).

    Compatible means: v connects to w implies rank(v) > rank(w).
    """

    rank: Mapping[int, int]

    def __post_init__(self):
        ranks = sorted(self.rank.values())
        if ranks != list(range(1, len(ranks) + 1)):
            raise TreeError("ranks must be a bijection onto 1..n")

    def sorted_vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self.rank, key=self.rank.__getitem__))

    def is_compatible(self, forest: DecoratedForest) -> bool:
        if set(self.rank) != set(forest.vertices):
            return False
        return all(self.rank[v] > self.rank[p] for v, p in forest.parent.items())

    def restrict(self, keep: Iterable[int]) -> TotalOrder:
        ks = sorted(set(keep), key=self.rank.__getitem__)
        return TotalOrder({v: i + 1 for i, v in enumerate(ks)})

    def max_vertex(self, among: Iterable[int]) -> int:
        return max(among, key=self.rank.__getitem__)


def natural_order(forest: DecoratedForest) -> TotalOrder:
    """Total order by increasing vertex id (compatible when parents have smaller ids)."""
    order = TotalOrder({v: i + 1 for i, v in enumerate(forest.vertices)})
    if not order.is_compatible(forest):
        raise TreeError("vertex ids are not compatible with the tree order")
    return order


@dataclass(frozen=True)
class Cut:
    """An admissible cut: a set of chosen vertices.

    For a tree: a nonempty antichain of non-root vertices.  For a forest the
    per-component convention applies: each component contributes nothing, its
    root, or a proper cut; the all-empty and all-root combinations are
    excluded.  Choosing a component's root sends that whole component to the
    leaves part.
    """

    chosen: frozenset[int]


@dataclass(frozen=True)
class MultiCut:
    """Nested admissible cuts v_1 |= ... |= v_l |= V(T), by level."""

    levels: tuple[frozenset[int], ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def all_vertices(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for lev in self.levels:
            out |= lev
        return out


# -- constructors ----------------------------------------------------------

def single(label: int, vertex: int = 1) -> DecoratedForest:
    return DecoratedForest([vertex], {}, {vertex: label})


def trunk(n: int, decoration: Sequence[int]) -> DecoratedForest:
    """The chain n -> n-1 -> ... -> 1 with vertex j decorated decoration[j-1]."""
    if n < 1:
        raise TreeError("trunk needs at least one vertex")
    if len(decoration) != n:
        raise TreeError("need one label per vertex")
    parent = {j: j - 1 for j in range(2, n + 1)}
    return DecoratedForest(range(1, n + 1), parent,
                           {j: decoration[j - 1] for j in range(1, n + 1)})


def forest_product(*parts: DecoratedForest) -> DecoratedForest:
    """Disjoint union; vertex ids are shifted to stay unique."""
    vertices: list[int] = []
    parent: dict[int, int] = {}
    decoration: dict[int, int] = {}
    offset = 0
    for f in parts:
        shift = {v: v + offset for v in f.vertices}
        vertices.extend(shift.values())
        parent.update({shift[v]: shift[p] for v, p in f.parent.items()})
        decoration.update({shift[v]: f.decoration[v] for v in f.vertices})
        offset = max(vertices, default=0)
    return DecoratedForest(vertices, parent, decoration)


# -- admissible cuts and splits ---------------------------------------------

def _antichains(forest: DecoratedForest, pool: Sequence[int]) -> Iterator[frozenset[int]]:
    """Nonempty subsets of ``pool`` that are pairwise incomparable."""
    pool = sorted(pool)
    comparable = {
        (a, b)
        for a, b in itertools.permutations(pool, 2)
        if forest.connects_to(a, b)
    }

    def extend(prefix: list[int], rest: list[int]) -> Iterator[frozenset[int]]:
        for i, v in enumerate(rest):
            if any((v, u) in comparable or (u, v) in comparable for u in prefix):
                continue
            chosen = prefix + [v]
            yield frozenset(chosen)
            yield from extend(chosen, rest[i + 1:])

    yield from extend([], pool)


def admissible_cuts(forest: DecoratedForest) -> list[Cut]:
    """Every admissible cut of a forest, exactly once.

    Trees yield all nonempty antichains of non-root vertices.  Multi-tree
    forests combine the per-component options (empty / root / proper cut) and
    drop the two trivial combinations.
    """
    if forest.n == 0:
        raise TreeError("empty forest has no cuts")
    comps = forest.components()
    if len(comps) == 1:
        root = comps[0].roots[0]
        pool = [v for v in forest.vertices if v != root]
        return [Cut(a) for a in _antichains(forest, pool)]
    options: list[list[frozenset[int]]] = []
    for comp in comps:
        root = comp.roots[0]
        pool = [v for v in comp.vertices if v != root]
        opts = [frozenset(), frozenset({root})]
        opts.extend(_antichains(comp, pool))
        options.append(opts)
    cuts: list[Cut] = []
    for combo in itertools.product(*options):
        if all(not c for c in combo):
            continue
        if all(len(c) == 1 and next(iter(c)) in forest.roots for c in combo):
            continue
        chosen = frozenset().union(*combo)
        cuts.append(Cut(chosen))
    return cuts


def is_admissible_cut(forest: DecoratedForest, chosen: frozenset[int]) -> bool:
    if not chosen or not chosen <= set(forest.vertices):
        return False
    by_comp: dict[int, list[int]] = {}
    for v in chosen:
        u = v
        while u in forest.parent:
            u = forest.parent[u]
        by_comp.setdefault(u, []).append(v)
    root_marked = 0
    for root, vs in by_comp.items():
        if vs == [root]:
            root_marked += 1
            continue
        if root in vs:
            return False  # root may only appear alone in its component
        for a, b in itertools.permutations(vs, 2):
            if forest.connects_to(a, b):
                return False
    if root_marked == len(forest.roots) and len(chosen) == len(forest.roots):
        return False  # all-root combination is trivial
    return True


def split(forest: DecoratedForest, cut: Cut) -> tuple[DecoratedForest, DecoratedForest]:
    """Split at an admissible cut into (root part, leaves part).

    The leaves part keeps the chosen vertices and everything connecting to
    them (root-marked components move over entirely); the root part keeps the
    rest.  Decorations and vertex ids are preserved.  Admissibility
    guarantees both parts are nonempty.
    """
    if not is_admissible_cut(forest, cut.chosen):
        raise TreeError(f"cut {sorted(cut.chosen)} is not admissible")
    lea_vertices: set[int] = set()
    for v in cut.chosen:
        lea_vertices |= forest.subtree_vertices(v)
    roo_vertices = set(forest.vertices) - lea_vertices
    return forest.restrict(roo_vertices), forest.restrict(lea_vertices)


def multiple_cuts(tree: DecoratedForest) -> list[MultiCut]:
    """All multiple cuts of a tree: nonempty subsets of non-root vertices,
    organised into their level decomposition v_1 |= ... |= v_l |= V(T).

    The level of w is 1 + #{w' in the subset : w connects to w'}; vertices of
    equal level are automatically an antichain, and each level is admissible
    for the successively cut root part.
    """
    if not tree.is_tree():
        raise TreeError("multiple cuts are defined for trees")
    root = tree.roots[0]
    pool = [v for v in tree.vertices if v != root]
    out: list[MultiCut] = []
    for r in range(1, len(pool) + 1):
        for subset in itertools.combinations(pool, r):
            levels: dict[int, set[int]] = {}
            for w in subset:
                lev = 1 + sum(1 for w2 in subset if w != w2 and tree.connects_to(w, w2))
                levels.setdefault(lev, set()).add(w)
            depth = max(levels)
            if sorted(levels) != list(range(1, depth + 1)):
                raise TreeError("level decomposition skipped a level")
            out.append(MultiCut(tuple(frozenset(levels[j]) for j in range(1, depth + 1))))
    return out


def chop(tree: DecoratedForest, mc: MultiCut) -> tuple[DecoratedForest, tuple[DecoratedForest, ...]]:
    """Apply the nested cuts of ``mc`` from the top level down.

    Returns (final root part, leaf pieces by level 1..l); piece m is the
    leaves severed when cutting the (already chopped) tree at level m.
    """
    current = tree
    pieces: list[DecoratedForest] = []
    for level in reversed(mc.levels):
        roo, lea = split(current, Cut(level))
        pieces.append(lea)
        current = roo
    pieces.reverse()
    return current, tuple(pieces)


# -- structural queries ------------------------------------------------------

@dataclass(frozen=True)
class TreeStructure:
    """Leaves, nodes, branches, and the order-maximum map of one tree."""

    leaves: frozenset[int]
    nodes: frozenset[int]
    uppermost_nodes: frozenset[int]
    branches: Mapping[tuple[int, int], frozenset[int]] = field(hash=False)
    w_max: Mapping[int, int] = field(hash=False)
    leaf_sets: Mapping[int, frozenset[int]] = field(hash=False)


def structure_queries(tree: DecoratedForest, order: TotalOrder) -> TreeStructure:
    """Leaves, nodes (vertices where two or more branches join), uppermost
    nodes, branches, and w_max(v) = order-max of the vertices above v (v
    itself for a leaf).
    """
    if not tree.is_tree():
        raise TreeError("structure queries are defined for trees")
    if not order.is_compatible(tree):
        raise TreeError("total order is not compatible with the tree")
    leaves = frozenset(v for v in tree.vertices if tree.is_leaf(v))
    nodes = frozenset(v for v in tree.vertices if len(tree.children(v)) >= 2)
    uppermost = frozenset(n for n in nodes
                          if not any(u in nodes for u in tree.above(n)))
    root = tree.roots[0]
    branches: dict[tuple[int, int], frozenset[int]] = {}
    for start in leaves | nodes:
        if start == root:
            continue
        path = [start]
        v = tree.parent[start]
        while v not in nodes and v != root:
            path.append(v)
            v = tree.parent[v]
        branches[(start, v)] = frozenset(path)
    w_max = {}
    leaf_sets = {}
    for v in tree.vertices:
        up = tree.above(v)
        w_max[v] = order.max_vertex(up) if up else v
        leaf_sets[v] = frozenset(u for u in up if tree.is_leaf(u))
    return TreeStructure(leaves=leaves, nodes=nodes, uppermost_nodes=uppermost,
                         branches=branches, w_max=w_max, leaf_sets=leaf_sets)


# -- text format --------------------------------------------------------------

def format_forest(forest: DecoratedForest) -> str:
    """Canonical text form: '1(2,3)' is a root decorated 1 with leaf children
    decorated 2 and 3; components join with '*'.
    """
    def fmt(f: DecoratedForest, v: int) -> str:
        kids = sorted(f.children(v), key=f._tree_key)
        if not kids:
            return str(f.label(v))
        return f"{f.label(v)}({','.join(fmt(f, c) for c in kids)})"

    canon = forest.canonical()
    return "*".join(fmt(canon, r) for r in
                    sorted(canon.roots, key=canon._tree_key))


def parse_forest(text: str) -> DecoratedForest:
    """Inverse of :func:`format_forest` (round-trips bit-exact)."""
    text = text.strip()
    if not text:
        raise TreeError("empty forest text")
    pos = 0
    next_id = itertools.count(1)
    vertices: list[int] = []
    parent: dict[int, int] = {}
    decoration: dict[int, int] = {}

    def parse_label() -> int:
        nonlocal pos
        start = pos
        while pos < len(text) and text[pos].isdigit():
            pos += 1
        if start == pos:
            raise TreeError(f"expected label at {start} in {text!r}")
        return int(text[start:pos])

    def parse_tree(par: int | None) -> None:
        nonlocal pos
        label = parse_label()
        vid = next(next_id)
        vertices.append(vid)
        decoration[vid] = label
        if par is not None:
            parent[vid] = par
        if pos < len(text) and text[pos] == "(":
            pos += 1
            while True:
                parse_tree(vid)
                if pos < len(text) and text[pos] == ",":
                    pos += 1
                    continue
                break
            if pos >= len(text) or text[pos] != ")":
                raise TreeError(f"unbalanced parentheses in {text!r}")
            pos += 1

    while True:
        parse_tree(None)
        if pos < len(text) and text[pos] == "*":
            pos += 1
            continue
        break
    if pos != len(text):
        raise TreeError(f"trailing garbage at {pos} in {text!r}")
    return DecoratedForest(vertices, parent, decoration)
