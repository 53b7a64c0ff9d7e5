"""Hopf algebra of decorated rooted forests and the shuffle algebra.

Everything in this module is exact: coefficients are integers, character
oracles use :class:`fractions.Fraction`.  Floating point belongs to the
analytic layers, never here.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .trees import (Cut, DecoratedForest, TreeError, admissible_cuts, chop,
                    forest_product, format_forest, multiple_cuts, trunk)

#: The empty forest, unit element of the forest algebra.
EMPTY = DecoratedForest([], {}, {}, _allow_empty=True)

Word = tuple[int, ...]
EMPTY_WORD: Word = ()


class HopfError(ValueError):
    pass


def forest_mul(a: DecoratedForest, b: DecoratedForest) -> DecoratedForest:
    """Commutative product: disjoint union of forests (unit = EMPTY)."""
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    return forest_product(a, b)


class HopfVector:
    """Integer formal sum of decorated forests (keys are canonical forests)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[DecoratedForest, int] | None = None):
        self.terms: dict[DecoratedForest, int] = {}
        if terms:
            for f, c in terms.items():
                if c:
                    key = f.canonical() if f.n else EMPTY
                    self.terms[key] = self.terms.get(key, 0) + int(c)
            self.terms = {f: c for f, c in self.terms.items() if c}

    @classmethod
    def zero(cls) -> HopfVector:
        return cls()

    @classmethod
    def unit(cls) -> HopfVector:
        return cls({EMPTY: 1})

    @classmethod
    def of(cls, forest: DecoratedForest, coeff: int = 1) -> HopfVector:
        return cls({forest: coeff})

    def __add__(self, other: HopfVector) -> HopfVector:
        out = dict(self.terms)
        for f, c in other.terms.items():
            out[f] = out.get(f, 0) + c
        return HopfVector(out)

    def __sub__(self, other: HopfVector) -> HopfVector:
        return self + (-1) * other

    def __rmul__(self, scalar: int) -> HopfVector:
        return HopfVector({f: scalar * c for f, c in self.terms.items()})

    def __neg__(self) -> HopfVector:
        return (-1) * self

    def __mul__(self, other: HopfVector) -> HopfVector:
        """Bilinear extension of the forest product."""
        out: dict[DecoratedForest, int] = {}
        for f1, c1 in self.terms.items():
            for f2, c2 in other.terms.items():
                key = forest_mul(f1, f2).canonical() if (f1.n or f2.n) else EMPTY
                out[key] = out.get(key, 0) + c1 * c2
        return HopfVector(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HopfVector):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for f in sorted(self.terms, key=lambda g: g.canonical_key()):
            c = self.terms[f]
            name = "e" if f.n == 0 else format_forest(f)
            bits.append(f"{'+' if c >= 0 else '-'}{abs(c) if abs(c) != 1 else ''}{name}")
        return "".join(bits)


class TensorVector:
    """Integer formal sum of forest pairs (an element of H (x) H)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[DecoratedForest, DecoratedForest], int] | None = None):
        self.terms: dict[tuple[DecoratedForest, DecoratedForest], int] = {}
        if terms:
            for (a, b), c in terms.items():
                if c:
                    key = (a.canonical() if a.n else EMPTY, b.canonical() if b.n else EMPTY)
                    self.terms[key] = self.terms.get(key, 0) + int(c)
            self.terms = {k: c for k, c in self.terms.items() if c}

    def __add__(self, other: TensorVector) -> TensorVector:
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return TensorVector(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorVector):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        def name(f):
            return "e" if f.n == 0 else format_forest(f)

        return " + ".join(f"{c}*{name(a)}(x){name(b)}" for (a, b), c in self.terms.items()) or "0"


def coproduct(h: HopfVector | DecoratedForest) -> TensorVector:
    """Coproduct: e (x) F + F (x) e + sum over admissible cuts of Roo (x) Lea."""
    if isinstance(h, DecoratedForest):
        h = HopfVector.of(h)
    out: dict[tuple[DecoratedForest, DecoratedForest], int] = {}

    def add(a: DecoratedForest, b: DecoratedForest, c: int) -> None:
        key = (a.canonical() if a.n else EMPTY, b.canonical() if b.n else EMPTY)
        out[key] = out.get(key, 0) + c

    for forest, c in h.terms.items():
        if forest.n == 0:
            add(EMPTY, EMPTY, c)
            continue
        add(EMPTY, forest, c)
        add(forest, EMPTY, c)
        from .trees import split
        for cut in admissible_cuts(forest):
            roo, lea = split(forest, cut)
            add(roo, lea, c)
    return TensorVector(out)


def counit(h: HopfVector) -> int:
    """Counit: coefficient of the empty forest."""
    return h.terms.get(EMPTY, 0)


_ANTIPODE_MEMO: dict[tuple, HopfVector] = {}


def antipode(h: HopfVector | DecoratedForest) -> HopfVector:
    """Antipode by the recursion S(T) = -T - sum over cuts of Roo * S(Lea),
    extended multiplicatively to forests and linearly to sums.
    """
    if isinstance(h, DecoratedForest):
        h = HopfVector.of(h)
    out = HopfVector.zero()
    for forest, c in h.terms.items():
        out = out + c * _antipode_forest(forest)
    return out


def _antipode_forest(forest: DecoratedForest) -> HopfVector:
    if forest.n == 0:
        return HopfVector.unit()
    acc = HopfVector.unit()
    for comp in forest.components():
        acc = acc * _antipode_tree(comp)
    return acc


def _antipode_tree(tree: DecoratedForest) -> HopfVector:
    key = tree.canonical_key()
    cached = _ANTIPODE_MEMO.get(key)
    if cached is not None:
        return cached
    from .trees import split
    acc = -1 * HopfVector.of(tree)
    for cut in admissible_cuts(tree):
        roo, lea = split(tree, cut)
        acc = acc - HopfVector.of(roo) * _antipode_forest(lea)
    _ANTIPODE_MEMO[key] = acc
    return acc


def antipode_expanded(h: HopfVector | DecoratedForest) -> HopfVector:
    """Antipode by the closed multiple-cut ('chopping') expansion:
    S(T) = -T - sum over nested cuts of (-1)^(#cut vertices) Roo * (leaf pieces).
    """
    if isinstance(h, DecoratedForest):
        h = HopfVector.of(h)
    out = HopfVector.zero()
    for forest, c in h.terms.items():
        acc = HopfVector.unit()
        if forest.n:
            for comp in forest.components():
                acc = acc * _antipode_tree_expanded(comp)
        out = out + c * acc
    return out


def _antipode_tree_expanded(tree: DecoratedForest) -> HopfVector:
    acc = -1 * HopfVector.of(tree)
    for mc in multiple_cuts(tree):
        sign = (-1) ** sum(len(level) for level in mc.levels)
        roo, pieces = chop(tree, mc)
        term = roo
        for piece in pieces:
            term = forest_mul(term, piece)
        acc = acc - sign * HopfVector.of(term)
    return acc


# -- characters and convolution ------------------------------------------------

class Character:
    """A multiplicative functional on forests: chi(F1*F2) = chi(F1)chi(F2),
    chi(e) = 1.  Built from a value function on trees; values may be exact
    rationals or floats depending on the backing oracle.
    """

    def __init__(self, tree_value: Callable[[DecoratedForest], object]):
        self._tree_value = tree_value
        self._memo: dict[tuple, object] = {}

    def __call__(self, forest: DecoratedForest):
        if forest.n == 0:
            return 1
        key = forest.canonical_key()
        if key not in self._memo:
            value = 1
            for comp in forest.components():
                value = value * self._tree_value(comp)
            self._memo[key] = value
        return self._memo[key]

    def on_vector(self, h: HopfVector):
        return sum((c * self(f) for f, c in h.terms.items()), start=0)


def compose_with_antipode(f: Character) -> Callable[[DecoratedForest], object]:
    """The linear form F -> f(S(F)) (convolution inverse when f is a character)."""
    return lambda forest: f.on_vector(antipode(forest))


def convolve(f: Callable[[DecoratedForest], object],
             g: Callable[[DecoratedForest], object],
             forest: DecoratedForest):
    """Convolution product of two linear forms evaluated on one forest:
    f(F)g(e) + f(e)g(F) + sum over cuts of f(Roo)g(Lea).
    """
    if forest.n == 0:
        return f(EMPTY) * g(EMPTY)
    from .trees import split
    total = f(forest) * g(EMPTY) + f(EMPTY) * g(forest)
    for cut in admissible_cuts(forest):
        roo, lea = split(forest, cut)
        total = total + f(roo) * g(lea)
    return total


# -- shuffle algebra -------------------------------------------------------------

class ShuffleVector:
    """Integer formal sum of words (trunk trees read root to top)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, int] | None = None):
        self.terms: dict[Word, int] = {}
        if terms:
            for w, c in terms.items():
                if c:
                    self.terms[tuple(w)] = self.terms.get(tuple(w), 0) + int(c)
            self.terms = {w: c for w, c in self.terms.items() if c}

    @classmethod
    def of(cls, word: Iterable[int], coeff: int = 1) -> ShuffleVector:
        return cls({tuple(word): coeff})

    def __add__(self, other: ShuffleVector) -> ShuffleVector:
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return ShuffleVector(out)

    def __sub__(self, other: ShuffleVector) -> ShuffleVector:
        return self + (-1) * other

    def __rmul__(self, scalar: int) -> ShuffleVector:
        return ShuffleVector({w: scalar * c for w, c in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ShuffleVector):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return " + ".join(f"{c}*{w}" for w, c in sorted(self.terms.items())) or "0"

    def as_hopf(self) -> HopfVector:
        """Embed into the forest algebra through trunk trees."""
        out = HopfVector.zero()
        for w, c in self.terms.items():
            f = trunk(len(w), list(w)) if w else EMPTY
            out = out + c * HopfVector.of(f)
        return out


def word_to_trunk(word: Word) -> DecoratedForest:
    if not word:
        raise HopfError("empty word is the Sh unit; it has no trunk tree")
    return trunk(len(word), list(word))


def trunk_to_word(tree: DecoratedForest) -> Word:
    """Decorations of a trunk tree read from the root upward."""
    if tree.n == 0:
        return EMPTY_WORD
    v = tree.roots[0]
    if len(tree.roots) != 1:
        raise HopfError("not a trunk tree")
    word = [tree.label(v)]
    while True:
        kids = tree.children(v)
        if not kids:
            break
        if len(kids) > 1:
            raise HopfError("not a trunk tree")
        v = kids[0]
        word.append(tree.label(v))
    return tuple(word)


def shuffle_product(a: Iterable[int], b: Iterable[int]) -> ShuffleVector:
    """Sum over all interleavings keeping the internal order of both words."""
    a, b = tuple(a), tuple(b)
    out: dict[Word, int] = {}
    n, m = len(a), len(b)
    import itertools
    for positions in itertools.combinations(range(n + m), n):
        word: list[int] = [0] * (n + m)
        ai = iter(a)
        bi = iter(b)
        pos = set(positions)
        for i in range(n + m):
            word[i] = next(ai) if i in pos else next(bi)
        w = tuple(word)
        out[w] = out.get(w, 0) + 1
    return ShuffleVector(out)


def sh_antipode(word: Iterable[int]) -> ShuffleVector:
    """Reverse the word and attach the sign (-1)^length."""
    w = tuple(word)
    return ShuffleVector({tuple(reversed(w)): (-1) ** len(w)})


def sh_coproduct(word: Iterable[int]) -> dict[tuple[Word, Word], int]:
    """Deconcatenation coproduct of a word (cuts of its trunk tree)."""
    w = tuple(word)
    out: dict[tuple[Word, Word], int] = {}
    for j in range(len(w) + 1):
        key = (w[:j], w[j:])
        out[key] = out.get(key, 0) + 1
    return out


def linear_extensions(forest: DecoratedForest) -> list[tuple[int, ...]]:
    """All orderings of the vertices compatible with the forest partial order
    (parents before children), as vertex-id sequences.
    """
    placed: list[int] = []
    remaining = set(forest.vertices)
    out: list[tuple[int, ...]] = []

    def ready() -> list[int]:
        return sorted(v for v in remaining
                      if forest.parent.get(v) is None or forest.parent[v] in placed)

    def walk() -> None:
        if not remaining:
            out.append(tuple(placed))
            return
        for v in ready():
            placed.append(v)
            remaining.remove(v)
            walk()
            placed.pop()
            remaining.add(v)

    walk()
    return out


def project_pi(h: HopfVector | DecoratedForest) -> ShuffleVector:
    """Project onto the shuffle algebra: each forest maps to the sum of words
    read along its linear extensions (so products map to shuffle products).
    """
    if isinstance(h, DecoratedForest):
        h = HopfVector.of(h)
    out = ShuffleVector()
    for forest, c in h.terms.items():
        if forest.n == 0:
            out = out + ShuffleVector({EMPTY_WORD: c})
            continue
        acc: dict[Word, int] = {}
        for ext in linear_extensions(forest):
            w = tuple(forest.label(v) for v in ext)
            acc[w] = acc.get(w, 0) + 1
        out = out + c * ShuffleVector(acc)
    return out


def f_rational(forest: DecoratedForest, xi: Mapping[int, Fraction | int]) -> Fraction:
    """The separating rational function: product over vertices of
    1 / (xi_v + sum of xi_w over w connecting to v).

    Multiplicative over components; raises naming the offending vertex when a
    denominator vanishes.
    """
    value = Fraction(1)
    for v in forest.vertices:
        denom = Fraction(xi[v]) + sum((Fraction(xi[w]) for w in forest.above(v)),
                                      start=Fraction(0))
        if denom == 0:
            raise HopfError(f"vanishing denominator at vertex {v}")
        value /= denom
    return value
