"""Normal-form word algebra for a free product of two factor groups.

A word is an alternating sequence of non-trivial factor elements
(syllables); the empty sequence is the identity.  The product group is
generated by the union of the factor generating sets, and the word
metric decomposes as the sum of the factor metrics over syllables, which
is what makes every operation here exact.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache

from . import factors
from .errors import CapExceeded, EmptyWord, ParseError

_TOKEN_RE = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?$")


@dataclass(frozen=True)
class Word:
    """A free-product element as its alternating reduced syllable sequence."""

    syllables: tuple[factors.FactorElement, ...]

    def __post_init__(self):
        for i, s in enumerate(self.syllables):
            if s.is_identity():
                raise ValueError("syllables must be non-trivial")
            if i and self.syllables[i - 1].spec.id == s.spec.id:
                raise ValueError("adjacent syllables must alternate factors")

    def is_identity(self) -> bool:
        return not self.syllables

    def __len__(self) -> int:
        return len(self.syllables)

    def __repr__(self) -> str:
        if not self.syllables:
            return "e"
        return " ".join(s.spec.format_element(s) for s in self.syllables)


@dataclass(frozen=True)
class ProductGenerator:
    symbol: str
    factor: str
    element: factors.FactorElement


@dataclass(frozen=True)
class FreeProduct:
    """Shared context for words over the free product of two factors."""

    a: factors.FactorSpec
    b: factors.FactorSpec

    def __post_init__(self):
        if self.a.id == self.b.id:
            raise ValueError("factor ids must differ")
        if set(self.a.names) & set(self.b.names):
            raise ValueError("generator names of the two factors must be disjoint")

    # -- construction ---------------------------------------------------

    def identity(self) -> Word:
        return Word(())

    def embed(self, x: factors.FactorElement) -> Word:
        self.spec_of(x.factor)
        return Word(()) if x.is_identity() else Word((x,))

    def word(self, syllables) -> Word:
        syllables = tuple(syllables)
        for s in syllables:
            self.spec_of(s.factor)
        return Word(syllables)

    def spec_of(self, factor_id: str) -> factors.FactorSpec:
        if factor_id == self.a.id:
            return self.a
        if factor_id == self.b.id:
            return self.b
        raise ValueError(f"unknown factor id {factor_id!r}")

    def other(self, factor_id: str) -> factors.FactorSpec:
        return self.b if factor_id == self.a.id else self.a

    # -- algebra ----------------------------------------------------------

    def multiply(self, u: Word, v: Word) -> Word:
        out = list(u.syllables)
        for s in v.syllables:
            if out and out[-1].spec.id == s.spec.id:
                merged = out.pop() * s
                if not merged.is_identity():
                    out.append(merged)
            else:
                out.append(s)
        return Word(tuple(out))

    def inverse(self, u: Word) -> Word:
        return Word(tuple(s.inverse() for s in reversed(u.syllables)))

    def syllable_length(self, w: Word) -> int:
        """Length under the alternating-pair counting convention.

        Sequences are padded to start with the first factor; a leading
        second-factor syllable therefore counts one extra slot.  The
        identity has length zero.
        """
        if not w.syllables:
            return 0
        pad = 1 if w.syllables[0].factor == self.b.id else 0
        return len(w.syllables) + pad

    def prefix_vertices(self, w: Word) -> list[Word]:
        """Proper syllable-prefix products of w (excluding e and w itself).

        Every path from e to w must visit each of these vertices.
        """
        if w.is_identity():
            raise EmptyWord("the identity has no prefix vertices")
        return [Word(w.syllables[:i]) for i in range(1, len(w.syllables))]

    def in_shadow(self, w: Word, v: Word) -> bool:
        """True iff v's syllable sequence strictly extends w's."""
        m = len(w.syllables)
        return len(v.syllables) > m and v.syllables[:m] == w.syllables

    def project_to_factor(self, v: Word, factor_id: str) -> factors.FactorElement:
        """First syllable of v in the target factor, or its identity.

        Collapsing each shadow to its root makes this the vertex part of
        the retraction of the product graph onto the factor copy.
        """
        spec = self.spec_of(factor_id)
        if v.syllables and v.syllables[0].factor == factor_id:
            return v.syllables[0]
        return spec.identity()

    # -- metric -----------------------------------------------------------

    def norm(self, w: Word) -> int:
        return sum(s.norm() for s in w.syllables)

    def distance(self, u: Word, v: Word) -> int:
        return self.norm(self.multiply(self.inverse(u), v))

    # -- space interface ----------------------------------------------------

    def generators(self) -> tuple[ProductGenerator, ...]:
        return _product_generators(self)

    def step(self, w: Word, gen: ProductGenerator) -> Word:
        return self.multiply(w, self.embed(gen.element))

    def geodesics(self, u: Word, v: Word, cap: int | None = None) -> list[tuple[Word, ...]]:
        """All geodesic vertex paths u -> v, ordered syllable-lexicographically."""
        w = self.multiply(self.inverse(u), v)
        choices = []
        total = 1
        for s in w.syllables:
            segs = factors.geodesics(s.spec.identity(), s)
            choices.append(segs)
            total *= len(segs)
        if cap is not None and total > cap:
            raise CapExceeded(total)
        paths = []
        for combo in itertools.product(*choices):
            verts = [u]
            base = u
            for seg in combo:
                for elt in seg[1:]:
                    verts.append(self.multiply(base, self.embed(elt)))
                base = verts[-1]
            paths.append(tuple(verts))
        return paths

    def first_geodesic(self, u: Word, v: Word) -> tuple[Word, ...]:
        w = self.multiply(self.inverse(u), v)
        verts = [u]
        base = u
        for s in w.syllables:
            seg = factors.first_geodesic(s.spec.identity(), s)
            for elt in seg[1:]:
                verts.append(self.multiply(base, self.embed(elt)))
            base = verts[-1]
        return tuple(verts)

    def sort_key(self, w: Word):
        return tuple(
            ((0 if s.factor == self.a.id else 1),) + tuple(_norm_key(s.sort_key()))
            for s in w.syllables
        )

    # -- text -------------------------------------------------------------

    def format_word(self, w: Word) -> str:
        return repr(w)

    def format(self, w: Word) -> str:
        return repr(w)

    def parse(self, text: str) -> Word:
        """Parse whitespace-separated generator tokens with optional ^k powers."""
        word = self.identity()
        for token in text.split():
            if token == "e":
                continue
            m = _TOKEN_RE.match(token)
            if not m:
                raise ParseError(f"bad token {token!r}")
            name, exp = m.group(1), int(m.group(2) or 1)
            spec_base = self._lookup_name(name)
            if spec_base is None:
                raise ParseError(f"unknown generator {name!r}")
            spec, base = spec_base
            word = self.multiply(word, self.embed(spec.power(base, exp)))
        return word

    def _lookup_name(self, name: str):
        for spec in (self.a, self.b):
            if name in spec.names:
                return spec, spec.names.index(name)
        return None


def _norm_key(key) -> tuple:
    # flatten heterogeneous sort keys so tuple comparison never crosses types
    out = []
    for part in key:
        if isinstance(part, tuple):
            out.append(tuple(part))
        else:
            out.append((part,))
    return tuple(out)


@lru_cache(maxsize=None)
def _product_generators(fp: FreeProduct) -> tuple[ProductGenerator, ...]:
    gens = []
    for spec in (fp.a, fp.b):
        for g in spec.generators():
            gens.append(ProductGenerator(g.symbol, spec.id, spec.generator_element(g)))
    return tuple(gens)
