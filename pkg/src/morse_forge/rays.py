"""Truncated geodesic rays and the combinatorial boundary of a free product.

A combinatorial geodesic is either an infinite alternating syllable
sequence (truncated, optionally with a periodic continuation block) or a
finite syllable prefix followed by a boundary direction of the next
factor.  ``realize`` concatenates canonical factor geodesics into an
actual vertex ray; ``decompose`` reads a vertex ray back into maximal
same-factor runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from . import factors, morse
from .errors import (
    BudgetExceeded,
    DepthExceedsContent,
    NoLine,
)
from .words import FreeProduct, Word

FINITE = "finite"
INFINITE = "infinite"


@dataclass(frozen=True)
class TruncatedRay:
    """A geodesic vertex path from the basepoint, with optional provenance
    describing how it extends past the truncation."""

    vertices: tuple
    provenance: object | None = None

    @property
    def depth(self) -> int:
        return len(self.vertices) - 1

    def __len__(self) -> int:
        return len(self.vertices)


def certify_geodesic(space, vertices) -> None:
    e = space.identity()
    for t, v in enumerate(vertices):
        if space.distance(e, v) != t:
            raise ValueError(f"vertex {t} is at distance {space.distance(e, v)}, not {t}")
    for t in range(1, len(vertices)):
        if space.distance(vertices[t - 1], vertices[t]) != 1:
            raise ValueError(f"step {t} is not an edge")


def standard_line(spec: factors.FactorSpec):
    """The canonical bi-infinite geodesic through the basepoint: powers of
    the first generator.  Returns its two ends."""
    if not spec.has_boundary():
        raise NoLine(f"factor {spec.id!r} ({spec.kind}) has no line through the basepoint")
    return (
        factors.BoundaryPoint.line_end(spec, 1),
        factors.BoundaryPoint.line_end(spec, -1),
    )


@dataclass(frozen=True)
class CorrespondingRay:
    """The ray read off the translated standard line of an element.

    ``base_point`` is the closest point of the translated line to the
    basepoint; past ``merge_depth`` the ray runs along the line itself,
    and it passes through the owning element at parameter ``norm``.
    """

    spec: factors.FactorSpec
    element: factors.FactorElement
    base_point: factors.FactorElement
    t_x: int
    merge_depth: int
    direction: factors.BoundaryPoint

    def realize(self, depth: int) -> TruncatedRay:
        return TruncatedRay(self.direction.realization(depth), provenance=self.direction)


def corresponding_ray(spec: factors.FactorSpec, x: factors.FactorElement) -> CorrespondingRay:
    """Construct the ray corresponding to x along the standard line.

    The translated line is x * (first-generator line); its closest point
    to the basepoint is found exactly, and the ray is oriented so that x
    sits at a non-negative parameter.
    """
    if not spec.has_boundary():
        raise NoLine(f"factor {spec.id!r} has no line through the basepoint")
    if x.spec != spec:
        raise ValueError("element does not belong to the factor")
    if spec.kind == factors.LINE:
        n = x.payload
        sign = 1 if n >= 0 else -1
        return CorrespondingRay(
            spec=spec,
            element=x,
            base_point=spec.identity(),
            t_x=abs(n),
            merge_depth=0,
            direction=factors.BoundaryPoint.line_end(spec, sign),
        )
    runs = x.payload
    if runs and runs[-1][0] == 0:
        a = runs[-1][1]
        w_runs = runs[:-1]
    else:
        a = 0
        w_runs = runs
    sign = 1 if a >= 0 else -1
    base = factors.FactorElement(spec, w_runs)
    direction = factors.BoundaryPoint.make(
        spec, factors._runs_to_letters(w_runs), ((0, sign),)
    )
    return CorrespondingRay(
        spec=spec,
        element=x,
        base_point=base,
        t_x=abs(a),
        merge_depth=base.norm(),
        direction=direction,
    )


@dataclass(frozen=True)
class CombRay:
    """A combinatorial geodesic over a free product.

    Syllable positions are 1-based; odd positions belong to the first
    factor, even positions to the second.  Only the first syllable may be
    the identity (it absorbs rays that start in the second factor).
    Finite kind carries a boundary direction of the factor after the last
    syllable; infinite kind may carry a periodic continuation block,
    otherwise it is a bare truncation whose last stored syllable is
    unstable.
    """

    fp: FreeProduct
    kind: str
    syllables: tuple[factors.FactorElement, ...]
    tail: factors.BoundaryPoint | None = None
    repeat: tuple[factors.FactorElement, ...] = ()
    unstable_last: bool = False

    def __post_init__(self):
        for pos, s in enumerate(self.syllables, start=1):
            expected = self._position_spec(pos)
            if s.spec != expected:
                raise ValueError(f"syllable {pos} must lie in factor {expected.id!r}")
            if s.is_identity() and pos != 1:
                raise ValueError("only the first syllable may be the identity")
        n = len(self.syllables)
        if self.kind == FINITE:
            if self.tail is None:
                raise ValueError("finite combinatorial geodesics need a tail direction")
            if self.repeat:
                raise ValueError("finite combinatorial geodesics have no repeat block")
            if self.unstable_last:
                raise ValueError("finite combinatorial geodesics are fully stable")
            if self.tail.spec != self._position_spec(n + 1):
                raise ValueError("tail factor must alternate with the last syllable")
        elif self.kind == INFINITE:
            if self.tail is not None:
                raise ValueError("infinite combinatorial geodesics have no tail")
            if self.repeat:
                if len(self.repeat) % 2:
                    raise ValueError("repeat block must have even length to keep alternation")
                if self.unstable_last:
                    raise ValueError("a repeat block determines every syllable")
                for j, s in enumerate(self.repeat):
                    expected = self._position_spec(n + 1 + j)
                    if s.spec != expected or s.is_identity():
                        raise ValueError("repeat block must alternate non-trivial syllables")
        else:
            raise ValueError(f"unknown combinatorial kind {self.kind!r}")

    def _position_spec(self, pos: int) -> factors.FactorSpec:
        return self.fp.a if pos % 2 else self.fp.b

    # -- syllable access -------------------------------------------------

    @property
    def stored_length(self) -> int:
        return len(self.syllables)

    @property
    def stable_length(self) -> int:
        if self.unstable_last:
            return len(self.syllables) - 1
        return len(self.syllables)

    def syllable_at(self, pos: int) -> factors.FactorElement | None:
        """Syllable at a 1-based position, consulting the repeat block."""
        if pos <= len(self.syllables):
            return self.syllables[pos - 1]
        if self.kind == INFINITE and self.repeat:
            return self.repeat[(pos - len(self.syllables) - 1) % len(self.repeat)]
        return None

    def length_at_least(self, k: int) -> bool:
        """Is the (possibly infinite) syllable count certifiably >= k?"""
        if self.kind == INFINITE:
            if self.repeat:
                return True
            if self.stable_length >= k:
                return True
            raise BudgetExceeded(
                f"bare truncation with {self.stable_length} stable syllables cannot certify length >= {k}"
            )
        return len(self.syllables) >= k

    def vertex(self, pos: int) -> Word:
        """Partial product of the first ``pos`` syllables."""
        w = self.fp.identity()
        for i in range(1, pos + 1):
            s = self.syllable_at(i)
            if s is None:
                raise DepthExceedsContent(f"no syllable at position {i}")
            w = self.fp.multiply(w, self.fp.embed(s))
        return w

    def text(self) -> str:
        parts = [self.fp.spec_of(s.factor).format_element(s) for s in self.syllables]
        body = " | ".join(parts) if parts else "e"
        if self.kind == FINITE:
            return f"{body} ; tail={self.tail.format()}"
        if self.repeat:
            rep = " | ".join(self.fp.spec_of(s.factor).format_element(s) for s in self.repeat)
            return f"{body} ; repeat={rep}"
        return body

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "syllables": [self.fp.spec_of(s.factor).format_element(s) for s in self.syllables],
            "unstable_last": self.unstable_last,
        }
        if self.tail is not None:
            out["tail"] = self.tail.format()
        if self.repeat:
            out["repeat"] = [self.fp.spec_of(s.factor).format_element(s) for s in self.repeat]
        return out


def realize(a: CombRay, depth: int, validate: bool = True) -> TruncatedRay:
    """Concatenate canonical per-syllable geodesics into a vertex ray.

    Factor geodesics are chosen lexicographically-first (unique in tree
    factors); the result is certified to be a geodesic unless disabled.
    """
    fp = a.fp
    verts: list[Word] = [fp.identity()]
    base = fp.identity()
    pos = 0
    while len(verts) <= depth:
        pos += 1
        s = a.syllable_at(pos)
        if s is None:
            break
        seg = factors.first_geodesic(s.spec.identity(), s)
        for elt in seg[1:]:
            if len(verts) > depth:
                break
            verts.append(fp.multiply(base, fp.embed(elt)))
        base = fp.multiply(base, fp.embed(s))
    if len(verts) <= depth:
        if a.kind == FINITE:
            for elt in a.tail.realization(depth - len(verts) + 1)[1:]:
                verts.append(fp.multiply(base, fp.embed(elt)))
        else:
            raise DepthExceedsContent(
                f"combinatorial geodesic holds {len(verts) - 1} steps, {depth} requested"
            )
    ray = TruncatedRay(tuple(verts[: depth + 1]), provenance=a)
    if validate:
        certify_geodesic(fp, ray.vertices)
    return ray


def decompose(fp: FreeProduct, ray: TruncatedRay) -> CombRay:
    """Split a vertex ray into maximal same-factor runs.

    Without provenance the result is a bare truncated infinite-kind
    object whose last run is unstable.  With provenance the observed runs
    are validated against it and the fully typed object is returned.
    """
    runs: list[factors.FactorElement] = []
    for prev, cur in zip(ray.vertices, ray.vertices[1:]):
        q = fp.multiply(fp.inverse(prev), cur)
        if len(q.syllables) != 1 or q.syllables[0].norm() != 1:
            raise ValueError("consecutive ray vertices must differ by one generator")
        s = q.syllables[0]
        if runs and runs[-1].factor == s.factor:
            runs[-1] = runs[-1] * s
        else:
            runs.append(s)
    syllables: list[factors.FactorElement] = []
    if runs and runs[0].factor == fp.b.id:
        syllables.append(fp.a.identity())
    syllables.extend(runs)
    observed = tuple(syllables)

    prov = ray.provenance
    if isinstance(prov, CombRay):
        _validate_against(fp, observed, prov)
        return prov
    if isinstance(prov, factors.BoundaryPoint):
        # a factor ray inside the product: all completed runs are stable
        if not observed:
            return CombRay(fp, FINITE, (), tail=prov)
        last = observed[-1]
        if last.spec != prov.spec:
            raise ValueError("provenance tail factor does not match the growing run")
        depth_needed = last.norm()
        real = prov.realization(depth_needed)
        if real[-1] != last:
            raise ValueError("growing run is not a prefix of the provenance tail")
        return CombRay(fp, FINITE, observed[:-1], tail=prov)
    return CombRay(fp, INFINITE, observed, unstable_last=bool(observed))


def _validate_against(fp: FreeProduct, observed, prov: CombRay) -> None:
    if not observed:
        return
    stable = observed[:-1]
    for i, s in enumerate(stable):
        expected = prov.syllable_at(i + 1)
        if expected != s:
            raise ValueError(f"observed syllable {i + 1} disagrees with provenance")
    last = observed[-1]
    pos = len(observed)
    expected = prov.syllable_at(pos)
    if expected is not None:
        ok_full = expected == last
        ok_prefix = (
            expected.spec == last.spec
            and factors.distance(last, expected) == expected.norm() - last.norm()
        )
        if not (ok_full or ok_prefix):
            raise ValueError(f"observed syllable {pos} is not a prefix of the provenance syllable")
    elif prov.kind == FINITE and pos == prov.stored_length + 1:
        real = prov.tail.realization(last.norm())
        if real[-1] != last:
            raise ValueError("growing run is not a prefix of the provenance tail")
    else:
        raise ValueError("observed decomposition runs past the provenance content")


@dataclass(frozen=True)
class CombNeighborhood:
    """Fundamental-system neighborhood of a combinatorial geodesic."""

    center: CombRay
    k: int
    gauge: morse.Gauge

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def comb_neighborhood_member(nbhd: CombNeighborhood, b: CombRay) -> bool:
    """Exact evaluation of the neighborhood definition.

    Infinite centers: prefix agreement on the first k syllables.  Finite
    centers: same syllables, then either the next syllable lies in the
    filled depth-k neighborhood of the tail direction, or the tails are
    depth-k close.  Tail tests run in the factor.
    """
    a, k, gauge = nbhd.center, nbhd.k, nbhd.gauge
    if a.fp != b.fp:
        raise ValueError("combinatorial geodesics over different products")
    if a.kind == INFINITE:
        if not b.length_at_least(k):
            return False
        for i in range(1, k + 1):
            ua = a.syllable_at(i)
            if ua is None:
                raise BudgetExceeded(f"center holds no syllable at position {i}")
            ub = b.syllable_at(i)
            if ub is None:
                raise BudgetExceeded(f"candidate holds no syllable at position {i}")
            if ua != ub:
                return False
        return True
    la = a.stored_length
    if not b.length_at_least(la):
        return False
    for i in range(1, la + 1):
        ub = b.syllable_at(i)
        if ub is None:
            raise BudgetExceeded(f"candidate holds no syllable at position {i}")
        if ub != a.syllables[i - 1]:
            return False
    tail_spec = a.tail.spec
    space = factors.FactorSpace(tail_spec)
    center_ray = a.tail.realization(k)
    if _comb_length_exceeds(b, la):
        u_next = b.syllable_at(la + 1)
        if u_next is None:
            raise BudgetExceeded("candidate next syllable unavailable")
        unstable_next = b.unstable_last and la + 1 == b.stored_length
        if unstable_next and u_next.norm() < k:
            # a growing syllable below the depth may still enter later
            raise BudgetExceeded("candidate next syllable is unstable and too short to classify")
        nb = morse.Neighborhood.around_ray(gauge, k, center_ray, filled=True)
        return morse.neighborhood_member(space, nb, u_next)
    if b.kind != FINITE:
        raise BudgetExceeded("bare truncation of the same length cannot be classified")
    nb = morse.Neighborhood.around_ray(gauge, k, center_ray, filled=False)
    return morse.neighborhood_member(space, nb, b.tail.realization(k))


def _comb_length_exceeds(b: CombRay, l: int) -> bool:
    if b.kind == INFINITE:
        return True
    return b.stored_length > l


def parse_comb(fp: FreeProduct, text: str) -> CombRay:
    """Parse the pipe-separated syllable syntax.

    ``x | y^2 ; tail=+inf`` gives a finite kind, ``x | y ; repeat=x | y``
    a periodic infinite kind, and a bare syllable list a truncation whose
    last syllable is unstable.
    """
    from .errors import ParseError

    body, _, rest = text.partition(";")
    rest = rest.strip()
    syllables: list[factors.FactorElement] = []
    for pos, chunk in enumerate(
        [c for c in (p.strip() for p in body.split("|")) if c], start=1
    ):
        spec = fp.a if pos % 2 else fp.b
        word = fp.parse(chunk)
        if word.is_identity():
            elt = spec.identity()
        elif len(word.syllables) == 1 and word.syllables[0].spec == spec:
            elt = word.syllables[0]
        else:
            raise ParseError(f"syllable {pos} ({chunk!r}) is not a {spec.id} element")
        syllables.append(elt)
    if syllables and syllables[0].is_identity() and len(syllables) == 1 and not rest:
        syllables = []
    if not rest:
        return CombRay(fp, INFINITE, tuple(syllables), unstable_last=bool(syllables))
    key, _, value = rest.partition("=")
    key, value = key.strip(), value.strip()
    if key == "tail":
        n = len(syllables)
        spec = fp.a if (n + 1) % 2 else fp.b
        return CombRay(fp, FINITE, tuple(syllables), tail=_parse_tail(spec, value))
    if key == "repeat":
        block = []
        for j, chunk in enumerate(v.strip() for v in value.split("|")):
            pos = len(syllables) + 1 + j
            spec = fp.a if pos % 2 else fp.b
            word = fp.parse(chunk)
            if len(word.syllables) != 1 or word.syllables[0].spec != spec:
                raise ParseError(f"repeat entry {chunk!r} is not a {spec.id} element")
            block.append(word.syllables[0])
        return CombRay(fp, INFINITE, tuple(syllables), repeat=tuple(block))
    raise ParseError(f"unknown trailer {key!r}")


def _parse_tail(spec: factors.FactorSpec, value: str) -> factors.BoundaryPoint:
    from .errors import ParseError

    if value == "+inf":
        return factors.BoundaryPoint.line_end(spec, 1)
    if value == "-inf":
        return factors.BoundaryPoint.line_end(spec, -1)
    prefix_text, sep, block_text = value.partition("~")
    if not sep:
        raise ParseError(f"bad tail {value!r}")
    space = FreeProduct(spec, factors.FactorSpec.integer_line("__pad__", "__t__"))

    def letters(t):
        word = space.parse(t)
        if word.is_identity():
            return ()
        if len(word.syllables) != 1 or word.syllables[0].spec != spec:
            raise ParseError(f"tail part {t!r} is not a {spec.id} word")
        return factors._runs_to_letters(word.syllables[0].payload)

    return factors.BoundaryPoint.make(spec, letters(prefix_text), letters(block_text))


# -- population -----------------------------------------------------------


def comb_population(
    fp: FreeProduct,
    max_len: int = 3,
    max_norm: int = 2,
    include_infinite: bool = True,
    repeat_norm: int = 1,
    max_infinite_prefix: int = 2,
) -> list[CombRay]:
    """Deterministic population of combinatorial geodesics for exhaustive
    checks: all finite kinds up to the given syllable count and norms,
    plus periodic infinite kinds."""

    def elements(spec, include_identity):
        out = [spec.identity()] if include_identity else []
        seen = {spec.identity()}
        for base in spec.generators_base_count():
            for mag in range(1, max_norm + 1):
                for sgn in (1, -1):
                    x = spec.power(base, sgn * mag)
                    if x not in seen:
                        seen.add(x)
                        out.append(x)
        return sorted(out, key=lambda x: x.sort_key())

    def spec_at(pos):
        return fp.a if pos % 2 else fp.b

    population: list[CombRay] = []
    for n in range(0, max_len + 1):
        pools = []
        for pos in range(1, n + 1):
            pools.append(elements(spec_at(pos), include_identity=(pos == 1)))
        for combo in itertools.product(*pools):
            if any(s.is_identity() for s in combo[1:]):
                continue
            tail_spec = spec_at(n + 1)
            if not tail_spec.has_boundary():
                continue
            for tail in standard_line(tail_spec):
                population.append(CombRay(fp, FINITE, combo, tail=tail))
    if include_infinite:
        for n in range(0, max_infinite_prefix + 1):
            pools = []
            for pos in range(1, n + 1):
                pools.append(elements(spec_at(pos), include_identity=(pos == 1)))
            blocks = []
            first = [
                x
                for x in elements(spec_at(n + 1), include_identity=False)
                if x.norm() <= repeat_norm
            ]
            second = [
                x
                for x in elements(spec_at(n + 2), include_identity=False)
                if x.norm() <= repeat_norm
            ]
            for u, v in itertools.product(first, second):
                blocks.append((u, v))
            for combo in itertools.product(*pools):
                if any(s.is_identity() for s in combo[1:]):
                    continue
                for block in blocks:
                    population.append(CombRay(fp, INFINITE, combo, repeat=block))
    return population
