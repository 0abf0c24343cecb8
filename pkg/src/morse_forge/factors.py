"""Concrete factor groups with exact word metrics.

Supported kinds: the integer line, integer lattices of dimension >= 2,
free groups, and finite groups given by a full multiplication table.
These four admit exact distances, exact geodesic enumeration and (for
the line and free groups) boundaries made of eventually periodic
directions, so nothing downstream needs approximation or a word-problem
solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import CapExceeded, MixedFactor, NoBoundary

LINE = "line"
LATTICE = "lattice"
FREE = "free"
FINITE = "finite"

# A letter is a signed base-generator index.
Letter = tuple[int, int]

_FINITE_ASSOC_LIMIT = 64  # full associativity check is cubic in the order

_DEFAULT_FREE_NAMES = ("x", "y", "z", "w")


def _invert_letter(letter: Letter) -> Letter:
    base, sign = letter
    return (base, -sign)


def _reduce_runs(runs) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for base, exp in runs:
        if exp == 0:
            continue
        if out and out[-1][0] == base:
            out[-1][1] += exp
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([base, exp])
    return tuple((b, e) for b, e in out)


def _runs_to_letters(runs) -> tuple[Letter, ...]:
    letters: list[Letter] = []
    for base, exp in runs:
        sign = 1 if exp > 0 else -1
        letters.extend((base, sign) for _ in range(abs(exp)))
    return tuple(letters)


@dataclass(frozen=True)
class Generator:
    """One directed edge label of a factor Cayley graph."""

    symbol: str
    base: int
    sign: int


@dataclass(frozen=True)
class FactorSpec:
    """A factor group: identifier, kind and kind-specific data.

    ``names`` lists the base generator names; the full generating set is
    closed under formal inversion.  For the finite kind, ``table`` is a
    full multiplication table over element indices and ``gen_elems``
    lists the generating element indices (closed under inversion).
    """

    id: str
    kind: str
    names: tuple[str, ...]
    dim: int = 0
    rank: int = 0
    table: tuple[tuple[int, ...], ...] = ()
    gen_elems: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("factor id must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be distinct")
        if self.kind == LINE:
            if len(self.names) != 1:
                raise ValueError("the integer line has exactly one base generator")
        elif self.kind == LATTICE:
            if self.dim < 2:
                raise ValueError("lattice dimension must be >= 2 (use integer_line for rank one)")
            if len(self.names) != self.dim:
                raise ValueError("need one generator name per lattice dimension")
        elif self.kind == FREE:
            if self.rank < 1:
                raise ValueError("free rank must be >= 1")
            if len(self.names) != self.rank:
                raise ValueError("need one generator name per free rank")
        elif self.kind == FINITE:
            _validate_finite(self)
        else:
            raise ValueError(f"unknown factor kind {self.kind!r}")

    # -- constructors ---------------------------------------------------

    @classmethod
    def integer_line(cls, id: str, name: str = "x") -> "FactorSpec":
        return cls(id=id, kind=LINE, names=(name,))

    @classmethod
    def integer_lattice(cls, id: str, dim: int, names=None) -> "FactorSpec":
        names = tuple(names) if names else tuple(f"a{i + 1}" for i in range(dim))
        return cls(id=id, kind=LATTICE, names=names, dim=dim)

    @classmethod
    def free_group(cls, id: str, rank: int, names=None) -> "FactorSpec":
        if names is None:
            if rank <= len(_DEFAULT_FREE_NAMES):
                names = _DEFAULT_FREE_NAMES[:rank]
            else:
                names = tuple(f"x{i + 1}" for i in range(rank))
        return cls(id=id, kind=FREE, names=tuple(names), rank=rank)

    @classmethod
    def finite_table(cls, id: str, table, generators, names=None) -> "FactorSpec":
        table = tuple(tuple(row) for row in table)
        generators = tuple(generators)
        names = tuple(names) if names else tuple(f"g{i + 1}" for i in range(len(generators)))
        return cls(id=id, kind=FINITE, names=names, table=table, gen_elems=generators)

    # -- elements --------------------------------------------------------

    def identity(self) -> "FactorElement":
        if self.kind == LINE:
            return FactorElement(self, 0)
        if self.kind == LATTICE:
            return FactorElement(self, (0,) * self.dim)
        if self.kind == FREE:
            return FactorElement(self, ())
        return FactorElement(self, _finite_identity(self))

    def make_element(self, payload) -> "FactorElement":
        """Validating element constructor; payload must be canonical."""
        if self.kind == LINE:
            if not isinstance(payload, int):
                raise ValueError("line elements are integers")
        elif self.kind == LATTICE:
            payload = tuple(payload)
            if len(payload) != self.dim or not all(isinstance(c, int) for c in payload):
                raise ValueError("lattice elements are integer vectors of the right dimension")
        elif self.kind == FREE:
            payload = tuple((b, e) for b, e in payload)
            for i, (b, e) in enumerate(payload):
                if not (0 <= b < self.rank) or e == 0:
                    raise ValueError("free elements are reduced non-trivial runs")
                if i and payload[i - 1][0] == b:
                    raise ValueError("adjacent runs must use different generators")
        else:
            if not isinstance(payload, int) or not (0 <= payload < len(self.table)):
                raise ValueError("finite elements are table indices")
        return FactorElement(self, payload)

    def power(self, base: int, k: int) -> "FactorElement":
        """The k-th power of the given base generator."""
        if not (0 <= base < len(self.generators_base_count())):
            raise ValueError("generator index out of range")
        if k == 0:
            return self.identity()
        if self.kind == LINE:
            return FactorElement(self, k)
        if self.kind == LATTICE:
            vec = [0] * self.dim
            vec[base] = k
            return FactorElement(self, tuple(vec))
        if self.kind == FREE:
            return FactorElement(self, ((base, k),))
        gen = self.gen_elems[base] if k > 0 else _finite_inverses(self)[self.gen_elems[base]]
        out = _finite_identity(self)
        for _ in range(abs(k)):
            out = self.table[out][gen]
        return FactorElement(self, out)

    def generators_base_count(self) -> tuple[int, ...]:
        if self.kind == LINE:
            return (0,)
        if self.kind == LATTICE:
            return tuple(range(self.dim))
        if self.kind == FREE:
            return tuple(range(self.rank))
        return tuple(range(len(self.gen_elems)))

    def generators(self) -> tuple[Generator, ...]:
        return _generators(self)

    def generator_element(self, gen: Generator) -> "FactorElement":
        if self.kind == FINITE:
            elem = self.gen_elems[gen.base]
            if gen.sign < 0:
                elem = _finite_inverses(self)[elem]
            return FactorElement(self, elem)
        return self.power(gen.base, gen.sign)

    def has_boundary(self) -> bool:
        return self.kind in (LINE, FREE)

    # -- presentation -----------------------------------------------------

    def format_element(self, x: "FactorElement") -> str:
        payload = x.payload
        if self.kind == LINE:
            return _power_token(self.names[0], payload) if payload else "e"
        if self.kind == LATTICE:
            parts = [_power_token(self.names[i], c) for i, c in enumerate(payload) if c]
            return " ".join(parts) if parts else "e"
        if self.kind == FREE:
            if not payload:
                return "e"
            return " ".join(_power_token(self.names[b], e) for b, e in payload)
        if x.is_identity():
            return "e"
        path = first_geodesic(self.identity(), x)
        symbols = []
        prev = self.identity()
        for cur in path[1:]:
            for gen in self.generators():
                if self.table[prev.payload][self.generator_element(gen).payload] == cur.payload:
                    symbols.append(gen.symbol)
                    break
            prev = cur
        return " ".join(symbols)

    def element_sort_key(self, x: "FactorElement"):
        payload = x.payload
        if self.kind == LINE:
            return (abs(payload), 0 if payload >= 0 else 1)
        if self.kind == LATTICE:
            return (sum(abs(c) for c in payload), payload)
        if self.kind == FREE:
            letters = _runs_to_letters(payload)
            return (len(letters), tuple((b, 0 if s > 0 else 1) for b, s in letters))
        return (_finite_norms(self)[payload], payload)


def _power_token(name: str, exp: int) -> str:
    return name if exp == 1 else f"{name}^{exp}"


def _validate_finite(spec: FactorSpec) -> None:
    n = len(spec.table)
    if n == 0 or any(len(row) != n for row in spec.table):
        raise ValueError("finite table must be square and non-empty")
    if any(not (0 <= v < n) for row in spec.table for v in row):
        raise ValueError("finite table entries out of range")
    ident = None
    for e in range(n):
        if all(spec.table[e][j] == j and spec.table[j][e] == j for j in range(n)):
            ident = e
            break
    if ident is None:
        raise ValueError("finite table has no identity")
    for i in range(n):
        if not any(spec.table[i][j] == ident and spec.table[j][i] == ident for j in range(n)):
            raise ValueError(f"finite table element {i} has no inverse")
    if n > _FINITE_ASSOC_LIMIT:
        raise ValueError(f"finite table order {n} above associativity-check limit {_FINITE_ASSOC_LIMIT}")
    t = spec.table
    for a, b, c in itertools.product(range(n), repeat=3):
        if t[t[a][b]][c] != t[a][t[b][c]]:
            raise ValueError(f"finite table is not associative at ({a},{b},{c})")
    if not spec.gen_elems:
        raise ValueError("finite factor needs at least one generator element")
    if any(not (0 <= g < n) for g in spec.gen_elems):
        raise ValueError("finite generator index out of range")
    if len(set(spec.gen_elems)) != len(spec.gen_elems):
        raise ValueError("finite generator elements must be distinct")
    if len(spec.names) != len(spec.gen_elems):
        raise ValueError("need one name per finite generator element")
    inv = _finite_table_inverses(spec.table, ident)
    for g in spec.gen_elems:
        if inv[g] not in spec.gen_elems:
            raise ValueError("finite generator set must be closed under inversion")
    # connectivity: the word metric must be total
    norms = _bfs_norms(spec.table, ident, spec.gen_elems, inv)
    if any(d is None for d in norms):
        raise ValueError("finite generator set does not generate the group")


def _finite_table_inverses(table, ident) -> tuple[int, ...]:
    n = len(table)
    out = []
    for i in range(n):
        out.append(next(j for j in range(n) if table[i][j] == ident and table[j][i] == ident))
    return tuple(out)


def _bfs_norms(table, ident, gens, inv):
    n = len(table)
    acting = sorted({g for g in gens} | {inv[g] for g in gens})
    norms: list[int | None] = [None] * n
    norms[ident] = 0
    frontier = [ident]
    while frontier:
        nxt = []
        for v in frontier:
            for g in acting:
                w = table[v][g]
                if norms[w] is None:
                    norms[w] = norms[v] + 1
                    nxt.append(w)
        frontier = nxt
    return norms


@lru_cache(maxsize=None)
def _finite_identity(spec: FactorSpec) -> int:
    n = len(spec.table)
    for e in range(n):
        if all(spec.table[e][j] == j for j in range(n)):
            return e
    raise ValueError("no identity")


@lru_cache(maxsize=None)
def _finite_inverses(spec: FactorSpec) -> tuple[int, ...]:
    return _finite_table_inverses(spec.table, _finite_identity(spec))


@lru_cache(maxsize=None)
def _finite_norms(spec: FactorSpec) -> tuple[int, ...]:
    norms = _bfs_norms(spec.table, _finite_identity(spec), spec.gen_elems, _finite_inverses(spec))
    return tuple(norms)


@lru_cache(maxsize=None)
def _generators(spec: FactorSpec) -> tuple[Generator, ...]:
    gens: list[Generator] = []
    if spec.kind == FINITE:
        # one directed label per generating element; involutions appear once
        for i, _g in enumerate(spec.gen_elems):
            gens.append(Generator(spec.names[i], i, 1))
        return tuple(gens)
    for base, name in enumerate(spec.names):
        gens.append(Generator(name, base, 1))
        gens.append(Generator(f"{name}^-1", base, -1))
    return tuple(gens)


@dataclass(frozen=True)
class FactorElement:
    """An element of a factor group in canonical form."""

    spec: FactorSpec
    payload: object

    @property
    def factor(self) -> str:
        return self.spec.id

    def is_identity(self) -> bool:
        return self == self.spec.identity()

    def __mul__(self, other: "FactorElement") -> "FactorElement":
        return multiply(self, other)

    def inverse(self) -> "FactorElement":
        spec = self.spec
        if spec.kind == LINE:
            return FactorElement(spec, -self.payload)
        if spec.kind == LATTICE:
            return FactorElement(spec, tuple(-c for c in self.payload))
        if spec.kind == FREE:
            return FactorElement(spec, tuple((b, -e) for b, e in reversed(self.payload)))
        return FactorElement(spec, _finite_inverses(spec)[self.payload])

    def norm(self) -> int:
        spec = self.spec
        if spec.kind == LINE:
            return abs(self.payload)
        if spec.kind == LATTICE:
            return sum(abs(c) for c in self.payload)
        if spec.kind == FREE:
            return sum(abs(e) for _b, e in self.payload)
        return _finite_norms(spec)[self.payload]

    def sort_key(self):
        return self.spec.element_sort_key(self)

    def __repr__(self) -> str:
        return self.spec.format_element(self)


def _same_factor(x: FactorElement, y: FactorElement) -> FactorSpec:
    if x.spec != y.spec:
        raise MixedFactor(f"elements of {x.spec.id!r} and {y.spec.id!r} cannot be combined")
    return x.spec


def multiply(x: FactorElement, y: FactorElement) -> FactorElement:
    spec = _same_factor(x, y)
    if spec.kind == LINE:
        return FactorElement(spec, x.payload + y.payload)
    if spec.kind == LATTICE:
        return FactorElement(spec, tuple(a + b for a, b in zip(x.payload, y.payload)))
    if spec.kind == FREE:
        return FactorElement(spec, _reduce_runs(itertools.chain(x.payload, y.payload)))
    return FactorElement(spec, spec.table[x.payload][y.payload])


def distance(x: FactorElement, y: FactorElement) -> int:
    _same_factor(x, y)
    return (x.inverse() * y).norm()


def step(x: FactorElement, gen: Generator) -> FactorElement:
    return multiply(x, x.spec.generator_element(gen))


def geodesics(x: FactorElement, y: FactorElement, cap: int | None = None):
    """All geodesic vertex paths from x to y, in generator-index order."""
    spec = _same_factor(x, y)
    paths: list[tuple[FactorElement, ...]] = []
    count = 0
    gens = spec.generators()

    def rec(cur: FactorElement, acc: list[FactorElement], remaining: int):
        nonlocal count
        if remaining == 0:
            count += 1
            if cap is None or count <= cap:
                paths.append(tuple(acc))
            return
        for gen in gens:
            nxt = step(cur, gen)
            if distance(nxt, y) == remaining - 1:
                acc.append(nxt)
                rec(nxt, acc, remaining - 1)
                acc.pop()

    rec(x, [x], distance(x, y))
    if cap is not None and count > cap:
        raise CapExceeded(count)
    return paths


def first_geodesic(x: FactorElement, y: FactorElement) -> tuple[FactorElement, ...]:
    """The lexicographically first geodesic from x to y (greedy, linear time)."""
    spec = _same_factor(x, y)
    gens = spec.generators()
    path = [x]
    cur = x
    remaining = distance(x, y)
    while remaining:
        for gen in gens:
            nxt = step(cur, gen)
            if distance(nxt, y) == remaining - 1:
                path.append(nxt)
                cur = nxt
                remaining -= 1
                break
        else:
            raise RuntimeError("no distance-decreasing step; metric is inconsistent")
    return tuple(path)


@dataclass(frozen=True)
class BoundaryPoint:
    """An eventually periodic boundary direction of a factor group.

    Stored as (prefix, repeating block) over signed generator letters, in
    the canonical form with the shortest prefix and a primitive block.
    For the integer line the two directions reduce to a bare sign.
    """

    spec: FactorSpec
    prefix: tuple[Letter, ...]
    block: tuple[Letter, ...]

    def __post_init__(self):
        if not self.spec.has_boundary():
            raise NoBoundary(f"factor {self.spec.id!r} ({self.spec.kind}) has no boundary directions")
        if not self.block:
            raise ValueError("repeating block must be non-empty")
        bases = self.spec.generators_base_count()
        for b, s in itertools.chain(self.prefix, self.block):
            if b not in bases or s not in (1, -1):
                raise ValueError("letters must be signed base-generator indices")
        word = self.prefix + self.block + self.block
        if any(word[i] == _invert_letter(word[i + 1]) for i in range(len(word) - 1)):
            raise ValueError("unrolled word is not reduced")
        # canonical form: nothing to absorb, block primitive
        if self.prefix and self.prefix[-1] == self.block[-1]:
            raise ValueError("prefix tail must be absorbed into the block (use make)")
        for d in range(1, len(self.block)):
            if len(self.block) % d == 0 and self.block == self.block[:d] * (len(self.block) // d):
                raise ValueError("block must be primitive (use make)")

    @classmethod
    def make(cls, spec: FactorSpec, prefix, block) -> "BoundaryPoint":
        prefix = list(prefix)
        block = list(block)
        while prefix and block and tuple(prefix[-1]) == tuple(block[-1]):
            last = block.pop()
            block.insert(0, last)
            prefix.pop()
        block_t = tuple(tuple(l) for l in block)
        for d in range(1, len(block_t)):
            if len(block_t) % d == 0 and block_t == block_t[:d] * (len(block_t) // d):
                block_t = block_t[:d]
                break
        return cls(spec, tuple(tuple(l) for l in prefix), block_t)

    @classmethod
    def line_end(cls, spec: FactorSpec, sign: int) -> "BoundaryPoint":
        if spec.kind not in (LINE, FREE):
            raise NoBoundary(f"factor {spec.id!r} has no line ends")
        return cls(spec, (), ((0, 1 if sign > 0 else -1),))

    @property
    def sign(self) -> int:
        if self.prefix:
            raise ValueError("sign is only defined for bare directions")
        return self.block[0][1]

    def letters(self, n: int) -> tuple[Letter, ...]:
        out = list(self.prefix[:n])
        i = 0
        while len(out) < n:
            out.append(self.block[i % len(self.block)])
            i += 1
        return tuple(out)

    def realization(self, depth: int) -> tuple[FactorElement, ...]:
        """The geodesic ray prefix of the given length representing this direction."""
        verts = [self.spec.identity()]
        runs: list[list[int]] = []
        for base, sign in self.letters(depth):
            if runs and runs[-1][0] == base:
                runs[-1][1] += sign
            else:
                runs.append([base, sign])
            if self.spec.kind == LINE:
                verts.append(FactorElement(self.spec, runs[0][1]))
            else:
                verts.append(FactorElement(self.spec, tuple((b, e) for b, e in runs)))
        return tuple(verts)

    def format(self) -> str:
        if self.spec.kind == LINE and not self.prefix:
            return "+inf" if self.sign > 0 else "-inf"
        names = self.spec.names

        def text(letters):
            if not letters:
                return "e"
            return " ".join(_power_token(names[b], s) for b, s in letters)

        return f"{text(self.prefix)}~{text(self.block)}"


def boundary_ray(z: BoundaryPoint, depth: int) -> tuple[FactorElement, ...]:
    return z.realization(depth)


@dataclass(frozen=True)
class FactorSpace:
    """Adapter giving a factor group the shared metric-space interface."""

    spec: FactorSpec

    def identity(self) -> FactorElement:
        return self.spec.identity()

    def generators(self):
        return self.spec.generators()

    def step(self, x: FactorElement, gen: Generator) -> FactorElement:
        return step(x, gen)

    def distance(self, x: FactorElement, y: FactorElement) -> int:
        return distance(x, y)

    def geodesics(self, x, y, cap=None):
        return geodesics(x, y, cap)

    def first_geodesic(self, x, y):
        return first_geodesic(x, y)

    def sort_key(self, x: FactorElement):
        return x.sort_key()

    def format(self, x: FactorElement) -> str:
        return self.spec.format_element(x)
