"""Surjective hyper-operations (shops) and their algebra.

A shop on ``n`` elements maps each element to a non-empty subset of the
domain so that every element lies in some image.  Images are stored as
bitmasks; the text form lists each image as a sorted digit string, e.g.
``(01|1|12)`` is ``0 -> {0,1}, 1 -> {1}, 2 -> {1,2}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import networkx as nx
import numpy as np

from shelogic import kernels

if TYPE_CHECKING:
    from shelogic.dsm import DSM
    from shelogic.model import Structure

#: Largest domain size enumerated without an explicit override.
ENUMERATION_CAP = 4


class ShopError(ValueError):
    pass


class CapExceeded(ShopError):
    """Requested enumeration is above the configured domain-size cap."""


@dataclass(frozen=True, order=True)
class Shop:
    images: tuple[int, ...]

    def __post_init__(self):
        n = len(self.images)
        if n < 1:
            raise ShopError("a shop needs at least one element")
        full = (1 << n) - 1
        union = 0
        for x, mask in enumerate(self.images):
            if mask <= 0 or mask & ~full:
                raise ShopError(f"image of {x} must be a non-empty subset of 0..{n - 1}")
            union |= mask
        if union != full:
            raise ShopError("shop is not surjective")

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> frozenset[int]:
        return frozenset(_bits(self.images[x]))

    def image(self, x: int) -> tuple[int, ...]:
        return tuple(_bits(self.images[x]))

    def __str__(self) -> str:
        return "(" + "|".join("".join(map(str, _bits(m))) for m in self.images) + ")"

    def __repr__(self) -> str:
        return f"Shop{self}"

    @classmethod
    def parse(cls, text: str) -> "Shop":
        """Parse the ``(01|1|12)`` notation."""
        s = text.strip()
        if not (s.startswith("(") and s.endswith(")")):
            raise ShopError(f"shop literal must be parenthesised: {text!r}")
        parts = s[1:-1].split("|")
        n = len(parts)
        if n > 10:
            raise ShopError("shop literals support at most 10 elements")
        images = []
        for part in parts:
            part = part.strip()
            if not part or not part.isdigit():
                raise ShopError(f"bad image {part!r} in {text!r}")
            mask = 0
            for ch in part:
                y = int(ch)
                if y >= n:
                    raise ShopError(f"element {y} out of range in {text!r}")
                mask |= 1 << y
            images.append(mask)
        return cls(tuple(images))

    @classmethod
    def from_sets(cls, images: Sequence[Iterable[int]]) -> "Shop":
        return cls(tuple(sum(1 << y for y in set(img)) for img in images))


def _bits(mask: int) -> Iterator[int]:
    y = 0
    while mask:
        if mask & 1:
            yield y
        mask >>= 1
        y += 1


def _full(n: int) -> int:
    return (1 << n) - 1


def identity(n: int) -> Shop:
    if n < 1:
        raise ShopError("identity needs n >= 1")
    return Shop(tuple(1 << x for x in range(n)))


def forall_shop(n: int, b: int) -> Shop:
    """``b -> B``, every other element fixed."""
    return Shop(tuple(_full(n) if x == b else 1 << x for x in range(n)))


def exists_shop(n: int, b: int) -> Shop:
    """``x -> {x, b}``."""
    return Shop(tuple((1 << x) | (1 << b) for x in range(n)))


def forall_exists_shop(n: int, b: int, b2: int) -> Shop:
    """``b -> B``, every other element to ``{b2}``."""
    return Shop(tuple(_full(n) if x == b else 1 << b2 for x in range(n)))


def _check_same(g: Shop, f: Shop) -> None:
    if g.n != f.n:
        raise ShopError(f"size mismatch: {g.n} vs {f.n}")


def compose(g: Shop, f: Shop) -> Shop:
    """``g o f``: apply ``f`` first, then ``g`` to every element of the image."""
    _check_same(g, f)
    out = []
    for fx in f.images:
        acc = 0
        for y in _bits(fx):
            acc |= g.images[y]
        out.append(acc)
    return Shop(tuple(out))


def power(f: Shop, r: int) -> Shop:
    if r < 0:
        raise ShopError("power must be non-negative")
    result = identity(f.n)
    base = f
    while r:
        if r & 1:
            result = compose(base, result)
        base = compose(base, base)
        r >>= 1
    return result


def inverse(f: Shop) -> Shop:
    n = f.n
    return Shop(tuple(sum(1 << y for y in range(n) if f.images[y] >> x & 1) for x in range(n)))


def is_subshop(f: Shop, g: Shop) -> bool:
    """Pointwise image inclusion ``f(x) <= g(x)``."""
    _check_same(f, g)
    return all(a & ~b == 0 for a, b in zip(f.images, g.images))


def _submasks(mask: int) -> list[int]:
    out = []
    sub = mask
    while sub:
        out.append(sub)
        sub = (sub - 1) & mask
    return sorted(out)


def iter_subshops(g: Shop) -> Iterator[Shop]:
    """Surjective sub-shops of ``g`` in lexicographic order."""
    full = _full(g.n)
    for images in itertools.product(*(_submasks(m) for m in g.images)):
        union = 0
        for m in images:
            union |= m
        if union == full:
            yield Shop(images)


def surjective_subshops(g: Shop) -> frozenset[Shop]:
    return frozenset(iter_subshops(g))


def count_shops(n: int) -> int:
    """Number of surjective shops, by inclusion-exclusion."""
    return sum((-1) ** k * math.comb(n, k) * ((1 << (n - k)) - 1) ** n for k in range(n + 1))


def enumerate_shops(n: int, cap: int = ENUMERATION_CAP) -> tuple[Shop, ...]:
    """All shops on ``n`` elements, lexicographic by image bitmasks."""
    if n < 1:
        raise ShopError("n must be positive")
    if n > cap:
        raise CapExceeded(f"enumerating shops on {n} elements exceeds the cap {cap}")
    return _enumerate(n)


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple[Shop, ...]:
    full = _full(n)
    out = []
    for images in itertools.product(range(1, full + 1), repeat=n):
        union = 0
        for m in images:
            union |= m
        if union == full:
            out.append(Shop(images))
    return tuple(out)


@lru_cache(maxsize=None)
def shop_matrix(n: int) -> np.ndarray:
    """``enumerate_shops(n)`` as an ``(m, n)`` int32 array of image masks."""
    arr = np.array([s.images for s in _enumerate(n)], dtype=np.int32).reshape(-1, n)
    arr.setflags(write=False)
    return arr


# she checking


def _relation_arrays(B: "Structure"):
    out = []
    for name, rel in B.relations():
        if not rel.tuples:
            continue
        table = np.ascontiguousarray(B.table(name).reshape(-1), dtype=np.uint8)
        tuples = np.array(sorted(rel.tuples), dtype=np.int32).reshape(-1, rel.arity)
        out.append((table, tuples))
    return out


def she_mask(images: np.ndarray, B: "Structure") -> np.ndarray:
    """Boolean mask over the rows of ``images`` marking the shes of ``B``."""
    images = np.ascontiguousarray(images, dtype=np.int32)
    if images.shape[1] != B.n:
        raise ShopError(f"shops have {images.shape[1]} elements, structure has {B.n}")
    mask = np.ones(images.shape[0], dtype=bool)
    for table, tuples in _relation_arrays(B):
        idx = np.flatnonzero(mask)
        if not len(idx):
            break
        sub = np.ascontiguousarray(images[idx])
        keep = kernels.she_filter(sub, table, tuples, B.n).astype(bool)
        mask[idx[~keep]] = False
    return mask


def is_she(f: Shop, B: "Structure") -> bool:
    """Does ``f`` preserve every relation of ``B`` across all image products?"""
    if f.n != B.n:
        raise ShopError(f"shop has {f.n} elements, structure has {B.n}")
    for _, rel in B.relations():
        for t in rel.tuples:
            for y in itertools.product(*(f.image(x) for x in t)):
                if y not in rel.tuples:
                    return False
    return True


def preserves(f: Shop, arity: int, tuples: Iterable[tuple[int, ...]]) -> bool:
    """Is the relation given by ``tuples`` invariant under ``f``?"""
    rel = set(tuples)
    for t in rel:
        if len(t) != arity:
            raise ShopError(f"tuple {t} has the wrong arity")
        for y in itertools.product(*(f.image(x) for x in t)):
            if y not in rel:
                return False
    return True


def she_monoid(B: "Structure", cap: int = ENUMERATION_CAP, verify: bool | None = None) -> "DSM":
    """The DSM of all shes of ``B``.

    Closure of the result is re-checked when ``verify`` is true; by default
    that happens for domains of size at most 3 (at ``n = 4`` the check is
    quadratic in up to 41503 members).
    """
    from shelogic.dsm import DSM, check_dsm

    shops = enumerate_shops(B.n, cap)
    mask = she_mask(shop_matrix(B.n), B)
    members = frozenset(s for s, keep in zip(shops, mask) if keep)
    D = DSM(B.n, members)
    if verify is None:
        verify = B.n <= 3
    if verify:
        check_dsm(D)
    return D


# shapes


def is_permutation(f: Shop) -> bool:
    return all(m & (m - 1) == 0 for m in f.images)


def is_equivalence(f: Shop) -> bool:
    """Does the digraph of ``f`` describe an equivalence relation?"""
    n = f.n
    for x in range(n):
        if not f.images[x] >> x & 1:
            return False
        for y in _bits(f.images[x]):
            if f.images[y] != f.images[x]:
                return False
    return True


def a_witnesses(f: Shop) -> tuple[int, ...]:
    full = _full(f.n)
    return tuple(b for b in range(f.n) if f.images[b] == full)


def e_witnesses(f: Shop) -> tuple[int, ...]:
    common = _full(f.n)
    for m in f.images:
        common &= m
    return tuple(_bits(common))


@dataclass(frozen=True)
class ShapeFlags:
    forall: tuple[int, ...]
    exists: tuple[int, ...]
    forall_exists: tuple[tuple[int, int], ...]
    a: tuple[int, ...]
    e: tuple[int, ...]
    is_permutation: bool
    is_equivalence: bool

    @property
    def is_A(self) -> bool:
        return bool(self.a)

    @property
    def is_E(self) -> bool:
        return bool(self.e)

    def describe(self) -> str:
        parts = []
        parts += [f"forall_{b}" for b in self.forall]
        parts += [f"exists_{b}" for b in self.exists]
        parts += [f"forall_{b}exists_{c}" for b, c in self.forall_exists]
        if self.a:
            parts.append("A-shop[" + ",".join(map(str, self.a)) + "]")
        if self.e:
            parts.append("E-shop[" + ",".join(map(str, self.e)) + "]")
        if self.is_permutation:
            parts.append("permutation")
        if self.is_equivalence:
            parts.append("equivalence")
        return " ".join(parts) or "none"


def detect_shape(f: Shop) -> ShapeFlags:
    n = f.n
    forall = exists = fe = ()
    if n >= 2:
        forall = tuple(b for b in range(n) if f == forall_shop(n, b))
        exists = tuple(b for b in range(n) if f == exists_shop(n, b))
        fe = tuple((b, c) for b in range(n) for c in range(n)
                   if b != c and f == forall_exists_shop(n, b, c))
    return ShapeFlags(forall, exists, fe, a_witnesses(f), e_witnesses(f),
                      is_permutation(f), is_equivalence(f))


@dataclass(frozen=True)
class AForm:
    b: int
    fixed: frozenset[int]
    collapsed: frozenset[int]


@dataclass(frozen=True)
class EForm:
    b: int
    covering: frozenset[int]
    rest: frozenset[int]


def a_form(g: Shop) -> AForm | None:
    """The tripartition ``{b}; B'; B''`` if ``g`` has the canonical A-shape.

    ``g(b) = B``, ``g`` fixes each element of ``B'`` as a singleton, and
    sends each element of ``B''`` to a single element of ``B'``.
    """
    n = g.n
    if n < 2:
        return None
    full = a_witnesses(g)
    if len(full) != 1:
        return None
    b = full[0]
    fixed = frozenset(x for x in range(n) if x != b and g.images[x] == 1 << x)
    if not fixed:
        return None
    rest = frozenset(range(n)) - fixed - {b}
    for x in rest:
        m = g.images[x]
        if m & (m - 1) or (m.bit_length() - 1) not in fixed:
            return None
    return AForm(b, fixed, rest)


def e_form(g: Shop) -> EForm | None:
    """The bipartition ``B'; B''`` if ``g`` has the canonical E-shape.

    Some ``b`` lies in every image, ``x`` and ``b`` lie in ``g(x)`` for
    ``x`` in ``B'``, and the images of ``B'`` cover the domain.  ``B'``
    excludes ``b`` whenever that still covers.
    """
    n = g.n
    if n < 2:
        return None
    full = _full(n)
    for b in e_witnesses(g):
        fixed = [x for x in range(n) if g.images[x] >> x & 1]
        for cand in ([x for x in fixed if x != b], fixed):
            cover = 0
            for x in cand:
                cover |= g.images[x]
            if cand and cover == full:
                covering = frozenset(cand)
                return EForm(b, covering, frozenset(range(n)) - covering)
    return None


def _cycle_cover_length(G: nx.DiGraph, comp: set[int]) -> int | None:
    """Length of a closed walk visiting every vertex of a strongly connected set.

    Shortest paths stitched through the vertices in ascending order; ``None``
    for a single vertex without a loop.
    """
    nodes = sorted(comp)
    if len(nodes) == 1:
        v = nodes[0]
        return 1 if G.has_edge(v, v) else None
    sub = G.subgraph(nodes)
    total = 0
    for a, c in zip(nodes, nodes[1:] + nodes[:1]):
        total += nx.shortest_path_length(sub, a, c)
    return total


def _strip(G: nx.DiGraph, sources: bool) -> int:
    """Iteratively delete sources (or sinks); return the number of rounds."""
    rounds = 0
    while True:
        deg = G.in_degree if sources else G.out_degree
        dead = [v for v in G.nodes if deg(v) == 0]
        if not dead:
            return rounds
        G.remove_nodes_from(dead)
        rounds += 1


@dataclass(frozen=True)
class Canonicalization:
    """Result of the A/E canonical-form construction."""

    shop: Shop
    base: Shop
    exponent: int
    strip_rounds: int
    cycle_lengths: tuple[int, ...]
    fallback: bool


def _canonical_power(f: Shop, b: int, sources: bool) -> tuple[Shop, int, int, tuple[int, ...]]:
    n = f.n
    h0 = power(f, n)
    G = nx.DiGraph()
    G.add_nodes_from(x for x in range(n) if x != b)
    G.add_edges_from((x, y) for x in range(n) if x != b for y in _bits(h0.images[x]) if y != b)
    d = _strip(G, sources=sources)
    lengths = []
    for comp in nx.strongly_connected_components(G):
        c = _cycle_cover_length(G, comp)
        if c is not None:
            lengths.append(c)
    lengths.sort()
    c = math.lcm(*lengths, max(d, 1))
    return power(h0, c), c, d, tuple(lengths)


def _canonicalize(f: Shop, kind: str) -> Canonicalization:
    if f.n < 2:
        raise ShopError(f"canonical {kind}-form needs at least 2 elements")
    witnesses = a_witnesses(f) if kind == "A" else e_witnesses(f)
    if not witnesses:
        raise ShopError(f"{f} is not an {kind}-shop")
    form = a_form if kind == "A" else e_form
    h, c, d, lengths = _canonical_power(f, witnesses[0], sources=(kind == "A"))
    for g in iter_subshops(h):
        if form(g) is not None:
            return Canonicalization(g, h, c, d, lengths, fallback=False)
    # the construction's sub-shop should always exist; guard against a gap
    from shelogic.dsm import closure

    for g in closure([f]).sorted():
        if form(g) is not None:
            return Canonicalization(g, h, c, d, lengths, fallback=True)
    raise ShopError(f"no canonical {kind}-form in the closure of {f}")


def canonicalize_A(f: Shop) -> Shop:
    """A member of the DSM generated by the A-shop ``f`` in canonical A-form."""
    return _canonicalize(f, "A").shop


def canonicalize_E(f: Shop) -> Shop:
    """A member of the DSM generated by the E-shop ``f`` in canonical E-form."""
    return _canonicalize(f, "E").shop


def canonicalization_trace(f: Shop, kind: str) -> Canonicalization:
    return _canonicalize(f, kind)
