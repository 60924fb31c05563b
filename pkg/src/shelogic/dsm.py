"""Down-she-monoids (DSMs) and their lattice.

A DSM is a set of shops containing the identity and closed under
composition and surjective sub-shops.  For ``n <= 3`` all shops are
indexed once (:class:`ShopSpace`) and closures run on the compiled
kernels over membership arrays; larger domains use a set-based fixed
point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from shelogic import kernels
from shelogic.shop import (
    ENUMERATION_CAP,
    CapExceeded,
    Shop,
    ShopError,
    _enumerate,
    compose,
    identity,
    inverse,
    is_permutation,
    is_subshop,
    iter_subshops,
    shop_matrix,
)

#: Largest domain with a precomputed composition table.
TABLE_CAP = 3
#: Largest domain for lattice enumeration without ``allow_large``.
LATTICE_CAP = 3


class DSMError(ValueError):
    pass


class ShopSpace:
    """All shops on ``n`` elements with composition and sub-shop tables."""

    def __init__(self, n: int):
        if n > TABLE_CAP:
            raise CapExceeded(f"no composition table above n={TABLE_CAP}")
        self.n = n
        self.shops = _enumerate(n)
        self.index = {s: i for i, s in enumerate(self.shops)}
        self.size = len(self.shops)
        self.images = np.ascontiguousarray(shop_matrix(n), dtype=np.int32)

    @cached_property
    def comp(self) -> np.ndarray:
        n = self.n
        lookup = np.full(1 << (n * n), -1, dtype=np.int32)
        for i, s in enumerate(self.shops):
            lookup[kernels.shop_code(s.images, n)] = i
        return kernels.compose_table(self.images, lookup)

    @cached_property
    def down(self) -> tuple[np.ndarray, np.ndarray]:
        ptr = [0]
        idx: list[int] = []
        for s in self.shops:
            idx.extend(self.index[t] for t in iter_subshops(s) if t != s)
            ptr.append(len(idx))
        return np.array(ptr, dtype=np.int32), np.array(idx, dtype=np.int32)

    def close(self, member: np.ndarray, seeds: Iterable[int]) -> np.ndarray:
        member = np.array(member, dtype=np.uint8, copy=True)
        seeds = np.fromiter(seeds, dtype=np.int32)
        ptr, idx = self.down
        kernels.close(member, seeds, self.comp, ptr, idx)
        return member

    def to_bits(self, member: np.ndarray) -> int:
        return int.from_bytes(np.packbits(member, bitorder="little").tobytes(), "little")

    def from_bits(self, bits: int) -> np.ndarray:
        raw = bits.to_bytes((self.size + 7) // 8, "little")
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[: self.size].copy()

    def shops_of(self, bits: int) -> frozenset[Shop]:
        return frozenset(self.shops[i] for i in _bit_indices(bits))

    def bits_of(self, shops: Iterable[Shop]) -> int:
        bits = 0
        for s in shops:
            bits |= 1 << self.index[s]
        return bits


def _bit_indices(bits: int) -> Iterator[int]:
    i = 0
    while bits:
        low = bits & -bits
        i = low.bit_length() - 1
        yield i
        bits ^= low


@lru_cache(maxsize=None)
def shop_space(n: int) -> ShopSpace:
    return ShopSpace(n)


@dataclass(frozen=True)
class DSM:
    n: int
    members: frozenset[Shop]

    def __contains__(self, f: object) -> bool:
        return f in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Shop]:
        return iter(self.sorted())

    def sorted(self) -> list[Shop]:
        return sorted(self.members)

    def __le__(self, other: "DSM") -> bool:
        return self.members <= other.members

    def __lt__(self, other: "DSM") -> bool:
        return self.members < other.members

    def listing(self) -> str:
        """One shop literal per line, sorted."""
        return "".join(f"{s}\n" for s in self.sorted())

    @cached_property
    def generators(self) -> tuple[Shop, ...]:
        return minimal_generators(self)

    def label(self) -> str:
        return "<" + ", ".join(map(str, self.generators)) + ">"


def check_dsm(D: DSM) -> None:
    """Raise :class:`DSMError` unless ``D`` satisfies the DSM axioms."""
    if identity(D.n) not in D.members:
        raise DSMError("DSM lacks the identity")
    if D.n <= TABLE_CAP:
        space = shop_space(D.n)
        bits = space.bits_of(D.members)
        member = space.from_bits(bits)
        grown = space.close(np.zeros_like(member), [space.index[s] for s in D.members])
        if space.to_bits(grown) != bits:
            raise DSMError("set is not closed under composition and sub-shops")
        return
    members = D.members
    for f in members:
        for g in members:
            if compose(g, f) not in members:
                raise DSMError(f"{g} o {f} is missing")
        for s in iter_subshops(f):
            if s not in members:
                raise DSMError(f"sub-shop {s} of {f} is missing")


def closure(F: Iterable[Shop], n: int | None = None, cap: int = ENUMERATION_CAP) -> DSM:
    """The least DSM containing ``F``."""
    F = list(F)
    if n is None:
        if not F:
            raise DSMError("closure of an empty set needs an explicit n")
        n = F[0].n
    for f in F:
        if f.n != n:
            raise ShopError(f"size mismatch: {f.n} vs {n}")
    if n > cap:
        raise CapExceeded(f"closure on {n} elements exceeds the cap {cap}")
    if n <= TABLE_CAP:
        space = shop_space(n)
        member = np.zeros(space.size, dtype=np.uint8)
        seeds = [space.index[identity(n)]] + [space.index[f] for f in F]
        return DSM(n, space.shops_of(space.to_bits(space.close(member, seeds))))
    return DSM(n, frozenset(_closure_sets(F, n)))


def _closure_sets(F: Sequence[Shop], n: int) -> set[Shop]:
    members: set[Shop] = set()
    inside: list[Shop] = []
    stack = [identity(n), *F]
    while stack:
        x = stack.pop()
        if x in members:
            continue
        members.add(x)
        inside.append(x)
        stack.extend(s for s in iter_subshops(x) if s not in members)
        for y in list(inside):
            for z in (compose(x, y), compose(y, x)):
                if z not in members:
                    stack.append(z)
    return members


def dsm_inverse(D: DSM) -> DSM:
    out = DSM(D.n, frozenset(inverse(f) for f in D.members))
    if D.n <= TABLE_CAP:
        check_dsm(out)
    return out


def is_permutation_subgroup(D: DSM) -> bool:
    return all(is_permutation(f) for f in D.members)


def set_partitions(n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Partitions of ``range(n)`` from restricted-growth strings, in RGS order."""

    def rgs(prefix: list[int], top: int) -> Iterator[list[int]]:
        if len(prefix) == n:
            yield prefix
            return
        for v in range(top + 2):
            yield from rgs(prefix + [v], max(top, v))

    for s in rgs([0], 0):
        blocks: dict[int, list[int]] = {}
        for x, v in enumerate(s):
            blocks.setdefault(v, []).append(x)
        yield tuple(tuple(blocks[k]) for k in sorted(blocks))


@dataclass(frozen=True)
class BlockWitness:
    """Partition ``blocks`` such that every member is a sub-shop of a block shop.

    The block shop for ``perm`` sends every ``x`` in ``blocks[perm[i]]`` to
    ``blocks[i]``; ``perms`` lists, per member in sorted order, the least
    permutation that works.
    """

    blocks: tuple[tuple[int, ...], ...]
    perms: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return sum(map(len, self.blocks))

    def shop(self, perm: Sequence[int]) -> Shop:
        images = [0] * self.n
        for i, j in enumerate(perm):
            target = sum(1 << y for y in self.blocks[i])
            for x in self.blocks[j]:
                images[x] = target
        return Shop(tuple(images))

    def __str__(self) -> str:
        blocks = " ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        used = sorted(set(self.perms))
        return f"blocks {blocks}; bounds " + " ".join(str(self.shop(p)) for p in used)


def is_block_permutation_bounded(D: DSM, cap: int = ENUMERATION_CAP) -> BlockWitness | None:
    """First partition (2+ blocks) under which each member has a block-shop bound."""
    if D.n > cap:
        raise CapExceeded(f"partition search on {D.n} elements exceeds the cap {cap}")
    members = D.sorted()
    for blocks in set_partitions(D.n):
        if len(blocks) < 2:
            continue
        probe = BlockWitness(blocks, ())
        bounds = [(p, probe.shop(p)) for p in itertools.permutations(range(len(blocks)))]
        perms = []
        for f in members:
            p = next((p for p, g in bounds if is_subshop(f, g)), None)
            if p is None:
                break
            perms.append(p)
        else:
            return BlockWitness(blocks, tuple(perms))
    return None


def minimal_generators(D: DSM) -> tuple[Shop, ...]:
    """A smallest generating set.

    Among sets of equal size, the one whose shops have the most image
    elements wins, then lexicographic order.

    Only members whose own closure is maximal among members' closures
    are tried; replacing a generator by one with a larger closure inside
    ``D`` never breaks generation.
    """
    ident = identity(D.n)
    if D.members == {ident}:
        return (ident,)
    principal: dict[Shop, frozenset[Shop]] = {}
    for f in D.sorted():
        principal[f] = closure([f], D.n).members
    def weight(f: Shop):
        return (-sum(bin(m).count("1") for m in f.images), f)

    reps: dict[frozenset[Shop], Shop] = {}
    for f in sorted(principal, key=weight):
        reps.setdefault(principal[f], f)
    maximal = [f for P, f in reps.items() if not any(P < Q for Q in reps)]
    # prefer generators with large images, then lexicographic order
    maximal.sort(key=weight)
    for k in range(1, len(maximal) + 1):
        for combo in itertools.combinations(maximal, k):
            union = frozenset().union(*(principal[f] for f in combo))
            if union == D.members or closure(combo, D.n).members == D.members:
                return tuple(sorted(combo))
    raise DSMError("no generating set found")  # pragma: no cover


@dataclass
class DsmLattice:
    n: int
    nodes: list[DSM]
    edges: list[tuple[int, int]] = field(default_factory=list)

    @property
    def bottom(self) -> DSM:
        return self.nodes[0]

    @property
    def top(self) -> DSM:
        return self.nodes[-1]

    def index(self, D: DSM) -> int:
        return self.nodes.index(D)


def enumerate_dsms(n: int, allow_large: bool = False) -> DsmLattice:
    """Every DSM on ``n`` elements with the Hasse diagram of inclusion.

    Starting from the singleton closures, repeatedly join known DSMs with
    singleton closures until nothing new appears.  The upper covers of a
    node are the minimal joins found from it, so the Hasse edges come out
    of the same pass.
    """
    if n > LATTICE_CAP and not allow_large:
        raise CapExceeded(f"lattice enumeration above n={LATTICE_CAP} needs allow_large")
    if n > TABLE_CAP:
        raise CapExceeded(f"lattice enumeration above n={TABLE_CAP} is not supported")
    space = shop_space(n)
    empty = np.zeros(space.size, dtype=np.uint8)
    id_idx = space.index[identity(n)]
    bottom = space.to_bits(space.close(empty, [id_idx]))
    principals: dict[int, int] = {}
    for i in range(space.size):
        bits = space.to_bits(space.close(empty, [id_idx, i]))
        principals.setdefault(bits, i)
    prin = sorted(principals.items(), key=lambda kv: kv[1])
    seen = {bottom}
    frontier = [bottom]
    covers: dict[int, set[int]] = {}
    while frontier:
        nxt = []
        for D in frontier:
            member = None
            joins = set()
            for P, _ in prin:
                if P & ~D == 0:
                    continue
                if member is None:
                    member = space.from_bits(D)
                extra = P & ~D
                J = space.to_bits(space.close(member, _bit_indices(extra)))
                joins.add(J)
                if J not in seen:
                    seen.add(J)
                    nxt.append(J)
            covers[D] = {J for J in joins if not any(K != J and K & ~J == 0 for K in joins)}
        frontier = nxt
    order = sorted(seen, key=lambda bits: (bin(bits).count("1"), sorted(space.shops_of(bits))))
    pos = {bits: i for i, bits in enumerate(order)}
    nodes = [DSM(n, space.shops_of(bits)) for bits in order]
    edges = sorted((pos[a], pos[b]) for a, ups in covers.items() for b in ups)
    return DsmLattice(n, nodes, edges)


def _dot_quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def export_dot(L: DsmLattice, labels: Mapping[int, str] | None = None) -> str:
    """Graphviz rendering of the lattice, edges pointing upwards."""
    labels = labels or {}
    lines = [f"digraph dsm_lattice_{L.n} {{", "  rankdir=BT;", "  node [shape=box];"]
    for i, D in enumerate(L.nodes):
        text = f"{D.label()}\\n|D|={len(D)}"
        if i in labels:
            text += f"\\n{labels[i]}"
        lines.append(f"  d{i} [label={_dot_quote(text)}];")
    for a, b in L.edges:
        lines.append(f"  d{a} -> d{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
