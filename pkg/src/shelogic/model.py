"""Finite relational structures.

A structure has domain ``{0, ..., n-1}`` and a set of named relations.
Structures are immutable; every operation returns a new one.

The text format is line oriented::

    # K2 plus an isolated vertex
    domain 3
    rel E 2
    0 1
    1 0
    end
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:
    from shelogic.logic import Formula
    from shelogic.shop import Shop

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class StructureError(ValueError):
    """Invalid structure contents."""


class StructureSyntaxError(StructureError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...]

    def __post_init__(self):
        seen = set()
        for name, arity in self.relations:
            if not _IDENT.match(name):
                raise StructureError(f"invalid relation name {name!r}")
            if name in seen:
                raise StructureError(f"duplicate relation name {name!r}")
            if arity < 1:
                raise StructureError(f"relation {name} has arity {arity} < 1")
            seen.add(name)

    def arity(self, name: str) -> int:
        for rel, arity in self.relations:
            if rel == name:
                return arity
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return any(rel == name for rel, _ in self.relations)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)


@dataclass(frozen=True)
class Relation:
    """A ``arity``-ary relation, i.e. a set of tuples over the domain."""

    arity: int
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self):
        if self.arity < 1:
            raise StructureError("relation arity must be at least 1")
        for t in self.tuples:
            if len(t) != self.arity:
                raise StructureError(f"tuple {t} does not have arity {self.arity}")

    @classmethod
    def of(cls, arity: int, tuples: Iterable[Sequence[int]]) -> "Relation":
        return cls(arity, frozenset(tuple(int(x) for x in t) for t in tuples))

    def __contains__(self, t: object) -> bool:
        return t in self.tuples

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(sorted(self.tuples))

    def check_domain(self, n: int) -> None:
        for t in self.tuples:
            for x in t:
                if not 0 <= x < n:
                    raise StructureError(f"element {x} of tuple {t} is outside the domain 0..{n - 1}")


class Structure:
    """A finite structure over the domain ``range(n)``."""

    def __init__(self, n: int, relations: Mapping[str, Relation] | Iterable[tuple[str, Relation]],
                 signature: Signature | None = None):
        if n < 1:
            raise StructureError("domain size must be positive")
        items = list(relations.items()) if isinstance(relations, Mapping) else list(relations)
        if signature is None:
            signature = Signature(tuple((name, rel.arity) for name, rel in items))
        rels = {}
        for name, rel in items:
            if name not in signature:
                raise StructureError(f"relation {name!r} is not in the signature")
            if signature.arity(name) != rel.arity:
                raise StructureError(f"relation {name!r} has arity {rel.arity}, signature says {signature.arity(name)}")
            rel.check_domain(n)
            rels[name] = rel
        for name, arity in signature.relations:
            rels.setdefault(name, Relation(arity, frozenset()))
        self.n = n
        self.signature = signature
        self._rels = rels

    @property
    def domain(self) -> range:
        return range(self.n)

    def relation(self, name: str) -> Relation:
        try:
            return self._rels[name]
        except KeyError:
            raise KeyError(f"unknown relation symbol {name!r}") from None

    def relations(self) -> list[tuple[str, Relation]]:
        return [(name, self._rels[name]) for name in self.signature.names]

    def holds(self, name: str, t: tuple[int, ...]) -> bool:
        return t in self.relation(name).tuples

    def table(self, name: str) -> np.ndarray:
        """Dense boolean indicator array of shape ``(n,) * arity``."""
        cache = self.__dict__.setdefault("_tables", {})
        if name not in cache:
            rel = self.relation(name)
            arr = np.zeros((self.n,) * rel.arity, dtype=bool)
            for t in rel.tuples:
                arr[t] = True
            arr.setflags(write=False)
            cache[name] = arr
        return cache[name]

    @cached_property
    def canonical_key(self) -> tuple:
        return (self.n, tuple((name, rel.arity, tuple(sorted(rel.tuples)))
                              for name, rel in sorted(self._rels.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)

    def __repr__(self) -> str:
        rels = ", ".join(f"{name}/{rel.arity}:{len(rel)}" for name, rel in self.relations())
        return f"Structure(n={self.n}, {rels})"

    def with_relation(self, name: str, rel: Relation) -> "Structure":
        items = [(k, v) for k, v in self.relations() if k != name] + [(name, rel)]
        return Structure(self.n, items)


def serialize_structure(B: Structure) -> str:
    """Canonical text form: relations sorted by name, tuples lexicographic."""
    lines = [f"domain {B.n}"]
    for name, rel in sorted(B.relations()):
        lines.append(f"rel {name} {rel.arity}")
        lines.extend(" ".join(map(str, t)) for t in sorted(rel.tuples))
        lines.append("end")
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> Structure:
    n = None
    blocks: list[tuple[str, int, list[tuple[int, ...]]]] = []
    current = None
    names = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        words = line.split()
        head = words[0]
        if n is None:
            if head != "domain" or len(words) != 2:
                raise StructureSyntaxError("expected 'domain <n>' header", lineno, col)
            n = _parse_int(words[1], lineno, line)
            if n < 1:
                raise StructureSyntaxError("domain size must be positive", lineno, line.index(words[1]) + 1)
            continue
        if current is None:
            if head == "domain":
                raise StructureSyntaxError("duplicate domain header", lineno, col)
            if head != "rel" or len(words) != 3:
                raise StructureSyntaxError("expected 'rel <name> <arity>'", lineno, col)
            name = words[1]
            if not _IDENT.match(name):
                raise StructureSyntaxError(f"invalid relation name {name!r}", lineno, line.index(name) + 1)
            if name in names:
                raise StructureSyntaxError(f"duplicate relation name {name!r}", lineno, line.index(name) + 1)
            arity = _parse_int(words[2], lineno, line)
            if arity < 1:
                raise StructureSyntaxError("arity must be at least 1", lineno, line.rindex(words[2]) + 1)
            names.add(name)
            current = (name, arity, [])
            continue
        if head == "end":
            if len(words) != 1:
                raise StructureSyntaxError("unexpected text after 'end'", lineno, col)
            blocks.append(current)
            current = None
            continue
        name, arity, tuples = current
        if len(words) != arity:
            raise StructureSyntaxError(
                f"tuple arity mismatch: relation {name} has arity {arity}, got {len(words)} elements",
                lineno, col)
        t = []
        pos = 0
        for w in words:
            pos = line.index(w, pos)
            x = _parse_int(w, lineno, line, pos)
            if not 0 <= x < n:
                raise StructureSyntaxError(f"element {x} out of domain 0..{n - 1}", lineno, pos + 1)
            t.append(x)
            pos += len(w)
        tuples.append(tuple(t))
    if n is None:
        raise StructureSyntaxError("missing 'domain' header", max(1, len(text.splitlines())))
    if current is not None:
        raise StructureSyntaxError(f"relation block {current[0]!r} is not terminated by 'end'",
                                   len(text.splitlines()))
    return Structure(n, [(name, Relation.of(arity, tuples)) for name, arity, tuples in blocks])


def _parse_int(word: str, lineno: int, line: str, pos: int | None = None) -> int:
    if not re.fullmatch(r"-?\d+", word):
        col = (line.index(word) if pos is None else pos) + 1
        raise StructureSyntaxError(f"expected an integer, got {word!r}", lineno, col)
    return int(word)


# fixtures


def clique(k: int) -> Structure:
    """Loopless complete digraph on ``k`` vertices."""
    return _digraph(k, [(x, y) for x in range(k) for y in range(k) if x != y])


def nae(k: int) -> Structure:
    """Ternary not-all-equal relation on ``k`` elements."""
    if k < 1:
        raise StructureError("nae needs a positive domain size")
    tuples = [t for t in itertools.product(range(k), repeat=3) if len(set(t)) > 1]
    return Structure(k, [("R", Relation.of(3, tuples))])


def k2_plus_k1() -> Structure:
    """K2 on {0, 1} with vertex 2 isolated."""
    return _digraph(3, [(0, 1), (1, 0)])


def multipartite(sizes: Sequence[int]) -> Structure:
    """Complete multipartite digraph; blocks are consecutive element ranges."""
    if not sizes or any(s < 1 for s in sizes):
        raise StructureError("multipartite needs at least one block, all of positive size")
    block = [i for i, s in enumerate(sizes) for _ in range(s)]
    n = len(block)
    return _digraph(n, [(x, y) for x in range(n) for y in range(n) if block[x] != block[y]])


def _digraph(n: int, edges) -> Structure:
    if n < 1:
        raise StructureError("a digraph needs at least one vertex")
    return Structure(n, [("E", Relation.of(2, edges))])


FIXTURES = {
    "clique": "clique K_k, params: k",
    "nae": "not-all-equal ternary relation, params: k",
    "k2_plus_k1": "K2 on {0,1} plus isolated vertex 2, params: none",
    "multipartite": "complete multipartite digraph, params: block sizes",
}


def fixture(name: str, params: Sequence[int] = ()) -> Structure:
    params = list(params)
    if name == "clique" or name == "nae":
        if len(params) != 1 or params[0] < 1:
            raise StructureError(f"{name} takes one positive size parameter")
        return clique(params[0]) if name == "clique" else nae(params[0])
    if name == "k2_plus_k1":
        if params:
            raise StructureError("k2_plus_k1 takes no parameters")
        return k2_plus_k1()
    if name == "multipartite":
        return multipartite(params)
    raise StructureError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}")


def complement_digraph(B: Structure) -> Structure:
    rels = B.relations()
    if len(rels) != 1 or rels[0][1].arity != 2:
        raise StructureError("complement_digraph needs a single binary relation")
    name, rel = rels[0]
    pairs = [(x, y) for x in range(B.n) for y in range(B.n) if (x, y) not in rel.tuples]
    return Structure(B.n, [(name, Relation.of(2, pairs))])


def quotient(B: Structure, f: "Shop") -> Structure:
    """Collapse the classes of an equivalence-relation she of ``B``."""
    from shelogic.shop import is_equivalence, is_she

    if f.n != B.n:
        raise StructureError(f"shop has {f.n} elements, structure has {B.n}")
    if not is_equivalence(f):
        raise StructureError(f"{f} is not an equivalence relation")
    if not is_she(f, B):
        raise StructureError(f"{f} is not a she of the structure")
    classes = sorted({f.images[x] for x in range(B.n)}, key=lambda m: (m & -m))
    cls_of = {x: i for i, mask in enumerate(classes) for x in range(B.n) if mask >> x & 1}
    rels = []
    for name, rel in B.relations():
        rels.append((name, Relation.of(rel.arity, {tuple(cls_of[x] for x in t) for t in rel.tuples})))
    return Structure(len(classes), rels, signature=B.signature)


def canonical_conjunction(B: Structure, r: Sequence[int], variables: Sequence[str] | None = None) -> "Formula":
    """Conjunction of the positive facts of the tuple ``r`` over ``v0, v1, ...``."""
    from shelogic.logic import positive_facts

    if not r:
        raise StructureError("canonical_conjunction needs a non-empty tuple")
    for x in r:
        if not 0 <= x < B.n:
            raise StructureError(f"element {x} outside the domain")
    if variables is None:
        variables = [f"v{i}" for i in range(len(r))]
    return positive_facts(B, list(r), list(variables))
