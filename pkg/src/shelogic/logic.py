"""Formulas of positive first-order logic: {exists, forall, and, or}.

Equality atoms are supported for the extended fragment; there is no
negation node.  Two evaluators are provided: :func:`evaluate_bruteforce`
is the plain recursive reference, :func:`evaluate_tensor` computes the
same truth values on numpy arrays and is what :func:`extension` uses.

Surface syntax::

    formula := quant | disj
    quant   := ("exists" | "forall") VAR ["in" "{" INT {"," INT} "}"] formula
    disj    := conj {"|" conj}
    conj    := prim {"&" prim}
    prim    := REL "(" term {"," term} ")" | term "=" term | "(" formula ")"
             | "true" | quant
    term    := VAR | "@" INT

``@k`` is the domain constant ``k``.  Quantifiers extend as far right as
possible.  The ``in {...}`` restriction and ``true`` exist so reduced
formulas print and re-parse; user input normally has neither.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

if TYPE_CHECKING:
    from shelogic.model import Relation, Signature, Structure


class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {line}, column {col}: {message}")
        self.pos = pos
        self.line = line
        self.column = col


class EvaluationError(FormulaError):
    pass


# terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return f"@{self.value}"


Term = Union[Var, Const]


# formula nodes


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple[Term, ...]
    pos: int | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"{self.rel}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term
    pos: int | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]

    def __str__(self) -> str:
        return " & ".join(_wrap(p, (And, Or, Exists, Forall)) for p in self.parts)


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]

    def __str__(self) -> str:
        return " | ".join(_wrap(p, (Or, Exists, Forall)) for p in self.parts)


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"
    restriction: frozenset[int] | None = None
    pos: int | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return _quant_str("exists", self)


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"
    restriction: frozenset[int] | None = None
    pos: int | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return _quant_str("forall", self)


Formula = Union[Top, Atom, Eq, And, Or, Exists, Forall]
Quantifier = (Exists, Forall)


def _wrap(node: "Formula", kinds) -> str:
    s = str(node)
    return f"({s})" if isinstance(node, kinds) else s


def _quant_str(word: str, q) -> str:
    head = f"{word} {q.var}"
    if q.restriction is not None:
        head += " in {" + ",".join(map(str, sorted(q.restriction))) + "}"
    return f"{head} {q.body}"


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return Top()
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        raise FormulaError("the fragment has no empty disjunction")
    return parts[0] if len(parts) == 1 else Or(parts)


def _check_restriction(q) -> None:
    if q.restriction is not None and not q.restriction:
        raise FormulaError(f"empty restriction on {q.var}")


# traversal helpers


def walk(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, (And, Or)):
        for p in phi.parts:
            yield from walk(p)
    elif isinstance(phi, Quantifier):
        yield from walk(phi.body)


def free_vars(phi: Formula) -> frozenset[str]:
    if isinstance(phi, Atom):
        return frozenset(t.name for t in phi.args if isinstance(t, Var))
    if isinstance(phi, Eq):
        return frozenset(t.name for t in (phi.left, phi.right) if isinstance(t, Var))
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(free_vars(p) for p in phi.parts))
    if isinstance(phi, Quantifier):
        return free_vars(phi.body) - {phi.var}
    return frozenset()


def all_var_names(phi: Formula) -> set[str]:
    names = set()
    for node in walk(phi):
        if isinstance(node, Atom):
            names.update(t.name for t in node.args if isinstance(t, Var))
        elif isinstance(node, Eq):
            names.update(t.name for t in (node.left, node.right) if isinstance(t, Var))
        elif isinstance(node, Quantifier):
            names.add(node.var)
    return names


def has_equality(phi: Formula) -> bool:
    """True when ``phi`` belongs only to the extended fragment with ``=``."""
    return any(isinstance(node, Eq) for node in walk(phi))


def has_restrictions(phi: Formula) -> bool:
    return any(isinstance(node, Quantifier) and node.restriction is not None for node in walk(phi))


def quantifier_count(phi: Formula) -> int:
    return sum(isinstance(node, Quantifier) for node in walk(phi))


def relations_used(phi: Formula) -> set[tuple[str, int]]:
    return {(node.rel, len(node.args)) for node in walk(phi) if isinstance(node, Atom)}


def substitute(phi: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Replace free occurrences of variables; bound occurrences are left alone."""

    def term(t: Term, m) -> Term:
        return m.get(t.name, t) if isinstance(t, Var) else t

    def go(node, m):
        if not m:
            return node
        if isinstance(node, Atom):
            return Atom(node.rel, tuple(term(t, m) for t in node.args), node.pos)
        if isinstance(node, Eq):
            return Eq(term(node.left, m), term(node.right, m), node.pos)
        if isinstance(node, And):
            return And(tuple(go(p, m) for p in node.parts))
        if isinstance(node, Or):
            return Or(tuple(go(p, m) for p in node.parts))
        if isinstance(node, Quantifier):
            inner = {k: v for k, v in m.items() if k != node.var}
            return type(node)(node.var, go(node.body, inner), node.restriction, node.pos)
        return node

    return go(phi, dict(mapping))


# parser

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_#]*)|(?P<const>@\d+)|(?P<int>\d+)"
                    r"|(?P<op>[()&|=,{}]))")
_KEYWORDS = {"exists", "forall", "in", "true"}


class _Parser:
    def __init__(self, text: str, signature: "Signature | None"):
        self.text = text
        self.signature = signature
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                rest = text[pos:]
                if rest.strip():
                    bad = pos + len(rest) - len(rest.lstrip())
                    raise FormulaSyntaxError(f"unexpected character {text[bad]!r}", text, bad)
                break
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self, offset: int = 0):
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else ("eof", "", len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind not in ("op", "ident"):
            raise FormulaSyntaxError(f"expected {value!r}, got {val or 'end of input'!r}", self.text, pos)
        return pos

    def error(self, message: str):
        _, val, pos = self.peek()
        raise FormulaSyntaxError(f"{message}, got {val or 'end of input'!r}", self.text, pos)

    def parse(self) -> Formula:
        phi = self.formula()
        if self.peek()[0] != "eof":
            self.error("unexpected trailing input")
        return phi

    def formula(self) -> Formula:
        kind, val, _ = self.peek()
        if kind == "ident" and val in ("exists", "forall"):
            return self.quant()
        return self.disj()

    def quant(self) -> Formula:
        _, word, pos = self.take()
        kind, var, vpos = self.take()
        if kind != "ident" or var in _KEYWORDS:
            raise FormulaSyntaxError(f"expected a variable after {word!r}", self.text, vpos)
        restriction = None
        if self.peek()[1] == "in" and self.peek()[0] == "ident":
            self.take()
            self.expect("{")
            elems = []
            while True:
                k, v, p = self.take()
                if k != "int":
                    raise FormulaSyntaxError("expected a domain element", self.text, p)
                elems.append(int(v))
                if self.peek()[1] == ",":
                    self.take()
                    continue
                self.expect("}")
                break
            restriction = frozenset(elems)
        body = self.formula()
        cls = Exists if word == "exists" else Forall
        return cls(var, body, restriction, pos)

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek()[1] == "|" and self.peek()[0] == "op":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.prim()]
        while self.peek()[1] == "&" and self.peek()[0] == "op":
            self.take()
            parts.append(self.prim())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def prim(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "op" and val == "(":
            self.take()
            phi = self.formula()
            self.expect(")")
            return phi
        if kind == "ident" and val in ("exists", "forall"):
            return self.quant()
        if kind == "ident" and val == "true":
            self.take()
            return Top()
        if kind == "ident" and self.peek(1)[1] == "(":
            return self.atom()
        if kind in ("ident", "const"):
            left = self.term()
            self.expect("=")
            right = self.term()
            return Eq(left, right, pos)
        self.error("expected an atom, equality or '('")

    def atom(self) -> Atom:
        _, rel, pos = self.take()
        self.expect("(")
        args = [self.term()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.term())
        self.expect(")")
        if self.signature is not None:
            if rel not in self.signature:
                raise FormulaSyntaxError(f"unknown relation symbol {rel!r}", self.text, pos)
            arity = self.signature.arity(rel)
            if arity != len(args):
                raise FormulaSyntaxError(f"{rel} has arity {arity}, used with {len(args)} arguments",
                                         self.text, pos)
        return Atom(rel, tuple(args), pos)

    def term(self) -> Term:
        kind, val, pos = self.take()
        if kind == "const":
            return Const(int(val[1:]))
        if kind == "ident" and val not in _KEYWORDS:
            return Var(val)
        raise FormulaSyntaxError(f"expected a variable or @constant, got {val or 'end of input'!r}",
                                 self.text, pos)


def parse_formula(text: str, signature: "Signature | None" = None,
                  free: Sequence[str] | None = None) -> Formula:
    """Parse surface syntax into an AST.

    With ``signature`` given, relation symbols and arities are checked.
    With ``free`` given, any free variable outside it is an error.
    """
    phi = _Parser(text, signature).parse()
    for node in walk(phi):
        if isinstance(node, Quantifier):
            _check_restriction(node)
    if free is not None:
        extra = free_vars(phi) - set(free)
        if extra:
            name = sorted(extra)[0]
            pos = _first_use(phi, name)
            raise FormulaSyntaxError(f"variable {name!r} is free but not declared", text, pos or 0)
    return phi


def _first_use(phi: Formula, name: str) -> int | None:
    for node in walk(phi):
        if isinstance(node, Atom) and Var(name) in node.args:
            return node.pos
        if isinstance(node, Eq) and Var(name) in (node.left, node.right):
            return node.pos
    return None


# prenex form


@dataclass(frozen=True)
class QuantEntry:
    kind: str  # "exists" or "forall"
    var: str
    restriction: frozenset[int] | None = None

    def __str__(self) -> str:
        s = f"{self.kind} {self.var}"
        if self.restriction is not None:
            s += " in {" + ",".join(map(str, sorted(self.restriction))) + "}"
        return s


@dataclass(frozen=True)
class PrenexFormula:
    prefix: tuple[QuantEntry, ...]
    matrix: Formula

    def __post_init__(self):
        names = [q.var for q in self.prefix]
        if len(set(names)) != len(names):
            raise FormulaError("prefix variables must be pairwise distinct")
        if any(isinstance(node, Quantifier) for node in walk(self.matrix)):
            raise FormulaError("prenex matrix must be quantifier-free")

    def to_formula(self) -> Formula:
        phi = self.matrix
        for q in reversed(self.prefix):
            cls = Exists if q.kind == "exists" else Forall
            phi = cls(q.var, phi, q.restriction)
        return phi

    @property
    def free_vars(self) -> frozenset[str]:
        return free_vars(self.matrix) - {q.var for q in self.prefix}

    def __str__(self) -> str:
        return str(self.to_formula())


def _is_clean_prenex(phi: Formula) -> bool:
    bound = []
    node = phi
    while isinstance(node, Quantifier):
        bound.append(node.var)
        node = node.body
    if any(isinstance(x, Quantifier) for x in walk(node)):
        return False
    return len(set(bound)) == len(bound) and not (set(bound) & free_vars(phi))


def rename_apart(phi: Formula) -> Formula:
    """Give every bound variable a fresh name ``v#1, v#2, ...`` in traversal order."""
    taken = all_var_names(phi)
    counter = itertools.count(1)

    def fresh() -> str:
        while True:
            name = f"v#{next(counter)}"
            if name not in taken:
                return name

    def go(node, m):
        if isinstance(node, (Atom, Eq)):
            return substitute(node, m)
        if isinstance(node, And):
            return And(tuple(go(p, m) for p in node.parts))
        if isinstance(node, Or):
            return Or(tuple(go(p, m) for p in node.parts))
        if isinstance(node, Quantifier):
            name = fresh()
            return type(node)(name, go(node.body, {**m, node.var: Var(name)}), node.restriction, node.pos)
        return node

    return go(phi, {})


def prenex(phi: Formula) -> PrenexFormula:
    """Equivalent prenex form: rename bound variables apart, hoist left to right."""
    if has_restrictions(phi):
        raise FormulaError("prenex expects a formula without restricted quantifiers")
    if not _is_clean_prenex(phi):
        phi = rename_apart(phi)
    prefix, matrix = _hoist(phi)
    return PrenexFormula(tuple(prefix), matrix)


def _hoist(node: Formula) -> tuple[list[QuantEntry], Formula]:
    if isinstance(node, Quantifier):
        kind = "exists" if isinstance(node, Exists) else "forall"
        prefix, matrix = _hoist(node.body)
        return [QuantEntry(kind, node.var, node.restriction)] + prefix, matrix
    if isinstance(node, (And, Or)):
        prefix: list[QuantEntry] = []
        parts = []
        for p in node.parts:
            pp, pm = _hoist(p)
            prefix += pp
            parts.append(pm)
        return prefix, type(node)(tuple(parts))
    return [], node


# brute-force evaluation


def _value(t: Term, env: Mapping[str, int], n: int) -> int:
    if isinstance(t, Const):
        if not 0 <= t.value < n:
            raise EvaluationError(f"constant @{t.value} outside the domain 0..{n - 1}")
        return t.value
    try:
        return env[t.name]
    except KeyError:
        raise EvaluationError(f"unbound free variable {t.name!r}") from None


def _range(q, n: int) -> Sequence[int]:
    if q.restriction is None:
        return range(n)
    for x in q.restriction:
        if not 0 <= x < n:
            raise EvaluationError(f"restriction element {x} outside the domain")
    return sorted(q.restriction)


def evaluate_bruteforce(B: "Structure", phi: Formula, env: Mapping[str, int] | None = None) -> bool:
    """Tarskian truth value by exhaustive recursion."""
    env = dict(env or {})
    for name, x in env.items():
        if not 0 <= x < B.n:
            raise EvaluationError(f"{name} is assigned {x}, outside the domain")
    return _ev(B, phi, env)


def _ev(B: "Structure", node: Formula, env: dict[str, int]) -> bool:
    n = B.n
    if isinstance(node, Atom):
        return B.holds(node.rel, tuple(_value(t, env, n) for t in node.args))
    if isinstance(node, And):
        return all(_ev(B, p, env) for p in node.parts)
    if isinstance(node, Or):
        return any(_ev(B, p, env) for p in node.parts)
    if isinstance(node, Exists):
        return any(_ev(B, node.body, {**env, node.var: x}) for x in _range(node, n))
    if isinstance(node, Forall):
        return all(_ev(B, node.body, {**env, node.var: x}) for x in _range(node, n))
    if isinstance(node, Eq):
        return _value(node.left, env, n) == _value(node.right, env, n)
    if isinstance(node, Top):
        return True
    raise FormulaError(f"not a formula node: {node!r}")


# array evaluation


def _tensor(B: "Structure", node: Formula, env: Mapping[str, int]) -> tuple[tuple[str, ...], np.ndarray]:
    """Truth table of ``node`` over its unassigned free variables.

    The returned variable tuple may omit free variables the value does
    not depend on; callers broadcast.
    """
    n = B.n
    if isinstance(node, (Atom, Eq)):
        args = node.args if isinstance(node, Atom) else (node.left, node.right)
        vs: list[str] = []
        for t in args:
            if isinstance(t, Var) and t.name not in env and t.name not in vs:
                vs.append(t.name)
        grids = np.ix_(*([np.arange(n)] * len(vs))) if vs else ()
        index = []
        for t in args:
            if isinstance(t, Var) and t.name not in env:
                index.append(grids[vs.index(t.name)])
            else:
                index.append(_value(t, env, n))
        if isinstance(node, Atom):
            table = B.table(node.rel)
            if table.ndim != len(args):
                raise EvaluationError(f"{node.rel} has arity {table.ndim}, used with {len(args)} arguments")
            arr = table[tuple(index)]
        else:
            arr = np.equal(index[0], index[1])
        arr = np.broadcast_to(arr, (n,) * len(vs))
        return tuple(vs), arr
    if isinstance(node, (And, Or)):
        is_and = isinstance(node, And)
        results = []
        for p in node.parts:
            vs, arr = _tensor(B, p, env)
            if not vs:
                if bool(arr) != is_and:
                    return (), np.array(not is_and)
                continue
            results.append((vs, arr))
        if not results:
            return (), np.array(is_and)
        target: list[str] = []
        for vs, _ in results:
            target += [v for v in vs if v not in target]
        op = np.logical_and if is_and else np.logical_or
        acc = None
        for vs, arr in results:
            aligned = _align(vs, arr, target)
            acc = aligned if acc is None else op(acc, aligned)
        return tuple(target), np.broadcast_to(acc, (n,) * len(target))
    if isinstance(node, Quantifier):
        inner = {k: v for k, v in env.items() if k != node.var}
        vs, arr = _tensor(B, node.body, inner)
        if node.var not in vs:
            _range(node, n)
            return vs, arr
        axis = vs.index(node.var)
        if node.restriction is not None:
            arr = np.take(arr, list(_range(node, n)), axis=axis)
        reduce = np.any if isinstance(node, Exists) else np.all
        return vs[:axis] + vs[axis + 1:], reduce(arr, axis=axis)
    if isinstance(node, Top):
        return (), np.array(True)
    raise FormulaError(f"not a formula node: {node!r}")


def _align(vs: Sequence[str], arr: np.ndarray, target: Sequence[str]) -> np.ndarray:
    order = sorted(range(len(vs)), key=lambda i: target.index(vs[i]))
    arr = np.transpose(arr, order)
    present = set(vs)
    shape = [arr.shape[0] if v in present else 1 for v in target] if vs else [1] * len(target)
    return arr.reshape(shape)


def evaluate_tensor(B: "Structure", phi: Formula, env: Mapping[str, int] | None = None) -> bool:
    env = dict(env or {})
    missing = free_vars(phi) - set(env)
    if missing:
        raise EvaluationError(f"unbound free variable {sorted(missing)[0]!r}")
    vs, arr = _tensor(B, phi, env)
    return bool(arr)


def extension(B: "Structure", phi: Formula, free: Sequence[str], method: str = "tensor") -> "Relation":
    """``{x in B^k : B |= phi(x)}`` for the ordered variables ``free``."""
    from shelogic.model import Relation

    free = list(free)
    if len(set(free)) != len(free):
        raise FormulaError("free variable list has duplicates")
    extra = free_vars(phi) - set(free)
    if extra:
        raise EvaluationError(f"unbound free variable {sorted(extra)[0]!r}")
    if not free:
        raise FormulaError("extension needs at least one free variable")
    if method == "brute":
        tuples = [t for t in itertools.product(range(B.n), repeat=len(free))
                  if evaluate_bruteforce(B, phi, dict(zip(free, t)))]
        return Relation.of(len(free), tuples)
    if method != "tensor":
        raise ValueError(f"unknown method {method!r}")
    vs, arr = _tensor(B, phi, {})
    full = np.broadcast_to(_align(vs, arr, free), (B.n,) * len(free))
    return Relation.of(len(free), map(tuple, np.argwhere(full).tolist()))


# canonical conjunctions and the Galois witness formulas


def positive_facts(B: "Structure", elems: Sequence[int], variables: Sequence[str]) -> Formula:
    """Conjunction of every atom ``R(v_i, ...)`` with ``R(elems_i, ...)`` true in ``B``."""
    if len(elems) != len(variables):
        raise FormulaError("need one variable per element")
    atoms = []
    idx = range(len(elems))
    for name, rel in B.relations():
        if not rel.tuples:
            continue
        for lam in itertools.product(idx, repeat=rel.arity):
            if tuple(elems[i] for i in lam) in rel.tuples:
                atoms.append(Atom(name, tuple(Var(variables[i]) for i in lam)))
    return conj(atoms)


def theta_vars(k: int) -> tuple[str, ...]:
    """Free variables ``u1, ..., uk`` of the witness formulas."""
    return tuple(f"u{i + 1}" for i in range(k))


#: Largest domain for which the she-type formula is built (n**n disjuncts).
THETA_CAP = 4


def _check_tuple(B: "Structure", r: Sequence[int]) -> tuple[int, ...]:
    r = tuple(int(x) for x in r)
    if not r:
        raise FormulaError("tuple must be non-empty")
    for x in r:
        if not 0 <= x < B.n:
            raise FormulaError(f"element {x} outside the domain")
    return r


def theta_tuple_eq(B: "Structure", r: Sequence[int]) -> Formula:
    """Formula with equality defining the automorphism orbit of ``r``."""
    r = _check_tuple(B, r)
    n = B.n
    us = theta_vars(len(r))
    vs = [f"v{j + 1}" for j in range(n)]
    cover = disj(Eq(Var("v"), Var(v)) for v in vs)
    link = [Eq(Var(u), Var(vs[x])) for u, x in zip(us, r)]
    body = conj([positive_facts(B, list(range(n)), vs), Forall("v", cover), *link])
    body = _flatten_and(body)
    for v in reversed(vs):
        body = Exists(v, body)
    return body


def theta_tuple(B: "Structure", r: Sequence[int], cap: int = THETA_CAP) -> Formula:
    """Equality-free formula true of ``r'`` iff some she maps ``r`` to ``r'``.

    Contains ``n ** n`` disjuncts (one per tuple ``t``, lexicographic).
    """
    r = _check_tuple(B, r)
    n = B.n
    if n > cap:
        raise FormulaError(f"theta formula on {n} elements exceeds the cap {cap} ({n ** n} disjuncts)")
    us = list(theta_vars(len(r)))
    vs = [f"v{j + 1}" for j in range(n)]
    ws = [f"w{j + 1}" for j in range(n)]
    s = list(range(n))
    head = positive_facts(B, [*r, *s], us + vs)
    big = disj(positive_facts(B, [*r, *s, *t], us + vs + ws)
               for t in itertools.product(range(n), repeat=n))
    tail: Formula = big
    for w in reversed(ws):
        tail = Forall(w, tail)
    body = _flatten_and(conj([head, tail]))
    for v in reversed(vs):
        body = Exists(v, body)
    return body


def theta_relation(B: "Structure", S: "Relation | Iterable[Sequence[int]]", cap: int = THETA_CAP) -> Formula:
    """Disjunction of the tuple formulas over the tuples of ``S``."""
    tuples = sorted(S.tuples) if hasattr(S, "tuples") else sorted(tuple(t) for t in S)
    if not tuples:
        raise FormulaError("the fragment cannot define the empty relation this way")
    return disj(theta_tuple(B, t, cap) for t in tuples)


def _flatten_and(phi: Formula) -> Formula:
    if not isinstance(phi, And):
        return phi
    parts: list[Formula] = []
    for p in phi.parts:
        if isinstance(p, And):
            parts.extend(p.parts)
        elif not isinstance(p, Top):
            parts.append(p)
    return conj(parts)
