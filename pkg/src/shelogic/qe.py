"""Quantifier-elimination engines keyed on the shes of a structure.

Each engine rewrites a prenex sentence into a smaller one that has the
same truth value on the structure, then the residue is evaluated by brute
force.  An engine records the shops that justify it (``provenance``);
:func:`evaluate` re-checks them against the structure before trusting the
rewrite.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

from shelogic.logic import (Const, Formula, FormulaError, PrenexFormula, QuantEntry,
                            evaluate_bruteforce, free_vars, has_equality, prenex, substitute)
from shelogic.shop import (Shop, a_form, a_witnesses, canonicalize_A, canonicalize_E,
                           detect_shape, e_form, e_witnesses, exists_shop, forall_exists_shop,
                           forall_shop, is_she, she_monoid)

if TYPE_CHECKING:
    from shelogic.dsm import DSM
    from shelogic.model import Structure


KINDS = ("brute", "forall_subst", "exists_subst", "forall_exists_subst",
         "A_reduce", "E_reduce", "AE_logspace")


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class Engine:
    kind: str
    b: int | None = None
    b2: int | None = None
    shop: Shop | None = None
    provenance: tuple[Shop, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise EngineError(f"unknown engine kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "brute":
            return "brute"
        if self.kind in ("forall_subst", "exists_subst"):
            return f"{self.kind}({self.b})"
        if self.kind in ("forall_exists_subst", "AE_logspace"):
            return f"{self.kind}({self.b},{self.b2})"
        return f"{self.kind}{self.shop}"

    def reduce(self, phi: PrenexFormula) -> PrenexFormula:
        if self.kind == "brute":
            return phi
        if self.kind == "forall_subst":
            return reduce_forall(phi, self.b)
        if self.kind == "exists_subst":
            return reduce_exists(phi, self.b)
        if self.kind in ("forall_exists_subst", "AE_logspace"):
            return reduce_forall_exists(phi, self.b, self.b2)
        if self.kind == "A_reduce":
            return reduce_A(phi, self.shop)
        return reduce_E(phi, self.shop)


BRUTE = Engine("brute")


def forall_engine(n: int, b: int) -> Engine:
    return Engine("forall_subst", b=b, provenance=(forall_shop(n, b),))


def exists_engine(n: int, b: int) -> Engine:
    return Engine("exists_subst", b=b, provenance=(exists_shop(n, b),))


def forall_exists_engine(n: int, b: int, b2: int, kind: str = "forall_exists_subst",
                         extra: tuple[Shop, ...] = ()) -> Engine:
    return Engine(kind, b=b, b2=b2, provenance=(forall_exists_shop(n, b, b2), *extra))


def a_engine(g: Shop) -> Engine:
    if a_form(g) is None:
        raise EngineError(f"{g} is not in canonical A-form")
    return Engine("A_reduce", shop=g, provenance=(g,))


def e_engine(g: Shop) -> Engine:
    if e_form(g) is None:
        raise EngineError(f"{g} is not in canonical E-form")
    return Engine("E_reduce", shop=g, provenance=(g,))


# reductions


def _rewrite(phi: PrenexFormula, rules) -> PrenexFormula:
    """Apply per-entry rules outermost-in.

    ``rules(entry)`` returns a constant to substitute, a restriction set to
    attach, or ``None`` to keep the entry as is.
    """
    mapping = {}
    prefix = []
    for q in phi.prefix:
        action = rules(q)
        if isinstance(action, Const):
            mapping[q.var] = action
        elif isinstance(action, frozenset):
            r = action if q.restriction is None else action & q.restriction
            if not r:
                raise EngineError(f"restriction on {q.var} became empty")
            prefix.append(QuantEntry(q.kind, q.var, r))
        else:
            prefix.append(q)
    return PrenexFormula(tuple(prefix), substitute(phi.matrix, mapping))


def reduce_forall(phi: PrenexFormula, b: int) -> PrenexFormula:
    """Drop universal entries, substituting ``@b``."""
    return _rewrite(phi, lambda q: Const(b) if q.kind == "forall" else None)


def reduce_exists(phi: PrenexFormula, b: int) -> PrenexFormula:
    return _rewrite(phi, lambda q: Const(b) if q.kind == "exists" else None)


def reduce_forall_exists(phi: PrenexFormula, b: int, b2: int) -> PrenexFormula:
    """Universals become ``@b``, existentials ``@b2``; no quantifier survives."""
    return _rewrite(phi, lambda q: Const(b) if q.kind == "forall" else Const(b2))


def reduce_A(phi: PrenexFormula, g: Shop) -> PrenexFormula:
    form = a_form(g)
    if form is None:
        raise EngineError(f"{g} is not in canonical A-form")
    return _rewrite(phi, lambda q: Const(form.b) if q.kind == "forall" else form.fixed)


def reduce_E(phi: PrenexFormula, g: Shop) -> PrenexFormula:
    form = e_form(g)
    if form is None:
        raise EngineError(f"{g} is not in canonical E-form")
    return _rewrite(phi, lambda q: Const(form.b) if q.kind == "exists" else form.covering)


# selection


def select_engine(D: "DSM") -> Engine:
    """Pick the strongest engine the DSM justifies (least witnesses first)."""
    n = D.n
    if n < 2:
        return BRUTE
    members = D.sorted()
    a_shops = [f for f in members if a_witnesses(f)]
    e_shops = [f for f in members if e_witnesses(f)]
    if a_shops and e_shops:
        for f in members:
            fe = detect_shape(f).forall_exists
            if fe:
                b, b2 = fe[0]
                return forall_exists_engine(n, b, b2, "AE_logspace", (a_shops[0], e_shops[0]))
        raise EngineError("A- and E-shops present but no forall-exists member")  # pragma: no cover
    for f in members:
        fe = detect_shape(f).forall_exists
        if fe:
            return forall_exists_engine(n, *fe[0])
    if a_shops:
        return a_engine(canonicalize_A(a_shops[0]))
    if e_shops:
        return e_engine(canonicalize_E(e_shops[0]))
    for f in members:
        shape = detect_shape(f)
        if shape.forall:
            return forall_engine(n, shape.forall[0])
        if shape.exists:
            return exists_engine(n, shape.exists[0])
    return BRUTE


def check_engine(B: "Structure", engine: Engine) -> None:
    for f in engine.provenance:
        if f.n != B.n or not is_she(f, B):
            raise EngineError(f"engine {engine} relies on {f}, which is not a she of the structure")


@dataclass(frozen=True)
class EvalResult:
    value: bool
    engine: Engine
    residual: PrenexFormula


def run(B: "Structure", phi: Formula, engine: Engine | None = None) -> EvalResult:
    """Evaluate a sentence through an engine and keep the residual formula."""
    if free_vars(phi):
        raise FormulaError(f"not a sentence: free variables {sorted(free_vars(phi))}")
    if has_equality(phi):
        # the she machinery says nothing about equality
        engine = BRUTE
    elif engine is None:
        engine = select_engine(she_monoid(B))
    check_engine(B, engine)
    residual = engine.reduce(prenex(phi))
    return EvalResult(evaluate_bruteforce(B, residual.to_formula()), engine, residual)


def evaluate(B: "Structure", phi: Formula, engine: Engine | None = None) -> bool:
    return run(B, phi, engine).value


_ENGINE_SPEC = re.compile(r"(?P<kind>[A-Za-z_]+)(?::(?P<arg>.*))?\Z")


def parse_engine(text: str, n: int) -> Engine | None:
    """Engine from a command-line spec; ``None`` means automatic selection.

    Accepted: ``auto``, ``brute``, ``forall:B``, ``exists:B``,
    ``forall_exists:B,B2``, ``AE:B,B2``, ``A:SHOP``, ``E:SHOP``.
    """
    m = _ENGINE_SPEC.match(text.strip())
    if not m:
        raise EngineError(f"bad engine spec {text!r}")
    kind, arg = m.group("kind"), m.group("arg")
    try:
        if kind == "auto" and arg is None:
            return None
        if kind == "brute" and arg is None:
            return BRUTE
        if kind in ("forall", "exists") and arg is not None:
            b = _element(arg, n)
            return forall_engine(n, b) if kind == "forall" else exists_engine(n, b)
        if kind in ("forall_exists", "AE") and arg is not None:
            b, b2 = (_element(x, n) for x in arg.split(","))
            if b == b2:
                raise EngineError("forall-exists engine needs two distinct elements")
            return forall_exists_engine(n, b, b2, "AE_logspace" if kind == "AE" else "forall_exists_subst")
        if kind in ("A", "E") and arg is not None:
            g = Shop.parse(arg)
            if g.n != n:
                raise EngineError(f"shop {g} is on {g.n} elements, structure has {n}")
            return a_engine(g) if kind == "A" else e_engine(g)
    except ValueError as exc:
        raise EngineError(f"bad engine spec {text!r}: {exc}") from None
    raise EngineError(f"bad engine spec {text!r}")


def _element(word: str, n: int) -> int:
    b = int(word)
    if not 0 <= b < n:
        raise EngineError(f"element {b} outside the domain")
    return b
