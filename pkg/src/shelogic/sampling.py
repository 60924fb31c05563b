"""Seeded random structures and formulas for oracle comparisons."""

from __future__ import annotations

import itertools
import random
from typing import Sequence

from shelogic.logic import (And, Atom, Const, Exists, Forall, Formula, Or, Top, Var,
                            conj, disj)
from shelogic.model import Relation, Signature, Structure


def random_structure(rng: random.Random, n: int, arities: Sequence[int] = (2,),
                     density: float | None = None) -> Structure:
    """Relations named ``E`` (first binary), ``U`` (first unary), else ``R0, R1, ...``."""
    rels = []
    used = set()
    for i, k in enumerate(arities):
        name = {2: "E", 1: "U"}.get(k, f"R{i}")
        if name in used:
            name = f"R{i}"
        used.add(name)
        p = rng.random() if density is None else density
        tuples = [t for t in itertools.product(range(n), repeat=k) if rng.random() < p]
        rels.append((name, Relation.of(k, tuples)))
    return Structure(n, rels)


def random_atom(rng: random.Random, signature: Signature, terms: Sequence[str],
                constants: int = 0) -> Atom:
    name, arity = rng.choice(signature.relations)
    args = []
    for _ in range(arity):
        if constants and rng.random() < 0.15:
            args.append(Const(rng.randrange(constants)))
        else:
            args.append(Var(rng.choice(terms)))
    return Atom(name, tuple(args))


def random_matrix(rng: random.Random, signature: Signature, variables: Sequence[str],
                  atoms: int) -> Formula:
    """A random and/or combination of exactly ``atoms`` atoms."""
    leaves = [random_atom(rng, signature, variables) for _ in range(atoms)]
    while len(leaves) > 1:
        i = rng.randrange(len(leaves) - 1)
        op = And if rng.random() < 0.5 else Or
        leaves[i:i + 2] = [op((leaves[i], leaves[i + 1]))]
    return leaves[0]


def random_sentence(rng: random.Random, signature: Signature, max_prefix: int = 4,
                    max_atoms: int = 3) -> Formula:
    """Prenex sentence with a random prefix over ``x1..xm`` and a small matrix."""
    m = rng.randint(1, max_prefix)
    variables = [f"x{i + 1}" for i in range(m)]
    phi = random_matrix(rng, signature, variables, rng.randint(1, max_atoms))
    for v in reversed(variables):
        phi = (Exists if rng.random() < 0.5 else Forall)(v, phi)
    return phi


def random_formula(rng: random.Random, signature: Signature, free: Sequence[str],
                   depth: int = 4, max_vars: int = 4) -> Formula:
    """Arbitrary (non-prenex) positive formula whose free variables lie in ``free``."""
    pool = [f"y{i + 1}" for i in range(max_vars)]

    def go(d: int, scope: list[str]) -> Formula:
        r = rng.random()
        if d == 0 or (r < 0.3 and scope):
            if not scope:
                return Top()
            return random_atom(rng, signature, scope)
        if r < 0.6:
            parts = (go(d - 1, scope), go(d - 1, scope))
            return conj(parts) if rng.random() < 0.5 else disj(parts)
        v = rng.choice(pool)
        body = go(d - 1, scope + [v] if v not in scope else scope)
        return (Exists if rng.random() < 0.5 else Forall)(v, body)

    return go(depth, list(free))
