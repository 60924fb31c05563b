"""Complexity verdicts for model checking positive equality-free sentences.

A verdict depends only on two facts about ``shE(B)``: whether it contains
an A-shop, and whether it contains an E-shop.  For domains of size at most
three every verdict is a theorem.  Beyond that only the upper bounds are,
and completeness claims are labelled ``conjectured-hardness`` unless a
sufficient PSPACE-hardness criterion applies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from shelogic.dsm import DSM, is_block_permutation_bounded, is_permutation_subgroup
from shelogic.shop import Shop, a_witnesses, detect_shape, e_witnesses, she_monoid

if TYPE_CHECKING:
    from shelogic.model import Structure

LOGSPACE = "Logspace"
NP = "NP-complete"
CONP = "coNP-complete"
PSPACE = "PSPACE-complete"
VERDICTS = (LOGSPACE, NP, CONP, PSPACE)

THEOREM = "theorem"
CONJECTURED = "conjectured-hardness"

#: Minimal generators are listed only up to this domain size.
GENERATOR_CAP = 3

_RULES = {
    (True, True): "A-shop and E-shop both present: quantifiers eliminate to constants",
    (True, False): "A-shop present, no E-shop: universals eliminate, existentials range over B'",
    (False, True): "E-shop present, no A-shop: existentials eliminate, universals range over B'",
    (False, False): "neither an A-shop nor an E-shop",
}

_UPPER = {LOGSPACE: "Logspace", NP: "NP", CONP: "coNP", PSPACE: "PSPACE"}


@dataclass(frozen=True)
class Classification:
    verdict: str
    certainty: str
    n: int
    she_count: int
    a_shop: Shop | None = None
    e_shop: Shop | None = None
    forall_exists: Shop | None = None
    hardness_evidence: str | None = None
    generators: tuple[Shop, ...] | None = None
    rule: str = ""
    equality: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def upper_bound(self) -> str:
        """Membership class; always theorem-grade."""
        return _UPPER[self.verdict]

    @property
    def witnesses(self) -> tuple[Shop, ...]:
        return tuple(s for s in (self.a_shop, self.e_shop) if s is not None)

    def headline(self) -> str:
        return f"{self.verdict} ({self.certainty})"

    def record(self) -> dict[str, object]:
        """Flat key-value view; shops are rendered as literals."""

        def lit(s):
            return None if s is None else str(s)

        return {
            "verdict": self.verdict,
            "certainty": self.certainty,
            "upper_bound": self.upper_bound,
            "domain_size": self.n,
            "equality": self.equality,
            "she_count": self.she_count,
            "a_shop": lit(self.a_shop),
            "e_shop": lit(self.e_shop),
            "forall_exists_shop": lit(self.forall_exists),
            "hardness_evidence": self.hardness_evidence,
            "generators": None if self.generators is None else " ".join(map(str, self.generators)),
            "rule": self.rule,
            "notes": "; ".join(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.record(), indent=2, sort_keys=False)


def _hardness_evidence(D: DSM) -> str | None:
    if is_permutation_subgroup(D):
        return "permutation subgroup"
    w = is_block_permutation_bounded(D)
    if w is not None:
        return f"block-permutation bound: {w}"
    return None


def classify_dsm(D: DSM, generators: bool | None = None) -> Classification:
    """Verdict for any structure whose she-monoid is ``D``."""
    n = D.n
    if generators is None:
        generators = n <= GENERATOR_CAP
    gens = D.generators if generators else None
    if n == 1:
        return Classification(LOGSPACE, THEOREM, n, len(D), generators=gens,
                              rule="one-element domain",
                              notes=("boolean sentence value problem",))
    members = D.sorted()
    a = next((f for f in members if a_witnesses(f)), None)
    e = next((f for f in members if e_witnesses(f)), None)
    fe = next((f for f in members if detect_shape(f).forall_exists), None) if a and e else None
    key = (a is not None, e is not None)
    verdict = {(True, True): LOGSPACE, (True, False): NP,
               (False, True): CONP, (False, False): PSPACE}[key]
    evidence = _hardness_evidence(D) if verdict == PSPACE else None
    notes: list[str] = []
    if verdict == LOGSPACE or n <= 3:
        certainty = THEOREM
    elif verdict == PSPACE and evidence is not None:
        certainty = THEOREM
    else:
        certainty = CONJECTURED
        notes.append(f"membership in {_UPPER[verdict]} is proved; hardness for domains "
                     "of size 4 or more is conjectured")
    return Classification(verdict, certainty, n, len(D), a, e, fe, evidence, gens,
                          _RULES[key], notes=tuple(notes))


def classify(B: "Structure") -> Classification:
    return classify_dsm(she_monoid(B))


def classify_with_equality(B: "Structure") -> Classification:
    """Verdict once equality is allowed in sentences."""
    if B.n == 1:
        return Classification(LOGSPACE, THEOREM, 1, 1, rule="one-element domain", equality=True,
                              notes=("boolean sentence value problem",))
    return Classification(PSPACE, THEOREM, B.n, -1,
                          hardness_evidence="equality graph: only permutations survive",
                          rule="equality on at least two elements", equality=True,
                          notes=("shes of the structure expanded by equality are permutations",))


def verdict_leq(a: str, b: str) -> bool:
    """Partial order Logspace < NP, coNP < PSPACE (NP and coNP incomparable)."""
    if a == b or a == LOGSPACE or b == PSPACE:
        return True
    return False


def explain(c: Classification) -> str:
    lines = [f"verdict: {c.verdict}", f"certainty: {c.certainty}"]
    lines.append(f"upper bound: {c.upper_bound} (theorem)")
    lines.append(f"domain size: {c.n}")
    if c.equality:
        lines.append("fragment: with equality")
    else:
        lines.append(f"shes: {c.she_count}")
        if c.generators is not None:
            lines.append("generators: " + ", ".join(map(str, c.generators)))
        if c.n > 1:
            lines.append("A-shop: " + (_witness(c.a_shop, a_witnesses) if c.a_shop else "none"))
            lines.append("E-shop: " + (_witness(c.e_shop, e_witnesses) if c.e_shop else "none"))
        if c.forall_exists is not None:
            b, b2 = detect_shape(c.forall_exists).forall_exists[0]
            lines.append(f"forall-exists shop: {c.forall_exists} (forall_{b} exists_{b2})")
    lines.append(f"rule: {c.rule}")
    if c.hardness_evidence:
        lines.append(f"hardness evidence: {c.hardness_evidence}")
    for note in c.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def _witness(f: Shop, which) -> str:
    return f"{f} (at {','.join(map(str, which(f)))})"
