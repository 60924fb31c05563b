import functools
import itertools
import random

import pytest
from hypothesis import given, strategies as st

from shelogic.dsm import closure
from shelogic.logic import (Forall, Exists, FormulaError, evaluate_bruteforce, parse_formula,
                            prenex, quantifier_count)
from shelogic.model import (Relation, Structure, clique, complement_digraph, k2_plus_k1, nae)
from shelogic.qe import (BRUTE, Engine, EngineError, a_engine, e_engine, evaluate,
                         forall_engine, forall_exists_engine, parse_engine, reduce_A, reduce_E,
                         reduce_exists, reduce_forall, reduce_forall_exists, run, select_engine)
from shelogic.sampling import random_formula, random_sentence
from shelogic.shop import (Shop, a_form, a_witnesses, canonicalize_A, canonicalize_E,
                           detect_shape, e_form, e_witnesses, she_monoid)

P = Shop.parse
U1 = Structure(2, {"U": Relation.of(1, [(1,)])})
seeds = st.integers(0, 2**32 - 1)


def pf(text):
    return prenex(parse_formula(text))


def text(phi):
    return str(phi.to_formula())


@functools.lru_cache(maxsize=None)
def digraphs(n):
    """All single-binary-relation structures on ``n`` elements with their she-monoids."""
    cells = list(itertools.product(range(n), repeat=2))
    out = []
    for m in range(1 << len(cells)):
        B = Structure(n, {"E": Relation.of(2, [c for i, c in enumerate(cells) if m >> i & 1])})
        out.append((B, she_monoid(B)))
    return out


def pool(pred):
    return [(B, D) for n in (2, 3) for B, D in digraphs(n) if pred(D)]


def shapes(D):
    return [detect_shape(f) for f in D.sorted()]


@functools.lru_cache(maxsize=None)
def pools():
    return {
        "forall": pool(lambda D: any(s.forall for s in shapes(D))),
        "exists": pool(lambda D: any(s.exists for s in shapes(D))),
        "fe": pool(lambda D: any(s.forall_exists for s in shapes(D))),
        "A": pool(lambda D: any(a_witnesses(f) for f in D)),
        "E": pool(lambda D: any(e_witnesses(f) for f in D)),
    }


def envs(names, values):
    for combo in itertools.product(values, repeat=len(names)):
        yield dict(zip(names, combo))


class TestReductions:
    def test_forall(self):
        assert text(reduce_forall(pf("forall u exists v E(u,v)"), 0)) == "exists v E(@0,v)"

    def test_forall_nothing(self):
        phi = pf("exists u E(u,u)")
        assert reduce_forall(phi, 1) == phi

    def test_exists(self):
        assert text(reduce_exists(pf("exists u exists v E(u,v)"), 0)) == "E(@0,@0)"
        phi = pf("forall u E(u,u)")
        assert reduce_exists(phi, 0) == phi

    def test_forall_exists(self):
        assert text(reduce_forall_exists(pf("forall u exists v E(u,v)"), 0, 1)) == "E(@0,@1)"

    def test_a(self):
        got = reduce_A(pf("forall u exists v E(u,v)"), P("(012|1|2)"))
        assert text(got) == "exists v in {1,2} E(@0,v)"

    def test_a_existential_only(self):
        assert text(reduce_A(pf("exists v E(v,v)"), P("(012|1|2)"))) == "exists v in {1,2} E(v,v)"

    def test_e(self):
        got = reduce_E(pf("exists v forall u E(u,v)"), P("(0|01|02)"))
        assert text(got) == "forall u in {1,2} E(u,@0)"

    def test_e_no_universals(self):
        assert text(reduce_E(pf("exists u exists v E(u,v)"), P("(0|01|02)"))) == "E(@0,@0)"

    def test_form_errors(self):
        with pytest.raises(EngineError):
            reduce_A(pf("forall u E(u,u)"), P("(0|1|2)"))
        with pytest.raises(EngineError):
            reduce_E(pf("forall u E(u,u)"), P("(012|1|2)"))
        with pytest.raises(EngineError):
            a_engine(P("(0|1|2)"))
        with pytest.raises(EngineError):
            e_engine(P("(0|1|2)"))

    def test_restriction_intersection(self):
        # reducing twice keeps restrictions inside the first one
        phi = reduce_A(pf("exists v E(v,v)"), P("(012|1|2)"))
        assert reduce_A(phi, P("(012|1|2)")) == phi

    # on U={1}, both sides by brute force
    def test_unary_forall(self):
        phi = pf("forall u U(u)")
        red = reduce_forall(phi, 0)
        assert text(red) == "U(@0)"
        assert evaluate_bruteforce(U1, red.to_formula()) is False
        assert evaluate_bruteforce(U1, phi.to_formula()) is False

    def test_unary_exists(self):
        phi = pf("exists v U(v)")
        red = reduce_exists(phi, 1)
        assert text(red) == "U(@1)"
        assert evaluate_bruteforce(U1, red.to_formula()) is True is evaluate_bruteforce(U1, phi.to_formula())

    def test_unary_forall_exists(self):
        for src, expected in [("forall u exists v U(v)", True), ("exists v forall u U(u)", False)]:
            red = reduce_forall_exists(pf(src), 0, 1)
            assert evaluate_bruteforce(U1, red.to_formula()) is expected
            assert evaluate_bruteforce(U1, parse_formula(src)) is expected


class TestSelection:
    def test_k3_brute(self):
        assert select_engine(she_monoid(clique(3))) == BRUTE

    def test_k2_plus_k1(self):
        e = select_engine(she_monoid(k2_plus_k1()))
        assert e.kind == "A_reduce"
        assert a_form(e.shop) is not None
        assert e.shop == canonicalize_A(P("(0|1|012)"))

    def test_complement(self):
        e = select_engine(she_monoid(complement_digraph(k2_plus_k1())))
        assert e.kind == "E_reduce" and e_form(e.shop) is not None
        assert e.shop == canonicalize_E(P("(02|12|2)"))

    def test_boolean_logspace(self):
        e = select_engine(closure([P("(01|1)")]))
        assert (e.kind, e.b, e.b2) == ("AE_logspace", 0, 1)
        assert str(e) == "AE_logspace(0,1)"

    def test_canonical_generator(self):
        # a forall shop is itself an A-shop already in canonical form
        assert str(select_engine(closure([P("(012|1|2)")]))) == "A_reduce(012|1|2)"

    def test_one_element(self):
        assert select_engine(closure([P("(0)")])) == BRUTE

    def test_provenance_are_shes(self):
        for B, D in digraphs(3)[::7]:
            e = select_engine(D)
            for f in e.provenance:
                assert f in D.members

    def test_every_kind_reachable_by_override(self):
        assert str(forall_engine(3, 1)) == "forall_subst(1)"
        assert str(forall_exists_engine(3, 0, 2)) == "forall_exists_subst(0,2)"
        assert str(a_engine(P("(012|1|2)"))) == "A_reduce(012|1|2)"
        with pytest.raises(EngineError):
            Engine("magic")


class TestEvaluate:
    def test_k3_brute(self):
        r = run(clique(3), parse_formula("forall u forall v exists w (E(u,w) & E(v,w))"))
        assert r.value is True and r.engine == BRUTE

    def test_unary_logspace(self):
        r = run(U1, parse_formula("forall u exists v U(v)"))
        assert r.value is True and r.engine.kind == "AE_logspace"
        assert quantifier_count(r.residual.to_formula()) == 0

    def test_nae(self):
        assert evaluate(nae(2), parse_formula("forall u forall v forall w R(u,v,w)")) is False

    def test_non_sentence(self):
        with pytest.raises(FormulaError):
            evaluate(clique(3), parse_formula("E(x,y)", free=["x", "y"]))

    def test_unsound_engine(self):
        with pytest.raises(EngineError):
            evaluate(clique(3), parse_formula("exists u E(u,u)"), forall_engine(3, 0))
        with pytest.raises(EngineError):
            evaluate(clique(3), parse_formula("exists u E(u,u)"), forall_engine(2, 0))

    def test_equality_forces_brute(self):
        r = run(U1, parse_formula("forall u exists v (u = v & U(v))"))
        assert r.engine == BRUTE and r.value is False

    def test_explicit_sound_engine(self):
        e = a_engine(canonicalize_A(P("(0|1|012)")))
        phi = parse_formula("forall u exists v E(u,v)")
        assert evaluate(k2_plus_k1(), phi, e) is evaluate_bruteforce(k2_plus_k1(), phi) is False


class TestOracleEquivalence:
    @given(seeds)
    def test_random_digraphs(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 3)
        B, D = rng.choice(digraphs(n)) if n > 1 else (Structure(1, {"E": Relation.of(2, [(0, 0)])}), None)
        engine = select_engine(D) if D is not None else BRUTE
        for _ in range(10):
            phi = random_sentence(rng, B.signature)
            assert evaluate(B, phi, engine) is evaluate_bruteforce(B, phi)

    @pytest.mark.parametrize("kind", ["A", "E", "fe"])
    def test_shape_pools(self, kind):
        rng = random.Random(kind)
        for B, D in rng.sample(pools()[kind], 15):
            engine = select_engine(D)
            assert engine.kind != "brute"
            for _ in range(8):
                phi = random_sentence(rng, B.signature)
                assert evaluate(B, phi, engine) is evaluate_bruteforce(B, phi)

    @given(seeds)
    def test_non_increasing(self, seed):
        rng = random.Random(seed)
        B, D = rng.choice(digraphs(3))
        phi = prenex(random_sentence(rng, B.signature))
        engine = select_engine(D)
        red = engine.reduce(phi)
        assert len(red.prefix) <= len(phi.prefix)
        assert engine.reduce(red) == red


def _pick(kind, seed):
    rng = random.Random(seed)
    B, D = rng.choice(pools()[kind])
    return rng, B, D


class TestSubstitutionLemmas:
    @given(seeds)
    def test_forall(self, seed):
        rng, B, D = _pick("forall", seed)
        b = next(s.forall[0] for s in shapes(D) if s.forall)
        phi = random_formula(rng, B.signature, ["u", "x"], depth=3)
        for env in envs(["x"], range(B.n)):
            assert (evaluate_bruteforce(B, Forall("u", phi), env)
                    is evaluate_bruteforce(B, phi, {**env, "u": b}))

    @given(seeds)
    def test_exists(self, seed):
        rng, B, D = _pick("exists", seed)
        b = next(s.exists[0] for s in shapes(D) if s.exists)
        phi = random_formula(rng, B.signature, ["u", "x"], depth=3)
        for env in envs(["x"], range(B.n)):
            assert (evaluate_bruteforce(B, Exists("u", phi), env)
                    is evaluate_bruteforce(B, phi, {**env, "u": b}))

    @given(seeds)
    def test_forall_exists_chain(self, seed):
        rng, B, D = _pick("fe", seed)
        b, b2 = next(s.forall_exists[0] for s in shapes(D) if s.forall_exists)
        phi = random_formula(rng, B.signature, ["u", "x1", "x2"], depth=3)
        for env in envs(["x1", "x2"], (b, b2)):
            at_b = evaluate_bruteforce(B, phi, {**env, "u": b})
            at_b2 = evaluate_bruteforce(B, phi, {**env, "u": b2})
            for c in range(B.n):
                at_c = evaluate_bruteforce(B, phi, {**env, "u": c})
                assert not at_b or at_c
                assert not at_c or at_b2


class TestInterpolation:
    @given(seeds)
    def test_a(self, seed):
        rng, B, D = _pick("A", seed)
        g = canonicalize_A(next(f for f in D.sorted() if a_witnesses(f)))
        assert g in D.members
        form = a_form(g)
        phi = random_formula(rng, B.signature, ["u", "x"], depth=3)
        for env in envs(["x"], sorted(form.fixed | {form.b})):
            if evaluate_bruteforce(B, phi, {**env, "u": form.b}):
                assert evaluate_bruteforce(B, Forall("u", phi), env)
            if evaluate_bruteforce(B, Exists("u", phi), env):
                assert any(evaluate_bruteforce(B, phi, {**env, "u": c}) for c in form.fixed)

    @given(seeds)
    def test_e(self, seed):
        rng, B, D = _pick("E", seed)
        g = canonicalize_E(next(f for f in D.sorted() if e_witnesses(f)))
        assert g in D.members
        form = e_form(g)
        phi = random_formula(rng, B.signature, ["u", "x"], depth=3)
        for env in envs(["x"], sorted(form.covering | {form.b})):
            if evaluate_bruteforce(B, Exists("u", phi), env):
                assert evaluate_bruteforce(B, phi, {**env, "u": form.b})
            if all(evaluate_bruteforce(B, phi, {**env, "u": c}) for c in form.covering):
                assert evaluate_bruteforce(B, Forall("u", phi), env)


class TestParseEngine:
    @pytest.mark.parametrize("spec, expected", [
        ("auto", None),
        ("brute", "brute"),
        ("forall:1", "forall_subst(1)"),
        ("exists:0", "exists_subst(0)"),
        ("forall_exists:0,1", "forall_exists_subst(0,1)"),
        ("AE:0,1", "AE_logspace(0,1)"),
        ("A:(012|1|2)", "A_reduce(012|1|2)"),
        ("E:(0|01|02)", "E_reduce(0|01|02)"),
    ])
    def test_ok(self, spec, expected):
        e = parse_engine(spec, 3)
        assert (e if e is None else str(e)) == expected

    @pytest.mark.parametrize("spec", ["", "forall", "forall:7", "forall_exists:1,1", "A:(0|1)",
                                      "A:(0|1|2)", "E:nonsense", "brute:1", "warp:2", "AE:0"])
    def test_bad(self, spec):
        with pytest.raises(EngineError):
            parse_engine(spec, 3)
