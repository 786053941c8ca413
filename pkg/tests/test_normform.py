import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_qf_formula
from proofkit import normform as nf
from proofkit import propcalc as pc
from proofkit import syntax as sx
from proofkit.errors import CheckError, SizeGuardExceeded
from proofkit.syntax import App, Atom, Exists, Not, Or, PredSym, Var, EPS

Q = PredSym("q", 1)
P = PredSym("p0", 0)
R2 = PredSym("p", 2)


def qx(v="x"):
    return Atom(Q, (Var(v),))


def taut_equiv(a, b):
    return pc.taut_check(sx.fiff(a, b)).consequence


# --- negation form ----------------------------------------------------------


def test_negation_form_table():
    assert nf.to_negation_form(Not(Exists("x", qx()))) == sx.fall("x", Not(qx()))
    assert nf.to_negation_form(Not(Not(Atom(P)))) == Atom(P)
    assert nf.to_negation_form(Not(Or(Atom(P), qx()))) == sx.fand(
        Not(Atom(P)), Not(qx())
    )
    assert nf.to_negation_form(Not(sx.fand(Atom(P), qx()))) == Or(
        Not(Atom(P)), Not(qx())
    )
    assert nf.to_negation_form(Not(sx.fall("x", qx()))) == Exists("x", Not(qx()))


def _proper_negs_before_atoms(f):
    def walk(g):
        pair = sx.as_all(g)
        if pair:
            return walk(pair[1])
        pair = sx.as_and(g)
        if pair:
            return walk(pair[0]) and walk(pair[1])
        if isinstance(g, Atom):
            return True
        if isinstance(g, Not):
            return isinstance(g.body, Atom)
        if isinstance(g, Or):
            return walk(g.left) and walk(g.right)
        if isinstance(g, Exists):
            return walk(g.body)
        return False

    return walk(f)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 100_000))
def test_negation_form_equivalent_and_proper(seed):
    rng = random.Random(seed)
    f = random_qf_formula(rng, max_atoms=6, depth=4)
    g = nf.to_negation_form(f)
    assert _proper_negs_before_atoms(g)
    assert taut_equiv(f, g)


# --- prenex form ------------------------------------------------------------


def test_prenex_examples():
    f = Or(Atom(P), Exists("x", qx()))
    assert nf.to_prenex(f) == Exists("x", Or(Atom(P), qx()))
    g = sx.fand(sx.fall("x", qx()), Atom(P))
    assert nf.to_prenex(g) == sx.fall("x", sx.fand(qx(), Atom(P)))
    open_f = Or(Atom(P), Not(Atom(P)))
    assert nf.to_prenex(open_f) == open_f


def test_prenex_open_matrix_and_free_variables():
    f = Or(Exists("x", Atom(R2, (Var("x"), Var("y")))), Not(Exists("z", qx("z"))))
    p = nf.to_prenex(f)
    prefix, matrix = nf.prenex_prefix(p)
    assert prefix and sx.is_open(matrix)
    assert sx.free_vars(p) == sx.free_vars(f)


def test_prenex_left_quantifier_pulled_first():
    f = Or(Exists("x", qx()), Exists("y", qx("y")))
    p = nf.to_prenex(f)
    prefix, _ = nf.prenex_prefix(p)
    assert [k for k, _ in prefix] == ["E", "E"]
    assert [v for _, v in prefix] == ["x", "y"]


# --- conjunctive and normal form ---------------------------------------------


def test_conjunctive_examples():
    p, q, s = Atom(P), Atom(PredSym("q0", 0)), Atom(PredSym("s0p", 0))
    f = Or(p, sx.fand(q, s))
    out = nf.to_conjunctive(f)
    assert out == sx.fand(Or(p, q), Or(p, s))
    lits = sx.conj([p, Not(q), s])
    assert nf.to_conjunctive(lits) == lits


def test_conjunctive_guard_triggers_on_parity_blowup():
    xs = [Atom(PredSym(f"x{i}", 0)) for i in range(12)]
    f = xs[0]
    for x in xs[1:]:
        f = Or(sx.fand(f, Not(x)), sx.fand(Not(f), x))  # xor chain
    with pytest.raises(SizeGuardExceeded):
        nf.to_conjunctive(f, guard=64)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 100_000))
def test_conjunctive_truth_table_equivalent(seed):
    rng = random.Random(seed)
    f = random_qf_formula(rng, max_atoms=8, depth=4)
    try:
        g = nf.to_conjunctive(f, guard=2000)
    except SizeGuardExceeded:
        return
    assert taut_equiv(f, g)


def test_normal_form_requires_closed():
    with pytest.raises(CheckError):
        nf.to_normal_form(qx())
    f = Not(Exists("x", Or(qx(), Atom(P))))
    out = nf.to_normal_form(f)
    prefix, matrix = nf.prenex_prefix(out)
    assert prefix == [("A", "x")]
    assert sx.is_open(matrix)


# --- freezing ----------------------------------------------------------------


def test_freeze_unary_example():
    f = sx.eq(Var("x"), Var("x"))
    res = nf.freeze(f)
    (xname, r), = res.witnesses
    assert xname == "x"
    assert r.subscript == Exists("x", Not(sx.eq(Var("x"), Var("x"))))
    assert res.frozen == sx.eq(r, r)
    assert sx.is_closed(res.frozen)


def test_freeze_closed_identity():
    f = sx.eq(App(EPS), App(EPS))
    res = nf.freeze(f)
    assert res.frozen == f and res.witnesses == ()


def test_freeze_two_variables_nested_levels():
    f = Atom(R2, (Var("x"), Var("y")))
    res = nf.freeze(f)
    (x, rx), (y, ry) = res.witnesses
    assert sx.const_level(rx) == 1
    assert sx.const_level(ry) == 2
    assert rx in sx.appearing_constants(ry.subscript)
    assert sx.is_closed(res.frozen)


def test_unfreeze_gives_variant_of_matrix():
    f = Or(qx(), Exists("z", Atom(R2, (Var("z"), Var("y")))))
    res = nf.freeze(f)
    back = nf.unfreeze(res)
    assert sx.is_variant(back, f)


# --- special cases -----------------------------------------------------------


def test_special_case_examples():
    f = sx.fall("x", Exists("y", Atom(R2, (Var("x"), Var("y")))))
    d = nf.SpecialCaseDirective((("term", App(EPS)), ("witness", "w")))
    out = nf.special_case(f, d)
    r = sx.special_constant(Exists("y", Atom(R2, (App(EPS), Var("y")))))
    assert out == Atom(R2, (App(EPS), r))
    assert nf.special_case(f, nf.SpecialCaseDirective(())) == f


def test_special_case_conjuncts():
    p, q, s = Atom(P), Atom(PredSym("q0", 0)), Atom(PredSym("s0p", 0))
    f = sx.fand(Or(p, q), s)
    assert nf.special_case_conjuncts(f) == [Or(p, q), s]


def test_special_case_errors():
    f = sx.fall("x", qx())
    with pytest.raises(CheckError):
        nf.special_case(
            f, nf.SpecialCaseDirective((("term", App(EPS)), ("term", App(EPS))))
        )
    with pytest.raises(CheckError):
        nf.special_case(f, nf.SpecialCaseDirective((("witness", "w"),)))
    with pytest.raises(CheckError):
        nf.special_case(
            Exists("x", qx()), nf.SpecialCaseDirective((("term", App(EPS)),))
        )
    with pytest.raises(CheckError):
        nf.special_case(
            f, nf.SpecialCaseDirective((("term", Var("v")),))
        )


def test_special_case_closed_when_directive_exhausts_prefix():
    f = sx.fall("x", Exists("y", Atom(R2, (Var("x"), Var("y")))))
    d = nf.SpecialCaseDirective((("term", App(EPS)), ("witness", "w")))
    assert sx.is_closed(nf.special_case(f, d))
