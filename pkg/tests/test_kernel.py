import random

import pytest

from proofkit import normform as nf
from proofkit import propcalc as pc
from proofkit import syntax as sx
from proofkit.errors import CheckError
from proofkit.kernel import (
    ProofBuilder,
    ProofLine,
    ProofObject,
    Registry,
    Theory,
    bsi_template,
    check_proof,
    check_script,
    classify_delta,
    deduction_transform,
    equality_substitution,
    extract_special_sequence,
    freeze_proof,
    negation_form_proof,
    parse_script_file,
    prenex_equivalence_proof,
    proves,
    purge_extraneous,
    special_case_proof,
    variant_iff_proof,
)
from proofkit.kernel import core, scripts as ks
from proofkit.syntax import (
    App,
    Atom,
    Exists,
    FnSym,
    Language,
    Not,
    Or,
    PredSym,
    SymbolTable,
    Var,
    EPS,
    S0,
    S1,
    PD,
    CAT,
    ZPROD,
)

Q = PredSym("q", 1)
P2 = PredSym("p", 2)
LANG = Language((EPS, S0, S1, PD, CAT, ZPROD), (Q, P2), EPS)
ST = SymbolTable(LANG)
TOY = Theory("toy", (), EPS)
E = App(EPS)


def parse(t, kind="formula"):
    return sx.parse(t, kind, ST)


# --- delta classification ----------------------------------------------------


def test_classify_special_axiom():
    e = parse("(exists x (q x))")
    r = sx.special_constant(e, "r")
    cls = classify_delta(TOY, sx.fimp(e, Atom(Q, (r,))))
    assert cls.kind == "special-axiom" and cls.owner == r


def test_classify_substitution_formula():
    e = parse("(exists x (q x))")
    cls = classify_delta(TOY, sx.fimp(Atom(Q, (E,)), e))
    assert cls.kind == "substitution"
    assert cls.detail[1] == E


def test_classify_identity_and_equality():
    assert classify_delta(TOY, parse("(= eps eps)")).kind == "identity"
    f = sx.fimp(
        sx.conj([sx.eq(E, App(PD, (E,)))]),
        sx.eq(App(S0, (E,)), App(S0, (App(PD, (E,)),))),
    )
    assert classify_delta(TOY, f).kind == "equality"


def test_classify_axiom_instance_and_rejection():
    t = Theory("t", (Atom(Q, (Var("x"),)),), EPS)
    cls = classify_delta(t, Atom(Q, (App(S0, (E,)),)))
    assert cls.kind == "axiom-instance" and cls.detail[0] == 0
    with pytest.raises(CheckError) as err:
        classify_delta(t, Not(Atom(Q, (E,))))
    assert "not a" in str(err.value)
    with pytest.raises(CheckError):
        classify_delta(t, Atom(Q, (Var("x"),)))  # not closed


def test_rho_cap_excludes_high_rank_owners():
    e2 = parse("(exists x (exists y (p x y)))")
    r2 = sx.special_constant(e2)
    spa = sx.special_axiom(r2)
    assert classify_delta(TOY, spa, rho_cap=2).kind == "special-axiom"
    with pytest.raises(CheckError):
        classify_delta(TOY, spa, rho_cap=1)


# --- proof checking -----------------------------------------------------------


def test_check_proof_accepts_identity_line():
    proof = ProofObject((ProofLine(parse("(= eps eps)")),))
    assert check_proof(TOY, proof).ok
    assert proves(TOY, proof, parse("(= eps eps)"))


def test_check_proof_rejects_bare_consequent():
    e = parse("(exists x (q x))")
    r = sx.special_constant(e)
    proof = ProofObject((ProofLine(Atom(Q, (r,))),))
    v = check_proof(TOY, proof)
    assert not v.ok and v.failed_index == 0


def test_check_proof_rejects_open_formula():
    proof = ProofObject((ProofLine(parse("(q x)"), ("taut", ())),))
    v = check_proof(TOY, proof)
    assert not v.ok and "closed" in v.message


def test_theorem5_skeleton_accepted():
    # special axiom, substitution formula, biconditional as consequence
    e = parse("(exists x (not (q x)))")
    r = sx.special_constant(e)
    spa = sx.special_axiom(r)
    inst = sx.subst(e.body, {"x": r})
    subf = sx.fimp(inst, e)
    bic = sx.fiff(sx.fall("x", Atom(Q, (Var("x"),))), Atom(Q, (r,)))
    pb = ProofBuilder()
    i1 = pb.delta(spa)
    i2 = pb.delta(subf)
    pb.taut(bic, (i1, i2))
    assert check_proof(TOY, pb.build()).ok


def test_taut_premises_must_strictly_precede():
    proof = ProofObject(
        (
            ProofLine(parse("(= eps eps)"), ("taut", (0,))),
        )
    )
    v = check_proof(TOY, proof)
    assert not v.ok


def test_level_cap():
    e = parse("(exists x (q x))")
    r = sx.special_constant(e)
    e2 = Exists("y", sx.eq(Var("y"), r))
    r2 = sx.special_constant(e2)
    proof = ProofObject((ProofLine(sx.special_axiom(r2)),))
    assert check_proof(TOY, proof, level_cap=2).ok
    assert not check_proof(TOY, proof, level_cap=1).ok


# --- generated proofs ----------------------------------------------------------


def test_equality_substitution_instances():
    a, b = E, App(PD, (E,))
    f, proof = equality_substitution(a, b, parse("(= x x)"), "x")
    assert f == sx.fimp(
        sx.conj([sx.eq(a, b), sx.eq(a, a)]), sx.eq(b, b)
    )
    assert check_proof(TOY, proof).ok
    # atomic case is a single equality-formula step plus glue
    f2, proof2 = equality_substitution(a, b, Atom(Q, (Var("x"),)), "x")
    assert check_proof(TOY, proof2).ok
    # existential case per the induction
    f3, proof3 = equality_substitution(a, b, parse("(exists y (= y x))"), "x")
    assert check_proof(TOY, proof3).ok
    assert pc.is_equality_substitution(
        sx.fimp(sx.fand(sx.eq(a, b), Atom(Q, (a,))), Atom(Q, (b,)))
    )


def test_equality_substitution_rejects_open_terms():
    with pytest.raises(CheckError):
        equality_substitution(Var("v"), E, parse("(= x x)"), "x")
    with pytest.raises(CheckError):
        equality_substitution(E, App(PD, (Var("v"),)), parse("(= x x)"), "x")


def test_special_case_proofs_check():
    f = sx.fall("x", Exists("y", Atom(P2, (Var("x"), Var("y")))))
    d = nf.SpecialCaseDirective((("term", E), ("witness", "w")))
    out, proof, idx = special_case_proof(f, d)
    assert proof.lines[idx].formula == sx.fimp(f, out)
    assert check_proof(TOY, proof).ok


def test_freeze_proof_checks():
    f = parse("(imp (= (cat x y) eps) (= x eps))")
    res = nf.freeze(f)
    proof, idx = freeze_proof(f, res)
    assert check_proof(TOY, proof).ok
    assert proof.lines[idx].formula == sx.fiff(sx.closure(f), res.frozen)


def test_variant_iff_proof_checks():
    a = parse("(exists x (q x))")
    b = parse("(exists z (q z))")
    proof, idx = variant_iff_proof(a, b)
    assert check_proof(TOY, proof).ok


def test_negation_form_proof_checks():
    f = Not(parse("(exists x (or (q x) (not (q eps))))"))
    proof, idx = negation_form_proof(f)
    assert check_proof(TOY, proof).ok
    target = proof.lines[idx].formula
    assert target == sx.fiff(f, nf.to_negation_form(f))


PRENEX_TEMPLATES = [
    "(or p0a (exists x (q x)))",
    "(or (exists x (q x)) p0a)",
    "(and p0a (exists x (q x)))",
    "(and (exists x (q x)) p0a)",
    "(or p0a (forall x (q x)))",
    "(or (forall x (q x)) p0a)",
    "(and p0a (forall x (q x)))",
    "(and (forall x (q x)) p0a)",
    "(or (exists x (q x)) (exists y (q y)))",
    "(or (exists x (q x)) (not (exists y (q y))))",
    "(and (forall x (q x)) (exists y (q y)))",
    "(imp (exists x (q x)) (exists y (q y)))",
    "(or (forall x (q x)) (forall y (q y)))",
    "(not (exists x (or (q x) (exists y (p x y)))))",
    "(exists x (or (q x) (exists y (p x y))))",
    "(imp (forall x (q x)) (exists y (q y)))",
]


@pytest.mark.parametrize("text", PRENEX_TEMPLATES)
def test_prenex_equivalence_proofs(text):
    st2 = SymbolTable(LANG, auto_predicates=True)
    f = sx.parse(text, "formula", st2)
    assert sx.is_closed(f)
    proof, idx = prenex_equivalence_proof(f)
    v = check_proof(TOY, proof)
    assert v.ok, v.message
    assert proof.lines[idx].formula == sx.fiff(f, nf.to_prenex(f))


# --- deduction and purge -------------------------------------------------------


def _random_proof(rng, theory):
    """A small random but honest proof: axiom instances, substitution
    formulas, and tautological consequences."""
    pb = ProofBuilder()
    terms = [E, App(S0, (E,)), App(PD, (E,))]
    lines = []
    for ax in theory.axioms:
        fv = sx.free_vars(ax)
        inst = sx.subst(ax, {x: rng.choice(terms) for x in fv})
        lines.append(pb.delta(inst))
    e = Exists("x", Atom(Q, (Var("x"),)))
    a = rng.choice(terms)
    lines.append(pb.delta(sx.fimp(Atom(Q, (a,)), e)))
    if lines:
        fs = [pb.lines[i].formula for i in lines]
        pb.taut(sx.disj([fs[0]] + [Not(Not(f)) for f in fs[1:]]), tuple(lines))
    return pb.build()


def test_deduction_transform_examples_and_replay():
    c = parse("(exists x (q x))")  # closed hypothesis of rank 1
    pb = ProofBuilder()
    pb.delta(c)  # instance of the new axiom C in T[C]
    proof = pb.build()
    out = deduction_transform(TOY, c, proof)
    assert out.contains(sx.fimp(c, c))
    assert check_proof(TOY, out).ok

    rng = random.Random(3)
    t = Theory("t", (Atom(Q, (Var("x"),)), parse("(= (pd eps) eps)")), EPS)
    for _ in range(20):
        p = _random_proof(rng, t.extend(c))
        assert check_proof(t.extend(c), p).ok
        out = deduction_transform(t, c, p)
        v = check_proof(t, out)
        assert v.ok, v.message
        assert all(
            out.contains(sx.fimp(c, ln.formula)) for ln in p.lines
        )


def test_deduction_requires_closed_hypothesis():
    with pytest.raises(CheckError):
        deduction_transform(TOY, parse("(q x)"), ProofObject(()))


def test_purge_extraneous():
    scratch = PredSym("scratch", 1)
    t = Theory("t", (Atom(Q, (Var("x"),)),), EPS)
    pb = ProofBuilder()
    i1 = pb.delta(Atom(Q, (E,)))
    i2 = pb.delta(sx.fimp(sx.conj([sx.eq(E, E), Atom(scratch, (E,))]), Atom(scratch, (E,))))
    pb.taut(Or(Atom(Q, (E,)), Atom(scratch, (E,))), (i1, i2))
    proof = pb.build()
    goal = Atom(Q, (E,))
    out = purge_extraneous(t, goal, proof)
    v = check_proof(t, out)
    assert v.ok, v.message
    keep = t.language_symbols()
    for ln in out.lines:
        assert scratch not in sx.appearing_symbols(ln.formula)
    assert out.contains(sx.eq(E, E))

    rng = random.Random(4)
    for _ in range(20):
        p = _random_proof(rng, t)
        out = purge_extraneous(t, Atom(Q, (E,)), p)
        assert check_proof(t, out).ok


def test_purge_unchanged_when_already_inside():
    t = Theory("t", (Atom(Q, (Var("x"),)),), EPS)
    pb = ProofBuilder()
    pb.delta(Atom(Q, (E,)))
    proof = pb.build()
    out = purge_extraneous(t, Atom(Q, (E,)), proof)
    assert [l.formula for l in out.lines][1:] == [Atom(Q, (E,))]


# --- special sequences ----------------------------------------------------------


def test_extract_special_sequence_toy():
    t = Theory("t", (Atom(Q, (Var("x"),)), Not(Atom(Q, (Var("y"),)))), EPS)
    pb = ProofBuilder()
    i1 = pb.delta(Atom(Q, (E,)))
    i2 = pb.delta(Not(Atom(Q, (E,))))
    pb.taut(t.zero_ne_zero(), (i1, i2))
    seq = extract_special_sequence(t, pb.build())
    assert seq.formulas == (Atom(Q, (E,)), Not(Atom(Q, (E,))))
    assert core.sequence_valid(seq)


def test_extract_requires_inconsistency():
    pb = ProofBuilder()
    pb.delta(parse("(= eps eps)"))
    with pytest.raises(CheckError):
        extract_special_sequence(TOY, pb.build())


def test_extract_adds_zero_identity_when_needed():
    t = Theory("t", (Not(sx.eq(Var("x"), Var("x"))),), EPS)
    pb = ProofBuilder()
    i1 = pb.delta(Not(sx.eq(E, E)))
    pb.taut(t.zero_ne_zero(), (i1,))
    seq = extract_special_sequence(t, pb.build())
    assert t.zero_eq_zero() in seq.formulas


# --- scripts ---------------------------------------------------------------------


def _toy_registry():
    st2 = SymbolTable(LANG)
    reg = Registry(st2)
    reg.add_axiom("ax1", parse("(q x)"))
    reg.add_axiom("ax2", parse("(imp (q x) (p x x))"))
    reg.add_definition("dd", sx.fiff(Atom(P2, (Var("x"), Var("y"))), parse("(exists z (and (q z) (= z x)))")))
    return reg


def test_script_parse_format():
    scripts = parse_script_file(
        """
theorem demo : (p x x)
proof
  H : x
  use ax1 ; x
  use ax2 ; x
qed
"""
    )
    (s,) = scripts
    assert s.label == "demo" and s.h_names == ("x",)
    assert [u.label for u in s.lines] == ["ax1", "ax2"]


def test_check_script_accepts_and_rejects():
    reg = _toy_registry()
    (good,) = parse_script_file(
        "theorem demo : (p x x)\nproof\n  H : x\n  use ax1 ; x\n  use ax2 ; x\nqed\n"
    )
    v = check_script(reg, good)
    assert v.ok, v.message
    (bad,) = parse_script_file(
        "theorem demo2 : (p x x)\nproof\n  H : x\n  use ax1 ; x\nqed\n"
    )
    v2 = check_script(reg, bad)
    assert not v2.ok and "refutation failed" in v2.message


def test_script_unresolved_and_unchecked_citations():
    reg = _toy_registry()
    (s,) = parse_script_file(
        "theorem demo3 : (q eps)\nproof\n  H\n  use nosuch\nqed\n"
    )
    assert "unresolved" in check_script(reg, s).message
    reg.add_theorem("later", parse("(q (pd x))"))
    (s2,) = parse_script_file(
        "theorem demo4 : (q (pd eps))\nproof\n  H\n  use later ; eps\nqed\n"
    )
    assert "unchecked" in check_script(reg, s2).message


def test_script_direction_markers_and_witnesses():
    reg = _toy_registry()
    (s,) = parse_script_file(
        "theorem demo5 : (imp (p x y) (q x))\nproof\n  H : x : y\n  use dd.fw ; x ; y : w\nqed\n"
    )
    v = check_script(reg, s)
    assert v.ok, v.message
    # fresh witness-name collisions are rejected
    (s2,) = parse_script_file(
        "theorem demo6 : (imp (p x y) (q x))\nproof\n  H : x : y\n  use dd.fw ; x ; y : x\nqed\n"
    )
    assert "already bound" in check_script(reg, s2).message


def test_claim_blocks_and_inlining_equivalence():
    reg = _toy_registry()
    claimed = parse_script_file(
        """
theorem demo7 : (p eps eps)
proof
  H
  claim (q eps)
  use ax1 ; eps
  shown
  use ax2 ; eps
qed
"""
    )[0]
    flat = parse_script_file(
        "theorem demo8 : (p eps eps)\nproof\n  H\n  use ax1 ; eps\n  use ax2 ; eps\nqed\n"
    )[0]
    v1 = check_script(reg, claimed)
    v2 = check_script(reg, flat)
    assert v1.ok == v2.ok == True


def test_explicit_very_simple_proof():
    st2 = SymbolTable(LANG)
    reg = Registry(st2)
    reg.add_axiom("ax1", parse("(q x)"))
    reg.add_axiom("ax3", parse("(or (not (q x)) (p x x))"))
    script = parse_script_file(
        """
theorem vs1 : (p eps eps)
explicit
  special ax1 ; eps
  special ax3 ; eps
  resolve 2 3
qed
"""
    )[0]
    v = check_script(reg, script)
    assert v.ok, v.message
    bad = parse_script_file(
        "theorem vs2 : (p eps eps)\nexplicit\n  special ax1 ; eps\nqed\n"
    )[0]
    assert "no contradiction" in check_script(reg, bad).message


def test_bsi_template_shape():
    t = bsi_template()
    assert sx.free_vars(t) == ("x",)
    assert sx.unnested_rank(t) == 1
