"""The trusted core: theories, the five closed-formula classes proofs draw
from, proof checking, and the classical proof transformations (deduction,
purge of extraneous symbols, special-sequence extraction)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import CheckError
from .. import propcalc
from .. import syntax as sx
from ..syntax import (
    App,
    Atom,
    Exists,
    FnSym,
    Formula,
    Not,
    Or,
    SpecialConst,
    Term,
    Var,
    EQ,
    closure,
    free_vars,
    special_constant,
    subst,
)


@dataclass(frozen=True)
class Theory:
    """A finite sequence of nonlogical axioms plus the distinguished
    constant playing the role of 0 (eps for string arithmetic)."""

    label: str
    axioms: tuple[Formula, ...]
    zero: FnSym

    def extend(self, extra: Formula, label: Optional[str] = None) -> "Theory":
        return Theory(label or f"{self.label}+", self.axioms + (extra,), self.zero)

    @property
    def zero_term(self) -> Term:
        return App(self.zero)

    def language_symbols(self) -> frozenset:
        syms = frozenset({self.zero})
        for a in self.axioms:
            syms |= sx.appearing_symbols(a)
        return syms

    def is_open(self) -> bool:
        return all(sx.is_open(a) and sx.is_plain(a) for a in self.axioms)

    def rank_profile(self) -> int:
        return max((sx.nested_rank(a) for a in self.axioms), default=0)

    def zero_eq_zero(self) -> Formula:
        return sx.eq(self.zero_term, self.zero_term)

    def zero_ne_zero(self) -> Formula:
        return Not(self.zero_eq_zero())


# ---------------------------------------------------------------------------
# the five delta classes


@dataclass(frozen=True)
class DeltaClass:
    kind: str  # special-axiom | substitution | identity | equality | axiom-instance
    owner: Optional[SpecialConst] = None  # for special-axiom / substitution
    detail: tuple = ()


def match_instance(pattern: Formula, candidate: Formula, variables) -> Optional[dict]:
    """Match candidate as pattern with variable-free terms substituted for
    the given free variables of pattern (anti-substitution)."""
    binding: dict = {}

    def terms(p: Term, c: Term, shadowed) -> bool:
        if isinstance(p, Var):
            if p.name in variables and p.name not in shadowed:
                if p.name in binding:
                    return binding[p.name] == c
                if not sx.is_variable_free(c):
                    return False
                binding[p.name] = c
                return True
            return p == c
        if isinstance(p, App) and isinstance(c, App) and p.fn == c.fn:
            return all(terms(a, b, shadowed) for a, b in zip(p.args, c.args))
        return p == c

    def walk(p: Formula, c: Formula, shadowed) -> bool:
        if isinstance(p, Atom) and isinstance(c, Atom) and p.pred == c.pred:
            return all(terms(a, b, shadowed) for a, b in zip(p.args, c.args))
        if isinstance(p, Not) and isinstance(c, Not):
            return walk(p.body, c.body, shadowed)
        if isinstance(p, Or) and isinstance(c, Or):
            return walk(p.left, c.left, shadowed) and walk(p.right, c.right, shadowed)
        if isinstance(p, Exists) and isinstance(c, Exists) and p.var == c.var:
            return walk(p.body, c.body, shadowed | {p.var})
        return False

    if walk(pattern, candidate, frozenset()):
        return binding
    return None


def anti_substitution(body: Formula, x: str, candidate: Formula) -> Optional[Term]:
    """A term a with candidate == body_x(a), or None.  When x is not free in
    body and candidate == body, returns the marker None-slot via ()."""
    got = match_instance(body, candidate, frozenset({x}))
    if got is None:
        return None
    if x in got:
        return got[x]
    return App(FnSym("eps", 0)) if candidate == body else None


def classify_delta(
    theory: Theory, f: Formula, rho_cap: Optional[int] = None
) -> DeltaClass:
    """Classify a closed formula into one of the five delta classes, or
    raise CheckError with a nearest-miss diagnosis."""
    if free_vars(f):
        raise CheckError("delta formulas are closed")
    misses = []

    got = _try_special_axiom(f)
    if got is not None:
        return _cap_check(got, rho_cap)
    misses.append("not a special axiom")

    got = _try_substitution(f)
    if got is not None:
        return _cap_check(got, rho_cap)
    misses.append("not a substitution formula")

    if propcalc.is_identity_instance(f):
        return DeltaClass("identity")
    misses.append("not an identity formula")

    if propcalc.is_equality_axiom_instance(f):
        return DeltaClass("equality")
    misses.append("not an equality formula")

    for k, ax in enumerate(theory.axioms):
        binding = match_instance(ax, f, frozenset(free_vars(ax)))
        if binding is not None:
            return DeltaClass("axiom-instance", detail=(k, tuple(sorted(binding.items()))))
    misses.append(f"not a closed instance of any of the {len(theory.axioms)} axioms")
    raise CheckError("; ".join(misses))


def _try_special_axiom(f: Formula) -> Optional[DeltaClass]:
    pair = sx.as_imp(f)
    if pair is None:
        return None
    e, concl = pair
    if not isinstance(e, Exists) or free_vars(e):
        return None
    r = special_constant(e)
    if concl == subst(e.body, {e.var: r}):
        return DeltaClass("special-axiom", owner=r)
    return None


def _try_substitution(f: Formula) -> Optional[DeltaClass]:
    pair = sx.as_imp(f)
    if pair is None:
        return None
    hyp, e = pair
    if not isinstance(e, Exists) or free_vars(e):
        return None
    got = match_instance(e.body, hyp, frozenset({e.var}))
    if got is None:
        return None
    a = got.get(e.var)
    owner = special_constant(e)
    return DeltaClass("substitution", owner=owner, detail=(e.var, a))


def belongs_to(f: Formula) -> Optional[SpecialConst]:
    """The special constant a formula belongs to (it is its special axiom or
    a substitution formula for its subscript), if any."""
    got = _try_special_axiom(f)
    if got is not None:
        return got.owner
    got = _try_substitution(f)
    if got is not None:
        return got.owner
    return None


def _cap_check(cls: DeltaClass, rho_cap: Optional[int]) -> DeltaClass:
    if rho_cap is not None and cls.owner is not None:
        if sx.const_rank(cls.owner) > rho_cap:
            raise CheckError(
                f"belongs to a special constant of rank {sx.const_rank(cls.owner)} > {rho_cap}"
            )
    return cls


def in_delta(theory: Theory, f: Formula, rho_cap: Optional[int] = None) -> bool:
    try:
        classify_delta(theory, f, rho_cap)
        return True
    except CheckError:
        return False


# ---------------------------------------------------------------------------
# proof objects


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    # justification: ("delta",) | ("taut", indices-or-None) | ("default",)
    just: tuple = ("delta",)


@dataclass(frozen=True)
class ProofObject:
    lines: tuple[ProofLine, ...]

    def formulas(self):
        return [ln.formula for ln in self.lines]

    def contains(self, f: Formula) -> bool:
        return any(ln.formula == f for ln in self.lines)


@dataclass
class ProofVerdict:
    ok: bool
    failed_index: Optional[int] = None
    message: str = ""
    classes: tuple = ()


class ProofBuilder:
    def __init__(self):
        self.lines: list[ProofLine] = []
        self._index: dict = {}

    def delta(self, f: Formula) -> int:
        return self._add(ProofLine(f, ("delta",)))

    def taut(self, f: Formula, premises: Sequence[int] = ()) -> int:
        return self._add(ProofLine(f, ("taut", tuple(premises))))

    def default(self, f: Formula) -> int:
        return self._add(ProofLine(f, ("default",)))

    def extend(self, proof: ProofObject) -> dict:
        """Append all lines of a finished proof, returning old->new index."""
        remap = {}
        for i, ln in enumerate(proof.lines):
            if ln.just[0] == "taut" and ln.just[1] is not None:
                just = ("taut", tuple(remap[j] for j in ln.just[1]))
            else:
                just = ln.just
            remap[i] = self._add(ProofLine(ln.formula, just))
        return remap

    def index_of(self, f: Formula) -> Optional[int]:
        return self._index.get(f)

    def _add(self, line: ProofLine) -> int:
        if line.just[0] == "delta" and line.formula in self._index:
            return self._index[line.formula]
        self.lines.append(line)
        if line.formula not in self._index:
            self._index[line.formula] = len(self.lines) - 1
        return len(self.lines) - 1

    def build(self) -> ProofObject:
        return ProofObject(tuple(self.lines))


def is_default_formula(theory: Theory, f: Formula) -> bool:
    """not exists x B -> r = 0, with r the special constant for exists x B."""
    pair = sx.as_imp(f)
    if pair is None:
        return False
    hyp, concl = pair
    if not (isinstance(hyp, Not) and isinstance(hyp.body, Exists)):
        return False
    e = hyp.body
    if free_vars(e):
        return False
    r = special_constant(e)
    return concl == sx.eq(r, theory.zero_term)


def check_proof(
    theory: Theory,
    proof: ProofObject,
    rho_cap: Optional[int] = None,
    level_cap: Optional[int] = None,
    allow_defaults: bool = False,
    budget: int = propcalc.DEFAULT_BUDGET,
) -> ProofVerdict:
    """Verify that every formula is closed and in delta (or a default
    formula, when allowed) or a tautological consequence of strictly
    preceding formulas."""
    classes = []
    for i, line in enumerate(proof.lines):
        f = line.formula
        if free_vars(f):
            return ProofVerdict(False, i, "formula is not closed")
        if level_cap is not None:
            consts = sx.appearing_constants(f)
            too_high = [c for c in consts if sx.const_level(c) > level_cap]
            if too_high:
                return ProofVerdict(False, i, f"special constant above level {level_cap}")
        kind = line.just[0]
        if kind == "delta":
            try:
                classes.append(classify_delta(theory, f, rho_cap))
            except CheckError as e:
                return ProofVerdict(False, i, str(e))
        elif kind == "default":
            if not allow_defaults:
                return ProofVerdict(False, i, "default formulas not allowed here")
            if not is_default_formula(theory, f):
                return ProofVerdict(False, i, "not a default formula")
            classes.append(DeltaClass("default"))
        elif kind == "taut":
            idxs = line.just[1]
            if idxs is None:
                premises = [proof.lines[j].formula for j in range(i)]
            else:
                if any(j >= i for j in idxs):
                    return ProofVerdict(False, i, "taut premise does not strictly precede")
                premises = [proof.lines[j].formula for j in idxs]
            if not propcalc.prop_taut_consequence(f, premises, budget):
                return ProofVerdict(False, i, "not a tautological consequence of cited lines")
            classes.append(DeltaClass("taut"))
        else:
            return ProofVerdict(False, i, f"unknown justification {kind!r}")
    return ProofVerdict(True, classes=tuple(classes))


def proves(theory: Theory, proof: ProofObject, f: Formula, **kw) -> bool:
    """pi |-_T A: pi checks and the closure of A is a formula of pi."""
    return check_proof(theory, proof, **kw).ok and proof.contains(closure(f))


# ---------------------------------------------------------------------------
# deduction theorem


def deduction_transform(theory: Theory, c: Formula, proof: ProofObject) -> ProofObject:
    """From a proof in T[C] (C closed) produce a proof of C -> B in T for
    every line B; delta formulas of T[C] that are instances of C become
    tautologies, the rest stay available as delta lines of T."""
    if free_vars(c):
        raise CheckError("the deduction hypothesis must be closed")
    extended = theory.extend(c)
    verdict = check_proof(extended, proof)
    if not verdict.ok:
        raise CheckError(f"input proof fails in T[C] at line {verdict.failed_index}: {verdict.message}")
    out = ProofBuilder()
    images: dict[int, int] = {}
    for i, line in enumerate(proof.lines):
        f = line.formula
        goal = sx.fimp(c, f)
        if line.just[0] == "delta":
            if in_delta(theory, f):
                base = out.delta(f)
                images[i] = out.taut(goal, (base,))
            else:
                # a closed instance of the new axiom C; C is closed, so the
                # instance is C itself and C -> C is a tautology
                if f != c:
                    raise CheckError("unexpected delta formula in T[C]")
                images[i] = out.taut(goal, ())
        else:
            idxs = line.just[1]
            if idxs is None:
                idxs = tuple(range(i))
            images[i] = out.taut(goal, tuple(images[j] for j in idxs))
    return out.build()


# ---------------------------------------------------------------------------
# purging extraneous symbols


def purge_extraneous(theory: Theory, goal: Formula, proof: ProofObject) -> ProofObject:
    """Rewrite the proof into the language of T[goal]: atoms with outside
    predicate symbols become 0=0, terms headed by outside function symbols
    become 0, everywhere including subscripts."""
    keep = theory.language_symbols() | sx.appearing_symbols(goal) | {theory.zero}
    zero = theory.zero_term

    def term(t: Term) -> Term:
        if isinstance(t, Var):
            return t
        if isinstance(t, SpecialConst):
            new_sub = formula(t.subscript)
            return t if new_sub == t.subscript else special_constant(new_sub, t.alias)
        if isinstance(t, App):
            if t.fn not in keep:
                return zero
            return App(t.fn, tuple(term(a) for a in t.args))
        raise TypeError(t)

    def formula(f: Formula) -> Formula:
        if isinstance(f, Atom):
            if f.pred != EQ and f.pred not in keep:
                return sx.eq(zero, zero)
            return Atom(f.pred, tuple(term(a) for a in f.args))
        if isinstance(f, Not):
            return Not(formula(f.body))
        if isinstance(f, Or):
            return Or(formula(f.left), formula(f.right))
        if isinstance(f, Exists):
            return Exists(f.var, formula(f.body))
        raise TypeError(f)

    out = ProofBuilder()
    ident = out.delta(sx.eq(zero, zero))
    images: dict[int, int] = {}
    for i, line in enumerate(proof.lines):
        g = formula(line.formula)
        if line.just[0] == "default":
            images[i] = out.default(g)
        elif line.just[0] == "delta":
            if in_delta(theory, g):
                images[i] = out.delta(g)
            else:
                # an equality formula for a purged symbol collapses to a
                # tautological consequence of the identity formula 0=0
                images[i] = out.taut(g, (ident,))
        else:
            idxs = line.just[1]
            if idxs is None:
                idxs = tuple(range(i))
            images[i] = out.taut(g, tuple(images[j] for j in idxs))
    return out.build()


# ---------------------------------------------------------------------------
# special sequences


@dataclass(frozen=True)
class SpecialSequence:
    formulas: tuple[Formula, ...]

    def negation_disjunction(self) -> Formula:
        return sx.disj([Not(f) for f in self.formulas])


def sequence_valid(seq: SpecialSequence, budget: int = propcalc.DEFAULT_BUDGET) -> bool:
    """not A1 v ... v not An is a tautology; checked by truth table when the
    skeleton is small, by the propositional engine otherwise."""
    try:
        return propcalc.taut_check(seq.negation_disjunction()).consequence
    except Exception:
        return propcalc.prop_unsat(list(seq.formulas), budget)


def extract_special_sequence(theory: Theory, proof: ProofObject) -> SpecialSequence:
    """From a checked proof of 0 != 0, the delta formulas whose negation
    disjunction is a tautology (0=0 appended when needed)."""
    verdict = check_proof(theory, proof)
    if not verdict.ok:
        raise CheckError(f"proof fails at line {verdict.failed_index}: {verdict.message}")
    target = theory.zero_ne_zero()
    if not proof.contains(target):
        raise CheckError("proof does not derive 0 != 0")
    deltas = [ln.formula for ln in proof.lines if ln.just[0] == "delta"]
    seq = SpecialSequence(tuple(dict.fromkeys(deltas)))
    if sequence_valid(seq):
        return seq
    seq = SpecialSequence(tuple(dict.fromkeys(deltas + [theory.zero_eq_zero()])))
    if not sequence_valid(seq):
        raise CheckError("extracted sequence fails the tautology invariant")
    return seq
