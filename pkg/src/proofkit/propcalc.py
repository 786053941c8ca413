"""Truth valuations, tautology checking, and ground equality refutation.

taut_check decides tautological consequence over the propositional skeleton
(elementary subformulas as atoms) by bit-vector truth tables.  ground_refute
decides quasitautological inconsistency of a closed formula set by DPLL-style
case splitting plus congruence closure over the occurring variable-free
terms; congruence closure stands in for saturating with identity/equality
axiom instances over those terms.  On success it returns a certificate whose
steps replay through an independent replayer.

Certificate step kinds (resolution pivots are closed elementary literals;
instantiations are opaque atoms here):

    ("input", F)          F is one of the refuted input formulas
    ("conjunct", F, G)    F is a conjunct of the conjunctive form of a
                          previously derived G
    ("eq_axiom", F)       closed instance of an identity or equality axiom
    ("eq_subst", F)       closed instance of  a=b & A_x(a) -> A_x(b)
    ("resolve", F, C, D)  F follows by one-resolution from derived C and D
    ("split", A, b1, b2)  case split on elementary A; branch b1 assumes A,
                          branch b2 assumes its negation; both must refute

A step list refutes when it ends in a split whose branches refute, or when
the derived set contains a literal and its opposite or a formula a != a.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import CheckError, SizeGuardExceeded
from . import syntax as sx
from .syntax import (
    Atom,
    Exists,
    Formula,
    Not,
    Or,
    Term,
    EQ,
    disjuncts,
    is_elementary,
    is_literal,
    opposite,
)

DEFAULT_ATOM_GUARD = 24
DEFAULT_BUDGET = 100_000


# ---------------------------------------------------------------------------
# truth valuations and tautologies


def elementary_subformulas(fs) -> list[Formula]:
    """Distinct elementary subformulas in order of first appearance (bodies
    of instantiations are not entered; they are opaque atoms)."""
    out: list[Formula] = []
    seen = set()

    def walk(f):
        if is_elementary(f):
            if f not in seen:
                seen.add(f)
                out.append(f)
            return
        if isinstance(f, Not):
            walk(f.body)
        elif isinstance(f, Or):
            walk(f.left)
            walk(f.right)
        else:
            raise TypeError(f)

    for f in fs:
        walk(f)
    return out


@dataclass
class TruthValuation:
    """Assignment of truth values to elementary formulas, extended to all
    formulas by the two evaluation rules for negation and disjunction."""

    assignment: dict

    def value(self, f: Formula) -> bool:
        if is_elementary(f):
            return self.assignment[f]
        if isinstance(f, Not):
            return not self.value(f.body)
        if isinstance(f, Or):
            return self.value(f.left) or self.value(f.right)
        raise TypeError(f)


@dataclass
class TautVerdict:
    consequence: bool
    counter: Optional[TruthValuation] = None


def atom_patterns(els, n: int) -> dict:
    """Truth vectors over all 2^n valuations, atom i toggling with period
    2^(i+1), built by doubling."""
    width = 1 << n
    out = {}
    for i, e in enumerate(els):
        block = 1 << i
        pattern = ((1 << block) - 1) << block
        span = 2 * block
        while span < width:
            pattern |= pattern << span
            span *= 2
        out[e] = pattern & ((1 << width) - 1)
    return out


def _bitvec(f: Formula, atoms: dict, full: int) -> int:
    if is_elementary(f):
        return atoms[f]
    if isinstance(f, Not):
        return full ^ _bitvec(f.body, atoms, full)
    if isinstance(f, Or):
        return _bitvec(f.left, atoms, full) | _bitvec(f.right, atoms, full)
    raise TypeError(f)


def bitvec_value(f: Formula, atoms: dict, full: int) -> int:
    """Exposed for independent enumeration-style oracles."""
    return _bitvec(f, atoms, full)


def taut_check(
    goal: Formula,
    premises: Sequence[Formula] = (),
    atom_guard: int = DEFAULT_ATOM_GUARD,
) -> TautVerdict:
    """Decide whether goal is a tautological consequence of the premises by
    enumerating all relevant truth valuations (as bit vectors).

    Raises SizeGuardExceeded when the skeleton has more than atom_guard
    distinct elementary atoms; callers then fall back to ground_refute."""
    els = elementary_subformulas(list(premises) + [goal])
    n = len(els)
    if n > atom_guard:
        raise SizeGuardExceeded("propositional skeleton too large", n)
    full = (1 << (1 << n)) - 1
    atoms = atom_patterns(els, n)
    ok = full
    for p in premises:
        ok &= _bitvec(p, atoms, full)
    bad = ok & (full ^ _bitvec(goal, atoms, full))
    if bad == 0:
        return TautVerdict(True)
    idx = (bad & -bad).bit_length() - 1
    assignment = {e: bool((idx >> i) & 1) for i, e in enumerate(els)}
    return TautVerdict(False, TruthValuation(assignment))


def is_tautology(f: Formula, atom_guard: int = DEFAULT_ATOM_GUARD) -> bool:
    return taut_check(f, (), atom_guard).consequence


# ---------------------------------------------------------------------------
# one-resolution


def one_resolution(c: Formula, d: Formula) -> Formula:
    """Delete from d the proper disjunct that is the opposite of the literal
    c, re-associating the remaining disjuncts right to left."""
    if not is_literal(c):
        raise CheckError(f"not a literal: {sx.render(c)}")
    return _resolve_elementary(c, d)


def equality_substitution(a: Term, b: Term, body: Formula, x: str):
    """The closed instance  a=b & A_x(a) -> A_x(b)  with a kernel-checkable
    proof (generated by the equality-theorem induction)."""
    from .kernel.proofgen import equality_substitution as _impl

    return _impl(a, b, body, x)


def _resolve_elementary(c: Formula, d: Formula) -> Formula:
    """one_resolution with closed elementary pivots admitted."""
    base = c.body if isinstance(c, Not) else c
    if not is_elementary(base) or sx.free_vars(c):
        raise CheckError("resolution pivot must be a closed elementary literal")
    opp = opposite(c)
    parts = disjuncts(d)
    if len(parts) < 2:
        raise CheckError("opposite is not a proper disjunct")
    if opp not in parts:
        raise CheckError("opposite of the pivot is not a disjunct")
    idx = parts.index(opp)
    return sx.disj(parts[:idx] + parts[idx + 1 :])


# ---------------------------------------------------------------------------
# certificates and their replayer


@dataclass
class Refutation:
    steps: list


@dataclass
class Saturated:
    model: TruthValuation


@dataclass
class OutOfBudget:
    spent: int


def is_identity_instance(f: Formula) -> bool:
    return (
        isinstance(f, Atom)
        and f.pred == EQ
        and f.args[0] == f.args[1]
        and sx.is_variable_free(f)
    )


def _as_horn(f: Formula):
    """Read f as hypotheses -> conclusion, accepting both the conjunction
    form  h1 & ... & hk -> c  and the clause form  -h1 v ... v -hk v c."""
    pair = sx.as_imp(f)
    if pair is not None:
        hyp, concl = pair
        parts = sx.conjuncts(hyp)
        if all(isinstance(p, Atom) for p in parts) and isinstance(concl, Atom):
            return parts, concl
    parts = sx.disjuncts(f)
    if len(parts) >= 2 and isinstance(parts[-1], Atom):
        hyps = []
        for p in parts[:-1]:
            if not (isinstance(p, Not) and isinstance(p.body, Atom)):
                return None
            hyps.append(p.body)
        return hyps, parts[-1]
    return None


def is_equality_axiom_instance(f: Formula) -> bool:
    """Closed instance of an equality axiom: for a function symbol, for a
    predicate symbol, or for equality itself."""
    if not sx.is_variable_free(f):
        return False
    horn = _as_horn(f)
    if horn is None:
        return False
    parts, concl = horn
    eqs = [
        (p.args[0], p.args[1]) if p.pred == EQ else None
        for p in parts
    ]
    if concl.pred == EQ:
        if any(e is None for e in eqs):
            return False
        lhs, rhs = concl.args
        if (
            isinstance(lhs, sx.App)
            and isinstance(rhs, sx.App)
            and lhs.fn == rhs.fn
            and len(eqs) == len(lhs.args) == len(rhs.args) > 0
            and all(e == (a, b) for e, a, b in zip(eqs, lhs.args, rhs.args))
        ):
            return True
        if len(eqs) == 3:
            (x1, y1), (x2, y2), (x3, x4) = eqs
            if (x3, x4) == (x1, x2) and (lhs, rhs) == (y1, y2):
                return True
        return False
    if len(parts) != len(concl.args) + 1 or not concl.args:
        return False
    prem = parts[-1]
    if not (prem.pred == concl.pred) or any(e is None for e in eqs[:-1]):
        return False
    return all(e == (a, b) for e, a, b in zip(eqs[:-1], prem.args, concl.args))


def is_equality_substitution(f: Formula) -> bool:
    """Closed instance of  a=b & A_x(a) -> A_x(b)  for some A and x (clause
    rendering accepted), decided by matching the two sides up to a-for-b
    replacement."""
    if not sx.is_variable_free(f):
        return False
    candidates = []
    pair = sx.as_imp(f)
    if pair is not None:
        hyp, concl = pair
        parts = sx.conjuncts(hyp)
        if len(parts) == 2:
            candidates.append((parts[0], parts[1], concl))
    parts = sx.disjuncts(f)
    if len(parts) == 3:
        e, aa, concl = parts
        if isinstance(e, Not) and isinstance(aa, Not):
            candidates.append((e.body, aa.body, concl))
    for e, aa, concl in candidates:
        if isinstance(e, Atom) and e.pred == EQ:
            a, b = e.args
            if _differs_only_by(aa, concl, a, b):
                return True
    return False


def _differs_only_by(fa: Formula, fb: Formula, a: Term, b: Term) -> bool:
    def terms(s: Term, t: Term) -> bool:
        if s == a and t == b:
            return True
        if s == t:
            return True
        if isinstance(s, sx.App) and isinstance(t, sx.App) and s.fn == t.fn:
            return all(terms(p, q) for p, q in zip(s.args, t.args))
        return False

    def walk(x: Formula, y: Formula) -> bool:
        if isinstance(x, Atom) and isinstance(y, Atom) and x.pred == y.pred:
            return all(terms(p, q) for p, q in zip(x.args, y.args))
        if isinstance(x, Not) and isinstance(y, Not):
            return walk(x.body, y.body)
        if isinstance(x, Or) and isinstance(y, Or):
            return walk(x.left, y.left) and walk(x.right, y.right)
        if isinstance(x, Exists) and isinstance(y, Exists) and x.var == y.var:
            return walk(x.body, y.body)
        return False

    return walk(fa, fb)


def replay(cert: Refutation, inputs: Sequence[Formula]) -> bool:
    """Replay a certificate against the inputs, checking every side
    condition; raises CheckError on any mismatch."""
    from .normform import to_conjunctive

    inputs = set(inputs)

    def run(steps, derived: set) -> bool:
        derived = set(derived)
        for step in steps:
            kind = step[0]
            if kind == "input":
                if step[1] not in inputs:
                    raise CheckError("certificate cites a non-input formula")
                derived.add(step[1])
            elif kind == "conjunct":
                _, f, g = step
                if g not in derived:
                    raise CheckError("conjunct cites an underived formula")
                if f not in sx.conjuncts(to_conjunctive(g)):
                    raise CheckError("claimed conjunct is not one")
                derived.add(f)
            elif kind == "eq_axiom":
                f = step[1]
                if not (is_identity_instance(f) or is_equality_axiom_instance(f)):
                    raise CheckError(
                        f"not an identity/equality axiom instance: {sx.render(f)}"
                    )
                derived.add(f)
            elif kind == "eq_subst":
                f = step[1]
                if not is_equality_substitution(f):
                    raise CheckError("not an equality substitution")
                derived.add(f)
            elif kind == "resolve":
                _, f, c, d = step
                if c not in derived or d not in derived:
                    raise CheckError("resolution premises must precede")
                if _resolve_elementary(c, d) != f:
                    raise CheckError("resolution step does not reproduce its formula")
                derived.add(f)
            elif kind == "split":
                _, atom, br1, br2 = step
                if not is_elementary(atom) or sx.free_vars(atom):
                    raise CheckError("split must be on a closed elementary formula")
                return run(list(br1), derived | {atom}) and run(
                    list(br2), derived | {Not(atom)}
                )
            else:
                raise CheckError(f"unknown step kind {kind!r}")
        if _contradictory(derived):
            return True
        raise CheckError("certificate branch reaches no contradiction")

    return run(cert.steps, set())


def _contradictory(derived: set) -> bool:
    for f in derived:
        if opposite(f) in derived:
            return True
        if isinstance(f, Not) and isinstance(f.body, Atom) and f.body.pred == EQ:
            if f.body.args[0] == f.body.args[1]:
                return True
    return False


# ---------------------------------------------------------------------------
# congruence closure with explanation recording


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}
        self.proof_parent: dict = {}
        self.proof_reason: dict = {}

    def add(self, t):
        if t not in self.parent:
            self.parent[t] = t

    def find(self, t):
        while self.parent[t] != t:
            self.parent[t] = self.parent[self.parent[t]]
            t = self.parent[t]
        return t

    def union(self, a, b, reason):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        path = []
        node = a
        while node in self.proof_parent:
            path.append(node)
            node = self.proof_parent[node]
        for child in reversed(path):
            par = self.proof_parent[child]
            self.proof_parent[par] = child
            self.proof_reason[par] = self.proof_reason[child]
        self.proof_parent.pop(a, None)
        self.proof_reason.pop(a, None)
        self.proof_parent[a] = b
        self.proof_reason[a] = reason
        self.parent[ra] = rb
        return True

    def explain_path(self, a, b):
        """Edges (p, q, reason) joining a to b in the proof forest, oriented
        from a to b."""
        anc = {}
        node = a
        while True:
            anc[node] = True
            if node not in self.proof_parent:
                break
            node = self.proof_parent[node]
        back = []
        node = b
        while node not in anc:
            back.append((self.proof_parent[node], node, self.proof_reason[node]))
            node = self.proof_parent[node]
        meet = node
        edges = []
        node = a
        while node != meet:
            edges.append((node, self.proof_parent[node], self.proof_reason[node]))
            node = self.proof_parent[node]
        edges.extend(reversed(back))
        return edges


class CongruenceCore:
    """Congruence closure over variable-free terms; merge reasons are
    ("eq", equation-atom) or ("cong", lhs-app, rhs-app)."""

    def __init__(self):
        self.uf = _UnionFind()
        self.terms: set = set()

    def add_term(self, t: Term):
        if t in self.terms:
            return
        self.terms.add(t)
        self.uf.add(t)
        if isinstance(t, sx.App):
            for a in t.args:
                self.add_term(a)

    def assert_eq(self, a: Term, b: Term, reason):
        self.add_term(a)
        self.add_term(b)
        if self.uf.find(a) != self.uf.find(b):
            self.uf.union(a, b, reason)
        self._propagate()

    def _propagate(self):
        changed = True
        while changed:
            changed = False
            apps = [t for t in self.terms if isinstance(t, sx.App)]
            by_fn: dict = {}
            for t in apps:
                by_fn.setdefault(t.fn, []).append(t)
            for group in by_fn.values():
                for i in range(len(group)):
                    for j in range(i + 1, len(group)):
                        s, t = group[i], group[j]
                        if self.uf.find(s) == self.uf.find(t):
                            continue
                        if s.args and all(
                            self.uf.find(p) == self.uf.find(q)
                            for p, q in zip(s.args, t.args)
                        ):
                            self.uf.union(s, t, ("cong", s, t))
                            changed = True

    def congruent(self, a: Term, b: Term) -> bool:
        self.add_term(a)
        self.add_term(b)
        self._propagate()
        return self.uf.find(a) == self.uf.find(b)


# ---------------------------------------------------------------------------
# the refuter


@dataclass
class _Clause:
    lits: tuple  # (atom, polarity) pairs
    source: Formula


def clausify(f: Formula, guard: int = 10_000) -> list[tuple]:
    """Clauses of the conjunctive form of f, as (atom, polarity) tuples over
    elementary atoms.  Matches normform.to_conjunctive clause for clause."""

    def walk(g) -> list[tuple]:
        pair = sx.as_and(g)
        if pair is not None:
            return walk(pair[0]) + walk(pair[1])
        if isinstance(g, Or):
            ls = walk(g.left)
            rs = walk(g.right)
            if len(ls) * len(rs) > guard:
                raise SizeGuardExceeded("clausification blowup", len(ls) * len(rs))
            return [a + b for a in ls for b in rs]
        if isinstance(g, Not):
            if is_elementary(g.body):
                return [((g.body, False),)]
            if isinstance(g.body, Not):
                return walk(g.body.body)
            if isinstance(g.body, Or):
                return walk(sx.fand(Not(g.body.left), Not(g.body.right)))
            raise TypeError(g)
        if is_elementary(g):
            return [((g, True),)]
        raise TypeError(g)

    return walk(f)


def prop_unsat(fs: Sequence[Formula], budget: int = DEFAULT_BUDGET) -> bool:
    """Propositional (tautological) unsatisfiability without the atom guard."""
    res = _refute(list(fs), budget, use_congruence=False, want_cert=False)
    return isinstance(res, Refutation)


def prop_taut_consequence(
    goal: Formula, premises: Sequence[Formula], budget: int = DEFAULT_BUDGET
) -> bool:
    return prop_unsat(list(premises) + [Not(goal)], budget)


def ground_refute(
    inputs: Sequence[Formula], budget: int = DEFAULT_BUDGET, want_cert: bool = True
) -> Union[Refutation, Saturated, OutOfBudget]:
    """Decide quasitautological inconsistency of a set of closed formulas.

    Sound always; complete for the quasitautology relation when the budget
    suffices.  Saturated means provably no refutation exists."""
    for f in inputs:
        if sx.free_vars(f):
            raise CheckError(f"ground_refute requires closed inputs: {sx.render(f)}")
    return _refute(list(inputs), budget, use_congruence=True, want_cert=want_cert)


def _refute(inputs, budget, use_congruence, want_cert=True):
    clauses: list[_Clause] = []
    for f in inputs:
        for lits in clausify(f):
            clauses.append(_Clause(lits, f))
    atoms: list = []
    seen = set()
    for c in clauses:
        for a, _ in c.lits:
            if a not in seen:
                seen.add(a)
                atoms.append(a)
    spent = [0]

    class _Stop(Exception):
        pass

    def charge(n=1):
        spent[0] += n
        if spent[0] > budget:
            raise _Stop

    def search(assign: dict, reasons: dict):
        """Returns ("refuted", steps) or ("sat", assignment)."""
        local: list = []
        try:
            while True:
                unit = None
                for c in clauses:
                    unassigned = []
                    satisfied = False
                    for lit in c.lits:
                        v = assign.get(lit[0])
                        if v is None:
                            unassigned.append(lit)
                        elif v == lit[1]:
                            satisfied = True
                            break
                    if satisfied:
                        continue
                    if not unassigned:
                        steps = (
                            _prop_conflict_steps(c, assign, reasons, inputs)
                            if want_cert
                            else []
                        )
                        return ("refuted", steps)
                    if len(unassigned) == 1:
                        unit = (c, unassigned[0])
                        break
                if unit is None:
                    break
                charge()
                c, (a, pol) = unit
                assign[a] = pol
                reasons[a] = ("unit", c)
                local.append(a)
            if use_congruence:
                conflict = _theory_conflict(assign, reasons, inputs, want_cert)
                if conflict is not None:
                    return ("refuted", conflict)
            pick = None
            for a in atoms:
                if a not in assign:
                    pick = a
                    break
            if pick is None:
                return ("sat", dict(assign))
            charge()
            assign[pick] = True
            reasons[pick] = ("decide",)
            r1 = search(assign, reasons)
            del assign[pick]
            del reasons[pick]
            if r1[0] == "sat":
                return r1
            assign[pick] = False
            reasons[pick] = ("decide",)
            r2 = search(assign, reasons)
            del assign[pick]
            del reasons[pick]
            if r2[0] == "sat":
                return r2
            return ("refuted", [("split", pick, r1[1], r2[1])])
        finally:
            for a in local:
                assign.pop(a, None)
                reasons.pop(a, None)

    try:
        result = search({}, {})
    except _Stop:
        return OutOfBudget(spent[0])
    if result[0] == "sat":
        assign = result[1]
        model = {a: assign.get(a, False) for a in atoms}
        return Saturated(TruthValuation(model))
    return Refutation(result[1])


def _lit_formula(atom: Formula, pol: bool) -> Formula:
    return atom if pol else Not(atom)


class _Emitter:
    """Accumulates certificate steps for one conflict, deriving each needed
    literal from inputs, unit chains, and enclosing split assumptions."""

    def __init__(self, assign, reasons, inputs):
        self.assign = assign
        self.reasons = reasons
        self.inputs = inputs
        self.steps: list = []
        self.derived: set = set()

    def have(self, f: Formula):
        self.derived.add(f)

    def emit(self, step):
        self.steps.append(step)
        self.have(step[1])

    def clause_formula(self, c: _Clause) -> Formula:
        return sx.disj([_lit_formula(a, p) for a, p in c.lits])

    def derive_clause(self, c: _Clause) -> Formula:
        f = self.clause_formula(c)
        if f in self.derived:
            return f
        if c.source not in self.derived:
            self.emit(("input", c.source))
        if f != c.source:
            self.emit(("conjunct", f, c.source))
        return f

    def derive_assigned(self, atom: Formula, pol: bool):
        """Derive the literal recording that atom is assigned pol."""
        lit = _lit_formula(atom, pol)
        if lit in self.derived:
            return
        why = self.reasons[atom]
        if why[0] == "decide":
            # in scope through the enclosing split assumption
            self.have(lit)
            return
        if why[0] == "unit":
            clause = why[1]
            cur = self.derive_clause(clause)
            for x, p in clause.lits:
                if x == atom:
                    continue
                self.derive_assigned(x, not p)
                piv = _lit_formula(x, not p)
                nxt = _resolve_elementary(piv, cur)
                self.emit(("resolve", nxt, piv, cur))
                cur = nxt
            assert cur == lit
            return
        raise AssertionError(why)

    # --- equality reasoning ---

    def derive_eq(self, core: CongruenceCore, s: Term, t: Term) -> Formula:
        goal = sx.eq(s, t)
        if goal in self.derived:
            return goal
        if s == t:
            self.emit(("eq_axiom", goal))
            return goal
        edges = core.uf.explain_path(s, t)
        chain_eqs = []
        node = s
        for p, q, reason in edges:
            step_eq = self._derive_edge(core, p, q, reason, forward=(node == p))
            chain_eqs.append(step_eq)
            node = q if node == p else p
        # fold with transitivity
        cur = chain_eqs[0]
        for nxt_eq in chain_eqs[1:]:
            cur = self._transitivity(cur, nxt_eq)
        assert cur == goal, (sx.render(cur), sx.render(goal))
        return cur

    def _derive_edge(self, core, p, q, reason, forward: bool) -> Formula:
        want = sx.eq(p, q) if forward else sx.eq(q, p)
        if want in self.derived:
            return want
        if reason[0] == "eq":
            lit = reason[1]
            self.derive_assigned(lit, True)
            if lit == want:
                return want
            return self._symmetry(lit, want)
        _, lhs, rhs = reason
        base = sx.eq(lhs, rhs)
        if base not in self.derived:
            hyp = []
            for x, y in zip(lhs.args, rhs.args):
                self.derive_eq(core, x, y)
                hyp.append(sx.eq(x, y))
            self._horn(hyp, base)
        if base == want:
            return want
        return self._symmetry(base, want)

    def _horn(self, hyps, concl):
        """Emit the clause form of an equality-axiom instance and resolve the
        (already derived) hypotheses away, deriving the conclusion."""
        ax = sx.disj([Not(h) for h in hyps] + [concl])
        self.emit(("eq_axiom", ax))
        cur = ax
        for h in hyps:
            nxt = _resolve_elementary(h, cur)
            self.emit(("resolve", nxt, h, cur))
            cur = nxt
        assert cur == concl
        return concl

    def _symmetry(self, have_eq: Formula, want_eq: Formula) -> Formula:
        a, b = have_eq.args
        assert want_eq == sx.eq(b, a)
        if want_eq in self.derived:
            return want_eq
        ident = sx.eq(a, a)
        if ident not in self.derived:
            self.emit(("eq_axiom", ident))
        return self._horn([have_eq, ident, ident], want_eq)

    def _transitivity(self, eq1: Formula, eq2: Formula) -> Formula:
        # eq1: s=u, eq2: u=v  |-  s=v  via  u=s & u=v & u=u -> s=v
        s, u = eq1.args
        u2, v = eq2.args
        assert u == u2
        goal = sx.eq(s, v)
        if goal in self.derived:
            return goal
        rev = self._symmetry(eq1, sx.eq(u, s))
        ident = sx.eq(u, u)
        if ident not in self.derived:
            self.emit(("eq_axiom", ident))
        return self._horn([rev, eq2, ident], goal)


def _prop_conflict_steps(clause: _Clause, assign, reasons, inputs):
    em = _Emitter(assign, reasons, inputs)
    cur = em.derive_clause(clause)
    for a, p in clause.lits:
        em.derive_assigned(a, not p)
    for a, p in list(clause.lits)[:-1]:
        piv = _lit_formula(a, not p)
        nxt = _resolve_elementary(piv, cur)
        em.emit(("resolve", nxt, piv, cur))
        cur = nxt
    return em.steps


def _theory_conflict(assign, reasons, inputs, want_cert):
    core = CongruenceCore()
    for a, pol in assign.items():
        if isinstance(a, Atom) and a.pred == EQ and pol:
            core.assert_eq(a.args[0], a.args[1], ("eq", a))
        elif isinstance(a, Atom):
            for t in a.args:
                core.add_term(t)
    core._propagate()

    for a, pol in assign.items():
        if isinstance(a, Atom) and a.pred == EQ and not pol:
            s, t = a.args
            if core.congruent(s, t):
                if not want_cert:
                    return []
                em = _Emitter(assign, reasons, inputs)
                em.derive_assigned(a, False)
                em.derive_eq(core, s, t)
                return em.steps
    trues = [a for a, pol in assign.items() if pol and isinstance(a, Atom) and a.pred != EQ]
    falses = [a for a, pol in assign.items() if not pol and isinstance(a, Atom) and a.pred != EQ]
    for ta in trues:
        for fa in falses:
            if ta.pred != fa.pred or ta == fa or not ta.args:
                continue
            if all(core.congruent(p, q) for p, q in zip(ta.args, fa.args)):
                if not want_cert:
                    return []
                em = _Emitter(assign, reasons, inputs)
                em.derive_assigned(ta, True)
                em.derive_assigned(fa, False)
                hyp = []
                for p, q in zip(ta.args, fa.args):
                    em.derive_eq(core, p, q)
                    hyp.append(sx.eq(p, q))
                em._horn(hyp + [ta], fa)
                return em.steps
    return None
