"""Hint-script checking for the proof corpus.

A script freezes its goal's free variables into witness constants, elaborates
every citation line into a closed instance (normalize the cited statement to
negation form, then instantiate leftmost quantifiers: argument terms at
universal positions, named witness constants at existential positions), and
accepts when the instances together with the negated frozen goal are
quasitautologically inconsistent.

Explicit scripts are instead replayed literally as very simple proofs: each
step a conjunct of a special case of a nonlogical axiom, an equality
substitution, or a one-resolution of prior steps, ending in a literal and its
opposite or in a formula a != a.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import CheckError, ParseError, ProofkitError
from .. import normform as nform
from .. import propcalc
from .. import syntax as sx
from ..syntax import Exists, Formula, Not, Term, closure, fimp, subst

DEFAULT_SCRIPT_BUDGET = 100_000


# ---------------------------------------------------------------------------
# registry


@dataclass
class Entry:
    label: str
    kind: str  # axiom | definition | theorem | schema-template
    statement: Formula
    section: str = "base"
    checked: bool = True  # theorems flip to True once their script passes


class Registry:
    """Append-only store of citable statements, plus the unary-formula
    registry the induction schema draws from."""

    def __init__(self, symbols: sx.SymbolTable):
        self.symbols = symbols
        self.entries: dict[str, Entry] = {}
        self.order: list[str] = []
        self.phi_formulas: dict[str, Formula] = {}
        self.bsi_template: Optional[Formula] = None

    def add(self, entry: Entry):
        if entry.label in self.entries:
            raise CheckError(f"duplicate label {entry.label!r}")
        self.entries[entry.label] = entry
        self.order.append(entry.label)

    def add_axiom(self, label: str, statement: Formula, section: str = "base"):
        self.add(Entry(label, "axiom", statement, section))

    def add_definition(self, label: str, statement: Formula, section: str = "base"):
        self.add(Entry(label, "definition", statement, section))

    def add_theorem(self, label: str, statement: Formula, section: str = "base"):
        self.add(Entry(label, "theorem", statement, section, checked=False))

    def register_phi(self, label: str, unary: Formula):
        if tuple(sx.free_vars(unary)) != ("x",):
            raise CheckError("phi formulas are unary with free variable x")
        self.phi_formulas[label] = unary

    def enable_bsi(self, template: Formula):
        self.bsi_template = template

    def lookup(self, label: str) -> Entry:
        got = self.entries.get(label)
        if got is None:
            raise CheckError(f"unresolved label {label!r}")
        return got

    def bsi_statement(self, phi_label: str) -> Formula:
        if self.bsi_template is None:
            raise CheckError("no induction schema declared")
        phi = self.phi_formulas.get(phi_label)
        if phi is None:
            raise CheckError(f"unregistered phi label {phi_label!r}")
        return _instantiate_phi(self.bsi_template, phi)


def _instantiate_phi(template: Formula, phi: Formula) -> Formula:
    """Replace the placeholder atoms phi(t) of a schema template by the
    registered unary formula at t."""

    def on_atom(atom):
        if atom.pred.name == "phi" and atom.pred.arity == 1:
            return subst(phi, {"x": atom.args[0]})
        return atom

    return sx.map_atoms(template, on_atom)


def bsi_template() -> Formula:
    """phi(eps) & forall x' [phi(x') -> phi(s0 x') & phi(s1 x')] -> phi(x)
    over the placeholder predicate phi."""
    phi = sx.PredSym("phi", 1)

    def at(t):
        return sx.Atom(phi, (t,))

    xp = sx.Var("x'")
    step = sx.fall(
        "x'",
        fimp(at(xp), sx.fand(at(sx.App(sx.S0, (xp,))), at(sx.App(sx.S1, (xp,))))),
    )
    return fimp(sx.fand(at(sx.App(sx.EPS)), step), at(sx.Var("x")))


# ---------------------------------------------------------------------------
# script syntax


@dataclass
class UseLine:
    label: str
    direction: Optional[str]  # fw | bw | None
    items: tuple  # (";", text) | (":", name)
    phi_label: Optional[str] = None  # for BSI citations
    lineno: int = 0


@dataclass
class ClaimBlock:
    statement_text: str
    lines: list
    lineno: int = 0


@dataclass
class ExplicitStep:
    kind: str  # special | eqsub | resolve
    payload: tuple
    lineno: int = 0


@dataclass
class Script:
    label: str
    statement_text: str
    h_names: tuple[str, ...] = ()
    lines: list = field(default_factory=list)  # UseLine / ClaimBlock interleaved
    explicit: Optional[list] = None  # ExplicitStep list for very simple proofs
    lineno: int = 0


_USE = re.compile(r"use\s+(\S+)(.*)$")


def parse_script_file(text: str) -> list[Script]:
    scripts: list[Script] = []
    cur: Optional[Script] = None
    mode = None
    claim: Optional[ClaimBlock] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("theorem "):
            if cur is not None:
                raise ParseError("previous theorem not closed by qed", lineno, 1)
            m = re.match(r"theorem\s+([a-z0-9_']+)\s*:\s*(.+)$", line)
            if not m:
                raise ParseError("malformed theorem header", lineno, 1)
            cur = Script(m.group(1), m.group(2), lineno=lineno)
            mode = None
            continue
        if cur is None:
            raise ParseError(f"statement outside a theorem block: {line!r}", lineno, 1)
        if line == "proof":
            mode = "proof"
            continue
        if line == "explicit":
            mode = "explicit"
            cur.explicit = []
            continue
        if line == "qed":
            if claim is not None:
                raise ParseError("claim block not closed by shown", lineno, 1)
            scripts.append(cur)
            cur = None
            mode = None
            continue
        if mode == "proof":
            if line.startswith("H"):
                rest = line[1:].strip()
                names = []
                for part in rest.split(":"):
                    part = part.strip()
                    if part:
                        names.append(part)
                cur.h_names = tuple(names)
                continue
            if line.startswith("claim"):
                m = re.match(r"claim\s*:?\s*(.+)$", line)
                if not m:
                    raise ParseError("malformed claim", lineno, 1)
                claim = ClaimBlock(m.group(1), [], lineno)
                continue
            if line == "shown":
                if claim is None:
                    raise ParseError("shown without claim", lineno, 1)
                cur.lines.append(claim)
                claim = None
                continue
            use = _parse_use(line, lineno)
            if claim is not None:
                claim.lines.append(use)
            else:
                cur.lines.append(use)
            continue
        if mode == "explicit":
            cur.explicit.append(_parse_explicit(line, lineno))
            continue
        raise ParseError(f"unexpected line {line!r}", lineno, 1)
    if cur is not None:
        raise ParseError("unterminated theorem block", cur.lineno, 1)
    return scripts


def _split_items(rest: str):
    """Split '; t1 ; t2 : w' into ((';', 't1'), (';', 't2'), (':', 'w'))."""
    items = []
    buf = []
    sep = None
    depth = 0
    for ch in rest:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in ";:" and depth == 0:
            if sep is not None:
                items.append((sep, "".join(buf).strip()))
            buf = []
            sep = ch
        else:
            buf.append(ch)
    if sep is not None:
        items.append((sep, "".join(buf).strip()))
    elif rest.strip():
        raise CheckError(f"stray citation arguments {rest!r}")
    for kind, text in items:
        if not text:
            raise CheckError("empty citation argument")
    return tuple(items)


def _parse_use(line: str, lineno: int) -> UseLine:
    m = _USE.match(line)
    if not m:
        raise ParseError(f"malformed citation line {line!r}", lineno, 1)
    head, rest = m.group(1), m.group(2)
    phi_label = None
    if head == "BSI":
        m2 = re.match(r"\s*\(phi\s+([a-z0-9_']+)\)(.*)$", rest)
        if not m2:
            raise ParseError("BSI citation needs (phi <label>)", lineno, 1)
        phi_label = m2.group(1)
        rest = m2.group(2)
        label, direction = "BSI", None
    else:
        if head.endswith(".fw"):
            label, direction = head[:-3], "fw"
        elif head.endswith(".bw"):
            label, direction = head[:-3], "bw"
        else:
            label, direction = head, None
    return UseLine(label, direction, _split_items(rest), phi_label, lineno)


def _parse_explicit(line: str, lineno: int) -> ExplicitStep:
    if line.startswith("special "):
        m = re.match(r"special\s+(\S+)(.*?)(?:\s+conjunct\s+(\d+))?$", line)
        if not m:
            raise ParseError("malformed special step", lineno, 1)
        label = m.group(1)
        items = _split_items(m.group(2))
        k = int(m.group(3)) if m.group(3) else None
        return ExplicitStep("special", (label, items, k), lineno)
    if line.startswith("eqsub"):
        items = _split_items(line[len("eqsub") :])
        if len(items) != 4 or any(kind != ";" for kind, _ in items):
            raise ParseError("eqsub expects ; a ; b ; x ; A", lineno, 1)
        return ExplicitStep("eqsub", tuple(t for _, t in items), lineno)
    if line.startswith("resolve"):
        m = re.match(r"resolve\s+(\d+)\s+(\d+)$", line)
        if not m:
            raise ParseError("malformed resolve step", lineno, 1)
        return ExplicitStep("resolve", (int(m.group(1)), int(m.group(2))), lineno)
    raise ParseError(f"unknown explicit step {line!r}", lineno, 1)


# ---------------------------------------------------------------------------
# elaboration


@dataclass
class ScriptVerdict:
    label: str
    ok: bool
    message: str = ""
    instances: tuple = ()
    elapsed: float = 0.0
    spent: int = 0


def select_direction(statement: Formula, direction: Optional[str]) -> Formula:
    if direction is None:
        return statement
    pair = sx.as_iff(statement)
    if pair is None:
        raise CheckError("direction marker on a non-biconditional statement")
    lhs, rhs = pair
    return fimp(lhs, rhs) if direction == "fw" else fimp(rhs, lhs)


def elaborate_citation(
    registry: Registry, use: UseLine, env: dict, require_checked: bool = True
) -> Formula:
    """One citation line to one closed instance."""
    if use.label == "BSI":
        stmt = registry.bsi_statement(use.phi_label)
    else:
        entry = registry.lookup(use.label)
        if require_checked and not entry.checked:
            raise CheckError(f"citation of unchecked theorem {use.label!r}")
        stmt = select_direction(entry.statement, use.direction)
    steps = []
    for kind, text in use.items:
        if kind == ";":
            term = sx.parse(text, "term", registry.symbols, env)
            if not sx.is_variable_free(term):
                raise CheckError(f"citation term {text!r} is not variable free")
            steps.append(("term", term))
        else:
            if text in env:
                raise CheckError(f"witness name {text!r} is already bound")
            steps.append(("witness", text))
    base = nform.to_negation_form(closure(stmt))
    record: list = []
    out = nform.special_case(base, nform.SpecialCaseDirective(tuple(steps)), record)
    for alias, const in record:
        env[alias] = const
    return out


def check_script(
    registry: Registry,
    script: Script,
    budget: int = DEFAULT_SCRIPT_BUDGET,
) -> ScriptVerdict:
    start = time.perf_counter()
    try:
        statement = sx.parse(script.statement_text, "formula", registry.symbols)
        if script.explicit is not None:
            instances = _replay_explicit(registry, script, statement, budget)
            return ScriptVerdict(
                script.label, True, instances=tuple(instances),
                elapsed=time.perf_counter() - start,
            )
        order = sx.free_vars(statement)
        if len(script.h_names) != len(order):
            raise CheckError(
                f"H declares {len(script.h_names)} names for {len(order)} free variables"
            )
        frozen = nform.freeze(statement, script.h_names)
        env = {name: const for (_, const), name in zip(frozen.witnesses, script.h_names)}
        goal_negation = nform.to_negation_form(Not(frozen.frozen))

        segments: list[tuple[list, Optional[Formula]]] = []
        pending: list = []
        claims: list[Formula] = []
        for item in script.lines:
            if isinstance(item, UseLine):
                pending.append(item)
            else:
                claim_formula = sx.parse(item.statement_text, "formula", registry.symbols, env)
                if sx.free_vars(claim_formula):
                    raise CheckError("claims must be variable free")
                segments.append((item.lines, claim_formula))
                if pending:
                    # citations before a claim belong to the final segment
                    raise CheckError("citation lines must follow the last claim")
        segments.append((pending, None))

        all_instances: list = []
        proved_claims: list = []
        for lines, claim_formula in segments:
            instances = [elaborate_citation(registry, u, env) for u in lines]
            all_instances.extend(instances)
            if claim_formula is not None:
                target = nform.to_negation_form(Not(claim_formula))
            else:
                target = goal_negation
            inputs = instances + proved_claims + [target]
            res = propcalc.ground_refute(inputs, budget, want_cert=False)
            if isinstance(res, propcalc.OutOfBudget):
                raise CheckError(f"refutation budget exhausted ({res.spent})")
            if not isinstance(res, propcalc.Refutation):
                what = (
                    f"claim {sx.render(claim_formula)}"
                    if claim_formula is not None
                    else "goal"
                )
                dump = "; ".join(sx.render(i, "infix-pretty") for i in inputs)
                raise CheckError(f"refutation failed for {what}: [{dump}]")
            if claim_formula is not None:
                proved_claims.append(claim_formula)
        return ScriptVerdict(
            script.label,
            True,
            instances=tuple(all_instances),
            elapsed=time.perf_counter() - start,
        )
    except ProofkitError as e:
        return ScriptVerdict(
            script.label, False, str(e), elapsed=time.perf_counter() - start
        )


def _replay_explicit(registry, script, statement: Formula, budget) -> list:
    """Very simple proofs: literal step-by-step replay."""
    a0 = nform.to_normal_form(Not(closure(statement)))
    # witness the leading existentials (these are the goal's frozen variables)
    steps_dir = []
    cur = a0
    while True:
        loc = nform.leftmost_quantifier(cur)
        if loc is None or loc[0] != "E" or loc[1] != ():
            break
        e = cur
        steps_dir.append(("witness", f"{e.var}"))
        cur = nform.special_case(
            cur, nform.SpecialCaseDirective((("witness", e.var),))
        )
    derived: list = list(sx.conjuncts(cur))
    env: dict = {}
    for step in script.explicit:
        if step.kind == "special":
            label, items, k = step.payload
            entry = registry.lookup(label)
            if entry.kind != "axiom":
                raise CheckError("special steps cite nonlogical axioms only")
            directive = []
            for kind, text in items:
                if kind == ";":
                    directive.append(
                        ("term", sx.parse(text, "term", registry.symbols, env))
                    )
                else:
                    directive.append(("witness", text))
            base = nform.to_normal_form(closure(entry.statement))
            out = nform.special_case(base, nform.SpecialCaseDirective(tuple(directive)))
            parts = sx.conjuncts(out)
            if k is not None:
                if not 1 <= k <= len(parts):
                    raise CheckError(f"no conjunct {k}")
                derived.append(parts[k - 1])
            elif len(parts) == 1:
                derived.append(parts[0])
            else:
                raise CheckError("ambiguous conjunct; say `conjunct <k>`")
        elif step.kind == "eqsub":
            at, bt, xv, ft = step.payload
            a = sx.parse(at, "term", registry.symbols, env)
            b = sx.parse(bt, "term", registry.symbols, env)
            body = sx.parse(ft, "formula", registry.symbols, env)
            fa = subst(body, {xv: a})
            fb = subst(body, {xv: b})
            clause = sx.disj([Not(sx.eq(a, b)), Not(fa), fb])
            if not propcalc.is_equality_substitution(clause):
                raise CheckError("ill-formed equality substitution")
            derived.append(clause)
        elif step.kind == "resolve":
            i, j = step.payload
            if not (1 <= i <= len(derived) and 1 <= j <= len(derived)):
                raise CheckError("resolve cites a missing step")
            derived.append(propcalc.one_resolution(derived[i - 1], derived[j - 1]))
        else:
            raise CheckError(f"unknown step kind {step.kind!r}")
    have = set(derived)
    for f in derived:
        if sx.opposite(f) in have:
            return derived
        if (
            isinstance(f, Not)
            and isinstance(f.body, sx.Atom)
            and f.body.pred == sx.EQ
            and f.body.args[0] == f.body.args[1]
        ):
            return derived
    raise CheckError("explicit proof reaches no contradiction")


# ---------------------------------------------------------------------------
# corpus driver


@dataclass
class CorpusReport:
    verdicts: list[ScriptVerdict]

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)


def check_scripts(
    registry: Registry,
    scripts: Sequence[Script],
    budget: int = DEFAULT_SCRIPT_BUDGET,
    register: bool = True,
) -> CorpusReport:
    verdicts = []
    for s in scripts:
        v = check_script(registry, s, budget)
        verdicts.append(v)
        if v.ok and register:
            if s.label in registry.entries:
                registry.entries[s.label].checked = True
            else:
                stmt = sx.parse(s.statement_text, "formula", registry.symbols)
                registry.add(Entry(s.label, "theorem", stmt, checked=True))
        if not v.ok:
            break
    return CorpusReport(verdicts)
