"""Formula transformations: negation, prenex, conjunctive, and normal forms,
frozen variables, and special cases.

Special-casing is implemented in place on negation-form formulas: the
leftmost quantifier occurrence is never enclosed by another quantifier, so a
universal occurrence can take a variable-free term and an existential one its
special constant directly.  On fully prenexed input this coincides with
prefix consumption; on partially consumed statements it leaves the remaining
quantified subformulas intact (they stay opaque to the propositional layer).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import CheckError, SizeGuardExceeded
from . import propcalc
from . import syntax as sx
from .syntax import (
    Atom,
    Exists,
    Formula,
    Not,
    Or,
    SpecialConst,
    Term,
    as_all,
    as_and,
    fand,
    fall,
    closure,
    free_vars,
    special_constant,
    subst,
)

DEFAULT_CLAUSE_GUARD = 10_000


# ---------------------------------------------------------------------------
# negation form


def to_negation_form(f: Formula) -> Formula:
    """Push every proper negation inward until it sits before an atom."""
    pair = as_all(f)
    if pair is not None:
        x, b = pair
        return fall(x, to_negation_form(b))
    pair = as_and(f)
    if pair is not None:
        return fand(to_negation_form(pair[0]), to_negation_form(pair[1]))
    if isinstance(f, Atom):
        return f
    if isinstance(f, Exists):
        return Exists(f.var, to_negation_form(f.body))
    if isinstance(f, Or):
        return Or(to_negation_form(f.left), to_negation_form(f.right))
    if isinstance(f, Not):
        return _neg(f.body)
    raise TypeError(f)


def _neg(g: Formula) -> Formula:
    pair = as_all(g)
    if pair is not None:
        x, b = pair
        return Exists(x, _neg(b))
    pair = as_and(g)
    if pair is not None:
        return Or(_neg(pair[0]), _neg(pair[1]))
    if isinstance(g, Atom):
        return Not(g)
    if isinstance(g, Not):
        return to_negation_form(g.body)
    if isinstance(g, Or):
        return fand(_neg(g.left), _neg(g.right))
    if isinstance(g, Exists):
        return fall(g.var, _neg(g.body))
    raise TypeError(g)


# ---------------------------------------------------------------------------
# prenex form


def _split_prenex(f: Formula):
    """Prefix/matrix split of a negation-form adjusted formula, pulling the
    left disjunct's or conjunct's quantifiers first."""
    pair = as_all(f)
    if pair is not None:
        x, b = pair
        prefix, matrix = _split_prenex(b)
        return [("A", x)] + prefix, matrix
    if isinstance(f, Exists):
        prefix, matrix = _split_prenex(f.body)
        return [("E", f.var)] + prefix, matrix
    pair = as_and(f)
    if pair is not None:
        pa, ma = _split_prenex(pair[0])
        pb, mb = _split_prenex(pair[1])
        return pa + pb, fand(ma, mb)
    if isinstance(f, Or):
        pa, ma = _split_prenex(f.left)
        pb, mb = _split_prenex(f.right)
        return pa + pb, Or(ma, mb)
    if isinstance(f, (Atom, Not)):
        return [], f
    raise TypeError(f)


def _assemble(prefix, matrix: Formula) -> Formula:
    out = matrix
    for kind, x in reversed(prefix):
        out = Exists(x, out) if kind == "E" else fall(x, out)
    return out


def to_prenex(f: Formula) -> Formula:
    """A prenex form of f: quantifier prefix followed by an open matrix."""
    nf = to_negation_form(sx.make_adjusted_variant(f))
    prefix, matrix = _split_prenex(nf)
    return _assemble(prefix, matrix)


def prenex_prefix(f: Formula):
    """(prefix, matrix) of a formula already in prenex shape."""
    prefix = []
    cur = f
    while True:
        pair = as_all(cur)
        if pair is not None:
            prefix.append(("A", pair[0]))
            cur = pair[1]
            continue
        if isinstance(cur, Exists):
            prefix.append(("E", cur.var))
            cur = cur.body
            continue
        return prefix, cur


# ---------------------------------------------------------------------------
# conjunctive and normal form


def to_conjunctive(f: Formula, guard: int = DEFAULT_CLAUSE_GUARD) -> Formula:
    """Distribute disjunction over conjunction to a right-associated
    conjunction of clauses.  Quantified subformulas are atomic here; the
    normal-form pipeline only ever distributes an open matrix."""
    clauses = propcalc.clausify(f, guard)
    if len(clauses) > guard:
        raise SizeGuardExceeded("conjunctive form too large", len(clauses))
    parts = [sx.disj([a if pol else Not(a) for a, pol in cl]) for cl in clauses]
    return sx.conj(parts)


def to_normal_form(f: Formula, guard: int = DEFAULT_CLAUSE_GUARD) -> Formula:
    """Closed + prenex + negation + conjunctive form."""
    if free_vars(f):
        raise CheckError("normal form requires a closed formula")
    nf = to_negation_form(sx.make_adjusted_variant(f))
    prefix, matrix = _split_prenex(nf)
    return _assemble(prefix, to_conjunctive(matrix, guard))


# ---------------------------------------------------------------------------
# frozen variables


@dataclass(frozen=True)
class FrozenResult:
    frozen: Formula
    witnesses: tuple[tuple[str, SpecialConst], ...]


def freeze(f: Formula, names: Optional[Sequence[str]] = None) -> FrozenResult:
    """Replace the closure prefix by witness constants: each x_k becomes the
    special constant for  exists x_k not A_k  (so the result is closed and
    provably equivalent to the closure)."""
    order = free_vars(f)
    if names is None:
        names = order
    if len(names) != len(order):
        raise CheckError(
            f"freeze expects {len(order)} witness names for {', '.join(order) or 'no variables'}"
        )
    cur = closure(f)
    witnesses = []
    for x, alias in zip(order, names):
        pair = as_all(cur)
        assert pair is not None and pair[0] == x
        body = pair[1]
        r = special_constant(Exists(x, Not(body)), alias)
        witnesses.append((x, r))
        cur = subst(body, {x: r})
    return FrozenResult(cur, tuple(witnesses))


def unfreeze(res: FrozenResult) -> Formula:
    """Replace witnesses by their variables again (test helper; yields a
    variant of the closure's matrix)."""
    out = res.frozen
    for x, r in reversed(res.witnesses):
        out = sx.replace_const(out, r, sx.Var(x))
    return out


# ---------------------------------------------------------------------------
# special cases


@dataclass(frozen=True)
class SpecialCaseDirective:
    """Ordered instructions, each ("term", variable-free term) for the next
    universal occurrence or ("witness", alias) for the next existential."""

    steps: tuple


def leftmost_quantifier(f: Formula):
    """(kind, path) of the leftmost quantifier occurrence, or None.  kind is
    "A" for a universal pattern, "E" for a bare instantiation; path addresses
    the Exists node (for "A", its enclosing negation)."""

    def walk(g, path):
        if isinstance(g, Atom):
            return None
        if isinstance(g, Not) and isinstance(g.body, Exists):
            return ("A", path)
        if isinstance(g, Exists):
            return ("E", path)
        if isinstance(g, Not):
            return walk(g.body, path + (0,))
        if isinstance(g, Or):
            return walk(g.left, path + (0,)) or walk(g.right, path + (1,))
        raise TypeError(g)

    return walk(f, ())


def _get(f: Formula, path):
    for i in path:
        if isinstance(f, Not):
            f = f.body
        elif isinstance(f, Or):
            f = f.left if i == 0 else f.right
        else:
            raise AssertionError
    return f


def _put(f: Formula, path, new: Formula) -> Formula:
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(f, Not):
        return Not(_put(f.body, rest, new))
    if isinstance(f, Or):
        if i == 0:
            return Or(_put(f.left, rest, new), f.right)
        return Or(f.left, _put(f.right, rest, new))
    raise AssertionError


def special_case(
    f: Formula, directive: SpecialCaseDirective, record=None
) -> Formula:
    """Apply the directive to the leftmost quantifier occurrences of a closed
    formula: universal occurrences take the given variable-free terms,
    existential ones their special constants (aliased by the witness name).
    With an empty directive this is the identity."""
    if free_vars(f):
        raise CheckError("special cases apply to closed formulas")
    cur = f
    for idx, (kind, payload) in enumerate(directive.steps):
        loc = leftmost_quantifier(cur)
        if loc is None:
            raise CheckError(f"directive longer than quantifier prefix (step {idx + 1})")
        qkind, path = loc
        if kind == "term":
            if qkind != "A":
                raise CheckError(
                    f"term argument at existential position (step {idx + 1})"
                )
            if not sx.is_variable_free(payload):
                raise CheckError("special-case terms must be variable free")
            node = _get(cur, path)  # Not(Exists(x, M))
            e = node.body
            inner = e.body
            if isinstance(inner, Not):
                repl = subst(inner.body, {e.var: payload})
            else:
                repl = Not(subst(inner, {e.var: payload}))
            cur = _put(cur, path, repl)
        elif kind == "witness":
            if qkind != "E":
                raise CheckError(
                    f"witness name at universal position (step {idx + 1})"
                )
            e = _get(cur, path)
            r = special_constant(e, payload)
            if record is not None:
                record.append((payload, r))
            cur = _put(cur, path, subst(e.body, {e.var: r}))
        else:
            raise CheckError(f"unknown directive step kind {kind!r}")
    return cur


def special_case_conjuncts(f: Formula) -> list[Formula]:
    return sx.conjuncts(f)
