"""The Hilbert-Ackermann quantifier eliminator: special-sequence profiling,
the one-step eliminator with its rank/level bookkeeping, the driver that
runs it down to the base rank, and the tower-bound arithmetic.

The one-step eliminator follows the batch construction (eliminate every
rank-rho owner of maximal level at once).  Its output is re-verified, never
assumed; when several same-level constants interact through shared axiom
instances the batch output can fail validity, in which case the step falls
back to eliminating a single constant, which is provably sound and still
strictly decreases the owner count."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .errors import CheckError
from . import propcalc
from . import syntax as sx
from .kernel import core
from .kernel.core import ProofBuilder, ProofObject, SpecialSequence, Theory
from .syntax import Formula, Not, Or, SpecialConst, Term, fimp, subst

TOWER_CUTOFF = 2 ** 64


# ---------------------------------------------------------------------------
# tower arithmetic


@dataclass(frozen=True)
class TowerExpr:
    """Symbolic natural-number expression over +, *, and ^ (right-assoc)."""

    op: str  # "num" | "+" | "*" | "^"
    num: int = 0
    args: tuple = ()

    def __str__(self) -> str:
        if self.op == "num":
            return str(self.num)
        sym = {"+": " + ", "*": " * ", "^": " ^ "}[self.op]
        return "(" + sym.join(str(a) for a in self.args) + ")"

    def eval(self, cutoff: int = TOWER_CUTOFF) -> Optional[int]:
        """Arbitrary-precision value, or None above the cutoff."""
        if self.op == "num":
            return self.num if self.num <= cutoff else None
        vals = [a.eval(cutoff) for a in self.args]
        if any(v is None for v in vals):
            return None
        if self.op == "+":
            out = sum(vals)
        elif self.op == "*":
            out = 1
            for v in vals:
                out *= v
        else:
            # right-associated exponentiation with an overflow guard
            out = vals[-1]
            for base in reversed(vals[:-1]):
                if base >= 2 and (base.bit_length() - 1) * out > cutoff.bit_length() + 8:
                    return None
                out = base ** out
        return out if out <= cutoff else None


def tnum(n: int) -> TowerExpr:
    return TowerExpr("num", n)


def tpow(*args: TowerExpr) -> TowerExpr:
    return TowerExpr("^", args=tuple(args))


def lam_mu(lam: int, mu: int) -> TowerExpr:
    """2 ^ 2 ^ ... ^ 2 ^ lam with mu twos."""
    return tpow(*([tnum(2)] * mu + [tnum(lam)]))


def theorem22_bound(nu: int, lam: int) -> TowerExpr:
    return tpow(tnum(nu), tpow(tnum(2), tnum(lam)))


def bound_eval(nu: int, lam: int, rho: int, rho0: int) -> TowerExpr:
    """The final-sequence size bound  (nu ^ 2 ^ lam) ^ lam_(rho - rho0 + 2)."""
    return tpow(tpow(tnum(nu), tpow(tnum(2), tnum(lam))), lam_mu(lam, rho - rho0 + 2))


# ---------------------------------------------------------------------------
# profiling


@dataclass(frozen=True)
class Profile:
    rho: int
    lam: int
    kappa: int
    valid: bool


def profile(seq: SpecialSequence, budget: int = propcalc.DEFAULT_BUDGET) -> Profile:
    consts = set()
    owners = []
    for f in seq.formulas:
        consts |= sx.appearing_constants(f)
        owner = core.belongs_to(f)
        if owner is not None:
            owners.append(owner)
            consts.add(owner)
    rho = max((sx.const_rank(c) for c in consts), default=0)
    lam = max((sx.const_level(c) for c in consts), default=0)
    kappa = max(
        (sx.const_level(c) for c in owners if sx.const_rank(c) == rho), default=0
    )
    return Profile(rho, lam, kappa, core.sequence_valid(seq, budget))


# ---------------------------------------------------------------------------
# the one-step eliminator


@dataclass
class StepTrace:
    profile_in: Profile
    profile_out: Profile
    targets: tuple  # the set M
    pairs: tuple  # the special pairs (r, a)
    size_in: int
    size_out_multiset: int
    size_out: int
    mode: str  # "batch" | "singleton"
    collapsed: int = 0


def _owned_by(theory: Theory, seq: SpecialSequence):
    out = []
    for f in seq.formulas:
        out.append(core.belongs_to(f))
    return out


def ha_step(
    theory: Theory,
    seq: SpecialSequence,
    rho0: Optional[int] = None,
    budget: int = propcalc.DEFAULT_BUDGET,
) -> tuple[SpecialSequence, StepTrace]:
    """One round of the consistency-theorem elimination.  Requires a valid
    sequence whose formulas lie in delta_rho(T) with owned rank rho > rho0
    and kappa > 0; produces a valid sequence of at most nu^2 formulas with
    levels at most doubled and strictly less high-rank ownership."""
    if rho0 is None:
        rho0 = theory.rank_profile()
    if any(not (sx.is_open(a) and sx.is_plain(a)) for a in theory.axioms):
        raise CheckError("the eliminator requires plain nonlogical axioms")
    prof = profile(seq, budget)
    if not prof.valid:
        raise CheckError("input is not a special sequence")
    owners = _owned_by(theory, seq)
    owned_ranks = [sx.const_rank(o) for o in owners if o is not None]
    # a sequence with no owners of rank above rho is re-read at the lower
    # rank (a (rho,lam,0)-special sequence is (rho-1,lam,lam)-special)
    target_rho = max((r for r in owned_ranks), default=0)
    if target_rho <= rho0:
        raise CheckError(f"nothing to eliminate: owned rank {target_rho} <= {rho0}")
    target_kappa = max(
        sx.const_level(o)
        for o in owners
        if o is not None and sx.const_rank(o) == target_rho
    )
    for f in seq.formulas:
        core.classify_delta(theory, f, rho_cap=max(prof.rho, target_rho))

    targets = sorted(
        {
            o
            for o in owners
            if o is not None
            and sx.const_rank(o) == target_rho
            and sx.const_level(o) == target_kappa
        },
        key=lambda c: sx.render(c.subscript),
    )
    try:
        out, trace = _eliminate(theory, seq, owners, tuple(targets), prof, "batch", budget)
        return out, trace
    except CheckError:
        if len(targets) <= 1:
            raise
    out, trace = _eliminate(theory, seq, owners, (targets[0],), prof, "singleton", budget)
    return out, trace


def _eliminate(theory, seq, owners, targets, prof, mode, budget):
    target_set = set(targets)
    gamma: list[Formula] = []
    pairs: list[tuple[SpecialConst, Term]] = []
    for f, owner in zip(seq.formulas, owners):
        if owner in target_set:
            cls = core.classify_delta(theory, f)
            if cls.kind == "special-axiom":
                continue  # becomes B(r) -> B(r) after the rewrite: deleted
            assert cls.kind == "substitution"
            x, a = cls.detail
            if a is None:
                a = theory.zero_term
            pairs.append((owner, a))
        else:
            image = f
            for r in targets:
                e = r.subscript
                image = sx.replace_subformula(image, e, subst(e.body, {e.var: r}))
            if image != f:
                raise CheckError(
                    "targeted instantiation occurs outside its own formulas"
                )
            gamma.append(f)
    out_multi: list[Formula] = list(gamma)
    for r, a in pairs:
        for f in gamma:
            out_multi.append(sx.replace_const(f, r, a))
    out_formulas = list(dict.fromkeys(out_multi))
    out_seq = SpecialSequence(tuple(out_formulas))

    nu = len(seq.formulas)
    if len(out_multi) > nu * nu:
        raise CheckError("output exceeds the nu^2 bound")
    if not core.sequence_valid(out_seq, budget):
        raise CheckError("output failed the tautology re-verification")
    out_prof = profile(out_seq, budget)
    if out_prof.lam > 2 * prof.lam:
        raise CheckError("output levels exceed twice the input levels")
    for f in out_formulas:
        core.classify_delta(theory, f, rho_cap=prof.rho)
        owner = core.belongs_to(f)
        if owner in target_set:
            raise CheckError("an output formula still belongs to a target")
    trace = StepTrace(
        profile_in=prof,
        profile_out=out_prof,
        targets=tuple(targets),
        pairs=tuple(pairs),
        size_in=nu,
        size_out_multiset=len(out_multi),
        size_out=len(out_formulas),
        mode=mode,
        collapsed=len(out_multi) - len(out_formulas),
    )
    return out_seq, trace


# ---------------------------------------------------------------------------
# the driver


@dataclass
class RunLimits:
    max_steps: int = 200
    max_formulas: int = 100_000


@dataclass
class RunResult:
    final: SpecialSequence
    trace: list
    bound: TowerExpr
    bound_value: Optional[int]
    observed_max: int
    within_bound: Optional[bool]


def _owned_rank(theory: Theory, seq: SpecialSequence, rho0: int) -> int:
    best = 0
    for f in seq.formulas:
        o = core.belongs_to(f)
        if o is not None:
            best = max(best, sx.const_rank(o))
    return best


def ha_run(
    theory: Theory,
    seq: SpecialSequence,
    rho0: Optional[int] = None,
    limits: RunLimits = RunLimits(),
    budget: int = propcalc.DEFAULT_BUDGET,
) -> RunResult:
    """Iterate the eliminator until no formula belongs to a special constant
    of rank above rho0; compare observed sizes against the evaluated bound
    when it is below the cutoff."""
    if rho0 is None:
        rho0 = theory.rank_profile()
    prof0 = profile(seq, budget)
    if not prof0.valid:
        raise CheckError("input is not a special sequence")
    bound = bound_eval(len(seq.formulas), max(prof0.lam, 1), max(prof0.rho, 1), rho0)
    bound_value = bound.eval()
    trace: list[StepTrace] = []
    observed = len(seq.formulas)
    cur = seq
    steps = 0
    while _owned_rank(theory, cur, rho0) > rho0:
        steps += 1
        if steps > limits.max_steps:
            raise CheckError(f"step limit exhausted after {limits.max_steps}")
        cur, t = ha_step(theory, cur, rho0, budget)
        trace.append(t)
        observed = max(observed, t.size_out_multiset)
        if len(cur.formulas) > limits.max_formulas:
            raise CheckError("formula limit exhausted")
    within = None if bound_value is None else observed <= bound_value
    return RunResult(cur, trace, bound, bound_value, observed, within)


# ---------------------------------------------------------------------------
# Theorem-24 mode: reassemble a low-rank proof


def reassemble_proof(
    theory: Theory, goal: Formula, final_seq: SpecialSequence
) -> ProofObject:
    """Given the final special sequence produced from T[not closure(goal)],
    a proof of the goal in T: the non-hypothesis members are delta lines and
    the closure follows tautologically."""
    neg = Not(sx.closure(goal))
    pb = ProofBuilder()
    used = []
    for f in final_seq.formulas:
        if f == neg:
            continue
        core.classify_delta(theory, f)
        used.append(pb.delta(f))
    idx = pb.taut(sx.closure(goal), tuple(used))
    proof = pb.build()
    verdict = core.check_proof(theory, proof)
    if not verdict.ok:
        raise CheckError(
            f"reassembled proof fails at {verdict.failed_index}: {verdict.message}"
        )
    return proof


# ---------------------------------------------------------------------------
# demo and test-case generators


def demo_rank1():
    """The documented toy: q plain unary, target sequence of four formulas
    that one elimination step takes to rank-0 activity."""
    q = sx.PredSym("q", 1)
    eps = sx.App(sx.EPS)
    qeps = sx.Atom(q, (sx.Var("x"),))
    theory = Theory("demo", (qeps, Not(sx.Atom(q, (sx.Var("y"),)))), sx.EPS)
    e = sx.Exists("x", sx.Atom(q, (sx.Var("x"),)))
    r = sx.special_constant(e, "r")
    q_at = lambda t: sx.Atom(q, (t,))
    seq = SpecialSequence(
        (
            fimp(e, q_at(r)),
            fimp(q_at(eps), e),
            q_at(eps),
            Not(q_at(r)),
        )
    )
    return theory, seq


def generate_inconsistent_case(rng, rank: int):
    """A random openly inconsistent theory with a special sequence of the
    requested active rank, built from substitution chains over a fresh
    predicate and ground witness terms."""
    import random as _random

    assert rank in (1, 2)
    eps = sx.App(sx.EPS)
    ground = [eps, sx.App(sx.S0, (eps,)), sx.App(sx.S1, (eps,)), sx.App(sx.S0, (sx.App(sx.S0, (eps,)),))]
    a = rng.choice(ground)
    b = rng.choice(ground)
    if rank == 1:
        q = sx.PredSym("q", 1)
        theory = Theory(
            "gen1", (sx.Atom(q, (sx.Var("x"),)), Not(sx.Atom(q, (sx.Var("y"),)))), sx.EPS
        )
        e = sx.Exists("x", sx.Atom(q, (sx.Var("x"),)))
        r = sx.special_constant(e)
        seq = [
            fimp(sx.Atom(q, (a,)), e),
            fimp(e, sx.Atom(q, (r,))),
            sx.Atom(q, (a,)),
            Not(sx.Atom(q, (r,))),
        ]
        if rng.random() < 0.5:
            seq.append(fimp(sx.Atom(q, (b,)), e))
            seq.append(sx.Atom(q, (b,)))
        rng.shuffle(seq)
        return theory, SpecialSequence(tuple(seq))
    p = sx.PredSym("p", 2)
    theory = Theory(
        "gen2",
        (sx.Atom(p, (sx.Var("x"), sx.Var("y"))), Not(sx.Atom(p, (sx.Var("u"), sx.Var("v"))))),
        sx.EPS,
    )
    inner = sx.Exists("y", sx.Atom(p, (sx.Var("x"), sx.Var("y"))))
    e2 = sx.Exists("x", inner)
    r2 = sx.special_constant(e2)
    e1 = sx.Exists("y", sx.Atom(p, (r2, sx.Var("y"))))
    r1 = sx.special_constant(e1)
    seq = [
        sx.Atom(p, (a, b)),
        fimp(sx.Atom(p, (a, b)), sx.Exists("y", sx.Atom(p, (a, sx.Var("y"))))),
        fimp(sx.Exists("y", sx.Atom(p, (a, sx.Var("y")))), e2),
        fimp(e2, e1),
        fimp(e1, sx.Atom(p, (r2, r1))),
        Not(sx.Atom(p, (r2, r1))),
    ]
    rng.shuffle(seq)
    return theory, SpecialSequence(tuple(seq))
