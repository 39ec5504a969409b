"""Bidirectional type checking, normalization, and derivation scripts.

Judgmental equality is decided by normalizing both sides and comparing
syntactically.  Normalization performs beta/iota steps (Pi application,
split on pair, J on refl, unitrec on star; no eta anywhere) interleaved
with the equational context's rewrite rules.  Each equation is oriented
bigger-to-smaller by term size (ties keep the written order) and applies
in any context extending its own telescope by a suffix; the number of
equation steps is bounded (default 10000) so a looping equation set
fails loudly instead of spinning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    App, Const, ConstDecl, Ext, Id, J, Lam, Pair, Pi, Refl, Sigma, Signature,
    Split, Star, Substitution, Telescope, Term, Uip, Unit, UnitRec, Var,
    _CHILDREN, map_vars, substitute, term_size, weaken,
)

DEFAULT_REWRITE_BOUND = 10_000
_BETA_BOUND = 1_000_000


class KernelError(Exception):
    pass


class TypeCheckError(KernelError):
    """Check failure; for equality failures carries both normal forms
    and the path to the first differing subterm."""

    def __init__(self, message: str, expected: Term | None = None,
                 actual: Term | None = None, path: tuple[str, ...] | None = None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual
        self.path = path


class NotInferable(TypeCheckError):
    """The term needs a checking context (bare lam or pair)."""


class RewriteBoundExceeded(KernelError):
    """The rewrite budget ran out; the equation set does not terminate."""


class ArityMismatch(KernelError):
    pass


class ScriptError(KernelError):
    pass


@dataclass(frozen=True, slots=True)
class Equation:
    """Over ``telescope``, lhs = rhs : type."""

    telescope: Telescope
    lhs: Term
    rhs: Term
    type: Term

    def oriented(self) -> tuple[Term, Term]:
        if term_size(self.rhs) > term_size(self.lhs):
            return self.rhs, self.lhs
        return self.lhs, self.rhs


@dataclass(frozen=True, slots=True)
class EquationalContext:
    equations: tuple[Equation, ...] = ()
    rewrite_bound: int = DEFAULT_REWRITE_BOUND

    def extend(self, eq: Equation) -> "EquationalContext":
        return EquationalContext(self.equations + (eq,), self.rewrite_bound)


EMPTY_EQS = EquationalContext()


def instantiate(t: Term, *values: Term) -> Term:
    """Fill the innermost len(values) binder slots of ``t`` (values given
    outermost first) and shift the remaining free variables down."""
    k = len(values)

    def rep(i: int, d: int):
        j = i - d
        if j < 0:
            return Var(i)
        if j < k:
            return weaken(values[k - 1 - j], d)
        return Var(i - k)

    return map_vars(t, rep)


def bind_image(t: Term, new_binders: int, values: list[Term]) -> Term:
    """Replace the innermost len(values) binder slots of ``t`` by terms
    over ``new_binders`` fresh slots (values outermost first)."""
    m = len(values)

    def rep(i: int, d: int):
        j = i - d
        if j < 0:
            return Var(i)
        if j < m:
            return weaken(values[m - 1 - j], d)
        return Var(i - m + new_binders)

    return map_vars(t, rep)


def _head_step(t: Term) -> Term | None:
    match t:
        case App(Lam(body), a):
            return instantiate(body, a)
        case Split(_, branch, Pair(a, b)):
            return instantiate(branch, a, b)
        case J(_, branch, _, _, Refl(r)):
            return instantiate(branch, r)
        case UnitRec(_, branch, Star()):
            return branch
        case _:
            return None


def whnf(t: Term) -> Term:
    """Weak head normal form under beta/iota only."""
    steps = 0
    while True:
        match t:
            case App(f, a):
                f2 = whnf(f)
                if f2 is not f:
                    t = App(f2, a)
            case Split(m, b, s):
                s2 = whnf(s)
                if s2 is not s:
                    t = Split(m, b, s2)
            case J(m, b, l, r, p):
                p2 = whnf(p)
                if p2 is not p:
                    t = J(m, b, l, r, p2)
            case UnitRec(m, b, s):
                s2 = whnf(s)
                if s2 is not s:
                    t = UnitRec(m, b, s2)
        nxt = _head_step(t)
        if nxt is None:
            return t
        t = nxt
        steps += 1
        if steps > _BETA_BOUND:
            raise RewriteBoundExceeded("head reduction does not terminate")


class _Budget:
    __slots__ = ("beta", "rewrites", "bound")

    def __init__(self, bound: int):
        self.beta = 0
        self.rewrites = 0
        self.bound = bound

    def spend_beta(self):
        self.beta += 1
        if self.beta > _BETA_BOUND:
            raise RewriteBoundExceeded("beta/iota reduction does not terminate")

    def spend_rewrite(self):
        self.rewrites += 1
        if self.rewrites > self.bound:
            raise RewriteBoundExceeded(
                f"rewrite bound of {self.bound} exceeded; the equation set loops"
            )


def _beta_normalize(t: Term, budget: _Budget) -> Term:
    while True:
        nxt = _head_step(t)
        if nxt is None:
            break
        budget.spend_beta()
        t = nxt
    match t:
        case Var() | Star() | Unit():
            return t
        case Const(name, args):
            return Const(name, tuple(_beta_normalize(a, budget) for a in args))
        case _:
            spec = _CHILDREN[type(t)]
            children = [
                _beta_normalize(getattr(t, name), budget) for name, _ in spec
            ]
            if all(c is getattr(t, name) for c, (name, _) in zip(children, spec)):
                reduced = t
            else:
                reduced = type(t)(*children)
            nxt = _head_step(reduced)
            if nxt is None:
                return reduced
            budget.spend_beta()
            return _beta_normalize(nxt, budget)


def _applicable_rules(eqs: EquationalContext, ctx: Telescope):
    rules = []
    for eq in eqs.equations:
        k = len(eq.telescope)
        if k > len(ctx) or ctx.entries[:k] != eq.telescope.entries:
            continue
        shift = len(ctx) - k
        big, small = eq.oriented()
        rules.append((weaken(big, shift), weaken(small, shift)))
    return rules


def _rules_at_depth(rules, cache: dict, depth: int):
    shifted = cache.get(depth)
    if shifted is None:
        shifted = [(weaken(b, depth), weaken(s, depth)) for b, s in rules]
        cache[depth] = shifted
    return shifted


def _rewrite_once(t: Term, rules, cache: dict, depth: int = 0) -> Term | None:
    for big, small in _rules_at_depth(rules, cache, depth):
        if t == big:
            return small
    match t:
        case Var() | Star() | Unit():
            return None
        case Const(name, args):
            for i, a in enumerate(args):
                r = _rewrite_once(a, rules, cache, depth)
                if r is not None:
                    return Const(name, args[:i] + (r,) + args[i + 1:])
            return None
        case _:
            spec = _CHILDREN[type(t)]
            for i, (name, extra) in enumerate(spec):
                r = _rewrite_once(getattr(t, name), rules, cache, depth + extra)
                if r is not None:
                    children = [getattr(t, n) for n, _ in spec]
                    children[i] = r
                    return type(t)(*children)
            return None


def normalize(sig: Signature, eqs: EquationalContext, ctx: Telescope,
              t: Term) -> Term:
    """Full normal form under beta/iota and the oriented equations that
    apply in ``ctx``."""
    budget = _Budget(eqs.rewrite_bound)
    rules = _applicable_rules(eqs, ctx)
    cache: dict = {}
    while True:
        t = _beta_normalize(t, budget)
        if not rules:
            return t
        rewritten = _rewrite_once(t, rules, cache)
        if rewritten is None:
            return t
        budget.spend_rewrite()
        t = rewritten


def _diff_path(t1: Term, t2: Term) -> tuple[str, ...]:
    if type(t1) is not type(t2):
        return ()
    match t1:
        case Const(n1, a1):
            n2, a2 = t2.name, t2.args
            if n1 != n2 or len(a1) != len(a2):
                return ()
            for i, (u, v) in enumerate(zip(a1, a2)):
                if u != v:
                    return (f"arg{i}",) + _diff_path(u, v)
            return ()
        case Var(i):
            return ()
        case _:
            for name, _ in _CHILDREN[type(t1)]:
                u, v = getattr(t1, name), getattr(t2, name)
                if u != v:
                    return (name,) + _diff_path(u, v)
            return ()


def equal_terms(sig: Signature, eqs: EquationalContext, ctx: Telescope,
                t1: Term, t2: Term) -> bool:
    return normalize(sig, eqs, ctx, t1) == normalize(sig, eqs, ctx, t2)


def _require_equal(sig, eqs, ctx, actual: Term, expected: Term, message: str):
    n1 = normalize(sig, eqs, ctx, actual)
    n2 = normalize(sig, eqs, ctx, expected)
    if n1 != n2:
        raise TypeCheckError(
            f"{message}: normal forms differ at {'.'.join(_diff_path(n2, n1)) or 'root'}",
            expected=n2, actual=n1, path=_diff_path(n2, n1),
        )


def _check_const_args(sig, eqs, ctx, decl: ConstDecl, args: tuple[Term, ...]):
    if len(args) != len(decl.telescope):
        raise TypeCheckError(
            f"constant {decl.name} expects {len(decl.telescope)} arguments, got {len(args)}"
        )
    for k, arg in enumerate(args):
        expected = substitute(
            decl.telescope.entries[k], Substitution(args[:k], len(ctx))
        )
        check_type(sig, eqs, ctx, arg, expected)


def check_is_type(sig: Signature, eqs: EquationalContext, ctx: Telescope,
                  t: Term) -> None:
    match t:
        case Pi(dom, cod) | Sigma(dom, cod):
            check_is_type(sig, eqs, ctx, dom)
            check_is_type(sig, eqs, ctx.extend(dom), cod)
        case Id(ty, lhs, rhs):
            check_is_type(sig, eqs, ctx, ty)
            check_type(sig, eqs, ctx, lhs, ty)
            check_type(sig, eqs, ctx, rhs, ty)
        case Unit():
            return
        case Const(name, args):
            decl = sig.lookup(name)
            if decl is None:
                raise TypeCheckError(f"unknown constant {name}")
            if decl.result is not None:
                raise TypeCheckError(f"term constant {name} used as a type")
            _check_const_args(sig, eqs, ctx, decl, args)
        case _:
            raise TypeCheckError(f"not a type former: {type(t).__name__}")


def _expect_pi(sig, eqs, ctx, ty: Term, what: str) -> Pi:
    nf = normalize(sig, eqs, ctx, ty)
    if not isinstance(nf, Pi):
        raise TypeCheckError(f"{what} must have a Pi type, found {type(nf).__name__}",
                             actual=nf)
    return nf


def infer_type(sig: Signature, eqs: EquationalContext, ctx: Telescope,
               t: Term) -> Term:
    match t:
        case Var(i):
            return ctx.type_of_var(i)
        case App(Lam(body), a):
            # Unannotated redex: type it like a let binding.
            arg_ty = infer_type(sig, eqs, ctx, a)
            body_ty = infer_type(sig, eqs, ctx.extend(arg_ty), body)
            return instantiate(body_ty, a)
        case App(f, a):
            pi = _expect_pi(sig, eqs, ctx, infer_type(sig, eqs, ctx, f),
                            "applied term")
            check_type(sig, eqs, ctx, a, pi.domain)
            return instantiate(pi.codomain, a)
        case Lam():
            raise NotInferable("bare lambda needs a checking type")
        case Pair():
            raise NotInferable("bare pair needs a checking type")
        case Split(motive, branch, scrutinee):
            try:
                s_ty = infer_type(sig, eqs, ctx, scrutinee)
            except NotInferable:
                reduced = whnf(t)
                if reduced is t:
                    raise
                return infer_type(sig, eqs, ctx, reduced)
            nf = normalize(sig, eqs, ctx, s_ty)
            if not isinstance(nf, Sigma):
                raise TypeCheckError(
                    f"split scrutinee must have a Sigma type, found {type(nf).__name__}",
                    actual=nf)
            check_is_type(sig, eqs, ctx.extend(nf), motive)
            branch_ctx = ctx.extend(nf.first, nf.second)
            expected = bind_image(motive, 2, [Pair(Var(1), Var(0))])
            check_type(sig, eqs, branch_ctx, branch, expected)
            return instantiate(motive, scrutinee)
        case J(motive, branch, lhs, rhs, path):
            p_ty = normalize(sig, eqs, ctx, infer_type(sig, eqs, ctx, path))
            if not isinstance(p_ty, Id):
                raise TypeCheckError(
                    f"J path must have an Id type, found {type(p_ty).__name__}",
                    actual=p_ty)
            a_ty = p_ty.type
            check_type(sig, eqs, ctx, lhs, a_ty)
            check_type(sig, eqs, ctx, rhs, a_ty)
            _require_equal(sig, eqs, ctx, p_ty.lhs, lhs, "J left endpoint")
            _require_equal(sig, eqs, ctx, p_ty.rhs, rhs, "J right endpoint")
            motive_ctx = ctx.extend(
                a_ty, weaken(a_ty, 1), Id(weaken(a_ty, 2), Var(1), Var(0))
            )
            check_is_type(sig, eqs, motive_ctx, motive)
            diag = bind_image(motive, 1, [Var(0), Var(0), Refl(Var(0))])
            check_type(sig, eqs, ctx.extend(a_ty), branch, diag)
            return instantiate(motive, lhs, rhs, path)
        case UnitRec(motive, branch, scrutinee):
            check_type(sig, eqs, ctx, scrutinee, Unit())
            check_is_type(sig, eqs, ctx.extend(Unit()), motive)
            check_type(sig, eqs, ctx, branch, instantiate(motive, Star()))
            return instantiate(motive, scrutinee)
        case Refl(inner):
            ty = infer_type(sig, eqs, ctx, inner)
            return Id(ty, inner, inner)
        case Uip(p, q):
            p_ty = normalize(sig, eqs, ctx, infer_type(sig, eqs, ctx, p))
            if not isinstance(p_ty, Id):
                raise TypeCheckError(
                    f"uip arguments must be paths, found {type(p_ty).__name__}",
                    actual=p_ty)
            check_type(sig, eqs, ctx, q, p_ty)
            return Id(p_ty, p, q)
        case Ext(f, g, pointwise):
            pi = _expect_pi(sig, eqs, ctx, infer_type(sig, eqs, ctx, f),
                            "ext's first argument")
            check_type(sig, eqs, ctx, g, pi)
            family = Pi(
                pi.domain,
                Id(pi.codomain, App(weaken(f, 1), Var(0)), App(weaken(g, 1), Var(0))),
            )
            check_type(sig, eqs, ctx, pointwise, family)
            return Id(pi, f, g)
        case Star():
            return Unit()
        case Const(name, args):
            decl = sig.lookup(name)
            if decl is None:
                raise TypeCheckError(f"unknown constant {name}")
            if decl.result is None:
                raise TypeCheckError(f"type constant {name} used as a term")
            _check_const_args(sig, eqs, ctx, decl, args)
            return substitute(decl.result, Substitution(args, len(ctx)))
        case _:
            raise TypeCheckError(
                f"type former {type(t).__name__} has no term-level type")


def _expect_id(sig, eqs, ctx, ty: Term, what: str) -> Id:
    nf = normalize(sig, eqs, ctx, ty)
    if not isinstance(nf, Id):
        raise TypeCheckError(f"{what} checked against non-Id type {type(nf).__name__}",
                             expected=nf)
    return nf


def check_type(sig: Signature, eqs: EquationalContext, ctx: Telescope,
               t: Term, ty: Term) -> None:
    match t:
        case Lam(body):
            nf = normalize(sig, eqs, ctx, ty)
            if not isinstance(nf, Pi):
                raise TypeCheckError(
                    f"lambda checked against non-Pi type {type(nf).__name__}",
                    expected=nf)
            check_type(sig, eqs, ctx.extend(nf.domain), body, nf.codomain)
        case Pair(a, b):
            nf = normalize(sig, eqs, ctx, ty)
            if not isinstance(nf, Sigma):
                raise TypeCheckError(
                    f"pair checked against non-Sigma type {type(nf).__name__}",
                    expected=nf)
            check_type(sig, eqs, ctx, a, nf.first)
            check_type(sig, eqs, ctx, b, instantiate(nf.second, a))
        case Refl(inner):
            nf = _expect_id(sig, eqs, ctx, ty, "refl")
            check_type(sig, eqs, ctx, inner, nf.type)
            _require_equal(sig, eqs, ctx, inner, nf.lhs, "refl left endpoint")
            _require_equal(sig, eqs, ctx, inner, nf.rhs, "refl right endpoint")
        case Uip(p, q):
            nf = _expect_id(sig, eqs, ctx, ty, "uip")
            _expect_id(sig, eqs, ctx, nf.type, "uip's endpoints")
            check_type(sig, eqs, ctx, p, nf.type)
            check_type(sig, eqs, ctx, q, nf.type)
            _require_equal(sig, eqs, ctx, p, nf.lhs, "uip left endpoint")
            _require_equal(sig, eqs, ctx, q, nf.rhs, "uip right endpoint")
        case Ext(f, g, pointwise):
            nf = _expect_id(sig, eqs, ctx, ty, "ext")
            pi = _expect_pi(sig, eqs, ctx, nf.type, "ext's endpoints")
            check_type(sig, eqs, ctx, f, pi)
            check_type(sig, eqs, ctx, g, pi)
            family = Pi(
                pi.domain,
                Id(pi.codomain, App(weaken(f, 1), Var(0)), App(weaken(g, 1), Var(0))),
            )
            check_type(sig, eqs, ctx, pointwise, family)
            _require_equal(sig, eqs, ctx, f, nf.lhs, "ext left endpoint")
            _require_equal(sig, eqs, ctx, g, nf.rhs, "ext right endpoint")
        case _:
            try:
                inferred = infer_type(sig, eqs, ctx, t)
            except NotInferable:
                reduced = whnf(t)
                if reduced is t:
                    raise
                check_type(sig, eqs, ctx, reduced, ty)
                return
            _require_equal(sig, eqs, ctx, inferred, ty, "type mismatch")


def validate_telescope(sig: Signature, eqs: EquationalContext,
                       tele: Telescope, base: Telescope = Telescope()) -> None:
    ctx = base
    for entry in tele.entries:
        check_is_type(sig, eqs, ctx, entry)
        ctx = ctx.extend(entry)


def check_substitution(sig: Signature, eqs: EquationalContext,
                       src: Telescope, tgt: Telescope, s: Substitution) -> None:
    """s is a context map src -> tgt: one term per target entry, each
    checking at the instantiated entry type over src."""
    if len(s.terms) != len(tgt) or s.source_len != len(src):
        raise ArityMismatch(
            f"substitution shape {len(s.terms)}/{s.source_len} does not fit "
            f"target {len(tgt)} / source {len(src)}"
        )
    for k, term in enumerate(s.terms):
        expected = substitute(
            tgt.entries[k], Substitution(s.terms[:k], len(src))
        )
        check_type(sig, eqs, src, term, expected)


def validate_signature(sig: Signature) -> None:
    seen = Signature()
    for decl in sig.constants:
        validate_telescope(seen, EMPTY_EQS, decl.telescope)
        if decl.result is not None:
            check_is_type(seen, EMPTY_EQS, decl.telescope, decl.result)
        seen = seen.extend(decl)


# ---------------------------------------------------------------------------
# Derivation scripts


@dataclass(frozen=True, slots=True)
class CheckStep:
    telescope: Telescope
    term: Term
    type: Term


@dataclass(frozen=True, slots=True)
class ReflectStep:
    telescope: Telescope
    path: Term


@dataclass(frozen=True, slots=True)
class EttScript:
    signature: Signature
    steps: tuple[CheckStep | ReflectStep, ...]


@dataclass(slots=True)
class StepRecord:
    index: int
    kind: str
    ok: bool
    detail: str


@dataclass(slots=True)
class ScriptReport:
    ok: bool
    steps: list[StepRecord] = field(default_factory=list)
    equations: EquationalContext = EMPTY_EQS


def check_script(script: EttScript,
                 rewrite_bound: int = DEFAULT_REWRITE_BOUND) -> ScriptReport:
    """Run the steps in order; reflect steps install their equations for
    every later step.  Stops at the first failure."""
    sig = script.signature
    validate_signature(sig)
    eqs = EquationalContext((), rewrite_bound)
    report = ScriptReport(ok=True, equations=eqs)
    for i, step in enumerate(script.steps):
        kind = "check" if isinstance(step, CheckStep) else "reflect"
        try:
            validate_telescope(sig, eqs, step.telescope)
            if isinstance(step, CheckStep):
                check_is_type(sig, eqs, step.telescope, step.type)
                check_type(sig, eqs, step.telescope, step.term, step.type)
                detail = "checked"
            else:
                ty = normalize(sig, eqs, step.telescope,
                               infer_type(sig, eqs, step.telescope, step.path))
                if not isinstance(ty, Id):
                    raise ScriptError(
                        f"reflected term has type {type(ty).__name__}, not Id")
                eqs = eqs.extend(Equation(step.telescope, ty.lhs, ty.rhs, ty.type))
                report.equations = eqs
                detail = "equation installed"
        except KernelError as err:
            report.steps.append(StepRecord(i, kind, False, str(err)))
            report.ok = False
            return report
        report.steps.append(StepRecord(i, kind, True, detail))
    return report
