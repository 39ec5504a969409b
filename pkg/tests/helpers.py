"""Shared test utilities: raw-term enumeration and random generation."""

from __future__ import annotations

import random

from ettik.syntax import (
    App, Const, Ext, Id, J, Lam, Pair, Pi, Refl, Sigma, Split, Star,
    Substitution, Term, Uip, Unit, UnitRec, Var,
)

# Two-constant signature used by the raw-term corpus tests.
CONSTS = (("b0", 0), ("f1", 1))


def enumerate_terms(max_size: int, depth: int) -> list[Term]:
    """All raw terms of size <= max_size with free indices < depth."""
    memo: dict[tuple[int, int], list[Term]] = {}

    def gen(size: int, d: int) -> list[Term]:
        key = (size, d)
        if key in memo:
            return memo[key]
        out: list[Term] = []
        if size == 1:
            out += [Var(i) for i in range(d)]
            out += [Unit(), Star()]
            out += [Const(n) for n, a in CONSTS if a == 0]
        elif size >= 2:
            rest = size - 1
            out += [Refl(t) for t in gen(rest, d)]
            out += [Lam(t) for t in gen(rest, d + 1)]
            out += [Const(n, (t,)) for n, a in CONSTS if a == 1 for t in gen(rest, d)]
            for k in range(1, rest):
                for a in gen(k, d):
                    for b in gen(rest - k, d):
                        out += [App(a, b), Pair(a, b), Uip(a, b)]
                for a in gen(k, d):
                    for b in gen(rest - k, d + 1):
                        out += [Pi(a, b), Sigma(a, b)]
            for k1 in range(1, rest - 1):
                for k2 in range(1, rest - k1):
                    k3 = rest - k1 - k2
                    for a in gen(k1, d):
                        for b in gen(k2, d):
                            for c in gen(k3, d):
                                out += [Id(a, b, c), Ext(a, b, c)]
                    for m in gen(k1, d + 1):
                        for br in gen(k2, d + 2):
                            for sc in gen(k3, d):
                                out.append(Split(m, br, sc))
                    for m in gen(k1, d + 1):
                        for br in gen(k2, d):
                            for sc in gen(k3, d):
                                out.append(UnitRec(m, br, sc))
            for k1 in range(1, rest - 3):
                for k2 in range(1, rest - k1 - 2):
                    for k3 in range(1, rest - k1 - k2 - 1):
                        for k4 in range(1, rest - k1 - k2 - k3):
                            k5 = rest - k1 - k2 - k3 - k4
                            for m in gen(k1, d + 3):
                                for br in gen(k2, d + 1):
                                    for a in gen(k3, d):
                                        for b in gen(k4, d):
                                            for p in gen(k5, d):
                                                out.append(J(m, br, a, b, p))
        memo[key] = out
        return out

    result: list[Term] = []
    for size in range(1, max_size + 1):
        result.extend(gen(size, depth))
    return result


def random_term(rng: random.Random, size: int, depth: int) -> Term:
    """One raw term of roughly the requested size."""
    if size <= 1:
        choices: list[Term] = [Unit(), Star(), Const("b0")]
        choices += [Var(i) for i in range(depth)]
        return rng.choice(choices)
    shape = rng.randrange(10)
    if shape == 0:
        return Refl(random_term(rng, size - 1, depth))
    if shape == 1:
        return Lam(random_term(rng, size - 1, depth + 1))
    if shape == 2:
        return Const("f1", (random_term(rng, size - 1, depth),))
    k = rng.randrange(1, size - 1) if size > 2 else 1
    if shape == 3:
        return App(random_term(rng, k, depth), random_term(rng, size - 1 - k, depth))
    if shape == 4:
        return Pair(random_term(rng, k, depth), random_term(rng, size - 1 - k, depth))
    if shape == 5:
        return Pi(random_term(rng, k, depth), random_term(rng, size - 1 - k, depth + 1))
    if shape == 6:
        return Sigma(random_term(rng, k, depth), random_term(rng, size - 1 - k, depth + 1))
    if shape == 7:
        third = max(size - 1 - 2 * (size // 3), 1)
        return Split(
            random_term(rng, size // 3, depth + 1),
            random_term(rng, size // 3, depth + 2),
            random_term(rng, third, depth),
        )
    if shape == 8:
        fifth = max((size - 1) // 5, 1)
        return J(
            random_term(rng, fifth, depth + 3),
            random_term(rng, fifth, depth + 1),
            random_term(rng, fifth, depth),
            random_term(rng, fifth, depth),
            random_term(rng, fifth, depth),
        )
    return Id(
        random_term(rng, k, depth),
        random_term(rng, max((size - 1 - k) // 2, 1), depth),
        random_term(rng, max(size - 1 - k - (size - 1 - k) // 2, 1), depth),
    )


def random_substitution(rng: random.Random, target_len: int, source_len: int,
                        size: int = 3) -> Substitution:
    return Substitution(
        tuple(random_term(rng, rng.randrange(1, size + 1), source_len)
              for _ in range(target_len)),
        source_len,
    )


# ---------------------------------------------------------------------------
# Well-typed generation over a small fixed signature.

from ettik.kernel import instantiate, whnf  # noqa: E402
from ettik.syntax import ConstDecl, Signature, Telescope  # noqa: E402

KERNEL_SIG = Signature((
    ConstDecl("B", Telescope(), None),
    ConstDecl("b0", Telescope(), Const("B")),
    ConstDecl("b1", Telescope(), Const("B")),
    ConstDecl("f1", Telescope((Const("B"),)), Const("B")),
))
BASE = Const("B")


def gen_type(rng: random.Random, ctx: Telescope, fuel: int) -> Term:
    """A well-formed closed-shape type over ctx; Id types always get two
    syntactically equal endpoints so terms of them are generatable."""
    if fuel <= 0:
        return BASE if rng.random() < 0.7 else Unit()
    r = rng.random()
    if r < 0.30:
        return BASE
    if r < 0.45:
        return Unit()
    if r < 0.65:
        dom = gen_type(rng, ctx, fuel - 1)
        return Pi(dom, gen_type(rng, ctx.extend(dom), fuel - 1))
    if r < 0.85:
        first = gen_type(rng, ctx, fuel - 1)
        return Sigma(first, gen_type(rng, ctx.extend(first), fuel - 1))
    inner = gen_type(rng, ctx, fuel - 2)
    end = gen_term(rng, ctx, inner, fuel - 2)
    return Id(inner, end, end)


def _decorate(rng: random.Random, ctx: Telescope, ty: Term, base: Term,
              fuel: int) -> Term:
    """Wrap a well-typed term in type-preserving redexes."""
    from ettik.syntax import weaken
    while fuel > 0 and rng.random() < 0.4:
        fuel -= 1
        shape = rng.randrange(4)
        if shape == 0:
            arg = gen_term(rng, ctx, BASE, 0)
            base = App(Lam(weaken(base, 1)), arg)
        elif shape == 1:
            r = gen_term(rng, ctx, BASE, 0)
            base = J(weaken(ty, 3), weaken(base, 1), r, r, Refl(r))
        elif shape == 2:
            a = gen_term(rng, ctx, BASE, 0)
            base = Split(weaken(ty, 1), weaken(base, 2), Pair(a, Star()))
        else:
            base = UnitRec(weaken(ty, 1), base, Star())
    return base


def gen_term(rng: random.Random, ctx: Telescope, ty: Term, fuel: int) -> Term:
    w = whnf(ty)
    match w:
        case Pi(dom, cod):
            return Lam(gen_term(rng, ctx.extend(dom), cod, fuel - 1))
        case Sigma(first, second):
            a = gen_term(rng, ctx, first, fuel - 1)
            return Pair(a, gen_term(rng, ctx, instantiate(second, a), fuel - 1))
        case Id(_, lhs, _):
            return _decorate(rng, ctx, w, Refl(lhs), fuel)
        case Unit():
            return _decorate(rng, ctx, w, Star(), fuel)
        case _:
            choices: list[Term] = [Const("b0"), Const("b1")]
            choices += [Var(i) for i in range(len(ctx))
                        if ctx.type_of_var(i) == w]
            base = rng.choice(choices)
            if fuel > 0 and rng.random() < 0.3:
                base = Const("f1", (gen_term(rng, ctx, BASE, fuel - 1),))
            return _decorate(rng, ctx, w, base, fuel)
