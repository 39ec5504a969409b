"""Independent reference implementations used only to cross-check the
engine.

Three oracles live here: a named-variable substitution calculus (checked
against the nameless engine), a set-level generator for finite setoid
models (emits .fcc fixture text), and a set-level quotient partition
computation.  None of them import engine internals; terms and tables are
plain tuples and dicts.
"""

from __future__ import annotations

import itertools


# ---------------------------------------------------------------------------
# Named-variable substitution oracle.
#
# Terms are tuples: ("var", x), ("const", name, (args...)), or
# (tag, child...) where a binding child is ((names...), body).

_BINDING_ARITY = {
    "pi": (0, 1),
    "lam": (1,),
    "app": (0, 0),
    "sigma": (0, 1),
    "pair": (0, 0),
    "split": (1, 2, 0),
    "id": (0, 0, 0),
    "refl": (0,),
    "j": (3, 1, 0, 0, 0),
    "ext": (0, 0, 0),
    "uip": (0, 0),
    "unit": (),
    "star": (),
    "unitrec": (1, 0, 0),
}


def free_names(t) -> set:
    match t:
        case ("var", x):
            return {x}
        case ("const", _, args):
            return set().union(*[free_names(a) for a in args]) if args else set()
        case (tag, *children):
            out: set = set()
            for arity, child in zip(_BINDING_ARITY[tag], children):
                if arity == 0:
                    out |= free_names(child)
                else:
                    names, body = child
                    out |= free_names(body) - set(names)
            return out
    raise ValueError(f"bad named term {t!r}")


def _fresh(base: str, avoid: set, counter: itertools.count) -> str:
    while True:
        candidate = f"{base}_{next(counter)}"
        if candidate not in avoid:
            return candidate


def named_substitute(t, mapping: dict, counter: itertools.count | None = None):
    """Simultaneous capture-avoiding substitution on named terms."""
    if counter is None:
        counter = itertools.count()
    match t:
        case ("var", x):
            return mapping.get(x, t)
        case ("const", name, args):
            return ("const", name,
                    tuple(named_substitute(a, mapping, counter) for a in args))
        case (tag, *children):
            danger: set = set()
            for image in mapping.values():
                danger |= free_names(image)
            new_children = []
            for arity, child in zip(_BINDING_ARITY[tag], children):
                if arity == 0:
                    new_children.append(named_substitute(child, mapping, counter))
                    continue
                names, body = child
                inner = dict(mapping)
                renamed = []
                for x in names:
                    inner.pop(x, None)
                    if x in danger:
                        x2 = _fresh(x, danger | free_names(body) | set(renamed), counter)
                        inner[x] = ("var", x2)
                        renamed.append(x2)
                    else:
                        renamed.append(x)
                new_children.append((tuple(renamed), named_substitute(body, inner, counter)))
            return (tag, *new_children)
    raise ValueError(f"bad named term {t!r}")


def alpha_equal(t1, t2, env1: dict | None = None, env2: dict | None = None,
                depth: int = 0) -> bool:
    env1 = env1 or {}
    env2 = env2 or {}
    match (t1, t2):
        case (("var", x), ("var", y)):
            return env1.get(x, ("free", x)) == env2.get(y, ("free", y))
        case (("const", n1, a1), ("const", n2, a2)):
            return n1 == n2 and len(a1) == len(a2) and all(
                alpha_equal(u, v, env1, env2, depth) for u, v in zip(a1, a2)
            )
        case ((tag1, *c1), (tag2, *c2)) if tag1 == tag2:
            for arity, u, v in zip(_BINDING_ARITY[tag1], c1, c2):
                if arity == 0:
                    if not alpha_equal(u, v, env1, env2, depth):
                        return False
                    continue
                (ns1, b1), (ns2, b2) = u, v
                if len(ns1) != len(ns2):
                    return False
                e1, e2 = dict(env1), dict(env2)
                d = depth
                for x, y in zip(ns1, ns2):
                    e1[x] = ("bound", d)
                    e2[y] = ("bound", d)
                    d += 1
                if not alpha_equal(b1, b2, e1, e2, d):
                    return False
            return True
    return False


# Conversion between the oracle's named terms and the engine's indices.
# These are the only functions here aware of both representations.

_TAG_TO_ENGINE = {}


def _engine():
    # Imported lazily so the oracle stays importable on its own.
    from ettik import syntax as s

    if not _TAG_TO_ENGINE:
        _TAG_TO_ENGINE.update({
            "pi": s.Pi, "lam": s.Lam, "app": s.App, "sigma": s.Sigma,
            "pair": s.Pair, "split": s.Split, "id": s.Id, "refl": s.Refl,
            "j": s.J, "ext": s.Ext, "uip": s.Uip, "unit": s.Unit,
            "star": s.Star, "unitrec": s.UnitRec,
        })
    return s


def from_debruijn(t, scope: list[str]):
    s = _engine()
    match t:
        case s.Var(i):
            return ("var", scope[len(scope) - 1 - i])
        case s.Const(name, args):
            return ("const", name, tuple(from_debruijn(a, scope) for a in args))
        case _:
            tag = next(k for k, v in _TAG_TO_ENGINE.items() if isinstance(t, v))
            spec = s._CHILDREN[type(t)]
            children = []
            for (attr, binders), arity in zip(spec, _BINDING_ARITY[tag]):
                assert binders == arity
                child = getattr(t, attr)
                if arity == 0:
                    children.append(from_debruijn(child, scope))
                else:
                    names = tuple(f"n{len(scope) + k}" for k in range(arity))
                    children.append((names, from_debruijn(child, scope + list(names))))
            return (tag, *children)


def to_debruijn(t, scope: list[str]):
    s = _engine()
    match t:
        case ("var", x):
            for back, name in enumerate(reversed(scope)):
                if name == x:
                    return s.Var(back)
            raise ValueError(f"unbound name {x}")
        case ("const", name, args):
            return s.Const(name, tuple(to_debruijn(a, scope) for a in args))
        case (tag, *children):
            cls = _TAG_TO_ENGINE[tag]
            fields = []
            for arity, child in zip(_BINDING_ARITY[tag], children):
                if arity == 0:
                    fields.append(to_debruijn(child, scope))
                else:
                    names, body = child
                    fields.append(to_debruijn(body, scope + list(names)))
            return cls(*fields)
    raise ValueError(f"bad named term {t!r}")


# ---------------------------------------------------------------------------
# Finite setoid models, set-theoretically.
#
# A setoid is (elements tuple, relation frozenset of ordered pairs
# including the diagonal, symmetric and transitive).  A model object is a
# tower of dependent setoid families over the point; the generator below
# tabulates a chosen fragment into .fcc text, and the partition oracle
# computes the expected quotient sizes.  Both work purely with these
# tuples; the engine never calls them.


def setoid(elements, pairs=()):
    rel = {(x, x) for x in elements}
    rel |= {(x, y) for x, y in pairs}
    rel |= {(y, x) for x, y in pairs}
    changed = True
    while changed:
        changed = False
        for (a, b) in list(rel):
            for (c, d) in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return (tuple(elements), frozenset(rel))


def setoid_classes(st) -> list[frozenset]:
    elements, rel = st
    seen: set = set()
    classes = []
    for x in elements:
        if x in seen:
            continue
        cls = frozenset(y for y in elements if (x, y) in rel)
        seen |= cls
        classes.append(cls)
    return classes
