"""Term syntax with nameless (de Bruijn) binding, the substitution
calculus, and the named surface format.

Terms are immutable; indices count binders inward, so ``Var(0)`` is the
innermost binder or the last telescope entry.  The surface format uses
names; binding positions that the formers leave implicit (motives and
branches of split/J/unitrec) are written with the scoping-only prefix
``bind x.``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ArityError(Exception):
    """A substitution or constant was applied at the wrong length."""


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column


@dataclass(frozen=True, slots=True)
class Term:
    pass


@dataclass(frozen=True, slots=True)
class Var(Term):
    index: int


@dataclass(frozen=True, slots=True)
class Pi(Term):
    domain: Term
    codomain: Term  # binds 1


@dataclass(frozen=True, slots=True)
class Lam(Term):
    body: Term  # binds 1


@dataclass(frozen=True, slots=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True, slots=True)
class Sigma(Term):
    first: Term
    second: Term  # binds 1


@dataclass(frozen=True, slots=True)
class Pair(Term):
    fst: Term
    snd: Term


@dataclass(frozen=True, slots=True)
class Split(Term):
    motive: Term  # binds 1 (the scrutinee)
    branch: Term  # binds 2 (the components)
    scrutinee: Term


@dataclass(frozen=True, slots=True)
class Id(Term):
    type: Term
    lhs: Term
    rhs: Term


@dataclass(frozen=True, slots=True)
class Refl(Term):
    term: Term


@dataclass(frozen=True, slots=True)
class J(Term):
    motive: Term  # binds 3 (endpoints and path)
    branch: Term  # binds 1 (the diagonal point)
    lhs: Term
    rhs: Term
    path: Term


@dataclass(frozen=True, slots=True)
class Ext(Term):
    fn: Term
    gn: Term
    pointwise: Term


@dataclass(frozen=True, slots=True)
class Uip(Term):
    p: Term
    q: Term


@dataclass(frozen=True, slots=True)
class Unit(Term):
    pass


@dataclass(frozen=True, slots=True)
class Star(Term):
    pass


@dataclass(frozen=True, slots=True)
class UnitRec(Term):
    motive: Term  # binds 1 (the scrutinee)
    branch: Term
    scrutinee: Term


@dataclass(frozen=True, slots=True)
class Const(Term):
    name: str
    args: tuple[Term, ...] = ()


# Child slots per constructor: (attribute, binders introduced for it).
_CHILDREN: dict[type, tuple[tuple[str, int], ...]] = {
    Var: (),
    Pi: (("domain", 0), ("codomain", 1)),
    Lam: (("body", 1),),
    App: (("fn", 0), ("arg", 0)),
    Sigma: (("first", 0), ("second", 1)),
    Pair: (("fst", 0), ("snd", 0)),
    Split: (("motive", 1), ("branch", 2), ("scrutinee", 0)),
    Id: (("type", 0), ("lhs", 0), ("rhs", 0)),
    Refl: (("term", 0),),
    J: (("motive", 3), ("branch", 1), ("lhs", 0), ("rhs", 0), ("path", 0)),
    Ext: (("fn", 0), ("gn", 0), ("pointwise", 0)),
    Uip: (("p", 0), ("q", 0)),
    Unit: (),
    Star: (),
    UnitRec: (("motive", 1), ("branch", 0), ("scrutinee", 0)),
}


def map_vars(t: Term, f, depth: int = 0) -> Term:
    """Rebuild ``t`` with every Var(i) replaced by f(i, depth); depth is
    the number of binders crossed.  Unchanged subtrees are shared."""
    match t:
        case Var(i):
            return f(i, depth)
        case Const(name, args):
            new_args = tuple(map_vars(a, f, depth) for a in args)
            if all(a is b for a, b in zip(args, new_args)):
                return t
            return Const(name, new_args)
        case _:
            spec = _CHILDREN[type(t)]
            if not spec:
                return t
            children = [
                map_vars(getattr(t, name), f, depth + extra)
                for name, extra in spec
            ]
            if all(c is getattr(t, name) for c, (name, _) in zip(children, spec)):
                return t
            return type(t)(*children)


def weaken(t: Term, amount: int, cutoff: int = 0) -> Term:
    """Shift free indices >= cutoff up by amount."""
    if amount == 0:
        return t
    return map_vars(
        t, lambda i, d: Var(i + amount) if i >= cutoff + d else Var(i)
    )


def term_size(t: Term) -> int:
    match t:
        case Var() | Unit() | Star():
            return 1
        case Const(_, args):
            return 1 + sum(term_size(a) for a in args)
        case _:
            return 1 + sum(
                term_size(getattr(t, name)) for name, _ in _CHILDREN[type(t)]
            )


@dataclass(frozen=True, slots=True)
class Telescope:
    """A context: entry k is a type over the k preceding entries."""

    entries: tuple[Term, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def extend(self, *types: Term) -> "Telescope":
        return Telescope(self.entries + types)

    def type_of_var(self, index: int) -> Term:
        """Type of Var(index) in this telescope, weakened into it."""
        n = len(self.entries)
        if not 0 <= index < n:
            raise ArityError(f"variable {index} out of range for telescope of length {n}")
        return weaken(self.entries[n - 1 - index], index + 1)

    def prefix(self, length: int) -> "Telescope":
        return Telescope(self.entries[:length])


@dataclass(frozen=True, slots=True)
class Substitution:
    """Simultaneous substitution; as a context map it points from the
    source telescope (length ``source_len``) to the target telescope
    (one term per target entry, outermost first)."""

    terms: tuple[Term, ...]
    source_len: int

    def __len__(self) -> int:
        return len(self.terms)


def identity_substitution(ctx: Telescope | int) -> Substitution:
    n = ctx if isinstance(ctx, int) else len(ctx)
    return Substitution(tuple(Var(n - 1 - k) for k in range(n)), n)


def substitute(t: Term, s: Substitution) -> Term:
    """Replace each free Var(i) of ``t`` (a term over the target of s)
    by the matching term of ``s``; the result is over the source."""
    n = len(s.terms)

    def rep(i: int, d: int) -> Term:
        if i < d:
            return Var(i)
        k = i - d
        if k >= n:
            raise ArityError(
                f"variable {k} escapes a substitution of length {n}"
            )
        return weaken(s.terms[n - 1 - k], d)

    return map_vars(t, rep)


def substitute_telescope(ext: Telescope, s: Substitution) -> Telescope:
    """Substitute through a telescope of extra entries over s's target."""
    out = []
    for k, entry in enumerate(ext.entries):
        lift = Substitution(
            tuple(weaken(u, k) for u in s.terms)
            + tuple(Var(k - 1 - j) for j in range(k)),
            s.source_len + k,
        )
        out.append(substitute(entry, lift))
    return Telescope(tuple(out))


def lift_substitution(s: Substitution, ext: Telescope) -> Substitution:
    """Extend s : D -> G to D.ext[s] -> G.ext by identity on ext."""
    k = len(ext)
    return Substitution(
        tuple(weaken(u, k) for u in s.terms)
        + tuple(Var(k - 1 - j) for j in range(k)),
        s.source_len + k,
    )


def compose(s1: Substitution, s2: Substitution) -> Substitution:
    """Composite context map: apply s1 first, then s2 (so the target of
    s2 must be the source of s1); substitute(t, compose(s1, s2)) equals
    substitute(substitute(t, s1), s2)."""
    if len(s2.terms) != s1.source_len:
        raise ArityError(
            f"cannot compose: source of first is {s1.source_len}, "
            f"target of second is {len(s2.terms)}"
        )
    return Substitution(
        tuple(substitute(u, s2) for u in s1.terms), s2.source_len
    )


@dataclass(frozen=True, slots=True)
class ConstDecl:
    name: str
    telescope: Telescope
    result: Term | None  # None means the constant forms a type


@dataclass(frozen=True, slots=True)
class Signature:
    constants: tuple[ConstDecl, ...] = ()

    def lookup(self, name: str) -> ConstDecl | None:
        for c in self.constants:
            if c.name == name:
                return c
        return None

    def extend(self, decl: ConstDecl) -> "Signature":
        return Signature(self.constants + (decl,))


# ---------------------------------------------------------------------------
# Surface format


KEYWORDS = frozenset(
    "Pi Sig lam app pair split Id refl J ext uip Unit star unitrec bind "
    "const type check reflect".split()
)

_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<punct>[().:\[\],|-])|(?P<ident>[A-Za-z_][A-Za-z0-9_']*))"
)


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("--", 1)[0] for line in text.splitlines())


def tokenize(text: str) -> list[tuple[str, str, int, int]]:
    tokens = []
    for ln, line in enumerate(_strip_comments(text).splitlines(), start=1):
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(line, pos)
            if not m or m.end() == pos:
                raise ParseError(f"stray character {line[pos]!r}", ln, pos + 1)
            if m.group("arrow"):
                tokens.append(("arrow", "->", ln, pos + 1))
            elif m.group("punct"):
                tokens.append(("punct", m.group("punct"), ln, pos + 1))
            else:
                word = m.group("ident")
                kind = "keyword" if word in KEYWORDS else "ident"
                tokens.append((kind, word, ln, pos + 1))
            pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, signature: Signature):
        self.tokens = tokens
        self.pos = 0
        self.signature = signature

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, value: str):
        tok = self.next()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1]!r}", tok[2], tok[3])
        return tok

    def at_atom_start(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        kind, value, _, _ = tok
        if kind == "ident":
            return True
        if kind == "punct" and value == "(":
            return True
        return kind == "keyword" and value in ("Unit", "star")

    def term(self, scope: list[str]) -> Term:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected a term")
        kind, value, ln, col = tok
        if kind == "keyword":
            match value:
                case "Pi" | "Sig":
                    self.next()
                    name = self.ident()
                    self.expect(":")
                    dom = self.term(scope)
                    self.expect(".")
                    cod = self.term(scope + [name])
                    return Pi(dom, cod) if value == "Pi" else Sigma(dom, cod)
                case "lam":
                    self.next()
                    name = self.ident()
                    self.expect(".")
                    return Lam(self.term(scope + [name]))
                case "bind":
                    raise ParseError(
                        "bind is only allowed in motive/branch positions", ln, col
                    )
                case "app":
                    self.next()
                    return App(self.atom(scope), self.atom(scope))
                case "pair":
                    self.next()
                    return Pair(self.atom(scope), self.atom(scope))
                case "split":
                    self.next()
                    motive = self.binding_atom(scope, 1)
                    branch = self.binding_atom(scope, 2)
                    return Split(motive, branch, self.atom(scope))
                case "Id":
                    self.next()
                    return Id(self.atom(scope), self.atom(scope), self.atom(scope))
                case "refl":
                    self.next()
                    return Refl(self.atom(scope))
                case "J":
                    self.next()
                    motive = self.binding_atom(scope, 3)
                    branch = self.binding_atom(scope, 1)
                    return J(
                        motive, branch,
                        self.atom(scope), self.atom(scope), self.atom(scope),
                    )
                case "ext":
                    self.next()
                    return Ext(self.atom(scope), self.atom(scope), self.atom(scope))
                case "uip":
                    self.next()
                    return Uip(self.atom(scope), self.atom(scope))
                case "Unit":
                    self.next()
                    return Unit()
                case "star":
                    self.next()
                    return Star()
                case "unitrec":
                    self.next()
                    motive = self.binding_atom(scope, 1)
                    return UnitRec(motive, self.atom(scope), self.atom(scope))
                case _:
                    raise ParseError(f"unexpected keyword {value!r}", ln, col)
        if kind == "ident":
            self.next()
            if self._scope_index(scope, value) is not None:
                return self._var(scope, value)
            args = []
            while self.at_atom_start():
                args.append(self.atom(scope))
            decl = self.signature.lookup(value)
            if decl is not None and len(args) != len(decl.telescope):
                raise ParseError(
                    f"constant {value} expects {len(decl.telescope)} arguments, got {len(args)}",
                    ln, col,
                )
            if decl is None and args:
                raise ParseError(f"unknown constant {value!r} applied to arguments", ln, col)
            return Const(value, tuple(args))
        if kind == "punct" and value == "(":
            self.next()
            inner = self.term(scope)
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {value!r}", ln, col)

    @staticmethod
    def _scope_index(scope: list[str], name: str) -> int | None:
        for back, bound in enumerate(reversed(scope)):
            if bound == name:
                return back
        return None

    def _var(self, scope: list[str], name: str) -> Term:
        index = self._scope_index(scope, name)
        assert index is not None
        if self.at_atom_start():
            tok = self.peek()
            raise ParseError(
                f"variable {name!r} cannot take arguments (use app)", tok[2], tok[3]
            )
        return Var(index)

    def atom(self, scope: list[str]) -> Term:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected an atom")
        kind, value, ln, col = tok
        if kind == "ident":
            self.next()
            if self._scope_index(scope, value) is not None:
                return Var(self._scope_index(scope, value))
            decl = self.signature.lookup(value)
            if decl is not None and len(decl.telescope) != 0:
                raise ParseError(
                    f"constant {value} takes arguments; parenthesize the application",
                    ln, col,
                )
            return Const(value)
        if kind == "keyword" and value == "Unit":
            self.next()
            return Unit()
        if kind == "keyword" and value == "star":
            self.next()
            return Star()
        if kind == "punct" and value == "(":
            self.next()
            inner = self.term(scope)
            self.expect(")")
            return inner
        raise ParseError(f"expected an atom, found {value!r}", ln, col)

    def binding_atom(self, scope: list[str], binders: int) -> Term:
        """An atom for a motive/branch slot: either plain (no variable
        use of the bound slots) or a parenthesized chain of binds."""
        tok = self.peek()
        if tok and tok[0] == "punct" and tok[1] == "(":
            save = self.pos
            self.next()
            inner_tok = self.peek()
            if inner_tok and inner_tok[0] == "keyword" and inner_tok[1] == "bind":
                names = []
                while self.peek() and self.peek()[1] == "bind":
                    self.next()
                    names.append(self.ident())
                    self.expect(".")
                if len(names) != binders:
                    raise ParseError(
                        f"this position binds {binders} variables, got {len(names)}",
                        tok[2], tok[3],
                    )
                body = self.term(scope + names)
                self.expect(")")
                return body
            self.pos = save
        # No binders written: parse an atom and weaken over the unused slots.
        return weaken(self.atom(scope), binders)

    def ident(self) -> str:
        tok = self.next()
        if tok[0] != "ident":
            raise ParseError(f"expected a name, found {tok[1]!r}", tok[2], tok[3])
        return tok[1]

    def telescope(self, scope: list[str]) -> tuple[Telescope, list[str]]:
        entries: list[Term] = []
        names = list(scope)
        while self.peek() and self.peek()[1] == "(":
            save = self.pos
            self.next()
            tok = self.peek()
            if tok is None or tok[0] != "ident":
                self.pos = save
                break
            name = self.next()[1]
            if self.peek() is None or self.peek()[1] != ":":
                self.pos = save
                break
            self.next()
            entries.append(self.term(names))
            self.expect(")")
            names.append(name)
        return Telescope(tuple(entries)), names

    def substitution(self, scope: list[str]) -> Substitution:
        self.expect("[")
        terms: list[Term] = []
        if self.peek() and self.peek()[1] != "]":
            terms.append(self.term(scope))
            while self.peek() and self.peek()[1] == ",":
                self.next()
                terms.append(self.term(scope))
        self.expect("]")
        return Substitution(tuple(terms), len(scope))


def _finish(parser: _Parser, result):
    tok = parser.peek()
    if tok is not None:
        raise ParseError(f"trailing input starting at {tok[1]!r}", tok[2], tok[3])
    return result


def parse_term(text: str, scope: list[str] | None = None,
               signature: Signature | None = None) -> Term:
    parser = _Parser(tokenize(text), signature or Signature())
    return _finish(parser, parser.term(list(scope or [])))


def parse_telescope(text: str, signature: Signature | None = None,
                    scope: list[str] | None = None) -> tuple[Telescope, list[str]]:
    parser = _Parser(tokenize(text), signature or Signature())
    tele, names = parser.telescope(list(scope or []))
    return _finish(parser, (tele, names))


def parse_substitution(text: str, scope: list[str],
                       signature: Signature | None = None) -> Substitution:
    parser = _Parser(tokenize(text), signature or Signature())
    return _finish(parser, parser.substitution(list(scope)))


def parse_signature(text: str) -> Signature:
    """Parse a block of `const NAME : ...` declarations."""
    sig = Signature()
    for ln, line in enumerate(_strip_comments(text).splitlines(), start=1):
        if not line.strip():
            continue
        tokens = tokenize(line)
        if not tokens or tokens[0][1] != "const":
            raise ParseError("expected a const declaration", ln, 1)
        parser = _Parser(tokens[1:], sig)
        name = parser.ident()
        parser.expect(":")
        tele, names = parser.telescope([])
        if parser.peek() and parser.peek()[1] == "->":
            parser.next()
        elif len(tele):
            raise ParseError("telescoped constant needs '-> sort'", ln, 1)
        tok = parser.peek()
        if tok and tok[0] == "keyword" and tok[1] == "type":
            parser.next()
            result = None
        else:
            result = parser.term(names)
        _finish(parser, None)
        if sig.lookup(name) is not None:
            raise ParseError(f"duplicate constant {name}", ln, 1)
        sig = sig.extend(ConstDecl(name, tele, result))
    return sig


# ---------------------------------------------------------------------------
# Printer (inverse of the parser: parse(print(t)) == t)


def _name(depth: int) -> str:
    return f"x{depth}"


def _print(t: Term, scope: list[str], atom: bool) -> str:
    def wrap(s: str) -> str:
        return f"({s})" if atom else s

    match t:
        case Var(i):
            if i >= len(scope):
                raise ArityError(f"unbound variable {i} while printing")
            return scope[len(scope) - 1 - i]
        case Unit():
            return "Unit"
        case Star():
            return "star"
        case Const(name, args):
            if not args:
                return name
            inner = " ".join(_print(a, scope, True) for a in args)
            return wrap(f"{name} {inner}")
        case Pi(dom, cod) | Sigma(dom, cod):
            head = "Pi" if isinstance(t, Pi) else "Sig"
            x = _name(len(scope))
            return wrap(
                f"{head} {x}:{_print(dom, scope, True)}. {_print(cod, scope + [x], False)}"
            )
        case Lam(body):
            x = _name(len(scope))
            return wrap(f"lam {x}. {_print(body, scope + [x], False)}")
        case App(f, a):
            return wrap(f"app {_print(f, scope, True)} {_print(a, scope, True)}")
        case Pair(a, b):
            return wrap(f"pair {_print(a, scope, True)} {_print(b, scope, True)}")
        case Split(motive, branch, scrut):
            return wrap(
                "split "
                f"{_print_binding(motive, scope, 1)} "
                f"{_print_binding(branch, scope, 2)} "
                f"{_print(scrut, scope, True)}"
            )
        case Id(ty, a, b):
            return wrap(
                f"Id {_print(ty, scope, True)} {_print(a, scope, True)} {_print(b, scope, True)}"
            )
        case Refl(a):
            return wrap(f"refl {_print(a, scope, True)}")
        case J(motive, branch, a, b, p):
            return wrap(
                "J "
                f"{_print_binding(motive, scope, 3)} "
                f"{_print_binding(branch, scope, 1)} "
                f"{_print(a, scope, True)} {_print(b, scope, True)} {_print(p, scope, True)}"
            )
        case Ext(f, g, h):
            return wrap(
                f"ext {_print(f, scope, True)} {_print(g, scope, True)} {_print(h, scope, True)}"
            )
        case Uip(p, q):
            return wrap(f"uip {_print(p, scope, True)} {_print(q, scope, True)}")
        case UnitRec(motive, branch, scrut):
            return wrap(
                "unitrec "
                f"{_print_binding(motive, scope, 1)} "
                f"{_print(branch, scope, True)} "
                f"{_print(scrut, scope, True)}"
            )
        case _:
            raise ArityError(f"cannot print {t!r}")


def _print_binding(t: Term, scope: list[str], binders: int) -> str:
    names = [_name(len(scope) + k) for k in range(binders)]
    binds = "".join(f"bind {x}. " for x in names)
    return f"({binds}{_print(t, scope + names, False)})"


def print_term(t: Term, scope: list[str] | None = None) -> str:
    return _print(t, list(scope or []), False)


def print_telescope(tele: Telescope, scope: list[str] | None = None) -> str:
    scope = list(scope or [])
    parts = []
    for entry in tele.entries:
        x = _name(len(scope))
        parts.append(f"({x}:{_print(entry, scope, False)})")
        scope.append(x)
    return "".join(parts)


def print_substitution(s: Substitution, scope: list[str]) -> str:
    return "[" + ", ".join(_print(t, list(scope), False) for t in s.terms) + "]"
