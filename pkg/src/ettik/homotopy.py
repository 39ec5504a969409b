"""Identity telescopes, transport, and the homotopy algebra.

The identity telescope over ``base`` with extension Θ (length k) is the
telescope base.Θ.Θ'.Q: a second copy of Θ followed by one identity type
per entry, each comparing the transported original variable with its
copy.  The transporter for entry i eliminates the identity telescope of
the length-i prefix, so the whole structure arises from one recursion;
every transporter computes to an identity function on the diagonal,
which is what makes the reflexivity section and the eliminator's
computation rule check.

The eliminator is derived from J alone.  The first entry's copy and
path are eliminated by a J whose motive re-addresses those two onto the
generic endpoints and Pi-binds the retyped remainder of the copy and
path blocks; the branch diagonalizes the first column and recurses on
the telescope shortened by one.  No eta and no universes are involved.

A homotopy between substitutions f, g : Γ → Δ is a substitution into
the identity telescope of the full codomain whose first two blocks are
exactly f and g.  Composition, inversion, whiskering, and the
section-rectification transport are generic terms built once over the
identity telescope and then instantiated; because every builder is a
substitution instance of a generic term, all of them commute with
substitution syntactically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kernel import (
    EMPTY_EQS, EquationalContext, TypeCheckError, check_is_type,
    check_substitution, check_type, infer_type, instantiate, normalize,
    validate_telescope,
)
from .syntax import (
    App, Id, J, Lam, Pi, Refl, Signature, Substitution, Telescope, Term, Uip,
    Var, compose, identity_substitution, map_vars, print_term, substitute,
    weaken,
)


class HomotopyError(Exception):
    pass


# ---------------------------------------------------------------------------
# Small term builders


def remap(t: Term, image) -> Term:
    """Replace every free Var(v) of ``t`` by image(v), a Term."""

    def rep(i: int, d: int) -> Term:
        if i < d:
            return Var(i)
        return weaken(image(i - d), d)

    return map_vars(t, rep)


def _pi_fold(entries: list[Term], body: Term) -> Term:
    for entry in reversed(entries):
        body = Pi(entry, body)
    return body


def _lam_fold(count: int, body: Term) -> Term:
    for _ in range(count):
        body = Lam(body)
    return body


def _app_fold(fn: Term, args: list[Term]) -> Term:
    for arg in args:
        fn = App(fn, arg)
    return fn


# ---------------------------------------------------------------------------
# Identity telescopes


@dataclass(frozen=True)
class IdTelescope:
    """base.Θ.Θ'.Q with its reflexivity section and derived eliminator."""

    base: Telescope
    extension: Telescope
    result: Telescope
    refl_map: Substitution

    def elim_builder(self, motive: Term, branch: Term) -> Term:
        """Dependent eliminator: ``motive`` is a type over ``result``
        and ``branch`` a term over base.extension of type
        motive[refl_map]; the returned term inhabits ``motive`` and
        normalizes to ``branch`` when substituted along refl_map."""
        return _elim(self.base, self.extension, motive, branch)

    def transporter(self, family: Term) -> Term:
        """For ``family`` a type over base.extension: a function term
        over ``result`` from the family at the original block to the
        family at the copied block; the shared transport instance all
        builders use.  Normalizes to an identity function on refl_map."""
        k = len(self.extension)
        fam_orig = weaken(family, 2 * k)
        fam_copy = weaken(weaken(family, k, k), k)
        return self.elim_builder(Pi(fam_orig, weaken(fam_copy, 1)), Lam(Var(0)))


def _copy_entries(ext: Telescope) -> list[Term]:
    """The second block: entry i keeps its prefix references (the copied
    prefix sits at the same relative depths) and skips the original
    block for everything further out."""
    k = len(ext)
    return [weaken(entry, k, i) for i, entry in enumerate(ext.entries)]


def _relocate_prefix(t: Term, i: int, k: int) -> Term:
    """Move a term over base.prefix.prefix'.Q_prefix (prefix length i)
    into the context base.ext.ext'.Q_0..Q_{i-1} of the full telescope
    (length k) by letting the path and copy blocks skip the larger
    blocks' suffixes; originals and base shift together."""
    s = k - i
    if s == 0:
        return t

    def img(v: int) -> Term:
        if v < i:
            return Var(v)
        if v < 2 * i:
            return Var(v + s)
        return Var(v + 2 * s)

    return remap(t, img)


def _path_entries(base: Telescope, ext: Telescope) -> list[Term]:
    """The Q block: entry i relates the transported original variable
    to its copy.  Entry 0 needs no transport and is the ordinary
    identity type."""
    k = len(ext)
    copies = _copy_entries(ext)
    out: list[Term] = []
    for i, entry in enumerate(ext.entries):
        carrier = weaken(copies[i], k)
        orig, copy = Var(2 * k - 1), Var(k - 1)
        if i == 0:
            lhs: Term = orig
        else:
            prefix = Telescope(ext.entries[:i])
            tr = identity_telescope(base, prefix).transporter(entry)
            lhs = App(_relocate_prefix(tr, i, k), orig)
        out.append(Id(carrier, lhs, copy))
    return out


def identity_telescope(ctx: Telescope, ext: Telescope,
                       sig: Signature | None = None,
                       eqs: EquationalContext = EMPTY_EQS) -> IdTelescope:
    """The identity telescope ctx.ext.ext.Id_ext; pass ``sig`` to have
    the extension validated first."""
    if sig is not None:
        validate_telescope(sig, eqs, ext, ctx)
    n, k = len(ctx), len(ext)
    result = Telescope(
        ctx.entries + ext.entries
        + tuple(_copy_entries(ext)) + tuple(_path_entries(ctx, ext))
    )
    refl_map = Substitution(
        tuple(Var(n + k - 1 - j) for j in range(n + k))
        + tuple(Var(k - 1 - j) for j in range(k))
        + tuple(Refl(Var(k - 1 - j)) for j in range(k)),
        n + k,
    )
    return IdTelescope(ctx, ext, result, refl_map)


def _elim(base: Telescope, ext: Telescope, motive: Term, branch: Term) -> Term:
    """See IdTelescope.elim_builder.

    Variable layout over the result telescope R (innermost first):
    paths Q_j at k-1-j, copies y_j at 2k-1-j, originals x_j at 3k-1-j,
    base above.  The J eliminates (x_0, y_0, Q_0); its motive re-binds
    the whole dependent tail — the original suffix x_1.., the copy
    suffix y_1.., and the path suffix Q_1.. — as Pi's whose types track
    the generic endpoints (the suffix types mention x_0, y_0, Q_0, so
    nothing short of rebinding all three blocks stays well-formed), and
    the eliminator is the J applied back to the ambient suffixes.
    """
    n, k = len(base), len(ext)
    if k == 0:
        return branch

    copies = _copy_entries(ext)
    paths = _path_entries(base, ext)

    # Pi-bound suffix inside the J motive; binder b lives over
    # R.x.y.e.<b earlier binders>, with e at b, y at b+1, x at b+2.
    binders: list[Term] = []
    for b in range(3 * (k - 1)):
        if b < k - 1:
            i = b + 1
            entry = ext.entries[i]  # over base.x_0..x_{i-1}

            def img(v: int, *, b: int = b, i: int = i) -> Term:
                if v < i - 1:        # original prefix -> earlier binders
                    return Var(v)
                if v == i - 1:       # x_0 -> the generic endpoint x
                    return Var(b + 2)
                return Var(v + 3 * k + 2)  # base, ambient
        elif b < 2 * (k - 1):
            i = b - k + 2
            entry = copies[i]  # over base.ext.y_0..y_{i-1}

            def img(v: int, *, b: int = b, i: int = i) -> Term:
                if v < i - 1:        # copy prefix -> earlier copy binders
                    return Var(v)
                if v == i - 1:       # y_0 -> the generic endpoint y
                    return Var(b + 1)
                return Var(v + 3 * k + 1)  # base, ambient
        else:
            j = b - 2 * k + 3
            entry = paths[j]  # over base.ext.copies.Q_0..Q_{j-1}

            def img(v: int, *, b: int = b, j: int = j) -> Term:
                if v < j - 1:            # earlier path binders
                    return Var(v)
                if v == j - 1:           # Q_0 -> the generic path e
                    return Var(b)
                if v < j + k - 1:        # copy suffix -> copy binders
                    return Var(v - 1)
                if v == j + k - 1:       # y_0 -> y
                    return Var(b + 1)
                if v < j + 2 * k - 1:    # original suffix -> its binders
                    return Var(v - 2)
                if v == j + 2 * k - 1:   # x_0 -> x
                    return Var(b + 2)
                return Var(v + 3 * k)    # base, ambient

        binders.append(remap(entry, img))

    def body_img(v: int) -> Term:
        if v < k - 1:                # path suffix -> its binders
            return Var(v)
        if v == k - 1:               # Q_0 -> e
            return Var(3 * k - 3)
        if v < 2 * k - 1:            # copy suffix -> its binders
            return Var(v - 1)
        if v == 2 * k - 1:           # y_0 -> y
            return Var(3 * k - 2)
        if v < 3 * k - 1:            # original suffix -> its binders
            return Var(v - 2)
        if v == 3 * k - 1:           # x_0 -> x
            return Var(3 * k - 1)
        return Var(v + 3 * k)        # base, ambient

    j_motive = _pi_fold(binders, remap(motive, body_img))

    # Recursive eliminator over base.(first entry) with the telescope
    # shortened by one; its motive is the original one pulled back along
    # the diagonal substitution that collapses the first column.  The
    # shortened identity telescope coincides entry by entry with the
    # J branch context, so the recursive term drops in unchanged apart
    # from base references skipping the ambient blocks.
    w = Var(3 * k - 3)
    diagonal = Substitution(
        tuple(Var(3 * k - 2 + (n - 1 - g)) for g in range(n))
        + (w,) + tuple(Var(3 * k - 3 - j) for j in range(1, k))
        + (w,) + tuple(Var(2 * k - 2 - j) for j in range(1, k))
        + (Refl(w),) + tuple(Var(k - 1 - j) for j in range(1, k)),
        n + 1 + 3 * (k - 1),
    )
    rec = _elim(base.extend(ext.entries[0]), Telescope(ext.entries[1:]),
                substitute(motive, diagonal), branch)

    def into_branch(v: int) -> Term:
        if v < 3 * k - 2:            # binders and the collapsed column
            return Var(v)
        return Var(v + 3 * k)        # base, ambient

    j_branch = _lam_fold(3 * (k - 1), remap(rec, into_branch))
    head = J(j_motive, j_branch, Var(3 * k - 1), Var(2 * k - 1), Var(k - 1))
    args = ([Var(3 * k - 1 - j) for j in range(1, k)]
            + [Var(2 * k - 1 - j) for j in range(1, k)]
            + [Var(k - 1 - j) for j in range(1, k)])
    return _app_fold(head, args)


# ---------------------------------------------------------------------------
# Transport


def _expect_path(sig: Signature, eqs: EquationalContext, ctx: Telescope,
                 path: Term) -> Id:
    ty = normalize(sig, eqs, ctx, infer_type(sig, eqs, ctx, path))
    if not isinstance(ty, Id):
        raise TypeCheckError(
            f"expected a path of identity type, found one of {print_term(ty)}"
        )
    return ty


def _singleton_instance(ctx: Telescope, ty: Id) -> Substitution:
    """ctx → ctx.A.A.Id_A picking out the path's endpoints."""
    return Substitution(
        identity_substitution(ctx).terms + (ty.lhs, ty.rhs),
        len(ctx),
    )


def transport(sig: Signature, eqs: EquationalContext, ctx: Telescope,
              family: Term, path: Term, point: Term) -> Term:
    """Carry ``point : family[lhs]`` along ``path : Id A lhs rhs``; the
    single shared J instance, specialized from the identity-telescope
    transporter at extension length one."""
    ty = _expect_path(sig, eqs, ctx, path)
    check_is_type(sig, eqs, ctx.extend(ty.type), family)
    check_type(sig, eqs, ctx, point, instantiate(family, ty.lhs))
    idt = identity_telescope(ctx, Telescope((ty.type,)))
    inst = Substitution(
        identity_substitution(ctx).terms + (ty.lhs, ty.rhs, path), len(ctx)
    )
    return App(substitute(idt.transporter(family), inst), point)


def _roundtrip_certificate(base: Telescope, ext: Telescope,
                           family: Term) -> Term:
    """Over the identity telescope: a function sending v to a path
    witnessing that transporting v forward and then back along the
    inverted paths returns v."""
    n, k = len(base), len(ext)
    idt = identity_telescope(base, ext)
    forward = idt.transporter(family)
    swap = Substitution(
        tuple(Var(3 * k + n - 1 - g) for g in range(n))
        + tuple(Var(2 * k - 1 - i) for i in range(k))
        + tuple(Var(3 * k - 1 - i) for i in range(k))
        + tuple(_generic_inversions(base, ext)),
        3 * k + n,
    )
    backward = substitute(forward, swap)
    fam_orig = weaken(family, 2 * k)
    statement = Id(
        weaken(fam_orig, 1),
        App(weaken(backward, 1), App(weaken(forward, 1), Var(0))),
        Var(0),
    )
    return idt.elim_builder(Pi(fam_orig, statement), Lam(Refl(Var(0))))


def transport_roundtrip_certificate(
        sig: Signature, eqs: EquationalContext, ctx: Telescope,
        family: Term, path: Term, point: Term) -> Term:
    """A checked path from transport-back-and-forth of ``point`` to
    ``point`` itself."""
    ty = _expect_path(sig, eqs, ctx, path)
    cert = _roundtrip_certificate(ctx, Telescope((ty.type,)), family)
    inst = Substitution(
        identity_substitution(ctx).terms + (ty.lhs, ty.rhs, path), len(ctx)
    )
    return App(substitute(cert, inst), point)


def constant_transport_certificate(
        sig: Signature, eqs: EquationalContext, ctx: Telescope,
        family: Term, path: Term, point: Term) -> Term:
    """For ``family`` a type over ctx alone: a checked path from
    transporting ``point`` along ``path`` back to ``point``."""
    ty = _expect_path(sig, eqs, ctx, path)
    idt = identity_telescope(ctx, Telescope((ty.type,)))
    forward = idt.transporter(weaken(family, 1))
    fam = weaken(family, 3)
    statement = Id(weaken(fam, 1), App(weaken(forward, 1), Var(0)), Var(0))
    cert = idt.elim_builder(Pi(fam, statement), Lam(Refl(Var(0))))
    inst = Substitution(
        identity_substitution(ctx).terms + (ty.lhs, ty.rhs, path), len(ctx)
    )
    return App(substitute(cert, inst), point)


# ---------------------------------------------------------------------------
# Homotopies


@dataclass(frozen=True)
class Homotopy:
    """A substitution into the identity telescope of the full codomain
    whose first two blocks are the source and target maps."""

    source: Substitution
    target: Substitution
    witness: Substitution
    base: Telescope
    codomain: Telescope

    def paths(self) -> tuple[Term, ...]:
        return self.witness.terms[2 * len(self.codomain):]


def check_homotopy(sig: Signature, eqs: EquationalContext,
                   h: Homotopy) -> IdTelescope:
    """Factorization invariant plus a full kernel check of the witness."""
    k = len(h.codomain)
    if len(h.source.terms) != k or len(h.target.terms) != k:
        raise HomotopyError("endpoint substitutions do not match the codomain")
    if len(h.witness.terms) != 3 * k:
        raise HomotopyError("witness does not target the identity telescope")
    if (h.witness.terms[:k] != h.source.terms
            or h.witness.terms[k:2 * k] != h.target.terms):
        raise HomotopyError(
            "witness does not factor through the pairing of its endpoints"
        )
    idt = identity_telescope(Telescope(), h.codomain)
    check_substitution(sig, eqs, h.base, idt.result, h.witness)
    return idt


def refl_homotopy(f: Substitution, base: Telescope,
                  codomain: Telescope) -> Homotopy:
    if len(f.terms) != len(codomain) or f.source_len != len(base):
        raise HomotopyError("substitution does not fit the stated telescopes")
    witness = Substitution(
        f.terms + f.terms + tuple(Refl(t) for t in f.terms), f.source_len
    )
    return Homotopy(f, f, witness, base, codomain)


def _generic_inversions(base: Telescope, ext: Telescope) -> list[Term]:
    """Terms over the identity telescope inverting each path entry: the
    j-th has the j-th entry's type with the two rows exchanged and the
    earlier paths replaced by their own inversions."""
    k = len(ext)
    idt = identity_telescope(base, ext)
    paths = _path_entries(base, ext)
    out: list[Term] = []
    for j in range(k):

        def img(v: int, *, j: int = j) -> Term:
            if v < j:                       # earlier paths, inverted
                return out[j - 1 - v]
            if v < j + k:                   # copy row -> original row
                return Var(2 * k - j + v)
            if v < j + 2 * k:               # original row -> copy row
                return Var(v - j)
            return Var(v + k - j)           # base

        out.append(idt.elim_builder(remap(paths[j], img),
                                    Refl(Var(k - 1 - j))))
    return out


def invert_homotopy(h: Homotopy) -> Homotopy:
    k = len(h.codomain)
    generic = _generic_inversions(Telescope(), h.codomain)
    flipped = tuple(substitute(t, h.witness) for t in generic)
    witness = Substitution(
        h.witness.terms[k:2 * k] + h.witness.terms[:k] + flipped,
        h.witness.source_len,
    )
    return Homotopy(h.target, h.source, witness, h.base, h.codomain)


def _generic_compositions(ext: Telescope) -> list[Term]:
    """Terms over the double telescope ext.ext.Q.ext.Q2 (two chained
    path blocks) concatenating each pair of paths, built by eliminating
    the first block with the second Pi-abstracted."""
    k = len(ext)
    idt = identity_telescope(Telescope(), ext)
    paths = _path_entries(Telescope(), ext)
    second_block = [weaken(paths[j], k, j + k) for j in range(k)]
    binders = list(ext.entries) + second_block
    out: list[Term] = []
    for j in range(k):

        def img(v: int, *, j: int = j) -> Term:
            if v < j:                       # earlier paths, concatenated
                return out[j - 1 - v]
            if v < j + k:                   # copy row -> third row
                return Var(k - j + v)
            return Var(3 * k - j + v)       # original row -> first row

        motive = _pi_fold(binders, remap(paths[j], img))
        branch = _lam_fold(2 * k, Var(k - 1 - j))
        generic = weaken(idt.elim_builder(motive, branch), 2 * k)
        args = ([Var(2 * k - 1 - m) for m in range(k)]
                + [Var(k - 1 - m) for m in range(k)])
        out.append(_app_fold(generic, args))
    return out


def compose_homotopies(h1: Homotopy, h2: Homotopy) -> Homotopy:
    if h1.codomain != h2.codomain or h1.base != h2.base:
        raise HomotopyError("homotopies live over different telescopes")
    k = len(h1.codomain)
    if h1.target.terms != h2.source.terms:
        raise HomotopyError("endpoints do not match: h1.target /= h2.source")
    generic = _generic_compositions(h1.codomain)
    chained = Substitution(
        h1.witness.terms + h2.witness.terms[k:], h1.witness.source_len
    )
    joined = tuple(substitute(t, chained) for t in generic)
    witness = Substitution(
        h1.witness.terms[:k] + h2.witness.terms[k:2 * k] + joined,
        h1.witness.source_len,
    )
    return Homotopy(h1.source, h2.target, witness, h1.base, h1.codomain)


def parallel_certificates(h1: Homotopy, h2: Homotopy) -> tuple[Term, ...]:
    """For homotopies with equal endpoints: one uip path per component
    identifying the two witnesses propositionally."""
    if h1.source.terms != h2.source.terms or h1.target.terms != h2.target.terms:
        raise HomotopyError("certificates need literally equal endpoints")
    return tuple(Uip(a, b) for a, b in zip(h1.paths(), h2.paths()))


def whisker_post(t: Substitution, t_codomain: Telescope,
                 h: Homotopy) -> Homotopy:
    """Post-compose both legs with t : codomain → t_codomain."""
    k, m = len(h.codomain), len(t_codomain)
    if t.source_len != k or len(t.terms) != m:
        raise HomotopyError("substitution does not fit between the telescopes")
    idt = identity_telescope(Telescope(), h.codomain)
    on_orig = Substitution(tuple(Var(3 * k - 1 - i) for i in range(k)), 3 * k)
    on_copy = Substitution(tuple(Var(2 * k - 1 - i) for i in range(k)), 3 * k)
    t_orig = [substitute(u, on_orig) for u in t.terms]
    t_copy = [substitute(u, on_copy) for u in t.terms]
    target_paths = _path_entries(Telescope(), t_codomain)
    out: list[Term] = []
    for j in range(m):

        def img(v: int, *, j: int = j) -> Term:
            if v < j:
                return out[j - 1 - v]
            if v < j + m:
                return t_copy[j + m - 1 - v]
            return t_orig[j + 2 * m - 1 - v]

        out.append(idt.elim_builder(remap(target_paths[j], img),
                                    Refl(t.terms[j])))
    mapped = tuple(substitute(u, h.witness) for u in out)
    src, tgt = compose(t, h.source), compose(t, h.target)
    witness = Substitution(src.terms + tgt.terms + mapped,
                           h.witness.source_len)
    return Homotopy(src, tgt, witness, h.base, t_codomain)


def whisker_pre(h: Homotopy, s: Substitution, base: Telescope) -> Homotopy:
    """Pre-compose both legs with s : base → h.base."""
    if s.source_len != len(base) or len(s.terms) != len(h.base):
        raise HomotopyError("substitution does not fit before the homotopy")
    return Homotopy(
        compose(h.source, s), compose(h.target, s), compose(h.witness, s),
        base, h.codomain,
    )


def rectify_section(f: Substitution, g: Substitution, h: Homotopy,
                    fiber: Term) -> tuple[Substitution, Homotopy]:
    """Given f : Γ → Δ.fiber, g : Γ → Δ and h : π∘f ≃ g over the
    projection π: a section that strictly lies over g (its first block
    IS g) together with a homotopy back to f.  When h is reflexivity
    the section is returned unchanged."""
    k = len(h.codomain)
    if len(f.terms) != k + 1:
        raise HomotopyError(
            "section must target the codomain extended by one fiber entry"
        )
    if f.terms[:k] != h.source.terms:
        raise HomotopyError("homotopy is not over the projection of f")
    if g.terms != h.target.terms:
        raise HomotopyError("homotopy target differs from the base map")
    full_codomain = h.codomain.extend(fiber)
    if h.witness.terms == refl_homotopy(h.source, h.base, h.codomain).witness.terms:
        return f, refl_homotopy(f, h.base, full_codomain)

    idt = identity_telescope(Telescope(), h.codomain)
    point = f.terms[k]
    corrected = App(substitute(idt.transporter(fiber), h.witness), point)
    strict = Substitution(g.terms + (corrected,), f.source_len)

    inverted = invert_homotopy(h)
    cert = _roundtrip_certificate(Telescope(), h.codomain, fiber)
    closing = App(substitute(cert, h.witness), point)
    witness = Substitution(
        strict.terms + f.terms + inverted.paths() + (closing,),
        f.source_len,
    )
    return strict, Homotopy(strict, f, witness, h.base, full_codomain)
