"""Identity-telescope, transport, and homotopy-algebra tests."""

import pytest

from ettik.homotopy import (
    Homotopy, HomotopyError, check_homotopy, compose_homotopies,
    constant_transport_certificate, identity_telescope, invert_homotopy,
    parallel_certificates, rectify_section, refl_homotopy, transport,
    transport_roundtrip_certificate, whisker_post, whisker_pre,
)
from ettik.kernel import (
    EMPTY_EQS, TypeCheckError, check_substitution, check_type, infer_type,
    normalize, validate_telescope,
)
from ettik.syntax import (
    App, Const, ConstDecl, Id, Lam, Pi, Refl, Signature, Substitution,
    Telescope, Uip, Var, compose, identity_substitution, substitute, weaken,
)

# Base type, a family, a doubly indexed family, two points, a path
# between them, a point of the family over t1, and a section of the
# family for building dependent test data.
B = Const("B")
FIX = Signature((
    ConstDecl("B", Telescope(), None),
    ConstDecl("C", Telescope((B,)), None),
    ConstDecl("D", Telescope((B, Const("C", (Var(0),)))), None),
    ConstDecl("t1", Telescope(), B),
    ConstDecl("t2", Telescope(), B),
    ConstDecl("p", Telescope(), Id(B, Const("t1"), Const("t2"))),
    ConstDecl("loop", Telescope(), Id(B, Const("t1"), Const("t1"))),
    ConstDecl("c1", Telescope(), Const("C", (Const("t1"),))),
    ConstDecl("c0", Telescope((B,)), Const("C", (Var(0),))),
))
T1, T2, P, C1 = Const("t1"), Const("t2"), Const("p"), Const("c1")
EMPTY = Telescope()


def C(t):
    return Const("C", (t,))


def D(t, u):
    return Const("D", (t, u))


def c0(t):
    return Const("c0", (t,))


def nf(t, ctx=EMPTY):
    return normalize(FIX, EMPTY_EQS, ctx, t)


def checked_idt(base, ext):
    """Build the identity telescope and kernel-check all of its parts."""
    idt = identity_telescope(base, ext, sig=FIX)
    validate_telescope(FIX, EMPTY_EQS, idt.result)
    source = Telescope(base.entries + ext.entries)
    check_substitution(FIX, EMPTY_EQS, source, idt.result, idt.refl_map)
    return idt


# ---------------------------------------------------------------------------
# Identity telescopes


def test_length_zero_degenerates_to_the_context():
    ctx = Telescope((B, C(Var(0))))
    idt = identity_telescope(ctx, EMPTY, sig=FIX)
    assert idt.result == ctx
    assert idt.refl_map.terms == identity_substitution(ctx).terms


def test_length_one_is_the_ordinary_identity_type():
    idt = checked_idt(EMPTY, Telescope((B,)))
    assert idt.result.entries == (B, B, Id(B, Var(1), Var(0)))
    assert idt.refl_map.terms == (Var(0), Var(0), Refl(Var(0)))


SHAPES = [
    (EMPTY, Telescope((B,))),
    (EMPTY, Telescope((B, C(Var(0))))),
    (EMPTY, Telescope((B, C(Var(0)), D(Var(1), Var(0))))),
    (Telescope((B,)), Telescope((C(Var(0)),))),
    (Telescope((B,)), Telescope((C(Var(0)), D(Var(1), Var(0))))),
    (Telescope((B, C(Var(0)))), Telescope((D(Var(1), Var(0)),))),
]


@pytest.mark.parametrize("base,ext", SHAPES)
def test_identity_telescope_well_formed(base, ext):
    idt = checked_idt(base, ext)
    n, k = len(base), len(ext)
    assert len(idt.result) == n + 3 * k
    assert idt.result.entries[: n + k] == base.entries + ext.entries


# Eliminations paired with a branch: a closed motive, and a transport
# motive between the first entry's family instances where one exists.
ELIMS = [
    (EMPTY, Telescope((B,)),
     Pi(C(Var(2)), C(Var(2))), Lam(Var(0))),
    (EMPTY, Telescope((B,)),
     Id(B, T1, T1), Refl(T1)),
    (EMPTY, Telescope((B, C(Var(0)))),
     Id(B, T1, T1), Refl(T1)),
    (EMPTY, Telescope((B, C(Var(0)))),
     Pi(C(Var(5)), C(Var(4))), Lam(Var(0))),
    (EMPTY, Telescope((B, C(Var(0)), D(Var(1), Var(0)))),
     Id(B, T1, T1), Refl(T1)),
    (EMPTY, Telescope((B, C(Var(0)), D(Var(1), Var(0)))),
     Pi(C(Var(8)), C(Var(6))), Lam(Var(0))),
    (Telescope((B,)), Telescope((C(Var(0)),)),
     Pi(D(Var(3), Var(2)), D(Var(4), Var(2))), Lam(Var(0))),
    (Telescope((B,)), Telescope((C(Var(0)), D(Var(1), Var(0)))),
     Id(B, T1, T1), Refl(T1)),
]


@pytest.mark.parametrize("base,ext,motive,branch", ELIMS)
def test_eliminator_typechecks_and_computes_on_refl(base, ext, motive, branch):
    idt = checked_idt(base, ext)
    source = Telescope(base.entries + ext.entries)
    check_type(FIX, EMPTY_EQS, source, branch,
               substitute(motive, idt.refl_map))
    elim = idt.elim_builder(motive, branch)
    check_type(FIX, EMPTY_EQS, idt.result, elim, motive)
    lhs = nf(substitute(elim, idt.refl_map), source)
    rhs = nf(branch, source)
    assert lhs == rhs


def test_eliminator_length_zero_returns_the_branch():
    idt = identity_telescope(Telescope((B,)), EMPTY, sig=FIX)
    branch = Refl(T1)
    assert idt.elim_builder(Id(B, T1, T1), branch) is branch


@pytest.mark.parametrize("base,ext,family", [
    (EMPTY, Telescope((B,)), C(Var(0))),
    (EMPTY, Telescope((B, C(Var(0)))), C(Var(1))),
    (EMPTY, Telescope((B, C(Var(0)))), D(Var(1), Var(0))),
    (Telescope((B,)), Telescope((C(Var(0)),)), D(Var(1), Var(0))),
])
def test_transporter_is_the_identity_on_the_diagonal(base, ext, family):
    idt = checked_idt(base, ext)
    k = len(ext)
    tr = idt.transporter(family)
    fam_orig = weaken(family, 2 * k)
    fam_copy = weaken(weaken(family, k, k), k)
    check_type(FIX, EMPTY_EQS, idt.result, tr,
               Pi(fam_orig, weaken(fam_copy, 1)))
    source = Telescope(base.entries + ext.entries)
    assert nf(substitute(tr, idt.refl_map), source) == Lam(Var(0))


# ---------------------------------------------------------------------------
# Transport


def test_transport_computes_at_refl():
    assert nf(transport(FIX, EMPTY_EQS, EMPTY, C(Var(0)), Refl(T1), C1)) == C1


def test_transport_lands_in_the_far_fiber():
    carried = transport(FIX, EMPTY_EQS, EMPTY, C(Var(0)), P, C1)
    check_type(FIX, EMPTY_EQS, EMPTY, carried, C(T2))


def test_transport_in_an_open_context():
    ctx = Telescope((B, Id(B, Var(0), weaken(T1, 1))))
    carried = transport(FIX, EMPTY_EQS, ctx, C(Var(0)), Var(0), c0(Var(1)))
    check_type(FIX, EMPTY_EQS, ctx, carried, C(weaken(T1, 2)))


def test_transport_rejects_a_non_path():
    with pytest.raises(TypeCheckError):
        transport(FIX, EMPTY_EQS, EMPTY, C(Var(0)), T1, C1)


def test_transport_rejects_a_point_of_the_wrong_fiber():
    with pytest.raises(TypeCheckError):
        transport(FIX, EMPTY_EQS, EMPTY, C(Var(0)), P, T1)


def test_transport_roundtrip_certificate():
    carried = transport(FIX, EMPTY_EQS, EMPTY, C(Var(0)), P, C1)
    cert = transport_roundtrip_certificate(FIX, EMPTY_EQS, EMPTY,
                                           C(Var(0)), P, C1)
    ty = nf(infer_type(FIX, EMPTY_EQS, EMPTY, cert))
    assert isinstance(ty, Id)
    assert ty.type == C(T1)
    assert ty.rhs == C1
    # The certificate's left endpoint is the back-transport of the
    # forward transport; both compute away on a reflexivity path.
    cert_refl = transport_roundtrip_certificate(FIX, EMPTY_EQS, EMPTY,
                                                C(Var(0)), Refl(T1), C1)
    assert nf(infer_type(FIX, EMPTY_EQS, EMPTY, cert_refl)) == Id(C(T1), C1, C1)
    assert nf(cert_refl) == Refl(C1)


def test_constant_family_transport_certificate():
    cert = constant_transport_certificate(FIX, EMPTY_EQS, EMPTY, B, P, T1)
    ty = nf(infer_type(FIX, EMPTY_EQS, EMPTY, cert))
    assert isinstance(ty, Id)
    assert ty.type == B
    assert ty.rhs == T1
    assert nf(ty.lhs) == nf(transport(FIX, EMPTY_EQS, EMPTY,
                                      weaken(B, 1), P, T1))


# ---------------------------------------------------------------------------
# Homotopies

COD1 = Telescope((B,))
COD2 = Telescope((B, C(Var(0))))
F1 = Substitution((T1,), 0)
G1 = Substitution((T2,), 0)
H1 = Homotopy(F1, G1, Substitution((T1, T2, P), 0), EMPTY, COD1)


def two_entry_homotopy():
    tr = identity_telescope(EMPTY, COD1).transporter(C(Var(0)))
    carried = App(substitute(tr, Substitution((T1, T2, P), 0)), C1)
    f = Substitution((T1, C1), 0)
    g = Substitution((T2, carried), 0)
    witness = Substitution((T1, C1, T2, carried, P, Refl(carried)), 0)
    return Homotopy(f, g, witness, EMPTY, COD2)


def test_homotopy_checks():
    check_homotopy(FIX, EMPTY_EQS, H1)
    check_homotopy(FIX, EMPTY_EQS, two_entry_homotopy())


def test_homotopy_rejects_unfactored_witness():
    broken = Homotopy(F1, G1, Substitution((T1, T1, P), 0), EMPTY, COD1)
    with pytest.raises(HomotopyError):
        check_homotopy(FIX, EMPTY_EQS, broken)


def test_homotopy_rejects_wrong_lengths():
    broken = Homotopy(F1, G1, Substitution((T1, T2), 0), EMPTY, COD1)
    with pytest.raises(HomotopyError):
        check_homotopy(FIX, EMPTY_EQS, broken)


def test_refl_homotopy():
    h = refl_homotopy(F1, EMPTY, COD1)
    check_homotopy(FIX, EMPTY_EQS, h)
    assert h.paths() == (Refl(T1),)
    with pytest.raises(HomotopyError):
        refl_homotopy(F1, EMPTY, COD2)


@pytest.mark.parametrize("h", [H1, two_entry_homotopy()])
def test_inversion(h):
    inv = invert_homotopy(h)
    check_homotopy(FIX, EMPTY_EQS, inv)
    assert inv.source.terms == h.target.terms
    assert inv.target.terms == h.source.terms
    double = invert_homotopy(inv)
    check_homotopy(FIX, EMPTY_EQS, double)
    assert double.source.terms == h.source.terms
    assert double.target.terms == h.target.terms


@pytest.mark.parametrize("h", [H1, two_entry_homotopy()])
def test_composition_with_inverse(h):
    comp = compose_homotopies(h, invert_homotopy(h))
    check_homotopy(FIX, EMPTY_EQS, comp)
    assert comp.source.terms == h.source.terms
    assert comp.target.terms == h.source.terms


def test_composition_rejects_mismatched_endpoints():
    with pytest.raises(HomotopyError):
        compose_homotopies(H1, H1)


def test_compose_refl_refl_normalizes_to_refl():
    r = refl_homotopy(F1, EMPTY, COD1)
    comp = compose_homotopies(r, r)
    check_homotopy(FIX, EMPTY_EQS, comp)
    assert tuple(nf(t) for t in comp.witness.terms) == r.witness.terms
    r2 = refl_homotopy(Substitution((T1, C1), 0), EMPTY, COD2)
    comp2 = compose_homotopies(r2, r2)
    check_homotopy(FIX, EMPTY_EQS, comp2)
    assert tuple(nf(t) for t in comp2.witness.terms) == r2.witness.terms


def test_parallel_certificates_for_absorbed_refl():
    comp = compose_homotopies(refl_homotopy(F1, EMPTY, COD1), H1)
    check_homotopy(FIX, EMPTY_EQS, comp)
    certs = parallel_certificates(comp, H1)
    assert len(certs) == 1
    idt = identity_telescope(EMPTY, COD1)
    path_ty = substitute(idt.result.entries[2], Substitution((T1, T2), 0))
    check_type(FIX, EMPTY_EQS, EMPTY, certs[0],
               Id(path_ty, comp.paths()[0], H1.paths()[0]))


def test_parallel_certificates_reject_different_endpoints():
    with pytest.raises(HomotopyError):
        parallel_certificates(H1, invert_homotopy(H1))


def test_whisker_post():
    diag = Substitution((Var(0), Var(0)), 1)
    wh = whisker_post(diag, Telescope((B, B)), H1)
    check_homotopy(FIX, EMPTY_EQS, wh)
    assert wh.source.terms == (T1, T1)
    assert wh.target.terms == (T2, T2)
    dep = Substitution((Var(0), c0(Var(0))), 1)
    wh2 = whisker_post(dep, COD2, H1)
    check_homotopy(FIX, EMPTY_EQS, wh2)
    assert wh2.source.terms == (T1, c0(T1))


# A homotopy with genuinely open witness components: over the context
# (x : B, q : Id B x t1) the variable path q connects x to t1.
GAMMA = Telescope((B, Id(B, Var(0), weaken(T1, 1))))
HV = Homotopy(
    Substitution((Var(1),), 2), Substitution((weaken(T1, 2),), 2),
    Substitution((Var(1), weaken(T1, 2), Var(0)), 2), GAMMA, COD1,
)
CLOSE = Substitution((T1, Refl(T1)), 0)  # collapses GAMMA to a point
# The same collapse along a path that is not literally reflexivity.
CLOSE_LOOP = Substitution((T1, Const("loop")), 0)


def test_open_homotopy_checks():
    check_homotopy(FIX, EMPTY_EQS, HV)


def test_whisker_pre():
    h = whisker_pre(HV, CLOSE, EMPTY)
    check_homotopy(FIX, EMPTY_EQS, h)
    assert h.source.terms == (T1,)
    assert h.witness.terms[2] == Refl(T1)


def test_builders_commute_with_substitution():
    # Inversion, composition, and whiskering are substitution instances
    # of generic terms, so applying them before or after restricting
    # along CLOSE yields syntactically identical witnesses.
    left = invert_homotopy(whisker_pre(HV, CLOSE, EMPTY))
    right = whisker_pre(invert_homotopy(HV), CLOSE, EMPTY)
    assert left.witness.terms == right.witness.terms

    comp_then = whisker_pre(
        compose_homotopies(HV, invert_homotopy(HV)), CLOSE, EMPTY)
    then_comp = compose_homotopies(
        whisker_pre(HV, CLOSE, EMPTY),
        invert_homotopy(whisker_pre(HV, CLOSE, EMPTY)))
    assert comp_then.witness.terms == then_comp.witness.terms

    post = whisker_post(Substitution((Var(0), c0(Var(0))), 1), COD2, HV)
    left2 = whisker_pre(post, CLOSE, EMPTY)
    right2 = whisker_post(Substitution((Var(0), c0(Var(0))), 1), COD2,
                          whisker_pre(HV, CLOSE, EMPTY))
    assert left2.witness.terms == right2.witness.terms


# ---------------------------------------------------------------------------
# Section rectification


def section_over_hv():
    return Substitution((Var(1), c0(Var(1))), 2)


def test_rectify_section_is_strict_over_the_base_map():
    f = section_over_hv()
    strict, back = rectify_section(f, HV.target, HV, C(Var(0)))
    assert strict.terms[:1] == HV.target.terms
    check_substitution(FIX, EMPTY_EQS, GAMMA, COD2, strict)
    check_homotopy(FIX, EMPTY_EQS, back)
    assert back.source.terms == strict.terms
    assert back.target.terms == f.terms


def test_rectify_section_along_refl_returns_the_section():
    f = Substitution((T1, C1), 0)
    h = refl_homotopy(F1, EMPTY, COD1)
    strict, back = rectify_section(f, F1, h, C(Var(0)))
    assert strict is f
    assert back.witness.terms == refl_homotopy(f, EMPTY, COD2).witness.terms


def test_rectify_section_rejects_a_mismatched_section():
    with pytest.raises(HomotopyError):
        rectify_section(Substitution((T2, C1), 0), G1, H1, C(Var(0)))
    with pytest.raises(HomotopyError):
        rectify_section(Substitution((T1,), 0), G1, H1, C(Var(0)))


def test_rectify_section_commutes_with_substitution():
    # Restrict along a collapse that keeps the path nontrivial: the
    # reflexivity short-circuit is the one deliberate departure from
    # building by substitution into generic terms.
    f = section_over_hv()
    strict, back = rectify_section(f, HV.target, HV, C(Var(0)))
    closed_strict, closed_back = rectify_section(
        compose(f, CLOSE_LOOP), compose(HV.target, CLOSE_LOOP),
        whisker_pre(HV, CLOSE_LOOP, EMPTY), C(Var(0)))
    assert compose(strict, CLOSE_LOOP).terms == closed_strict.terms
    assert compose(back.witness, CLOSE_LOOP).terms == closed_back.witness.terms
