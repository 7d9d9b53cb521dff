import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from courant_lift.brackets import catalog, twist
from courant_lift.bundle import AnchoredSection, BundleContext, CoSection, Derivation, pairing
from courant_lift.cartan import (
    Form,
    Multivector,
    VectorValuedForm,
    apply_vf,
    coordinate_form,
    coordinate_vector,
    from_higher_form,
    interior,
    one_form,
)
from courant_lift.lift import (
    OmniElement,
    build_lift,
    check_linear_core_twist,
    check_main2,
    check_natural,
    check_symmetry,
    check_twist,
    check_twist1,
    linvert_diagnostic,
    omni_bracket,
    phi_beta,
    to_omni,
    twisted_lift,
)
from courant_lift.sampling import SamplePlan, Sampler, generator_set
from courant_lift.scalar import Poly
from courant_lift.total_space import (
    GeneralizedSection,
    LinearSectionDecomp,
    courant_dorfman_total,
    decompose_linear,
    is_linear,
    lam,
    phi_E,
    vertical_lift,
)

seeds = st.integers(0, 2**32)
SMALL = SamplePlan(trials=5)
QUICK = SamplePlan(trials=5, exhaustive=False)


def cd(n):
    return catalog("courant-dorfman", n=n)


def total(ctx, V=None, A=None):
    N = ctx.total_vars
    return GeneralizedSection(V if V is not None else Multivector.zero(N, 1), A if A is not None else Form.zero(N, 1))


def non_alternating_mu():
    """(dx ^ dy) (x) dx on R^3 with E = TM."""
    z = Form.zero(3, 2)
    return VectorValuedForm([coordinate_form(3, (0, 1), Poly.const(3, 1)), z, z])


# build_lift ------------------------------------------------------------------


def test_lift_examples_courant_dorfman():
    spec = cd(2)
    ctx = spec.context
    N = ctx.total_vars
    x, u1 = Poly.var(N, 0), Poly.var(N, 2)
    nu = AnchoredSection.build(ctx, eps=[ctx.zero(), ctx.x(0)])
    want = total(ctx, A=coordinate_form(N, (1,), u1) + coordinate_form(N, (3,), x))
    assert build_lift(spec, nu) == want
    nu = AnchoredSection.build(ctx, X=ctx.partial(0))
    assert build_lift(spec, nu) == total(ctx, V=coordinate_vector(N, 0, Poly.const(N, 1)))
    assert build_lift(spec, AnchoredSection.zero(ctx)).is_zero()


CATALOG = [("courant-dorfman", 2), ("forms:2", 3), ("mixed:1,1", 3), ("lie-only", 2)]


@pytest.mark.parametrize("name,n", CATALOG)
@given(seed=seeds)
def test_lift_is_linear_and_projects_back(name, n, seed):
    spec = catalog(name, n=n)
    S = Sampler(spec.context, seed)
    nu, nu2 = S.anchored(0), S.anchored(1)
    xi = build_lift(spec, nu)
    assert is_linear(spec.context, xi)
    assert phi_E(spec.context, xi) == nu
    assert build_lift(spec, nu + nu2) == xi + build_lift(spec, nu2)


def test_lift_is_not_function_homogeneous():
    spec = cd(2)
    ctx = spec.context
    nu = AnchoredSection.build(ctx, X=ctx.partial(0))
    f = ctx.x(0)
    scaled = build_lift(spec, nu.scale(f))
    N = ctx.total_vars
    assert scaled != total(ctx, V=build_lift(spec, nu).V.scale(f.extend(N)))


@pytest.mark.parametrize("name,n", CATALOG)
@given(seed=seeds)
def test_bracket_recovered_from_lift(name, n, seed):
    """Read the dual derivation off [[Xi nu, tau-up]] and rebuild the bracket through the pairing."""
    spec = catalog(name, n=n)
    ctx = spec.context
    S = Sampler(ctx, seed)
    n1, n2 = S.anchored(0), S.anchored(1)
    xi = build_lift(spec, n1)
    frame = [CoSection.build(ctx, e=[ctx.one() if a == b else ctx.zero() for a in range(ctx.r)]) for b in range(ctx.r)]
    frame += [CoSection.build(ctx, theta=one_form(n, {i: ctx.one()})) for i in range(n)]

    def recovered(tau):
        up = courant_dorfman_total(xi, vertical_lift(ctx, tau))
        e = tuple(up.V.terms.get((n + a,), Poly.zero(ctx.total_vars)).restrict(n) for a in range(ctx.r))
        theta = Form(n, 1, {I: c.restrict(n) for I, c in up.A.terms.items()})
        got = CoSection(e, theta)
        assert vertical_lift(ctx, got) == up
        return got

    vals = [apply_vf(n1.X, pairing(n2, t)) - pairing(n2, recovered(t)) for t in frame]
    rebuilt = AnchoredSection.build(ctx, X=Multivector(n, 1, {(i,): vals[ctx.r + i] for i in range(n)}), eps=vals[: ctx.r])
    assert rebuilt == spec(n1, n2)


@pytest.mark.parametrize("name", ["courant-dorfman", "forms:1", "lie-only"])
@given(seed=seeds)
def test_split_brackets_lift_vector_fields_without_du(name, seed):
    spec = catalog(name, n=2)
    ctx = spec.context
    X = Sampler(ctx, seed).anchored(0).X
    A = build_lift(spec, AnchoredSection.build(ctx, X=X)).A
    assert all(j < ctx.n for (j,) in A.terms)


# naturality and main2 ----------------------------------------------------------


@pytest.mark.parametrize("name,n", [("courant-dorfman", 2), ("lie-only", 2), ("forms:2", 3), ("mixed:1,1", 3)])
def test_natural_holds(name, n):
    rep = check_natural(catalog(name, n=n), SMALL)
    assert rep.holds and rep.residual is None
    assert rep.samples > 5


def test_natural_fails_for_non_twisting_mu():
    rep = check_natural(twist(cd(3), non_alternating_mu()), SMALL)
    assert not rep.holds
    assert not rep.residual.is_zero()
    assert rep.witness["sections"]


@pytest.mark.parametrize("name,n", [("courant-dorfman", 2), ("forms:2", 3), ("lie-only", 2)])
def test_main2_holds(name, n):
    assert check_main2(catalog(name, n=n), SMALL).holds


@given(seed=seeds)
def test_main2_pairing_vanishes_on_vector_fields_for_split_brackets(seed):
    spec = cd(3)
    ctx = spec.context
    nu = AnchoredSection.build(ctx, X=Sampler(ctx, seed).anchored(0).X)
    xi = build_lift(spec, nu)
    from courant_lift.total_space import pairing_total

    assert pairing_total(xi, xi).is_zero()


# omni ------------------------------------------------------------------------

R1 = BundleContext.generic(1, 1)


def omni(d, eps, phi):
    return OmniElement(d, tuple(eps), tuple(tuple(r) for r in phi))


def test_omni_examples():
    z, one, x = R1.zero(), R1.one(), R1.x(0)
    d1 = Derivation(R1.partial(0), ((x,),))
    d2 = Derivation(Multivector.zero(1, 1), ((one,),))
    a = omni(d1, [one], [[z]])
    b = omni(d2, [z], [[z]])
    zero = omni(Derivation.zero(1, 1), [z], [[z]])
    assert omni_bracket(zero, a).is_zero()
    assert omni_bracket(a, b).is_zero()
    assert omni_bracket(a, a) == omni(Derivation.zero(1, 1), [x], [[z]])


@pytest.mark.parametrize("ctx", [BundleContext.generic(1, 1), BundleContext.generic(2, 2), BundleContext.generic(3, 1)])
@given(seed=seeds)
def test_lift_omni_consistency(ctx, seed):
    S = Sampler(ctx, seed)
    d1 = LinearSectionDecomp(S.derivation(0), S.eps(0), S.phi(0))
    d2 = LinearSectionDecomp(S.derivation(1), S.eps(1), S.phi(1))
    got = decompose_linear(ctx, courant_dorfman_total(d1.reconstruct(ctx), d2.reconstruct(ctx)))
    assert to_omni(got) == omni_bracket(to_omni(d1), to_omni(d2))


# twists ----------------------------------------------------------------------

TOP3 = coordinate_form(3, (0, 1, 2), Poly.const(3, 1))


def test_twist_by_zero_holds():
    rep = check_twist(cd(2), VectorValuedForm.zero(2, 2, 2), SMALL)
    assert rep.holds and rep.details["consistent"]


def test_twist_by_closed_three_form_holds():
    spec = cd(3)
    mu = from_higher_form(TOP3)
    rep = check_twist(spec, mu, QUICK, SamplePlan(trials=3))
    assert rep.holds and rep.details["twisted_jacobi"] == "pass"
    assert check_natural(twist(spec, mu), QUICK).holds


def test_twist_by_non_alternating_mu_fails():
    rep = check_twist(cd(3), non_alternating_mu(), QUICK, SamplePlan(trials=3))
    assert not rep.holds
    assert rep.details["twisted_jacobi"] != "pass"
    assert rep.details["consistent"]
    assert rep.details["twisted_jacobi"]["fail"]["jacobiator"]


@pytest.mark.parametrize("name,n", [("courant-dorfman", 2), ("forms:1", 2)])
@given(seed=seeds)
@settings(max_examples=20)
def test_twisted_lift_adds_core_linear_term(name, n, seed):
    spec = catalog(name, n=n)
    ctx = spec.context
    S = Sampler(ctx, seed)
    mu, nu = S.vvform(0, 2), S.anchored(0)
    add = lam(ctx, mu.map(lambda m: interior(nu.X, m)))
    xi = build_lift(spec, nu)
    assert twisted_lift(spec, mu, nu) == GeneralizedSection(xi.V, xi.A + add)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_unconditional_twist_identities(seed):
    spec = cd(2)
    mu = Sampler(spec.context, seed).vvform(0, 2)
    assert check_twist1(spec, mu, QUICK).holds
    assert check_linear_core_twist(spec, mu, QUICK).holds


def test_unconditional_twist_identities_with_non_twisting_mu():
    spec = cd(3)
    mu = non_alternating_mu()
    assert check_twist1(spec, mu, QUICK).holds
    assert check_linear_core_twist(spec, mu, QUICK).holds


# symmetries ------------------------------------------------------------------


def test_symmetry_examples():
    spec = cd(2)
    ctx = spec.context
    assert check_symmetry(spec, VectorValuedForm.zero(2, 2, 1), SMALL).holds
    beta = from_higher_form(coordinate_form(2, (0, 1), ctx.one()))
    assert phi_beta(beta, AnchoredSection.build(ctx, X=ctx.partial(0))) == AnchoredSection.build(
        ctx, X=ctx.partial(0), eps=[ctx.zero(), ctx.one()]
    )
    n1 = AnchoredSection.build(ctx, X=ctx.partial(0), eps=[ctx.zero(), ctx.one()])
    n2 = AnchoredSection.build(ctx, X=ctx.partial(1), eps=[-ctx.one(), ctx.zero()])
    assert spec(n1, n2).is_zero()
    rep = check_symmetry(spec, beta, SMALL)
    assert rep.holds and rep.details["agree"]


def test_symmetry_fails_for_non_closed_beta():
    spec = cd(3)
    beta = from_higher_form(coordinate_form(3, (1, 2), spec.context.x(0)))
    rep = check_symmetry(spec, beta, SMALL)
    assert not rep.holds
    assert rep.details["base_level"]["holds"] is False
    assert rep.details["agree"]
    assert rep.witness is not None


def test_linvert_diagnostic():
    spec = cd(2)
    ctx = spec.context
    z, one = ctx.zero(), ctx.one()
    beta = VectorValuedForm.zero(2, 2, 1)
    nus = generator_set(ctx)
    zero_E = ((z, z), (z, z))
    zero_T = ((z, z), (z, z))
    assert linvert_diagnostic(spec, beta, zero_E, zero_T, nus)["core_linear_for_all"]
    rep = linvert_diagnostic(spec, beta, ((one, z), (z, z)), zero_T, nus)
    assert not rep["core_linear_for_all"]
    rep = linvert_diagnostic(spec, beta, zero_E, ((z, one), (z, z)), nus)
    assert not rep["core_linear_for_all"]
