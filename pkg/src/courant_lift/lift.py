"""The lift of base sections to linear sections of TE + T*E, and checks built on it.

For a bracket on TM + E*, the lift of nu = (X, eps) is

    Xi(nu) = (D-hat of delta_nu, d l_eps - phi~),

where delta_nu and phi come from the dual derivation D_nu restricted to E.
Each ``check_*`` returns a ``LiftReport`` with the exact residual of the
first failing sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .brackets import BracketSpec, jacobiator, twist
from .bundle import (
    AnchoredSection,
    BundleContext,
    CoSection,
    Derivation,
    derivation_commutator,
    pairing,
)
from .cartan import Form, Multivector, VectorValuedForm, apply_vf, exterior_d, interior, lie_bracket
from .sampling import SamplePlan
from .scalar import Poly
from .serialize import encode_anchored, encode_general
from .total_space import (
    GeneralizedSection,
    b_transform,
    core_linear,
    courant_dorfman_total,
    d_ell,
    ell,
    is_core_linear_form,
    lam,
    linear_vf,
    pairing_total,
    pull,
    u,
    vertical_lift,
)


@dataclass
class LiftReport:
    holds: bool
    residual: object = None
    witness: Optional[dict] = None
    samples: int = 0
    method: str = ""
    details: Dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"holds": self.holds, "samples": self.samples, "method": self.method}
        if not self.holds:
            out["witness"] = self.witness
            out["residual"] = _encode_any(self.residual)
        out.update(self.details)
        return out


def _encode_any(v):
    if v is None:
        return None
    if isinstance(v, GeneralizedSection):
        return encode_general(v)
    if isinstance(v, AnchoredSection):
        return encode_anchored(v)
    if isinstance(v, Poly):
        return v.to_json()
    from .serialize import encode_form

    if isinstance(v, (Form, Multivector)):
        return encode_form(v)
    return repr(v)


class Lifter:
    """Lifts for one bracket, cached per section object."""

    def __init__(self, spec: BracketSpec):
        self.spec = spec
        self.ctx = spec.context
        self._cache: Dict[int, Tuple[AnchoredSection, GeneralizedSection]] = {}

    def __call__(self, nu: AnchoredSection) -> GeneralizedSection:
        hit = self._cache.get(id(nu))
        if hit is not None and hit[0] is nu:
            return hit[1]
        xi = build_lift(self.spec, nu)
        self._cache[id(nu)] = (nu, xi)
        return xi


def lift_parts(spec: BracketSpec, nu: AnchoredSection):
    op = spec.dual(nu)
    return op.delta(), op.phi()


def build_lift(spec: BracketSpec, nu: AnchoredSection) -> GeneralizedSection:
    ctx = spec.context
    d, phi = lift_parts(spec, nu)
    return GeneralizedSection(linear_vf(ctx, d), d_ell(ctx, nu.eps) - core_linear(ctx, phi))


def d_lambda(ctx: BundleContext, mu: VectorValuedForm) -> Form:
    return exterior_d(lam(ctx, mu))


def _witness(label, sections) -> dict:
    return {"sample": label, "sections": [encode_anchored(s) for s in sections]}


def _run(plan_iter, body, method: str) -> LiftReport:
    count = 0
    for label, secs in plan_iter:
        count += 1
        res = body(*secs)
        if res is not None and not res.is_zero():
            return LiftReport(False, res, _witness(label, secs), count, method)
    return LiftReport(True, None, None, count, method)


# ---------------------------------------------------------------------------
# naturality and the main identities


def check_natural(spec: BracketSpec, plan: SamplePlan | None = None) -> LiftReport:
    """[[Xi nu1, Xi nu2]] = Xi [[nu1, nu2]] on every sample pair."""
    plan = plan or SamplePlan()
    L = Lifter(spec)

    def body(n1, n2):
        return courant_dorfman_total(L(n1), L(n2)) - build_lift(spec, spec(n1, n2))

    return _run(plan.pairs(spec.context), body, plan.method(spec.context, 2))


def check_main2(spec: BracketSpec, plan: SamplePlan | None = None) -> LiftReport:
    """Pairing identities, the vector part of Xi, and [[Xi nu, tau-up]] = (D_nu tau)-up."""
    plan = plan or SamplePlan()
    ctx = spec.context
    L = Lifter(spec)
    S = plan.sampler(ctx)
    z = Poly.zero(ctx.total_vars)
    trial = [0]

    class Res:
        def __init__(self, parts):
            self.parts = parts

        def is_zero(self):
            return all(not p for p in self.parts)

    def body(n1, n2):
        k = trial[0]
        trial[0] += 1
        tau = S.cosection(k)
        x1, x2 = L(n1), L(n2)
        sym = spec(n1, n2) + spec(n2, n1)
        item1a = pairing_total(x1, x2) - ell(ctx, sym.eps)
        item1b = pairing_total(x1, vertical_lift(ctx, tau)) - pull(ctx, pairing(n1, tau))
        op = spec.dual(n1)
        item2 = x1.V - linear_vf(ctx, op.delta())
        item3 = courant_dorfman_total(x1, vertical_lift(ctx, tau)) - vertical_lift(ctx, op(tau))
        return Res([item1a, item1b, item2, item3.V, item3.A])

    rep = _run(plan.pairs(ctx), body, plan.method(ctx, 2))
    if not rep.holds:
        names = ["pairing of lifts", "pairing with vertical lift", "vector part", "core bracket", "core bracket"]
        rep.details["failed_item"] = names[next(i for i, p in enumerate(rep.residual.parts) if p)]
        rep.residual = next(p for p in rep.residual.parts if p)
    return rep


# ---------------------------------------------------------------------------
# the Omni-Lie algebroid Der(E*) + J^1(E*)


@dataclass(frozen=True, eq=True)
class OmniElement:
    """(d, (eps, phi)) with d a derivation of E* and phi in Hom(TM, E*).

    ``d.matrix`` acts on E* components; phi(d_i) = sum_a phi[a][i] eps^a.
    """

    d: Derivation
    eps: Tuple[Poly, ...]
    phi: Tuple[Tuple[Poly, ...], ...]

    def is_zero(self) -> bool:
        return self.d.is_zero() and not any(self.eps) and not any(p for row in self.phi for p in row)

    def __sub__(self, o):
        return OmniElement(
            self.d - o.d,
            tuple(a - b for a, b in zip(self.eps, o.eps)),
            tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self.phi, o.phi)),
        )


def _phi_apply(phi, X: Multivector) -> Tuple[Poly, ...]:
    n = X.nvars
    xs = {i: c for (i,), c in X.terms.items()}
    out = []
    for row in phi:
        v = Poly.zero(n)
        for i, c in xs.items():
            if row[i]:
                v = v + row[i] * c
        out.append(v)
    return tuple(out)


def lie_on_hom(d: Derivation, phi) -> Tuple[Tuple[Poly, ...], ...]:
    """(L_d phi)(Y) = d(phi(Y)) - phi([X, Y]) for phi in Hom(TM, E*)."""
    r, n = len(phi), d.nvars
    X = d.symbol
    grads = {i: c.partials() for (i,), c in X.terms.items()}
    out = [[None] * n for _ in range(r)]
    for i in range(n):
        col = tuple(phi[a][i] for a in range(r))
        val = list(d.apply(col))
        # -phi([X, d_i]) = +phi(d_i X^j d_j)
        for j, g in grads.items():
            gi = g.get(i)
            if gi is None:
                continue
            for a in range(r):
                if phi[a][j]:
                    val[a] = val[a] + phi[a][j] * gi
        for a in range(r):
            out[a][i] = val[a]
    return tuple(tuple(row) for row in out)


def omni_pairing(d: Derivation, eps: Sequence[Poly], phi) -> Tuple[Poly, ...]:
    """<d, (eps, phi)> = d(eps) + phi(X), an element of E*."""
    a = d.apply(eps)
    b = _phi_apply(phi, d.symbol)
    return tuple(p + q for p, q in zip(a, b))


def omni_symmetric_pairing(x: OmniElement, y: OmniElement) -> Tuple[Poly, ...]:
    a = omni_pairing(x.d, y.eps, y.phi)
    b = omni_pairing(y.d, x.eps, x.phi)
    return tuple(p + q for p, q in zip(a, b))


def omni_bracket(x: OmniElement, y: OmniElement) -> OmniElement:
    """([d1,d2], L_{d1} mu2 - L_{d2} mu1 + j1 <d2, mu1>)."""
    d = derivation_commutator(x.d, y.d)
    e12 = x.d.apply(y.eps)
    e21 = y.d.apply(x.eps)
    jet = omni_pairing(y.d, x.eps, x.phi)
    eps = tuple(a - b + c for a, b, c in zip(e12, e21, jet))
    p12 = lie_on_hom(x.d, y.phi)
    p21 = lie_on_hom(y.d, x.phi)
    phi = tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(p12, p21))
    return OmniElement(d, eps, phi)


def to_omni(dec) -> OmniElement:
    """Dictionary from a linear-section decomposition (d_chi, eps, phi_chi).

    The E*-derivation is the dual of d_chi and the Hom(TM, E*) part is -phi_chi
    read as the same array.
    """
    return OmniElement(dec.d.dual(), dec.eps, tuple(tuple(-p for p in row) for row in dec.phi))


def from_omni(x: OmniElement):
    from .total_space import LinearSectionDecomp

    return LinearSectionDecomp(x.d.dual(), x.eps, tuple(tuple(-p for p in row) for row in x.phi))


# ---------------------------------------------------------------------------
# twists


def twisted_lift(spec: BracketSpec, mu: VectorValuedForm, nu: AnchoredSection) -> GeneralizedSection:
    return build_lift(twist(spec, mu), nu)


def iota_vv(X: Multivector, mu: VectorValuedForm) -> VectorValuedForm:
    return mu.map(lambda m: interior(X, m))


def check_twist(spec: BracketSpec, mu: VectorValuedForm, plan: SamplePlan | None = None,
                jacobi_plan: SamplePlan | None = None) -> LiftReport:
    """mu twists spec iff [[Xi nu1, Xi nu2]]_{d Lambda_mu} = Xi [[nu1, nu2]]_mu."""
    plan = plan or SamplePlan()
    ctx = spec.context
    tw = twist(spec, mu)
    H = d_lambda(ctx, mu)
    L = Lifter(spec)

    def body(n1, n2):
        return courant_dorfman_total(L(n1), L(n2), H) - build_lift(spec, tw(n1, n2))

    rep = _run(plan.pairs(ctx), body, plan.method(ctx, 2))
    jplan = jacobi_plan or plan
    jac = find_jacobi_witness(tw, jplan)
    rep.details["twisted_jacobi"] = "pass" if jac is None else {"fail": jac}
    rep.details["consistent"] = rep.holds == (jac is None)
    return rep


def find_jacobi_witness(spec: BracketSpec, plan: SamplePlan) -> Optional[dict]:
    from .serialize import encode_anchored as enc

    for label, (a, b, c) in plan.triples(spec.context):
        J = jacobiator(spec, a, b, c)
        if not J.is_zero():
            return {"sample": label, "sections": [enc(a), enc(b), enc(c)], "jacobiator": enc(J)}
    return None


def check_twist1(spec: BracketSpec, mu: VectorValuedForm, plan: SamplePlan) -> LiftReport:
    """[[Xi^mu nu1, Xi^mu nu2]]_{-d Lambda_mu} = Xi^mu [[nu1, nu2]] (untwisted bracket), for any mu."""
    ctx = spec.context
    tw = twist(spec, mu)
    H = -d_lambda(ctx, mu)
    L = Lifter(tw)

    def body(n1, n2):
        return courant_dorfman_total(L(n1), L(n2), H) - L(spec(n1, n2))

    return _run(plan.pairs(ctx), body, plan.method(ctx, 2))


def check_linear_core_twist(spec: BracketSpec, mu: VectorValuedForm, plan: SamplePlan) -> LiftReport:
    """[[Xi nu, tau-up]]_{d Lambda_mu} = (D^mu_nu tau)-up, for any mu."""
    ctx = spec.context
    tw = twist(spec, mu)
    H = d_lambda(ctx, mu)
    S = plan.sampler(ctx)
    count = [0]

    def body(nu):
        k = count[0]
        count[0] += 1
        tau = S.cosection(k, 7)
        lhs = courant_dorfman_total(build_lift(spec, nu), vertical_lift(ctx, tau), H)
        return lhs - vertical_lift(ctx, tw.dual(nu)(tau))

    return _run(plan.singles(ctx), body, plan.method(ctx, 1))


# ---------------------------------------------------------------------------
# symmetries


def phi_beta(beta: VectorValuedForm, nu: AnchoredSection) -> AnchoredSection:
    """(X, eps) -> (X, eps + ι_X beta)."""
    z = Poly.zero(nu.X.nvars)
    add = tuple(interior(nu.X, b).terms.get((), z) for b in beta)
    return AnchoredSection(nu.X, tuple(p + q for p, q in zip(nu.eps, add)))


def symmetry_difference(spec: BracketSpec, beta: VectorValuedForm, nu: AnchoredSection) -> GeneralizedSection:
    """Xi(Phi_beta nu) - Phi_B(Xi nu) with B = -d Lambda_beta: the core-linear phi~_(X,eps)."""
    ctx = spec.context
    B = -d_lambda(ctx, beta)
    return build_lift(spec, phi_beta(beta, nu)) - b_transform(B, build_lift(spec, nu))


def check_symmetry(spec: BracketSpec, beta: VectorValuedForm, plan: SamplePlan | None = None) -> LiftReport:
    plan = plan or SamplePlan()
    ctx = spec.context

    def lift_body(nu):
        return symmetry_difference(spec, beta, nu)

    rep = _run(plan.singles(ctx), lift_body, plan.method(ctx, 1))

    def base_body(n1, n2):
        return spec(phi_beta(beta, n1), phi_beta(beta, n2)) - phi_beta(beta, spec(n1, n2))

    base = _run(plan.pairs(ctx), base_body, plan.method(ctx, 2))
    rep.details["base_level"] = base.to_json()
    rep.details["agree"] = rep.holds == base.holds
    return rep


def core_linear_section(ctx: BundleContext, phi_E, phi_T) -> GeneralizedSection:
    """phi~ for phi(e_a) = (sum_b phi_E[a][b] e_b, sum_i phi_T[a][i] dx_i)."""
    N = ctx.total_vars
    terms = {}
    for b in range(ctx.r):
        c = Poly.zero(N)
        for a in range(ctx.r):
            if phi_E[a][b]:
                c = c + pull(ctx, phi_E[a][b]) * u(ctx, a)
        if c:
            terms[(ctx.n + b,)] = c
    return GeneralizedSection(Multivector(N, 1, terms), core_linear(ctx, phi_T))


def linvert_diagnostic(spec: BracketSpec, beta: VectorValuedForm, phi_E, phi_T,
                       nus: Iterable[AnchoredSection]) -> dict:
    """Whether d<Phi_B(Xi nu), phi~> is core-linear for every sampled nu."""
    ctx = spec.context
    B = -d_lambda(ctx, beta)
    core = core_linear_section(ctx, phi_E, phi_T)
    count = 0
    for nu in nus:
        count += 1
        f = pairing_total(b_transform(B, build_lift(spec, nu)), core)
        from .cartan import function_form

        df = exterior_d(function_form(f))
        if df and not is_core_linear_form(ctx, df):
            return {"core_linear_for_all": False, "witness": encode_anchored(nu), "samples": count}
    return {"core_linear_for_all": True, "samples": count}
